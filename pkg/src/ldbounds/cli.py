"""Command-line front end.

Every subcommand prints one JSON object to stdout.  Exit codes: 0 on
success, 1 for invalid input (bad flags, malformed files, out-of-range
parameters), 2 for runtime failures (I/O, diverged training, starved
samplers).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import traceback

import numpy as np

from . import bounds as bnd
from .constructions import (
    certify,
    cover_decode,
    cover_encode,
    packing_l1_ce,
    packing_l1_index,
    packing_linf,
    packing_mu_index,
    read_cover,
    write_cover,
)
from .data import load_csv, save_csv, sort_dataset_1d
from .errors import InvalidRequest, LdboundsError, RuntimeFailure, ValidationError
from .harness import (
    PRESET_MODELS,
    parse_config,
    run_experiment,
    emit_csv,
    emit_plot_data,
)
from .models import TrainConfig, init_model, model_bits, param_count, save_model, train
from .queryfn import OpKind

CDF_PRESETS = {
    "square": np.square,
    "sqrt": np.sqrt,
    "identity": lambda x: x,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; we owe 1 instead."""

    def error(self, message):
        raise InvalidRequest(message)


def _emit(doc: dict) -> None:
    print(json.dumps(doc))


def _cmd_bounds(args) -> dict:
    req = bnd.BoundRequest(
        op=OpKind(args.op),
        norm=args.norm,
        side=args.side,
        n=args.n,
        d=args.d,
        eps=args.eps,
        u=args.u,
    )
    res = bnd.lower_bound_bits(req) if args.side == bnd.LOWER else bnd.upper_bound_bits(req)
    bits = res.bits if math.isfinite(res.bits) else None
    doc = {"bits": bits, "formula_id": res.formula_id, "validity": res.validity}
    if res.reason is not None:
        doc["reason"] = res.reason
    return doc


def _cmd_eps_star(args) -> dict:
    res = bnd.eps_star(args.bits, OpKind(args.op), args.norm, args.n, args.d, u=args.u)
    return {"eps_star": res.eps, "formula_id": res.formula_id, "validity": res.flag}


def _build_family(args):
    kind = args.construction
    if kind == "packing-linf":
        if args.u is None:
            raise InvalidRequest("packing-linf requires --u")
        return packing_linf(
            OpKind(args.op), args.n, args.d, args.eps, args.u, args.count, args.seed
        )
    if kind == "packing-l1-index":
        return packing_l1_index(args.n, args.eps, args.count, args.seed)
    if kind == "packing-l1-ce":
        return packing_l1_ce(args.n, args.d, args.eps, args.count, args.seed)
    return packing_mu_index(
        args.n, args.eps, CDF_PRESETS[args.cdf], args.count, args.seed
    )


def _cmd_certify(args) -> dict:
    family = _build_family(args)
    cert = certify(family, args.pairs, args.seed, mc_samples=args.mc_samples)
    return {
        "passed": cert.passed,
        "pairs_checked": cert.pairs_checked,
        "min_observed": cert.min_observed,
        "claimed": cert.claimed,
        "method": cert.method,
        "samples": cert.samples,
        "confidence": cert.confidence,
        "members": len(family.datasets),
    }


def _cmd_encode(args) -> dict:
    dataset = load_csv(args.input)
    cdf = CDF_PRESETS[args.cdf] if args.cdf else None
    code = cover_encode(dataset, args.eps, OpKind(args.op), cdf=cdf)
    write_cover(code, args.out)
    return {
        "op": code.op.value,
        "n": code.n,
        "d": code.d,
        "resolution": code.resolution,
        "bit_length": code.bit_length,
        "out": args.out,
    }


def _cmd_decode(args) -> dict:
    code = read_cover(args.input)
    cdf = CDF_PRESETS[args.cdf] if args.cdf else None
    dataset = cover_decode(code, cdf=cdf)
    save_csv(dataset, args.out)
    return {
        "op": code.op.value,
        "n": code.n,
        "d": code.d,
        "resolution": code.resolution,
        "bit_length": code.bit_length,
        "out": args.out,
    }


def _cmd_train(args) -> dict:
    dataset = load_csv(args.data)
    op = OpKind(args.op)
    if op is OpKind.INDEX:
        dataset = sort_dataset_1d(dataset)
    tmpl = PRESET_MODELS[args.model]
    if args.m is not None:
        tmpl = type(tmpl)(
            model_id=tmpl.model_id, kind=tmpl.kind, hidden=tmpl.hidden, m=args.m
        )
    spec = tmpl.resolve(op, dataset.d)
    cfg = TrainConfig(
        steps=args.steps,
        batch=args.batch,
        lr=args.lr,
        momentum=args.momentum,
        seed=args.seed,
    )
    model = train(init_model(spec, args.seed), dataset, op, cfg)
    if args.out:
        save_model(model, args.out)
    doc = {
        "model": args.model,
        "op": op.value,
        "kind": spec.kind,
        "model_bits": model_bits(spec, dataset.d),
        "n": dataset.n,
        "d": dataset.d,
    }
    if spec.kind == "sample":
        doc["m"] = spec.m
    else:
        doc["params"] = param_count(spec)
        doc["final_loss"] = model.loss_trace[-1] if model.loss_trace else None
    if args.out:
        doc["out"] = args.out
    return doc


def _cmd_experiment(args) -> dict:
    with open(args.config, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    config = parse_config(doc)
    run = run_experiment(config)
    if not run.rows:
        raise RuntimeFailure("no experiment cell succeeded")
    emit_csv(run.rows, args.out)
    if args.plot:
        emit_plot_data(run.rows, args.plot)
    result = {
        "rows": len(run.rows),
        "failed_cells": len(run.failures),
        "out": args.out,
    }
    if args.plot:
        result["plot"] = args.plot
    if run.failures:
        result["failures"] = [{"cell": c, "error": e} for c, e in run.failures]
    return result


def _add_op(p, required=True, default=None):
    p.add_argument(
        "--op", choices=["index", "ce", "rs"], required=required, default=default
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ldbounds", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="evaluate a storage bound formula")
    _add_op(p)
    p.add_argument("--norm", choices=["inf", "l1", "mu"], required=True)
    p.add_argument("--side", choices=["lower", "upper"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--u", type=int, default=None, help="domain size (inf norm only)")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("eps-star", help="invert a lower bound at a bit budget")
    p.add_argument("--bits", type=float, required=True)
    _add_op(p)
    p.add_argument("--norm", choices=["inf", "l1", "mu"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--u", type=int, default=None)
    p.set_defaults(func=_cmd_eps_star)

    p = sub.add_parser("certify", help="build a packing family and check separation")
    p.add_argument(
        "--construction",
        choices=["packing-linf", "packing-l1-index", "packing-l1-ce", "packing-mu"],
        required=True,
    )
    _add_op(p, required=False, default="index")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--eps", type=float, required=True,
                   help="separation to certify (the delta target for packing-l1-ce)")
    p.add_argument("--u", type=int, default=None, help="grid size for packing-linf")
    p.add_argument("--cdf", choices=sorted(CDF_PRESETS), default="square")
    p.add_argument("--count", type=int, required=True, help="family size")
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mc-samples", type=int, default=50_000)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("encode", help="compress a dataset to a cover index file")
    _add_op(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--out", required=True, help="output .ldbc container")
    p.add_argument("--cdf", choices=sorted(CDF_PRESETS), default=None,
                   help="quantile grid for indexing covers")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="expand a cover index file to a dataset")
    p.add_argument("--input", required=True, help=".ldbc container")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--cdf", choices=sorted(CDF_PRESETS), default=None)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("train", help="fit a model to a dataset's query function")
    p.add_argument("--model", choices=sorted(PRESET_MODELS), required=True)
    _add_op(p)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=None, help="sample size override")
    p.add_argument("--out", default=None, help="save trained model JSON here")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("experiment", help="run a full measurement grid")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--plot", default=None, help="optional plot-series JSON")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _emit(args.func(args))
        return 0
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (None, 0) else 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LdboundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
