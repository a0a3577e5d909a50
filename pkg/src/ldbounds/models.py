"""Tiny learned models with from-scratch training and gradient checks.

Three kinds: an affine map, a one-hidden-layer ReLU network, and a stored
random sample of records (non-learned baseline).  Networks see queries as
feature vectors (the point for rank queries, the concatenated left edges
and widths for range queries) and emit answers normalized by the record
count; predictions scale back up by n.  Training is plain minibatch SGD
with momentum on squared error against normalized true answers, fully
deterministic given its seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .errors import DivergenceDetected, InvalidParams, InvalidRequest
from .queryfn import (
    OpKind,
    cardinality_batch,
    eval_batch,
    query_dims,
    rank_batch,
    range_sum_batch,
    sample_range_queries,
    sample_rank_queries,
)
from .rng import make_generator

LINEAR = "linear"
MLP = "mlp"
SAMPLE = "sample"

_PARAM_ORDER = {LINEAR: ("w", "b"), MLP: ("W1", "b1", "W2", "b2")}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    input_dim: int
    hidden: int = 0
    m: int = 0
    precision_bits: int = 32

    def __post_init__(self) -> None:
        if self.kind not in (LINEAR, MLP, SAMPLE):
            raise InvalidParams(f"unknown model kind {self.kind!r}")
        if self.kind != SAMPLE and self.input_dim < 1:
            raise InvalidParams("input_dim must be >= 1")
        if self.kind == MLP and self.hidden < 1:
            raise InvalidParams("mlp needs hidden >= 1")
        if self.kind == SAMPLE and self.m < 1:
            raise InvalidParams("sample needs m >= 1")
        if self.precision_bits < 1:
            raise InvalidParams("precision_bits must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 20_000
    batch: int = 256
    lr: float = 0.01
    momentum: float = 0.9
    seed: int = 0


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    params: dict = field(default_factory=dict)
    records: np.ndarray | None = None
    n_train: int = 0
    loss_trace: tuple[float, ...] = ()


def param_count(spec: ModelSpec) -> int:
    if spec.kind == LINEAR:
        return spec.input_dim + 1
    if spec.kind == MLP:
        return spec.hidden * spec.input_dim + 2 * spec.hidden + 1
    raise InvalidRequest("sample models store records, not parameters")


def model_bits(spec: ModelSpec, data_d: int = 1) -> int:
    """Storage footprint in bits at the spec's parameter precision."""
    if spec.kind == SAMPLE:
        return spec.m * data_d * spec.precision_bits
    return param_count(spec) * spec.precision_bits


def input_dim_for(op: OpKind, data_d: int) -> int:
    """1 feature for rank queries, 2 per predicate axis for range queries."""
    if op is OpKind.INDEX:
        return 1
    return 2 * query_dims(op, data_d)


def matching_sample_m(op: OpKind, data_d: int) -> int:
    """Sample size whose storage matches the affine model's."""
    linear_bits = (input_dim_for(op, data_d) + 1) * 32
    return max(1, math.ceil(linear_bits / (32 * data_d)))


def nn_s1(input_dim: int) -> ModelSpec:
    return ModelSpec(kind=MLP, input_dim=input_dim, hidden=3)


def nn_s2(input_dim: int) -> ModelSpec:
    return ModelSpec(kind=MLP, input_dim=input_dim, hidden=16)


def init_model(spec: ModelSpec, seed: int) -> TrainedModel:
    """Zero/Xavier initialization; the affine bias starts at 0.5."""
    if spec.kind == SAMPLE:
        return TrainedModel(spec=spec)
    if spec.kind == LINEAR:
        params = {"w": np.zeros(spec.input_dim), "b": np.array([0.5])}
        return TrainedModel(spec=spec, params=params)
    gen = make_generator(seed)
    fan_in, h = spec.input_dim, spec.hidden
    lim1 = math.sqrt(6.0 / (fan_in + h))
    lim2 = math.sqrt(6.0 / (h + 1))
    params = {
        "W1": gen.uniform(-lim1, lim1, size=(h, fan_in)),
        "b1": np.zeros(h),
        "W2": gen.uniform(-lim2, lim2, size=(1, h)),
        "b2": np.zeros(1),
    }
    return TrainedModel(spec=spec, params=params)


def _features(op: OpKind, batch) -> np.ndarray:
    if op is OpKind.INDEX:
        return np.asarray(batch, dtype=np.float64).reshape(-1, 1)
    C, R = batch
    return np.hstack([C, R])


def _forward(spec: ModelSpec, params: dict, X: np.ndarray):
    if spec.kind == LINEAR:
        out = X @ params["w"] + params["b"][0]
        return out, None
    Z1 = X @ params["W1"].T + params["b1"]
    A1 = np.maximum(Z1, 0.0)
    out = (A1 @ params["W2"].T)[:, 0] + params["b2"][0]
    return out, (Z1, A1)


def _backward(
    spec: ModelSpec, params: dict, X: np.ndarray, cache, residual: np.ndarray
) -> dict:
    """Gradients of mean squared error; `residual` is (out - target)."""
    B = X.shape[0]
    dout = 2.0 * residual / B
    if spec.kind == LINEAR:
        return {"w": X.T @ dout, "b": np.array([dout.sum()])}
    Z1, A1 = cache
    dW2 = (dout[None, :] @ A1).reshape(1, -1)
    db2 = np.array([dout.sum()])
    dA1 = dout[:, None] * params["W2"][0][None, :]
    dZ1 = dA1 * (Z1 > 0.0)
    return {"W1": dZ1.T @ X, "b1": dZ1.sum(axis=0), "W2": dW2, "b2": db2}


def predict_raw(model: TrainedModel, op: OpKind, batch) -> np.ndarray:
    """Normalized network output in answer-fraction units."""
    if model.spec.kind == SAMPLE:
        raise InvalidRequest("sample models have no network output")
    X = _features(op, batch)
    out, _ = _forward(model.spec, model.params, X)
    return out


def predict(model: TrainedModel, op: OpKind, batch) -> np.ndarray:
    """Unnormalized predicted answers for a query batch."""
    if model.spec.kind == SAMPLE:
        if model.records is None:
            raise InvalidRequest("sample model is untrained")
        scale = model.n_train / model.spec.m
        rec = model.records
        if op is OpKind.INDEX:
            qs = np.asarray(batch, dtype=np.float64)
            return scale * rank_batch(np.sort(rec[:, 0]), qs)
        C, R = batch
        if op is OpKind.CARD_EST:
            return scale * cardinality_batch(rec, C, R)
        return scale * range_sum_batch(rec, C, R)
    return model.n_train * predict_raw(model, op, batch)


def predictor(model: TrainedModel, op: OpKind):
    """Query-batch callable for the error measurements."""
    return lambda batch: predict(model, op, batch)


def train(
    model: TrainedModel, dataset: Dataset, op: OpKind, cfg: TrainConfig
) -> TrainedModel:
    """Fit on uniformly sampled queries against exact normalized answers.

    Returns a new model carrying the per-step loss trace.  The sample
    baseline just draws its records (without replacement when m <= n) and
    has an empty trace.
    """
    n = dataset.n
    gen = make_generator(cfg.seed)
    if model.spec.kind == SAMPLE:
        m = model.spec.m
        idx = gen.choice(n, size=m, replace=bool(m > n))
        return replace(model, records=dataset.values[np.sort(idx)], n_train=n)
    dq = 0 if op is OpKind.INDEX else query_dims(op, dataset.d)
    expected = input_dim_for(op, dataset.d)
    if model.spec.input_dim != expected:
        raise InvalidParams(
            f"model input_dim {model.spec.input_dim} != {expected} required "
            f"for {op.value} over {dataset.d}-attribute data"
        )
    params = {k: v.copy() for k, v in model.params.items()}
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    trace = []
    for _ in range(cfg.steps):
        if op is OpKind.INDEX:
            batch = sample_rank_queries(cfg.batch, gen)
        else:
            batch = sample_range_queries(cfg.batch, dq, gen)
        target = eval_batch(dataset, op, batch) / n
        X = _features(op, batch)
        # overflow here is the signal the next line turns into an error
        with np.errstate(over="ignore", invalid="ignore"):
            out, cache = _forward(model.spec, params, X)
            residual = out - target
            loss = float(np.mean(residual * residual))
        if not math.isfinite(loss):
            raise DivergenceDetected(f"loss became {loss} at step {len(trace)}")
        trace.append(loss)
        grads = _backward(model.spec, params, X, cache, residual)
        for k in params:
            velocity[k] = cfg.momentum * velocity[k] - cfg.lr * grads[k]
            params[k] += velocity[k]
    return replace(model, params=params, n_train=n, loss_trace=tuple(trace))


# -- gradient verification ---------------------------------------------------


def _flatten(spec: ModelSpec, params: dict) -> np.ndarray:
    return np.concatenate([params[k].ravel() for k in _PARAM_ORDER[spec.kind]])


def _unflatten(spec: ModelSpec, flat: np.ndarray, like: dict) -> dict:
    out = {}
    pos = 0
    for k in _PARAM_ORDER[spec.kind]:
        size = like[k].size
        out[k] = flat[pos : pos + size].reshape(like[k].shape).copy()
        pos += size
    return out


def grad_check(
    model: TrainedModel,
    op: OpKind,
    batch,
    target: np.ndarray,
    h: float = 1e-5,
    kink_tol: float = 1e-8,
) -> tuple[float, bool]:
    """Compare analytic MSE gradients against central differences.

    Returns (max relative error, skipped).  skipped=True means a hidden
    unit's pre-activation sat within kink_tol of the ReLU corner, where
    the two-sided difference is not trustworthy; callers should redraw.
    """
    spec = model.spec
    if spec.kind == SAMPLE:
        raise InvalidRequest("gradient checks apply to differentiable kinds only")
    X = _features(op, batch)
    target = np.asarray(target, dtype=np.float64)
    out, cache = _forward(spec, model.params, X)
    if spec.kind == MLP and bool(np.any(np.abs(cache[0]) < kink_tol)):
        return math.nan, True
    grads = _backward(spec, model.params, X, cache, out - target)
    analytic = _flatten(spec, grads)
    flat = _flatten(spec, model.params)
    def loss_at(vec: np.ndarray) -> float:
        p = _unflatten(spec, vec, model.params)
        o, _ = _forward(spec, p, X)
        r = o - target
        return float(np.mean(r * r))

    numeric = np.empty_like(flat)
    for i in range(flat.size):
        up = flat.copy()
        up[i] += h
        down = flat.copy()
        down[i] -= h
        numeric[i] = (loss_at(up) - loss_at(down)) / (2.0 * h)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    return float((np.abs(analytic - numeric) / scale).max()), False


# -- checkpoints -------------------------------------------------------------


def save_model(model: TrainedModel, path: str) -> None:
    """JSON checkpoint with parameters as full-precision decimal strings."""
    spec = model.spec
    doc = {
        "kind": spec.kind,
        "input_dim": spec.input_dim,
        "hidden": spec.hidden,
        "m": spec.m,
        "precision_bits": spec.precision_bits,
        "n_train": model.n_train,
    }
    if spec.kind == SAMPLE:
        rec = model.records if model.records is not None else np.empty((0, 1))
        doc["records"] = [[repr(float(x)) for x in row] for row in rec]
    else:
        doc["params"] = {
            k: {"shape": list(v.shape), "data": [repr(float(x)) for x in v.ravel()]}
            for k, v in model.params.items()
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def load_model(path: str) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    spec = ModelSpec(
        kind=doc["kind"],
        input_dim=doc["input_dim"],
        hidden=doc["hidden"],
        m=doc["m"],
        precision_bits=doc["precision_bits"],
    )
    if spec.kind == SAMPLE:
        rows = [[float(x) for x in row] for row in doc["records"]]
        rec = np.asarray(rows, dtype=np.float64)
        if rec.size == 0:
            rec = None
        return TrainedModel(spec=spec, records=rec, n_train=doc["n_train"])
    params = {
        k: np.asarray([float(x) for x in v["data"]], dtype=np.float64).reshape(
            v["shape"]
        )
        for k, v in doc["params"].items()
    }
    return TrainedModel(spec=spec, params=params, n_train=doc["n_train"])
