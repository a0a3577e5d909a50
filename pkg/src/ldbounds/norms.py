"""Distances between query functions: exact routes and Monte Carlo routes.

Distances are taken over the whole query space: the average-case distance
is the integral of |f_D - f_D'| over all legal queries (the query space
has volume 1, so the integral is also the uniform mean), the worst-case
distance is the supremum, and the distribution-weighted distance
integrates against a supplied measure.

Two independent routes exist wherever feasible (closed form vs piecewise
integration vs Monte Carlo) so each can check the other; callers should
not collapse them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import Dataset
from .errors import (
    CdfNotMonotone,
    DimensionMismatch,
    InvalidParams,
    InvalidRequest,
    NotSorted,
    SizeMismatch,
)
from .queryfn import (
    OpKind,
    eval_batch,
    query_dims,
    rank_batch,
    sample_range_queries,
    sample_rank_queries,
)
from .rng import make_generator

L1 = "l1"
LINF = "linf"
MU = "mu"

_MC_CHUNK = 65_536


@dataclass(frozen=True)
class DistanceEstimate:
    """A distance value plus how it was obtained.

    exact=True means closed-form or complete piecewise integration
    (std_error 0).  Monte Carlo estimates carry the standard error of the
    mean; supremum probes carry std_error 0 but are still not exact.
    """

    value: float
    exact: bool
    std_error: float = 0.0
    samples: int = 0


@dataclass(frozen=True)
class EvalConfig:
    """Budget for model-vs-truth error measurement."""

    samples: int = 4096
    grid: int = 4
    seed: int = 0


def _sorted_column(dataset: Dataset, who: str) -> np.ndarray:
    if dataset.d != 1:
        raise DimensionMismatch(f"{who} must be single-attribute")
    if not dataset.sorted_flag:
        raise NotSorted(f"{who} must be sorted ascending")
    return dataset.values[:, 0]


def rank_l1(a: Dataset, b: Dataset) -> float:
    """Average-case rank distance = sum of positionwise gaps (both sorted)."""
    xa = _sorted_column(a, "first dataset")
    xb = _sorted_column(b, "second dataset")
    if xa.shape[0] != xb.shape[0]:
        raise SizeMismatch("rank_l1 needs equal record counts")
    return float(np.abs(xa - xb).sum())


def _rank_steps(xa: np.ndarray, xb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints of rank_a - rank_b and its value on [bp_j, bp_{j+1})."""
    bps = np.unique(np.concatenate([xa, xb]))
    va = np.searchsorted(xa, bps, side="right")
    vb = np.searchsorted(xb, bps, side="right")
    return bps, (va - vb).astype(np.float64)


def rank_l1_oracle(a: Dataset, b: Dataset) -> float:
    """Same distance by piecewise integration of |rank_a - rank_b| over [0, 1].

    Independent of rank_l1's positionwise identity; used to cross-check it.
    """
    xa = _sorted_column(a, "first dataset")
    xb = _sorted_column(b, "second dataset")
    if xa.shape[0] != xb.shape[0]:
        raise SizeMismatch("rank_l1_oracle needs equal record counts")
    bps, v = _rank_steps(xa, xb)
    if bps.size == 0:
        return 0.0
    edges = np.append(bps, 1.0)
    widths = np.clip(edges[1:] - edges[:-1], 0.0, None)
    return float((np.abs(v) * widths).sum())


def rank_linf(a: Dataset, b: Dataset) -> float:
    """Worst-case rank distance: max |rank_a - rank_b| over query points.

    The difference is a right-continuous step function changing only at
    data values, so the max over breakpoint evaluations is the supremum.
    """
    xa = _sorted_column(a, "first dataset")
    xb = _sorted_column(b, "second dataset")
    bps, v = _rank_steps(xa, xb)
    inside = bps <= 1.0
    if not inside.any():
        return 0.0
    return float(np.abs(v[inside]).max())


def _check_cdf(cdf: Callable[[np.ndarray], np.ndarray], points: np.ndarray) -> np.ndarray:
    vals = np.asarray(cdf(points), dtype=np.float64)
    if vals.shape != points.shape:
        raise CdfNotMonotone("cdf must map arrays to equal-shaped arrays")
    ends = np.asarray(cdf(np.array([0.0, 1.0])), dtype=np.float64)
    if abs(ends[0]) > 1e-9 or abs(ends[1] - 1.0) > 1e-9:
        raise CdfNotMonotone("cdf must satisfy cdf(0)=0 and cdf(1)=1")
    order = np.argsort(points, kind="stable")
    if np.any(np.diff(vals[order]) < -1e-12):
        raise CdfNotMonotone("cdf must be non-decreasing on [0, 1]")
    return vals


def rank_mu(a: Dataset, b: Dataset, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Distribution-weighted rank distance: sum of cdf gaps positionwise.

    Equals the integral of |rank_a - rank_b| against the measure whose
    distribution function is `cdf` (both datasets sorted, equal counts).
    """
    xa = _sorted_column(a, "first dataset")
    xb = _sorted_column(b, "second dataset")
    if xa.shape[0] != xb.shape[0]:
        raise SizeMismatch("rank_mu needs equal record counts")
    fa = _check_cdf(cdf, xa)
    fb = np.asarray(cdf(xb), dtype=np.float64)
    return float(np.abs(fa - fb).sum())


# -- exact single-attribute cardinality distances ----------------------------
#
# Substituting a = c + r, b = c maps the legal query set bijectively (unit
# Jacobian) onto {a in [0, 1], b in [a - 1, a]}, and
#     count_D(c, r) - count_D'(c, r) = g(a) - g(b-)
# with g = rank_D - rank_D', right-continuous and piecewise constant on
# the merged breakpoints.  On each product cell of breakpoint intervals
# the integrand is a constant times the band length
#     len(a) = max(0, min(b_hi, a) - max(b_lo, a - 1)),
# whose kinks (b_hi, b_lo + 1, and the zero crossings) all lie on the
# breakpoint grid, never inside a cell.  len is therefore linear on every
# a-cell and midpoint-times-width integration is exact.


def _card_cells(a: Dataset, b: Dataset):
    if a.d != 1 or b.d != 1:
        raise DimensionMismatch("cardinality distances require single-attribute data")
    xa = np.sort(a.values[:, 0])
    xb = np.sort(b.values[:, 0])
    bps, v = _rank_steps(xa, xb)
    return bps, v


def _step_at(bps: np.ndarray, v: np.ndarray, x: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(bps, x, side="right") - 1
    out = np.where(idx >= 0, v[np.clip(idx, 0, None)], 0.0)
    return out


def card1d_l1(a: Dataset, b: Dataset) -> float:
    """Exact average-case cardinality distance for single-attribute data.

    Record counts may differ; either dataset may be empty.
    """
    bps, v = _card_cells(a, b)
    if bps.size == 0:
        return 0.0
    a_edges = np.unique(np.concatenate([[0.0], bps[(bps > 0.0) & (bps < 1.0)], [1.0]]))
    a_lo, a_hi = a_edges[:-1], a_edges[1:]
    keep = a_hi > a_lo
    a_lo, a_hi = a_lo[keep], a_hi[keep]
    a_mid = 0.5 * (a_lo + a_hi)
    a_len = a_hi - a_lo
    va = _step_at(bps, v, a_mid)

    b_edges = np.unique(np.concatenate([[-1.0], bps, [1.0]]))
    b_lo, b_hi = b_edges[:-1], b_edges[1:]
    keep = b_hi > b_lo
    b_lo, b_hi = b_lo[keep], b_hi[keep]
    b_mid = 0.5 * (b_lo + b_hi)
    vb = _step_at(bps, v, b_mid)

    band = np.minimum(b_hi[None, :], a_mid[:, None]) - np.maximum(
        b_lo[None, :], a_mid[:, None] - 1.0
    )
    np.clip(band, 0.0, None, out=band)
    gap = np.abs(va[:, None] - vb[None, :])
    return float((a_len * (band * gap).sum(axis=1)).sum())


def card1d_linf(a: Dataset, b: Dataset) -> float:
    """Exact worst-case cardinality distance for single-attribute data.

    With v_j the step values of rank_a - rank_b (v_0 = 0 before any data),
    the supremum is max over j of the spread between v_j and the running
    min/max of v_0..v_j: the right endpoint of a query picks v_j, the left
    endpoint independently picks any earlier value.
    """
    bps, v = _card_cells(a, b)
    if bps.size == 0:
        return 0.0
    vv = np.concatenate([[0.0], v])
    run_min = np.minimum.accumulate(vv)
    run_max = np.maximum.accumulate(vv)
    return float(np.maximum(vv - run_min, run_max - vv).max())


# -- Monte Carlo routes ------------------------------------------------------


def _mc_mean(diffs_iter) -> tuple[float, float, int]:
    sums: list[float] = []
    sumsqs: list[float] = []
    count = 0
    for chunk in diffs_iter:
        sums.append(float(np.add.reduce(chunk)))
        sumsqs.append(float(np.add.reduce(chunk * chunk)))
        count += chunk.size
    total = math.fsum(sums)
    total_sq = math.fsum(sumsqs)
    mean = total / count
    var = max(0.0, (total_sq - count * mean * mean) / max(1, count - 1))
    return mean, math.sqrt(var / count), count


def _sample_batch(op: OpKind, dq: int, count: int, gen: np.random.Generator):
    if op is OpKind.INDEX:
        return sample_rank_queries(count, gen)
    return sample_range_queries(count, dq, gen)


def _abs_diff_chunks(a: Dataset, b: Dataset, op: OpKind, samples: int, gen, sampler=None):
    dq = query_dims(op, max(a.d, b.d))
    if op is not OpKind.INDEX and a.d != b.d:
        raise DimensionMismatch("datasets must share dimensionality")
    done = 0
    while done < samples:
        m = min(_MC_CHUNK, samples - done)
        if sampler is None:
            batch = _sample_batch(op, dq, m, gen)
        else:
            batch = sampler(m, gen)
        fa = eval_batch(a, op, batch)
        fb = eval_batch(b, op, batch)
        yield np.abs(fa - fb)
        done += m


def mc_l1(a: Dataset, b: Dataset, op: OpKind, samples: int, seed: int) -> DistanceEstimate:
    """Monte Carlo average-case distance under uniform queries.

    The query space has volume 1, so the sample mean estimates the
    integral directly.  Chunked accumulation with a fixed chunk size keeps
    the result independent of execution order.
    """
    if samples < 2:
        raise InvalidParams("need at least 2 samples")
    gen = make_generator(seed)
    mean, se, m = _mc_mean(_abs_diff_chunks(a, b, op, samples, gen))
    return DistanceEstimate(value=mean, exact=False, std_error=se, samples=m)


def mc_mu(
    a: Dataset,
    b: Dataset,
    op: OpKind,
    query_sampler: Callable,
    samples: int,
    seed: int,
) -> DistanceEstimate:
    """Monte Carlo distance under the measure induced by `query_sampler`.

    `query_sampler(count, gen)` must return a query batch distributed as
    the target measure; the sample mean then estimates the weighted
    integral.
    """
    if samples < 2:
        raise InvalidParams("need at least 2 samples")
    gen = make_generator(seed)
    mean, se, m = _mc_mean(
        _abs_diff_chunks(a, b, op, samples, gen, sampler=query_sampler)
    )
    return DistanceEstimate(value=mean, exact=False, std_error=se, samples=m)


# -- model-vs-truth error ----------------------------------------------------


def model_error(
    dataset: Dataset,
    op: OpKind,
    predict: Callable,
    norm: str,
    cfg: EvalConfig,
) -> DistanceEstimate:
    """Error of a prediction function against the true query function.

    `predict` maps a query batch to unnormalized answers.  For the
    average case this is a Monte Carlo mean; for the worst case over rank
    queries the probe set is every data value, a point 1e-12 left of it,
    and `cfg.grid` extra points per gap (the truth is constant between
    data values, so probes bound the supremum from below); range-kind
    worst case falls back to sampled probes.  None of these are exact.
    """
    gen = make_generator(cfg.seed)
    dq = query_dims(op, dataset.d)
    if norm == L1:
        done = 0
        chunks = []
        while done < cfg.samples:
            m = min(_MC_CHUNK, cfg.samples - done)
            batch = _sample_batch(op, dq, m, gen)
            truth = eval_batch(dataset, op, batch)
            pred = np.asarray(predict(batch), dtype=np.float64)
            chunks.append(np.abs(truth - pred))
            done += m
        mean, se, m = _mc_mean(iter(chunks))
        return DistanceEstimate(value=mean, exact=False, std_error=se, samples=m)
    if norm != LINF:
        raise InvalidRequest(f"model_error supports norms {L1!r} and {LINF!r}, got {norm!r}")
    if op is OpKind.INDEX:
        col = np.sort(dataset.values[:, 0])
        probes = [np.array([0.0, 1.0]), col, np.clip(col - 1e-12, 0.0, 1.0)]
        edges = np.unique(np.concatenate([[0.0], col, [1.0]]))
        if cfg.grid > 0 and edges.size >= 2:
            t = np.linspace(0.0, 1.0, cfg.grid + 2)[1:-1]
            lo, hi = edges[:-1], edges[1:]
            probes.append((lo[:, None] + t[None, :] * (hi - lo)[:, None]).ravel())
        qs = np.unique(np.concatenate(probes))
        truth = rank_batch(col, qs)
        pred = np.asarray(predict(qs), dtype=np.float64)
        worst = float(np.abs(truth - pred).max())
        return DistanceEstimate(value=worst, exact=False, std_error=0.0, samples=qs.size)
    batch = _sample_batch(op, dq, cfg.samples, gen)
    truth = eval_batch(dataset, op, batch)
    pred = np.asarray(predict(batch), dtype=np.float64)
    worst = float(np.abs(truth - pred).max())
    return DistanceEstimate(value=worst, exact=False, std_error=0.0, samples=cfg.samples)
