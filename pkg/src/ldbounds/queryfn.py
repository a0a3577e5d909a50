"""Query semantics: rank, cardinality, range-sum, and query samplers.

Queries use closed intervals on every axis.  A range query is a pair
(c, r) with 0 <= r_j <= 1 and -r_j <= c_j <= 1 - r_j, matching points p
with c_j <= p_j <= c_j + r_j on every predicate axis; negative left edges
are legal and are never clamped.  When a point has more attributes than
the predicate, the extra trailing attributes are ignored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DimensionMismatch, EntryOutOfRange, InvalidParams, NotSorted
from .rng import make_generator


class OpKind(enum.Enum):
    INDEX = "index"
    CARD_EST = "ce"
    RANGE_SUM = "rs"


@dataclass(frozen=True)
class RankQuery:
    q: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.q <= 1.0:
            raise EntryOutOfRange("rank query point must lie in [0, 1]")


@dataclass(frozen=True)
class RangeQuery:
    c: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.c, dtype=np.float64))
        r = np.atleast_1d(np.asarray(self.r, dtype=np.float64))
        if c.shape != r.shape or c.ndim != 1:
            raise DimensionMismatch("c and r must be equal-length vectors")
        if np.any(r < 0.0) or np.any(r > 1.0):
            raise EntryOutOfRange("widths must lie in [0, 1]")
        if np.any(c < -r) or np.any(c > 1.0 - r):
            raise EntryOutOfRange("left edges must lie in [-r_j, 1 - r_j]")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "r", r)

    @property
    def dims(self) -> int:
        return self.c.shape[0]


Query = RankQuery | RangeQuery


def query_dims(op: OpKind, data_d: int) -> int:
    """Predicate dimensionality for `op` over d-attribute data."""
    if op is OpKind.INDEX:
        return 1
    if op is OpKind.CARD_EST:
        return data_d
    if data_d < 2:
        raise DimensionMismatch("range-sum data needs >= 2 attributes")
    return data_d - 1


def matches(point: np.ndarray, query: Query) -> bool:
    """Closed-interval membership; extra trailing point attributes ignored."""
    p = np.atleast_1d(np.asarray(point, dtype=np.float64))
    if isinstance(query, RankQuery):
        return bool(p[0] <= query.q)
    if p.shape[0] < query.dims:
        raise DimensionMismatch("point has fewer attributes than the predicate")
    head = p[: query.dims]
    return bool(np.all(query.c <= head) and np.all(head <= query.c + query.r))


def rank(dataset: Dataset, q: float | RankQuery) -> int:
    """#records <= q in a sorted single-attribute dataset."""
    if isinstance(q, RankQuery):
        q = q.q
    if dataset.d != 1:
        raise DimensionMismatch("rank requires single-attribute data")
    if not dataset.sorted_flag:
        raise NotSorted("rank requires sorted data; use sort_dataset_1d first")
    if not 0.0 <= q <= 1.0:
        raise EntryOutOfRange("rank query point must lie in [0, 1]")
    return int(np.searchsorted(dataset.values[:, 0], q, side="right"))


def cardinality(dataset: Dataset, query: RangeQuery) -> int:
    """#records inside the closed box [c, c + r]."""
    if query.dims != dataset.d:
        raise DimensionMismatch(
            f"predicate has {query.dims} axes, data has {dataset.d}"
        )
    v = dataset.values
    inside = np.all((v >= query.c) & (v <= query.c + query.r), axis=1)
    return int(np.count_nonzero(inside))


def range_sum(dataset: Dataset, query: RangeQuery) -> float:
    """Sum of the last attribute over records matching on the first d-1."""
    if dataset.d < 2:
        raise DimensionMismatch("range-sum data needs >= 2 attributes")
    if query.dims != dataset.d - 1:
        raise DimensionMismatch(
            f"predicate has {query.dims} axes, expected {dataset.d - 1}"
        )
    v = dataset.values
    head = v[:, :-1]
    inside = np.all((head >= query.c) & (head <= query.c + query.r), axis=1)
    return float(v[inside, -1].sum())


# -- batched evaluation ------------------------------------------------------
#
# Batches are the workhorse representation for Monte Carlo and training:
# rank queries as a (m,) array, range queries as a (C, R) pair of (m, dq)
# arrays.  Broadcast products are chunked so memory stays bounded.

_CHUNK_CELLS = 4_000_000


def rank_batch(sorted_values: np.ndarray, qs: np.ndarray) -> np.ndarray:
    return np.searchsorted(sorted_values, qs, side="right").astype(np.float64)


def cardinality_batch(values: np.ndarray, C: np.ndarray, R: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    m = C.shape[0]
    out = np.empty(m, dtype=np.float64)
    if n == 0:
        out.fill(0.0)
        return out
    step = max(1, _CHUNK_CELLS // max(1, n))
    hi_edges = C + R
    for s in range(0, m, step):
        e = min(m, s + step)
        block = values[None, :, :]  # (1, n, d)
        lo = C[s:e, None, :]
        hi = hi_edges[s:e, None, :]
        inside = np.all((block >= lo) & (block <= hi), axis=2)
        out[s:e] = inside.sum(axis=1)
    return out


def range_sum_batch(values: np.ndarray, C: np.ndarray, R: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    m = C.shape[0]
    out = np.empty(m, dtype=np.float64)
    if n == 0:
        out.fill(0.0)
        return out
    head = values[:, :-1]
    last = values[:, -1]
    step = max(1, _CHUNK_CELLS // max(1, n))
    hi_edges = C + R
    for s in range(0, m, step):
        e = min(m, s + step)
        block = head[None, :, :]
        lo = C[s:e, None, :]
        hi = hi_edges[s:e, None, :]
        inside = np.all((block >= lo) & (block <= hi), axis=2)
        out[s:e] = inside @ last
    return out


def eval_batch(dataset: Dataset, op: OpKind, batch) -> np.ndarray:
    """True answers for a query batch against `dataset`."""
    if op is OpKind.INDEX:
        col = dataset.values[:, 0]
        if not dataset.sorted_flag:
            col = np.sort(col)
        return rank_batch(col, np.asarray(batch, dtype=np.float64))
    C, R = batch
    if op is OpKind.CARD_EST:
        if C.shape[1] != dataset.d:
            raise DimensionMismatch("predicate width != data width")
        return cardinality_batch(dataset.values, C, R)
    if C.shape[1] != dataset.d - 1:
        raise DimensionMismatch("predicate width != data width - 1")
    return range_sum_batch(dataset.values, C, R)


# -- samplers ----------------------------------------------------------------


def sample_rank_queries(count: int, gen: np.random.Generator) -> np.ndarray:
    return gen.random(count)


def sample_range_queries(
    count: int, dq: int, gen: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform on the legal query set: r_j ~ U[0,1], c_j | r_j ~ U[-r_j, 1-r_j].

    The conditional left-edge interval always has length 1, so the joint
    density is 1 and sample means are unbiased integral estimates.
    """
    R = gen.random((count, dq))
    C = gen.random((count, dq)) - R
    return C, R


def sample_query(kind: OpKind, d: int, seed: int) -> Query:
    """One query for `kind` over d-attribute data."""
    gen = make_generator(seed)
    if kind is OpKind.INDEX:
        return RankQuery(q=float(gen.random()))
    dq = query_dims(kind, d)
    C, R = sample_range_queries(1, dq, gen)
    return RangeQuery(c=C[0], r=R[0])


def sample_easy_queries(
    n: int, k: int, count: int, gen: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Batch from the concentrated single-attribute query distribution.

    The unit query space is cut into n*k equal cells; a draw picks a cell
    uniformly and then a uniform point of the right triangle of queries
    whose interval [c, c+r] stays inside that cell.  Every width r is at
    most 1/(n*k).
    """
    if n < 1 or k < 1:
        raise InvalidParams("n and k must be >= 1")
    h = 1.0 / (n * k)
    cells = gen.integers(0, n * k, size=count)
    u = gen.random(count) * h
    v = gen.random(count) * h
    flip = u + v > h
    u[flip] = h - u[flip]
    v[flip] = h - v[flip]
    C = (cells * h + u).reshape(-1, 1)
    R = v.reshape(-1, 1)
    np.clip(C, 0.0, 1.0 - R, out=C)
    return C, R


def sample_easy_query(n: int, k: int, seed: int) -> RangeQuery:
    gen = make_generator(seed)
    C, R = sample_easy_queries(n, k, 1, gen)
    return RangeQuery(c=C[0], r=R[0])


def easy_query_density(n: int, k: int, c: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Density of the concentrated distribution at (c, r); 2nk on support.

    Support: r >= 0 and the interval [c, c + r] fits inside the cell of c.
    """
    if n < 1 or k < 1:
        raise InvalidParams("n and k must be >= 1")
    m = n * k
    c = np.asarray(c, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    cell = np.minimum(np.floor(c * m), m - 1)
    ok = (r >= 0.0) & (c >= 0.0) & (cell / m <= c) & (c + r <= (cell + 1) / m)
    return np.where(ok, 2.0 * m, 0.0)
