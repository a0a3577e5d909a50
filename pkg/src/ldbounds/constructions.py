"""Constructive witnesses behind the bounds.

Packing generators build families of datasets that are pairwise far apart
in a chosen distance, so no small code can tell them all apart; the cover
codec realizes the matching upper bound by quantizing a dataset and
encoding it as one integer index over all quantized possibilities; the
pigeonhole witness turns an undersized encoder plus a packing family into
a concrete collision with a large measured error.

Multisets are encoded in colexicographic order: a sorted tuple
x_1 <= ... <= x_m over {0..A-1} maps to rank sum_i C(x_i + i - 1, i),
a bijection onto {0 .. C(m + A - 1, m) - 1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bounds import ceil_ratio, covering_count_log2, log2_binomial
from .data import Dataset, grid_digits, make_dataset
from .errors import (
    DimensionMismatch,
    FamilyTooLarge,
    FormatError,
    IndexOutOfRange,
    InvalidParams,
    InvalidRequest,
    NoCollision,
)
from .norms import (
    EvalConfig,
    L1,
    LINF,
    MU,
    DistanceEstimate,
    card1d_l1,
    card1d_linf,
    mc_l1,
    mc_mu,
    model_error,
    rank_l1,
    rank_linf,
    rank_mu,
)
from .queryfn import OpKind, eval_batch, query_dims, sample_range_queries
from .rng import make_generator, rand_below

_OP_BYTE = {OpKind.INDEX: 0, OpKind.CARD_EST: 1, OpKind.RANGE_SUM: 2}
_BYTE_OP = {v: k for k, v in _OP_BYTE.items()}

MAGIC = b"LDBC"
VERSION = 1


# -- multiset codec ----------------------------------------------------------


def multiset_count(m: int, alphabet: int) -> int:
    if m < 0 or alphabet < 1:
        raise InvalidParams("need m >= 0 and alphabet >= 1")
    return math.comb(m + alphabet - 1, m)


def multiset_rank(items, alphabet: int) -> int:
    """Colex rank of a sorted multiset over {0..alphabet-1}."""
    rank = 0
    prev = 0
    for i, x in enumerate(items, start=1):
        x = int(x)
        if x < prev or x >= alphabet:
            raise InvalidParams("items must be sorted ascending within the alphabet")
        prev = x
        rank += math.comb(x + i - 1, i)
    return rank


def multiset_unrank(rank: int, m: int, alphabet: int) -> tuple[int, ...]:
    """Inverse of multiset_rank; returns the sorted multiset."""
    total = multiset_count(m, alphabet)
    if not 0 <= rank < total:
        raise IndexOutOfRange(f"rank {rank} outside [0, {total})")
    out = [0] * m
    remaining = rank
    hi_c = alphabet + m - 2
    for i in range(m, 0, -1):
        # largest c with C(c, i) <= remaining
        lo, hi = i - 1, hi_c
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if math.comb(mid, i) <= remaining:
                lo = mid
            else:
                hi = mid - 1
        remaining -= math.comb(lo, i)
        out[i - 1] = lo - (i - 1)
        hi_c = lo
    return tuple(out)


def _sample_distinct_multisets(
    m: int, alphabet: int, count: int, gen
) -> list[tuple[int, ...]]:
    if count < 2:
        raise InvalidParams("a packing family needs at least 2 members")
    total = multiset_count(m, alphabet)
    if count > total:
        raise FamilyTooLarge(
            f"requested {count} members but only {total} distinct multisets exist"
        )
    seen: set[int] = set()
    out: list[tuple[int, ...]] = []
    while len(out) < count:
        r = rand_below(gen, total)
        if r in seen:
            continue
        seen.add(r)
        out.append(multiset_unrank(r, m, alphabet))
    return out


# -- packing families --------------------------------------------------------


@dataclass(frozen=True)
class PackingFamily:
    op: OpKind
    norm: str
    datasets: tuple[Dataset, ...]
    claimed_separation: float
    params: dict = field(default_factory=dict)
    cdf: Callable | None = None


def _mixed_radix_points(values, d: int, base: int) -> np.ndarray:
    """Decode alphabet symbols into d base-`base` digits (axis 0 least significant).

    Pure-int arithmetic: cell ids may exceed 64 bits even though every
    digit is small.
    """
    coords = np.empty((len(values), d), dtype=np.float64)
    for i, v in enumerate(values):
        rem = int(v)
        for j in range(d):
            coords[i, j] = rem % base
            rem //= base
    return coords


def _expand_multiset(points: np.ndarray, copies: int, pad: int, d: int) -> np.ndarray:
    rows = np.repeat(points, copies, axis=0)
    if pad:
        rows = np.vstack([rows, np.ones((pad, d))])
    # canonical record order: lexicographic from the last axis outward
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def packing_linf(
    op: OpKind, n: int, d: int, eps: float, u: int, count: int, seed: int
) -> PackingFamily:
    """Family pairwise > eps apart in the worst-case distance.

    Members are multisets of floor(n/eb) grid points (grid {0, 1/u, .., 1}
    per predicate axis, eb = floor(eps)+1 copies of each, all-ones
    padding).  Two distinct members disagree on some point's multiplicity,
    and the query isolating that point changes the answer by at least eb.
    Range-sum members carry a constant 1.0 measure attribute, making their
    sums equal to the underlying counts.
    """
    if not 1.0 <= eps < n / 2.0:
        raise InvalidParams("worst-case packing needs 1 <= eps < n/2")
    if u < 1:
        raise InvalidParams("domain resolution u must be >= 1")
    if op is OpKind.INDEX and d != 1:
        raise InvalidParams("indexing is single-attribute; d must be 1")
    if d < 1:
        raise InvalidParams("d must be >= 1")
    eb = int(math.floor(eps)) + 1
    m = n // eb
    if m < 1:
        raise InvalidParams("eps too large: no room for even one repeated point")
    pad = n - eb * m
    alphabet = (u + 1) ** d
    gen = make_generator(seed)
    multisets = _sample_distinct_multisets(m, alphabet, count, gen)
    datasets = []
    for ms in multisets:
        pts = _mixed_radix_points(ms, d, u + 1) / float(u)
        rows = _expand_multiset(pts, eb, pad, d)
        if op is OpKind.RANGE_SUM:
            rows = np.hstack([rows, np.ones((n, 1))])
        ds = make_dataset(rows)
        datasets.append(ds)
    return PackingFamily(
        op=op,
        norm=LINF,
        datasets=tuple(datasets),
        claimed_separation=float(eps),
        params={"eps_bar": eb, "u": u, "multiset_size": m, "pad": pad, "d": d},
    )


def _grid_family(
    n: int,
    copies: int,
    grid: np.ndarray,
    count: int,
    seed: int,
) -> tuple[list[np.ndarray], int, int]:
    m = n // copies
    if m < 1:
        raise InvalidParams("n too small for the derived block count")
    pad = n - copies * m
    gen = make_generator(seed)
    multisets = _sample_distinct_multisets(m, grid.size, count, gen)
    columns = []
    for ms in multisets:
        vals = grid[np.asarray(ms, dtype=np.int64)]
        col = np.sort(np.concatenate([np.repeat(vals, copies), np.ones(pad)]))
        columns.append(col)
    return columns, m, pad


def packing_l1_index(n: int, eps: float, count: int, seed: int) -> PackingFamily:
    """Family pairwise > eps apart in the average-case rank distance.

    k = ceil(sqrt(n)) copies of each of floor(n/k) values from an
    equispaced grid of ceil(k/eps) points; distinct members differ in at
    least k sorted positions by at least one grid step, so their rank
    distance is at least k over (ceil(k/eps) - 1) > eps.
    """
    if not 0.0 < eps <= math.sqrt(n) / 2.0:
        raise InvalidParams("needs 0 < eps <= sqrt(n)/2")
    k = math.ceil(math.sqrt(n))
    levels = math.ceil(k / eps)
    grid = np.linspace(0.0, 1.0, levels)
    cols, m, pad = _grid_family(n, k, grid, count, seed)
    datasets = tuple(make_dataset(c) for c in cols)
    return PackingFamily(
        op=OpKind.INDEX,
        norm=L1,
        datasets=datasets,
        claimed_separation=float(eps),
        params={"k": k, "grid_points": levels, "multiset_size": m, "pad": pad},
    )


def packing_l1_ce(n: int, d: int, delta: float, count: int, seed: int) -> PackingFamily:
    """Family pairwise > delta apart in the average-case cardinality distance.

    Internally works at eps = delta * 4**d: k = ceil(sqrt(n)) + 1 copies
    of floor(n/k) grid points with all coordinates at most 1/2, plus
    all-ones padding.  Keeping the used corner away from 1 guarantees each
    extra axis keeps at least a 1/4 fraction of the isolating queries, so
    the d-dimensional distance is still > 2 * delta.
    """
    eps = delta * (4.0**d)
    if d < 1:
        raise InvalidParams("d must be >= 1")
    if not 0.0 < eps <= math.sqrt(n):
        raise InvalidParams("needs 0 < delta * 4^d <= sqrt(n)")
    k = math.ceil(math.sqrt(n)) + 1
    half = math.ceil(k / (2.0 * eps)) - 1
    u = 2 * half
    if u < 2:
        raise InvalidParams(
            f"grid collapses: derived resolution u = {u} < 2 "
            f"(delta * 4^d = {eps:g} is too close to sqrt(n))"
        )
    m = n // k
    if m < 1:
        raise InvalidParams("n too small: need n >= ceil(sqrt(n)) + 1")
    pad = n - k * m
    alphabet = (half + 1) ** d
    gen = make_generator(seed)
    multisets = _sample_distinct_multisets(m, alphabet, count, gen)
    datasets = []
    for ms in multisets:
        pts = _mixed_radix_points(ms, d, half + 1) / float(u)
        rows = _expand_multiset(pts, k, pad, d)
        datasets.append(make_dataset(rows))
    return PackingFamily(
        op=OpKind.CARD_EST,
        norm=L1,
        datasets=tuple(datasets),
        claimed_separation=float(delta),
        params={
            "internal_eps": eps,
            "k": k,
            "u": u,
            "multiset_size": m,
            "pad": pad,
            "d": d,
        },
    )


def quantile_points(cdf: Callable, targets: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Leftmost x with cdf(x) >= target, by bisection on [0, 1]."""
    t = np.asarray(targets, dtype=np.float64)
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    for _ in range(64):
        if float((hi - lo).max(initial=0.0)) <= tol:
            break
        mid = 0.5 * (lo + hi)
        below = np.asarray(cdf(mid), dtype=np.float64) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out[t <= 0.0] = 0.0
    out[t >= 1.0] = 1.0
    return out


def packing_mu_index(
    n: int, eps: float, cdf: Callable, count: int, seed: int
) -> PackingFamily:
    """Average-case rank packing, weighted by the measure with cdf `cdf`.

    Same block structure as the unweighted construction, but the grid is
    the equal-mass quantile grid of the measure, so consecutive grid
    values are exactly one mass unit apart and the weighted distance
    between distinct members exceeds eps.
    """
    if not 0.0 < eps <= math.sqrt(n) / 2.0:
        raise InvalidParams("needs 0 < eps <= sqrt(n)/2")
    k = math.ceil(math.sqrt(n))
    levels = math.ceil(k / eps)
    grid = quantile_points(cdf, np.arange(levels) / (levels - 1))
    cols, m, pad = _grid_family(n, k, grid, count, seed)
    datasets = tuple(make_dataset(c) for c in cols)
    return PackingFamily(
        op=OpKind.INDEX,
        norm=MU,
        datasets=datasets,
        claimed_separation=float(eps),
        params={"k": k, "grid_points": levels, "multiset_size": m, "pad": pad},
        cdf=cdf,
    )


# -- separation certificates -------------------------------------------------


@dataclass(frozen=True)
class SeparationCertificate:
    passed: bool
    pairs_checked: int
    min_observed: float
    claimed: float
    method: str
    samples: int = 0
    confidence: float = 1.0


def _pair_indices(members: int, pairs: int, gen) -> list[tuple[int, int]]:
    total = members * (members - 1) // 2
    if pairs >= total:
        return [(i, j) for i in range(members) for j in range(i + 1, members)]
    seen: set[int] = set()
    out: list[tuple[int, int]] = []
    while len(out) < pairs:
        flat = rand_below(gen, total)
        if flat in seen:
            continue
        seen.add(flat)
        # flat -> (i, j), row-major over the strict upper triangle
        i = 0
        row = members - 1
        while flat >= row:
            flat -= row
            i += 1
            row -= 1
        out.append((i, i + 1 + flat))
    return out


def _linf_probe(a: Dataset, b: Dataset, op: OpKind, samples: int, seed: int) -> float:
    """Deterministic lower bound on the worst-case distance.

    Point queries at every distinct predicate projection of both datasets
    (closed intervals make a zero-width box a point probe) plus uniform
    random queries.
    """
    dq = query_dims(op, a.d)
    pts = np.unique(np.vstack([a.values[:, :dq], b.values[:, :dq]]), axis=0)
    C, R = pts, np.zeros_like(pts)
    best = float(np.abs(eval_batch(a, op, (C, R)) - eval_batch(b, op, (C, R))).max())
    if samples > 0:
        gen = make_generator(seed)
        C2, R2 = sample_range_queries(samples, dq, gen)
        diff = np.abs(eval_batch(a, op, (C2, R2)) - eval_batch(b, op, (C2, R2)))
        best = max(best, float(diff.max()))
    return best


def _pair_distance(
    family: PackingFamily, a: Dataset, b: Dataset, mc_samples: int, seed: int
) -> tuple[float, str, int]:
    """(observed lower bound, method, samples) for one pair."""
    op, norm = family.op, family.norm
    if op is OpKind.INDEX:
        if norm == L1:
            return rank_l1(a, b), "exact", 0
        if norm == LINF:
            return rank_linf(a, b), "exact", 0
        if norm == MU:
            if family.cdf is None:
                raise InvalidRequest("mu-norm family carries no cdf")
            return rank_mu(a, b, family.cdf), "exact", 0
    if op is OpKind.CARD_EST and a.d == 1 and b.d == 1:
        if norm == L1:
            return card1d_l1(a, b), "exact", 0
        if norm == LINF:
            return card1d_linf(a, b), "exact", 0
    if norm == LINF:
        return _linf_probe(a, b, op, mc_samples, seed), "probe", mc_samples
    if norm == L1:
        est = mc_l1(a, b, op, mc_samples, seed)
        return est.value - 3.0 * est.std_error, "monte_carlo", mc_samples
    raise InvalidRequest(f"no certification route for op={op.value} norm={norm}")


def certify(
    family: PackingFamily, pairs: int, seed: int, mc_samples: int = 50_000
) -> SeparationCertificate:
    """Check pairwise separation on up to `pairs` random distinct pairs.

    Exact routes where they exist; otherwise a probe (worst case) or a
    Monte Carlo mean minus three standard errors (average case), both of
    which only under-report, so a passing certificate is sound either way.
    """
    members = len(family.datasets)
    if members < 2:
        raise InvalidParams("need at least two members to certify")
    gen = make_generator(seed)
    chosen = _pair_indices(members, pairs, gen)
    worst = math.inf
    method = "exact"
    used_samples = 0
    for t, (i, j) in enumerate(chosen):
        obs, how, ns = _pair_distance(
            family, family.datasets[i], family.datasets[j], mc_samples, seed + t + 1
        )
        if how != "exact":
            method = how
            used_samples = max(used_samples, ns)
        worst = min(worst, obs)
    confidence = 0.99865 if method == "monte_carlo" else 1.0
    return SeparationCertificate(
        passed=bool(worst > family.claimed_separation),
        pairs_checked=len(chosen),
        min_observed=float(worst),
        claimed=family.claimed_separation,
        method=method,
        samples=used_samples,
        confidence=confidence,
    )


# -- cover codec -------------------------------------------------------------


@dataclass(frozen=True)
class CoverCode:
    op: OpKind
    n: int
    d: int
    resolution: int
    index: int
    bit_length: int


def _predicate_d(op: OpKind, data_d: int) -> int:
    if op is OpKind.INDEX:
        if data_d != 1:
            raise DimensionMismatch("indexing covers need single-attribute data")
        return 1
    if op is OpKind.CARD_EST:
        return data_d
    if data_d < 2:
        raise DimensionMismatch("range-sum covers need >= 2 attributes")
    return data_d - 1


def _bit_length_for(op: OpKind, n: int, data_d: int, resolution: int) -> int:
    alphabet = (resolution + 1) ** data_d
    exact = (multiset_count(n, alphabet) - 1).bit_length()
    approx = math.ceil(log2_binomial(alphabet + n - 1, n))
    # the float route and the integer route agree on every feasible size;
    # keep the larger defensively so the index always fits
    return max(exact, approx)


def _quantile_digits(values: np.ndarray, resolution: int, cdf: Callable) -> np.ndarray:
    mass = np.asarray(cdf(values), dtype=np.float64)
    return np.clip(np.floor(mass * resolution).astype(np.int64), 0, resolution)


def cover_encode(
    dataset: Dataset, eps: float, op: OpKind, cdf: Callable | None = None
) -> CoverCode:
    """Quantize to the eps-cover grid and encode as one multiset index.

    The grid step is 1/ceil(n/eps) per axis (equal-mass quantile cells
    instead when a cdf is supplied, indexing only); records become cell
    ids, the id multiset becomes its colex rank.  Decoding returns the
    quantized dataset exactly, whose distance to the original is at most
    eps for indexing, (d+1) eps for cardinality, (d+2) eps for range-sum.
    """
    n, data_d = dataset.n, dataset.d
    if n < 1:
        raise InvalidParams("cannot encode an empty dataset")
    if not 0.0 < eps <= n:
        raise InvalidParams("covers need 0 < eps <= n")
    _predicate_d(op, data_d)  # validates dimensionality
    if cdf is not None and op is not OpKind.INDEX:
        raise InvalidRequest("quantile covers are defined for indexing only")
    u = ceil_ratio(n, eps)
    if cdf is None:
        digits = grid_digits(dataset.values, u)
    else:
        digits = _quantile_digits(dataset.values, u, cdf)
    base = u + 1
    ids = digits[:, 0].astype(object)
    for j in range(1, data_d):
        ids = ids + digits[:, j].astype(object) * (base**j)
    ids = sorted(int(x) for x in ids)
    alphabet = base**data_d
    index = multiset_rank(ids, alphabet)
    bits = _bit_length_for(op, n, data_d, u)
    if index >> bits:
        raise InvalidParams("internal: index exceeds its advertised bit length")
    return CoverCode(op=op, n=n, d=data_d, resolution=u, index=index, bit_length=bits)


def cover_decode(code: CoverCode, cdf: Callable | None = None) -> Dataset:
    """Rebuild the quantized dataset from a cover index.

    Records come back in ascending cell-id order (sorted ascending for
    indexing); pass the same cdf used at encode time for quantile covers.
    """
    base = code.resolution + 1
    alphabet = base**code.d
    total = multiset_count(code.n, alphabet)
    if not 0 <= code.index < total:
        raise IndexOutOfRange(f"index {code.index} outside [0, {total})")
    if cdf is not None and code.op is not OpKind.INDEX:
        raise InvalidRequest("quantile covers are defined for indexing only")
    ids = multiset_unrank(code.index, code.n, alphabet)
    coords = _mixed_radix_points(ids, code.d, base)
    if cdf is None:
        values = coords / float(code.resolution)
    else:
        values = quantile_points(cdf, coords[:, 0] / float(code.resolution)).reshape(-1, 1)
    return make_dataset(values)


def cover_error_bound(op: OpKind, eps: float, data_d: int) -> float:
    """Guaranteed distance between a dataset and its decoded cover."""
    if op is OpKind.INDEX:
        return eps
    if op is OpKind.CARD_EST:
        return (data_d + 1) * eps
    return ((data_d - 1) + 2) * eps


# -- container format --------------------------------------------------------


def write_cover(code: CoverCode, path: str) -> None:
    """Binary container: magic, version, op, n, d, resolution, payload.

    Integers little-endian; the index itself big-endian, zero-padded to
    ceil(bit_length/8) bytes.
    """
    payload = code.index.to_bytes((code.bit_length + 7) // 8, "big")
    blob = (
        MAGIC
        + bytes([VERSION, _OP_BYTE[code.op]])
        + code.n.to_bytes(8, "little")
        + code.d.to_bytes(2, "little")
        + code.resolution.to_bytes(8, "little")
        + len(payload).to_bytes(4, "little")
        + payload
    )
    with open(path, "wb") as fh:
        fh.write(blob)


def read_cover(path: str) -> CoverCode:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 28:
        raise FormatError("container truncated")
    if blob[:4] != MAGIC:
        raise FormatError("bad magic")
    if blob[4] != VERSION:
        raise FormatError(f"unsupported version {blob[4]}")
    if blob[5] not in _BYTE_OP:
        raise FormatError(f"unknown operation byte {blob[5]}")
    op = _BYTE_OP[blob[5]]
    n = int.from_bytes(blob[6:14], "little")
    d = int.from_bytes(blob[14:16], "little")
    u = int.from_bytes(blob[16:24], "little")
    plen = int.from_bytes(blob[24:28], "little")
    if len(blob) != 28 + plen:
        raise FormatError("payload length mismatch")
    if n < 1 or d < 1 or u < 1:
        raise FormatError("header fields out of range")
    bits = _bit_length_for(op, n, d, u)
    if plen != (bits + 7) // 8:
        raise FormatError("payload width inconsistent with header")
    index = int.from_bytes(blob[28:], "big")
    total = multiset_count(n, (u + 1) ** d)
    if index >= total:
        raise FormatError("index outside the code space")
    return CoverCode(op=op, n=n, d=d, resolution=u, index=index, bit_length=bits)


# -- pigeonhole witness ------------------------------------------------------


@dataclass(frozen=True)
class PigeonholeWitness:
    first: int
    second: int
    code: object
    err_first: DistanceEstimate
    err_second: DistanceEstimate

    @property
    def worst(self) -> float:
        return max(self.err_first.value, self.err_second.value)


def _decoded_error(
    family: PackingFamily,
    member: Dataset,
    predict: Callable,
    cfg: EvalConfig,
) -> DistanceEstimate:
    if family.norm in (L1, LINF):
        return model_error(member, family.op, predict, family.norm, cfg)
    if family.norm == MU:
        if family.cdf is None or family.op is not OpKind.INDEX:
            raise InvalidRequest("mu-norm witness needs an indexing family with a cdf")
        gen = make_generator(cfg.seed)
        qs = quantile_points(family.cdf, gen.random(cfg.samples), tol=1e-10)
        truth = eval_batch(member, family.op, qs)
        pred = np.asarray(predict(qs), dtype=np.float64)
        gaps = np.abs(truth - pred)
        mean = float(gaps.mean())
        se = float(gaps.std(ddof=1) / math.sqrt(gaps.size)) if gaps.size > 1 else 0.0
        return DistanceEstimate(value=mean, exact=False, std_error=se, samples=gaps.size)
    raise InvalidRequest(f"unsupported norm {family.norm!r}")


def pigeonhole_witness(
    family: PackingFamily,
    sigma_bits: int,
    encoder: Callable[[Dataset], object],
    decoder_eval: Callable[[object], Callable],
    cfg: EvalConfig | None = None,
) -> PigeonholeWitness:
    """Find two family members an undersized encoder cannot separate.

    Needs strictly more members than 2**sigma_bits codes, which forces a
    collision; the shared decoded answer function is then measured against
    both members.  By the triangle inequality its error must exceed half
    the family's separation on at least one of them.

    `encoder` maps a dataset to a hashable code; `decoder_eval(code)`
    returns a prediction function over query batches.
    """
    members = len(family.datasets)
    if sigma_bits < 0:
        raise InvalidParams("sigma_bits must be non-negative")
    if members <= 2**sigma_bits:
        raise InvalidParams(
            f"pigeonhole needs more than 2^{sigma_bits} = {2**sigma_bits} members, "
            f"got {members}"
        )
    cfg = cfg or EvalConfig(samples=20_000, grid=16, seed=7)
    by_code: dict[object, int] = {}
    pair = None
    code = None
    for idx, ds in enumerate(family.datasets):
        c = encoder(ds)
        if c in by_code:
            pair = (by_code[c], idx)
            code = c
            break
        by_code[c] = idx
    if pair is None:
        raise NoCollision(
            "encoder produced distinct codes; its width must exceed sigma_bits"
        )
    predict = decoder_eval(code)
    err_a = _decoded_error(family, family.datasets[pair[0]], predict, cfg)
    err_b = _decoded_error(family, family.datasets[pair[1]], predict, cfg)
    return PigeonholeWitness(
        first=pair[0], second=pair[1], code=code, err_first=err_a, err_second=err_b
    )
