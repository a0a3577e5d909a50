from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dataset, random_sorted
from ldbounds.bounds import covering_count_log2
from ldbounds.constructions import (
    CoverCode,
    certify,
    cover_decode,
    cover_encode,
    cover_error_bound,
    multiset_count,
    multiset_rank,
    multiset_unrank,
    packing_l1_ce,
    packing_l1_index,
    packing_linf,
    packing_mu_index,
    pigeonhole_witness,
    quantile_points,
    read_cover,
    write_cover,
)
from ldbounds.data import GridSpec, make_dataset, quantize, sort_dataset_1d
from ldbounds.errors import FamilyTooLarge, FormatError, InvalidParams
from ldbounds.norms import (
    EvalConfig,
    card1d_l1,
    card1d_linf,
    mc_l1,
    rank_l1,
    rank_linf,
    rank_mu,
)
from ldbounds.queryfn import OpKind


# -- multiset codec ----------------------------------------------------------


def test_multiset_codec_documented_order():
    # colex order over multisets of size 2 from a 3-symbol alphabet
    want = [(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2)]
    assert multiset_count(2, 3) == 6
    for i, ms in enumerate(want):
        assert multiset_unrank(i, 2, 3) == ms
        assert multiset_rank(ms, 3) == i


def test_multiset_rank_formula():
    # rank of a sorted multiset is the sum of C(x_i + i - 1, i)
    ms = (1, 1)
    assert multiset_rank(ms, 3) == math.comb(1, 1) + math.comb(2, 2)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_multiset_roundtrip(data):
    m = data.draw(st.integers(1, 8))
    alphabet = data.draw(st.integers(1, 12))
    total = multiset_count(m, alphabet)
    index = data.draw(st.integers(0, total - 1))
    ms = multiset_unrank(index, m, alphabet)
    assert len(ms) == m
    assert all(0 <= x < alphabet for x in ms)
    assert list(ms) == sorted(ms)
    assert multiset_rank(ms, alphabet) == index


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(1, 8))
def test_multiset_rank_is_bijection(m, alphabet):
    total = multiset_count(m, alphabet)
    seen = {multiset_rank(multiset_unrank(i, m, alphabet), alphabet) for i in range(min(total, 200))}
    assert seen == set(range(min(total, 200)))


def test_multiset_codec_huge_index():
    # far beyond 64-bit territory
    m, alphabet = 64, 10**6
    total = multiset_count(m, alphabet)
    assert total.bit_length() > 900
    for index in (0, total // 3, total - 1):
        ms = multiset_unrank(index, m, alphabet)
        assert multiset_rank(ms, alphabet) == index


# -- packing families --------------------------------------------------------


def test_packing_linf_family_shape():
    fam = packing_linf(OpKind.INDEX, 10, 1, 1.0, 4, 6, seed=1)
    assert len(fam.datasets) == 6
    assert fam.claimed_separation == 1.0
    assert fam.params["eps_bar"] == 2
    for ds in fam.datasets:
        assert ds.n == 10 and ds.d == 1
    # members are pairwise distinct
    keys = {ds.values.tobytes() for ds in fam.datasets}
    assert len(keys) == 6


def test_packing_linf_separation_exact():
    fam = packing_linf(OpKind.INDEX, 10, 1, 1.0, 4, 6, seed=1)
    members = [sort_dataset_1d(ds) for ds in fam.datasets]
    eb = fam.params["eps_bar"]
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            assert rank_linf(members[i], members[j]) >= eb


def test_packing_linf_range_ops():
    fam = packing_linf(OpKind.CARD_EST, 12, 2, 1.0, 3, 5, seed=2)
    for ds in fam.datasets:
        assert ds.d == 2
    fam = packing_linf(OpKind.RANGE_SUM, 12, 1, 1.0, 3, 5, seed=3)
    for ds in fam.datasets:
        assert ds.d == 2  # predicate attribute plus the summed column
        assert np.all(ds.values[:, -1] == 1.0)
    cert = certify(fam, pairs=10, seed=4)
    assert cert.passed


def test_packing_linf_rejects_bad_eps():
    with pytest.raises(InvalidParams):
        packing_linf(OpKind.INDEX, 10, 1, 0.5, 4, 3, seed=1)  # eps < 1
    with pytest.raises(InvalidParams):
        packing_linf(OpKind.INDEX, 10, 1, 5.0, 4, 3, seed=1)  # eps >= n/2


def test_packing_family_too_large():
    # alphabet so small that 10 distinct members cannot exist
    with pytest.raises(FamilyTooLarge):
        packing_linf(OpKind.INDEX, 4, 1, 1.0, 1, 10, seed=1)


def test_packing_l1_index_certificate():
    fam = packing_l1_index(100, 0.5, 8, seed=5)
    cert = certify(fam, pairs=28, seed=6)
    assert cert.passed and cert.method == "exact"
    assert cert.min_observed > fam.claimed_separation


def test_packing_l1_index_separation_by_hand():
    fam = packing_l1_index(100, 0.5, 6, seed=7)
    members = [sort_dataset_1d(ds) for ds in fam.datasets]
    worst = min(
        rank_l1(members[i], members[j])
        for i in range(6)
        for j in range(i + 1, 6)
    )
    assert worst > 0.5


def test_packing_l1_ce_certificate_d1():
    fam = packing_l1_ce(100, 1, 0.05, 8, seed=8)
    cert = certify(fam, pairs=28, seed=9)
    assert cert.passed and cert.method == "exact"
    # claimed separation is the delta target
    assert fam.claimed_separation == 0.05
    for ds in fam.datasets:
        used = ds.values[ds.values < 1.0]
        assert np.all(used <= 0.5)


def test_packing_l1_ce_certificate_d2_mc():
    fam = packing_l1_ce(100, 2, 0.05, 5, seed=10)
    cert = certify(fam, pairs=10, seed=11, mc_samples=40_000)
    assert cert.passed and cert.method == "monte_carlo"
    assert cert.confidence > 0.99


def test_packing_l1_ce_rejects_unbuildable_grid():
    with pytest.raises(InvalidParams):
        packing_l1_ce(100, 3, 1.0, 3, seed=1)


def test_packing_mu_index_certificate():
    fam = packing_mu_index(100, 0.5, np.square, 8, seed=12)
    cert = certify(fam, pairs=28, seed=13)
    assert cert.passed and cert.method == "exact"
    members = [sort_dataset_1d(ds) for ds in fam.datasets]
    worst = min(
        rank_mu(members[i], members[j], np.square)
        for i in range(8)
        for j in range(i + 1, 8)
    )
    assert worst > 0.5


def test_certify_fails_on_close_family():
    base = random_sorted(20, seed=14)
    near = make_dataset(np.clip(base.values + 1e-6, 0.0, 1.0))
    fam_type = type(packing_l1_index(16, 0.5, 2, seed=15))
    fam = fam_type(
        op=OpKind.INDEX,
        norm="l1",
        datasets=(base, sort_dataset_1d(near)),
        claimed_separation=1.0,
        params={},
    )
    cert = certify(fam, pairs=1, seed=16)
    assert not cert.passed


def test_quantile_points_inverts_cdf():
    targets = np.linspace(0.0, 1.0, 11)
    xs = quantile_points(np.square, targets)
    assert np.allclose(np.square(xs), targets, atol=1e-10)
    assert xs[0] == 0.0 and xs[-1] == 1.0


# -- cover codec -------------------------------------------------------------


def test_cover_documented_example():
    ds = make_dataset(np.array([[0.1], [0.3], [0.62], [0.99]]))
    code = cover_encode(ds, 1.0, OpKind.INDEX)
    assert code.resolution == 4
    assert code.bit_length == 7
    dec = cover_decode(code)
    assert np.allclose(dec.values.ravel(), [0.0, 0.25, 0.5, 0.75])
    assert rank_l1(sort_dataset_1d(ds), dec) == pytest.approx(0.51, abs=1e-12)


def test_cover_fixed_point_on_grid():
    ds = make_dataset(np.array([[0.0], [0.25], [0.5], [0.75]]))
    code = cover_encode(ds, 1.0, OpKind.INDEX)
    dec = cover_decode(code)
    assert np.array_equal(dec.values, ds.values)


def test_cover_decode_encode_is_quantize():
    for seed in range(25):
        op, d = [(OpKind.INDEX, 1), (OpKind.CARD_EST, 2), (OpKind.RANGE_SUM, 2)][
            seed % 3
        ]
        n = 5 + seed
        ds = random_dataset(n, d, seed=100 + seed)
        eps = 0.25 + (seed % 4)
        code = cover_encode(ds, eps, op)
        dec = cover_decode(code)
        q = quantize(ds, GridSpec(resolution=code.resolution))
        want = np.array(sorted(map(tuple, q.values)))
        got = np.array(sorted(map(tuple, dec.values)))
        assert np.array_equal(got, want), seed


def test_cover_bit_length_matches_count():
    for seed in range(10):
        n = 4 + seed
        ds = random_dataset(n, 1, seed=200 + seed)
        eps = 0.5 + seed % 3
        code = cover_encode(ds, eps, OpKind.INDEX)
        assert code.bit_length == math.ceil(
            covering_count_log2(OpKind.INDEX, n, 1, eps)
        )
        assert code.index < multiset_count(n, code.resolution + 1)


def test_cover_error_guarantee_index_exact():
    for seed in range(40):
        n = 3 + seed % 20
        eps = 0.3 + (seed % 5)
        if eps > n:
            continue
        ds = random_sorted(n, seed=300 + seed)
        code = cover_encode(ds, eps, OpKind.INDEX)
        dec = cover_decode(code)
        assert rank_l1(ds, dec) <= cover_error_bound(OpKind.INDEX, eps, 1) + 1e-12


def test_cover_error_guarantee_ce_exact_d1():
    for seed in range(40):
        n = 3 + seed % 20
        eps = 0.3 + (seed % 3)
        ds = random_dataset(n, 1, seed=400 + seed)
        code = cover_encode(ds, eps, OpKind.CARD_EST)
        dec = cover_decode(code)
        bound = cover_error_bound(OpKind.CARD_EST, eps, 1)
        assert bound == 2.0 * eps
        assert card1d_l1(ds, dec) <= bound + 1e-12


def test_cover_error_guarantee_mc_d2():
    for seed in range(5):
        n = 10 + seed
        eps = 1.0
        ds = random_dataset(n, 2, seed=500 + seed)
        code = cover_encode(ds, eps, OpKind.CARD_EST)
        dec = cover_decode(code)
        est = mc_l1(ds, dec, OpKind.CARD_EST, 30_000, seed=seed)
        bound = cover_error_bound(OpKind.CARD_EST, eps, 2)
        assert bound == 3.0 * eps
        assert est.value <= bound + 3.0 * est.std_error

        ds3 = random_dataset(n, 2, seed=600 + seed)
        code = cover_encode(ds3, eps, OpKind.RANGE_SUM)
        dec = cover_decode(code)
        est = mc_l1(ds3, dec, OpKind.RANGE_SUM, 30_000, seed=seed)
        bound = cover_error_bound(OpKind.RANGE_SUM, eps, 2)
        assert bound == 3.0 * eps  # one predicate attribute plus the summed one
        assert est.value <= bound + 3.0 * est.std_error


def test_cover_quantile_variant():
    ds = random_sorted(30, seed=700)
    code = cover_encode(ds, 2.0, OpKind.INDEX, cdf=np.square)
    dec = cover_decode(code, cdf=np.square)
    assert rank_mu(ds, dec, np.square) <= 2.0 + 1e-9
    # decoding with the wrong measure gives different values
    dec_wrong = cover_decode(code)
    assert not np.array_equal(dec.values, dec_wrong.values)


def test_cover_rejects_bad_eps():
    ds = random_sorted(10, seed=800)
    with pytest.raises(InvalidParams):
        cover_encode(ds, 0.0, OpKind.INDEX)
    with pytest.raises(InvalidParams):
        cover_encode(ds, 11.0, OpKind.INDEX)


# -- container format --------------------------------------------------------


def test_container_roundtrip(tmp_path):
    for seed, (op, d) in enumerate(
        [(OpKind.INDEX, 1), (OpKind.CARD_EST, 2), (OpKind.RANGE_SUM, 3)]
    ):
        ds = random_dataset(12, d, seed=900 + seed)
        code = cover_encode(ds, 1.5, op)
        path = str(tmp_path / f"c{seed}.ldbc")
        write_cover(code, path)
        assert read_cover(path) == code


def test_container_layout(tmp_path):
    ds = make_dataset(np.array([[0.1], [0.3], [0.62], [0.99]]))
    code = cover_encode(ds, 1.0, OpKind.INDEX)
    path = str(tmp_path / "c.ldbc")
    write_cover(code, path)
    blob = open(path, "rb").read()
    assert blob[:4] == b"LDBC"
    assert blob[4] == 1
    assert blob[5] == 0  # op byte for indexing
    assert int.from_bytes(blob[6:14], "little") == 4  # n
    assert int.from_bytes(blob[14:16], "little") == 1  # d
    assert int.from_bytes(blob[16:24], "little") == 4  # resolution
    assert int.from_bytes(blob[24:28], "little") == 1  # payload bytes
    assert blob[28:] == code.index.to_bytes(1, "big")


def test_container_rejects_corruption(tmp_path):
    ds = random_sorted(8, seed=1000)
    code = cover_encode(ds, 1.0, OpKind.INDEX)
    path = str(tmp_path / "c.ldbc")
    write_cover(code, path)
    blob = bytearray(open(path, "rb").read())

    bad = bytes(b"XXXX") + bytes(blob[4:])
    open(path, "wb").write(bad)
    with pytest.raises(FormatError):
        read_cover(path)

    blob2 = bytearray(blob)
    blob2[4] = 9  # unknown version
    open(path, "wb").write(bytes(blob2))
    with pytest.raises(FormatError):
        read_cover(path)

    blob3 = bytearray(blob)
    blob3[5] = 7  # unknown op
    open(path, "wb").write(bytes(blob3))
    with pytest.raises(FormatError):
        read_cover(path)

    open(path, "wb").write(bytes(blob[:10]))  # truncated
    with pytest.raises(FormatError):
        read_cover(path)


def test_container_rejects_out_of_space_index(tmp_path):
    ds = make_dataset(np.array([[0.0], [0.0]]))
    code = cover_encode(ds, 2.0, OpKind.INDEX)  # resolution 1, C(3,2)=3 codes
    path = str(tmp_path / "c.ldbc")
    write_cover(code, path)
    blob = bytearray(open(path, "rb").read())
    blob[-1] = 255  # index 255 >= 3
    open(path, "wb").write(bytes(blob))
    with pytest.raises(FormatError):
        read_cover(path)


# -- pigeonhole --------------------------------------------------------------


def test_pigeonhole_finds_collision():
    fam = packing_l1_index(100, 0.5, 5, seed=20)

    def encoder(ds):
        return cover_encode(ds, 50.0, OpKind.INDEX).index % 4  # 2 bits

    def decoder_eval(code):
        return lambda batch: np.full(np.asarray(batch).shape[0], 50.0)

    w = pigeonhole_witness(fam, 2, encoder, decoder_eval)
    assert w.first != w.second
    assert encoder(fam.datasets[w.first]) == encoder(fam.datasets[w.second]) == w.code
    assert w.worst == max(w.err_first.value, w.err_second.value)
    assert w.worst > fam.claimed_separation / 2


def test_pigeonhole_requires_oversubscription():
    fam = packing_l1_index(100, 0.5, 4, seed=21)
    with pytest.raises(InvalidParams):
        pigeonhole_witness(fam, 2, lambda ds: 0, lambda code: (lambda b: b))
