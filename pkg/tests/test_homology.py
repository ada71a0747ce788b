import math

import numpy as np
import pytest

from conftest import diagrams_equal, make_cloud, random_dm
from eegtda.errors import ConfigError, InputError, NumericError
from eegtda.homology import (PAPER_2EPS, Filtration, PersistenceDiagram,
                             betti_curve, bottleneck_distance,
                             compute_persistence, h0_via_mst,
                             persistent_entropy, rips_filtration)
from eegtda.homology_oracle import naive_persistence
from eegtda.pointcloud import DistanceMatrix, distance_matrix


def diagram_from_pairs(pairs_by_dim, threshold, n_points=0):
    pd = PersistenceDiagram(n_points=n_points, max_dim=2, threshold=threshold)
    for dim in range(3):
        pairs = pairs_by_dim.get(dim, [])
        pd.births[dim] = np.array([p[0] for p in pairs], dtype=np.float64)
        pd.deaths[dim] = np.array([p[1] for p in pairs], dtype=np.float64)
    return pd


# ------------------------------------------------------------- filtration

def equilateral_dm(s=2.0):
    d = np.full((3, 3), s)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


def test_equilateral_filtration():
    filt = rips_filtration(equilateral_dm(2.0), max_dim=2, threshold="auto")
    simplices = list(filt.simplices())
    assert [s for s, v in simplices if v == 0.0] == [(0,), (1,), (2,)]
    assert filt.n_simplices(1) == 3 and np.all(filt.vals[1] == 2.0)
    assert filt.n_simplices(2) == 1 and filt.vals[2][0] == 2.0


def test_paper2eps_keeps_only_closest_edge():
    pts = np.array([[0, 0, 0], [0.1, 0, 0], [5, 0, 0], [0, 5, 0.0]])
    dm = distance_matrix(make_cloud(pts))
    filt = rips_filtration(dm, max_dim=2, threshold=PAPER_2EPS)
    assert filt.threshold == pytest.approx(0.2)
    assert filt.n_simplices(1) == 1
    assert tuple(filt.verts[1][0]) == (0, 1)
    assert filt.n_simplices(2) == 0


def test_full_flag_complex_count():
    filt = rips_filtration(random_dm(8, 0), max_dim=2, threshold="auto")
    assert filt.n_simplices() == 8 + 28 + 56 + 70  # C(8,1..4) = 162


def test_face_values_monotone():
    filt = rips_filtration(random_dm(7, 1), max_dim=2, threshold="auto")
    value = {s: v for s, v in filt.simplices()}
    for simplex, v in value.items():
        if len(simplex) > 1:
            for k in range(len(simplex)):
                face = simplex[:k] + simplex[k + 1:]
                assert value[face] <= v


def test_threshold_errors():
    with pytest.raises(ConfigError):
        rips_filtration(random_dm(5, 0), threshold=-1.0)
    dm = DistanceMatrix(np.zeros((4, 4)))
    with pytest.raises(NumericError):
        rips_filtration(dm, threshold=PAPER_2EPS)


# ------------------------------------------------------------ persistence

def test_equilateral_persistence():
    pd = compute_persistence(rips_filtration(equilateral_dm(2.0), 2, "auto"))
    b0, d0 = pd.pairs(0, include_zero=True)
    assert np.array_equal(b0, [0, 0, 0])
    assert np.array_equal(d0, [2.0, 2.0, np.inf])
    b1, _ = pd.pairs(1)  # triangle arrives with its last edge
    assert len(b1) == 0


def test_unit_square_h1():
    pts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0.0]])
    pd = compute_persistence(
        rips_filtration(distance_matrix(make_cloud(pts)), 2, "auto"))
    b1, d1 = pd.pairs(1)
    assert len(b1) == 1
    assert b1[0] == pytest.approx(1.0)
    assert d1[0] == pytest.approx(math.sqrt(2.0))


def test_oracle_equivalence_battery():
    for seed in range(25):
        n = 4 + seed % 5
        filt = rips_filtration(random_dm(n, seed), 2, "auto")
        assert diagrams_equal(compute_persistence(filt),
                              naive_persistence(filt))


def test_oracle_equivalence_capped_threshold():
    for seed in range(10):
        dm = random_dm(7, 100 + seed)
        med = float(np.median(dm.dist[np.triu_indices(7, 1)]))
        filt = rips_filtration(dm, 2, med)
        assert diagrams_equal(compute_persistence(filt),
                              naive_persistence(filt))


def test_h0_count_equals_points():
    for n, seed in ((5, 0), (12, 1)):
        pd = compute_persistence(rips_filtration(random_dm(n, seed), 2, "auto"))
        b, d = pd.pairs(0, include_zero=True)
        assert len(b) == n
        assert np.sum(np.isinf(d)) == 1


def test_missing_face_raises():
    filt = Filtration(n_points=3, max_dim=1, threshold=1.0)
    filt.verts[0] = np.arange(3).reshape(-1, 1)
    filt.vals[0] = np.zeros(3)
    filt.verts[1] = np.array([[0, 1]])
    filt.vals[1] = np.array([0.5])
    filt.verts[2] = np.array([[0, 1, 2]])  # triangle with missing edges
    filt.vals[2] = np.array([0.9])
    with pytest.raises(InputError, match="missing face"):
        compute_persistence(filt)


def test_scale_equivariance():
    dm = random_dm(10, 3)
    pd1 = compute_persistence(rips_filtration(dm, 2, "auto"))
    lam = 7.3
    pd2 = compute_persistence(
        rips_filtration(DistanceMatrix(lam * dm.dist), 2, "auto"))
    for dim in range(3):
        b1, d1 = pd1.pairs(dim, include_zero=True)
        b2, d2 = pd2.pairs(dim, include_zero=True)
        assert np.allclose(b2, lam * b1, rtol=1e-15, atol=0)
        assert np.allclose(d2, lam * d1, rtol=1e-15, atol=0)


def test_birth_not_after_death():
    for seed in range(5):
        pd = compute_persistence(rips_filtration(random_dm(9, seed), 2, "auto"))
        for dim in range(3):
            b, d = pd.pairs(dim, include_zero=True)
            assert np.all(b <= d)


# ------------------------------------------------------------------- MST

def test_mst_collinear_chain():
    d = np.abs(np.array([[0.0], [1.0], [3.0]]) - np.array([[0.0, 1.0, 3.0]]))
    deaths = h0_via_mst(DistanceMatrix(d))
    assert np.array_equal(deaths, [1.0, 2.0])


def test_mst_identical_points():
    deaths = h0_via_mst(DistanceMatrix(np.zeros((5, 5))))
    assert np.array_equal(deaths, np.zeros(4))


def test_mst_matches_persistence():
    for n in (8, 32):
        dm = random_dm(n, n)
        pd = compute_persistence(rips_filtration(dm, 0, "auto"))
        _, d0 = pd.pairs(0, include_zero=True)
        finite = np.sort(d0[np.isfinite(d0)])
        assert np.array_equal(finite, h0_via_mst(dm))


# --------------------------------------------------------------- entropy

def test_entropy_uniform_is_log_count():
    pd = diagram_from_pairs({0: [(0.0, 1.0)] * 4}, threshold=2.0)
    assert persistent_entropy(pd, 0) == pytest.approx(math.log(4), abs=1e-12)
    assert persistent_entropy(pd, 0) == pytest.approx(1.3862943611198906,
                                                      abs=1e-9)


def test_entropy_single_bar_zero():
    pd = diagram_from_pairs({1: [(0.5, 2.0)]}, threshold=3.0)
    assert persistent_entropy(pd, 1) == 0.0


def test_entropy_two_bars_hand_value():
    pd = diagram_from_pairs({0: [(0.0, 1.0), (0.0, 3.0)]}, threshold=3.0)
    expected = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
    assert persistent_entropy(pd, 0) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.5623351446188083, abs=1e-12)


def test_entropy_infinite_replaced_by_threshold():
    pd = diagram_from_pairs({0: [(0.0, 1.0), (0.0, np.inf)]}, threshold=3.0)
    expected = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
    assert persistent_entropy(pd, 0) == pytest.approx(expected, abs=1e-12)
    assert persistent_entropy(pd, 0, infinite="drop") == 0.0


def test_entropy_scale_invariance():
    dm = random_dm(10, 5)
    for lam in (0.1, 7.3):
        pd1 = compute_persistence(rips_filtration(dm, 2, "auto"))
        pd2 = compute_persistence(
            rips_filtration(DistanceMatrix(lam * dm.dist), 2, "auto"))
        for dim in range(3):
            assert persistent_entropy(pd2, dim) == pytest.approx(
                persistent_entropy(pd1, dim), abs=1e-12)


# ----------------------------------------------------------- betti curve

def test_betti_curve_h0():
    dm = random_dm(6, 7)
    pd = compute_persistence(rips_filtration(dm, 2, "auto"))
    assert betti_curve(pd, 0, [0.0])[0] == 6
    beyond = dm.dist.max() * 1.01
    assert betti_curve(pd, 0, [beyond])[0] == 1


def test_betti_curve_unit_square():
    pts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0.0]])
    pd = compute_persistence(
        rips_filtration(distance_matrix(make_cloud(pts)), 2, "auto"))
    assert betti_curve(pd, 1, [1.2])[0] == 1
    assert betti_curve(pd, 1, [0.5, 1.5])[1] == 0


def test_betti_curve_grid_must_ascend():
    pd = diagram_from_pairs({}, threshold=1.0)
    with pytest.raises(ConfigError):
        betti_curve(pd, 0, [1.0, 0.5])


# ------------------------------------------------------------ bottleneck

def test_bottleneck_identical_zero():
    pairs = [(0.0, 1.0), (0.2, 0.9)]
    assert bottleneck_distance(pairs, pairs) == 0.0


def test_bottleneck_diagonal_matching():
    # lone near-diagonal point matches the diagonal at cost pers/2
    assert bottleneck_distance([(1.0, 1.2)], []) == pytest.approx(0.1)


def test_stability_under_perturbation():
    rng = np.random.default_rng(11)
    eta = 0.01
    for seed in range(5):
        pts = np.random.default_rng(seed).random((6, 3))
        bumped = pts + rng.uniform(-eta, eta, pts.shape)
        pd_a = compute_persistence(
            rips_filtration(distance_matrix(make_cloud(pts)), 2, "auto"))
        pd_b = compute_persistence(
            rips_filtration(distance_matrix(make_cloud(bumped)), 2, "auto"))
        for dim in range(3):
            ba, da = pd_a.pairs(dim)
            bb, db = pd_b.pairs(dim)
            fa = np.isfinite(da)
            fb = np.isfinite(db)
            dist = bottleneck_distance(np.column_stack([ba[fa], da[fa]]),
                                       np.column_stack([bb[fb], db[fb]]))
            assert dist <= 2 * eta + 1e-12
