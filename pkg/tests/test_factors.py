import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from expcodes.factors import (
    MeasurableFunction,
    NetTooLarge,
    build_factor,
    conditional_average,
    enumerate_net,
    factor_distance,
    family_distance,
    grid_values,
    net_size_bound,
    realize_signature,
    round_to_sets,
    signature_of,
)
from expcodes.lp import LPTooLarge, find_feasible_point
from expcodes.regularity import FunctionFamily


def families(max_n=10, max_sets=4):
    return st.integers(2, max_n).flatmap(
        lambda n: st.lists(
            st.lists(st.booleans(), min_size=n, max_size=n), min_size=0, max_size=max_sets
        ).map(lambda rows: FunctionFamily.from_sets(n, [np.array(r, dtype=bool) for r in rows]))
    )


def disjoint_sets(n, K, rng):
    labels = rng.integers(0, K + 1, size=n)  # label K means "in no set"
    return np.array([labels == i for i in range(K)])


X4 = FunctionFamily.from_sets(4, [[0, 1]])


# factors


def test_factor_examples():
    assert build_factor(FunctionFamily.from_sets(5, [])).num_atoms == 1
    B = build_factor(X4)
    assert sorted(map(tuple, (B.members(a) for a in range(B.num_atoms)))) == [(0, 1), (2, 3)]
    nested = FunctionFamily.from_sets(6, [[0, 1], [0, 1, 2, 3]])
    assert build_factor(nested).num_atoms == 3


def test_factor_size_cap():
    fam = FunctionFamily.from_sets(30, [[i] for i in range(25)])
    with pytest.raises(ValueError):
        build_factor(fam)


@given(families())
def test_atoms_partition_and_generators_are_constant(fam):
    B = build_factor(fam)
    assert B.num_atoms <= 2 ** len(fam)
    assert B.atom_sizes.sum() == fam.n
    for a in range(B.num_atoms):
        members = B.members(a)
        assert members.size == B.atom_sizes[a] > 0
        block = fam.indicators[:, members]
        assert (block == block[:, :1]).all()
        assert np.array_equal(block[:, 0], B.atom_values[:, a].astype(bool))


# conditional averages and signatures


def test_conditional_average_examples():
    B = build_factor(X4)
    f = conditional_average([0, 2], B)
    assert np.allclose(f.on_ground_set(), 0.5)
    measurable = np.array([0.2, 0.2, 0.9, 0.9])
    assert np.allclose(conditional_average(measurable, B).on_ground_set(), measurable)


@given(families(), st.integers(0, 10_000))
def test_conditional_average_preserves_inner_products(fam, seed):
    rng = np.random.default_rng(seed)
    B = build_factor(fam)
    f = rng.random(fam.n)
    h = MeasurableFunction(B, rng.random(B.num_atoms)).on_ground_set()
    avg = conditional_average(f, B).on_ground_set()
    assert h @ f == pytest.approx(h @ avg)
    assert avg.mean() == pytest.approx(f.mean())


def test_signature_examples():
    assert np.array_equal(signature_of([], X4), [0, 0])
    assert signature_of(range(4), X4)[0] == 1
    assert np.allclose(signature_of([0, 2], X4), [0.5, 0.25])


def test_family_distance_examples():
    assert family_distance([0, 1], [0, 1], X4) == 0
    trivial = FunctionFamily.from_sets(4, [])
    assert family_distance([0], [0, 1, 2], trivial) == pytest.approx(0.5)


@given(families(), st.integers(0, 10_000))
def test_family_distance_below_factor_distance(fam, seed):
    rng = np.random.default_rng(seed)
    f1, f2 = rng.random(fam.n), rng.random(fam.n)
    assert family_distance(f1, f2, fam) <= factor_distance(f1, f2, build_factor(fam)) + 1e-12


# LP


def test_lp_examples():
    assert find_feasible_point(np.zeros((0, 3)), np.zeros(0)).tolist() == [0, 0, 0]
    x = find_feasible_point(np.array([[-1.0, -1.0], [1.0, 0.0]]), np.array([-1.0, 0.25]))
    assert x is not None and x.sum() >= 1 - 1e-9 and x[0] <= 0.25 + 1e-9
    assert find_feasible_point(np.array([[1.0], [-1.0]]), np.array([1.0, -2.0])) is None


def test_lp_size_cap():
    with pytest.raises(LPTooLarge):
        find_feasible_point(np.ones((100, 100)), np.ones(100), size_cap=1000)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 100_000))
def test_lp_feasibility_matches_scipy(m, nx, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, size=(m, nx)).astype(float)
    b = rng.integers(-4, 5, size=m).astype(float)
    ours = find_feasible_point(A, b)
    ref = linprog(np.zeros(nx), A_ub=A, b_ub=b, bounds=[(0, None)] * nx, method="highs")
    assert (ours is not None) == (ref.status == 0)
    if ours is not None:
        assert (ours >= -1e-9).all()
        assert (A @ ours <= b + 1e-7).all()


def test_lp_degenerate_system_terminates():
    # many redundant copies of the same constraints invite cycling
    A = np.vstack([np.eye(4), -np.eye(4)] * 6)
    b = np.concatenate([np.full(4, 0.5), np.full(4, -0.5)] * 6)
    x = find_feasible_point(A, b)
    assert np.allclose(x, 0.5, atol=1e-8)


# realizability and nets


def test_realize_examples():
    trivial = FunctionFamily.from_sets(4, [])
    B = build_factor(trivial)
    zero = realize_signature(np.zeros((1, 1)), B, 0.0)
    assert zero is not None and np.allclose(zero, 0)
    assert realize_signature(np.array([[0.9], [0.9]]), B, 0.05) is None


@given(families(8, 3), st.integers(1, 3), st.integers(0, 10_000))
def test_signatures_of_disjoint_sets_are_realizable(fam, K, seed):
    B = build_factor(fam)
    sets = disjoint_sets(fam.n, K, np.random.default_rng(seed))
    sigma = np.array([signature_of(s, fam) for s in sets])
    fbar = realize_signature(sigma, B, 0.0)
    assert fbar is not None
    assert (fbar.sum(axis=0) <= 1 + 1e-7).all()
    achieved = np.array([signature_of(MeasurableFunction(B, fbar[i]).on_ground_set(), fam) for i in range(K)])
    assert np.abs(achieved - sigma).max() <= 1e-7


def test_grid_values():
    assert np.allclose(grid_values(0.25), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(grid_values(1), [0, 1])
    with pytest.raises(ValueError):
        grid_values(0)


def test_net_at_eta_one_yields_zero_point():
    fam = FunctionFamily.from_sets(4, [[0, 1]])
    points = [s for s, _ in enumerate_net(fam, 2, 1.0)]
    assert any(not p.any() for p in points)
    assert len(points) <= net_size_bound(len(fam), 2, 1.0)


def test_net_cap_is_enforced():
    fam = FunctionFamily.from_sets(8, [[0, 1], [2, 3], [4, 5]])
    with pytest.raises(NetTooLarge, match="smaller K"):
        next(enumerate_net(fam, 3, 0.1, cap=1000))


@given(families(6, 2), st.integers(1, 2), st.sampled_from([0.5, 0.25]), st.integers(0, 10_000))
def test_net_points_are_realizable_and_cover(fam, K, eta, seed):
    B = build_factor(fam)
    points = list(enumerate_net(fam, K, eta, factor=B))
    assert len(points) <= net_size_bound(len(fam), K, eta)
    for sigma, witness in points[:20]:
        assert realize_signature(sigma, B, eta) is not None
        assert (witness.sum(axis=0) <= 1 + 1e-7).all()
    sets = disjoint_sets(fam.n, K, np.random.default_rng(seed))
    planted = np.array([signature_of(s, fam) for s in sets])
    assert min(np.abs(sigma - planted).max() for sigma, _ in points) <= eta + 1e-9


def test_exact_lattice_net_contains_every_set_signature():
    n = 6
    fam = FunctionFamily.from_sets(n, [[0, 1, 2], [2, 3]])
    exact = {tuple(s.ravel()) for s, _ in enumerate_net(fam, 2, 1 / n, tolerance=1e-9, lattice=1 / n)}
    for labels in itertools.product(range(3), repeat=n):
        sets = [np.array(labels) == i for i in range(2)]
        sig = np.round(np.array([signature_of(s, fam) for s in sets]) * n) / n
        assert any(np.allclose(sig.ravel(), p) for p in exact)


def test_net_bounds_restrict_the_sweep():
    fam = FunctionFamily.from_sets(4, [[0, 1]])
    centre = np.array([[0.5, 0.25]])
    pts = [s for s, _ in enumerate_net(fam, 1, 0.25, tolerance=1e-9, bounds=(centre - 0.25, centre + 0.25))]
    assert pts and all(np.abs(p - centre).max() <= 0.25 + 1e-12 for p in pts)


# rounding


def test_rounding_examples():
    B = build_factor(FunctionFamily.from_sets(4, []))
    assert round_to_sets(np.array([[0.5]]), B)[0].sum() == 2
    B2 = build_factor(X4)
    sets = round_to_sets(np.array([[1.0, 0.0], [0.0, 1.0]]), B2)
    assert sets.tolist() == [[True, True, False, False], [False, False, True, True]] or sets.tolist() == [
        [False, False, True, True],
        [True, True, False, False],
    ]


@given(families(10, 3), st.integers(1, 3), st.integers(0, 10_000))
def test_rounding_is_disjoint_and_close(fam, K, seed):
    B = build_factor(fam)
    rng = np.random.default_rng(seed)
    raw = rng.random((K + 1, B.num_atoms))
    fbar = (raw / raw.sum(axis=0))[:K]
    sets = round_to_sets(fbar, B)
    assert (sets.sum(axis=0) <= 1).all()
    for i in range(K):
        for a in range(B.num_atoms):
            want = B.atom_sizes[a] * fbar[i, a]
            got = sets[i, B.members(a)].sum()
            assert want - 1 < got <= want + 1e-9
        f = MeasurableFunction(B, fbar[i]).on_ground_set()
        assert factor_distance(f, sets[i], B) <= B.num_atoms / fam.n + 1e-12
