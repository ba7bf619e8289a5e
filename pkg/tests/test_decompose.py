import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brauer import decompose as dc
from brauer.tensor3 import RankOneTriple, outer3, random_orthogonal, random_unit_rank1

seeds = st.integers(0, 2**32 - 1)


def jacobi_top_singular(M, sweeps=60):
    """Largest singular value and its left vector by one-sided Jacobi rotations."""
    A = np.array(M, dtype=float).T.copy()  # rotate columns of M^T = rows of M
    n = A.shape[1]
    V = np.eye(n)
    for _ in range(sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = A[:, i] @ A[:, i]
                beta = A[:, j] @ A[:, j]
                gamma = A[:, i] @ A[:, j]
                off = max(off, abs(gamma) / np.sqrt(alpha * beta + 1e-300))
                if gamma == 0.0:
                    continue
                zeta = (beta - alpha) / (2 * gamma)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1 + zeta * zeta)) if zeta != 0 else 1.0
                c = 1 / np.sqrt(1 + t * t)
                s = c * t
                Ai, Aj = A[:, i].copy(), A[:, j].copy()
                A[:, i], A[:, j] = c * Ai - s * Aj, s * Ai + c * Aj
                Vi, Vj = V[:, i].copy(), V[:, j].copy()
                V[:, i], V[:, j] = c * Vi - s * Vj, s * Vi + c * Vj
        if off < 1e-15:
            break
    norms_ = np.linalg.norm(A, axis=0)
    k = int(np.argmax(norms_))
    return norms_[k], V[:, k]


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_top_singular_triple_against_jacobi(seed):
    M = np.random.default_rng(seed).standard_normal((4, 7))
    sigma, u, v = dc.top_singular_triple(M)
    s_ref, u_ref = jacobi_top_singular(M)
    assert sigma == pytest.approx(s_ref, rel=1e-10)
    assert abs(u @ u_ref) == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(M @ v, sigma * u, atol=1e-10)
    assert u[np.flatnonzero(u)[0]] > 0


def test_top_singular_triple_rejects_zero():
    with pytest.raises(ValueError):
        dc.top_singular_triple(np.zeros((3, 3)))


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(0.1, 10))
def test_quick_rank1_exact_rank_one(seed, weight):
    t = random_unit_rank1((3, 4, 5), np.random.default_rng(seed))
    est = dc.quick_rank1(weight * t.to_tensor())
    assert est.weight == pytest.approx(weight, rel=1e-10)
    assert dc.rank1_fit(t, est) == pytest.approx(1.0, abs=1e-10)


def test_quick_rank1_orthogonal_pair():
    e1, e2 = np.eye(2)
    est = dc.quick_rank1(outer3(e1, e1, e1) + 0.5 * outer3(e2, e2, e2))
    assert est.weight == pytest.approx(1.0, rel=1e-12)
    for v in (est.a, est.b, est.c):
        assert abs(v[0]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rank", [1, 2])
def test_als_fit_is_monotone(rank):
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        T = rng.standard_normal((3, 4, 5))
        _, report = dc.cp_als(T, rank, dc.CPModel.random(T.shape, rank, rng), tol=0.0, max_iter=15)
        worst = min(worst, float(np.min(np.diff(report.fit_history))))
    assert worst >= -1e-10


def test_als_recovers_exact_rank_one(rng):
    t = random_unit_rank1((4, 5, 6), rng)
    T = 3.0 * t.to_tensor()
    model, report = dc.cp_als(T, 1, dc.CPModel.random(T.shape, 1, rng), tol=1e-12, max_iter=3)
    assert report.final_fit >= 1 - 1e-10
    assert report.iterations <= 3


def test_als_runs_at_least_two_sweeps(rng):
    T = random_unit_rank1((3, 3, 3), rng).to_tensor()
    _, report = dc.cp_als(T, 1, dc.amplified_init(T, 1), tol=1.0)
    assert report.iterations == 2


def test_als_fit_matches_reconstruction(rng):
    T = rng.standard_normal((3, 4, 5))
    model, report = dc.cp_als(T, 2, dc.CPModel.random(T.shape, 2, rng), max_iter=10)
    direct = 1 - np.linalg.norm(T - model.reconstruct()) / np.linalg.norm(T)
    assert report.final_fit == pytest.approx(direct, abs=1e-10)


def test_als_ignores_mode_one_factor(rng):
    T = rng.standard_normal((3, 4, 5))
    init = dc.CPModel.random(T.shape, 2, rng)
    other = dc.CPModel(init.weights, [dc.CPModel.random(T.shape, 2, rng).factors[0]] + init.factors[1:])
    a, _ = dc.cp_als(T, 2, init, max_iter=5)
    b, _ = dc.cp_als(T, 2, other, max_iter=5)
    np.testing.assert_allclose(a.reconstruct(), b.reconstruct(), atol=1e-12)


def test_als_rejects_mismatched_init(rng):
    with pytest.raises(ValueError):
        dc.cp_als(np.ones((2, 2, 2)), 2, dc.CPModel.random((2, 2, 2), 1, rng))


@pytest.mark.parametrize("kind", ["identity", "sigma4", "sharp"])
def test_deflation_recovers_orthogonal_rank_two(kind, rng):
    Q = [random_orthogonal(n, rng)[:, :2] for n in (4, 5, 6)]
    T = sum(w * outer3(Q[0][:, i], Q[1][:, i], Q[2][:, i]) for i, w in enumerate((2.0, 1.0)))
    model = dc.amplified_init(T, 2, kind)
    assert np.linalg.norm(T - model.reconstruct()) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_deflation_residual_non_increasing(seed):
    T = np.random.default_rng(seed).standard_normal((3, 4, 5))
    resid = [np.linalg.norm(T - dc.amplified_init(T, s).reconstruct()) for s in (1, 2, 3)]
    assert resid[1] <= resid[0] * (1 + 1e-12) and resid[2] <= resid[1] * (1 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(seeds, st.floats(0.1, 10))
def test_als_scale_equivariance(seed, scale):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((3, 4, 5))
    init = dc.amplified_init(T, 2)
    a, ra = dc.cp_als(T, 2, init, max_iter=5, tol=0.0)
    b, rb = dc.cp_als(scale * T, 2, init, max_iter=5, tol=0.0)
    np.testing.assert_allclose(b.reconstruct(), scale * a.reconstruct(), rtol=1e-8, atol=1e-9)
    assert rb.final_fit == pytest.approx(ra.final_fit, abs=1e-9)


def test_fit_definitions(rng):
    t = random_unit_rank1((3, 4, 5), rng)
    flipped = RankOneTriple(2.0, -t.a, t.b, t.c)
    assert dc.rank1_fit(t, flipped) == pytest.approx(1.0)
    model = dc.CPModel.from_triples([t])
    S = model.reconstruct()
    assert dc.rankr_fit(S, model) == pytest.approx(np.linalg.norm(S))
    T = rng.standard_normal((3, 4, 5))
    two = dc.amplified_init(T, 2)
    assert dc.rankr_fit(T, two) == pytest.approx(
        np.sum(T * two.reconstruct()) / np.linalg.norm(two.reconstruct()), rel=1e-12)


def test_model_norm_and_validation(rng):
    model = dc.CPModel.random((3, 4, 5), 3, rng)
    assert model.norm() == pytest.approx(np.linalg.norm(model.reconstruct()), rel=1e-12)
    with pytest.raises(ValueError):
        dc.CPModel([1.0], [np.ones((2, 1))] * 3)
    with pytest.raises(ValueError):
        dc.best_rank1(model)
