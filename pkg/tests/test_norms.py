import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brauer import norms
from brauer.tensor3 import outer3, random_unit_rank1

from conftest import loop_frame, loop_tetra, orthogonal_action

seeds = st.integers(0, 2**32 - 1)
small_dims = st.tuples(*[st.integers(1, 4)] * 3)


def test_frames_and_tetra_against_loops(rng):
    T = rng.standard_normal((2, 3, 4))
    for k in (1, 2, 3):
        assert norms.frame(T, k) == pytest.approx(loop_frame(T, k), rel=1e-12)
    assert norms.tetrahedron(T) == pytest.approx(loop_tetra(T), rel=1e-12)


@pytest.mark.parametrize("shape", [(5, 2, 3), (2, 5, 3), (2, 3, 5)])
def test_tetra_independent_of_which_mode_is_largest(shape, rng):
    T = rng.standard_normal(shape)
    assert norms.tetrahedron(T) == pytest.approx(loop_tetra(T), rel=1e-12)


def test_frames_permute_with_modes(rng):
    T = rng.standard_normal((2, 3, 4))
    S = np.transpose(T, (1, 2, 0))
    assert norms.frame(S, 1) == pytest.approx(norms.frame(T, 2), rel=1e-13)
    assert norms.frame(S, 2) == pytest.approx(norms.frame(T, 3), rel=1e-13)
    assert norms.frame(S, 3) == pytest.approx(norms.frame(T, 1), rel=1e-13)
    assert norms.tetrahedron(S) == pytest.approx(norms.tetrahedron(T), rel=1e-13)


def test_expected_values_small_case():
    assert Fraction(norms.expected_sigma4_pow4(2, 2, 2)).limit_denominator(1000) == Fraction(64, 90)
    assert Fraction(norms.expected_sharp_pow4(2, 2, 2)).limit_denominator(1000) == Fraction(33, 50)
    with pytest.raises(ValueError):
        norms.expected_sharp_pow4(0, 2, 2)


def test_expected_values_are_one_for_vectors():
    # a 1x1xn tensor is rank one, so both norms are 1 on the sphere
    for n in (1, 3, 7):
        assert norms.expected_sigma4_pow4(1, 1, n) == pytest.approx(1.0, rel=1e-14)
        assert norms.expected_sharp_pow4(1, 1, n) == pytest.approx(1.0, rel=1e-14)


def test_sphere_moments_small(rng):
    est = norms.sphere_moments((2, 2, 3), 40000, rng)
    for name, fn in (("sigma4", norms.expected_sigma4_pow4), ("sharp", norms.expected_sharp_pow4)):
        mean, se = est[name]
        assert abs(mean - fn(2, 2, 3)) < 4 * se


def test_batch_matches_single(rng):
    Ts = rng.standard_normal((5, 2, 3, 4))
    batch = norms.batch_invariants(Ts)
    for row, T in zip(batch, Ts):
        np.testing.assert_allclose(row, list(norms.invariants(T)), rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_orthogonal_invariance(seed):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((3, 4, 2))
    S, _ = orthogonal_action(T, rng)
    np.testing.assert_allclose(list(norms.invariants(S)), list(norms.invariants(T)), rtol=1e-10)


@settings(max_examples=25, deadline=None)
@given(small_dims, seeds)
def test_unit_rank_one_normalization(dims, seed):
    t = random_unit_rank1(dims, np.random.default_rng(seed))
    T = t.to_tensor()
    assert norms.sigma4(T) == pytest.approx(1.0, abs=1e-12)
    assert norms.sharp(T) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(small_dims, seeds, st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3))
def test_homogeneity(dims, seed, scale):
    T = np.random.default_rng(seed).standard_normal(dims)
    for f in (norms.sigma4, norms.sharp):
        assert f(scale * T) == pytest.approx(abs(scale) * f(T), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(small_dims, seeds)
def test_triangle_inequality(dims, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal(dims), rng.standard_normal(dims)
    for f in (norms.sigma4, norms.sharp):
        assert f(A + B) <= (f(A) + f(B)) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(small_dims, seeds)
def test_norm_sandwich(dims, seed):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal(dims)
    lower = norms.spectral_lower_bound(T, 3, rng)
    tol = 1 + 1e-12
    assert lower <= norms.sharp(T) * tol
    assert norms.sharp(T) <= norms.sigma4(T) * tol
    assert norms.sigma4(T) <= np.linalg.norm(T) * tol


def test_spectral_lower_bound_against_grid():
    e1, e2 = np.eye(2)
    T = outer3(e1, e1, e1) + 0.5 * outer3(e2, e2, e2) + 0.3 * outer3(e1, e2, e2)
    angles = np.deg2rad(np.arange(0, 180, 1.0))
    U = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    grid = np.abs(np.einsum("ijk,ai,bj,ck->abc", T, U, U, U)).max()
    lower = norms.spectral_lower_bound(T, 5, np.random.default_rng(0))
    assert lower >= grid - 1e-12
    # a 1 degree grid is within 3 * (pi/360)^2 / 2 of the maximum in relative terms
    assert lower <= grid * (1 + 3e-4)


def test_spectral_lower_bound_rejects_zero_starts(rng):
    with pytest.raises(ValueError):
        norms.spectral_lower_bound(np.ones((2, 2, 2)), 0, rng)


def test_norms_from_invariants(rng):
    T = rng.standard_normal((2, 3, 4))
    assert norms.norms_from_invariants(norms.invariants(T)) == (norms.sigma4(T), norms.sharp(T))
