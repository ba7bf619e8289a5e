"""Dense 3-way tensor arithmetic.

Tensors are plain ``numpy.ndarray`` objects of shape ``(p, q, r)`` and dtype
float64. Whenever a tensor is linearized (flattenings, files) the mode-1 index
runs fastest, i.e. entry ``(i, j, k)`` sits at position ``i + p*j + p*q*k``
(Fortran order).

Flattenings follow the same convention: the mode-``k`` flattening has the
mode-``k`` fibers as rows and orders the columns by the two remaining indices
with the lower mode running fastest::

    flatten(T, 1)[i, j + q*k] = T[i, j, k]
    flatten(T, 2)[j, i + p*k] = T[i, j, k]
    flatten(T, 3)[k, i + p*j] = T[i, j, k]

so ``flatten(outer3(a, b, c), 1) == outer(a, kron(c, b))`` and a length ``q*r``
vector reshapes to a ``q x r`` matrix with ``reshape((q, r), order="F")``.
"""

from dataclasses import dataclass

import numpy as np

MODES = (1, 2, 3)


def as_tensor3(T):
    """Return ``T`` as a float64 array of shape (p, q, r), validating it."""
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 3 or min(T.shape) < 1:
        raise ValueError(f"expected a non-empty 3-way array, got shape {T.shape}")
    return T


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode - 1


def _check_same_dims(T, S):
    if T.shape != S.shape:
        raise ValueError(f"dimension mismatch: {T.shape} vs {S.shape}")


@dataclass(frozen=True)
class RankOneTriple:
    """A weighted rank-1 term ``weight * a (x) b (x) c`` with unit a, b, c."""

    weight: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.ndim != 1:
                raise ValueError(f"{name} must be a vector")
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"{name} must have unit norm, got {np.linalg.norm(v)}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def dims(self):
        return (self.a.size, self.b.size, self.c.size)

    def unit_tensor(self):
        return outer3(self.a, self.b, self.c)

    def to_tensor(self):
        return self.weight * self.unit_tensor()


def inner(T, S):
    """Sum of the entrywise products of two same-size tensors."""
    T, S = as_tensor3(T), as_tensor3(S)
    _check_same_dims(T, S)
    return float(np.dot(T.ravel(), S.ravel()))


def frobenius(T):
    """Euclidean (Frobenius) norm. Also serves as the degree-2 spectral-like norm."""
    return float(np.linalg.norm(as_tensor3(T).ravel()))


def outer3(a, b, c):
    a, b, c = (np.asarray(v, dtype=np.float64).ravel() for v in (a, b, c))
    if min(a.size, b.size, c.size) < 1:
        raise ValueError("outer3 needs non-empty vectors")
    return a[:, None, None] * b[None, :, None] * c[None, None, :]


# Axis order that brings mode k to the front with the remaining modes kept in
# increasing order; Fortran reshape then makes the lower remaining mode fastest.
_FRONT = {0: (0, 1, 2), 1: (1, 0, 2), 2: (2, 0, 1)}


def flatten(T, mode):
    """Mode-``mode`` unfolding as a ``dims[mode-1] x (product of the rest)`` matrix."""
    T = as_tensor3(T)
    k = _check_mode(mode)
    return np.reshape(np.transpose(T, _FRONT[k]), (T.shape[k], -1), order="F")


def fold(M, mode, dims):
    """Inverse of :func:`flatten`."""
    k = _check_mode(mode)
    M = np.asarray(M, dtype=np.float64)
    dims = tuple(int(n) for n in dims)
    if len(dims) != 3:
        raise ValueError("dims must have three entries")
    perm = _FRONT[k]
    shape = tuple(dims[i] for i in perm)
    if M.shape != (shape[0], shape[1] * shape[2]):
        raise ValueError(f"matrix of shape {M.shape} cannot fold to {dims} along mode {mode}")
    return np.transpose(np.reshape(M, shape, order="F"), np.argsort(perm))


def mode_product(T, A, mode):
    """Apply the matrix ``A`` to mode ``mode`` of ``T``."""
    T = as_tensor3(T)
    k = _check_mode(mode)
    return fold(A @ flatten(T, mode), mode, T.shape[:k] + (A.shape[0],) + T.shape[k + 1:])


def multilinear(T, A, B, C):
    """The action ``(A, B, C) . T`` of one matrix per mode."""
    return np.einsum("ijk,ai,bj,ck->abc", as_tensor3(T), A, B, C, optimize=True)


def linear_combine(terms):
    """Entrywise sum of ``coefficient * tensor`` over ``terms``."""
    terms = list(terms)
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    out = None
    for coefficient, T in terms:
        T = as_tensor3(T)
        if out is None:
            out = np.zeros_like(T)
        _check_same_dims(out, T)
        out = out + coefficient * T
    return out


def random_unit_vector(n, rng):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_unit_tensor(dims, rng):
    """Uniform sample from the unit sphere of R^{p x q x r}."""
    T = rng.standard_normal(tuple(dims))
    return T / np.linalg.norm(T.ravel())


def random_unit_rank1(dims, rng):
    p, q, r = dims
    return RankOneTriple(1.0, random_unit_vector(p, rng), random_unit_vector(q, rng),
                         random_unit_vector(r, rng))


def random_orthogonal(n, rng):
    """Haar-distributed orthogonal matrix (QR of a Gaussian with sign-fixed R)."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)
