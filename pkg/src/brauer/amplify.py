"""Low-rank amplification maps.

Each map is the gradient of the fourth power of a spectral-like norm, written
out from the open-vertex diagrams rather than obtained by autodiff. All of them
are cubic, equivariant under per-mode orthogonal actions, and send a unit
rank-1 tensor ``T`` to ``4 T``.
"""

from enum import Enum

import numpy as np

from .norms import DEFAULT_BUDGET
from .tensor3 import as_tensor3, flatten, fold


class AmplifierKind(Enum):
    """Selector for the tensor fed to Quick Rank 1 (0, 1, 2 in the deflation loop)."""

    IDENTITY = "identity"
    SIGMA4 = "sigma4"
    SHARP = "sharp"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return list(cls)[value]
        return cls(str(value).lower())


def frame_gradient(T, mode):
    """``fold(M M^T M)`` for the mode-``mode`` flattening ``M``; a quarter of the frame's gradient."""
    T = as_tensor3(T)
    M = flatten(T, mode)
    return fold((M @ M.T) @ M, mode, T.shape)


def tetra_gradient(T, budget=DEFAULT_BUDGET):
    """Tetrahedron with one vertex opened up.

    ``G[b, c, f] = sum_{a,d,e} T[a,c,e] T[a,d,f] T[b,d,e]``, so that the
    gradient of :func:`brauer.norms.tetrahedron` is ``4 G``. The first pairwise
    contraction is the one with the smallest four-index intermediate.
    """
    T = as_tensor3(T)
    p, q, r = T.shape
    sizes = {"a": q * q * r * r, "e": p * p * q * q, "d": p * p * r * r}
    first = min(sizes, key=lambda k: (sizes[k], k))
    if sizes[first] > budget:
        raise MemoryError(f"tetra_gradient intermediate of {sizes[first]} entries exceeds budget {budget}")
    if first == "a":
        W = np.einsum("ace,adf->cedf", T, T, optimize=True)
        return np.einsum("bde,cedf->bcf", T, W, optimize=True)
    if first == "e":
        W = np.einsum("ace,bde->acbd", T, T, optimize=True)
        return np.einsum("adf,acbd->bcf", T, W, optimize=True)
    W = np.einsum("adf,bde->afbe", T, T, optimize=True)
    return np.einsum("ace,afbe->bcf", T, W, optimize=True)


def phi_sharp(T):
    """Gradient of ``sharp(T)**4``."""
    T = as_tensor3(T)
    frames = sum(frame_gradient(T, k) for k in (1, 2, 3))
    return 0.8 * (frames + 2.0 * tetra_gradient(T))


def phi_sigma4(T):
    """Gradient of ``sigma4(T)**4``."""
    T = as_tensor3(T)
    n2 = float(np.dot(T.ravel(), T.ravel()))
    frames = sum(frame_gradient(T, k) for k in (1, 2, 3))
    return (4.0 / 9.0) * (n2 * T + 2.0 * frames + 2.0 * tetra_gradient(T))


def matrix_theta(A):
    """``A A^T A`` rescaled to unit Frobenius norm; cubes the singular values."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("matrix_theta expects a matrix")
    B = (A @ A.T) @ A
    nrm = np.linalg.norm(B)
    if nrm == 0.0:
        raise ValueError("matrix_theta is undefined for the zero matrix")
    return B / nrm


def amplify(T, kind):
    kind = AmplifierKind.parse(kind)
    if kind is AmplifierKind.IDENTITY:
        return as_tensor3(T)
    if kind is AmplifierKind.SIGMA4:
        return phi_sigma4(T)
    return phi_sharp(T)
