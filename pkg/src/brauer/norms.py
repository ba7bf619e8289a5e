"""Degree-4 orthogonal invariants and the spectral-norm surrogates built from them.

The five connected-or-not degree-4 colored diagrams that matter here are

* ``frob4``  -- two disjoint triple edges, equal to ``||T||**4``;
* ``frame1..3`` -- the red, green and blue frames, ``trace((M M^T)^2)`` for the
  mode-k flattening ``M``;
* ``tetra``  -- the tetrahedron ``sum t_ace t_adf t_bde t_bcf``.

Both norms are fourth roots of non-negative combinations of these:

    sigma4(T)**4 = (3 frob4 + 6 (frame1 + frame2 + frame3) + 6 tetra) / 27
    sharp(T)**4  = (frame1 + frame2 + frame3 + 2 tetra) / 5
"""

from dataclasses import astuple, dataclass

import numpy as np

from .tensor3 import as_tensor3, flatten, inner

DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class DegreeFourInvariants:
    frob4: float
    frame1: float
    frame2: float
    frame3: float
    tetra: float

    @property
    def frames(self):
        return (self.frame1, self.frame2, self.frame3)

    def as_dict(self):
        return {"frob4": self.frob4, "frame1": self.frame1, "frame2": self.frame2,
                "frame3": self.frame3, "tetra": self.tetra}

    def __iter__(self):
        return iter(astuple(self))


def frame(T, mode):
    """Frame invariant of ``mode``: squared Frobenius norm of ``M M^T``."""
    M = flatten(T, mode)
    A = M @ M.T
    return float(np.sum(A * A))


def _tetra_axes(shape):
    # Contract the largest mode first so the four-index intermediate is built
    # from the two smaller dimensions.
    big = int(np.argmax(shape))
    return {0: (1, 2, 0), 1: (0, 2, 1), 2: (0, 1, 2)}[big]


def tetrahedron(T, budget=DEFAULT_BUDGET):
    """The tetrahedron invariant ``sum_{abcdef} t_ace t_adf t_bde t_bcf``.

    The diagram is symmetric under permuting colors, so the tensor is
    transposed to put its largest mode last; that mode is contracted into
    ``U[a, b, c, d] = sum_e t_ace t_bde`` of size ``p^2 q^2`` (for the
    transposed dims) and the result is ``sum U[a,b,c,d] U[a,b,d,c]``.
    """
    T = np.transpose(as_tensor3(T), _tetra_axes(as_tensor3(T).shape))
    p, q, _ = T.shape
    if p * p * q * q > budget:
        raise MemoryError(f"tetrahedron intermediate of {p*p*q*q} entries exceeds budget {budget}")
    U = np.einsum("ace,bde->abcd", T, T, optimize=True)
    return float(np.sum(U * np.swapaxes(U, 2, 3)))


def invariants(T):
    T = as_tensor3(T)
    n2 = inner(T, T)
    return DegreeFourInvariants(n2 * n2, frame(T, 1), frame(T, 2), frame(T, 3), tetrahedron(T))


def _root4(x):
    return float(max(x, 0.0) ** 0.25)


def sigma4_pow4(inv):
    return (3 * inv.frob4 + 6 * sum(inv.frames) + 6 * inv.tetra) / 27


def sharp_pow4(inv):
    return (sum(inv.frames) + 2 * inv.tetra) / 5


def norms_from_invariants(inv):
    """``(sigma4, sharp)`` from already computed invariants."""
    return _root4(sigma4_pow4(inv)), _root4(sharp_pow4(inv))


def sigma4(T):
    """Degree-4 average of ``|T . x(x)y(x)z|`` over the sphere, normalized on unit rank-1."""
    return _root4(sigma4_pow4(invariants(T)))


def sharp(T):
    """The sharper degree-4 spectral-like norm ``((sum frames + 2 tetra) / 5) ** 1/4``."""
    return _root4(sharp_pow4(invariants(T)))


def expected_sigma4_pow4(p, q, r):
    """Mean of ``sigma4(T)**4`` for ``T`` uniform on the unit sphere of R^{p x q x r}."""
    _check_dims(p, q, r)
    return (p * q * r + 2 * (p * q + p * r + q * r) + 4 * (p + q + r) + 8) / (9 * (p * q * r + 2))


def expected_sharp_pow4(p, q, r):
    """Mean of ``sharp(T)**4`` for ``T`` uniform on the unit sphere of R^{p x q x r}."""
    _check_dims(p, q, r)
    return ((p * q + p * r + q * r) + 3 * (p + q + r) + 3) / (5 * (p * q * r + 2))


def _check_dims(*dims):
    if any(int(n) != n or n < 1 for n in dims):
        raise ValueError(f"dimensions must be positive integers, got {dims}")


def batch_invariants(Ts):
    """Invariants of a stack of tensors with shape ``(n, p, q, r)``.

    Returns an ``(n, 5)`` array with columns frob4, frame1, frame2, frame3, tetra.
    Used by the Monte-Carlo routines; per-tensor results agree with
    :func:`invariants`.
    """
    Ts = np.asarray(Ts, dtype=np.float64)
    n, p, q, r = Ts.shape
    out = np.empty((n, 5))
    n2 = np.einsum("nijk,nijk->n", Ts, Ts)
    out[:, 0] = n2 * n2
    for col, subscripts in ((1, "nijk,nljk->nil"), (2, "nijk,nilk->njl"), (3, "nijk,nijl->nkl")):
        A = np.einsum(subscripts, Ts, Ts, optimize=True)
        out[:, col] = np.einsum("nab,nab->n", A, A)
    U = np.einsum("nace,nbde->nabcd", Ts, Ts, optimize=True)
    out[:, 4] = np.einsum("nabcd,nabdc->n", U, U)
    return out


def sphere_moments(dims, samples, rng, chunk=20000):
    """Monte-Carlo mean and standard error of ``sigma4**4`` and ``sharp**4``.

    Draws ``samples`` tensors uniformly from the unit sphere of R^dims.
    Returns ``{"sigma4": (mean, stderr), "sharp": (mean, stderr)}``.
    """
    sig, shp = [], []
    left = samples
    while left > 0:
        m = min(chunk, left)
        Ts = rng.standard_normal((m,) + tuple(dims))
        Ts /= np.sqrt(np.einsum("nijk,nijk->n", Ts, Ts))[:, None, None, None]
        inv = batch_invariants(Ts)
        frames = inv[:, 1:4].sum(axis=1)
        sig.append((3 * inv[:, 0] + 6 * frames + 6 * inv[:, 4]) / 27)
        shp.append((frames + 2 * inv[:, 4]) / 5)
        left -= m
    result = {}
    for name, vals in (("sigma4", np.concatenate(sig)), ("sharp", np.concatenate(shp))):
        result[name] = (float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(vals.size)))
    return result


def spectral_lower_bound(T, starts, rng, tol=1e-12, max_iter=500):
    """Lower bound on the spectral norm from multi-start rank-1 power iterations.

    Each start runs the alternating update ``a <- T(., b, c)`` etc. from a
    random point (the first start uses the dominant mode-1 singular pair
    reshaped, which is usually already close). The best ``|T . a(x)b(x)c|``
    over all starts is returned; it never exceeds the true spectral norm.
    """
    T = as_tensor3(T)
    if starts < 1:
        raise ValueError("starts must be >= 1")
    p, q, r = T.shape
    best = 0.0
    for s in range(starts):
        if s == 0:
            u, _, vt = np.linalg.svd(flatten(T, 1), full_matrices=False)
            D = vt[0].reshape((q, r), order="F")
            ub, _, vbt = np.linalg.svd(D)
            a, b, c = u[:, 0], ub[:, 0], vbt[0]
        else:
            a, b, c = (rng.standard_normal(n) for n in (p, q, r))
            b /= np.linalg.norm(b)
            c /= np.linalg.norm(c)
        val = 0.0
        for _ in range(max_iter):
            a = np.einsum("ijk,j,k->i", T, b, c)
            a /= np.linalg.norm(a) or 1.0
            b = np.einsum("ijk,i,k->j", T, a, c)
            b /= np.linalg.norm(b) or 1.0
            c = np.einsum("ijk,i,j->k", T, a, b)
            new = float(np.linalg.norm(c))
            c /= new or 1.0
            if abs(new - val) <= tol * max(new, 1.0):
                val = new
                break
            val = new
        best = max(best, abs(float(np.einsum("ijk,i,j,k->", T, a, b, c))))
    return best
