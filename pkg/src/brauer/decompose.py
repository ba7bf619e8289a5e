"""Rank-1 and rank-r CP machinery: Quick Rank 1, CP-ALS, amplified deflation."""

import time
from dataclasses import dataclass, field

import numpy as np

from .amplify import AmplifierKind, amplify
from .tensor3 import RankOneTriple, as_tensor3, flatten, frobenius, inner, outer3


@dataclass
class CPModel:
    """``sum_i weights[i] * U1[:, i] (x) U2[:, i] (x) U3[:, i]`` with unit columns."""

    weights: np.ndarray
    factors: list

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).ravel()
        self.factors = [np.asarray(U, dtype=np.float64).reshape(len(U), -1) for U in self.factors]
        if len(self.factors) != 3:
            raise ValueError("a CPModel needs three factor matrices")
        for U in self.factors:
            if U.shape[1] != self.rank:
                raise ValueError("factor column count must equal the number of weights")
            if not np.allclose(np.linalg.norm(U, axis=0), 1.0, atol=1e-10, rtol=0):
                raise ValueError("factor columns must have unit norm")

    @property
    def rank(self):
        return self.weights.size

    @property
    def dims(self):
        return tuple(U.shape[0] for U in self.factors)

    def term(self, i):
        return RankOneTriple(self.weights[i], *(U[:, i] for U in self.factors))

    def reconstruct(self):
        U1, U2, U3 = self.factors
        return np.einsum("r,ir,jr,kr->ijk", self.weights, U1, U2, U3, optimize=True)

    def norm(self):
        G = np.ones((self.rank, self.rank))
        for U in self.factors:
            G *= U.T @ U
        return float(np.sqrt(max(self.weights @ G @ self.weights, 0.0)))

    @classmethod
    def from_triples(cls, triples):
        triples = list(triples)
        return cls([t.weight for t in triples],
                   [np.column_stack([getattr(t, n) for t in triples]) for n in "abc"])

    @classmethod
    def random(cls, dims, rank, rng):
        """Uniform [0, 1) entries with normalized columns (the usual ALS default)."""
        factors = [rng.random((n, rank)) for n in dims]
        return cls(np.ones(rank), [U / np.linalg.norm(U, axis=0) for U in factors])

    def as_dict(self):
        return {"rank": self.rank, "weights": self.weights.tolist(),
                "factors": [U.tolist() for U in self.factors]}


@dataclass
class AlsReport:
    iterations: int
    final_fit: float
    fit_history: list = field(default_factory=list)
    wall_time: float = 0.0
    converged: bool = True

    def as_dict(self):
        return {"iterations": self.iterations, "final_fit": self.final_fit,
                "fit_history": list(self.fit_history), "wall_time": self.wall_time,
                "converged": self.converged}


def _sign_fix(u, v):
    nz = np.flatnonzero(np.abs(u) > 0)
    if nz.size and u[nz[0]] < 0:
        return -u, -v
    return u, v


def top_singular_triple(M):
    """Dominant singular value and unit vectors ``(sigma, u, v)`` of ``M``.

    ``u`` is sign-fixed so its first nonzero entry is positive.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.any(M):
        raise ValueError("the zero matrix has no dominant singular pair")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    u, v = _sign_fix(U[:, 0], Vt[0])
    return float(s[0]), u, v


def quick_rank1(T):
    """Rank-1 guess from two matrix SVDs.

    The dominant pair ``beta a d^T`` of the mode-1 flattening gives ``a``;
    ``d`` is reshaped to a ``q x r`` matrix whose dominant pair
    ``gamma b c^T`` gives ``b`` and ``c``. The weight is ``beta * gamma``.
    """
    T = as_tensor3(T)
    _, q, r = T.shape
    beta, a, d = top_singular_triple(flatten(T, 1))
    gamma, b, c = top_singular_triple(d.reshape((q, r), order="F"))
    return RankOneTriple(beta * gamma, a, b, c)


def _mttkrp(T, factors, mode):
    U1, U2, U3 = factors
    if mode == 0:
        return np.einsum("ijk,jr,kr->ir", T, U2, U3, optimize=True)
    if mode == 1:
        return np.einsum("ijk,ir,kr->jr", T, U1, U3, optimize=True)
    return np.einsum("ijk,ir,jr->kr", T, U1, U2, optimize=True)


def _solve_gram(rhs, G):
    # rhs @ inv(G) for symmetric positive semidefinite G; Tikhonov on trouble.
    try:
        if np.linalg.cond(G) < 1e12:
            return np.linalg.solve(G, rhs.T).T
    except np.linalg.LinAlgError:
        pass
    mu = 1e-12 * max(np.trace(G), np.finfo(float).tiny)
    return np.linalg.solve(G + mu * np.eye(G.shape[0]), rhs.T).T


def cp_als(T, rank, init, tol=1e-4, max_iter=50):
    """Alternating least squares for a rank-``rank`` CP model.

    Each sweep solves the three factor matrices in turn (mode 1 first, so the
    mode-1 factor of ``init`` is never read), moving column norms into the
    weights. ``fit = 1 - ||T - S|| / ||T||`` is recorded after every sweep and
    the loop stops once a sweep after the first changes it by less than
    ``tol``, or after ``max_iter`` sweeps.

    Returns ``(model, report)``.
    """
    T = as_tensor3(T)
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if init.rank != rank or init.dims != T.shape:
        raise ValueError("initial model does not match rank or tensor dimensions")
    start = time.perf_counter()
    normT = frobenius(T)
    factors = [U.copy() for U in init.factors]
    weights = init.weights.copy()
    grams = [U.T @ U for U in factors]
    history = []
    fit_old = 0.0
    converged = False
    for it in range(1, max_iter + 1):
        for n in range(3):
            G = np.ones((rank, rank))
            for m in range(3):
                if m != n:
                    G *= grams[m]
            Unew = _solve_gram(_mttkrp(T, factors, n), G)
            weights = np.linalg.norm(Unew, axis=0)
            safe = np.where(weights > 0, weights, 1.0)
            Unew = Unew / safe
            if np.any(weights == 0):
                Unew[:, weights == 0] = 1.0 / np.sqrt(Unew.shape[0])
            factors[n] = Unew
            grams[n] = Unew.T @ Unew
        # after the mode-3 solve, <T, S> = sum_r w_r * (mttkrp_3 . U3)_r
        G_all = grams[0] * grams[1] * grams[2]
        normS2 = float(weights @ G_all @ weights)
        innerTS = float(np.sum(_mttkrp(T, factors, 2) * factors[2], axis=0) @ weights)
        resid = np.sqrt(max(normT ** 2 + normS2 - 2.0 * innerTS, 0.0))
        fit = 1.0 - resid / normT if normT > 0 else 1.0
        history.append(fit)
        if it > 1 and abs(fit - fit_old) < tol:
            converged = True
            break
        fit_old = fit
    model = CPModel(weights, factors)
    report = AlsReport(len(history), history[-1], history, time.perf_counter() - start, converged)
    return model, report


def amplified_init(T, rank, kind=AmplifierKind.IDENTITY):
    """Greedy deflation initializer.

    For ``s = 1..rank``: amplify the current residual ``D`` according to
    ``kind``, take its Quick Rank 1 unit term ``v_s``, then refit all weights
    ``lambda_1..lambda_s`` by least squares so ``||T - sum lambda_i v_i||`` is
    minimal and recompute ``D``.
    """
    T = as_tensor3(T)
    kind = AmplifierKind.parse(kind)
    if rank < 1:
        raise ValueError("rank must be >= 1")
    terms = []
    D = T
    weights = np.zeros(0)
    for _ in range(rank):
        qr1 = quick_rank1(amplify(D, kind))
        terms.append(RankOneTriple(1.0, qr1.a, qr1.b, qr1.c))
        A, B, C = (np.column_stack([getattr(t, n) for t in terms]) for n in "abc")
        gram = (A.T @ A) * (B.T @ B) * (C.T @ C)
        rhs = np.einsum("ijk,ir,jr,kr->r", T, A, B, C, optimize=True)
        weights = np.linalg.lstsq(gram, rhs, rcond=None)[0]
        D = T - np.einsum("r,ir,jr,kr->ijk", weights, A, B, C, optimize=True)
    return CPModel(weights, [A, B, C])


def rank1_fit(truth, estimate):
    """``|(a . a')(b . b')(c . c')|`` between two rank-1 terms."""
    if truth.dims != estimate.dims:
        raise ValueError("rank-1 terms have different dimensions")
    return abs(float(np.dot(truth.a, estimate.a) * np.dot(truth.b, estimate.b)
                     * np.dot(truth.c, estimate.c)))


def rankr_fit(T_signal, S):
    """``(T . S) / ||S||`` for a CP model ``S`` against the signal tensor."""
    nrm = S.norm()
    if nrm == 0.0:
        raise ValueError("fit is undefined for a zero model")
    return inner(T_signal, S.reconstruct()) / nrm


def best_rank1(model):
    """The rank-1 term of ``model`` as a :class:`RankOneTriple` (rank must be 1)."""
    if model.rank != 1:
        raise ValueError("model is not rank 1")
    return model.term(0)


__all__ = ["CPModel", "AlsReport", "top_singular_triple", "quick_rank1", "cp_als",
           "amplified_init", "rank1_fit", "rankr_fit", "best_rank1", "outer3"]
