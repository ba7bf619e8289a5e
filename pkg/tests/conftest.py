import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def loop_frame(T, mode):
    """Frame invariant by explicit loops over the flattening's Gram matrix."""
    T = np.moveaxis(T, mode - 1, 0)
    n = T.shape[0]
    A = np.zeros((n, n))
    for i, j in itertools.product(range(n), repeat=2):
        A[i, j] = sum(T[i, b, c] * T[j, b, c] for b in range(T.shape[1]) for c in range(T.shape[2]))
    return float((A * A).sum())


def loop_tetra(T):
    p, q, r = T.shape
    total = 0.0
    for a, b in itertools.product(range(p), repeat=2):
        for c, d in itertools.product(range(q), repeat=2):
            for e, f in itertools.product(range(r), repeat=2):
                total += T[a, c, e] * T[a, d, f] * T[b, d, e] * T[b, c, f]
    return total


def loop_tetra_gradient(T):
    p, q, r = T.shape
    G = np.zeros_like(T)
    for b, c, f in itertools.product(range(p), range(q), range(r)):
        s = 0.0
        for a, d, e in itertools.product(range(p), range(q), range(r)):
            s += T[a, c, e] * T[a, d, f] * T[b, d, e]
        G[b, c, f] = s
    return G


def orthogonal_action(T, rng):
    from brauer.tensor3 import multilinear, random_orthogonal
    Q = [random_orthogonal(n, rng) for n in T.shape]
    return multilinear(T, *Q), Q


def diagonal_tensor(n):
    """``(1/n) sum_{i < n^2} e_i (x) e_i (x) e_i`` in dimension ``n^2``."""
    N = n * n
    T = np.zeros((N, N, N))
    for i in range(N):
        T[i, i, i] = 1.0 / n
    return T


def cyclic_tensor(n):
    """``n^{-3/2} sum_{ijk} e_{ni+j} (x) e_{nj+k} (x) e_{nk+i}`` in dimension ``n^2``."""
    N = n * n
    T = np.zeros((N, N, N))
    for i, j, k in itertools.product(range(n), repeat=3):
        T[n * i + j, n * j + k, n * k + i] = n ** -1.5
    return T


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """``record(number, ok, detail)`` stores a PASS/FAIL line for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def _record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
