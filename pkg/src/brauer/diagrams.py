"""Brauer diagrams and colored Brauer diagrams.

A :class:`Matching` is a perfect matching on vertices ``0..d-1`` (stored as a
partner array). A :class:`ColoredBrauerDiagram` overlays three matchings, one
per tensor mode: red edges contract mode-1 indices, green mode-2 and blue
mode-3. Evaluating a diagram on a 3-way tensor places one copy of the tensor
at every vertex and contracts along the edges.

Vertices are 0-based in code and 1-based in the text format
(``"red: (1 2)(3 4)"``), matching the usual cycle notation.
"""

import itertools
import math
import re
from dataclasses import dataclass

import numpy as np

from .tensor3 import as_tensor3

COLORS = ("red", "green", "blue")
MAX_MATCHING_D = 12
MAX_CENSUS_D = 8
DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class Matching:
    """Perfect matching; ``partner[v]`` is the vertex paired with ``v``."""

    partner: tuple

    def __post_init__(self):
        partner = tuple(int(v) for v in self.partner)
        d = len(partner)
        if d % 2:
            raise ValueError("a perfect matching needs an even number of vertices")
        for v, w in enumerate(partner):
            if not 0 <= w < d or w == v or partner[w] != v:
                raise ValueError(f"not a perfect matching: {partner}")
        object.__setattr__(self, "partner", partner)

    @classmethod
    def from_pairs(cls, pairs, d=None):
        pairs = [tuple(p) for p in pairs]
        if d is None:
            d = 2 * len(pairs)
        partner = [-1] * d
        for a, b in pairs:
            if partner[a] != -1 or partner[b] != -1:
                raise ValueError(f"vertex repeated in {pairs}")
            partner[a], partner[b] = b, a
        if -1 in partner:
            raise ValueError(f"pairs {pairs} do not cover all {d} vertices")
        return cls(tuple(partner))

    @classmethod
    def parse(cls, text):
        """Parse 1-based cycle notation such as ``"(1 3)(2 6)(4 5)"``."""
        pairs = re.findall(r"\(\s*(\d+)\s*[, ]\s*(\d+)\s*\)", text)
        if not pairs or re.sub(r"\(\s*\d+\s*[, ]\s*\d+\s*\)|\s", "", text):
            raise ValueError(f"cannot parse matching {text!r}")
        return cls.from_pairs([(int(a) - 1, int(b) - 1) for a, b in pairs])

    @property
    def d(self):
        return len(self.partner)

    @property
    def pairs(self):
        return tuple((v, w) for v, w in enumerate(self.partner) if v < w)

    def relabel(self, perm):
        """Matching with vertex ``v`` renamed to ``perm[v]``."""
        new = [0] * self.d
        for v, w in enumerate(self.partner):
            new[perm[v]] = perm[w]
        return Matching(tuple(new))

    def __str__(self):
        return "".join(f"({a + 1} {b + 1})" for a, b in self.pairs)


def standard_matching(d):
    """``(1 2)(3 4)...(d-1 d)``."""
    return Matching.from_pairs([(2 * i, 2 * i + 1) for i in range(d // 2)], d)


@dataclass(frozen=True)
class ColoredBrauerDiagram:
    red: Matching
    green: Matching
    blue: Matching

    def __post_init__(self):
        if not self.red.d == self.green.d == self.blue.d:
            raise ValueError("all three matchings must have the same vertex count")

    @classmethod
    def parse(cls, text):
        """Parse lines ``red: (..)``, ``green: (..)``, ``blue: (..)``."""
        found = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(":")
            key = key.strip().lower()
            if key not in COLORS or not rest:
                raise ValueError(f"bad diagram line {line!r}")
            found[key] = Matching.parse(rest)
        missing = [c for c in COLORS if c not in found]
        if missing:
            raise ValueError(f"diagram is missing colors {missing}")
        return cls(found["red"], found["green"], found["blue"])

    @property
    def d(self):
        return self.red.d

    @property
    def matchings(self):
        return (self.red, self.green, self.blue)

    def relabel(self, perm):
        return ColoredBrauerDiagram(*(m.relabel(perm) for m in self.matchings))

    def __str__(self):
        return "\n".join(f"{c}: {m}" for c, m in zip(COLORS, self.matchings))


@dataclass(frozen=True)
class LinearDiagramCombination:
    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), D) for c, D in self.terms)
        if not terms:
            raise ValueError("empty diagram combination")
        if len({D.d for _, D in terms}) != 1:
            raise ValueError("all diagrams in a combination must share d")
        object.__setattr__(self, "terms", terms)

    @property
    def d(self):
        return self.terms[0][1].d


# -- enumeration and cycle counting -------------------------------------------------


def double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def _pairings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        for tail in _pairings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + tail


def enumerate_matchings(d):
    """All perfect matchings on ``d`` vertices; there are ``(d-1)!!`` of them."""
    if d < 0 or d % 2:
        raise ValueError(f"d must be a non-negative even integer, got {d}")
    if d > MAX_MATCHING_D:
        raise ValueError(f"refusing to enumerate matchings for d > {MAX_MATCHING_D}")
    return [Matching.from_pairs(p, d) for p in _pairings(list(range(d)))]


def overlay_cycle_count(m1, m2):
    """Number of cycles (2-cycles included) in the union of two matchings."""
    if m1.d != m2.d:
        raise ValueError("matchings have different vertex counts")
    seen = [False] * m1.d
    cycles = 0
    for start in range(m1.d):
        if seen[start]:
            continue
        cycles += 1
        v = start
        while not seen[v]:
            w = m1.partner[v]
            seen[v] = seen[w] = True
            v = m2.partner[w]
    return cycles


def single_color_diagram_dot(m1, m2, n):
    """Inner product of the invariant tensors of two Brauer diagrams in dimension ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return n ** overlay_cycle_count(m1, m2)


def colored_diagram_dot(D1, D2, p, q, r):
    """Inner product of two colored diagram tensors: ``p^kR q^kG r^kB``."""
    if D1.d != D2.d:
        raise ValueError("diagrams have different vertex counts")
    kr, kg, kb = (overlay_cycle_count(a, b) for a, b in zip(D1.matchings, D2.matchings))
    return p ** kr * q ** kg * r ** kb


def build_diagram_tensor(m, n, max_entries=4**8):
    """Explicit invariant tensor of a Brauer diagram, shape ``(n,) * d``.

    Entry is 1 where the indices at every matched pair agree, 0 otherwise.
    """
    if n ** m.d > max_entries:
        raise MemoryError(f"diagram tensor with {n ** m.d} entries exceeds {max_entries}")
    if m.d == 0:
        return np.ones(())
    eye = np.eye(n)
    operands = []
    for a, b in m.pairs:
        operands += [eye, [a, b]]
    return np.einsum(*operands, list(range(m.d)))


# -- connectivity and canonical forms -----------------------------------------------


def is_connected(D):
    """True iff the union of the three matchings is a connected graph."""
    parent = list(range(D.d))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for m in D.matchings:
        for a, b in m.pairs:
            parent[find(a)] = find(b)
    return len({find(v) for v in range(D.d)}) <= 1


def _stabilizer_perms(d):
    """All permutations fixing the standard matching, as an ``(e! 2^e, d)`` array."""
    e = d // 2
    perms = []
    for order in itertools.permutations(range(e)):
        for flips in itertools.product((0, 1), repeat=e):
            perm = [0] * d
            for i, (j, f) in enumerate(zip(order, flips)):
                perm[2 * i], perm[2 * i + 1] = 2 * j + f, 2 * j + 1 - f
            perms.append(perm)
    return np.array(perms, dtype=np.int64).reshape(len(perms), d)


def _canonical_keys(stab, stab_inv, green, blue):
    # Relabelled partner arrays for every stabilizer element: new[x] = s(g(s^-1(x))).
    rows = np.arange(stab.shape[0])[:, None]
    g = stab[rows, green[stab_inv]]
    b = stab[rows, blue[stab_inv]]
    return np.concatenate([g, b], axis=1)


def _lexmin(keys):
    order = np.lexsort(keys.T[::-1])
    return tuple(int(x) for x in keys[order[0]])


def canonical_form(D):
    """Canonical key for ``D`` up to vertex relabeling (colors kept fixed).

    Relabels ``D`` so its red matching is ``(1 2)(3 4)...``, then takes the
    lexicographically smallest (green, blue) partner arrays over every
    relabeling that keeps red in that form. Two diagrams are isomorphic iff
    their keys agree.
    """
    d = D.d
    if d == 0:
        return ()
    perm = [0] * d
    for i, (a, b) in enumerate(D.red.pairs):
        perm[a], perm[b] = 2 * i, 2 * i + 1
    E = D.relabel(perm)
    stab = _stabilizer_perms(d)
    stab_inv = np.argsort(stab, axis=1)
    keys = _canonical_keys(stab, stab_inv, np.array(E.green.partner), np.array(E.blue.partner))
    return _lexmin(keys)


def connected_classes(d):
    """One representative per isomorphism class of connected colored diagrams on ``d`` vertices."""
    if d < 2 or d % 2:
        raise ValueError(f"d must be a positive even integer, got {d}")
    if d > MAX_CENSUS_D:
        raise ValueError(f"census refused for d > {MAX_CENSUS_D}")
    red = standard_matching(d)
    matchings = enumerate_matchings(d)
    stab = _stabilizer_perms(d)
    stab_inv = np.argsort(stab, axis=1)
    found = {}
    for green in matchings:
        g = np.array(green.partner)
        for blue in matchings:
            D = ColoredBrauerDiagram(red, green, blue)
            if not is_connected(D):
                continue
            key = _lexmin(_canonical_keys(stab, stab_inv, g, np.array(blue.partner)))
            found.setdefault(key, D)
    return list(found.values())


def count_connected_classes(d):
    return len(connected_classes(d))


# -- named diagrams ------------------------------------------------------------------


def _diagram(red, green, blue):
    return ColoredBrauerDiagram(Matching.parse(red), Matching.parse(green), Matching.parse(blue))


def plankton():
    """The only diagram on two vertices; evaluates to ``||T||^2``."""
    return _diagram("(1 2)", "(1 2)", "(1 2)")


def frob4_diagram():
    """Two disjoint plankton; evaluates to ``||T||^4``."""
    return _diagram("(1 2)(3 4)", "(1 2)(3 4)", "(1 2)(3 4)")


def frame_diagram(mode):
    """Frame of the given color: that color crosses, the other two pair up."""
    pairs, cross = "(1 2)(3 4)", "(1 3)(2 4)"
    return _diagram(*(cross if c == mode else pairs for c in (1, 2, 3)))


def tetrahedron_diagram():
    return _diagram("(1 2)(3 4)", "(1 4)(2 3)", "(1 3)(2 4)")


def sigma4_combination():
    """Diagram combination whose evaluation is ``sigma4(T)**4``."""
    terms = [(3 / 27, frob4_diagram())]
    terms += [(6 / 27, frame_diagram(k)) for k in (1, 2, 3)]
    terms.append((6 / 27, tetrahedron_diagram()))
    return LinearDiagramCombination(tuple(terms))


def sharp_combination():
    """Diagram combination whose evaluation is ``sharp(T)**4``."""
    terms = [(1 / 5, frame_diagram(k)) for k in (1, 2, 3)]
    terms.append((2 / 5, tetrahedron_diagram()))
    return LinearDiagramCombination(tuple(terms))


# -- evaluation ----------------------------------------------------------------------


def _legs(D):
    """Edge labels at each vertex, ordered (red, green, blue), plus label sizes' mode index."""
    labels = {}
    legs = [[None] * 3 for _ in range(D.d)]
    for color, m in enumerate(D.matchings):
        for a, b in m.pairs:
            label = len(labels)
            labels[label] = color
            legs[a][color] = legs[b][color] = label
    return legs, labels


def contraction_plan(D, dims):
    """Greedy pairwise contraction order for evaluating ``D`` on a tensor of shape ``dims``.

    Repeatedly contracts the pair of operands whose result has the fewest
    entries; ties go to the lexicographically smallest pair of vertex groups.
    Returns a list of ``(group_a, group_b, result_size)`` steps.
    """
    legs, labels = _legs(D)
    size = {lab: dims[color] for lab, color in labels.items()}
    ops = [((v,), frozenset(legs[v])) for v in range(D.d)]
    plan = []
    while len(ops) > 1:
        best = None
        for i, j in itertools.combinations(range(len(ops)), 2):
            out = ops[i][1] ^ ops[j][1]
            cost = math.prod(size[lab] for lab in out)
            key = (cost, ops[i][0], ops[j][0])
            if best is None or key < best[0]:
                best = (key, i, j, out)
        (cost, ga, gb), i, j, out = best
        plan.append((ga, gb, cost))
        merged = (tuple(sorted(ga + gb)), out)
        ops = [op for k, op in enumerate(ops) if k not in (i, j)] + [merged]
        ops.sort(key=lambda op: op[0])
    return plan


def _letter(k):
    return "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"[k]


def evaluate(D, T, budget=DEFAULT_BUDGET):
    """The invariant ``P_D(T)``: one copy of ``T`` per vertex, contracted along the edges.

    ``D`` may be a :class:`ColoredBrauerDiagram` or a
    :class:`LinearDiagramCombination`. Raises ``MemoryError`` if the greedy
    plan needs an intermediate with more than ``budget`` entries.
    """
    if isinstance(D, LinearDiagramCombination):
        return float(sum(c * evaluate(Di, T, budget) for c, Di in D.terms))
    T = as_tensor3(T)
    if D.d == 0:
        return 1.0
    legs, _ = _legs(D)
    plan = contraction_plan(D, T.shape)
    worst = max((cost for _, _, cost in plan), default=0)
    if worst > budget:
        raise MemoryError(f"contraction needs an intermediate of {worst} entries (budget {budget})")
    ops = {(v,): (T, list(legs[v])) for v in range(D.d)}
    for ga, gb, _ in plan:
        A, la = ops.pop(ga)
        B, lb = ops.pop(gb)
        out = [lab for lab in la if lab not in lb] + [lab for lab in lb if lab not in la]
        subscripts = "{},{}->{}".format("".join(map(_letter, la)), "".join(map(_letter, lb)),
                                  "".join(map(_letter, out)))
        ops[tuple(sorted(ga + gb))] = (np.einsum(subscripts, A, B), out)
    (result, _), = ops.values()
    return float(result)
