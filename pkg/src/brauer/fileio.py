"""Tensor and diagram files used by the command line tools.

Tensor text format: a header line ``p q r`` followed by ``p*q*r``
whitespace-separated numbers with the mode-1 index running fastest.
Tensor binary format: three little-endian int64 dims, then the entries as
little-endian float64 in the same order. Readers tell the two apart by the
NUL bytes that only the binary header can contain.

Diagram files hold one or more blocks separated by blank lines. Each block
has ``red:``, ``green:`` and ``blue:`` lines in 1-based cycle notation and an
optional ``coefficient:`` line; several blocks form a linear combination::

    coefficient: 0.5
    red: (1 2)(3 4)
    green: (1 4)(2 3)
    blue: (1 3)(2 4)
"""

import struct

import numpy as np

from .diagrams import ColoredBrauerDiagram, LinearDiagramCombination
from .tensor3 import as_tensor3


def read_tensor(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if b"\x00" in raw[:24]:
        return _parse_binary(raw)
    return _parse_text(raw.decode("ascii"))


def _parse_text(text):
    tokens = text.split()
    if len(tokens) < 3:
        raise ValueError("tensor file is missing its 'p q r' header")
    dims = tuple(int(t) for t in tokens[:3])
    values = np.array([float(t) for t in tokens[3:]])
    if values.size != int(np.prod(dims)):
        raise ValueError(f"expected {int(np.prod(dims))} entries for dims {dims}, got {values.size}")
    return as_tensor3(values.reshape(dims, order="F"))


def _parse_binary(raw):
    if len(raw) < 24:
        raise ValueError("binary tensor file is truncated")
    dims = struct.unpack("<3q", raw[:24])
    n = int(np.prod(dims))
    if len(raw) != 24 + 8 * n:
        raise ValueError(f"binary tensor file size does not match dims {dims}")
    values = np.frombuffer(raw, dtype="<f8", offset=24)
    return as_tensor3(values.reshape(dims, order="F"))


def write_tensor(path, T, binary=False):
    T = as_tensor3(T)
    flat = T.ravel(order="F")
    if binary:
        with open(path, "wb") as fh:
            fh.write(struct.pack("<3q", *T.shape))
            fh.write(flat.astype("<f8").tobytes())
        return
    with open(path, "w") as fh:
        fh.write(format_tensor(T))


def format_tensor(T):
    T = as_tensor3(T)
    lines = ["{} {} {}".format(*T.shape)]
    lines += [repr(float(x)) for x in T.ravel(order="F")]
    return "\n".join(lines) + "\n"


def parse_diagrams(text):
    """Parse diagram-file text into a diagram or a linear combination."""
    blocks, current = [], []
    for line in text.splitlines() + [""]:
        if line.split("#", 1)[0].strip():
            current.append(line)
        elif current:
            blocks.append(current)
            current = []
    if not blocks:
        raise ValueError("no diagram found")
    terms = []
    for block in blocks:
        coefficient = 1.0
        rest = []
        for line in block:
            key, _, value = line.partition(":")
            if key.strip().lower() == "coefficient":
                coefficient = float(value)
            else:
                rest.append(line)
        terms.append((coefficient, ColoredBrauerDiagram.parse("\n".join(rest))))
    if len(terms) == 1 and terms[0][0] == 1.0:
        return terms[0][1]
    return LinearDiagramCombination(tuple(terms))


def read_diagrams(path):
    with open(path) as fh:
        return parse_diagrams(fh.read())


def format_diagram(D):
    if isinstance(D, LinearDiagramCombination):
        return "\n\n".join(f"coefficient: {c!r}\n{Di}" for c, Di in D.terms) + "\n"
    return f"{D}\n"
