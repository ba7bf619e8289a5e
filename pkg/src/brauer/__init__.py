"""Orthogonal invariants, spectral-norm surrogates and low-rank amplification for 3-way tensors."""

from .amplify import AmplifierKind, matrix_theta, phi_sharp, phi_sigma4
from .decompose import (AlsReport, CPModel, amplified_init, cp_als, quick_rank1, rank1_fit,
                        rankr_fit, top_singular_triple)
from .diagrams import ColoredBrauerDiagram, LinearDiagramCombination, Matching, evaluate
from .norms import DegreeFourInvariants, invariants, sharp, sigma4
from .tensor3 import RankOneTriple, flatten, fold, frobenius, inner, outer3

__version__ = "0.1.0"
