"""Switching-function symmetries and displacement-anti-symmetric constructions.

A pair of switching functions can be mirror (anti-)symmetric about T/2 or
displacement (anti-)symmetric under translation by T/2.  For more than two
qubits the translation symmetry is staged across binary time scales
tau_s = 2^s T / 2^(N-1); the stage at which each qubit flips sign is encoded
in an N x (N-1) binary matrix P with P(l, s) = delta_{s, l-1}, and the
resulting per-segment conjugation exponents in an auxiliary N x 2^(N-1)
binary matrix Q built by a reflect-and-XOR recursion.

``enhance_displacement`` concatenates 2^(N-1) copies of a base sequence,
conjugating copy u by the X pattern of Q column u, so that every qubit pair
is displacement anti-symmetric at the scale dictated by P.  Q rows are
normalised so the first copy is unconjugated (y(0) = +1); this differs from
the raw construction by one global conjugation, which relabels a basis and
leaves every filter-function magnitude, decay and fidelity unchanged.

The pair conditions constrain y_l(A+t1) y_l'(A+t2) for independent t1, t2,
which forces each switching function separately to repeat up to a constant
sign between the two windows; the checks below therefore compare per-qubit
windows exactly (rationals) and demand the sign product be -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .sequences import PulseSequence, SequenceLabel

__all__ = [
    "SymmetryMatrices",
    "p_matrix",
    "q_matrix",
    "symmetry_matrices",
    "enhance_displacement",
    "dictated_scale",
    "check_symmetry",
    "reflection_sign",
    "shift_sign",
    "segment_conjugations",
]

SymmetryKind = Literal["mirror", "displacement", "generalized-displacement"]

_TOL = Fraction(1, 10 ** 12)  # window tolerance for UDD-derived sequences


def p_matrix(num_qubits: int) -> np.ndarray:
    """N x (N-1) stage matrix with P(l, s) = delta_{s, l-1} (0-based rows/cols)."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    p = np.zeros((num_qubits, max(num_qubits - 1, 0)), dtype=int)
    for q in range(1, num_qubits):
        p[q, q - 1] = 1
    return p


def q_matrix(num_qubits: int) -> np.ndarray:
    """Auxiliary N x 2^(N-1) conjugation-exponent matrix associated with P.

    Row l starts from 0 at the centre position and is grown outwards: at step
    y the fresh left block equals the existing right block XOR P(l, y).
    Reproduces the printed Q for N = 2 ((0,0),(0,1)) and N = 3.
    """
    n = num_qubits
    p = p_matrix(n)
    width = 2 ** (n - 1)
    q = np.zeros((n, width), dtype=int)
    if n == 1:
        return q
    c = 2 ** (n - 2)  # centre position, 1-based
    for row in range(n):
        q[row, c - 1] = 0          # position c
        q[row, c] = p[row, 0]      # position c + 1
        for y in range(1, n - 1):
            for i in range(1, 2 ** y + 1):
                lpos = c - 2 ** y + i - 1   # 0-based
                rpos = c + i - 1
                if i <= 2 ** (y - 1):
                    q[row, lpos] = q[row, rpos] ^ p[row, y]
                else:
                    q[row, rpos] = q[row, lpos] ^ p[row, y]
    return q


@dataclass(frozen=True)
class SymmetryMatrices:
    p_matrix: np.ndarray
    q_matrix: np.ndarray


def symmetry_matrices(num_qubits: int) -> SymmetryMatrices:
    return SymmetryMatrices(p_matrix(num_qubits), q_matrix(num_qubits))


def segment_conjugations(num_qubits: int) -> np.ndarray:
    """Per-segment conjugation exponents, rows normalised to start at 0.

    Column u applies to the u-th time segment; XOR-ing each Q row by its
    first entry removes the t = 0 pulse of the raw construction (one global
    conjugation, physically a basis relabel).
    """
    q = q_matrix(num_qubits)
    return q ^ q[:, :1]


def enhance_displacement(base: PulseSequence, num_qubits: int | None = None) -> PulseSequence:
    """Concatenate 2^(N-1) conjugated copies of ``base`` over 2^(N-1) * T0.

    Copy u is conjugated by the X pattern of the (normalised) Q column u;
    conjugating pulses land on segment boundaries and coincident pairs are
    cancelled.  The result satisfies generalized displacement anti-symmetry
    for every qubit pair at the scale dictated by P.
    """
    n = base.num_qubits if num_qubits is None else num_qubits
    if n < 1:
        raise ValueError("num_qubits must be >= 1")
    if n != base.num_qubits:
        raise ValueError("base sequence must already act on all qubits")
    segs = 2 ** (n - 1)
    conj = segment_conjugations(n)
    trains: list[tuple[Fraction, ...]] = []
    for qb in range(n):
        fr: list[Fraction] = []
        for u in range(segs):
            fr.extend((Fraction(u) + r) / segs for r in base.pulses[qb])
            flip_next = conj[qb, u + 1] if u + 1 < segs else 0
            if conj[qb, u] ^ flip_next:
                fr.append(Fraction(u + 1, segs))
        trains.append(tuple(fr))
    raw = segs * sum(len(t) for t in base.pulses)
    return PulseSequence(n, base.duration * segs, tuple(trains),
                         SequenceLabel("displacement", base.label.orders, raw),
                         exact=base.exact)


def dictated_scale(pair: tuple[int, int]) -> int:
    """Scale index s (tau_s = 2^s T / 2^(N-1)) guaranteed by P for a pair (0-based qubits)."""
    return max(pair) - 1


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def _qubit_signs(seq: PulseSequence, qubit: int):
    """Exact interval endpoints and signs of y_q over [0, 1]."""
    cuts = [Fraction(0)] + [r for r in seq.pulses[qubit] if r != 1] + [Fraction(1)]
    signs = [(-1) ** j for j in range(len(cuts) - 1)]
    return cuts, signs


def _window(cuts, signs, lo: Fraction, hi: Fraction, reverse: bool = False):
    """(grid, signs) of y on [lo, hi), re-anchored at 0, optionally reflected."""
    grid = [Fraction(0)] + [c - lo for c in cuts if lo < c < hi] + [hi - lo]
    idx = []
    for a in grid[:-1]:
        t = lo + a
        j = 0
        while j + 1 < len(signs) and cuts[j + 1] <= t:
            j += 1
        idx.append(signs[j])
    if reverse:
        width = hi - lo
        grid = [width - g for g in reversed(grid)]
        idx = idx[::-1]
    return grid, idx


def _relative_sign(w1, w2, exact: bool):
    """+-1 when the two windows are equal up to a constant sign, else None."""
    g1, s1 = w1
    g2, s2 = w2
    if len(g1) != len(g2):
        return None
    if exact:
        if g1 != g2:
            return None
    elif any(abs(a - b) > _TOL for a, b in zip(g1, g2)):
        return None
    rel = s1[0] * s2[0]
    if all(a * b == rel for a, b in zip(s1, s2)):
        return rel
    return None


def reflection_sign(seq: PulseSequence, qubit: int):
    """c with y(T/2 + t) = c * y(T/2 - t), or None when not mirror (anti)symmetric."""
    cuts, signs = _qubit_signs(seq, qubit)
    half = Fraction(1, 2)
    return _relative_sign(_window(cuts, signs, half, Fraction(1)),
                          _window(cuts, signs, Fraction(0), half, reverse=True),
                          seq.exact)


def shift_sign(seq: PulseSequence, qubit: int,
               lo1: Fraction, lo2: Fraction, width: Fraction):
    """c with y(lo2 + t) = c * y(lo1 + t) on [0, width), or None."""
    cuts, signs = _qubit_signs(seq, qubit)
    return _relative_sign(_window(cuts, signs, lo2, lo2 + width),
                          _window(cuts, signs, lo1, lo1 + width),
                          seq.exact)


def check_symmetry(seq: PulseSequence, kind: SymmetryKind,
                   pair: tuple[int, int] = (0, 1),
                   scale: int | None = None) -> bool:
    """Exact check of the pairwise sign conditions on switching functions.

    mirror:       y_l(T/2+t1) y_l'(T/2+t2) = -y_l(T/2-t1) y_l'(T/2-t2)
    displacement: y_l(T/2+t1) y_l'(T/2+t2) = -y_l(t1) y_l'(t2)
    generalized-displacement: the staged condition at ``scale``
    (tau_s = 2^scale * T / 2^(N-1), default: the P-dictated scale).

    Rational constructions are compared exactly; UDD-derived sequences use
    the documented 1e-12 * T tolerance.  Returns False on violation.
    """
    half = Fraction(1, 2)
    if kind == "mirror":
        c = [reflection_sign(seq, q) for q in pair]
        return None not in c and c[0] * c[1] == -1

    if kind == "displacement":
        c = [shift_sign(seq, q, Fraction(0), half, half) for q in pair]
        return None not in c and c[0] * c[1] == -1

    if kind == "generalized-displacement":
        n = seq.num_qubits
        if scale is None:
            scale = dictated_scale(pair)
        if not 0 <= scale <= max(n - 2, 0):
            raise ValueError("scale out of range")
        tau = Fraction(2 ** scale, 2 ** (n - 1))
        for m in range(1, 2 ** (n - scale - 2) + 1):
            lo = half - m * tau
            c = [shift_sign(seq, q, lo, lo + (2 * m - 1) * tau, tau) for q in pair]
            if None in c or c[0] * c[1] != -1:
                return False
        return True

    raise ValueError(f"unknown symmetry kind {kind!r}")
