"""Construction and manipulation of multi-qubit dynamical-decoupling pulse sequences.

Sequences are instantaneous pi-pulse trains along a single axis, one train per
qubit, stored as exact rational fractions of the total duration.  All the
standard families are provided (free evolution, CDD, UDD, nested and
non-selective variants, tensor products, periodic repetition) plus the
generic composition rule that replaces every free interval of an outer
sequence by a rescaled copy of an inner one.

Conventions
-----------
* Pulse fractions live in (0, 1]; a pulse exactly at the end of the window is
  the parity-closing pulse that makes the control propagator cyclic.  It does
  not flip the switching function on [0, T).
* Coincident pulses on the same qubit cancel pairwise (X.X = 1) and are
  always simplified away after construction.  Raw construction counts are
  kept in the label for comparison with the closed-form resource formulas.
* UDD timings for order > 2 are irrational; they are stored as float-derived
  rationals and the sequence is flagged non-exact, which switches set
  comparisons to a 1e-12 * T tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PulseSequence",
    "SequenceLabel",
    "SwitchingProfile",
    "PulseStats",
    "build_free",
    "build_cdd",
    "build_udd",
    "compose",
    "product",
    "nonselective",
    "nudd",
    "ncdd",
    "mqcdd",
    "repeat",
    "pulse_stats",
    "switching_profile",
    "merged_profiles",
    "sequence_to_json",
    "sequence_from_json",
]

#: Relative tolerance (in units of T) used to merge nominally coincident
#: pulses of non-exact (UDD-derived) sequences.
COINCIDENCE_TOL = 1e-12


@dataclass(frozen=True)
class SequenceLabel:
    """Construction metadata: family name, per-qubit orders, raw pulse count.

    ``raw_pulse_count`` is the closed-form construction count before
    coincident-pulse cancellation (product formula for nesting, the
    2^(N-1) * sum(n(alpha)) formula for displacement-enhanced sequences).
    """

    family: str = ""
    orders: tuple[int, ...] = ()
    raw_pulse_count: int | None = None


def _simplify(fracs: Iterable[Fraction], exact: bool) -> tuple[Fraction, ...]:
    """Sort pulse fractions and cancel coincident pairs on one qubit."""
    out: list[Fraction] = []
    for r in sorted(fracs):
        if out and (out[-1] == r if exact else abs(float(out[-1] - r)) <= COINCIDENCE_TOL):
            out.pop()
        else:
            out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class PulseSequence:
    """Per-qubit pulse trains over a common window of ``duration`` seconds.

    ``pulses[q]`` is the sorted tuple of pulse instants of qubit ``q`` as
    exact fractions of the duration, each in (0, 1].  Instances are immutable
    and safe to share between threads.
    """

    num_qubits: int
    duration: float
    pulses: tuple[tuple[Fraction, ...], ...]
    label: SequenceLabel = field(default_factory=SequenceLabel)
    exact: bool = True

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if len(self.pulses) != self.num_qubits:
            raise ValueError("need one pulse list per qubit")
        simplified = tuple(_simplify(p, self.exact) for p in self.pulses)
        object.__setattr__(self, "pulses", simplified)
        for train in self.pulses:
            for r in train:
                if not (0 < r <= 1):
                    raise ValueError(f"pulse fraction {r} outside (0, 1]")

    # -- derived quantities -------------------------------------------------

    def breakpoint_fractions(self, qubit: int) -> tuple[Fraction, ...]:
        """Interval endpoints 0 = b0 < b1 < ... < bk = 1 for one qubit."""
        pts = [Fraction(0)] + [r for r in self.pulses[qubit] if r != 1] + [Fraction(1)]
        return tuple(pts)

    def tau_min(self) -> float:
        """Smallest switching interval, in absolute time units."""
        gap = Fraction(1)
        for q in range(self.num_qubits):
            pts = self.breakpoint_fractions(q)
            if len(pts) > 2:
                gap = min(gap, min(b - a for a, b in zip(pts, pts[1:])))
        return float(gap) * self.duration

    def interval_sum(self, qubit: int) -> Fraction:
        pts = self.breakpoint_fractions(qubit)
        return sum((b - a for a, b in zip(pts, pts[1:])), Fraction(0))

    def end_parity(self, qubit: int) -> bool:
        """True when a closing pulse sits exactly at t = T."""
        return bool(self.pulses[qubit]) and self.pulses[qubit][-1] == 1

    def with_duration(self, duration: float) -> "PulseSequence":
        return replace(self, duration=duration)


def build_free(num_qubits: int = 1, duration: float = 1.0) -> PulseSequence:
    """Free evolution: no pulses at all."""
    return PulseSequence(num_qubits, duration, ((),) * num_qubits,
                         SequenceLabel("free", (), 0))


def _closed(fracs: list[Fraction]) -> list[Fraction]:
    """Append the parity-closing pulse at 1 when the interior flip count is odd."""
    if len(fracs) % 2 == 1:
        fracs = fracs + [Fraction(1)]
    return fracs


def build_cdd(order: int, duration: float = 1.0) -> PulseSequence:
    """Single-qubit concatenated DD of the given order (CDD_1 = X f X f)."""
    if order < 1:
        raise ValueError("CDD order must be >= 1")
    if not duration > 0:
        raise ValueError("duration must be positive")
    if order == 1:
        seq = PulseSequence(1, duration, ((Fraction(1, 2), Fraction(1)),),
                            SequenceLabel("cdd", (1,), 2))
        return seq
    seq = compose(build_cdd(1, duration), build_cdd(order - 1, duration),
                  same_qubits=True)
    return replace(seq, label=SequenceLabel("cdd", (order,), 2 ** order))


# Exact rational UDD timings for the orders where sin^2(pi j / (2a+2)) is
# rational; higher orders fall back to floats.
_UDD_EXACT = {1: (Fraction(1, 2),), 2: (Fraction(1, 4), Fraction(3, 4))}


def udd_pulse_count(order: int) -> int:
    """n(alpha) for UDD: interior pulses plus the odd-parity closing pulse."""
    return order + (order % 2)


def build_udd(order: int, duration: float = 1.0) -> PulseSequence:
    """Single-qubit Uhrig DD: pulses at T sin^2(pi j / (2 alpha + 2))."""
    if order < 1:
        raise ValueError("UDD order must be >= 1")
    if not duration > 0:
        raise ValueError("duration must be positive")
    if order in _UDD_EXACT:
        fracs = list(_UDD_EXACT[order])
        exact = True
    else:
        fracs = [Fraction(math.sin(math.pi * j / (2 * order + 2)) ** 2)
                 for j in range(1, order + 1)]
        exact = False
    fracs = _closed(fracs)
    return PulseSequence(1, duration, (tuple(fracs),),
                         SequenceLabel("udd", (order,), udd_pulse_count(order)),
                         exact=exact)


def _all_breakpoints(seq: PulseSequence) -> list[Fraction]:
    pts = {Fraction(0), Fraction(1)}
    for train in seq.pulses:
        pts.update(train)
    return sorted(pts)


def compose(outer: PulseSequence, inner: PulseSequence, *,
            same_qubits: bool = False) -> PulseSequence:
    """Replace every free interval of ``outer`` by a rescaled copy of ``inner``.

    By default the sequences act on disjoint qubit registers and the result
    acts on outer's qubits followed by inner's (NUDD-style nesting).  With
    ``same_qubits=True`` both act on the same register (CDD-style recursion);
    partially overlapping registers are not expressible.
    """
    n_out = outer.num_qubits
    if same_qubits:
        if inner.num_qubits != n_out:
            raise ValueError("same-qubit composition needs equal qubit counts")
        n_total = n_out
    else:
        n_total = n_out + inner.num_qubits

    cuts = _all_breakpoints(outer)
    trains: list[list[Fraction]] = [list(t) for t in outer.pulses]
    if not same_qubits:
        trains += [[] for _ in range(inner.num_qubits)]
    for a, b in zip(cuts, cuts[1:]):
        width = b - a
        for q in range(inner.num_qubits):
            tgt = q if same_qubits else n_out + q
            trains[tgt].extend(a + r * width for r in inner.pulses[q])

    raw_out = outer.label.raw_pulse_count
    raw_in = inner.label.raw_pulse_count
    raw = raw_out * raw_in if raw_out and raw_in else None
    return PulseSequence(
        n_total, outer.duration, tuple(tuple(t) for t in trains),
        SequenceLabel("compose", outer.label.orders + inner.label.orders, raw),
        exact=outer.exact and inner.exact)


def product(seqs: Sequence[PulseSequence], duration: float | None = None) -> PulseSequence:
    """Run independent sequences side by side on disjoint qubits (U x U)."""
    if not seqs:
        raise ValueError("need at least one sequence")
    T = duration if duration is not None else seqs[0].duration
    for s in seqs:
        if not math.isclose(s.duration, T, rel_tol=1e-12):
            raise ValueError("product requires equal durations")
    trains: list[tuple[Fraction, ...]] = []
    orders: tuple[int, ...] = ()
    raw = 0
    for s in seqs:
        trains.extend(s.pulses)
        orders += s.label.orders
        raw += s.label.raw_pulse_count or sum(len(t) for t in s.pulses)
    return PulseSequence(sum(s.num_qubits for s in seqs), T, tuple(trains),
                         SequenceLabel("product", orders, raw),
                         exact=all(s.exact for s in seqs))


def nonselective(base: PulseSequence, num_qubits: int) -> PulseSequence:
    """Apply a single-qubit sequence synchronously to every qubit."""
    if base.num_qubits != 1:
        raise ValueError("nonselective expects a single-qubit base")
    return PulseSequence(num_qubits, base.duration, base.pulses * num_qubits,
                         replace(base.label, family=base.label.family + "-global"),
                         exact=base.exact)


def nudd(orders: Sequence[int], duration: float = 1.0) -> PulseSequence:
    """Nested UDD; qubit 0 carries the outermost sequence."""
    seq = build_udd(orders[-1], duration)
    for a in orders[-2::-1]:
        seq = compose(build_udd(a, duration), seq)
    return replace(seq, label=SequenceLabel("nudd", tuple(orders),
                                            math.prod(udd_pulse_count(a) for a in orders)))


def ncdd(orders: Sequence[int], duration: float = 1.0) -> PulseSequence:
    """Nested CDD; qubit 0 carries the outermost sequence."""
    seq = build_cdd(orders[-1], duration)
    for a in orders[-2::-1]:
        seq = compose(build_cdd(a, duration), seq)
    return replace(seq, label=SequenceLabel("ncdd", tuple(orders),
                                            math.prod(2 ** a for a in orders)))


def concat_level(inner: PulseSequence, qubit: int) -> PulseSequence:
    """Wrap ``inner`` in one CDD_1 concatenation level on the given qubit.

    The result is X_q inner(T/2) X_q inner(T/2): two rescaled copies of the
    inner sequence with the outer CDD_1 pulses on ``qubit`` merged in.
    """
    half = Fraction(1, 2)
    trains = []
    for q in range(inner.num_qubits):
        fr = [r * half for r in inner.pulses[q]]
        fr += [half + r * half for r in inner.pulses[q]]
        if q == qubit:
            fr += [half, Fraction(1)]
        trains.append(tuple(fr))
    return PulseSequence(inner.num_qubits, inner.duration, tuple(trains),
                         inner.label, exact=inner.exact)


def mqcdd(order: int, num_qubits: int, duration: float = 1.0) -> PulseSequence:
    """Multi-qubit CDD chain: CDD_1 levels concatenated round-robin over qubits.

    ``num_qubits + order - 1`` levels (innermost on the last qubit) give the
    family's filtering order equal to ``order`` for the bath-induced pair
    coupling, its cancellation order one higher.
    """
    levels = num_qubits + order - 1
    seq = PulseSequence(num_qubits, duration,
                        ((),) * (num_qubits - 1) + ((Fraction(1, 2), Fraction(1)),),
                        SequenceLabel("mqcdd", (order,) * num_qubits))
    qubit = num_qubits - 1
    for _ in range(levels - 1):
        qubit = (qubit - 1) % num_qubits
        seq = concat_level(seq, qubit)
    return replace(seq, label=SequenceLabel("mqcdd", (order,) * num_qubits,
                                            2 ** levels))


def repeat(seq: PulseSequence, reps: int) -> PulseSequence:
    """Concatenate ``reps`` copies of ``seq`` over duration reps * T."""
    if reps < 1:
        raise ValueError("repetition count must be >= 1")
    if reps == 1:
        return seq
    trains = []
    for train in seq.pulses:
        trains.append(tuple((Fraction(k) + r) / reps for k in range(reps) for r in train))
    raw = (seq.label.raw_pulse_count or 0) * reps or None
    return PulseSequence(seq.num_qubits, seq.duration * reps, tuple(trains),
                         SequenceLabel(f"{seq.label.family}^M", seq.label.orders, raw),
                         exact=seq.exact)


@dataclass(frozen=True)
class PulseStats:
    per_qubit: tuple[int, ...]
    total: int
    raw_total: int | None
    tau_min: float


def pulse_stats(seq: PulseSequence) -> PulseStats:
    """Post-simplification pulse counts plus the construction-formula count."""
    per = tuple(len(t) for t in seq.pulses)
    return PulseStats(per, sum(per), seq.label.raw_pulse_count, seq.tau_min())


# ---------------------------------------------------------------------------
# Switching profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchingProfile:
    """Piecewise-constant control sign y(t) of one qubit on [0, T].

    ``times`` holds the k+1 interval endpoints (floats, starting at 0 and
    ending at T) and ``signs`` the k interval values, starting at +1.
    ``fractions`` keeps the exact rational endpoints for symmetry checks.
    """

    times: np.ndarray
    signs: np.ndarray
    duration: float
    end_parity: bool
    fractions: tuple[Fraction, ...]
    exact: bool = True

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "signs", np.asarray(self.signs, dtype=float))

    @property
    def num_intervals(self) -> int:
        return len(self.signs)

    def moments(self, max_order: int) -> np.ndarray:
        """Exact integrals m_k = int y(t) t^k dt for k = 0..max_order."""
        t = self.times
        out = np.empty(max_order + 1)
        for k in range(max_order + 1):
            out[k] = np.sum(self.signs * (t[1:] ** (k + 1) - t[:-1] ** (k + 1))) / (k + 1)
        return out

    def restricted(self, t_lo: float, t_hi: float) -> "SwitchingProfile":
        """Profile restricted to [t_lo, t_hi], re-anchored at time 0."""
        pts = [t_lo] + [t for t in self.times if t_lo < t < t_hi] + [t_hi]
        idx = np.searchsorted(self.times, np.asarray(pts[:-1]), side="right") - 1
        return SwitchingProfile(np.asarray(pts) - t_lo, self.signs[idx],
                                t_hi - t_lo, False, (), self.exact)

    def value(self, t: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0,
                      self.num_intervals - 1)
        return self.signs[idx]


def switching_profile(seq: PulseSequence, qubit: int) -> SwitchingProfile:
    """Derive y_q(t) from the pulse train: +1 at t = 0, flip at interior pulses."""
    fr = seq.breakpoint_fractions(qubit)
    times = np.array([float(r) for r in fr]) * seq.duration
    signs = np.array([(-1.0) ** j for j in range(len(fr) - 1)])
    return SwitchingProfile(times, signs, seq.duration, seq.end_parity(qubit),
                            fr, seq.exact)


def merged_profiles(a: SwitchingProfile, b: SwitchingProfile):
    """Common breakpoint refinement of two profiles: (times, signs_a, signs_b)."""
    times = np.union1d(a.times, b.times)
    mids = 0.5 * (times[:-1] + times[1:])
    return times, a.value(mids), b.value(mids)


def product_profile(a: SwitchingProfile, b: SwitchingProfile) -> SwitchingProfile:
    times, sa, sb = merged_profiles(a, b)
    return SwitchingProfile(times, sa * sb, a.duration, a.end_parity ^ b.end_parity,
                            (), a.exact and b.exact)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _frac_str(r: Fraction, exact: bool) -> str:
    return f"{r.numerator}/{r.denominator}" if exact else repr(float(r))


def sequence_to_json(seq: PulseSequence) -> str:
    obj = {
        "n_qubits": seq.num_qubits,
        "T": seq.duration,
        "pulses": [[_frac_str(r, seq.exact) for r in train] for train in seq.pulses],
        "label": {"family": seq.label.family, "orders": list(seq.label.orders),
                  "raw_pulse_count": seq.label.raw_pulse_count},
    }
    return json.dumps(obj)


def sequence_from_json(text: str) -> PulseSequence:
    obj = json.loads(text)
    exact = True
    trains = []
    for train in obj["pulses"]:
        fr = []
        for s in train:
            if "/" in s:
                fr.append(Fraction(s))
            else:
                fr.append(Fraction(float(s)))
                exact = False
        trains.append(tuple(fr))
    lab = obj.get("label") or {}
    return PulseSequence(obj["n_qubits"], obj["T"], tuple(trains),
                         SequenceLabel(lab.get("family", ""),
                                       tuple(lab.get("orders") or ()),
                                       lab.get("raw_pulse_count")),
                         exact=exact)
