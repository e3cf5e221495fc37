"""Classical and spin-boson noise spectra with exact symmetry relations.

Classical noise is described by an even power spectral density

    S(w) = amplitude * |w / cutoff|^exponent * cut(w)   (+ static variance)

with a hard (support |w| <= cutoff) or Gaussian (exp(-w^2/cutoff^2)) roll-off.
A bosonic bath in a thermal state enters through the anti-commutator and
commutator spectra built from the spectral density J(w) and transit times
t_ll' (bath propagation delay between qubit sites):

    S+_{ll'}(w) = pi J(|w|) coth(beta |w| / 2) e^{-i w t_ll'}
    S-_{ll'}(w) = sgn(w) pi J(|w|) e^{-i w t_ll'}

so that S+(-w) = conj(S+(w)) and S-(-w) = -conj(S-(w)).  beta = inf is the
zero-temperature limit coth -> 1; a transit time of +-inf marks private baths
(all cross spectra vanish identically).  The e^{-iwt} sign follows the
anti-commutator/commutator decomposition; ``transit_sign=+1`` flips it to the
convention some spectral fits are quoted in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ClassicalPSD",
    "SpinBoson",
    "spectrum_to_json",
    "spectrum_from_json",
    "GAUSSIAN_SUPPORT_FACTOR",
]

#: Gaussian-cutoff spectra fall below 1e-16 of their scale beyond this
#: multiple of the cutoff; quadrature truncates there.
GAUSSIAN_SUPPORT_FACTOR = 6.1


def _cut(omega, cutoff, kind):
    a = np.abs(omega)
    if kind == "hard":
        return (a <= cutoff).astype(float)
    if kind == "gaussian":
        return np.exp(-(a / cutoff) ** 2)
    raise ValueError(f"unknown cutoff kind {kind!r}")


@dataclass(frozen=True)
class ClassicalPSD:
    """Even classical power spectrum with low-frequency power law.

    ``static_variance`` adds a delta component at w = 0 (a random constant
    offset of variance sigma^2 per realization); it is carried as metadata
    and handled analytically by the dynamics and the trajectory sampler.
    ``low_cut`` > 0 freezes the power law below that frequency (the
    "regularized" sub-Ohmic variant), keeping negative exponents integrable.
    """

    amplitude: float
    exponent: float = 0.0
    cutoff: float = 1.0
    cutoff_kind: str = "hard"
    static_variance: float = 0.0
    low_cut: float = 0.0

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")
        if self.amplitude < 0 or self.static_variance < 0 or self.low_cut < 0:
            raise ValueError("amplitude, static variance, low_cut must be >= 0")
        _cut(0.0, self.cutoff, self.cutoff_kind)

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        a = np.maximum(np.abs(w), self.low_cut)
        with np.errstate(divide="ignore"):
            val = self.amplitude * (a / self.cutoff) ** self.exponent
        out = val * _cut(w, self.cutoff, self.cutoff_kind)
        return float(out) if np.isscalar(omega) else out

    @property
    def omega_max(self) -> float:
        return self.cutoff if self.cutoff_kind == "hard" \
            else GAUSSIAN_SUPPORT_FACTOR * self.cutoff

    @property
    def zero_exponent(self) -> float:
        """Effective power-law exponent as w -> 0 (0 when regularized)."""
        return 0.0 if self.low_cut > 0 else self.exponent

    def exponent_metadata(self) -> dict:
        return {"s": self.zero_exponent, "omega_c": self.cutoff,
                "cutoff_kind": self.cutoff_kind}


def _coth(x):
    """coth(x) for x > 0 with the small-x series 1/x + x/3."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-4
    out = np.empty_like(x)
    out[~small] = 1.0 / np.tanh(x[~small])
    xs = x[small]
    out[small] = 1.0 / np.where(xs > 0, xs, 1.0) + xs / 3.0
    return out


@dataclass(frozen=True)
class SpinBoson:
    """Linear bosonic dephasing bath: pi J(w) = amplitude |w/cutoff|^exponent cut(w).

    ``transit`` maps unordered qubit pairs to t_ll' (antisymmetric under
    swap); missing pairs default to 0 (collective coupling), math.inf means a
    private bath for that pair.  ``beta`` is the inverse temperature in
    1/(rad/s) units; math.inf selects the T = 0 limit.
    """

    amplitude: float
    exponent: float = 0.0
    cutoff: float = 1.0
    cutoff_kind: str = "hard"
    beta: float = math.inf
    transit: dict = field(default_factory=dict)
    transit_sign: int = -1

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be positive (use math.inf for T = 0)")
        if self.transit_sign not in (-1, 1):
            raise ValueError("transit_sign must be +-1")
        _cut(0.0, self.cutoff, self.cutoff_kind)

    # -- geometry -----------------------------------------------------------

    def transit_time(self, l: int, lp: int) -> float:
        if l == lp:
            return 0.0
        key = (min(l, lp), max(l, lp))
        t = self.transit.get(key, 0.0)
        return t if l < lp else -t

    def is_private(self, l: int, lp: int) -> bool:
        return l != lp and math.isinf(abs(self.transit_time(l, lp)))

    # -- spectra ------------------------------------------------------------

    def pi_j(self, omega):
        """pi J(|w|), the spectral-density weight common to S+ and S-."""
        w = np.asarray(omega, dtype=float)
        with np.errstate(divide="ignore"):
            val = self.amplitude * np.abs(w / self.cutoff) ** self.exponent
        out = val * _cut(w, self.cutoff, self.cutoff_kind)
        return float(out) if np.isscalar(omega) else out

    def _phase(self, l, lp, omega):
        t = self.transit_time(l, lp)
        return np.exp(self.transit_sign * 1j * np.asarray(omega, dtype=float) * t)

    def s_plus(self, l: int, lp: int, omega):
        """Anti-commutator spectrum; symmetric: S+(-w) = conj(S+(w))."""
        if self.is_private(l, lp):
            return 0.0 if np.isscalar(omega) else np.zeros(np.shape(omega), complex)
        w = np.asarray(omega, dtype=float)
        if math.isinf(self.beta):
            out = self.pi_j(w) * self._phase(l, lp, w)
            return complex(out) if np.isscalar(omega) else out
        zero = w == 0
        if np.any(zero):
            if self.exponent < 1:
                raise ValueError(
                    "S+ diverges at w = 0 for finite beta with exponent < 1")
            # finite limit of pi J(w) coth(beta w / 2) as w -> 0
            lim = (2.0 * self.amplitude / (self.beta * self.cutoff)
                   if self.exponent == 1 else 0.0)
        x = self.beta * np.abs(w) / 2.0
        out = self.pi_j(w) * _coth(np.where(x > 0, x, 1.0)) * self._phase(l, lp, w)
        if np.any(zero):
            out = np.where(zero, lim, out)
        return complex(out) if np.isscalar(omega) else out

    def s_minus(self, l: int, lp: int, omega):
        """Commutator spectrum; anti-symmetric: S-(-w) = -conj(S-(w))."""
        if self.is_private(l, lp):
            return 0.0 if np.isscalar(omega) else np.zeros(np.shape(omega), complex)
        w = np.asarray(omega, dtype=float)
        out = np.sign(w) * self.pi_j(w) * self._phase(l, lp, w)
        return complex(out) if np.isscalar(omega) else out

    def s_total(self, l: int, lp: int, omega):
        """S^B = S+ + S-; obeys detailed balance S(w)/S(-w) = e^{beta w} on site."""
        return self.s_plus(l, lp, omega) + self.s_minus(l, lp, omega)

    @property
    def omega_max(self) -> float:
        return self.cutoff if self.cutoff_kind == "hard" \
            else GAUSSIAN_SUPPORT_FACTOR * self.cutoff

    def exponent_metadata(self) -> dict:
        return {"s_tilde": self.exponent, "s_tilde_minus": self.exponent,
                "omega_c": self.cutoff, "cutoff_kind": self.cutoff_kind,
                "beta": self.beta}


# ---------------------------------------------------------------------------
# JSON config
# ---------------------------------------------------------------------------

def spectrum_to_json(spec) -> str:
    if isinstance(spec, ClassicalPSD):
        obj = {"variant": "classical", "amplitude": spec.amplitude,
               "exponent": spec.exponent, "cutoff": spec.cutoff,
               "cutoff_kind": spec.cutoff_kind,
               "static_variance": spec.static_variance}
    elif isinstance(spec, SpinBoson):
        obj = {"variant": "spin_boson", "amplitude": spec.amplitude,
               "exponent": spec.exponent, "cutoff": spec.cutoff,
               "cutoff_kind": spec.cutoff_kind,
               "beta": None if math.isinf(spec.beta) else spec.beta,
               "transit_times": {f"{k[0]},{k[1]}": (None if math.isinf(v) else v)
                                 for k, v in spec.transit.items()},
               "transit_sign": spec.transit_sign}
    else:
        raise TypeError(f"not a spectrum: {spec!r}")
    return json.dumps(obj)


def spectrum_from_json(text: str):
    obj = json.loads(text) if isinstance(text, str) else text
    variant = obj["variant"]
    if variant == "classical":
        return ClassicalPSD(obj["amplitude"], obj.get("exponent", 0.0),
                            obj["cutoff"], obj.get("cutoff_kind", "hard"),
                            obj.get("static_variance", 0.0))
    if variant == "spin_boson":
        transit = {}
        for key, v in (obj.get("transit_times") or {}).items():
            l, lp = (int(x) for x in key.split(","))
            transit[(l, lp)] = math.inf if v is None else float(v)
        beta = obj.get("beta")
        return SpinBoson(obj["amplitude"], obj.get("exponent", 0.0),
                         obj["cutoff"], obj.get("cutoff_kind", "hard"),
                         math.inf if beta is None else float(beta),
                         transit, obj.get("transit_sign", -1))
    raise ValueError(f"unknown spectrum variant {variant!r}")
