"""
Sobolev-type, Besov and logarithmically modified norms, together with the
resolvent-weighted quadratic forms that control them.

Bins are sharp: the low block |ξ| <= 1 and dyadic blocks N < |ξ| <= 2N for
N in {1, 2, 4, ...}.  Block masses use counting measure on the retained
modes; weighted forms carry the factor L so that they equal ⟨q, w(-i∂) q⟩
on L²(R/LZ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConsistencyError, DomainError
from .operators import akns_trace, akns_trace_closed_form
from .spectral import FourierField

__all__ = [
    "NormSpec",
    "WeightKind",
    "weight",
    "besov_norm",
    "weighted_form",
    "surrogate_norm",
    "xy_norm",
    "xy_surrogate",
    "sec_integral_ratio",
]

LADDER_TOL = 1e-13
MAX_RUNGS = 1100


@dataclass(frozen=True)
class NormSpec:
    s: float
    r: float
    kappa0: float = 1.0

    def __post_init__(self):
        if not -1 <= self.s <= 1:
            raise DomainError(f"s must lie in [-1, 1], got {self.s}")
        if not self.r >= 1:
            raise DomainError(f"r must be >= 1, got {self.r}")
        if not self.kappa0 >= 1:
            raise DomainError(f"kappa0 must be >= 1, got {self.kappa0}")


class WeightKind(Enum):
    RESOLVENT = "resolvent"
    LOW_PASS_DIFF = "low_pass_diff"
    BAND_PASS_DIFF = "band_pass_diff"


def weight(xi, kind: WeightKind | str, kappa: float) -> np.ndarray:
    """Multiplier w(ξ; κ), always evaluated as a difference of resolvent symbols.

    resolvent:       κ²/(ξ² + 4κ²)
    low_pass_diff:   4(κ/2)²/(ξ² + κ²) - κ²/(ξ² + 4κ²)
    band_pass_diff:  κ²/(ξ² + 4κ²) - (κ/2)²/(ξ² + κ²)
    """
    kind = WeightKind(kind)
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    t = (np.asarray(xi, dtype=float) / kappa) ** 2
    if kind is WeightKind.RESOLVENT:
        return 1.0 / (t + 4.0)
    # each difference is taken over the common denominator, numerator simplified,
    # so that it stays accurate where the two symbols nearly cancel
    if kind is WeightKind.LOW_PASS_DIFF:
        return 3.0 / ((t + 1.0) * (t + 4.0))
    return 0.75 * t / ((t + 1.0) * (t + 4.0))


def weighted_form(field: FourierField, kind: WeightKind | str, kappa: float) -> float:
    """L·Σ w(ξ; κ)|q̂(ξ)|²."""
    w = weight(field.grid.xi, kind, kappa)
    return float(field.grid.period * np.sum(w * np.abs(field.coeffs) ** 2))


def _dyadic_index(abs_xi: np.ndarray) -> np.ndarray:
    """j with 2^j < |ξ| <= 2^{j+1}; -1 marks the low block |ξ| <= 1."""
    out = np.full(abs_xi.shape, -1, dtype=int)
    high = abs_xi > 1
    j = np.ceil(np.log2(abs_xi[high])).astype(int) - 1
    # guard the floating log near exact powers of two
    j = np.where(np.ldexp(1.0, j) >= abs_xi[high], j - 1, j)
    j = np.where(np.ldexp(1.0, j + 1) < abs_xi[high], j + 1, j)
    out[high] = j
    return out


def _block_masses(field: FourierField, scale: float = 1.0) -> dict[int, float]:
    idx = _dyadic_index(np.abs(field.grid.xi) / scale)
    power = np.abs(field.coeffs) ** 2
    masses: dict[int, float] = {}
    for j in np.unique(idx):
        masses[int(j)] = float(np.sum(power[idx == j]))
    return masses


def _lr_combine(values, r: float) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(r):
        return float(np.max(values))
    top = np.max(values)
    if top == 0:
        return 0.0
    return float(top * np.sum((values / top) ** r) ** (1.0 / r))


def besov_norm(field: FourierField, s: float, r: float) -> float:
    """‖f‖_{B^{s,2}_r} with sharp dyadic blocks and counting measure."""
    if not r >= 1:
        raise DomainError(f"r must be >= 1, got {r}")
    values = []
    for j, mass in _block_masses(field).items():
        scale = 1.0 if j < 0 else 2.0 ** (j * s)
        values.append(scale * math.sqrt(mass))
    return _lr_combine(values, r)


def _ladder(term: Callable[[int], float], envelope: Callable[[int], float], r: float,
            start_check: int) -> float:
    """ℓ^r combination of term(j), j = 0, 1, ..., with a certified stopping rule.

    ``envelope(j)`` bounds term(j) from above and, from ``start_check`` on,
    decays with a non-increasing ratio; the sum stops once the geometric
    bound on the remainder is below LADDER_TOL of the running total (for
    r = ∞, once the envelope drops below the running supremum).
    """
    values = []
    total = 0.0
    best = 0.0
    for j in range(MAX_RUNGS):
        v = term(j)
        values.append(v)
        if math.isinf(r):
            best = max(best, v)
        else:
            total += v ** r
        if j < start_check:
            continue
        e_now, e_next = envelope(j), envelope(j + 1)
        if e_next == 0:
            break
        ratio = e_next / e_now if e_now > 0 else 1.0
        if ratio >= 1:
            continue
        if math.isinf(r):
            if e_next <= best:
                break
        else:
            rr = ratio ** r
            if e_next ** r / (1 - rr) <= LADDER_TOL * total:
                break
    else:
        raise ConsistencyError("dyadic ladder did not settle within the rung budget")
    return _lr_combine(values, r)


def _start_rung(field: FourierField, kappa0: float) -> int:
    """First j with κ₀2^j > 4ξ_max."""
    j = 0
    while kappa0 * 2.0 ** j <= 4 * field.grid.xi_max:
        j += 1
    return j


def surrogate_norm(field: FourierField, s: float, r: float, kappa0: float,
                   family: str) -> float:
    """ℓ^r over N in 2^ℕ of N^s·(weighted form at κ = κ₀N)^{1/2}.

    besov1: resolvent weight, -1 < s < 0
    besov2: low_pass_diff weight, s = -1
    besov3: band_pass_diff weight, -1 < s < 1
    Z:      2·resolvent weight, -1 < s < 0
    """
    if not r >= 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if not kappa0 > 0:
        raise DomainError(f"kappa0 must be positive, got {kappa0}")
    if family == "besov1" or family == "Z":
        if not -1 < s < 0:
            raise DomainError(f"family {family} needs -1 < s < 0, got {s}")
        kind, factor = WeightKind.RESOLVENT, (2.0 if family == "Z" else 1.0)
    elif family == "besov2":
        if s != -1:
            raise DomainError(f"family besov2 needs s = -1, got {s}")
        kind, factor = WeightKind.LOW_PASS_DIFF, 1.0
    elif family == "besov3":
        if not -1 < s < 1:
            raise DomainError(f"family besov3 needs -1 < s < 1, got {s}")
        kind, factor = WeightKind.BAND_PASS_DIFF, 1.0
    else:
        raise DomainError(f"unknown family {family!r}")

    L = field.grid.period
    power = np.abs(field.coeffs) ** 2
    mass = L * float(np.sum(power))
    slope = L * float(np.sum(field.grid.xi ** 2 * power))

    def term(j):
        n = 2.0 ** j
        return n ** s * math.sqrt(max(factor * weighted_form(field, kind, kappa0 * n), 0.0))

    # sup of each weight: resolvent 1/4, low_pass_diff 3/4; band_pass_diff <= 3ξ²/(16κ²)
    if kind is WeightKind.BAND_PASS_DIFF:
        def envelope(j):
            n = 2.0 ** j
            return n ** s * math.sqrt(3 * slope / 16) / (kappa0 * n)
    else:
        cap = 0.75 if kind is WeightKind.LOW_PASS_DIFF else 0.25
        def envelope(j):
            return 2.0 ** (j * s) * math.sqrt(factor * cap * mass)

    return _ladder(term, envelope, r, _start_rung(field, kappa0))


def xy_norm(field: FourierField, kappa0: float, which: str) -> float:
    """Y: max of κ₀^{-1/2}‖q̂‖_{|ξ|<=κ₀} and (κ₀N)^{-1/2} log²(2N)‖q̂‖_{κ₀N<|ξ|<=2κ₀N};
    X: (κ₀^{-1}‖q̂‖²_{|ξ|<=κ₀} + Σ log³(2N)/(κ₀N)‖q̂‖²_{block})^{1/2}.  Natural log.
    """
    if not kappa0 > 0:
        raise DomainError(f"kappa0 must be positive, got {kappa0}")
    masses = _block_masses(field, scale=kappa0)
    if which == "Y":
        best = 0.0
        for j, m in masses.items():
            if j < 0:
                best = max(best, math.sqrt(m / kappa0))
            else:
                n = 2.0 ** j
                best = max(best, math.log(2 * n) ** 2 * math.sqrt(m / (kappa0 * n)))
        return best
    if which == "X":
        total = 0.0
        for j, m in masses.items():
            if j < 0:
                total += m / kappa0
            else:
                n = 2.0 ** j
                total += math.log(2 * n) ** 3 * m / (kappa0 * n)
        return math.sqrt(total)
    raise DomainError(f"which must be 'X' or 'Y', got {which!r}")


def xy_surrogate(field: FourierField, kappa0: float, which: str) -> float:
    """Square root of sup_M log⁴(2M)·T(κ₀M) (Y) or Σ_M log³(2M)·T(κ₀M) (X),
    T(κ) = Re tr{(κ-∂)^{-1} q (κ+∂)^{-1} q̄}.  Returned on the scale of xy_norm.
    """
    if not kappa0 > 0:
        raise DomainError(f"kappa0 must be positive, got {kappa0}")
    if which not in ("X", "Y"):
        raise DomainError(f"which must be 'X' or 'Y', got {which!r}")
    power = 4 if which == "Y" else 3
    r = math.inf if which == "Y" else 1.0
    start = _start_rung(field, kappa0)
    L = field.grid.period
    mass = float(np.sum(np.abs(field.coeffs) ** 2))

    def trace(j):
        kappa = kappa0 * 2.0 ** j
        if j < start:
            value = akns_trace(field, kappa)
        else:
            # identical value from the per-mode closed form, cheaper far out
            value = akns_trace_closed_form(field, kappa)
        if value < 0:
            if value < -1e-12:
                raise ConsistencyError(f"negative AKNS trace {value:.3e} at kappa={kappa}")
            value = 0.0
        return value

    def term(j):
        return math.log(2.0 ** (j + 1)) ** power * trace(j)

    def envelope(j):
        kappa = kappa0 * 2.0 ** j
        return math.log(2.0 ** (j + 1)) ** power * L / math.tanh(kappa * L / 2) * mass / (2 * kappa)

    return math.sqrt(_ladder(term, envelope, r, start))


def sec_integral_ratio(xi: float, s: float, kappa0: float, upper: float = 1e6) -> float:
    """∫_{κ₀}^{upper} κ^{1+2s}/(ξ² + 4κ²) dκ divided by (ξ² + κ₀²)^s."""
    if not -1 < s < 0:
        raise DomainError(f"s must lie in (-1, 0), got {s}")
    # κ = e^u turns the slowly decaying tail into a smooth, rapidly decaying integrand
    f = lambda u: math.exp((2 + 2 * s) * u) / (xi ** 2 + 4 * math.exp(2 * u))
    lo, hi = math.log(kappa0), math.log(upper)
    pts = [math.log(abs(xi) / 2)] if kappa0 < abs(xi) / 2 < upper else None
    val, _ = integrate.quad(f, lo, hi, points=pts, limit=500, epsabs=0, epsrel=1e-11)
    return val / (xi ** 2 + kappa0 ** 2) ** s
