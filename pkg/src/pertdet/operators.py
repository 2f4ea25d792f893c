"""
Fourier-basis realizations of the resolvent sandwiches and their traces.

Matrices act on the retained modes |n| <= N in the orthonormal basis
e^{iξ_n x}/√L.  Multiplication by q has entries Q_{mn} = q̂(ξ_m - ξ_n) (zero
when |m - n| > N) and the free resolvent R = (-∂² + κ²)^{-1} is diagonal
with entries 1/(ξ_n² + κ²).  Dense matrices are box truncations of the true
operators; quantities that must be exact (Hilbert-Schmidt norms, first-order
traces, conservation identities) are also available through
:func:`pertdet.lattice.cyclic_trace`, which sums over all modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError
from .lattice import cyclic_trace
from .spectral import FourierField, TorusGrid, derivative, multiply

__all__ = [
    "SandwichMatrix",
    "resolvent_kernel",
    "convolution_matrix",
    "build_sandwich",
    "operator_hs_squared",
    "hs_closed_form",
    "trace_power",
    "akns_half_blocks",
    "build_akns_block",
    "akns_trace",
    "akns_trace_closed_form",
    "akns_trace_line",
    "perturbed_sandwich",
    "reflect_matrix",
    "kdv_identities",
    "akns_identities",
]


def _check_kappa(kappa: float):
    if not np.isfinite(kappa) or kappa <= 0:
        raise DomainError(f"kappa must be positive, got {kappa}")


@dataclass(frozen=True, eq=False)
class SandwichMatrix:
    """Dense matrix of a resolvent sandwich over the retained modes."""

    kappa: float
    flavor: str
    grid: TorusGrid
    entries: np.ndarray

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))

    def is_hermitian(self, atol: float = 1e-13) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, rtol=0, atol=atol))


def resolvent_kernel(x, y, kappa: float, geometry: str = "line", period: float = 1.0):
    """Kernel of (-∂² + κ²)^{-1} on the line or on the circle R/LZ."""
    _check_kappa(kappa)
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    if geometry == "line":
        return np.exp(-kappa * d) / (2 * kappa)
    if geometry == "circle":
        if period <= 0:
            raise DomainError(f"period must be positive, got {period}")
        d = np.mod(d, period)
        d = np.minimum(d, period - d)
        # sum of images e^{-κ|d + jL|}
        return (np.exp(-kappa * d) + np.exp(-kappa * (period - d))) / (
            2 * kappa * -np.expm1(-kappa * period))
    raise DomainError(f"unknown geometry {geometry!r}")


def convolution_matrix(f: FourierField) -> np.ndarray:
    """Q_{mn} = f̂(ξ_m - ξ_n), zero outside the retained band."""
    N = f.grid.mode_cutoff
    idx = np.arange(-N, N + 1)
    k = idx[:, None] - idx[None, :]
    inside = np.abs(k) <= N
    out = np.zeros(k.shape, complex)
    out[inside] = f.coeffs[k[inside] + N]
    return out


def build_sandwich(q: FourierField, kappa: float) -> SandwichMatrix:
    """Box matrix of √R q √R with R = (-∂² + κ²)^{-1}."""
    _check_kappa(kappa)
    d = 1.0 / np.sqrt(q.grid.xi ** 2 + kappa ** 2)
    entries = d[:, None] * convolution_matrix(q) * d[None, :]
    return SandwichMatrix(kappa, "kdv", q.grid, entries)


def operator_hs_squared(q: FourierField, kappa: float) -> float:
    """‖√R q √R‖²_HS summed over all modes (no box truncation)."""
    _check_kappa(kappa)
    return float(cyclic_trace([("R", q.conj()), ("R", q)], kappa).real)


def hs_closed_form(q, kappa: float, geometry: str = "circle") -> float:
    """Closed form of ‖√R q √R‖²_HS.

    circle: ``q`` is a FourierField on R/LZ and the image-sum kernel gives
        a·L·Σ|q̂|²/(ξ² + 4κ²) + b·L²|q̂(0)|²,
        a = (1 - e^{-2κL}) / (κ(1 - e^{-κL})²),  b = e^{-κL} / (2κ²(1 - e^{-κL})²).
    line: ``q`` is a callable ξ -> q̂(ξ) (unitary transform) and the value is
        (1/κ)∫|q̂|²/(ξ² + 4κ²) dξ by adaptive quadrature.
    """
    _check_kappa(kappa)
    if geometry == "line":
        if not callable(q):
            raise ConfigurationError("line geometry expects a callable q̂(ξ)")
        val, _ = integrate.quad(lambda s: abs(q(s)) ** 2 / (s ** 2 + 4 * kappa ** 2),
                                -np.inf, np.inf, epsabs=0, epsrel=1e-12, limit=400)
        return val / kappa
    if geometry != "circle":
        raise DomainError(f"unknown geometry {geometry!r}")
    L = q.grid.period
    one_minus = -np.expm1(-kappa * L)
    a = -np.expm1(-2 * kappa * L) / (kappa * one_minus ** 2)
    b = np.exp(-kappa * L) / (2 * kappa ** 2 * one_minus ** 2)
    power = np.abs(q.coeffs) ** 2
    return float(a * L * np.sum(power / (q.grid.xi ** 2 + 4 * kappa ** 2))
                 + b * L ** 2 * abs(q.coeff(0)) ** 2)


def trace_power(matrix, ell: int) -> complex:
    """tr(M^ℓ) by repeated multiplication."""
    if int(ell) != ell or ell < 1:
        raise DomainError(f"ell must be an integer >= 1, got {ell}")
    m = matrix.entries if isinstance(matrix, SandwichMatrix) else np.asarray(matrix)
    if ell == 1:
        return complex(np.trace(m))
    half = np.linalg.matrix_power(m, ell // 2)
    if ell % 2 == 0:
        return complex(np.sum(half * half.T))
    return complex(np.sum((half @ m) * half.T))


def _akns_multipliers(grid: TorusGrid, kappa: float):
    # principal branch; Re(κ ± iξ) = κ > 0 keeps it continuous from √κ
    minus_half = 1.0 / np.sqrt(kappa - 1j * grid.xi)
    plus_half = 1.0 / np.sqrt(kappa + 1j * grid.xi)
    return minus_half, plus_half


def akns_half_blocks(q: FourierField, kappa: float):
    """(κ-∂)^{-1/2} q (κ+∂)^{-1/2} and (κ+∂)^{-1/2} q̄ (κ-∂)^{-1/2} as box matrices."""
    _check_kappa(kappa)
    dm, dp = _akns_multipliers(q.grid, kappa)
    upper = dm[:, None] * convolution_matrix(q) * dp[None, :]
    lower = dp[:, None] * convolution_matrix(q.conj()) * dm[None, :]
    return upper, lower


def build_akns_block(q: FourierField, kappa: float) -> SandwichMatrix:
    """Box matrix of (κ-∂)^{-1/2} q (κ+∂)^{-1} q̄ (κ-∂)^{-1/2}."""
    upper, lower = akns_half_blocks(q, kappa)
    return SandwichMatrix(kappa, "akns", q.grid, upper @ lower)


def akns_trace(q: FourierField, kappa: float, method: str = "exact") -> float:
    """Re tr{(κ-∂)^{-1} q (κ+∂)^{-1} q̄}.

    ``method="exact"`` sums over all modes; ``method="matrix"`` uses the box
    truncation Σ_{m,n} Q_{mn} Q̄_{nm} / ((κ - iξ_m)(κ + iξ_n)).
    """
    _check_kappa(kappa)
    if method == "exact":
        return float(cyclic_trace([("Am", q), ("Ap", q.conj())], kappa).real)
    if method == "matrix":
        xi = q.grid.xi
        prod = convolution_matrix(q) * convolution_matrix(q.conj()).T
        weight = 1.0 / np.multiply.outer(kappa - 1j * xi, kappa + 1j * xi)
        return float(np.sum(prod * weight).real)
    raise DomainError(f"unknown method {method!r}")


def akns_trace_closed_form(q: FourierField, kappa: float) -> float:
    """L·coth(κL/2)·Σ 2κ|q̂|²/(4κ² + ξ²), the circle value of the AKNS trace."""
    _check_kappa(kappa)
    L = q.grid.period
    power = np.abs(q.coeffs) ** 2
    return float(L / np.tanh(kappa * L / 2)
                 * np.sum(2 * kappa * power / (4 * kappa ** 2 + q.grid.xi ** 2)))


def akns_trace_line(qhat: Callable[[float], complex], kappa: float) -> float:
    """∫ 2κ|q̂(ξ)|²/(4κ² + ξ²) dξ for a line profile given by its transform."""
    _check_kappa(kappa)
    val, _ = integrate.quad(lambda s: 2 * kappa * abs(qhat(s)) ** 2 / (4 * kappa ** 2 + s ** 2),
                            -np.inf, np.inf, epsabs=0, epsrel=1e-12, limit=400)
    return val


def perturbed_sandwich(q_ref: FourierField, delta_q: FourierField, kappa: float,
                       floor: float = 1e-12) -> np.ndarray:
    """H^{-1/2} δq H^{-1/2} with H = -∂² + q_ref + κ² on the retained modes."""
    _check_kappa(kappa)
    if q_ref.grid != delta_q.grid:
        raise ConfigurationError("fields live on different grids")
    h = np.diag(q_ref.grid.xi ** 2 + kappa ** 2).astype(complex) + convolution_matrix(q_ref)
    h = 0.5 * (h + h.conj().T)
    evals, evecs = np.linalg.eigh(h)
    if evals[0] <= floor:
        raise DomainError(f"-∂² + q + κ² is not positive definite: minimal eigenvalue {evals[0]:.3e}")
    inv_sqrt = (evecs * evals ** -0.5) @ evecs.conj().T
    out = inv_sqrt @ convolution_matrix(delta_q) @ inv_sqrt
    return 0.5 * (out + out.conj().T)


def reflect_matrix(m: np.ndarray) -> np.ndarray:
    """Conjugation by x -> -x: entries (m, n) -> (-m, -n)."""
    return np.asarray(m)[::-1, ::-1]


# -- conservation identities -------------------------------------------------

def kdv_identities(q: FourierField, kappa: float) -> dict[str, tuple[complex, complex]]:
    """(lhs, rhs) pairs of the trace identities behind conservation under KdV.

    Traces run over all modes.  The fields q''' and 6qq' must be exactly
    representable, so q should be band-limited to half the mode cutoff.
    """
    q3 = derivative(q, 3)
    flux = 6 * multiply(q, derivative(q, 1))
    out = {"kdv_eyepiece": (cyclic_trace([("R", flux)], kappa), 0j)}
    for ell in (2, 3):
        lhs = cyclic_trace([("R", q)] * (ell - 1) + [("R", -q3)], kappa)
        rhs = cyclic_trace([("R", q)] * (ell - 2) + [("R", flux)], kappa)
        out[f"kdv_telescope_{ell}"] = (lhs, rhs)
    return out


def akns_identities(q: FourierField, kappa: float) -> dict[str, tuple[complex, complex]]:
    """(lhs, rhs) pairs of the trace identities behind conservation under NLS
    and complex mKdV, at first order in the series.

    q may be complex; the cubic terms need q band-limited to a third of the
    mode cutoff.
    """
    qb = q.conj()
    q1, qb1 = derivative(q, 1), derivative(qb, 1)
    q2, qb2 = derivative(q, 2), derivative(qb, 2)
    q3, qb3 = derivative(q, 3), derivative(qb, 3)
    mod2 = multiply(q, qb)
    gamma = [("Am", q), ("Ap", qb)]

    def pair(f, g):
        return [("Am", f), ("Ap", g)]

    def tr(factors):
        return cyclic_trace(factors, kappa)

    out = {}
    out["nls_head"] = (tr(pair(q2, qb)) - tr(pair(q, qb2)), 0j)
    # this first-order identity closes with the cubic terms entering with
    # signs (-, +)
    lhs = tr(gamma + pair(q2, qb)) - tr(gamma + pair(q, qb2))
    rhs = -tr(pair(2 * multiply(mod2, q), qb)) + tr(pair(q, 2 * multiply(mod2, qb)))
    out["nls_telescope_1"] = (lhs, rhs)
    out["hirota_head"] = (tr(pair(q3, qb)) + tr(pair(q, qb3)), 0j)
    lhs = tr(gamma + pair(q3, qb)) + tr(gamma + pair(q, qb3))
    rhs = -tr(pair(6 * multiply(mod2, q1), qb)) - tr(pair(q, 6 * multiply(mod2, qb1)))
    out["hirota_telescope_1"] = (lhs, rhs)
    return out
