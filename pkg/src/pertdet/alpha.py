"""
The renormalized log-determinant α(κ; q) and the quantities built around it.

KdV family:   α = Σ_{ℓ>=2} (-1)^ℓ tr(A^ℓ)/ℓ = -log det₂(1 + A),  A = √R q √R.
AKNS family:  α = Re Σ_{ℓ>=1} (∓1)^{ℓ-1} tr(B^ℓ)/ℓ,
              B = (κ-∂)^{-1/2} q (κ+∂)^{-1} q̄ (κ-∂)^{-1/2}.

Series are truncated once the geometric tail bound built from the
Hilbert-Schmidt norm falls below the requested tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DivergenceError, DomainError
from .lattice import cyclic_trace
from .operators import akns_half_blocks, build_sandwich, hs_closed_form
from .spectral import FourierField, sobolev_norm, synthesize

__all__ = [
    "AlphaReport",
    "DReport",
    "FallacyResult",
    "series_tail_bound",
    "alpha_kdv_series",
    "alpha_kdv_det2",
    "det2_log",
    "alpha_akns",
    "akns_gate_integral",
    "kappa_gate",
    "d_diagnostic",
    "fallacy_log_det",
]

KDV_GATE = 1.0 / 3.0
AKNS_GATE = 1.0 / 3.0


@dataclass(frozen=True)
class AlphaReport:
    value: float
    leading: float
    hs: float
    terms_used: int
    tail_bound: float
    converged: bool
    imag_residual: float = 0.0


def series_tail_bound(ratio: float, terms_used: int) -> float:
    """Σ_{ℓ > terms_used} ratio^ℓ / ℓ for 0 <= ratio < 1."""
    if ratio < 0 or ratio >= 1:
        return np.inf
    if ratio == 0:
        return 0.0
    total = 0.0
    ell = terms_used + 1
    term = ratio ** ell / ell
    while term > 0 and term > 1e-18 * total:
        total += term
        ell += 1
        term = ratio ** ell / ell
        if ell > terms_used + 100000:
            break
    return total


def alpha_kdv_series(q: FourierField, kappa: float, tol: float = 1e-13,
                     max_terms: int = 200) -> AlphaReport:
    """Σ_{ℓ>=2} (-1)^ℓ tr(A^ℓ)/ℓ on the box matrix of A = √R q √R."""
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    a = build_sandwich(q, kappa).entries
    hs = float(np.linalg.norm(a))
    if hs >= 1:
        raise DivergenceError(f"Hilbert-Schmidt norm {hs:.4g} >= 1; the series diverges")
    power = a @ a
    leading = 0.5 * float(np.trace(power).real)
    total = 0j
    ell = 1
    tail = series_tail_bound(hs, 1)
    while ell < max_terms and tail > tol:
        ell += 1
        if ell > 2:
            power = power @ a
        total += (-1) ** ell * np.trace(power) / ell
        tail = series_tail_bound(hs, ell)
    converged = hs < KDV_GATE and tail <= tol
    return AlphaReport(float(total.real), leading, hs, ell, tail, converged,
                       float(abs(total.imag)))


def det2_log(eigenvalues) -> float:
    """-log det₂(1 + A) = -Σ[log(1 + λ) - λ] for self-adjoint A."""
    lam = np.asarray(eigenvalues, dtype=float)
    bad = lam[lam <= -1]
    if bad.size:
        raise DomainError(f"eigenvalue {bad.min():.6g} <= -1: 1 + A is not invertible-positive")
    return float(-np.sum(np.log1p(lam) - lam))


def alpha_kdv_det2(q: FourierField, kappa: float) -> float:
    """α through the eigenvalues of the Hermitian box matrix of √R q √R."""
    if not q.real_valued:
        raise DomainError("the determinant path needs real q (self-adjoint A)")
    a = build_sandwich(q, kappa).entries
    return det2_log(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))


def alpha_akns(q: FourierField, kappa: float, sign: int = 1, tol: float = 1e-13,
               max_terms: int = 200, gate: float = AKNS_GATE) -> AlphaReport:
    """Re Σ_{ℓ>=1} (∓1)^{ℓ-1} tr(B^ℓ)/ℓ; ``sign=+1`` selects the upper sign.

    The ℓ = 1 trace is summed over all modes; higher powers use the box
    matrices.  ``hs`` is the Frobenius norm of the half block, so that
    |tr B^ℓ| <= hs^{2ℓ}.
    """
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    upper, lower = akns_half_blocks(q, kappa)
    hs = float(np.linalg.norm(upper))
    ratio = hs ** 2
    if ratio >= 1:
        raise DivergenceError(f"half-block norm² {ratio:.4g} >= 1; the series diverges")
    first = cyclic_trace([("Am", q), ("Ap", q.conj())], kappa)
    total = complex(first)
    b = upper @ lower
    power = b
    coeff = -sign
    ell = 1
    tail = series_tail_bound(ratio, 1)
    while ell < max_terms and tail > tol:
        ell += 1
        power = power @ b
        total += coeff ** (ell - 1) * np.trace(power) / ell
        tail = series_tail_bound(ratio, ell)
    converged = ratio < gate and tail <= tol
    return AlphaReport(float(total.real), float(first.real), hs, ell, tail, converged,
                       float(abs(total.imag)))


def akns_gate_integral(q: FourierField, kappa: float) -> float:
    """L·Σ log(4 + ξ²/κ²)|q̂|²/√(4κ² + ξ²), the size functional of the AKNS series."""
    xi = q.grid.xi
    return float(q.grid.period * np.sum(np.log(4 + xi ** 2 / kappa ** 2)
                                        * np.abs(q.coeffs) ** 2 / np.sqrt(4 * kappa ** 2 + xi ** 2)))


def kappa_gate(q: FourierField, purpose: str, gate: float = AKNS_GATE) -> float:
    """Smallest admissible κ for ``purpose``.

    kdv_conserve: 1 + 45‖q‖²_{H^{-1}};  kdv_bound: 1 + 90‖q‖²_{H^{-1}};
    akns: smallest power of two with akns_gate_integral < gate.
    """
    if purpose == "kdv_conserve":
        return 1.0 + 45.0 * sobolev_norm(q, -1) ** 2
    if purpose == "kdv_bound":
        return 1.0 + 90.0 * sobolev_norm(q, -1) ** 2
    if purpose == "akns":
        kappa = 1.0
        # the functional decays at least like 1/κ, so this terminates
        while akns_gate_integral(q, kappa) >= gate:
            kappa *= 2.0
        return kappa
    raise DomainError(f"unknown purpose {purpose!r}")


@dataclass(frozen=True)
class DReport:
    value: float
    kappa: float
    dest1: dict = field(default_factory=dict)
    dest2: float = 0.0


def _sup_norm(q: FourierField) -> float:
    # fine sampling is enough for the envelope; it is not a bound-critical step
    fine = np.linspace(0, q.grid.period, 8 * q.grid.sample_count, endpoint=False)
    return float(np.max(np.abs(synthesize(q, fine))))


def d_diagnostic(q_t: FourierField, q_0: FourierField, kappa: float) -> DReport:
    """D = κ³|tr A(t)² - tr A(0)²| with envelope values for trend inspection.

    dest1[σ] = κ^{-3/2-3σ}‖q(0)‖³_{H^σ} for σ in {-1, 0};
    dest2 = κ^{-2}(‖q(t)‖_∞ + ‖q(0)‖_∞)‖q(0)‖²_{L²}.
    """
    if q_t.grid != q_0.grid:
        raise DomainError("fields live on different grids")
    # tr A² = ‖A‖²_HS for real q, evaluated over all modes
    value = kappa ** 3 * abs(hs_closed_form(q_t, kappa) - hs_closed_form(q_0, kappa))
    dest1 = {s: kappa ** (-1.5 - 3 * s) * sobolev_norm(q_0, s) ** 3 for s in (-1.0, 0.0)}
    l2_sq = q_0.grid.period * float(np.sum(np.abs(q_0.coeffs) ** 2))
    dest2 = kappa ** -2 * (_sup_norm(q_t) + _sup_norm(q_0)) * l2_sq
    return DReport(float(value), kappa, dest1, dest2)


@dataclass(frozen=True)
class FallacyResult:
    t: float
    log_det: float
    log_det_cholesky: float


def _dirichlet_diagonals(x: np.ndarray, h: float, potential: np.ndarray, kappa: float):
    main = 2.0 / h ** 2 + potential + kappa ** 2
    off = np.full(x.size - 1, -1.0 / h ** 2)
    return main, off


def fallacy_log_det(times, kappa: float = 8.0, n_points: int = 2048,
                    half_width: float = 40.0, profile=None) -> list[FallacyResult]:
    """log det(1 + H^{-1/2}(q(t) - q(0))H^{-1/2}) for the translation q(t,x) = v(x + t).

    H = -∂² + q(0) + κ² is discretized by second differences with Dirichlet
    conditions on n_points interior nodes of [-half_width, half_width];
    v defaults to -tanh.  The value is computed from the spectrum of the
    sandwiched matrix and, independently, as log det(H + δq) - log det H by
    banded Cholesky factorization.
    """
    if profile is None:
        profile = lambda s: -np.tanh(s)
    h = 2 * half_width / (n_points + 1)
    x = -half_width + h * np.arange(1, n_points + 1)
    v0 = profile(x)
    main, off = _dirichlet_diagonals(x, h, v0, kappa)
    evals, evecs = linalg.eigh_tridiagonal(main, off)
    if evals[0] <= 1e-12:
        raise DomainError(f"Dirichlet operator not positive definite: {evals[0]:.3e}")
    inv_sqrt = (evecs * evals ** -0.5) @ evecs.T
    logdet_ref = _banded_logdet(main, off)
    results = []
    for t in times:
        dq = profile(x + t) - v0
        sandwich = inv_sqrt @ (dq[:, None] * inv_sqrt)
        mu = np.linalg.eigvalsh(0.5 * (sandwich + sandwich.T))
        if np.any(mu <= -1):
            raise DomainError("1 + sandwich is not positive definite")
        log_det = float(np.sum(np.log1p(mu)))
        chol = _banded_logdet(main + dq, off) - logdet_ref
        results.append(FallacyResult(float(t), log_det, float(chol)))
    return results


def _banded_logdet(main: np.ndarray, off: np.ndarray) -> float:
    ab = np.zeros((2, main.size))
    ab[0, 1:] = off
    ab[1] = main
    factor = linalg.cholesky_banded(ab, lower=False)
    return float(2 * np.sum(np.log(factor[1])))
