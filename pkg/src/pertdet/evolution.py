"""
Pseudo-spectral time stepping for KdV, NLS, real mKdV and Hirota (complex
mKdV) on the torus.

Flows, in the sign conventions used throughout the package:

    kdv              q_t = -q''' + 6 q q'
    nls_plus/minus   -i q_t = -q'' ± 2|q|² q
    mkdv_real_±      q_t = -q''' ± 6 q² q'
    hirota_±         q_t = -q''' ± 6|q|² q'

Each flow is split as q̂_t = λ(ξ) q̂ + N(q)^ with the stiff linear symbol λ
treated exactly (ETDRK4 or integrating-factor RK4) and the nonlinearity
evaluated on the dealiased physical grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BlowUpError, ConfigurationError, ConsistencyError
from .spectral import FourierField, TorusGrid, multiply

__all__ = [
    "FLAVORS",
    "FlowSpec",
    "Trajectory",
    "default_dt",
    "evolve",
    "classical_invariants",
    "reflect_for_reversal",
]

FLAVORS = ("kdv", "nls_plus", "nls_minus", "mkdv_real_plus", "mkdv_real_minus",
           "hirota_plus", "hirota_minus")
SCHEMES = ("etdrk4", "integrating_factor_rk4")
REAL_FLAVORS = ("kdv", "mkdv_real_plus", "mkdv_real_minus")
CONTOUR_POINTS = 64


def default_dt(grid: TorusGrid, scale: float = 1.0) -> float:
    return scale * min(1e-4, 0.5 / grid.xi_max)


@dataclass(frozen=True)
class FlowSpec:
    """``snapshot_every`` counts steps between stored snapshots (0: endpoints only)."""

    flavor: str
    dt: float
    T: float
    grid: TorusGrid
    scheme: str = "etdrk4"
    snapshot_every: int = 0

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ConfigurationError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.T) and self.T >= 0):
            raise ConfigurationError(f"T must be nonnegative, got {self.T}")
        if self.snapshot_every < 0:
            raise ConfigurationError("snapshot_every must be nonnegative")

    @property
    def steps(self) -> int:
        """Number of fixed steps; the step is shortened slightly if dt does not divide T."""
        return int(math.ceil(self.T / self.dt - 1e-9)) if self.T > 0 else 0

    @property
    def real(self) -> bool:
        return self.flavor in REAL_FLAVORS


@dataclass
class Trajectory:
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.snapshots]

    @property
    def final(self) -> FourierField:
        return self.snapshots[-1][1]


class _Transform:
    """Coefficient array <-> samples on the M-point grid."""

    def __init__(self, grid: TorusGrid):
        self.M = grid.sample_count
        self.idx = grid.modes % self.M
        self.xi = grid.xi

    def to_phys(self, c):
        full = np.zeros(self.M, complex)
        full[self.idx] = c
        return np.fft.ifft(full) * self.M

    def from_phys(self, u):
        return np.fft.fft(u)[self.idx] / self.M

    # real fields: only the nonnegative half of the spectrum is transformed
    def to_phys_real(self, c):
        n = (c.size - 1) // 2
        half = np.zeros(self.M // 2 + 1, complex)
        half[: n + 1] = c[n:]
        return np.fft.irfft(half, n=self.M) * self.M

    def from_phys_real(self, u):
        n = (self.idx.size - 1) // 2
        half = np.fft.rfft(u)[: n + 1] / self.M
        return np.concatenate([np.conj(half[:0:-1]), half])


def _flow_terms(flavor: str, grid: TorusGrid):
    tr = _Transform(grid)
    xi = grid.xi
    ik = 1j * xi
    if flavor == "kdv":
        lin = 1j * xi ** 3

        def nonlin(c):
            u = tr.to_phys_real(c)
            return 3 * ik * tr.from_phys_real(u * u)
    elif flavor.startswith("mkdv_real"):
        lin = 1j * xi ** 3
        sgn = 1.0 if flavor.endswith("plus") else -1.0

        def nonlin(c):
            u = tr.to_phys_real(c)
            return sgn * 2 * ik * tr.from_phys_real(u * u * u)
    elif flavor.startswith("nls"):
        lin = 1j * xi ** 2
        sgn = 1.0 if flavor.endswith("plus") else -1.0

        def nonlin(c):
            u = tr.to_phys(c)
            return sgn * 2j * tr.from_phys((u.real ** 2 + u.imag ** 2) * u)
    else:
        lin = 1j * xi ** 3
        sgn = 1.0 if flavor.endswith("plus") else -1.0

        def nonlin(c):
            u = tr.to_phys(c)
            du = tr.to_phys(ik * c)
            return sgn * 6 * tr.from_phys((u.real ** 2 + u.imag ** 2) * du)
    return lin, nonlin


def _etdrk4_coefficients(lin: np.ndarray, dt: float):
    """φ-function weights by averaging over a circle of radius 1 around each dt·λ."""
    roots = np.exp(2j * np.pi * (np.arange(CONTOUR_POINTS) + 0.5) / CONTOUR_POINTS)
    lr = dt * lin[:, None] + roots[None, :]
    e_lr = np.exp(lr)
    q = dt * np.mean((np.exp(lr / 2) - 1) / lr, axis=1)
    f1 = dt * np.mean((-4 - lr + e_lr * (4 - 3 * lr + lr ** 2)) / lr ** 3, axis=1)
    f2 = dt * np.mean((2 + lr + e_lr * (lr - 2)) / lr ** 3, axis=1)
    f3 = dt * np.mean((-4 - 3 * lr - lr ** 2 + e_lr * (4 - lr)) / lr ** 3, axis=1)
    return np.exp(dt * lin), np.exp(dt * lin / 2), q, f1, f2, f3


def _stepper(lin, nonlin, dt, scheme):
    if scheme == "etdrk4":
        e, e2, q, f1, f2, f3 = _etdrk4_coefficients(lin, dt)

        def step(v):
            nv = nonlin(v)
            a = e2 * v + q * nv
            na = nonlin(a)
            b = e2 * v + q * na
            nb = nonlin(b)
            c = e2 * a + q * (2 * nb - nv)
            nc = nonlin(c)
            return e * v + nv * f1 + 2 * (na + nb) * f2 + nc * f3
        return step

    e, e2 = np.exp(dt * lin), np.exp(dt * lin / 2)

    def step(v):
        k1 = dt * nonlin(v)
        k2 = dt * nonlin(e2 * (v + k1 / 2))
        k3 = dt * nonlin(e2 * v + k2 / 2)
        k4 = dt * nonlin(e * v + e2 * k3)
        return e * v + (e * k1 + 2 * e2 * (k2 + k3) + k4) / 6
    return step


def _hermitian_defect(v: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(v))), 1e-300)
    return float(np.max(np.abs(v - np.conj(v[::-1])))) / scale


def evolve(q0: FourierField, spec: FlowSpec,
           diagnostics: Callable[[float, FourierField], dict] | None = None) -> Trajectory:
    """Advance q0 under ``spec``; snapshots always include t = 0 and t = T."""
    if q0.grid != spec.grid:
        raise ConfigurationError("initial data and flow spec use different grids")
    if spec.real and not q0.real_valued:
        raise ConfigurationError(f"flavor {spec.flavor} needs real-valued initial data")
    lin, nonlin = _flow_terms(spec.flavor, spec.grid)
    n = spec.steps
    dt = spec.T / n if n else spec.dt
    step = _stepper(lin, nonlin, dt, spec.scheme)

    traj = Trajectory()

    def record(t, coeffs):
        f = FourierField(spec.grid, coeffs, spec.real)
        traj.snapshots.append((t, f))
        if diagnostics is not None:
            traj.diagnostics.append(diagnostics(t, f))

    v = np.array(q0.coeffs, dtype=complex)
    record(0.0, v)
    for k in range(1, n + 1):
        v = step(v)
        if not np.all(np.isfinite(v)):
            raise BlowUpError(f"non-finite coefficients at step {k}", (k - 1) * dt)
        if spec.real:
            defect = _hermitian_defect(v)
            if defect > 1e-8:
                raise ConsistencyError(f"real flow lost Hermitian symmetry (defect {defect:.2e})")
            v = 0.5 * (v + np.conj(v[::-1]))
        if k == n or (spec.snapshot_every and k % spec.snapshot_every == 0):
            record(k * dt, v.copy())
    return traj


def classical_invariants(q: FourierField) -> tuple:
    """(∫q, ∫|q|², ∫½q'² + q³); the energy is None for complex fields."""
    L = q.grid.period
    mass = L * q.coeff(0)
    l2 = L * float(np.sum(np.abs(q.coeffs) ** 2))
    if not q.real_valued:
        return mass, l2, None
    kinetic = 0.5 * L * float(np.sum(q.grid.xi ** 2 * np.abs(q.coeffs) ** 2))
    cubic = L * multiply(multiply(q, q), q).coeff(0).real
    return mass.real, l2, kinetic + cubic


def reflect_for_reversal(q: FourierField, flavor: str) -> FourierField:
    """Data whose forward evolution retraces the backward evolution of q.

    KdV, real mKdV and Hirota are invariant under (t, x) -> (-t, -x), so the
    reflected field is used; NLS is invariant under t -> -t combined with
    complex conjugation.
    """
    if flavor in REAL_FLAVORS or flavor.startswith("hirota"):
        return q.reflect()
    if flavor.startswith("nls"):
        return q.conj()
    raise ConfigurationError(f"unknown flavor {flavor!r}")
