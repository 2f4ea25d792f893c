"""
Truncated Fourier representation of functions on a torus of length L.

Conventions
-----------
For a function q on [0, L) the coefficients are

    q̂(ξ_n) = (1/L) ∫_0^L e^{-iξ_n x} q(x) dx,      ξ_n = 2πn/L,

so that q(x) = Σ_n q̂(ξ_n) e^{iξ_n x} and Plancherel reads
∫|q|² dx = L Σ|q̂|².  For L = 1 these are the usual circle conventions.

Only modes |n| <= N_max are retained.  Coefficients are stored in a flat
array of length 2N_max + 1, entry ``n + N_max`` holding mode n.  Nonlinear
products are evaluated on an M-point physical grid with M >= 4N_max + 1,
which makes quadratic and cubic products of retained modes alias-free
before truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "TorusGrid",
    "FourierField",
    "analyze",
    "synthesize",
    "derivative",
    "multiply",
    "sobolev_norm",
]


@dataclass(frozen=True)
class TorusGrid:
    """Torus [0, period) with retained modes |n| <= mode_cutoff.

    ``sample_count`` defaults to 4 * mode_cutoff + 1, the smallest value that
    keeps cubic products alias-free.
    """

    period: float = 1.0
    mode_cutoff: int = 32
    sample_count: int = 0

    def __post_init__(self):
        if not np.isfinite(self.period) or self.period <= 0:
            raise ConfigurationError(f"period must be positive, got {self.period}")
        if int(self.mode_cutoff) != self.mode_cutoff or self.mode_cutoff < 1:
            raise ConfigurationError(f"mode_cutoff must be an integer >= 1, got {self.mode_cutoff}")
        object.__setattr__(self, "mode_cutoff", int(self.mode_cutoff))
        if self.sample_count == 0:
            object.__setattr__(self, "sample_count", 4 * self.mode_cutoff + 1)
        if self.sample_count < 4 * self.mode_cutoff + 1:
            raise ConfigurationError(
                f"sample_count={self.sample_count} < 4*mode_cutoff+1={4 * self.mode_cutoff + 1}"
            )

    @property
    def size(self) -> int:
        """Number of retained modes, 2N_max + 1."""
        return 2 * self.mode_cutoff + 1

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.mode_cutoff, self.mode_cutoff + 1)

    @property
    def xi(self) -> np.ndarray:
        """Frequencies ξ_n = 2πn/L of the retained modes."""
        return 2 * np.pi * self.modes / self.period

    @property
    def xi_max(self) -> float:
        return 2 * np.pi * self.mode_cutoff / self.period

    @property
    def points(self) -> np.ndarray:
        """The M equispaced sample points in [0, L)."""
        return self.period * np.arange(self.sample_count) / self.sample_count

    @property
    def spacing(self) -> float:
        return self.period / self.sample_count


@dataclass(frozen=True, eq=False)
class FourierField:
    """Truncated Fourier series on a :class:`TorusGrid`."""

    grid: TorusGrid
    coeffs: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.size,):
            raise ConfigurationError(
                f"expected {self.grid.size} coefficients, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ConfigurationError("coefficients must be finite")
        if self.real_valued:
            c = 0.5 * (c + np.conj(c[::-1]))
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeros(cls, grid: TorusGrid, real_valued: bool = True) -> "FourierField":
        return cls(grid, np.zeros(grid.size, complex), real_valued)

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict, real_valued: bool | None = None) -> "FourierField":
        """Build a field from ``{n: coefficient}``; unlisted modes are zero."""
        c = np.zeros(grid.size, complex)
        for n, value in modes.items():
            if abs(n) > grid.mode_cutoff:
                raise ConfigurationError(f"mode {n} exceeds cutoff {grid.mode_cutoff}")
            c[n + grid.mode_cutoff] = value
        if real_valued is None:
            real_valued = bool(np.array_equal(c, np.conj(c[::-1])))
        return cls(grid, c, real_valued)

    @classmethod
    def from_function(cls, grid: TorusGrid, func: Callable[[np.ndarray], np.ndarray],
                      real_valued: bool | None = None) -> "FourierField":
        """Interpolate ``func`` on the physical grid and truncate."""
        samples = np.asarray(func(grid.points))
        if real_valued is None:
            real_valued = not np.iscomplexobj(samples)
        return analyze(samples, grid, real_valued=real_valued)

    # -- accessors --------------------------------------------------------

    def coeff(self, n: int) -> complex:
        if abs(n) > self.grid.mode_cutoff:
            return 0j
        return complex(self.coeffs[n + self.grid.mode_cutoff])

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi

    def bandwidth(self, atol: float = 0.0) -> int:
        """Largest |n| with |q̂_n| > atol (0 for the zero field)."""
        nz = np.nonzero(np.abs(self.coeffs) > atol)[0]
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(nz - self.grid.mode_cutoff)))

    def values(self) -> np.ndarray:
        """Samples on ``grid.points``."""
        return synthesize(self)

    # -- algebra ----------------------------------------------------------

    def _check(self, other: "FourierField"):
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, FourierField):
            self._check(other)
            return FourierField(self.grid, self.coeffs + other.coeffs,
                                self.real_valued and other.real_valued)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FourierField):
            self._check(other)
            return FourierField(self.grid, self.coeffs - other.coeffs,
                                self.real_valued and other.real_valued)
        return NotImplemented

    def __neg__(self):
        return FourierField(self.grid, -self.coeffs, self.real_valued)

    def __mul__(self, scalar):
        if isinstance(scalar, FourierField):
            return multiply(self, scalar)
        scalar = complex(scalar)
        real = self.real_valued and scalar.imag == 0
        return FourierField(self.grid, scalar * self.coeffs, real)

    __rmul__ = __mul__

    def conj(self) -> "FourierField":
        """Coefficients of the complex conjugate function."""
        return FourierField(self.grid, np.conj(self.coeffs[::-1]), self.real_valued)

    def reflect(self) -> "FourierField":
        """x -> -x."""
        return FourierField(self.grid, self.coeffs[::-1].copy(), self.real_valued)

    def translate(self, shift: float) -> "FourierField":
        """x -> q(x - shift)."""
        phase = np.exp(-1j * self.grid.xi * shift)
        return FourierField(self.grid, self.coeffs * phase, self.real_valued)

    def l2_coeff_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


def _to_fft_order(field: FourierField) -> np.ndarray:
    grid = field.grid
    full = np.zeros(grid.sample_count, complex)
    full[grid.modes % grid.sample_count] = field.coeffs
    return full


def analyze(samples, grid: TorusGrid, real_valued: bool | None = None) -> FourierField:
    """Coefficients of the trigonometric interpolant of ``samples``, truncated."""
    samples = np.asarray(samples)
    if samples.shape != (grid.sample_count,):
        raise ConfigurationError(
            f"got {samples.shape[0] if samples.ndim else 0} samples, grid expects {grid.sample_count}"
        )
    if real_valued is None:
        real_valued = not np.iscomplexobj(samples)
    if real_valued:
        samples = np.real(samples)
    spectrum = np.fft.fft(samples) / grid.sample_count
    return FourierField(grid, spectrum[grid.modes % grid.sample_count], real_valued)


def synthesize(field: FourierField, points=None) -> np.ndarray:
    """Evaluate Σ q̂_n e^{iξ_n x}; on the grid samples when ``points`` is None."""
    if points is None:
        values = np.fft.ifft(_to_fft_order(field)) * field.grid.sample_count
    else:
        x = np.asarray(points, dtype=float)
        values = np.exp(1j * np.multiply.outer(x, field.grid.xi)) @ field.coeffs
    if field.real_valued:
        return np.real(values)
    return values


def derivative(field: FourierField, order: int = 1) -> FourierField:
    if order < 0:
        raise ConfigurationError("derivative order must be nonnegative")
    mult = (1j * field.grid.xi) ** order
    return FourierField(field.grid, mult * field.coeffs, field.real_valued)


def multiply(f: FourierField, g: FourierField) -> FourierField:
    """Pointwise product on the physical grid, truncated to the retained band."""
    if f.grid != g.grid:
        raise ConfigurationError("fields live on different grids")
    prod = synthesize(f) * synthesize(g)
    return analyze(prod, f.grid, real_valued=f.real_valued and g.real_valued)


def sobolev_norm(field: FourierField, s: float) -> float:
    """‖f‖_{H^s} = (Σ (1+ξ²)^s |q̂(ξ)|²)^{1/2}, counting measure on the modes."""
    weights = (1.0 + field.grid.xi ** 2) ** s
    return float(np.sqrt(np.sum(weights * np.abs(field.coeffs) ** 2)))
