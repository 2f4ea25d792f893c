"""
Exact traces of cyclic operator products over the full Fourier lattice.

For band-limited symbols f_1..f_r and Fourier multipliers D_1..D_r built
from the resolvent-type symbols

    "R"   1/(ξ² + κ²)        (free Schrödinger resolvent)
    "Am"  1/(κ - iξ)          ((κ - ∂)^{-1})
    "Ap"  1/(κ + iξ)          ((κ + ∂)^{-1})
    "I"   1                   (identity)

the trace  tr{D_1 M(f_1) D_2 M(f_2) ... D_r M(f_r)}  on L²(R/LZ) is a finite
sum over shift tuples (d_1..d_r), Σd = 0, of Π f̂_i(d_i) times a lattice sum
Σ_{n∈Z} of a rational function of n.  The lattice sums are evaluated by the
residue theorem against π cot(πz), so no truncation of the mode index is
involved.  All poles sit at (integer) ± iκL/2π, where cot is evaluated as
∓i coth(κL/2) without overflow.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DomainError
from .spectral import FourierField

__all__ = ["cyclic_trace", "lattice_sum"]

_KINDS = ("R", "Am", "Ap", "I")


def _symbol_poles(kind: str, beta: float, c: float):
    """(prefactor, [(pole, multiplicity-1 entries)]) with symbol = pref / Π(m - p)."""
    if kind == "R":
        return 1.0 / c ** 2, [1j * beta, -1j * beta]
    if kind == "Am":
        return 1j / c, [-1j * beta]
    if kind == "Ap":
        return -1j / c, [1j * beta]
    if kind == "I":
        return 1.0, []
    raise DomainError(f"unknown multiplier kind {kind!r}; expected one of {_KINDS}")


def _cot_series(z0: complex, order: int) -> np.ndarray:
    """Taylor coefficients of π cot(π(z0 + ε)) up to ε^order."""
    # z0 = integer + i y: cot(π z0) = cot(iπy) = -i coth(πy)
    y = z0.imag
    w = -1j / np.tanh(np.pi * y) if y != 0 else np.inf
    if not np.isfinite(w):
        raise DomainError("lattice sum has a pole on the real integer lattice")
    u = np.zeros(order + 1, complex)
    u[0] = w
    # u' = -π(1 + u²)
    for j in range(order):
        conv = np.dot(u[: j + 1], u[j::-1])
        u[j + 1] = -np.pi * ((1.0 if j == 0 else 0.0) + conv) / (j + 1)
    return np.pi * u


def _inv_power_series(a: complex, m: int, order: int) -> np.ndarray:
    """Taylor coefficients of (a + ε)^{-m} up to ε^order."""
    coeffs = np.empty(order + 1, complex)
    coeffs[0] = a ** (-m)
    for j in range(1, order + 1):
        coeffs[j] = coeffs[j - 1] * (-(m + j - 1)) / (j * a)
    return coeffs


def _series_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.convolve(x, y)[: len(x)]


def lattice_sum(poles: Sequence[complex], keys: Sequence[tuple]) -> complex:
    """Σ_{n∈Z} Π_j 1/(n - poles[j]).

    ``keys`` identify coincident poles exactly (integer offset, sign, κ index)
    so that grouping never depends on floating-point comparisons.  At least two
    poles are required for absolute convergence.
    """
    if len(poles) < 2:
        raise DomainError("lattice sum needs at least two poles to converge")
    groups: dict = {}
    for z, key in zip(poles, keys):
        if key in groups:
            groups[key][1] += 1
        else:
            groups[key] = [z, 1]
    items = list(groups.values())
    total = 0j
    for i, (z0, m) in enumerate(items):
        order = m - 1
        series = _cot_series(z0, order)
        for j, (zk, mk) in enumerate(items):
            if j != i:
                series = _series_mul(series, _inv_power_series(z0 - zk, mk, order))
        total -= series[order]
    return total


def _simple_pole_sums(poles: np.ndarray) -> np.ndarray:
    """Vectorised lattice sums for rows whose poles are pairwise distinct."""
    diff = poles[:, :, None] - poles[:, None, :]
    idx = np.arange(poles.shape[1])
    diff[:, idx, idx] = 1.0
    residues = 1.0 / np.prod(diff, axis=2)
    cot = -1j / np.tanh(np.pi * poles.imag)
    return -np.pi * np.sum(cot * residues, axis=1)


def cyclic_trace(factors: Sequence[tuple[str, FourierField]], kappa: float,
                 atol: float = 0.0) -> complex:
    """tr{D_1 M(f_1) ... D_r M(f_r)} over the full lattice of modes.

    ``factors`` is a sequence of ``(kind, field)`` pairs; the multiplier of
    kind ``kind`` stands to the left of multiplication by ``field``.  Modes of
    each field with |f̂| <= atol are ignored.
    """
    if kappa <= 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    if not factors:
        raise DomainError("empty product")
    grid = factors[0][1].grid
    L = grid.period
    c = 2 * np.pi / L
    beta = kappa / c
    N = grid.mode_cutoff

    prefactor = 1.0 + 0j
    pole_template = []  # (factor index, pole, sign)
    for i, (kind, f) in enumerate(factors):
        if f.grid != grid:
            raise DomainError("all fields must share one grid")
        pref, poles = _symbol_poles(kind, beta, c)
        prefactor *= pref
        for p in poles:
            pole_template.append((i, p, int(np.sign(p.imag))))
    if len(pole_template) < 2:
        raise DomainError("product needs at least two resolvent poles to be trace class")

    supports = []
    for _, f in factors:
        nz = np.nonzero(np.abs(f.coeffs) > atol)[0]
        if nz.size == 0:
            return 0j
        supports.append((nz - N, f.coeffs[nz]))

    # enumerate shift tuples with Σd = 0; the last shift is determined
    r = len(factors)
    head = [s[0] for s in supports[:-1]]
    if head:
        mesh = np.stack(np.meshgrid(*head, indexing="ij"), axis=-1).reshape(-1, r - 1)
    else:
        mesh = np.zeros((1, 0), dtype=int)
    last = -mesh.sum(axis=1)
    last_modes, last_vals = supports[-1]
    ok = np.abs(last) <= N
    mesh, last = mesh[ok], last[ok]
    lookup_mask = np.zeros(2 * N + 1, bool)
    lookup_mask[last_modes + N] = True
    keep = lookup_mask[last + N]
    mesh, last = mesh[keep], last[keep]
    if mesh.shape[0] == 0:
        return 0j
    lookup = np.zeros(2 * N + 1, complex)
    lookup[last_modes + N] = last_vals
    shifts = np.concatenate([mesh, last[:, None]], axis=1)

    weights = lookup[last + N].copy()
    for i in range(r - 1):
        vals = np.zeros(2 * N + 1, complex)
        vals[supports[i][0] + N] = supports[i][1]
        weights *= vals[shifts[:, i] + N]

    # multiplier i acts on index n_{i-1} = n_0 - (d_1 + ... + d_{i-1})
    offsets = np.concatenate([np.zeros((shifts.shape[0], 1), int),
                              np.cumsum(shifts[:, :-1], axis=1)], axis=1)
    fac_idx = np.array([t[0] for t in pole_template])
    base = np.array([t[1] for t in pole_template])
    signs = np.array([t[2] for t in pole_template])
    int_part = offsets[:, fac_idx]
    poles = int_part + base[None, :]

    # coincident poles share integer offset and sign
    code = int_part * 2 + (signs[None, :] > 0)
    code_sorted = np.sort(code, axis=1)
    degenerate = np.any(code_sorted[:, 1:] == code_sorted[:, :-1], axis=1)

    sums = np.empty(shifts.shape[0], complex)
    simple = ~degenerate
    if np.any(simple):
        sums[simple] = _simple_pole_sums(poles[simple])
    for row in np.nonzero(degenerate)[0]:
        keys = [(int(int_part[row, j]), int(signs[j])) for j in range(len(base))]
        sums[row] = lattice_sum(list(poles[row]), keys)
    return complex(prefactor * np.sum(weights * sums))
