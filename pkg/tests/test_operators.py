"""Tests for the resolvent kernels, sandwich matrices and trace identities."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pertdet.alpha import akns_gate_integral
from pertdet.errors import ConfigurationError, DomainError
from pertdet.lattice import cyclic_trace
from pertdet.operators import (akns_half_blocks, akns_identities, akns_trace,
                               akns_trace_closed_form, akns_trace_line, build_akns_block,
                               build_sandwich, convolution_matrix, hs_closed_form,
                               kdv_identities, operator_hs_squared, perturbed_sandwich,
                               reflect_matrix, resolvent_kernel, trace_power)
from pertdet.spectral import FourierField, TorusGrid, sobolev_norm

from conftest import fields


def _circle_constants(kappa, L=1.0):
    one_minus = 1 - math.exp(-kappa * L)
    a = (1 - math.exp(-2 * kappa * L)) / (kappa * one_minus ** 2)
    b = math.exp(-kappa * L) / (2 * kappa ** 2 * one_minus ** 2)
    return a, b


class TestResolventKernel:
    def test_line_diagonal(self):
        assert resolvent_kernel(0.3, 0.3, 0.5) == pytest.approx(1.0)

    def test_circle_diagonal(self):
        expected = (1 + math.exp(-1)) / (2 * (1 - math.exp(-1)))
        assert resolvent_kernel(0.2, 0.2, 1.0, "circle", 1.0) == pytest.approx(expected)
        assert expected == pytest.approx(1.08198, abs=1e-5)

    def test_circle_matches_fourier_series(self):
        # oracle: Σ_n e^{iξ_n d}/(ξ_n² + κ²), summed far out
        kappa, d = 1.3, 0.37
        n = np.arange(-200000, 200001)
        xi = 2 * np.pi * n
        series = np.sum(np.cos(xi * d) / (xi ** 2 + kappa ** 2))
        assert resolvent_kernel(d, 0.0, kappa, "circle") == pytest.approx(series, rel=1e-6)

    def test_line_square_identity(self):
        rng = np.random.default_rng(1)
        x, y = rng.uniform(-5, 5, 100), rng.uniform(-5, 5, 100)
        for kappa in (0.3, 1.0, 4.0):
            lhs = kappa * resolvent_kernel(x, y, kappa) ** 2
            np.testing.assert_allclose(lhs, resolvent_kernel(x, y, 2 * kappa), rtol=1e-13)

    def test_circle_square_identity(self):
        rng = np.random.default_rng(2)
        x, y = rng.uniform(0, 1, 100), rng.uniform(0, 1, 100)
        for kappa in (0.5, 1.0, 3.0):
            a, b = _circle_constants(kappa)
            lhs = resolvent_kernel(x, y, kappa, "circle") ** 2
            rhs = a * resolvent_kernel(x, y, 2 * kappa, "circle") + b
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12)

    def test_rejects_nonpositive_kappa(self):
        with pytest.raises(DomainError):
            resolvent_kernel(0, 0, 0.0)


class TestSandwich:
    def test_zero(self, grid):
        assert np.all(build_sandwich(FourierField.zeros(grid), 2.0).entries == 0)

    def test_cosine_entries(self, cos2):
        a = build_sandwich(cos2, 1.0).entries
        xi = cos2.grid.xi
        d = 1 / np.sqrt(xi ** 2 + 1)
        off = np.abs(np.subtract.outer(np.arange(xi.size), np.arange(xi.size)))
        assert np.all(a[off != 1] == 0)
        np.testing.assert_allclose(a[off == 1], np.outer(d, d)[off == 1], rtol=1e-15)

    def test_rejects_nonpositive_kappa(self, cos2):
        with pytest.raises(DomainError):
            build_sandwich(cos2, -1.0)

    @given(fields(real=True))
    def test_hermitian_for_real_q(self, q):
        assert build_sandwich(q, 1.5).is_hermitian()

    @given(fields(), st.floats(-3.0, 3.0))
    def test_reflection_intertwines(self, q, _):
        np.testing.assert_allclose(reflect_matrix(build_sandwich(q, 2.0).entries),
                                   build_sandwich(q.reflect(), 2.0).entries, rtol=1e-15, atol=0)


class TestHilbertSchmidt:
    def test_cosine_example(self, cos2):
        expected = (1 - math.exp(-2)) / (1 - math.exp(-1)) ** 2 * 2 / (4 * math.pi ** 2 + 4)
        assert hs_closed_form(cos2, 1.0) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.09954, abs=1e-5)

    def test_constant_zero_mode_term(self, grid):
        one = FourierField.from_modes(grid, {0: 1.0})
        a, _ = _circle_constants(1.0)
        zero_mode_term = hs_closed_form(one, 1.0) - a / 4
        assert zero_mode_term == pytest.approx(2 * math.exp(-1) / ((1 - math.exp(-1)) ** 2 * 4))
        assert zero_mode_term == pytest.approx(0.46034, abs=1e-5)

    def test_zero(self, grid):
        assert hs_closed_form(FourierField.zeros(grid), 1.0) == 0

    @given(fields(grid=TorusGrid(1.0, 12)), st.floats(0.1, 200.0))
    def test_operator_norm_matches_closed_form(self, q, kappa):
        assert operator_hs_squared(q, kappa) == pytest.approx(hs_closed_form(q, kappa), rel=1e-11)

    @given(fields(grid=TorusGrid(2.7, 8)), st.floats(0.1, 20.0))
    def test_general_period(self, q, kappa):
        assert operator_hs_squared(q, kappa) == pytest.approx(hs_closed_form(q, kappa), rel=1e-11)

    def test_box_matrix_converges_to_operator(self):
        # the box matrix misses the tail of the resolvent diagonal
        g_small, g_big = TorusGrid(1.0, 16), TorusGrid(1.0, 128)
        q_small = FourierField.from_modes(g_small, {0: 0.5, 2: 1.0, -2: 1.0})
        q_big = FourierField.from_modes(g_big, {0: 0.5, 2: 1.0, -2: 1.0})
        exact = hs_closed_form(q_small, 4.0)
        err_small = abs(build_sandwich(q_small, 4.0).frobenius ** 2 - exact)
        err_big = abs(build_sandwich(q_big, 4.0).frobenius ** 2 - exact)
        assert err_big < err_small / 100

    def test_line_geometry_against_large_torus(self):
        grid = TorusGrid(40.0, 128)
        q = FourierField.from_function(grid, lambda x: np.exp(-(x - 20.0) ** 2), real_valued=True)
        line = hs_closed_form(lambda s: np.exp(-s ** 2 / 4) / math.sqrt(2), 1.5, "line")
        assert hs_closed_form(q, 1.5) == pytest.approx(line, rel=1e-6)

    def test_line_geometry_needs_callable(self, cos2):
        with pytest.raises(ConfigurationError):
            hs_closed_form(cos2, 1.0, "line")

    @given(fields(grid=TorusGrid(1.0, 10), amplitude=(0.01, 10.0)),
           st.sampled_from([1.0, 2.0, 4.0, 8.0]))
    def test_two_sided_bounds(self, q, kappa):
        hs2 = operator_hs_squared(q, kappa)
        form = float(np.sum(np.abs(q.coeffs) ** 2 / (q.grid.xi ** 2 + 4 * kappa ** 2)))
        h_minus = sobolev_norm(q, -1.0) ** 2
        eps = 1 + 1e-12
        assert form / kappa <= hs2 * eps
        assert hs2 <= 5 * form / kappa * eps
        assert h_minus / (4 * kappa ** 3) <= hs2 * eps
        assert hs2 <= 5 * h_minus / kappa * eps


class TestTraces:
    def test_trace_power_zero(self, grid):
        z = np.zeros((5, 5))
        assert all(trace_power(z, ell) == 0 for ell in (1, 2, 3))

    def test_trace_power_rejects_bad_order(self):
        with pytest.raises(DomainError):
            trace_power(np.eye(2), 0)

    def test_linear_trace_of_constant(self, grid):
        one = FourierField.from_modes(grid, {0: 1.0})
        expected = 1 / math.tanh(0.5) / 2
        assert expected == pytest.approx(1.08198, abs=1e-5)
        assert cyclic_trace([("R", one)], 1.0).real == pytest.approx(expected, rel=1e-14)
        # the box trace misses Σ_{|n|>N} 1/(ξ² + 1) < 2/(4π² N)
        box = trace_power(build_sandwich(one, 1.0), 1).real
        assert 0 < expected - box < 2 / (4 * math.pi ** 2 * grid.mode_cutoff)

    @given(fields(), st.floats(0.3, 10.0))
    def test_linear_trace_is_mean_times_coth(self, q, kappa):
        expected = q.coeff(0) / math.tanh(kappa / 2) / (2 * kappa)
        assert cyclic_trace([("R", q)], kappa) == pytest.approx(expected, rel=1e-12, abs=1e-15)

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 12), st.integers(2, 8))
    def test_holder_bound(self, seed, dim, ell):
        # |tr M^ℓ| <= ‖M‖_HS^ℓ needs ℓ >= 2; the plain trace is not HS-bounded
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        m = m + m.conj().T
        frob = np.linalg.norm(m)
        assert abs(trace_power(m, ell)) <= frob ** ell * (1 + 1e-12)

    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 7))
    def test_trace_power_matches_matrix_power(self, seed, ell):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        expected = np.trace(np.linalg.matrix_power(m, ell))
        assert trace_power(m, ell) == pytest.approx(expected, rel=1e-11, abs=1e-11)


class TestAkns:
    def test_zero(self, grid):
        assert np.all(build_akns_block(FourierField.zeros(grid), 1.0).entries == 0)
        assert akns_trace(FourierField.zeros(grid), 1.0) == 0

    def test_constant_trace(self, grid):
        c = FourierField.from_modes(grid, {0: 0.1})
        expected = 0.01 / math.tanh(1.0) / 4
        assert akns_trace(c, 2.0) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(3.2826e-3, abs=1e-7)

    @given(fields(real=True), st.floats(0.2, 40.0))
    def test_exact_trace_matches_closed_form(self, q, kappa):
        assert akns_trace(q, kappa) == pytest.approx(akns_trace_closed_form(q, kappa), rel=1e-11)

    def test_box_trace_approaches_exact(self):
        g = TorusGrid(1.0, 64)
        q = FourierField.from_modes(g, {0: 0.3, 1: 0.2, -1: 0.2})
        exact = akns_trace(q, 3.0)
        assert akns_trace(q, 3.0, method="matrix") == pytest.approx(exact, rel=1e-2)

    def test_line_limit(self):
        grid = TorusGrid(40.0, 128)
        q = FourierField.from_function(grid, lambda x: np.exp(-(x - 20.0) ** 2), real_valued=True)
        line = akns_trace_line(lambda s: np.exp(-s ** 2 / 4) / math.sqrt(2), 1.0)
        assert akns_trace(q, 1.0) == pytest.approx(line, rel=1e-4)

    @given(fields())
    def test_reflection_intertwining(self, q):
        upper, _ = akns_half_blocks(q, 1.7)
        _, lower_reflected = akns_half_blocks(q.conj().reflect(), 1.7)
        np.testing.assert_allclose(reflect_matrix(upper), lower_reflected, rtol=1e-14, atol=1e-16)

    def test_half_block_norm_tracks_gate_integral(self):
        rng = np.random.default_rng(4)
        grid = TorusGrid(1.0, 32)
        ratios = []
        for _ in range(10):
            c = np.zeros(grid.size, complex)
            n = np.arange(-12, 13)
            c[n + 32] = (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)) / (1 + abs(n))
            q = FourierField(grid, c)
            for kappa in (1.0, 2.0, 4.0, 8.0):
                upper, _ = akns_half_blocks(q, kappa)
                ratios.append(np.linalg.norm(upper) ** 2 / akns_gate_integral(q, kappa))
        assert 0.2 < min(ratios) and max(ratios) < 5.0
        assert max(ratios) / min(ratios) < 4.0


class TestPerturbedSandwich:
    def test_free_reduction(self, cos2):
        np.testing.assert_allclose(perturbed_sandwich(FourierField.zeros(cos2.grid), cos2, 2.0),
                                   build_sandwich(cos2, 2.0).entries, atol=1e-14)

    def test_zero_perturbation(self, cos2):
        assert np.max(np.abs(perturbed_sandwich(cos2, FourierField.zeros(cos2.grid), 2.0))) < 1e-15

    @given(fields(grid=TorusGrid(1.0, 12), real=True, amplitude=(0.01, 1.0)))
    def test_nonpositive_perturbation_gives_nonpositive_spectrum(self, ref):
        # δq = -(1 + cos 2πx) ≤ 0 pointwise
        grid = ref.grid
        dq = FourierField.from_modes(grid, {0: -1.0, 1: -0.5, -1: -0.5}, True)
        m = perturbed_sandwich(ref, dq, 3.0)
        assert np.max(np.linalg.eigvalsh(m)) <= 1e-13

    def test_reports_indefinite_reference(self, grid):
        deep = FourierField.from_modes(grid, {0: -10.0})
        with pytest.raises(DomainError, match="minimal eigenvalue"):
            perturbed_sandwich(deep, deep, 1.0)


class TestIdentities:
    @given(fields(grid=TorusGrid(1.0, 12), max_band=6, real=True), st.floats(0.5, 20.0))
    def test_kdv_identities(self, q, kappa):
        for name, (lhs, rhs) in kdv_identities(q, kappa).items():
            assert abs(lhs - rhs) <= 1e-9, name

    @given(fields(grid=TorusGrid(1.0, 12), max_band=4, real=False), st.floats(0.5, 20.0))
    def test_akns_identities(self, q, kappa):
        for name, (lhs, rhs) in akns_identities(q, kappa).items():
            assert abs(lhs - rhs) <= 1e-9, name

    def test_nls_identity_fails_with_matching_signs(self):
        # the cubic terms must enter with opposite signs; equal signs leave a residue
        grid = TorusGrid(1.0, 12)
        rng = np.random.default_rng(8)
        c = np.zeros(grid.size, complex)
        c[12 - 3:12 + 4] = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        q = FourierField(grid, c)
        lhs, rhs = akns_identities(q, 2.0)["nls_telescope_1"]
        from pertdet.spectral import multiply
        qb = q.conj()
        m2 = multiply(q, qb)
        same = (cyclic_trace([("Am", 2 * multiply(m2, q)), ("Ap", qb)], 2.0)
                + cyclic_trace([("Am", q), ("Ap", 2 * multiply(m2, qb))], 2.0))
        assert abs(lhs - rhs) < 1e-10
        assert abs(lhs - same) > 1e-3 * abs(lhs)

    def test_convolution_matrix_band(self, cos2):
        m = convolution_matrix(cos2)
        assert m[33, 32] == 1 and m[32, 33] == 1 and m[32, 32] == 0
