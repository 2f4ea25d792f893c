"""Tests for Besov, surrogate and X/Y norms."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pertdet.errors import DomainError
from pertdet.norms import (NormSpec, WeightKind, besov_norm, sec_integral_ratio,
                           surrogate_norm, weight, weighted_form, xy_norm, xy_surrogate)
from pertdet.spectral import FourierField, TorusGrid, sobolev_norm

from conftest import field_from_seed, fields

FAMILIES = {"besov1": -0.5, "besov2": -1.0, "besov3": 0.3, "Z": -0.25}


def _ladder_oracle(q, s, r, kappa0, kind, factor=1.0, rungs=80):
    """Plain loop over N = 1, 2, 4, ... far past the last retained mode."""
    xi, power = q.grid.xi, np.abs(q.coeffs) ** 2
    vals = []
    for j in range(rungs):
        k = kappa0 * 2.0 ** j
        den = (xi ** 2 + k ** 2) * (xi ** 2 + 4 * k ** 2)
        if kind == "resolvent":
            w = k ** 2 / (xi ** 2 + 4 * k ** 2)
        elif kind == "low":
            w = 3 * k ** 4 / den
        else:
            w = 3 * k ** 2 * xi ** 2 / (4 * den)
        vals.append(2.0 ** (j * s) * math.sqrt(factor * q.grid.period * np.sum(w * power)))
    vals = np.array(vals)
    return vals.max() if math.isinf(r) else np.sum(vals ** r) ** (1 / r)


class TestWeights:
    def test_resolvent_example(self, cos2):
        assert weighted_form(cos2, "resolvent", 1.0) == pytest.approx(2 / (4 * math.pi ** 2 + 4))
        assert weighted_form(cos2, "resolvent", 1.0) == pytest.approx(0.046000, abs=1e-6)

    def test_band_pass_example(self, cos2):
        expected = 2 * (1 / (4 * math.pi ** 2 + 4) - 0.25 / (4 * math.pi ** 2 + 1))
        assert weighted_form(cos2, "band_pass_diff", 1.0) == pytest.approx(expected, rel=1e-13)
        assert expected == pytest.approx(0.033648, abs=1e-6)

    def test_zero_field(self, grid):
        for kind in WeightKind:
            assert weighted_form(FourierField.zeros(grid), kind, 2.0) == 0

    @given(st.floats(-1e3, 1e3), st.floats(0.1, 100.0))
    def test_difference_form_against_quoted_closed_forms(self, xi, kappa):
        # the literal resolvent differences are 4x the quoted closed forms
        den = (xi ** 2 + kappa ** 2) * (xi ** 2 + 4 * kappa ** 2)
        low = weight(xi, "low_pass_diff", kappa)
        band = weight(xi, "band_pass_diff", kappa)
        quoted_low = 3 * kappa ** 4 / (4 * den)
        assert low == pytest.approx(4 * quoted_low, rel=1e-12)
        assert low == pytest.approx(3 * kappa ** 4 / den, rel=1e-12)
        assert band == pytest.approx(3 * kappa ** 2 * xi ** 2 / (4 * den), rel=1e-12, abs=1e-300)
        assert low >= 0 and band >= 0

    def test_resolvent_form_matches_inner_product(self, cos2):
        # κ²⟨q, (-∂² + 4κ²)^{-1} q⟩ computed from the samples
        x = cos2.grid.points
        kappa = 1.7
        vals = 2 * np.cos(2 * np.pi * x) * 2 * np.cos(2 * np.pi * x) / (4 * math.pi ** 2 + 4 * kappa ** 2)
        inner = kappa ** 2 * cos2.grid.spacing * np.sum(vals)
        assert weighted_form(cos2, "resolvent", kappa) == pytest.approx(inner, rel=1e-13)

    def test_rejects_nonpositive_kappa(self):
        with pytest.raises(DomainError):
            weight(1.0, "resolvent", 0.0)


class TestBesov:
    def test_zero(self, grid):
        assert besov_norm(FourierField.zeros(grid), -0.5, 2) == 0

    def test_cosine_bin(self, cos2):
        assert besov_norm(cos2, -1.0, 1) == pytest.approx(math.sqrt(2) / 4, rel=1e-14)

    @pytest.mark.parametrize("r", [1, 2, 3.5, math.inf])
    def test_single_bin_collapse(self, cos2, r):
        assert besov_norm(cos2, 0.0, r) == pytest.approx(math.sqrt(2), rel=1e-14)

    def test_bin_edges(self):
        # period 2π puts ξ = n; |ξ| = 1 is low, 2 is in (1, 2], 3 and 4 in (2, 4]
        g = TorusGrid(2 * math.pi, 8)
        masses = [(1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0)]
        q = FourierField.from_modes(g, {n: v for n, v in masses})
        expected = {-1: 1.0, 0: 4.0, 1: 9.0 + 16.0}
        val = besov_norm(q, 1.0, 1)
        assert val == pytest.approx(math.sqrt(expected[-1]) + math.sqrt(expected[0])
                                    + 2 * math.sqrt(expected[1]), rel=1e-14)

    @given(fields(), st.floats(-1.0, 1.0), st.floats(1.0, 6.0), st.floats(0.0, 4.0))
    def test_monotone_in_r(self, q, s, r1, dr):
        assert besov_norm(q, s, r1) >= besov_norm(q, s, r1 + dr) * (1 - 1e-13)
        assert besov_norm(q, s, r1) >= besov_norm(q, s, math.inf) * (1 - 1e-13)

    @given(fields(grid=TorusGrid(1.0, 32)), st.floats(-1.0, 1.0))
    def test_sobolev_comparability(self, q, s):
        ratio = besov_norm(q, s, 2) / sobolev_norm(q, s)
        bound = 5 ** ((abs(s) + 1) / 2)
        assert 1 / bound <= ratio <= bound

    def test_rejects_small_r(self, cos2):
        with pytest.raises(DomainError):
            besov_norm(cos2, 0.0, 0.5)


class TestSurrogate:
    @pytest.mark.parametrize("family,s", FAMILIES.items())
    def test_zero(self, grid, family, s):
        assert surrogate_norm(FourierField.zeros(grid), s, 2, 1.0, family) == 0

    def test_besov1_sup_example(self, cos2):
        n = 2.0 ** np.arange(40)
        expected = np.max(n ** -0.5 * np.sqrt(2 * n ** 2 / (4 * math.pi ** 2 + 4 * n ** 2)))
        assert surrogate_norm(cos2, -0.5, math.inf, 1.0, "besov1") == pytest.approx(expected, rel=1e-14)

    def test_z_example(self, cos2):
        oracle = _ladder_oracle(cos2, -0.25, 2, 2.0, "resolvent", factor=2.0, rungs=240)
        assert surrogate_norm(cos2, -0.25, 2, 2.0, "Z") == pytest.approx(oracle, rel=1e-12)

    @given(fields(grid=TorusGrid(1.0, 16)), st.sampled_from([1.0, 2.0, 3.0, math.inf]),
           st.floats(1.0, 8.0))
    def test_ladders_match_direct_loop(self, q, r, kappa0):
        cases = [("besov1", -0.5, "resolvent", 1.0), ("Z", -0.25, "resolvent", 2.0),
                 ("besov2", -1.0, "low", 1.0), ("besov3", 0.3, "band", 1.0)]
        for family, s, kind, factor in cases:
            oracle = _ladder_oracle(q, s, r, kappa0, kind, factor, rungs=240)
            assert surrogate_norm(q, s, r, kappa0, family) == pytest.approx(oracle, rel=1e-11), family

    @pytest.mark.parametrize("family,s", [("besov1", -1.0), ("besov1", 0.0), ("besov2", -0.5),
                                          ("besov3", 1.0), ("Z", 0.1), ("other", -0.5)])
    def test_family_mismatch(self, cos2, family, s):
        with pytest.raises(DomainError):
            surrogate_norm(cos2, s, 2, 1.0, family)

    @given(fields(grid=TorusGrid(1.0, 32)), st.sampled_from([1.0, 2.0, 4.0]),
           st.sampled_from([1.0, 2.0, math.inf]))
    def test_besov2_constant(self, q, kappa0, r):
        lhs = besov_norm(q, -1.0, r)
        assert lhs <= math.sqrt(40 / 3) * surrogate_norm(q, -1.0, r, kappa0, "besov2") * (1 + 1e-12)


class TestXY:
    def test_zero(self, grid):
        z = FourierField.zeros(grid)
        for which in "XY":
            assert xy_norm(z, 1.0, which) == 0
            assert xy_surrogate(z, 1.0, which) == 0

    def test_cosine_y(self, cos2):
        expected = 4 ** -0.5 * math.log(8) ** 2 * math.sqrt(2)
        assert xy_norm(cos2, 1.0, "Y") == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(3.0576, abs=1e-4)

    def test_cosine_x(self, cos2):
        expected = math.sqrt(math.log(8) ** 3 / 4 * 2)
        assert xy_norm(cos2, 1.0, "X") == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(2.1204, abs=1e-4)

    def test_constant_occupies_low_block(self, grid):
        q = FourierField.from_modes(grid, {0: 0.5})
        assert xy_norm(q, 2.0, "X") == pytest.approx(math.sqrt(0.25 / 2))
        assert xy_norm(q, 2.0, "Y") == pytest.approx(math.sqrt(0.25 / 2))

    def test_constant_surrogate_closed_form(self, grid):
        q = FourierField.from_modes(grid, {0: 0.1})
        m = 2.0 ** np.arange(200)
        k = 2.0 * m
        x2 = np.sum(np.log(2 * m) ** 3 * 0.01 / np.tanh(k / 2) / (2 * k))
        assert xy_surrogate(q, 2.0, "X") == pytest.approx(math.sqrt(x2), rel=1e-12)
        y2 = np.max(np.log(2 * m) ** 4 * 0.01 / np.tanh(k / 2) / (2 * k))
        assert xy_surrogate(q, 2.0, "Y") == pytest.approx(math.sqrt(y2), rel=1e-12)

    def test_ratio_bounded_over_random_family(self):
        grid = TorusGrid(1.0, 32)
        ratios = {"X": [], "Y": []}
        for seed in range(20):
            q = field_from_seed(grid, 500 + seed, 20, real=False)
            for which in "XY":
                ratios[which].append(xy_surrogate(q, 1.0, which) / xy_norm(q, 1.0, which))
        for which, vals in ratios.items():
            assert max(vals) / min(vals) < 16, which

    def test_rejects_bad_arguments(self, cos2):
        with pytest.raises(DomainError):
            xy_norm(cos2, 1.0, "Z")
        with pytest.raises(DomainError):
            xy_surrogate(cos2, 0.0, "X")


class TestSecIntegral:
    @pytest.mark.parametrize("s", [-0.25, -0.5, -0.75])
    def test_ratio_between_analytic_limits(self, s):
        # ξ = 0 gives 1/(-8s); ξ → ∞ gives 2^{-2-2s}·π/(2 sin(π(1+s)))
        low = 1 / (-8 * s)
        high = 2 ** (-2 - 2 * s) * math.pi / (2 * math.sin(math.pi * (1 + s)))
        grid = TorusGrid(1.0, 64)
        for kappa0 in (1.0, 2.0, 4.0, 8.0):
            vals = [sec_integral_ratio(x, s, kappa0) for x in grid.xi[grid.xi >= 0]]
            assert min(vals) >= 0.95 * low
            assert max(vals) <= 1.05 * high

    def test_zero_frequency_value(self):
        assert sec_integral_ratio(0.0, -0.5, 2.0) == pytest.approx(0.25 * (1 - 2.0 / 1e6), rel=1e-9)

    def test_rejects_bad_s(self):
        with pytest.raises(DomainError):
            sec_integral_ratio(1.0, 0.5, 1.0)


class TestNormSpec:
    def test_valid(self):
        assert NormSpec(-0.5, 2.0, 1.0).kappa0 == 1.0

    @pytest.mark.parametrize("args", [(-1.5, 2, 1), (0, 0.5, 1), (0, 2, 0.5)])
    def test_invalid(self, args):
        with pytest.raises(DomainError):
            NormSpec(*args)
