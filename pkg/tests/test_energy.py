import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logns.domain import Field, GridSpec, inner, mass
from logns.energy import (
    CONVEXITY_LIMIT,
    RegularizationParams,
    SplitParams,
    energy,
    entropy,
    f_split_derivative,
    f_split_eval,
    first_variation,
    gn_exponent,
    gn_ratio,
)
from logns.oracle import gausson_gn_ratio, sample_gausson

from conftest import REFERENCE, THETA

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def gaussian(grid, c=1.0):
    x = grid.axis_coordinates()[0]
    return Field(grid, c * np.exp(-x**2 / 2) * np.ones(grid.shape))


def random_field(grid, rng, kmax=4):
    coeffs = np.zeros(grid.shape, dtype=complex)
    block = np.ix_(*[np.r_[0 : kmax + 1, -kmax:0]] * (grid.d + grid.n))
    shape = (2 * kmax + 1,) * (grid.d + grid.n)
    coeffs[block] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    env = np.exp(-grid.radius_sq_x() / 4)
    return Field(grid, env * np.fft.ifftn(coeffs) * 40)


class TestSplit:
    def test_origin(self):
        assert f_split_eval(0.0) == (0.0, 0.0)

    @pytest.mark.parametrize("delta", [0.01, 0.05, 0.2])
    def test_continuity_at_threshold(self, delta):
        p = SplitParams(delta)
        below = f_split_eval(delta * (1 - 1e-12), p)
        at = f_split_eval(delta, p)
        assert at[0] == pytest.approx(-0.5 * delta**2 * math.log(delta**2), rel=1e-12)
        assert at[1] == pytest.approx(0.0, abs=1e-15)
        assert below[0] == pytest.approx(at[0], rel=1e-9)
        assert below[1] == 0.0

    def test_unit_argument(self):
        f1, f2 = f_split_eval(1.0, SplitParams(0.1))
        assert f2 - f1 == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("delta", [0.0, -0.1, CONVEXITY_LIMIT, 0.5])
    def test_delta_range(self, delta):
        with pytest.raises(ValueError):
            SplitParams(delta)

    @given(s=finite)
    def test_identity(self, s):
        f1, f2 = f_split_eval(s)
        lg = 2.0 * math.log(abs(s)) if s != 0 else 0.0
        target = s * (s * 0.5 * lg)
        assert abs(f2 - f1 - target) <= 1e-12 * (1 + abs(s * (s * lg)))

    @given(s=finite)
    def test_f1_even_and_nonnegative(self, s):
        f1, f2 = f_split_eval(s)
        g1, g2 = f_split_eval(-s)
        assert f1 >= 0.0
        assert (f1, f2) == (g1, g2)

    def test_f1_derivative_sign_and_convexity(self):
        s = np.linspace(-5, 5, 200001)
        g1, _ = f_split_derivative(s)
        assert np.all(g1 * s >= 0)
        f1, _ = f_split_eval(s)
        mid = f1[1:-1]
        assert np.all(mid <= 0.5 * (f1[:-2] + f1[2:]) + 1e-15)

    def test_derivative_matches_finite_difference(self):
        s = np.array([-3.0, -0.02, 0.01, 0.049, 0.051, 0.7, 12.0])
        h = 1e-6
        fp, fm = f_split_eval(s + h), f_split_eval(s - h)
        g1, g2 = f_split_derivative(s)
        np.testing.assert_allclose((fp[0] - fm[0]) / (2 * h), g1, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose((fp[1] - fm[1]) / (2 * h), g2, rtol=1e-6, atol=1e-9)

    def test_f2_subcritical_growth(self):
        p = 2.5
        s = np.linspace(-1e3, 1e3, 400001)
        s = s[s != 0]
        _, g2 = f_split_derivative(s)
        ratio = np.abs(g2) / np.abs(s) ** (p - 1)
        assert np.isfinite(ratio.max())
        # the sup is attained at moderate |s|, not at the ends of the window
        assert ratio[-1] < ratio.max() and ratio[0] < ratio.max()

    def test_f2_quotient_monotone_and_unbounded(self):
        p = SplitParams()
        s = np.linspace(1e-4, 50, 100000)
        _, g2 = f_split_derivative(s, p)
        q = g2 / s
        assert np.all(np.diff(q) >= -1e-14)
        above = s > p.delta
        assert np.all(np.diff(q[above]) > 0)
        big = 10.0 ** np.arange(0, 30, 3)
        qb = f_split_derivative(big, p)[1] / big
        assert np.all(np.diff(qb) > 1.0)


class TestEntropy:
    def test_unit_modulus(self):
        g = GridSpec(d=0, n=1)
        assert entropy(Field(g, np.exp(1j * g.y_axis()))) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("c", [0.5, 1.0, 4.48])
    def test_gaussian_closed_form(self, c):
        g = GridSpec(d=1, n=1)
        expected = 2 * math.pi * (c * c * math.sqrt(math.pi) * 2 * math.log(c) - c * c * math.sqrt(math.pi) / 2)
        assert entropy(gaussian(g, c)) == pytest.approx(expected, rel=1e-10, abs=1e-12)

    def test_large_saturation_dominated_by_mass(self):
        u = gaussian(GridSpec(d=1, n=1), 2.0)
        eps = 1e12
        assert entropy(u, RegularizationParams(eps)) == pytest.approx(mass(u) * math.log(eps), rel=1e-10)

    def test_zero_samples_contribute_nothing(self):
        g = GridSpec(d=0, n=1)
        a = np.zeros(g.shape)
        a[3] = 1.0
        assert entropy(Field(g, a)) == 0.0

    @pytest.mark.parametrize("eps", [-1.0, float("inf")])
    def test_bad_saturation(self, eps):
        with pytest.raises(ValueError):
            RegularizationParams(eps)


class TestEnergy:
    def test_gausson_energy_on_waveguide(self, grid11):
        br = energy(sample_gausson(grid11, THETA), 1.0)
        assert br.total == pytest.approx(REFERENCE, rel=1e-10)
        assert br.kinetic_y_weighted == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("mu", [0.0, 0.3, 1.0, 250.0])
    def test_y_independent_is_mu_blind(self, grid11, mu):
        u = sample_gausson(grid11, THETA)
        assert energy(u, mu).total == pytest.approx(energy(u, 1.0).total, rel=1e-14)

    def test_breakdown_invariants(self, grid11, rng):
        u = random_field(grid11, rng)
        br = energy(u, 0.7)
        assert br.total == pytest.approx(br.kinetic_x + br.kinetic_y_weighted + br.l2_half - br.entropy_half)
        assert br.split_total == pytest.approx(br.total, rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("xi", [0.5, math.e, 10.0])
    def test_scaling_identity(self, grid11, rng, xi):
        u = random_field(grid11, rng)
        base = energy(u).total
        lhs = energy(u * xi).total
        assert abs(lhs - (xi**2 * base - xi**2 * math.log(xi) * mass(u))) <= 1e-12 * xi**2 * (1 + abs(base) + mass(u))

    def test_negative_mu_rejected(self, grid11):
        with pytest.raises(ValueError):
            energy(sample_gausson(grid11, THETA), -1.0)


class TestFirstVariation:
    def test_gausson_with_unit_multiplier(self, grid10):
        theta = math.sqrt(math.sqrt(math.pi) * math.e**2)
        u = sample_gausson(grid10, theta)
        g = first_variation(u, 1.0)
        res = np.sqrt(mass(g.with_samples(g.samples + 1.0 * u.samples)) / mass(u))
        assert res < 1e-8

    def test_zero_field_saturated(self, grid11):
        z = Field(grid11, np.zeros(grid11.shape))
        assert not np.any(first_variation(z, 1.0, RegularizationParams(1e-3)).samples)

    @pytest.mark.parametrize("mu", [0.2, 1.0, 5.0])
    def test_directional_derivative(self, grid11, mu):
        rng = np.random.default_rng(7)
        u = Field(grid11, np.abs(random_field(grid11, rng).samples) + 0.3 * np.exp(-grid11.radius_sq_x() / 8))
        g = first_variation(u, mu)
        h = 1e-5
        for _ in range(20):
            v = random_field(grid11, rng).samples.real
            v = Field(grid11, v)
            fd = (energy(u.with_samples(u.samples + h * v.samples), mu).total
                  - energy(u.with_samples(u.samples - h * v.samples), mu).total) / (2 * h)
            assert fd == pytest.approx(inner(g, v), rel=1e-6, abs=1e-8)


class TestGagliardoNirenberg:
    def test_exponent(self):
        assert gn_exponent(1.0, 1, 1) == 1.0

    @given(xi=st.floats(min_value=1e-3, max_value=1e3))
    @settings(deadline=None, max_examples=30)
    def test_scale_invariant(self, xi):
        g = GridSpec(d=1, n=1, points_x=64, points_y=16)
        u = random_field(g, np.random.default_rng(3))
        assert gn_ratio(u * xi, 1.0) == pytest.approx(gn_ratio(u, 1.0), rel=1e-10)

    def test_gausson_closed_form(self, grid11):
        u = sample_gausson(grid11, THETA)
        assert gn_ratio(u, 1.0) == pytest.approx(gausson_gn_ratio(THETA, 1, 1, 1.0), rel=1e-8)

    @pytest.mark.parametrize("alpha", [0.0, 2.0, 3.0])
    def test_alpha_range(self, grid11, alpha):
        with pytest.raises(ValueError):
            gn_ratio(sample_gausson(grid11, THETA), alpha)

    def test_zero_field(self, grid11):
        with pytest.raises(ValueError):
            gn_ratio(Field(grid11, np.zeros(grid11.shape)), 1.0)
