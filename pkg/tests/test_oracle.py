import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from logns.domain import GridSpec, kinetic_split, mass
from logns.energy import energy, first_variation
from logns.oracle import (
    BoxTooSmallError,
    gausson_energy,
    gausson_spec,
    lambda_of_mass,
    mass_for_lambda,
    reduced_mass,
    sample_gausson,
    waveguide_reference,
)

from conftest import REFERENCE, THETA

masses = st.floats(min_value=1e-6, max_value=1e6)


@pytest.mark.parametrize(
    "mass_red,d,lam",
    [(math.sqrt(math.pi) * math.e**2, 1, 1.0), (math.pi * math.e**3, 2, 1.0), (math.pi**1.5 * math.e**3, 3, 0.0),
     (math.sqrt(math.pi) * math.e**3, 1, 2.0)],
)
def test_lambda_of_mass(mass_red, d, lam):
    assert lambda_of_mass(mass_red, d) == pytest.approx(lam, abs=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_mass_rejected(bad):
    with pytest.raises(ValueError):
        lambda_of_mass(bad, 1)
    with pytest.raises(ValueError):
        gausson_energy(bad, 1)


def test_energy_sign_change_mass():
    assert gausson_energy(math.sqrt(math.pi) * math.e**2, 1) == pytest.approx(0.0, abs=1e-14)


def test_energy_frozen_value():
    assert gausson_energy(math.sqrt(math.pi) * math.e**3, 1) == pytest.approx(-17.800343633504443, rel=1e-14)
    assert waveguide_reference(THETA, 1, 1) == pytest.approx(REFERENCE, rel=1e-14)


def test_multiplier_energy_link():
    rng = np.random.default_rng(0)
    for m in 10.0 ** rng.uniform(-3, 4, 50):
        for d in (1, 2, 3):
            assert 1 - 2 * gausson_energy(m, d) / m == pytest.approx(lambda_of_mass(m, d), rel=1e-12, abs=1e-12)


@given(lam=st.floats(min_value=-20, max_value=20), d=st.integers(1, 4))
def test_mass_for_lambda_inverts(lam, d):
    assert lambda_of_mass(mass_for_lambda(lam, d), d) == pytest.approx(lam, abs=1e-12)


@given(m=masses, d=st.integers(1, 4))
def test_amplitude_relation(m, d):
    spec = gausson_spec(m, d)
    assert spec.amplitude**2 * math.pi ** (d / 2) == pytest.approx(m, rel=1e-12)


class TestSampleGausson:
    def test_mass_and_y_independence(self, grid11):
        u = sample_gausson(grid11, THETA)
        assert mass(u) == pytest.approx(THETA**2, rel=1e-10)
        kx, ky = kinetic_split(u)
        assert ky == pytest.approx(0.0, abs=1e-20)
        assert kx == pytest.approx(0.5 * THETA**2, rel=1e-10)
        assert u.is_real and np.all(u.samples > 0)

    def test_shift_preserves_mass_and_energy(self, grid11):
        u, v = sample_gausson(grid11, THETA), sample_gausson(grid11, THETA, shift=1.0)
        assert mass(v) == pytest.approx(mass(u), rel=1e-10)
        assert energy(v).total == pytest.approx(energy(u).total, rel=1e-10)

    def test_two_torus_axes(self):
        g = GridSpec(d=1, n=2, points_x=128, points_y=8)
        u = sample_gausson(g, THETA)
        assert reduced_mass(THETA, 2) == pytest.approx(THETA**2 / (2 * math.pi) ** 2)
        assert mass(u) == pytest.approx(THETA**2, rel=1e-10)
        assert u.samples[:, 0, 0] @ u.samples[:, 0, 0] * g.dx == pytest.approx(reduced_mass(THETA, 2), rel=1e-10)

    @pytest.mark.parametrize("d", [1, 2])
    def test_pde_residual(self, d):
        g = GridSpec(d=d, n=0, points_x=256 if d == 1 else 64)
        m = math.pi ** (d / 2) * math.e**3
        u = sample_gausson(g, math.sqrt(m))
        lam = lambda_of_mass(m, d)
        r = first_variation(u, 1.0).samples + lam * u.samples
        assert math.sqrt(np.sum(r * r) / np.sum(u.samples**2)) < 1e-8

    @pytest.mark.parametrize("d,n", [(1, 0), (1, 1), (2, 1)])
    def test_pohozaev(self, d, n):
        g = GridSpec(d=d, n=n, points_x=256 if d == 1 else 64, points_y=8)
        u = sample_gausson(g, 5.0)
        assert kinetic_split(u)[0] == pytest.approx(0.5 * d * 25.0, rel=1e-10)

    def test_box_too_small(self):
        with pytest.raises(BoxTooSmallError):
            sample_gausson(GridSpec(d=1, n=1, L=3.0), THETA)

    def test_boundary_warning(self):
        with pytest.warns(UserWarning):
            sample_gausson(GridSpec(d=1, n=1, L=8.5), THETA)

    def test_default_box_is_quiet(self, grid11):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            sample_gausson(grid11, THETA)

    def test_needs_unbounded_axis(self):
        with pytest.raises(ValueError):
            sample_gausson(GridSpec(d=0, n=1), 1.0)
