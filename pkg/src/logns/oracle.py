"""Closed-form Gausson solutions of -Delta u + lambda u = u log u^2 on R^d.

The Gausson c exp(-|x|^2/2) solves the stationary equation exactly with
lambda = 2 log c - d.  It is used throughout as the minimizer of the reduced
problem on R^d; that it is the minimizer is assumed here, not proved.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .domain import Field, GridSpec, boundary_amplitude, boundary_mass, mass

BOUNDARY_AMPLITUDE_WARN = 1e-12
BOUNDARY_MASS_LIMIT = 1e-10


class BoxTooSmallError(ValueError):
    """The truncated box cannot hold the requested Gausson."""


@dataclass(frozen=True)
class GaussonSpec:
    d: int
    mass_red: float
    lam: float

    @property
    def amplitude(self) -> float:
        return math.exp((self.d + self.lam) / 2.0)

    @property
    def energy(self) -> float:
        return gausson_energy(self.mass_red, self.d)


def _check_mass(mass_red: float) -> None:
    if not mass_red > 0:
        raise ValueError(f"mass must be positive, got {mass_red}")


def lambda_of_mass(mass_red: float, d: int) -> float:
    _check_mass(mass_red)
    return math.log(mass_red * math.pi ** (-d / 2.0)) - d


def gausson_energy(mass_red: float, d: int) -> float:
    """Reduced energy of the Gausson with L^2(R^d) mass ``mass_red``."""
    _check_mass(mass_red)
    return 0.5 * mass_red * (d + 1 - math.log(mass_red * math.pi ** (-d / 2.0)))


def gausson_spec(mass_red: float, d: int) -> GaussonSpec:
    return GaussonSpec(d=d, mass_red=mass_red, lam=lambda_of_mass(mass_red, d))


def mass_for_lambda(lam: float, d: int) -> float:
    return math.pi ** (d / 2.0) * math.exp(lam + d)


def reduced_mass(theta: float, n: int) -> float:
    """Squared R^d mass of the y-independent profile carrying waveguide mass theta^2."""
    return theta**2 / (2.0 * math.pi) ** n


def waveguide_reference(theta: float, d: int, n: int) -> float:
    """(2 pi)^n times the reduced ground energy at mass theta^2 / (2 pi)^n."""
    return (2.0 * math.pi) ** n * gausson_energy(reduced_mass(theta, n), d)


def gausson_lp_integral(theta: float, d: int, n: int, p: float) -> float:
    """int |u|^p of the y-independent Gausson of waveguide mass theta^2."""
    c2 = reduced_mass(theta, n) * math.pi ** (-d / 2.0)
    return c2 ** (p / 2.0) * (2.0 * math.pi / p) ** (d / 2.0) * (2.0 * math.pi) ** n


def gausson_gn_ratio(theta: float, d: int, n: int, alpha: float) -> float:
    m = theta**2
    p = 2.0 + alpha
    t = (d + n) * alpha / 2.0
    h1_sq = m * (1.0 + d / 2.0)
    return gausson_lp_integral(theta, d, n, p) / (h1_sq ** (t / 2.0) * m ** ((p - t) / 2.0))


def gausson_profile(grid: GridSpec, mass_red: float, shift: float = 0.0) -> np.ndarray:
    """Samples of c exp(-|x - shift e_1|^2 / 2), constant along the torus axes."""
    spec = gausson_spec(mass_red, grid.d)
    coords = grid.axis_coordinates()
    r2 = np.zeros(grid.shape)
    for ax in range(grid.d):
        c = coords[ax] - (shift if ax == 0 else 0.0)
        # nearest periodic image keeps shifted profiles smooth across the wrap
        c = (c + grid.L) % (2.0 * grid.L) - grid.L
        r2 = r2 + c**2
    return spec.amplitude * np.exp(-r2 / 2.0)


def sample_gausson(grid: GridSpec, theta: float, shift: float = 0.0) -> Field:
    """y-independent Gausson carrying waveguide mass theta^2 (reduced mass theta^2/(2pi)^n)."""
    if grid.d < 1:
        raise ValueError("sample_gausson needs at least one unbounded axis")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    field = Field(grid, gausson_profile(grid, reduced_mass(theta, grid.n), shift))
    m = mass(field)
    if boundary_mass(field) > BOUNDARY_MASS_LIMIT * m:
        raise BoxTooSmallError(
            f"Gausson leaks {boundary_mass(field) / m:.3e} of its mass into the boundary slab; increase L"
        )
    amp = boundary_amplitude(field)
    if amp > BOUNDARY_AMPLITUDE_WARN:
        warnings.warn(f"Gausson boundary amplitude {amp:.3e} exceeds {BOUNDARY_AMPLITUDE_WARN:g}", stacklevel=2)
    return field
