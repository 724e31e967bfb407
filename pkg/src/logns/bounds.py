"""Explicit test functions and the energy upper bounds they certify.

Two families are built here:

* the tent profile on the torus, phi(y) = b (y - a) on [a, pi] reflected about
  pi, with slope b = e^{5/6} / (pi - a) chosen so that its squared L^2 norm
  equals its entropy integral; a mollified copy is tensored with a reduced
  Gausson to probe the mu -> 0 limit;
* dilations r^{-d/2} phi_1(x / r, y) of the principal Dirichlet eigenfunction
  of a box (0, ell)^d, whose energy sign is scanned against the admissible
  r-window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .domain import Field, GridSpec, TORUS_PERIOD
from .oracle import gausson_energy, gausson_profile, waveguide_reference

_TWO_PI = TORUS_PERIOD


@dataclass(frozen=True)
class TentParams:
    a: float
    eps_moll: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.a < math.pi:
            raise ValueError(f"tent parameter a must lie in (0, pi), got {self.a}")
        if not 0.0 < self.eps_moll < self.a / 2.0:
            raise ValueError(f"mollifier width must lie in (0, a/2) to keep compact support, got {self.eps_moll}")

    @property
    def b(self) -> float:
        return math.exp(5.0 / 6.0) / (math.pi - self.a)


@dataclass(frozen=True)
class EigenBoxParams:
    ell: float
    theta: float
    d: int = 1
    n: int = 1

    def __post_init__(self):
        if not (self.ell > 0 and self.theta > 0):
            raise ValueError("ell and theta must be positive")
        if self.d < 1 or self.n < 0:
            raise ValueError("need d >= 1 and n >= 0")

    @property
    def eigenvalue(self) -> float:
        """Principal Dirichlet eigenvalue of -Delta on (0, ell)^d."""
        return self.d * math.pi**2 / self.ell**2

    @property
    def volume(self) -> float:
        """|Omega x T^n|."""
        return self.ell**self.d * _TWO_PI**self.n


def tent_profile(y, a: float, b: float | None = None) -> np.ndarray:
    """The unmollified tent on [0, 2 pi], extended periodically."""
    if b is None:
        b = math.exp(5.0 / 6.0) / (math.pi - a)
    y = np.mod(np.asarray(y, dtype=float), _TWO_PI)
    return np.where((y > a) & (y < _TWO_PI - a), b * (math.pi - a - np.abs(y - math.pi)), 0.0)


def tent_norm_sq(a: float, b: float | None = None) -> float:
    if b is None:
        b = math.exp(5.0 / 6.0) / (math.pi - a)
    return 2.0 * b**2 * (math.pi - a) ** 3 / 3.0


def tent_entropy(a: float, b: float | None = None) -> float:
    """Closed form of int_0^{2pi} phi^2 log phi^2 for slope b."""
    if b is None:
        b = math.exp(5.0 / 6.0) / (math.pi - a)
    w = math.pi - a
    return 4.0 * b**2 * w**3 / 9.0 * (3.0 * math.log(w) - 1.0 + 3.0 * math.log(b))


def tent_norms(a: float) -> tuple[float, float]:
    """(||phi||^2, int phi^2 log phi^2) at the slope b = e^{5/6} / (pi - a)."""
    if not 0.0 < a < math.pi:
        raise ValueError(f"a must lie in (0, pi), got {a}")
    return tent_norm_sq(a), tent_entropy(a)


def tent_norms_quadrature(a: float) -> tuple[float, float]:
    """The same two integrals by adaptive quadrature over the rising half."""
    if not 0.0 < a < math.pi:
        raise ValueError(f"a must lie in (0, pi), got {a}")
    b = math.exp(5.0 / 6.0) / (math.pi - a)
    w = math.pi - a
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    sq, _ = integrate.quad(lambda z: (b * z) ** 2, 0.0, w, **opts)

    def ent(z):
        v = (b * z) ** 2
        return v * math.log(v) if v > 0 else 0.0

    en, _ = integrate.quad(ent, 0.0, w, **opts)
    return 2.0 * sq, 2.0 * en


def _bump_kernel(t: np.ndarray, eps: float) -> np.ndarray:
    k = np.zeros_like(t)
    inside = np.abs(t) < eps
    k[inside] = np.exp(-1.0 / (1.0 - (t[inside] / eps) ** 2))
    return k


def _fine_mollified(params: TentParams, points_y: int, min_fine: int = 2**16):
    """Mollified tent on a fine periodic grid that refines ``points_y`` by a power of two."""
    fine = points_y
    while fine < min_fine or _TWO_PI / fine > params.eps_moll / 64.0:
        fine *= 2
    h = _TWO_PI / fine
    y = h * np.arange(fine)
    phi = tent_profile(y, params.a)
    t = (y + math.pi) % _TWO_PI - math.pi
    kern = _bump_kernel(t, params.eps_moll)
    kern /= np.sum(kern) * h
    out = np.fft.irfft(np.fft.rfft(phi) * np.fft.rfft(kern), n=fine) * h
    # the exact convolution vanishes off [a - eps, 2pi - a + eps]
    outside = (y <= params.a - params.eps_moll) | (y >= _TWO_PI - params.a + params.eps_moll)
    out[outside] = 0.0
    out = 0.5 * (out + np.roll(out[::-1], 1))
    return y, out, h, fine // points_y


def mollified_tent(params: TentParams, points_y: int) -> np.ndarray:
    """Samples of the mollified tent at y_j = 2 pi j / points_y."""
    if points_y < 8 or points_y % 2:
        raise ValueError("points_y must be even and >= 8")
    _, out, _, stride = _fine_mollified(params, points_y)
    return out[::stride].copy()


def mollified_tent_norms(params: TentParams) -> tuple[float, float]:
    """(||phi_eps||^2, int phi_eps^2 log phi_eps^2) on the fine grid."""
    _, out, h, _ = _fine_mollified(params, 64)
    rho = out * out
    pos = rho > 0
    return float(np.sum(rho)) * h, float(np.sum(rho[pos] * np.log(rho[pos]))) * h


def tensor_testfield(theta: float, params: TentParams, grid: GridSpec) -> Field:
    """Q(x) (||phi|| / ||phi_eps||)^n prod_j phi_eps(y_j) with Q the reduced Gausson of mass theta^2 / ||phi||^{2n}."""
    if grid.d < 1 or grid.n < 1:
        raise ValueError("tensor_testfield needs d >= 1 and n >= 1")
    if not theta > 0:
        raise ValueError("theta must be positive")
    norm_sq = tent_norm_sq(params.a)
    q = gausson_profile(grid, theta**2 / norm_sq**grid.n)
    prof = mollified_tent(params, grid.points_y)
    disc_sq = float(np.sum(prof**2)) * grid.dy
    prof = prof * math.sqrt(norm_sq / disc_sq)
    samples = q
    for ax in range(grid.d, grid.d + grid.n):
        shape = [1] * (grid.d + grid.n)
        shape[ax] = grid.points_y
        samples = samples * prof.reshape(shape)
    return Field(grid, samples)


@dataclass(frozen=True)
class TentChain:
    """Pieces of I_0(psi) = ||phi||^{2n} m~(theta^2 / ||phi||^{2n}) + I."""

    a: float
    eps_moll: float
    norm_sq: float
    reduced_term: float
    remainder: float
    remainder_limit: float
    reference: float

    @property
    def energy(self) -> float:
        return self.reduced_term + self.remainder

    @property
    def strict(self) -> bool:
        return self.energy < self.reference

    @property
    def reduced_strict(self) -> bool:
        return self.reduced_term < self.reference

    @property
    def remainder_correction(self) -> float:
        """Part of the remainder that vanishes as eps_moll -> 0."""
        return self.remainder - self.remainder_limit


def tent_chain(theta: float, params: TentParams, d: int = 1, n: int = 1) -> TentChain:
    """Separable evaluation of I_0 on the tensor test field (no grid in y)."""
    norm_sq = tent_norm_sq(params.a)
    eps_sq, eps_ent = mollified_tent_norms(params)
    ratio = eps_ent / eps_sq + math.log(norm_sq / eps_sq)
    return TentChain(
        a=params.a,
        eps_moll=params.eps_moll,
        norm_sq=norm_sq,
        reduced_term=norm_sq**n * gausson_energy(theta**2 / norm_sq**n, d),
        remainder=-0.5 * n * theta**2 * ratio,
        remainder_limit=-0.5 * n * theta**2,
        reference=waveguide_reference(theta, d, n),
    )


@dataclass
class UpperBoundTable:
    rows: list[TentChain]
    monotone_in_a: bool


def upper_bound_I0(theta: float, a_values, eps_moll: float = 1e-3, d: int = 1, n: int = 1) -> UpperBoundTable:
    """Tent-chain rows over ``a``; monotone_in_a records whether I_0 decreases as a grows."""
    a_sorted = sorted(float(a) for a in a_values)
    rows = [tent_chain(theta, TentParams(a, min(eps_moll, 0.49 * a)), d, n) for a in a_sorted]
    energies = [r.energy for r in rows]
    monotone = all(e2 <= e1 for e1, e2 in zip(energies, energies[1:]))
    return UpperBoundTable(rows=rows, monotone_in_a=monotone)


_SIN_ENTROPY = 1.0 - 2.0 * math.log(2.0)  # (2/ell) int_0^ell sin^2 log sin^2


def eigen_energy(params: EigenBoxParams, r: float) -> float:
    """Energy of phi_r in closed form (y-independent, so mu plays no role)."""
    m = params.theta**2
    d = params.d
    amp_sq = m * (2.0 / params.ell) ** d / _TWO_PI**params.n
    ent = m * (math.log(amp_sq) + d * _SIN_ENTROPY - d * math.log(r))
    return 0.5 * params.eigenvalue * m / r**2 + 0.5 * m - 0.5 * ent


def eigen_energy_quadrature(params: EigenBoxParams, r: float) -> float:
    """Same energy with every one-dimensional integral done by adaptive quadrature."""
    ell, d, m = params.ell, params.d, params.theta**2
    amp_sq = m * (2.0 / ell) ** d / _TWO_PI**params.n
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    s2, _ = integrate.quad(lambda x: math.sin(math.pi * x / ell) ** 2, 0.0, ell, **opts)
    c2, _ = integrate.quad(lambda x: (math.pi / ell * math.cos(math.pi * x / ell)) ** 2, 0.0, ell, **opts)

    def sl(x):
        v = math.sin(math.pi * x / ell) ** 2
        return v * math.log(v) if v > 0 else 0.0

    e1, _ = integrate.quad(sl, 0.0, ell, **opts)
    vol = _TWO_PI**params.n * amp_sq
    grad = vol * d * c2 * s2 ** (d - 1) / r**2
    mass_q = vol * s2**d
    ent = vol * (s2**d * (math.log(amp_sq) - d * math.log(r)) + d * e1 * s2 ** (d - 1))
    return 0.5 * grad + 0.5 * mass_q - 0.5 * ent


@dataclass(frozen=True)
class EigenRow:
    r: float
    energy: float
    lower_inverse: float
    lower_direct: float
    upper: float

    @property
    def in_window_inverse(self) -> bool:
        return self.lower_inverse < self.r < self.upper

    @property
    def in_window_direct(self) -> bool:
        return self.lower_direct < self.r < self.upper

    @property
    def window_empty(self) -> bool:
        return self.upper <= min(self.lower_inverse, self.lower_direct)

    @property
    def negative(self) -> bool:
        return self.energy < 0.0


def window_endpoints(params: EigenBoxParams) -> tuple[float, float, float]:
    """(sqrt(2/theta), sqrt(2 theta), (Theta / (4 |Omega x T^n|^{1/2}))^{2/d})."""
    th = params.eigenvalue
    upper = (params.theta / (4.0 * math.sqrt(params.volume))) ** (2.0 / params.d)
    return math.sqrt(2.0 / th), math.sqrt(2.0 * th), upper


def eigen_testfield_scan(params: EigenBoxParams, r_values) -> list[EigenRow]:
    lo_p, lo_r, up = window_endpoints(params)
    return [EigenRow(float(r), eigen_energy(params, float(r)), lo_p, lo_r, up) for r in r_values]
