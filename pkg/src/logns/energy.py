"""The anisotropic log-NLS energy, its convex/subcritical split and gradient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Field, apply_multiplier, kinetic_split, make_workspace, mass

# below this |u|^2 the entropy integrand is replaced by its limit 0
TINY = 1e-300

CONVEXITY_LIMIT = float(np.exp(-1.5))


@dataclass(frozen=True)
class SplitParams:
    delta: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.delta < CONVEXITY_LIMIT:
            raise ValueError(f"delta must lie in (0, e^-3/2) for F1 to be convex, got {self.delta}")


@dataclass(frozen=True)
class RegularizationParams:
    """Saturation of the logarithm: log(eps_sat + |u|^2); eps_sat = 0 is the exact log."""

    eps_sat: float = 0.0

    def __post_init__(self):
        if not (self.eps_sat >= 0.0 and np.isfinite(self.eps_sat)):
            raise ValueError(f"eps_sat must be finite and >= 0, got {self.eps_sat}")


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic_x: float
    kinetic_y_weighted: float
    l2_half: float
    entropy_half: float
    f1_integral: float
    f2_integral: float
    mu: float
    total: float

    @property
    def split_total(self) -> float:
        """Total assembled from the F1/F2 pieces (valid for the exact log)."""
        return self.kinetic_x + self.kinetic_y_weighted + self.l2_half + self.f1_integral - self.f2_integral


def f_split_eval(s, params: SplitParams = SplitParams()):
    """Return (F1(s), F2(s)); F2 - F1 = s^2 log(s^2) / 2."""
    s = np.abs(np.asarray(s, dtype=float))
    d = params.delta
    small = s < d
    pos = (s > 0) & small
    f1 = np.zeros_like(s)
    f2 = np.zeros_like(s)
    sp = s[pos]
    # written as s * (s log s) so subnormal s does not produce 0 * -inf
    f1[pos] = -sp * (sp * np.log(sp))
    sl = s[~small]
    f1[~small] = -0.5 * sl**2 * (np.log(d * d) + 3.0) + 2.0 * d * sl - 0.5 * d * d
    f2[~small] = 0.5 * sl**2 * np.log(sl**2 / (d * d)) + 2.0 * d * sl - 1.5 * sl**2 - 0.5 * d * d
    if f1.ndim == 0:
        return float(f1), float(f2)
    return f1, f2


def f_split_derivative(s, params: SplitParams = SplitParams()):
    """Return (F1'(s), F2'(s)) for real s."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    sgn = np.sign(s)
    d = params.delta
    small = a < d
    pos = (a > 0) & small
    g1 = np.zeros_like(a)
    g2 = np.zeros_like(a)
    g1[pos] = -2.0 * a[pos] * np.log(a[pos]) - a[pos]
    al = a[~small]
    g1[~small] = -al * (np.log(d * d) + 3.0) + 2.0 * d
    g2[~small] = al * np.log(al**2 / (d * d)) - 2.0 * al + 2.0 * d
    return sgn * g1, sgn * g2


def _log_sat(rho: np.ndarray, eps: float) -> np.ndarray:
    """log(eps + rho), with 0 where eps == 0 and rho is (numerically) zero."""
    if eps > 0.0:
        return np.log(eps + rho)
    out = np.zeros_like(rho)
    m = rho > TINY
    out[m] = np.log(rho[m])
    return out


def _density(field: Field) -> np.ndarray:
    a = field.samples
    return a.real**2 + a.imag**2 if np.iscomplexobj(a) else a * a


def entropy(field: Field, reg: RegularizationParams = RegularizationParams()) -> float:
    """Quadrature of |u|^2 log(eps_sat + |u|^2)."""
    rho = _density(field)
    return float(np.sum(rho * _log_sat(rho, reg.eps_sat))) * field.grid.cell_volume


def saturated_entropy(field: Field, reg: RegularizationParams = RegularizationParams()) -> float:
    """int (eps + rho) log(eps + rho) - eps log eps, the antiderivative matching log(eps + rho).

    Coincides with ``entropy`` when eps_sat == 0.
    """
    eps = reg.eps_sat
    if eps == 0.0:
        return entropy(field, reg)
    rho = _density(field)
    # (eps+rho)log(eps+rho) - eps log eps = rho log(eps+rho) + eps log1p(rho/eps)
    vals = rho * np.log(eps + rho) + eps * np.log1p(rho / eps)
    return float(np.sum(vals)) * field.grid.cell_volume


def energy(
    field: Field,
    mu: float = 1.0,
    reg: RegularizationParams = RegularizationParams(),
    split: SplitParams = SplitParams(),
) -> EnergyBreakdown:
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    kx, ky = kinetic_split(field)
    m = mass(field)
    ent = entropy(field, reg)
    f1, f2 = f_split_eval(np.abs(field.samples), split)
    dv = field.grid.cell_volume
    kin_x = 0.5 * kx
    kin_y = 0.5 * mu * ky
    return EnergyBreakdown(
        kinetic_x=kin_x,
        kinetic_y_weighted=kin_y,
        l2_half=0.5 * m,
        entropy_half=0.5 * ent,
        f1_integral=float(np.sum(f1)) * dv,
        f2_integral=float(np.sum(f2)) * dv,
        mu=mu,
        total=kin_x + kin_y + 0.5 * m - 0.5 * ent,
    )


def flow_energy(field: Field, mu: float, reg: RegularizationParams = RegularizationParams()) -> float:
    """The functional whose gradient is ``first_variation`` (equals energy().total at eps_sat = 0)."""
    kx, ky = kinetic_split(field)
    return 0.5 * (kx + mu * ky) + 0.5 * mass(field) - 0.5 * saturated_entropy(field, reg)


def first_variation(field: Field, mu: float = 1.0, reg: RegularizationParams = RegularizationParams()) -> Field:
    """-Delta_x u - mu Delta_y u - u log(eps_sat + |u|^2)."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    ws = make_workspace(field.grid)
    u = field.samples
    lap = apply_multiplier(u, ws.kx2 + mu * ws.ky2)
    return field.with_samples(lap - u * _log_sat(_density(field), reg.eps_sat))


def gn_exponent(alpha: float, d: int, n: int) -> float:
    return (d + n) * alpha / 2.0


def gn_ratio(field: Field, alpha: float) -> float:
    """||u||_{2+a}^{2+a} / (||u||_{H1}^t ||u||_2^{2+a-t}) with t = (d+n) a / 2."""
    g = field.grid
    if not 0.0 < alpha < 4.0 / (g.d + g.n):
        raise ValueError(f"alpha must lie in (0, 4/(d+n)), got {alpha}")
    m = mass(field)
    if m <= 0.0:
        raise ValueError("gn_ratio is undefined for the zero field")
    kx, ky = kinetic_split(field)
    p = 2.0 + alpha
    theta = gn_exponent(alpha, g.d, g.n)
    lp = float(np.sum(np.abs(field.samples) ** p)) * g.cell_volume
    return lp / ((m + kx + ky) ** (theta / 2.0) * m ** ((p - theta) / 2.0))
