"""Mass-constrained minimization of the anisotropic energy.

Descent runs on the sphere ||u||_2 = theta with a preconditioned nonlinear
conjugate-gradient direction, an energy-monotone step control and
renormalization after every step.  The preconditioner combines the kinetic
symbol (c + |k_x|^2 + mu |k_y|^2)^-1 with a diagonal scaling by the local
log potential, which otherwise makes the Gaussian tails extremely stiff.
Fixed points of the iteration are exact constrained critical points.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .domain import (
    Field,
    GridSpec,
    apply_multiplier,
    boundary_mass,
    inner,
    kinetic_split,
    make_workspace,
    mass,
    normalize,
)
from .energy import (
    TINY,
    EnergyBreakdown,
    RegularizationParams,
    energy,
    first_variation,
    flow_energy,
)
from .oracle import sample_gausson

log = logging.getLogger(__name__)

INIT_KINDS = ("gausson", "gausson-tent", "random", "file")

_PRECOND_SHIFT = 1.0
_MAX_STEP = 10.0


class FlowDivergedError(FloatingPointError):
    """The iterate left the finite numbers (mass blow-up)."""


@dataclass(frozen=True)
class FlowConfig:
    theta: float
    mu: float = 1.0
    reg: RegularizationParams = RegularizationParams()
    dt0: float = 0.1
    dt_min: float = 1e-6
    tol: float = 1e-8
    max_steps: int = 5000
    init: str = "gausson"
    restarts: int = 4
    seed: int = 0
    initial: Field | None = dc_field(default=None, compare=False, repr=False)
    tent_a: float = np.pi - 1.0
    tent_eps: float = 0.1

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not self.mu >= 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if not self.dt0 > self.dt_min > 0:
            raise ValueError("need dt0 > dt_min > 0")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_steps < 0 or self.restarts < 1:
            raise ValueError("max_steps must be >= 0 and restarts >= 1")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}, got {self.init!r}")
        if self.init == "file" and self.initial is None:
            raise ValueError("init='file' requires an initial field")


@dataclass
class FlowResult:
    field: Field
    energy: EnergyBreakdown
    lambda_rayleigh: float
    lambda_energy: float
    residual: float
    steps: int
    converged: bool
    boundary_mass: float
    energy_history: list[float] = dc_field(default_factory=list, repr=False)
    restart_energies: list[float] = dc_field(default_factory=list)

    @property
    def m(self) -> float:
        return self.energy.total

    @property
    def ky(self) -> float:
        return kinetic_split(self.field)[1]


def random_bandlimited(grid: GridSpec, rng: np.random.Generator, kmax: int = 4) -> Field:
    """Positive random start: band-limited modulation of a randomly placed envelope."""
    ndim = grid.d + grid.n
    coeffs = np.zeros(grid.shape, dtype=complex)
    low = tuple(np.r_[0 : kmax + 1, -kmax:0] for _ in range(ndim))
    block = np.ix_(*low)
    shape = tuple(len(ix) for ix in low)
    coeffs[block] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    r = np.fft.ifftn(coeffs).real
    r /= np.max(np.abs(r))
    env = np.ones(grid.shape)
    coords = grid.axis_coordinates()
    for ax in range(grid.d):
        width = rng.uniform(1.0, 2.5)
        centre = rng.uniform(-grid.L / 4, grid.L / 4)
        env = env * np.exp(-((coords[ax] - centre) ** 2) / (2.0 * width**2))
    return Field(grid, env * (1.5 + r))


def initial_field(config: FlowConfig, grid: GridSpec, rng: np.random.Generator | None = None) -> Field:
    if config.init == "file":
        if config.initial.grid != grid:
            raise ValueError("initial field lives on a different grid")
        return normalize(config.initial, config.theta)
    if config.init == "random":
        return normalize(random_bandlimited(grid, rng or np.random.default_rng(config.seed)), config.theta)
    if grid.d == 0:
        base = Field(grid, np.ones(grid.shape))
    else:
        base = sample_gausson(grid, config.theta)
    if config.init == "gausson":
        return normalize(base, config.theta)
    from .bounds import TentParams, mollified_tent  # local: bounds depends on this module's siblings only

    tent = mollified_tent(TentParams(a=config.tent_a, eps_moll=config.tent_eps), grid.points_y)
    samples = base.samples.copy()
    for ax in range(grid.d, grid.d + grid.n):
        shape = [1] * (grid.d + grid.n)
        shape[ax] = grid.points_y
        samples = samples * tent.reshape(shape)
    return normalize(Field(grid, samples), config.theta)


def lambda_estimates(u: Field, mu: float, reg: RegularizationParams, m: float, theta: float) -> tuple[float, float]:
    """(Rayleigh multiplier from the Euler-Lagrange equation, 1 - 2 m / theta^2)."""
    g = first_variation(u, mu, reg)
    lam_r = -inner(g, u) / theta**2
    return lam_r, 1.0 - 2.0 * m / theta**2


def pohozaev_residual(u: Field, theta: float) -> float:
    """int |grad_x u|^2 - (d/2) theta^2."""
    return kinetic_split(u)[0] - 0.5 * u.grid.d * theta**2


def constrained_residual(u: Field, mu: float, reg: RegularizationParams) -> tuple[float, float]:
    """(||g + lambda_R u|| / ||u||, lambda_R)."""
    g = first_variation(u, mu, reg)
    m = mass(u)
    lam = -inner(g, u) / m
    r = g.samples + lam * u.samples
    return float(np.sqrt(np.real(np.vdot(r, r)) * u.grid.cell_volume / m)), lam


def _descend(u: Field, config: FlowConfig) -> FlowResult:
    grid = u.grid
    ws = make_workspace(grid)
    mu, reg, theta = config.mu, config.reg, config.theta
    m_target = theta**2
    kin_inv = 1.0 / (_PRECOND_SHIFT + ws.kx2 + mu * ws.ky2)
    dv = grid.cell_volume

    def ip(a, b):
        return float(np.real(np.vdot(a, b))) * dv

    def retract(a):
        nrm2 = ip(a, a)
        if not np.isfinite(nrm2) or nrm2 <= 0.0:
            raise FlowDivergedError("iterate mass is not finite and positive")
        return a * np.sqrt(m_target / nrm2)

    def energy_of(a):
        return flow_energy(Field(grid, a), mu, reg)

    a = u.samples
    E = energy_of(a)
    history = [E]
    t = config.dt0
    p = r_old = d_old = None
    steps = 0
    converged = False
    res = np.inf
    while True:
        g = first_variation(Field(grid, a), mu, reg).samples
        lam = -ip(g, a) / m_target
        rvec = g + lam * a
        res = float(np.sqrt(ip(rvec, rvec) / m_target))
        if res < config.tol:
            converged = True
            break
        if steps >= config.max_steps:
            break
        rho = a.real**2 + a.imag**2 if np.iscomplexobj(a) else a * a
        if reg.eps_sat > 0:
            pot = np.log(reg.eps_sat + rho.max()) - np.log(reg.eps_sat + rho)
        else:
            pot = np.log(rho.max()) - np.log(np.maximum(rho, TINY))
        scale = 1.0 / np.sqrt(1.0 + pot)

        def precond(v):
            return scale * apply_multiplier(scale * v, kin_inv)

        pg, pu = precond(g), precond(a)
        lam_p = -ip(pg, a) / ip(pu, a)
        res_p = g + lam_p * a
        d = -(pg + lam_p * pu)
        if p is None:
            p = d
        else:
            beta = max(0.0, ip(res_p - r_old, -d) / ip(r_old, -d_old))
            p = d + beta * (p - ip(p, a) / m_target * a)
        r_old, d_old = res_p, d
        # p is orthogonal to a, so the slope is taken against the projected
        # residual, avoiding cancellation against the large <g, p> terms
        p = p - ip(p, a) / m_target * a
        slope = ip(rvec, p)
        if slope >= 0.0:
            p, slope = d, ip(rvec, d)
            if slope >= 0.0:
                log.info("no descent direction left at roundoff (residual %.3e)", res)
                break
        slack = 1e-13 * (abs(E) + m_target)
        while True:
            trial = retract(a + t * p)
            E1 = energy_of(trial)
            step_used = t
            # secant on the projected slope: stays accurate when energy
            # differences sink below roundoff near convergence
            g1 = first_variation(Field(grid, trial), mu, reg).samples
            slope1 = ip(g1 - ip(g1, trial) / m_target * trial, p)
            if slope1 > slope and slope < 0.0:
                t_star = t * slope / (slope - slope1)
                cand = retract(a + t_star * p)
                E2 = energy_of(cand)
                if E2 <= E1 + slack:
                    trial, E1, step_used = cand, E2, t_star
            if E1 <= E + slack:
                break
            t *= 0.5
            if t < config.dt_min:
                log.info("step size fell below dt_min after %d steps (residual %.3e)", steps, res)
                return _finish(Field(grid, a), config, res, steps, False, history)
        a, E = trial, E1
        history.append(E)
        steps += 1
        t = min(2.0 * step_used, _MAX_STEP)
        if steps % 500 == 0:
            log.debug("step %d energy %.15g residual %.3e", steps, E, res)
    return _finish(Field(grid, a), config, res, steps, converged, history)


def _finish(u, config, res, steps, converged, history) -> FlowResult:
    br = energy(u, config.mu, config.reg)
    lam_r, lam_e = lambda_estimates(u, config.mu, config.reg, br.total, config.theta)
    return FlowResult(
        field=u,
        energy=br,
        lambda_rayleigh=lam_r,
        lambda_energy=lam_e,
        residual=res,
        steps=steps,
        converged=converged,
        boundary_mass=boundary_mass(u),
        energy_history=history,
    )


def _better(a: FlowResult, b: FlowResult) -> bool:
    """True when ``a`` beats ``b``: lower energy, ties broken by smaller Ky."""
    tie = 1e-10 * max(1.0, abs(b.m))
    if a.m < b.m - tie:
        return True
    if a.m > b.m + tie:
        return False
    return a.ky < b.ky


def minimize(config: FlowConfig, grid: GridSpec) -> FlowResult:
    """Minimize the mu-weighted energy on the mass sphere of radius ``config.theta``."""
    if config.init != "random":
        return _descend(initial_field(config, grid), config)
    best = None
    energies = []
    for child in np.random.SeedSequence(config.seed).spawn(config.restarts):
        rng = np.random.default_rng(child)
        result = _descend(initial_field(config, grid, rng), config)
        energies.append(result.m)
        if best is None or _better(result, best):
            best = result
    best.restart_energies = energies
    return best


def with_initial(config: FlowConfig, u: Field, **changes) -> FlowConfig:
    """Copy of ``config`` seeded from ``u``."""
    return replace(config, init="file", initial=u, **changes)
