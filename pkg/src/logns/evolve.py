"""Split-step integration of i u_t + Delta u + lambda u log(eps + |u|^2) = 0.

Strang splitting: half a kinetic step, solved exactly in Fourier space, then
a full nonlinear step, then another half kinetic step.  The nonlinear substep
is exact because |u| is pointwise invariant under it, so it is a pure
pointwise phase rotation.

Sign convention (kept in one place): the kinetic flow u_t = i Delta u is
multiplied by exp(-i dt |k|^2) in Fourier space.  With this convention a
stationary state -Delta Q + lam Q = Q log Q^2 evolves as Q exp(+i lam t).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .domain import Field, boundary_mass, kinetic_split, make_workspace, mass
from .energy import (
    RegularizationParams,
    SplitParams,
    TINY,
    f_split_eval,
    saturated_entropy,
)

log = logging.getLogger(__name__)

RESOLUTION_LIMIT = math.pi / 4.0


class EvolutionDivergedError(FloatingPointError):
    """A non-finite sample appeared during time stepping."""


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    steps: int
    reg: RegularizationParams = RegularizationParams()
    lambda_sign: int = 1
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.lambda_sign not in (1, -1):
            raise ValueError("lambda_sign must be +1 or -1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def horizon(self) -> float:
        return self.dt * self.steps


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    mass: float
    energy: float
    orbital_distance: float
    boundary_mass: float


def kinetic_phase(grid, dt: float) -> np.ndarray:
    """Fourier multiplier of the free flow over time dt."""
    ws = make_workspace(grid)
    return np.exp(-1j * dt * (ws.kx2 + ws.ky2))


def _nonlinear(a: np.ndarray, dt: float, reg: RegularizationParams, lam: int) -> np.ndarray:
    rho = a.real**2 + a.imag**2
    if reg.eps_sat > 0:
        lg = np.log(reg.eps_sat + rho)
    else:
        lg = np.zeros_like(rho)
        pos = rho > TINY
        lg[pos] = np.log(rho[pos])
    return a * np.exp(1j * (dt * lam) * lg)


def _check_resolution(grid, dt: float) -> None:
    ws = make_workspace(grid)
    kmax = float(np.max(ws.kx2 + ws.ky2))
    if abs(dt) * kmax > RESOLUTION_LIMIT:
        log.warning("dt*max|k|^2 = %.3g exceeds pi/4; the fastest retained modes are under-resolved in time",
                    abs(dt) * kmax)


def step(field: Field, config: EvolveConfig, direction: int = 1) -> Field:
    """One Strang step of size direction * dt."""
    dt = direction * config.dt
    half = kinetic_phase(field.grid, dt / 2.0)
    a = np.fft.ifftn(half * np.fft.fftn(field.samples))
    a = _nonlinear(a, dt, config.reg, config.lambda_sign)
    a = np.fft.ifftn(half * np.fft.fftn(a))
    if not np.all(np.isfinite(a)):
        raise EvolutionDivergedError("non-finite samples after a time step")
    return field.with_samples(a)


def evolve(
    field: Field,
    config: EvolveConfig,
    callback: Callable[[float, Field], None] | None = None,
    direction: int = 1,
) -> Field:
    """Advance ``config.steps`` Strang steps; consecutive half kinetic steps are fused.

    ``callback(t, u)`` is invoked at t = 0 and after every ``record_every`` steps.
    """
    grid = field.grid
    dt = direction * config.dt
    _check_resolution(grid, dt)
    half = kinetic_phase(grid, dt / 2.0)
    full = half * half
    a = field.samples.astype(complex)
    if callback is not None:
        callback(0.0, field.with_samples(a))
    ah = half * np.fft.fftn(a)
    done = 0
    while done < config.steps:
        chunk = min(config.record_every, config.steps - done)
        for i in range(chunk):
            a = _nonlinear(np.fft.ifftn(ah), dt, config.reg, config.lambda_sign)
            ah = np.fft.fftn(a)
            ah *= half if i == chunk - 1 else full
        done += chunk
        a = np.fft.ifftn(ah)
        if not np.all(np.isfinite(a)):
            raise EvolutionDivergedError(f"non-finite samples after step {done}")
        if callback is not None:
            callback(done * dt, field.with_samples(a))
        if done < config.steps:
            ah = half * ah
    return field.with_samples(a)


def conserved_energy(field: Field, reg: RegularizationParams = RegularizationParams(), lambda_sign: int = 1) -> float:
    """Hamiltonian of the regularized flow; equals I(u) for lambda = 1, eps = 0.

    H = 1/2 int |grad u|^2 - lambda/2 int [(eps+rho) log(eps+rho) - rho - eps log eps].
    """
    kx, ky = kinetic_split(field)
    return 0.5 * (kx + ky) - 0.5 * lambda_sign * (saturated_entropy(field, reg) - mass(field))


@dataclass(frozen=True)
class OrbitalDistance:
    value: float
    h1: float
    f1_gap: float
    shift: tuple[int, ...]
    phase: float


def _h1_weight(grid) -> np.ndarray:
    ws = make_workspace(grid)
    return 1.0 + ws.kx2 + ws.ky2


def orbital_distance(psi: Field, u0: Field, split: SplitParams = SplitParams()) -> OrbitalDistance:
    """inf over grid translations and phases of ||psi - e^{i th} u0(. - tau)||_H1, plus |int F1(psi) - int F1(u0)|.

    The H1 correlation is evaluated for every grid shift at once, so the
    translation search is exhaustive on the grid; the optimal phase for a
    given shift is the argument of the H1 inner product.
    """
    if psi.grid != u0.grid:
        raise ValueError("orbital_distance needs fields on the same grid")
    grid = psi.grid
    w = _h1_weight(grid)
    ph = np.fft.fftn(psi.samples)
    uh = np.fft.fftn(u0.samples)
    corr = np.fft.ifftn(w * np.conj(uh) * ph)
    idx = np.unravel_index(int(np.argmax(np.abs(corr))), corr.shape)
    phase = float(np.angle(corr[idx]))
    moved = np.exp(1j * phase) * np.roll(u0.samples, idx, axis=tuple(range(corr.ndim)))
    diff = np.fft.fftn(psi.samples - moved)
    h1 = math.sqrt(float(np.sum(w * np.abs(diff) ** 2)) * grid.cell_volume / grid.size)
    dv = grid.cell_volume
    f1_psi = float(np.sum(f_split_eval(np.abs(psi.samples), split)[0])) * dv
    f1_u0 = float(np.sum(f_split_eval(np.abs(u0.samples), split)[0])) * dv
    gap = abs(f1_psi - f1_u0)
    shift = tuple(int(i) for i in idx)
    return OrbitalDistance(value=h1 + gap, h1=h1, f1_gap=gap, shift=shift, phase=phase)


def _h1_norm(grid, samples: np.ndarray) -> float:
    w = _h1_weight(grid)
    return math.sqrt(float(np.sum(w * np.abs(np.fft.fftn(samples)) ** 2)) * grid.cell_volume / grid.size)


def h1_normalized_bump(grid, rng: np.random.Generator, orthogonal_to: Field | None = None) -> Field:
    """Random localized complex bump with unit H1 norm.

    With ``orthogonal_to`` the bump is first made L2-orthogonal (real inner
    product) to that field, i.e. tangent to the mass sphere through it.
    """
    from .gradflow import random_bandlimited

    bump = random_bandlimited(grid, rng).samples.astype(complex)
    bump = bump * np.exp(1j * rng.uniform(0, 2 * np.pi))
    if orthogonal_to is not None:
        u = orthogonal_to.samples
        bump = bump - np.real(np.vdot(u, bump)) / np.real(np.vdot(u, u)) * u
    return Field(grid, bump / _h1_norm(grid, bump))


@dataclass
class StabilityReport:
    samples: list[TrajectorySample]
    delta_pert: float
    initial_distance: float

    @property
    def max_distance(self) -> float:
        return max(s.orbital_distance for s in self.samples)

    @property
    def mass_drift(self) -> float:
        m0 = self.samples[0].mass
        return max(abs(s.mass - m0) for s in self.samples) / m0

    @property
    def energy_drift(self) -> float:
        e0 = self.samples[0].energy
        return max(abs(s.energy - e0) for s in self.samples) / max(1.0, abs(e0))


def stability_experiment(
    u0: Field,
    delta_pert: float,
    config: EvolveConfig,
    seed: int = 0,
    bump: Field | None = None,
    snapshot_every: int = 0,
    snapshots: list | None = None,
) -> StabilityReport:
    """Evolve a perturbation of u0 on its mass sphere and track the distance to the orbit of u0.

    The initial datum is u0 + delta_pert * bump rescaled to the mass of u0;
    by default the bump is a random unit-H1 field tangent to that sphere.
    With ``snapshot_every = k`` every k-th recorded state is appended to
    ``snapshots`` as a (t, field) pair.
    """
    if bump is None:
        bump = h1_normalized_bump(u0.grid, np.random.default_rng(seed), orthogonal_to=u0)
    psi0 = u0.with_samples(u0.samples + delta_pert * bump.samples)
    psi0 = psi0 * math.sqrt(mass(u0) / mass(psi0))
    ref = u0.with_samples(u0.samples.astype(complex))
    samples: list[TrajectorySample] = []

    def record(t, u):
        if snapshot_every and snapshots is not None and len(samples) % snapshot_every == 0:
            snapshots.append((t, u))
        samples.append(
            TrajectorySample(
                t=t,
                mass=mass(u),
                energy=conserved_energy(u, config.reg, config.lambda_sign),
                orbital_distance=orbital_distance(u, ref).value,
                boundary_mass=boundary_mass(u),
            )
        )

    evolve(psi0, config, record)
    return StabilityReport(samples=samples, delta_pert=delta_pert, initial_distance=samples[0].orbital_distance)


@dataclass
class GronwallReport:
    times: np.ndarray
    norms: np.ndarray
    tol_growth: float = 1e-9

    @property
    def bound(self) -> np.ndarray:
        return np.exp(4.0 * self.times) * self.norms[0]

    @property
    def holds(self) -> bool:
        return bool(np.all(self.norms <= self.bound * (1.0 + self.tol_growth) + 1e-300))

    @property
    def max_growth_rate(self) -> float:
        """Largest observed (1/t) log(||w(t)|| / ||w(0)||)."""
        if self.norms[0] == 0:
            return 0.0
        t = self.times[1:]
        return float(np.max(np.log(np.maximum(self.norms[1:], 1e-300) / self.norms[0]) / t))


def gronwall_check(u1: Field, u2: Field, config: EvolveConfig, tol_growth: float = 1e-9) -> GronwallReport:
    """Evolve two data side by side and record ||u2(t) - u1(t)||_2."""
    if u1.grid != u2.grid:
        raise ValueError("gronwall_check needs fields on the same grid")
    traj1: list[np.ndarray] = []
    traj2: list[np.ndarray] = []
    times: list[float] = []
    evolve(u1, config, lambda t, u: (traj1.append(u.samples), times.append(t)))
    evolve(u2, config, lambda t, u: traj2.append(u.samples))
    dv = u1.grid.cell_volume
    norms = np.array([math.sqrt(float(np.sum(np.abs(b - a) ** 2)) * dv) for a, b in zip(traj1, traj2)])
    return GronwallReport(times=np.asarray(times), norms=norms, tol_growth=tol_growth)


def log_lipschitz_lhs(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """|Im((z2 log|z2|^2 - z1 log|z1|^2) conj(z2 - z1))| with 0 log 0 = 0."""
    def zlog(z):
        r = np.abs(z) ** 2
        out = np.zeros_like(z, dtype=complex)
        pos = r > TINY
        out[pos] = z[pos] * np.log(r[pos])
        return out

    return np.abs(np.imag((zlog(z2) - zlog(z1)) * np.conj(z2 - z1)))


def log_lipschitz_rhs(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    return 4.0 * np.abs(z2 - z1) ** 2


@dataclass
class EpsilonSequence:
    eps_values: tuple[float, ...]
    successive_distances: list[float] = dc_field(default_factory=list)

    @property
    def decreasing(self) -> bool:
        d = self.successive_distances
        return all(b < a for a, b in zip(d, d[1:]))


def epsilon_sequence(u0: Field, config: EvolveConfig, eps_values=(1e-2, 1e-4, 1e-6)) -> EpsilonSequence:
    """Final states for a decreasing list of eps_sat; L2 distances between neighbours."""
    finals = []
    for eps in eps_values:
        cfg = EvolveConfig(config.dt, config.steps, RegularizationParams(eps), config.lambda_sign, config.steps)
        finals.append(evolve(u0, cfg).samples)
    dv = u0.grid.cell_volume
    dists = [math.sqrt(float(np.sum(np.abs(b - a) ** 2)) * dv) for a, b in zip(finals, finals[1:])]
    return EpsilonSequence(eps_values=tuple(eps_values), successive_distances=dists)
