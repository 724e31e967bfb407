"""Sweep the anisotropy weight mu and classify the y-dependence of minimizers.

For each mu the constrained minimizer of I_mu is computed and compared with
the y-independent reference (2 pi)^n m~ at reduced mass theta^2 / (2 pi)^n.
The classification follows the two-case picture: either minimizers stay
y-dependent (gap < 0) for every sampled mu, or the gap closes on a terminal
segment mu >= mu_*.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .domain import Field, GridSpec, kinetic_split, mass, sqrt_neg_laplacian_y
from .gradflow import FlowConfig, FlowResult, minimize, with_initial
from .oracle import reduced_mass, waveguide_reference

log = logging.getLogger(__name__)

CSV_HEADER = ("mu", "m", "Kx", "Ky", "muKy", "lambda", "gap", "ydep", "converged")
MONOTONE_TOL = 1e-8
REDUCED_AGREEMENT = 1e-6


def default_mu_list(count: int = 13, lo: float = -2.0, hi: float = 3.0) -> tuple[float, ...]:
    return tuple(float(m) for m in np.logspace(lo, hi, count))


@dataclass(frozen=True)
class MuScanConfig:
    theta: float
    grid: GridSpec
    mu_list: tuple[float, ...] = default_mu_list()
    base: FlowConfig | None = None
    warm_start: bool = True
    sentinels: int = 3

    def __post_init__(self):
        mus = np.asarray(self.mu_list, dtype=float)
        if mus.ndim != 1 or mus.size == 0:
            raise ValueError("mu_list must be a non-empty sequence")
        if np.any(mus <= 0) or np.any(np.diff(mus) <= 0):
            raise ValueError("mu_list must be positive and strictly increasing")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        object.__setattr__(self, "mu_list", tuple(float(m) for m in mus))
        if self.base is None:
            object.__setattr__(self, "base", FlowConfig(theta=self.theta, init="random"))
        elif self.base.theta != self.theta:
            raise ValueError("base flow config carries a different theta")

    @property
    def ydep_threshold(self) -> float:
        return 1e-6 * self.theta**2


@dataclass
class MuScanRecord:
    mu: float
    m: float
    kx: float
    ky: float
    lambda_rayleigh: float
    reduced_ref: float
    converged: bool
    ydep: bool
    residual: float = math.nan
    w_norm_sq: float = math.nan
    cold_m: float | None = None

    @property
    def mu_ky(self) -> float:
        return self.mu * self.ky

    @property
    def gap(self) -> float:
        return self.m - self.reduced_ref

    def csv_row(self) -> tuple:
        return (self.mu, self.m, self.kx, self.ky, self.mu_ky, self.lambda_rayleigh, self.gap,
                int(self.ydep), int(self.converged))


def _record(mu: float, res: FlowResult, ref: float, threshold: float) -> MuScanRecord:
    kx, ky = kinetic_split(res.field)
    return MuScanRecord(
        mu=mu,
        m=res.m,
        kx=kx,
        ky=ky,
        lambda_rayleigh=res.lambda_rayleigh,
        reduced_ref=ref,
        converged=res.converged,
        ydep=ky > threshold,
        residual=res.residual,
        w_norm_sq=mass(sqrt_neg_laplacian_y(res.field)),
    )


def _sentinel_indices(count: int, k: int) -> list[int]:
    if k <= 0:
        return []
    return sorted(set(int(round(i)) for i in np.linspace(0, count - 1, min(k, count))))


def scan(config: MuScanConfig) -> list[MuScanRecord]:
    """One record per mu, in increasing mu order.

    With warm starts every flow is seeded from the previous minimizer; a few
    cold restarts at sentinel mu values replace a record when they find a
    lower energy, guarding against following a non-minimal branch.
    """
    ref = waveguide_reference(config.theta, config.grid.d, config.grid.n)
    records: list[MuScanRecord] = []
    prev: Field | None = None
    for mu in config.mu_list:
        if config.warm_start and prev is not None:
            flow = with_initial(config.base, prev, mu=mu)
        else:
            flow = replace(config.base, mu=mu)
        res = minimize(flow, config.grid)
        if not res.converged:
            log.warning("flow at mu=%g did not converge (residual %.3e)", mu, res.residual)
        records.append(_record(mu, res, ref, config.ydep_threshold))
        prev = res.field
    if config.warm_start:
        for i in _sentinel_indices(len(records), config.sentinels):
            rec = records[i]
            cold = minimize(replace(config.base, mu=rec.mu), config.grid)
            rec.cold_m = cold.m
            if cold.m < rec.m - MONOTONE_TOL:
                log.warning("cold start at mu=%g beat the warm branch by %.3e", rec.mu, rec.m - cold.m)
                new = _record(rec.mu, cold, ref, config.ydep_threshold)
                new.cold_m = cold.m
                records[i] = new
    return records


@dataclass(frozen=True)
class ReducedReference:
    closed_form: float
    numeric: float

    @property
    def relative_gap(self) -> float:
        return abs(self.numeric - self.closed_form) / max(abs(self.closed_form), 1e-300)

    @property
    def agrees(self) -> bool:
        return self.relative_gap < REDUCED_AGREEMENT or abs(self.numeric - self.closed_form) < 1e-10


def reduced_reference(theta: float, grid: GridSpec, base: FlowConfig | None = None) -> ReducedReference:
    """(2 pi)^n m~ from the closed form and from an n = 0 solve on the x-grid."""
    closed = waveguide_reference(theta, grid.d, grid.n)
    rgrid = grid.reduced()
    theta_red = math.sqrt(reduced_mass(theta, grid.n))
    flow = FlowConfig(theta=theta_red, mu=0.0, init="random", restarts=1) if base is None else replace(
        base, theta=theta_red, mu=0.0, initial=None, init="random"
    )
    res = minimize(flow, rgrid)
    return ReducedReference(closed_form=closed, numeric=(2.0 * math.pi) ** grid.n * res.m)


@dataclass(frozen=True)
class Classification:
    case: int
    mu_star: float | None
    monotone: bool
    tol: float

    def __str__(self) -> str:
        if self.case == 2:
            return f"Case2(mu*~{self.mu_star:g})"
        return "Case1"


def case_tolerance(reference: float) -> float:
    return max(1e-8, 1e-6 * abs(reference))


def classify(records, reference: float) -> Classification:
    """Case 2 when the gap vanishes on a terminal mu-segment, Case 1 otherwise."""
    recs = sorted(records, key=lambda r: r.mu)
    if len(recs) < 3:
        raise ValueError("classification needs at least three records")
    tol = case_tolerance(reference)
    ms = [r.m for r in recs]
    monotone = all(b >= a - MONOTONE_TOL for a, b in zip(ms, ms[1:]))
    k = len(recs)
    while k > 0 and abs(recs[k - 1].m - reference) < tol:
        k -= 1
    if k == len(recs):
        return Classification(case=1, mu_star=None, monotone=monotone, tol=tol)
    return Classification(case=2, mu_star=recs[k].mu, monotone=monotone, tol=tol)
