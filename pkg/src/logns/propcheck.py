"""Property suites for identities and inequalities checkable by direct computation.

Each suite returns a :class:`SuiteResult` holding a pass flag and a CSV-ready
table, so the command line can report them uniformly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterator

import numpy as np

from .domain import Field, GridSpec, mass
from .energy import SplitParams, energy, entropy, f_split_eval, gn_ratio
from .evolve import log_lipschitz_lhs, log_lipschitz_rhs
from .gradflow import FlowConfig, minimize, random_bandlimited
from .oracle import gausson_energy, gausson_profile

ENSEMBLE_KINDS = ("bandlimited", "gausson-mixture", "tent-tensor")


@dataclass(frozen=True)
class SampleEnsemble:
    grid: GridSpec
    seed: int = 0
    count: int = 20
    kind: str = "bandlimited"

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"kind must be one of {ENSEMBLE_KINDS}")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    def fields(self) -> Iterator[Field]:
        rng = np.random.default_rng(self.seed)
        for _ in range(self.count):
            yield self._draw(rng)

    def _draw(self, rng: np.random.Generator) -> Field:
        g = self.grid
        if self.kind == "bandlimited":
            f = random_bandlimited(g, rng)
            return f.with_samples(f.samples * np.exp(1j * rng.uniform(0, 2 * np.pi, g.shape) * 0.3))
        if self.kind == "gausson-mixture":
            if g.d < 1:
                raise ValueError("gausson mixtures need d >= 1")
            out = np.zeros(g.shape, dtype=complex)
            for _ in range(rng.integers(1, 4)):
                amp = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
                out += amp * gausson_profile(g, rng.uniform(1.0, 10.0), shift=rng.uniform(-g.L / 3, g.L / 3))
            return Field(g, out)
        from .bounds import TentParams, tensor_testfield

        a = rng.uniform(0.5, 2.5)
        return tensor_testfield(rng.uniform(1.0, 8.0), TentParams(a, min(0.1, 0.4 * a)), g)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    header: tuple[str, ...]
    rows: list[tuple] = dc_field(default_factory=list)
    summary: dict = dc_field(default_factory=dict)


def split_identity_deviation(s: np.ndarray, params: SplitParams = SplitParams()) -> np.ndarray:
    """|F2 - F1 - s^2 log(s^2) / 2| / (1 + s^2 |log s^2|)."""
    s = np.asarray(s, dtype=float)
    f1, f2 = f_split_eval(s, params)
    s2 = s * s
    lg = np.zeros_like(s2)
    pos = s2 > 0
    lg[pos] = np.log(s2[pos])
    return np.abs(f2 - f1 - 0.5 * s2 * lg) / (1.0 + s2 * np.abs(lg))


def split_identity_suite(samples: int = 10**6, seed: int = 0, params: SplitParams = SplitParams(), tol: float = 1e-12):
    rng = np.random.default_rng(seed)
    # magnitudes spread over many decades, both signs, and the threshold itself
    s = np.sign(rng.standard_normal(samples)) * 10.0 ** rng.uniform(-8, 3, samples)
    s[:3] = (0.0, params.delta, -params.delta)
    dev = split_identity_deviation(s, params)
    worst = float(np.max(dev))
    return SuiteResult("split", worst < tol, ("samples", "max_deviation"), [(samples, worst)],
                       {"max_deviation": worst})


def scaling_identity_check(u: Field, xi_list, mu: float = 1.0) -> float:
    """max_xi |I(xi u) - xi^2 I(u) + xi^2 log(xi) M(u)| / (1 + |I(u)|), exact log."""
    base = energy(u, mu).total
    m = mass(u)
    worst = 0.0
    for xi in xi_list:
        if not xi > 0:
            raise ValueError("scaling factors must be positive")
        lhs = energy(u * xi, mu).total
        dev = abs(lhs - xi**2 * base + xi**2 * math.log(xi) * m)
        worst = max(worst, dev / (1.0 + abs(base)))
    return worst


def scaling_suite(ensemble: SampleEnsemble, xi_list=(0.5, math.e, 10.0), tol: float = 1e-10) -> SuiteResult:
    rows = []
    for i, u in enumerate(ensemble.fields()):
        rows.append((i, scaling_identity_check(u, xi_list)))
    worst = max(r[1] for r in rows)
    return SuiteResult("scaling", worst < tol, ("field", "max_deviation"), rows, {"max_deviation": worst})


def log_lipschitz_suite(pairs: int = 10**6, seed: int = 0) -> SuiteResult:
    """The pointwise bound |Im((z2 log|z2|^2 - z1 log|z1|^2) conj(z2 - z1))| <= 4 |z2 - z1|^2."""
    rng = np.random.default_rng(seed)

    def draw():
        r = 10.0 ** rng.uniform(-6, 3, pairs)
        return r * np.exp(1j * rng.uniform(0, 2 * np.pi, pairs))

    z1 = draw()
    z2 = draw()
    # a quarter of the pairs are near-coincident, where the bound is tightest
    near = slice(0, pairs // 4)
    z2[near] = z1[near] * (1.0 + 10.0 ** rng.uniform(-8, -1, pairs // 4) * np.exp(1j * rng.uniform(0, 2 * np.pi, pairs // 4)))
    z2[0] = z1[0]
    lhs = log_lipschitz_lhs(z1, z2)
    rhs = log_lipschitz_rhs(z1, z2)
    # allow for roundoff in forming both sides
    slack = 1e-12 * (np.abs(z1) ** 2 + np.abs(z2) ** 2) * (1.0 + np.abs(np.log(np.abs(z1) ** 2 + np.abs(z2) ** 2)))
    excess = lhs - rhs - slack
    violations = int(np.sum(excess > 0))
    nz = rhs > 0
    ratio = float(np.max(lhs[nz] / rhs[nz]))
    return SuiteResult("log-lipschitz", violations == 0, ("pairs", "violations", "max_ratio"), [(pairs, violations, ratio)],
                       {"violations": violations, "max_ratio": ratio})


def brezis_lieb_residual(u: Field, v: Field, shift: int, axis: int = 0) -> float:
    """|int(|u_n|^2 log|u_n|^2 - |v_n|^2 log|v_n|^2) - int |u|^2 log|u|^2| with u_n = u + v_n, v_n = v shifted."""
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    vs = np.roll(v.samples, shift, axis=axis)
    un = u.with_samples(u.samples + vs)
    return abs(entropy(un) - entropy(v.with_samples(vs)) - entropy(u))


def brezis_lieb_suite(grid: GridSpec, mass_red: float = 1.0, fractions=(0.25, 0.5, 0.75)) -> SuiteResult:
    """Residuals for two Gaussons separated by the given fractions of L."""
    g = gausson_profile(grid, mass_red)
    u = Field(grid, g)
    rows = []
    for frac in fractions:
        cells = int(round(frac * grid.L / grid.dx))
        rows.append((frac, cells, brezis_lieb_residual(u, u, cells)))
    res = [r[2] for r in rows]
    ok = all(b < a or a == 0.0 for a, b in zip(res, res[1:]))
    return SuiteResult("brezis-lieb", ok, ("fraction_of_L", "shift_cells", "residual"), rows)


@dataclass(frozen=True)
class SubadditivityReport:
    theta1: float
    theta2: float
    m1: float
    m2: float
    closed_margin: float
    converged: bool

    @property
    def margin(self) -> float:
        """m(theta1) - (theta1^2 / theta2^2) m(theta2)."""
        return self.m1 - (self.theta1**2 / self.theta2**2) * self.m2

    @property
    def positive(self) -> bool:
        return self.margin > -1e-8


def reduced_subadditivity_margin(mass1: float, mass2: float, d: int = 1) -> tuple[float, float]:
    """(oracle margin, closed form 1/2 Theta1^2 log(Theta2^2/Theta1^2)) for reduced masses Theta_i^2."""
    oracle = gausson_energy(mass1, d) - (mass1 / mass2) * gausson_energy(mass2, d)
    return oracle, 0.5 * mass1 * math.log(mass2 / mass1)


def subadditivity_check(
    theta1: float,
    theta2: float,
    grid: GridSpec | None = None,
    solver: Callable[[float], tuple[float, bool]] | None = None,
    mu: float = 1.0,
) -> SubadditivityReport:
    """Compare m at two masses; ``solver(theta) -> (m, converged)`` defaults to a gradflow run on ``grid``."""
    if not 0 < theta1 < theta2:
        raise ValueError("need 0 < theta1 < theta2")
    if solver is None:
        if grid is None:
            raise ValueError("either a grid or a solver is required")

        def solver(theta):
            res = minimize(FlowConfig(theta=theta, mu=mu, init="random"), grid)
            return res.m, res.converged

    m1, c1 = solver(theta1)
    m2, c2 = solver(theta2)
    d = grid.d if grid is not None else 1
    return SubadditivityReport(theta1, theta2, m1, m2, reduced_subadditivity_margin(theta1**2, theta2**2, d)[1], c1 and c2)


def gn_sweep(ensemble: SampleEnsemble, alpha: float) -> tuple[float, list[tuple[int, float]]]:
    """Largest Gagliardo-Nirenberg ratio over the ensemble (an empirical lower bound on the constant)."""
    table = [(i, gn_ratio(u, alpha)) for i, u in enumerate(ensemble.fields())]
    return max(r for _, r in table), table


def gn_suite(ensemble: SampleEnsemble, alpha: float = 1.0) -> SuiteResult:
    worst, table = gn_sweep(ensemble, alpha)
    return SuiteResult("gn", bool(np.isfinite(worst) and worst > 0), ("field", "ratio"), table, {"max_ratio": worst})


def subadditivity_suite(grid: GridSpec, pairs=((4.0, 6.0), (6.0, 8.0)), mu: float = 1.0) -> SuiteResult:
    rows = []
    for t1, t2 in pairs:
        rep = subadditivity_check(t1, t2, grid, mu=mu)
        rows.append((t1, t2, rep.m1, rep.m2, rep.margin, rep.closed_margin, int(rep.converged)))
    ok = all(r[4] > -1e-8 for r in rows)
    return SuiteResult("subadditivity", ok, ("theta1", "theta2", "m1", "m2", "margin", "reduced_margin", "converged"),
                       rows)


def default_grid() -> GridSpec:
    return GridSpec(d=1, n=1)


SUITES = ("scaling", "split", "log-lipschitz", "gn", "brezis-lieb", "subadditivity")


def run_suite(name: str, seed: int = 0, grid: GridSpec | None = None) -> SuiteResult:
    grid = grid or default_grid()
    if name == "scaling":
        return scaling_suite(SampleEnsemble(grid, seed=seed, count=20))
    if name == "split":
        return split_identity_suite(seed=seed)
    if name == "log-lipschitz":
        return log_lipschitz_suite(seed=seed)
    if name == "gn":
        return gn_suite(SampleEnsemble(grid, seed=seed, count=100))
    if name == "brezis-lieb":
        return brezis_lieb_suite(grid)
    if name == "subadditivity":
        return subadditivity_suite(grid)
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
