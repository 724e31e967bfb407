"""Discretization of the waveguide R^d x T^n.

The unbounded axes are truncated to the periodic box [-L, L) and every axis is
differentiated spectrally.  Fields are stored as dense tensors with the
x-axes first and the y-axes last; the torus period is always 2*pi.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

TORUS_PERIOD = 2.0 * np.pi


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L, L)^d x [0, 2pi)^n."""

    d: int
    n: int
    L: float = 12.0
    points_x: int = 256
    points_y: int = 32

    def __post_init__(self):
        if self.d < 0 or self.n < 0 or self.d + self.n < 1:
            raise ValueError(f"need d, n >= 0 and d + n >= 1, got d={self.d}, n={self.n}")
        for name in ("points_x", "points_y"):
            p = getattr(self, name)
            if p < 8 or p % 2:
                raise ValueError(f"{name} must be even and >= 8, got {p}")
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"half width L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_x,) * self.d + (self.points_y,) * self.n

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.points_x

    @property
    def dy(self) -> float:
        return TORUS_PERIOD / self.points_y

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d * self.dy**self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def x_axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.points_x)

    def y_axis(self) -> np.ndarray:
        return self.dy * np.arange(self.points_y)

    def axis_coordinates(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        ndim = self.d + self.n
        out = []
        for ax in range(ndim):
            base = self.x_axis() if ax < self.d else self.y_axis()
            shape = [1] * ndim
            shape[ax] = base.size
            out.append(base.reshape(shape))
        return out

    def radius_sq_x(self) -> np.ndarray:
        """|x|^2 broadcast to the full grid shape."""
        r2 = np.zeros(self.shape)
        for c in self.axis_coordinates()[: self.d]:
            r2 = r2 + c**2
        return r2

    def reduced(self) -> "GridSpec":
        """The same x-discretization with the torus factor removed."""
        return GridSpec(d=self.d, n=0, L=self.L, points_x=self.points_x, points_y=self.points_y)


@dataclass(frozen=True)
class Field:
    """Samples of a (generally complex) function on a grid."""

    grid: GridSpec
    samples: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.dtype.kind == "c":
            s = s.astype(np.complex128, copy=False)
        else:
            s = s.astype(np.float64, copy=False)
        if s.shape != self.grid.shape:
            raise ValueError(f"sample shape {s.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)

    def with_samples(self, samples: np.ndarray) -> "Field":
        return Field(self.grid, samples)

    def __mul__(self, scale) -> "Field":
        return Field(self.grid, self.samples * scale)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralWorkspace:
    grid: GridSpec
    kx: np.ndarray          # 1-D wavenumbers of an unbounded axis
    ky: np.ndarray          # 1-D integer wavenumbers of a torus axis
    kx2: np.ndarray         # sum of squared x wavenumbers, full grid shape
    ky2: np.ndarray         # sum of squared y wavenumbers, full grid shape
    abs_ky: np.ndarray      # sqrt(ky2), multiplier of sqrt(-Delta_y)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=32)
def make_workspace(spec: GridSpec) -> SpectralWorkspace:
    """Wavenumber tensors for ``spec`` (cached; arrays are read-only)."""
    if not isinstance(spec, GridSpec):
        raise TypeError("make_workspace expects a GridSpec")
    kx = 2.0 * np.pi * np.fft.fftfreq(spec.points_x, d=spec.dx)
    ky = np.fft.fftfreq(spec.points_y, d=1.0 / spec.points_y)
    ndim = spec.d + spec.n
    kx2 = np.zeros(spec.shape)
    ky2 = np.zeros(spec.shape)
    for ax in range(ndim):
        shape = [1] * ndim
        if ax < spec.d:
            shape[ax] = spec.points_x
            kx2 = kx2 + (kx**2).reshape(shape)
        else:
            shape[ax] = spec.points_y
            ky2 = ky2 + (ky**2).reshape(shape)
    return SpectralWorkspace(
        grid=spec,
        kx=_frozen(kx),
        ky=_frozen(ky),
        kx2=_frozen(kx2),
        ky2=_frozen(ky2),
        abs_ky=_frozen(np.sqrt(ky2)),
    )


def apply_multiplier(samples: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    """Apply a real Fourier multiplier; real input gives real output."""
    out = np.fft.ifftn(multiplier * np.fft.fftn(samples))
    if not np.iscomplexobj(samples) and np.isrealobj(multiplier):
        return out.real
    return out


def inner(u: Field, v: Field) -> float:
    """Real L^2 inner product Re <u, v> with trapezoid weights."""
    return float(np.real(np.vdot(u.samples, v.samples))) * u.grid.cell_volume


def mass(field: Field) -> float:
    a = field.samples
    return float(np.sum(a.real**2 + a.imag**2) if np.iscomplexobj(a) else np.sum(a * a)) * field.grid.cell_volume


def spectral_mass(field: Field) -> float:
    """Mass evaluated from Fourier coefficients (Parseval)."""
    uh = np.fft.fftn(field.samples)
    return float(np.sum(np.abs(uh) ** 2)) * field.grid.cell_volume / field.grid.size


def kinetic_split(field: Field) -> tuple[float, float]:
    """(int |grad_x u|^2, int |grad_y u|^2) computed via Parseval."""
    ws = make_workspace(field.grid)
    power = np.abs(np.fft.fftn(field.samples)) ** 2
    scale = field.grid.cell_volume / field.grid.size
    return float(np.sum(ws.kx2 * power)) * scale, float(np.sum(ws.ky2 * power)) * scale


def neg_laplacian(field: Field, mu: float = 1.0) -> Field:
    """-Delta_x u - mu Delta_y u."""
    ws = make_workspace(field.grid)
    return field.with_samples(apply_multiplier(field.samples, ws.kx2 + mu * ws.ky2))


def neg_laplacian_y(field: Field) -> Field:
    ws = make_workspace(field.grid)
    return field.with_samples(apply_multiplier(field.samples, ws.ky2))


def sqrt_neg_laplacian_y(field: Field) -> Field:
    ws = make_workspace(field.grid)
    return field.with_samples(apply_multiplier(field.samples, ws.abs_ky))


def h1_norm(field: Field) -> float:
    kx, ky = kinetic_split(field)
    return float(np.sqrt(mass(field) + kx + ky))


def normalize(field: Field, theta: float) -> Field:
    """Rescale ``field`` onto the sphere ||u||_2 = theta."""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    m = mass(field)
    if m <= 0.0:
        raise ValueError("cannot normalize the zero field")
    return field * (theta / np.sqrt(m))


def boundary_slab(grid: GridSpec) -> np.ndarray:
    """Boolean mask of the outer sixteenth of every unbounded axis."""
    mask = np.zeros(grid.shape, dtype=bool)
    width = max(1, grid.points_x // 16)
    for ax in range(grid.d):
        idx = [slice(None)] * (grid.d + grid.n)
        idx[ax] = np.r_[0:width, grid.points_x - width : grid.points_x]
        mask[tuple(idx)] = True
    return mask


def boundary_mass(field: Field) -> float:
    """Mass carried by the boundary slab; zero when d == 0."""
    if field.grid.d == 0:
        return 0.0
    a = np.abs(field.samples[boundary_slab(field.grid)])
    return float(np.sum(a * a)) * field.grid.cell_volume


def boundary_amplitude(field: Field) -> float:
    if field.grid.d == 0:
        return 0.0
    return float(np.max(np.abs(field.samples[boundary_slab(field.grid)])))


def shift(field: Field, cells: int | tuple[int, ...], axis: int | tuple[int, ...] = 0) -> Field:
    """Circular shift by whole grid cells."""
    return field.with_samples(np.roll(field.samples, cells, axis=axis))
