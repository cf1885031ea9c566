"""Uniform periodic 2D grid and the complex field living on it.

Conventions fixed here and relied on everywhere else:

* fields are stored as ``amps[j, i]`` with z along axis 0 (outer) and x along
  axis 1 (inner), matching the row-major file layout;
* wavenumbers follow the DFT convention ``q[i] = 2*pi*f(i)/L`` with
  ``f(i) = i`` for ``i < n/2`` and ``i - n`` above (negative Nyquist);
* ``norm = sum |amps|^2 * dx * dz`` approximates the continuum integral.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

from . import kernels

_WORKERS = kernels.THREADS


def fft2(a: np.ndarray) -> np.ndarray:
    return _fft.fft2(a, workers=_WORKERS)


def ifft2(a: np.ndarray) -> np.ndarray:
    return _fft.ifft2(a, workers=_WORKERS)


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable uniform periodic grid with cached coordinate and q arrays."""

    nx: int
    nz: int
    dx: float
    dz: float
    x_min: float
    z_min_dom: float
    x: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    qx: np.ndarray = field(repr=False)
    qz: np.ndarray = field(repr=False)

    @property
    def lx(self) -> float:
        return self.nx * self.dx

    @property
    def lz(self) -> float:
        return self.nz * self.dz

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nz, self.nx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dz

    def q2(self) -> np.ndarray:
        """qx^2 + qz^2 broadcast to field shape (nz, nx)."""
        return self.qz[:, None] ** 2 + self.qx[None, :] ** 2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Z) coordinate arrays broadcastable to field shape."""
        return self.x[None, :], self.z[:, None]


def make_grid(nx: int, nz: int, dx: float = 0.083, dz: float = 0.083,
              x_min: float = -21.25, z_min_dom: float = -2.0) -> Grid:
    """Build a grid; defaults give the production 512x512 domain."""
    for name, n in (("nx", nx), ("nz", nz)):
        if n < 4:
            raise ValueError(f"{name}={n} too small, need at least 4 points")
        if n % 2:
            raise ValueError(f"{name}={n} must be even for spectral symmetry")
    if dx <= 0 or dz <= 0:
        raise ValueError(f"grid spacings must be positive, got dx={dx}, dz={dz}")
    x = x_min + dx * np.arange(nx)
    z = z_min_dom + dz * np.arange(nz)
    qx = 2.0 * np.pi * _fft.fftfreq(nx, d=dx)
    qz = 2.0 * np.pi * _fft.fftfreq(nz, d=dz)
    return Grid(nx=nx, nz=nz, dx=float(dx), dz=float(dz),
                x_min=float(x_min), z_min_dom=float(z_min_dom),
                x=x, z=z, qx=qx, qz=qz)


@dataclass
class WaveField:
    """Complex condensate amplitude on a grid, with a time stamp."""

    grid: Grid
    amps: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.amps.shape != self.grid.shape:
            raise ValueError(
                f"amps shape {self.amps.shape} does not match grid {self.grid.shape}")
        if self.amps.dtype != np.complex128:
            self.amps = self.amps.astype(np.complex128)

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.amps.copy(), self.time)

    def density(self) -> np.ndarray:
        return self.amps.real**2 + self.amps.imag**2


def norm(psi: WaveField) -> float:
    """sum |psi|^2 dx dz."""
    return kernels.abs2_sum(psi.amps) * psi.grid.cell_area


def normalize(psi: WaveField) -> WaveField:
    """Scale in place to unit norm; pointwise phase is untouched."""
    n = norm(psi)
    if not (n > 0.0):  # also catches NaN
        raise ValueError(f"cannot normalize field with norm {n} (collapsed state?)")
    kernels.scale(psi.amps, 1.0 / np.sqrt(n))
    return psi


def transform_to_momentum(psi: WaveField) -> np.ndarray:
    """Continuum-normalized spectrum on (qz, qx): fft2(amps) * dx * dz.

    Round-trips with :func:`transform_from_momentum` to 1e-12 relative.
    """
    return fft2(psi.amps) * psi.grid.cell_area


def transform_from_momentum(grid: Grid, spec: np.ndarray, time: float = 0.0) -> WaveField:
    return WaveField(grid, ifft2(spec / grid.cell_area), time)
