"""Scalar and field diagnostics: moments, energy functional, momentum density,
bounce-period and width-growth extraction, fringe visibility."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import kernels
from .grid import WaveField, fft2
from .potentials import PotentialField


@dataclass
class TimeSeries:
    """Per-record run diagnostics, one aligned row per sample time."""

    t: np.ndarray
    mean_z: np.ndarray
    mean_x: np.ndarray
    sigma_x: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    edge_density: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        for name in ("mean_z", "mean_x", "sigma_x", "energy", "norm", "edge_density"):
            arr = getattr(self, name)
            if len(arr) != n:
                raise ValueError(f"TimeSeries.{name} length {len(arr)} != t length {n}")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("TimeSeries.t must be strictly increasing")


@dataclass
class BounceReport:
    """Apex statistics of the mean-height signal."""

    peak_times: list[float]
    peak_heights: list[float]
    period_mean: float
    period_trend: float
    decay_per_bounce: float  # mean of h_i - h_{i+1}; positive when apexes sink


def _moments(psi: WaveField):
    s0, sx, sx2, sz = kernels.weighted_sums(psi.amps, psi.grid.x, psi.grid.z)
    if s0 <= 0.0:
        raise ValueError("zero-density field has no moments")
    return s0, sx / s0, sx2 / s0, sz / s0


def mean_z(psi: WaveField) -> float:
    """Density centroid along z."""
    return _moments(psi)[3]


def mean_x(psi: WaveField) -> float:
    """Density centroid along x."""
    return _moments(psi)[1]


def sigma_x(psi: WaveField) -> float:
    """Standard deviation of the density along x (not FWHM)."""
    _, mx, mx2, _ = _moments(psi)
    return float(np.sqrt(max(mx2 - mx * mx, 0.0)))


def energy(psi: WaveField, potential: PotentialField | np.ndarray | None,
           g: float, k: float) -> float:
    """Mean-field energy functional with spectral gradients:

    E = integral of (k/2)|grad psi|^2 + V |psi|^2 + (g/2)|psi|^4.
    """
    grid = psi.grid
    spec = fft2(psi.amps)
    e_kin = 0.5 * k * float(np.sum(grid.q2() * (spec.real**2 + spec.imag**2)))
    e_kin *= grid.cell_area / (grid.nx * grid.nz)
    if potential is None:
        vals = np.zeros(grid.shape)
    else:
        vals = potential.values if isinstance(potential, PotentialField) else potential
    e_pot = kernels.pot_int_sum(psi.amps, vals, g) * grid.cell_area
    return e_kin + e_pot


def momentum_density(psi: WaveField) -> np.ndarray:
    """|psi_hat|^2 on (qz, qx), scaled so sum * dqx * dqz = 1 for unit norm."""
    spec = fft2(psi.amps) * psi.grid.cell_area
    return (spec.real**2 + spec.imag**2) / (4.0 * np.pi**2)


def qx_marginal(psi: WaveField) -> tuple[np.ndarray, np.ndarray]:
    """1D momentum marginal along qx (summed over qz), q-sorted.

    Returns (qx, m) with sum m * dqx = 1 for a unit-norm field.
    """
    grid = psi.grid
    dqz = 2.0 * np.pi / grid.lz
    m = momentum_density(psi).sum(axis=0) * dqz
    order = np.argsort(grid.qx)
    return grid.qx[order], m[order]


def edge_density(psi: WaveField, cells: int = 5) -> float:
    """Total density within `cells` grid cells of any boundary.

    Values above ~1e-3 indicate periodic wrap-around contamination.
    """
    d = psi.density()
    c = cells
    total = d[:c, :].sum() + d[-c:, :].sum() + d[c:-c, :c].sum() + d[c:-c, -c:].sum()
    return float(total) * psi.grid.cell_area


def _quadratic_peak(t: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    # vertex of the parabola through the three samples around index i
    if i == 0 or i == len(y) - 1:
        return float(t[i]), float(y[i])
    a, b, c = y[i - 1], y[i], y[i + 1]
    denom = a - 2.0 * b + c
    if denom == 0.0:
        return float(t[i]), float(b)
    off = 0.5 * (a - c) / denom
    tp = t[i] + off * (t[i + 1] - t[i])
    yp = b - 0.25 * (a - c) * off
    return float(tp), float(yp)


def bounce_report(series: TimeSeries, prominence_frac: float = 0.05) -> BounceReport:
    """Locate mean_z apexes and summarize period and apex decay.

    Peaks are interior local maxima with prominence above
    prominence_frac * (signal range), refined by 3-point quadratic
    interpolation; raw stride-level times are too coarse for period fits.
    """
    y = np.asarray(series.mean_z, dtype=float)
    rng = float(y.max() - y.min())
    idx, _ = find_peaks(y, prominence=prominence_frac * rng if rng > 0 else None)
    if len(idx) < 2:
        raise ValueError(f"need at least 2 mean_z maxima, found {len(idx)}")
    refined = [_quadratic_peak(series.t, y, i) for i in idx]
    times = [p[0] for p in refined]
    heights = [p[1] for p in refined]
    gaps = np.diff(times)
    trend = float(np.polyfit(np.arange(len(gaps)), gaps, 1)[0]) if len(gaps) > 1 else 0.0
    decay = float(-np.mean(np.diff(heights)))
    return BounceReport(
        peak_times=times,
        peak_heights=heights,
        period_mean=float(np.mean(gaps)),
        period_trend=trend,
        decay_per_bounce=decay,
    )


def width_growth(series: TimeSeries, t_fit_start: float = 10.0) -> float:
    """Least-squares slope of sigma_x(t) over t >= t_fit_start."""
    mask = np.asarray(series.t) >= t_fit_start
    t = np.asarray(series.t)[mask]
    s = np.asarray(series.sigma_x)[mask]
    if len(t) < 2 or t[-1] == t[0]:
        raise ValueError(
            f"degenerate fit window: {len(t)} samples at t >= {t_fit_start}")
    return float(np.polyfit(t, s, 1)[0])


def fringe_visibility(psi: WaveField,
                      window: tuple[float, float, float, float]) -> float:
    """(max-min)/(max+min) of the z-integrated density profile along x.

    `window` is (x_lo, x_hi, z_lo, z_hi) in grid coordinates.
    """
    x_lo, x_hi, z_lo, z_hi = window
    grid = psi.grid
    xi = (grid.x >= x_lo) & (grid.x <= x_hi)
    zi = (grid.z >= z_lo) & (grid.z <= z_hi)
    if not xi.any() or not zi.any():
        raise ValueError(f"window {window} contains no grid points")
    profile = psi.density()[np.ix_(zi, xi)].sum(axis=0) * grid.dz
    hi, lo = float(profile.max()), float(profile.min())
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)
