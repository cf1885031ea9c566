"""Grating geometry of the corrugated mirror and peak extraction from
computed momentum spectra.

The geometry half is a standalone calculator: given the grating period, the
incidence angle and the packet's matter wavelength it returns the allowed
diffraction orders, their in-plane deflection angle theta and azimuthal exit
angle psi. The extraction half locates maxima of a 1D momentum marginal and
maps them onto the momentum-kick ladder q_n = n * nu of the lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GratingGeometry:
    """Scattering geometry: period d, grazing incidence angle, wavelength."""

    d: float
    phi_in: float
    lambda_db: float
    e0: float = 0.0

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("grating period d must be positive")
        if not (0.0 < self.phi_in <= 0.5 * math.pi):
            raise ValueError(f"phi_in={self.phi_in} outside (0, pi/2]")
        if self.lambda_db <= 0:
            raise ValueError("de Broglie wavelength must be positive")

    @property
    def lambda_db_perp(self) -> float:
        """Effective wavelength for motion normal to the grating lines."""
        return self.lambda_db / math.sin(self.phi_in)


@dataclass
class DiffractionSpectrum:
    """Allowed orders (n, theta_n, psi_n) plus measured momentum peaks."""

    orders: list[tuple[int, float, float]]
    peaks: list[tuple[float, float]]


def de_broglie_from_energy(e0: float, k: float) -> float:
    """Matter wavelength of a packet with kinetic energy e0.

    Uses the plane-wave dispersion e0 = k q^2 / 2 and lambda = 2 pi / q,
    i.e. lambda = 2 pi sqrt(k / (2 e0)).
    """
    if e0 <= 0:
        raise ValueError(f"kinetic energy must be positive, got {e0}")
    if k <= 0:
        raise ValueError(f"kinetic coefficient must be positive, got {k}")
    return 2.0 * math.pi * math.sqrt(0.5 * k / e0)


def bragg_orders(geom: GratingGeometry, n_max: int = 8) -> DiffractionSpectrum:
    """Propagating diffraction orders up to |n| <= n_max.

    theta_n solves n * lambda_perp = d sin(theta); psi_n follows from
    tan(psi) = tan(phi_in) sin(theta). Orders with |n lambda_perp / d| > 1 are
    evanescent and omitted. Negative orders mirror positive ones exactly.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    ratio = geom.lambda_db_perp / geom.d
    tan_phi = math.tan(geom.phi_in)
    orders = [(0, 0.0, 0.0)]
    for n in range(1, n_max + 1):
        s = n * ratio
        if abs(s) > 1.0:
            break
        theta = math.asin(s)
        psi = math.atan(tan_phi * math.sin(theta))
        orders.append((n, theta, psi))
        orders.append((-n, -theta, -psi))
    orders.sort(key=lambda o: o[0])
    return DiffractionSpectrum(orders=orders, peaks=[])


def azimuthal_splitting(geom: GratingGeometry) -> float:
    """Small-angle azimuthal spacing of adjacent orders, lambda_db / d.

    Independent of the incidence angle phi_in.
    """
    return geom.lambda_db / geom.d


def invert_period(delta_psi: float, lambda_db: float) -> float:
    """Grating period from a measured azimuthal splitting."""
    if delta_psi <= 0:
        raise ValueError(f"azimuthal splitting must be positive, got {delta_psi}")
    if lambda_db <= 0:
        raise ValueError("de Broglie wavelength must be positive")
    return lambda_db / delta_psi


def extract_peaks(q: np.ndarray, marginal: np.ndarray,
                  threshold_frac: float = 0.05) -> list[tuple[float, float]]:
    """Isolated maxima of a 1D momentum marginal, sorted by |q|.

    A sample is a peak when it exceeds both neighbours by at least
    threshold_frac * max / 10 (prominence against ringing lobes) and its value
    is at least threshold_frac * max. Positions are refined by 3-point
    quadratic interpolation; the weight is the integral of the marginal over
    the contiguous above-threshold cells owned by the peak (shared runs are
    split at the interior minima between adjacent peaks).
    """
    q = np.asarray(q, dtype=float)
    m = np.asarray(marginal, dtype=float)
    if q.shape != m.shape or q.ndim != 1:
        raise ValueError("q and marginal must be 1D arrays of equal length")
    order = np.argsort(q)
    q, m = q[order], m[order]
    top = float(m.max(initial=0.0))
    if top <= 0.0:
        return []
    height = threshold_frac * top
    bump = height / 10.0

    peak_idx = [i for i in range(1, len(m) - 1)
                if m[i] >= height and m[i] > m[i - 1] + bump and m[i] > m[i + 1] + bump]
    if not peak_idx:
        return []

    dq = float(np.median(np.diff(q)))
    above = m >= height
    # ownership boundaries: midpoint minima between consecutive peaks
    cuts = []
    for a, b in zip(peak_idx[:-1], peak_idx[1:]):
        cuts.append(a + int(np.argmin(m[a:b + 1])))
    bounds = [0] + cuts + [len(m)]

    peaks = []
    for j, i in enumerate(peak_idx):
        lo, hi = bounds[j], bounds[j + 1]
        seg = np.arange(lo, hi)
        seg = seg[above[seg]]
        # keep only the contiguous run containing the peak itself
        runs = np.split(seg, np.where(np.diff(seg) > 1)[0] + 1)
        run = next(r for r in runs if i in r)
        weight = float(m[run].sum() * dq)
        a, b, c = m[i - 1], m[i], m[i + 1]
        denom = a - 2.0 * b + c
        off = 0.0 if denom == 0.0 else 0.5 * (a - c) / denom
        peaks.append((float(q[i] + off * dq), weight))

    peaks.sort(key=lambda p: abs(p[0]))
    return peaks
