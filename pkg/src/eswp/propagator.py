"""Strang split-operator stepping in real and imaginary time, ground-state
relaxation, and the trap-release protocol.

One Strang step is half-kinetic (momentum space), a full potential+nonlinear
phase rotation (real space, density frozen at sub-step entry - exact for the
combined flow since it leaves |psi| invariant), then half-kinetic again. Long
real-time stretches merge adjacent kinetic half-steps into full steps, which
is algebraically the same composition at half the FFT cost; the state is
closed back onto a step boundary before anything is observed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import Grid, WaveField, fft2, ifft2, normalize
from .observables import TimeSeries, edge_density, energy
from .potentials import PotentialField, SimParams, initial_trap_potential, eswp_potential


class StepDivergenceError(RuntimeError):
    """Raised when the field stops being finite mid-run."""


class ConvergenceError(RuntimeError):
    """Imaginary-time relaxation hit the iteration cap."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def gaussian_packet(grid: Grid, x0: float = 0.0, z0: float = 0.0,
                    sigma0: float = 1.0, qx0: float = 0.0, qz0: float = 0.0) -> WaveField:
    """Unit-norm Gaussian whose density has standard deviation sigma0 per axis."""
    x, z = grid.mesh()
    amps = np.exp(-((x - x0) ** 2 + (z - z0) ** 2) / (4.0 * sigma0**2)).astype(np.complex128)
    if qx0 != 0.0 or qz0 != 0.0:
        amps = amps * np.exp(1j * (qx0 * x + qz0 * z))
    return normalize(WaveField(grid, np.ascontiguousarray(amps)))


class SplitStepper:
    """Owns one evolving field; single writer, synchronous step calls.

    mode "real" advances i dpsi/dt = (-(k/2) lap + V + g|psi|^2) psi; mode
    "imag" substitutes dt -> -i*imag_dt and renormalizes after every step.
    Kinetic phase tables are cached and rebuilt whenever dt changes.
    """

    def __init__(self, psi: WaveField, potential: PotentialField,
                 params: SimParams, mode: str = "real", dt: float | None = None):
        if psi.grid is not potential.grid and psi.grid.shape != potential.grid.shape:
            raise ValueError("field and potential live on different grids")
        if mode not in ("real", "imag"):
            raise ValueError(f"mode must be 'real' or 'imag', got {mode!r}")
        self.psi = psi
        self.potential = potential
        self.params = params
        self.mode = mode
        self.step_index = 0
        self._dt = 0.0
        self.set_dt(dt if dt is not None else
                    (params.dt if mode == "real" else params.imag_dt))

    @property
    def dt(self) -> float:
        return self._dt

    def set_dt(self, dt: float) -> None:
        if dt <= 0:
            raise ValueError("dt must be positive")
        if dt == self._dt:
            return
        self._dt = dt
        q2 = self.psi.grid.q2()
        w = 0.5 * self.params.k * q2
        if self.mode == "real":
            self._kin_half = np.exp(-0.5j * dt * w)
            self._kin_full = np.exp(-1.0j * dt * w)
        else:
            if dt > 0.01:
                warnings.warn(
                    f"imaginary time step {dt} > 0.01 may be unstable", stacklevel=2)
            self._kin_half = np.exp(-0.5 * dt * w)
            self._kin_full = np.exp(-dt * w)

    def _phase(self, amps) -> None:
        p = self.params
        if self.mode == "real":
            kernels.phase_rotate(amps, self.potential.values, p.g, self._dt)
        else:
            kernels.decay(amps, self.potential.values, p.g, self._dt)

    def _check_finite(self) -> None:
        ok, peak = kernels.finite_absmax(self.psi.amps)
        if not ok:
            raise StepDivergenceError(
                f"non-finite amplitudes after step {self.step_index} "
                f"(max finite |psi| = {peak:.3e})")

    def _kin(self, table) -> None:
        spec = fft2(self.psi.amps)
        if self.mode == "real":
            kernels.mul_complex(spec, table)
        else:
            kernels.mul_real(spec, table)
        self.psi.amps = ifft2(spec)

    def step(self) -> "SplitStepper":
        """One Strang step: half kinetic, potential+nonlinear, half kinetic."""
        return self.advance(1)

    def advance(self, n_steps: int) -> "SplitStepper":
        """n_steps Strang steps with interior kinetic half-steps merged."""
        if n_steps <= 0:
            return self
        if self.mode == "imag":
            for _ in range(n_steps):
                self._kin(self._kin_half)
                self._phase(self.psi.amps)
                self._kin(self._kin_half)
                self.step_index += 1
                normalize(self.psi)
            self.psi.time += n_steps * self._dt
            return self
        self._kin(self._kin_half)
        for j in range(n_steps):
            self._phase(self.psi.amps)
            self.step_index += 1
            self._kin(self._kin_full if j < n_steps - 1 else self._kin_half)
        self.psi.time += n_steps * self._dt
        self._check_finite()
        return self


@dataclass
class GroundStateResult:
    field: WaveField
    energies: np.ndarray
    iterations: int
    residual: float


def relax_to_ground_state(grid: Grid, trap: PotentialField, params: SimParams,
                          seed: WaveField | None = None) -> GroundStateResult:
    """Imaginary-time relaxation with per-step renormalization.

    Stops when the per-step relative energy change drops below params.gs_tol;
    the energy of each iterate is recorded so callers can check monotonicity.
    The per-step spectrum doubles as the kinetic-energy evaluation, so the
    convergence monitoring costs no extra transforms.
    """
    if seed is None:
        raise ValueError("relax_to_ground_state requires a seed field")
    psi = seed.copy()
    normalize(psi)
    dtau = params.imag_dt
    if dtau > 0.01:
        warnings.warn(f"imaginary time step {dtau} > 0.01 may be unstable", stacklevel=2)
    q2 = grid.q2()
    kin_half = np.exp(-0.5 * dtau * 0.5 * params.k * q2)
    kin_weight = 0.5 * params.k * q2 * (grid.cell_area / (grid.nx * grid.nz))
    vals = trap.values
    area = grid.cell_area

    energies = []
    e_prev = None
    for it in range(params.gs_max_iters):
        spec = fft2(psi.amps)
        e_kin = float(np.sum(kin_weight * (spec.real**2 + spec.imag**2)))
        e_pot = kernels.pot_int_sum(psi.amps, vals, params.g) * area
        e = e_kin + e_pot
        energies.append(e)
        if e_prev is not None:
            resid = abs(e - e_prev) / max(1.0, abs(e))
            if resid < params.gs_tol:
                psi.time = 0.0
                return GroundStateResult(psi, np.asarray(energies), it, resid)
        e_prev = e

        kernels.mul_real(spec, kin_half)
        psi.amps = ifft2(spec)
        kernels.decay(psi.amps, vals, params.g, dtau)
        spec = fft2(psi.amps)
        kernels.mul_real(spec, kin_half)
        psi.amps = ifft2(spec)
        normalize(psi)

    resid = abs(energies[-1] - energies[-2]) / max(1.0, abs(energies[-1]))
    raise ConvergenceError(
        f"imaginary-time relaxation did not converge in {params.gs_max_iters} "
        f"iterations (last residual {resid:.3e}, tol {params.gs_tol:.3e})", resid)


def ground_state(grid: Grid, trap: PotentialField, params: SimParams,
                 seed: WaveField | None = None) -> WaveField:
    """Relaxed ground state in `trap`; see :func:`relax_to_ground_state`."""
    if seed is None:
        zc = grid.z[np.argmin(np.abs(trap.values).min(axis=1))]
        seed = gaussian_packet(grid, 0.0, float(zc), 1.0)
    return relax_to_ground_state(grid, trap, params, seed).field


@dataclass
class Trajectory:
    """Release-run output: snapshot fields plus the sampled time series."""

    snapshots: list[tuple[float, WaveField]]
    series: TimeSeries
    groundstate: WaveField | None = None
    gs_iterations: int = 0


class _SeriesBuilder:
    def __init__(self):
        self.rows = {k: [] for k in
                     ("t", "mean_z", "mean_x", "sigma_x", "energy", "norm", "edge_density")}

    def record(self, psi: WaveField, pot: PotentialField, g: float, k: float) -> None:
        s0, sx, sx2, sz = kernels.weighted_sums(psi.amps, psi.grid.x, psi.grid.z)
        area = psi.grid.cell_area
        nrm = s0 * area
        mx = sx / s0
        r = self.rows
        r["t"].append(psi.time)
        r["mean_z"].append(sz / s0)
        r["mean_x"].append(mx)
        r["sigma_x"].append(math.sqrt(max(sx2 / s0 - mx * mx, 0.0)))
        r["energy"].append(energy(psi, pot, g, k))
        r["norm"].append(nrm)
        r["edge_density"].append(edge_density(psi))

    def build(self) -> TimeSeries:
        return TimeSeries(**{k: np.asarray(v) for k, v in self.rows.items()})


def _step_count(interval: float, dt: float, what: str) -> int:
    n = interval / dt
    if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
        raise ValueError(f"{what}={interval} is not an integer multiple of dt={dt}")
    return int(round(n))


def run_release(grid: Grid, params: SimParams, series_stride: int = 100,
                progress=None) -> Trajectory:
    """Ground state in the release trap, then free flight onto the mirror.

    Snapshots are taken at every multiple of params.snapshot_dt (excluding
    t=0); the time series is sampled every `series_stride` steps starting at
    the release instant. `progress(step, total, psi)` is called at snapshot
    times when given.
    """
    trap = initial_trap_potential(grid, params.z0)
    seed = gaussian_packet(grid, 0.0, params.z0, 1.0)
    gs = relax_to_ground_state(grid, trap, params, seed)

    psi = gs.field.copy()
    psi.time = 0.0
    pot = eswp_potential(grid, params)
    stepper = SplitStepper(psi, pot, params, mode="real")

    n_total = _step_count(params.t_end, params.dt, "t_end")
    snap_stride = _step_count(params.snapshot_dt, params.dt, "snapshot_dt")
    if series_stride <= 0:
        raise ValueError("series_stride must be positive")

    builder = _SeriesBuilder()
    builder.record(psi, pot, params.g, params.k)
    snapshots: list[tuple[float, WaveField]] = []

    events = sorted(set(range(series_stride, n_total + 1, series_stride))
                    | set(range(snap_stride, n_total + 1, snap_stride))
                    | {n_total})
    prev = 0
    for ev in events:
        stepper.advance(ev - prev)
        psi.time = ev * params.dt  # step-count time, no accumulation drift
        prev = ev
        if ev % series_stride == 0 or ev == n_total:
            builder.record(psi, pot, params.g, params.k)
        if ev % snap_stride == 0:
            snapshots.append((psi.time, psi.copy()))
            if progress is not None:
                progress(ev, n_total, psi)

    return Trajectory(snapshots=snapshots, series=builder.build(),
                      groundstate=gs.field, gs_iterations=gs.iterations)
