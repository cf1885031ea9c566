"""Hot pointwise kernels of the split-step loop.

Each kernel exists twice: a plain numpy version and a numba ``@njit`` version
that fuses the loop (no temporaries, one pass over the field). The numba path
is the default when numba imports; set ``ESWP_NUMBA=0`` to force the numpy
fallback. ``ESWP_THREADS`` caps FFT worker threads (0 or unset = auto).

FFTs are deliberately not here: numba cannot express them and scipy's
pocketfft is already compiled, so only the elementwise work benefits from
jitting. ``benchmarks/bench_kernels.py`` compares the two backends.
"""

from __future__ import annotations

import os

import numpy as np


def resolve_threads() -> int:
    """Worker-thread cap from ESWP_THREADS (0 or unset means all cores)."""
    raw = os.environ.get("ESWP_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ESWP_THREADS must be an integer, got {raw!r}") from None
    if n <= 0:
        return os.cpu_count() or 1
    return n


THREADS = resolve_threads()


# ----------------------------------------------------------------------------
# numpy reference implementations
# ----------------------------------------------------------------------------

def _phase_rotate_np(amps, pot, g, dt):
    # amps *= exp(-i*(V + g*|amps|^2)*dt), density frozen at sub-step entry
    dens = amps.real**2 + amps.imag**2
    amps *= np.exp(-1j * dt * (pot + g * dens))


def _decay_np(amps, pot, g, dtau):
    # imaginary-time analogue: real damping factor
    dens = amps.real**2 + amps.imag**2
    amps *= np.exp(-dtau * (pot + g * dens))


def _mul_complex_np(amps, table):
    amps *= table


def _mul_real_np(amps, table):
    amps *= table


def _scale_np(amps, s):
    amps *= s


def _abs2_sum_np(amps):
    return float(np.sum(amps.real**2 + amps.imag**2))


def _weighted_sums_np(amps, x, z):
    # raw density-weighted sums: (sum d, sum x d, sum x^2 d, sum z d)
    dens = amps.real**2 + amps.imag**2
    row = dens.sum(axis=1)
    col = dens.sum(axis=0)
    s0 = float(row.sum())
    sx = float(np.dot(col, x))
    sx2 = float(np.dot(col, x * x))
    sz = float(np.dot(row, z))
    return s0, sx, sx2, sz


def _pot_int_sum_np(amps, pot, g):
    # sum over nodes of (V + g/2 * d) * d, the non-kinetic energy density
    dens = amps.real**2 + amps.imag**2
    return float(np.sum((pot + 0.5 * g * dens) * dens))


def _finite_absmax_np(amps):
    mag2 = amps.real**2 + amps.imag**2
    ok = bool(np.isfinite(mag2).all())
    m = float(np.max(mag2)) if ok else float(np.nanmax(np.where(np.isfinite(mag2), mag2, 0.0)))
    return ok, float(np.sqrt(m))


_NUMPY_IMPLS = {
    "phase_rotate": _phase_rotate_np,
    "decay": _decay_np,
    "mul_complex": _mul_complex_np,
    "mul_real": _mul_real_np,
    "scale": _scale_np,
    "abs2_sum": _abs2_sum_np,
    "weighted_sums": _weighted_sums_np,
    "pot_int_sum": _pot_int_sum_np,
    "finite_absmax": _finite_absmax_np,
}


# ----------------------------------------------------------------------------
# numba fused implementations
# ----------------------------------------------------------------------------

def _build_numba_impls():
    from numba import njit

    @njit(cache=True)
    def phase_rotate(amps, pot, g, dt):
        nz, nx = amps.shape
        for j in range(nz):
            for i in range(nx):
                a = amps[j, i]
                d = a.real * a.real + a.imag * a.imag
                ang = -dt * (pot[j, i] + g * d)
                amps[j, i] = a * complex(np.cos(ang), np.sin(ang))

    @njit(cache=True)
    def decay(amps, pot, g, dtau):
        nz, nx = amps.shape
        for j in range(nz):
            for i in range(nx):
                a = amps[j, i]
                d = a.real * a.real + a.imag * a.imag
                amps[j, i] = a * np.exp(-dtau * (pot[j, i] + g * d))

    @njit(cache=True)
    def mul_complex(amps, table):
        nz, nx = amps.shape
        for j in range(nz):
            for i in range(nx):
                amps[j, i] = amps[j, i] * table[j, i]

    @njit(cache=True)
    def mul_real(amps, table):
        nz, nx = amps.shape
        for j in range(nz):
            for i in range(nx):
                amps[j, i] = amps[j, i] * table[j, i]

    @njit(cache=True)
    def scale(amps, s):
        nz, nx = amps.shape
        for j in range(nz):
            for i in range(nx):
                amps[j, i] = amps[j, i] * s

    @njit(cache=True)
    def abs2_sum(amps):
        nz, nx = amps.shape
        acc = 0.0
        for j in range(nz):
            for i in range(nx):
                a = amps[j, i]
                acc += a.real * a.real + a.imag * a.imag
        return acc

    @njit(cache=True)
    def weighted_sums(amps, x, z):
        nz, nx = amps.shape
        s0 = 0.0
        sx = 0.0
        sx2 = 0.0
        sz = 0.0
        for j in range(nz):
            rs = 0.0
            for i in range(nx):
                a = amps[j, i]
                d = a.real * a.real + a.imag * a.imag
                rs += d
                sx += x[i] * d
                sx2 += x[i] * x[i] * d
            s0 += rs
            sz += z[j] * rs
        return s0, sx, sx2, sz

    @njit(cache=True)
    def pot_int_sum(amps, pot, g):
        nz, nx = amps.shape
        acc = 0.0
        for j in range(nz):
            for i in range(nx):
                a = amps[j, i]
                d = a.real * a.real + a.imag * a.imag
                acc += (pot[j, i] + 0.5 * g * d) * d
        return acc

    @njit(cache=True)
    def finite_absmax(amps):
        nz, nx = amps.shape
        m = 0.0
        ok = True
        for j in range(nz):
            for i in range(nx):
                a = amps[j, i]
                d = a.real * a.real + a.imag * a.imag
                if not np.isfinite(d):
                    ok = False
                elif d > m:
                    m = d
        return ok, np.sqrt(m)

    return {
        "phase_rotate": phase_rotate,
        "decay": decay,
        "mul_complex": mul_complex,
        "mul_real": mul_real,
        "scale": scale,
        "abs2_sum": abs2_sum,
        "weighted_sums": weighted_sums,
        "pot_int_sum": pot_int_sum,
        "finite_absmax": finite_absmax,
    }


def available_backends():
    names = ["numpy"]
    if "numba" in _IMPLS:
        names.append("numba")
    return names


def get_impls(name=None):
    """Kernel dict for a backend name (default: the active one)."""
    if name is None:
        name = BACKEND
    try:
        return _IMPLS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; have {sorted(_IMPLS)}") from None


_IMPLS = {"numpy": _NUMPY_IMPLS}
BACKEND = "numpy"

if os.environ.get("ESWP_NUMBA", "1") != "0":
    try:
        _IMPLS["numba"] = _build_numba_impls()
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

_ACTIVE = _IMPLS[BACKEND]

phase_rotate = _ACTIVE["phase_rotate"]
decay = _ACTIVE["decay"]
mul_complex = _ACTIVE["mul_complex"]
mul_real = _ACTIVE["mul_real"]
scale = _ACTIVE["scale"]
abs2_sum = _ACTIVE["abs2_sum"]
weighted_sums = _ACTIVE["weighted_sums"]
pot_int_sum = _ACTIVE["pot_int_sum"]
finite_absmax = _ACTIVE["finite_absmax"]
