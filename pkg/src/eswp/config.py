"""Run configuration: key=value files, presets, round-trip printing.

The format is one scalar per line, '#' comments, no nesting. Unknown and
duplicate keys are hard errors so typos cannot silently fall back to
defaults. A ``preset=...`` line (fig2..fig5) is applied before every other
key regardless of its position, so explicit keys always win.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .grid import Grid, make_grid
from .potentials import CANONICAL_G_PER_ATOM, SimParams


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# Figure presets: the release protocol shared by every figure, with the
# standing-wave amplitude eta varying between them.
_FIG_BASE = dict(n_atoms=3, nu=1.0, z0=10.0, t_end=60.0, snapshot_dt=5.0, dt=1e-3)
PRESETS = {
    "fig2": dict(_FIG_BASE, eta=0.0),
    "fig3": dict(_FIG_BASE, eta=0.01),
    "fig4": dict(_FIG_BASE, eta=0.1),
    "fig5": dict(_FIG_BASE, eta=0.9),
}


@dataclass
class RunConfig:
    # grid
    nx: int = 512
    nz: int = 512
    dx: float = 0.083
    dz: float = 0.083
    x_min: float = -21.25
    z_min_dom: float = -2.0
    # physics
    n_atoms: int = 3
    k: float = 0.066
    g: float | None = None  # None -> CANONICAL_G_PER_ATOM * n_atoms
    v0: float = 906.0
    eta: float = 0.0
    nu: float = 1.0
    z0: float = 10.0
    wall_height: float = 1e5
    confine_x: bool | None = None  # None -> eta == 0
    # time stepping
    dt: float = 1e-3
    t_end: float = 60.0
    snapshot_dt: float = 5.0
    imag_dt: float = 1e-3
    gs_tol: float = 1e-9
    gs_max_iters: int = 200_000
    # output
    output_dir: str = "out"
    series_stride: int = 100
    preset: str = ""

    def grid(self) -> Grid:
        return make_grid(self.nx, self.nz, self.dx, self.dz, self.x_min, self.z_min_dom)

    def sim_params(self) -> SimParams:
        return SimParams(
            k=self.k, g=self.g, v0=self.v0, eta=self.eta, nu=self.nu, z0=self.z0,
            dt=self.dt, t_end=self.t_end, snapshot_dt=self.snapshot_dt,
            wall_height=self.wall_height, confine_x=self.confine_x,
            imag_dt=self.imag_dt, gs_tol=self.gs_tol, gs_max_iters=self.gs_max_iters)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {"nx", "nz", "n_atoms", "series_stride", "gs_max_iters"}
_BOOL_KEYS = {"confine_x"}
_STR_KEYS = {"output_dir", "preset"}


def _parse_value(key: str, raw: str, line: int):
    if key in _STR_KEYS:
        return raw
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "false"):
            return low == "true"
        raise ConfigError(f"{key} expects true or false, got {raw!r}", line)
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        kind = "integer" if key in _INT_KEYS else "number"
        raise ConfigError(f"{key} expects a {kind}, got {raw!r}", line) from None


def parse_config(text: str) -> RunConfig:
    """Parse key=value text into a validated RunConfig."""
    assignments: dict[str, tuple[object, int]] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {rawline.strip()!r}", lineno)
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in assignments:
            raise ConfigError(f"duplicate key {key!r} (first on line "
                              f"{assignments[key][1]})", lineno)
        assignments[key] = (_parse_value(key, raw, lineno), lineno)

    values: dict[str, object] = {}
    preset_name = ""
    if "preset" in assignments:
        preset_name, lineno = assignments.pop("preset")
        if preset_name not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset_name!r}; have {sorted(PRESETS)}", lineno)
        values.update(PRESETS[preset_name])
    for key, (val, _) in assignments.items():
        values[key] = val
    values["preset"] = preset_name

    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.g is None:
        cfg.g = CANONICAL_G_PER_ATOM * cfg.n_atoms
    if cfg.confine_x is None:
        cfg.confine_x = cfg.eta == 0.0
    ratio = cfg.snapshot_dt / cfg.dt
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
        raise ConfigError(
            f"snapshot_dt={cfg.snapshot_dt} is not an integer multiple of dt={cfg.dt}")
    ratio = cfg.t_end / cfg.dt
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
        raise ConfigError(f"t_end={cfg.t_end} is not an integer multiple of dt={cfg.dt}")
    z_top = cfg.z_min_dom + cfg.nz * cfg.dz
    if z_top < cfg.z0 + 5.0:
        raise ConfigError(
            f"grid top z={z_top:.3f} leaves less than 5 units of headroom above "
            f"z0={cfg.z0}")
    if cfg.series_stride <= 0:
        raise ConfigError("series_stride must be positive")
    # delegate physics-range checks
    cfg.sim_params()
    cfg.grid()


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def print_config(cfg: RunConfig) -> str:
    """Render a config so that parse_config round-trips it exactly."""
    lines = []
    if cfg.preset:
        lines.append(f"preset={cfg.preset}")
    for f in fields(RunConfig):
        if f.name == "preset":
            continue
        val = getattr(cfg, f.name)
        if f.name in _BOOL_KEYS:
            val = "true" if val else "false"
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{f.name}={val}")
    return "\n".join(lines) + "\n"
