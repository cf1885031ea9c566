"""Snapshot and time-series persistence plus the run manifest.

Snapshot format (little-endian, versioned):

    magic   4 bytes  b"ESWP"
    version u32      currently 1
    nx      u32
    nz      u32
    dx, dz, x_min, z_min_dom, time   f64 each
    payload nx*nz complex pairs (f64 re, f64 im), row-major with z outer

The CSV exports are lossy and exist for plotting; the binary file is the
authoritative field record and round-trips bit-identically.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .grid import Grid, WaveField, make_grid
from .observables import TimeSeries

MAGIC = b"ESWP"
VERSION = 1
_HEADER = struct.Struct("<4sIII5d")


class SnapshotFormatError(ValueError):
    pass


def write_density_snapshot(psi: WaveField, path) -> Path:
    """Write the complex field with its grid header; returns the path."""
    path = Path(path)
    g = psi.grid
    header = _HEADER.pack(MAGIC, VERSION, g.nx, g.nz, g.dx, g.dz,
                          g.x_min, g.z_min_dom, psi.time)
    payload = np.ascontiguousarray(psi.amps, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    return path


def read_density_snapshot(path) -> WaveField:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, nx, nz, dx, dz, x_min, z_min_dom, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + nx * nz * 16
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: payload size {len(raw) - _HEADER.size} bytes, "
            f"expected {expected - _HEADER.size}")
    amps = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(nz, nx)
    grid = make_grid(nx, nz, dx, dz, x_min, z_min_dom)
    return WaveField(grid, amps.astype(np.complex128), time)


def export_density_csv(psi: WaveField, path) -> Path:
    """|psi|^2 as x,z,density rows (plotting helper, lossy by design)."""
    path = Path(path)
    dens = psi.density()
    g = psi.grid
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,z,density\n")
        for j in range(g.nz):
            zj = g.z[j]
            row = dens[j]
            for i in range(g.nx):
                fh.write(f"{g.x[i]:.17g},{zj:.17g},{row[i]:.17g}\n")
    return path


SERIES_HEADER = "t,mean_z,mean_x,sigma_x,energy,norm,edge_density"


def write_series(series: TimeSeries, path) -> Path:
    path = Path(path)
    cols = [series.t, series.mean_z, series.mean_x, series.sigma_x,
            series.energy, series.norm, series.edge_density]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SERIES_HEADER + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return path


def read_series(path) -> TimeSeries:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SERIES_HEADER:
            raise ValueError(f"{path}: unexpected series header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 7:
        raise ValueError(f"{path}: expected 7 columns, found {data.shape[1]}")
    return TimeSeries(t=data[:, 0], mean_z=data[:, 1], mean_x=data[:, 2],
                      sigma_x=data[:, 3], energy=data[:, 4], norm=data[:, 5],
                      edge_density=data[:, 6])


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(config_text: str, code_version: str, wallclock: dict,
                   diagnostics: dict, files: list[Path], base_dir) -> dict:
    base = Path(base_dir)
    inventory = []
    for p in sorted(Path(f) for f in files):
        inventory.append({
            "path": str(p.relative_to(base)),
            "bytes": p.stat().st_size,
            "sha256": _sha256(p),
        })
    return {
        "config": config_text,
        "code_version": code_version,
        "wallclock_seconds": wallclock,
        "diagnostics": diagnostics,
        "files": inventory,
    }


def write_manifest(manifest: dict, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def verify_manifest(path) -> dict:
    """Re-hash every file in the inventory; raises on any mismatch."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    base = path.parent
    for entry in manifest["files"]:
        target = base / entry["path"]
        if not target.exists():
            raise FileNotFoundError(f"manifest lists missing file {target}")
        actual = _sha256(target)
        if actual != entry["sha256"]:
            raise ValueError(
                f"checksum mismatch for {target}: manifest {entry['sha256'][:12]}..., "
                f"file {actual[:12]}...")
    return manifest
