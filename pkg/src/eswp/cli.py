"""Command-line entry points: groundstate / run / sweep / diffract / params."""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config, print_config
from .diffraction import GratingGeometry, bragg_orders, azimuthal_splitting, \
    de_broglie_from_energy, extract_peaks
from .fileio import (build_manifest, export_density_csv, read_density_snapshot,
                     read_series, write_density_snapshot, write_manifest, write_series)
from .grid import normalize
from .observables import energy, mean_z, qx_marginal, sigma_x, width_growth
from .potentials import PhysicalParams, derive_sim_params, eswp_potential, \
    initial_trap_potential
from .propagator import gaussian_packet, relax_to_ground_state, run_release

EDGE_DENSITY_WARN = 1e-3


def _ensure_outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _snapshot_name(t: float) -> str:
    return f"snapshot_t{t:g}.eswp"


def cmd_groundstate(args) -> int:
    cfg = load_config(args.config)
    out = _ensure_outdir(cfg)
    grid = cfg.grid()
    params = cfg.sim_params()
    trap = initial_trap_potential(grid, params.z0)
    seed = gaussian_packet(grid, 0.0, params.z0, 1.0)
    t0 = time.perf_counter()
    gs = relax_to_ground_state(grid, trap, params, seed)
    elapsed = time.perf_counter() - t0
    e = gs.energies[-1]
    print(f"ground state converged in {gs.iterations} iterations "
          f"({elapsed:.1f} s): E = {e:.6f}, sigma_x = {sigma_x(gs.field):.6f}")
    files = [write_density_snapshot(gs.field, out / "groundstate.eswp")]
    if args.csv:
        files.append(export_density_csv(gs.field, out / "groundstate.csv"))
    manifest = build_manifest(
        print_config(cfg), __version__,
        {"groundstate": elapsed},
        {"groundstate_energy": float(e), "iterations": gs.iterations},
        files, out)
    write_manifest(manifest, out / "manifest.json")
    return 0


def _run_one(cfg: RunConfig, out: Path, csv: bool, quiet: bool = False) -> dict:
    grid = cfg.grid()
    params = cfg.sim_params()

    def progress(step, total, psi):
        if not quiet:
            print(f"  t = {psi.time:6.1f} / {params.t_end:g}  <z> = {mean_z(psi):7.3f}")

    t0 = time.perf_counter()
    traj = run_release(grid, params, series_stride=cfg.series_stride,
                       progress=progress)
    elapsed = time.perf_counter() - t0

    files = [write_series(traj.series, out / "series.csv"),
             write_density_snapshot(traj.groundstate, out / "groundstate.eswp")]
    for t, snap in traj.snapshots:
        files.append(write_density_snapshot(snap, out / _snapshot_name(t)))
        if csv:
            files.append(export_density_csv(snap, out / (_snapshot_name(t)[:-5] + ".csv")))

    s = traj.series
    norm_drift = float(np.max(np.abs(s.norm - 1.0)))
    energy_drift = float(np.max(np.abs(s.energy - s.energy[0])) / abs(s.energy[0]))
    final_edge = float(s.edge_density[-1])
    diagnostics = {
        "norm_drift": norm_drift,
        "energy_drift_rel": energy_drift,
        "final_edge_density": final_edge,
        "gs_iterations": traj.gs_iterations,
    }
    if final_edge > EDGE_DENSITY_WARN:
        print(f"warning: edge density {final_edge:.2e} exceeds {EDGE_DENSITY_WARN:g}; "
              "domain may be too small", file=sys.stderr)
    manifest = build_manifest(print_config(cfg), __version__,
                              {"total": elapsed}, diagnostics, files, out)
    write_manifest(manifest, out / "manifest.json")
    if not quiet:
        print(f"run finished in {elapsed:.1f} s: norm drift {norm_drift:.2e}, "
              f"energy drift {energy_drift:.2e}, {len(traj.snapshots)} snapshots")
    return diagnostics


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _ensure_outdir(cfg)
    _run_one(cfg, out, args.csv)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = _ensure_outdir(cfg)
    etas = [float(tok) for tok in args.eta.split(",") if tok.strip() != ""]
    if not etas:
        raise ValueError("--eta needs at least one value")
    slopes = []
    for eta in etas:
        case = RunConfig(**{**cfg.__dict__, "eta": eta, "confine_x": None,
                            "preset": "", "output_dir": str(out / f"eta_{eta:g}")})
        case_out = _ensure_outdir(case)
        print(f"eta = {eta:g} -> {case_out}")
        _run_one(case, case_out, csv=False, quiet=args.quiet)
        series = read_series(case_out / "series.csv")
        slopes.append((eta, width_growth(series, t_fit_start=10.0)))
    lines = ["eta,sigma_x_slope"]
    for eta, slope in slopes:
        lines.append(f"{eta:g},{slope:.17g}")
    (out / "slopes.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("width growth slopes (t >= 10):")
    for eta, slope in slopes:
        print(f"  eta = {eta:<6g} slope = {slope:+.5f}")
    return 0


def cmd_diffract(args) -> int:
    psi = read_density_snapshot(args.snapshot)
    normalize(psi)
    q, marg = qx_marginal(psi)
    peaks = extract_peaks(q, marg, threshold_frac=args.threshold)
    nu = args.nu
    print(f"snapshot t = {psi.time:g}, grid {psi.grid.nx}x{psi.grid.nz}")
    if not peaks:
        print("no momentum peaks above threshold")
    else:
        print(f"{'q':>10} {'weight':>10} {'order n':>8} {'|q - n nu|':>12}")
        for qv, w in peaks:
            n = round(qv / nu)
            print(f"{qv:>10.4f} {w:>10.4f} {n:>8d} {abs(qv - n * nu):>12.4f}")

    e0 = energy(psi, None, 0.0, args.k)
    lam = de_broglie_from_energy(e0, args.k)
    geom = GratingGeometry(d=2.0 * math.pi / nu, phi_in=math.radians(args.phi_in),
                           lambda_db=lam, e0=e0)
    spec = bragg_orders(geom, n_max=args.n_max)
    print(f"\nkinetic energy E0 = {e0:.4f}, lambda_db = {lam:.4f}, "
          f"lambda_db_perp = {geom.lambda_db_perp:.4f}, d = {geom.d:.4f}")
    print(f"azimuthal splitting dpsi = {azimuthal_splitting(geom):.6f} rad")
    print(f"{'n':>4} {'theta (deg)':>12} {'psi (deg)':>12}")
    for n, theta, psi_n in spec.orders:
        print(f"{n:>4d} {math.degrees(theta):>12.4f} {math.degrees(psi_n):>12.4f}")
    return 0


def cmd_params(args) -> int:
    cfg = load_config(args.config) if args.config else None
    phys = PhysicalParams(n_atoms=cfg.n_atoms if cfg else 3)
    _, report = derive_sim_params(phys)
    print(report.format())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="eswp",
        description="2D condensate on an evanescent standing-wave mirror")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("groundstate", help="relax the release-trap ground state")
    p.add_argument("config")
    p.add_argument("--csv", action="store_true", help="also export |psi|^2 as CSV")
    p.set_defaults(func=cmd_groundstate)

    p = sub.add_parser("run", help="release protocol: ground state, then bounce")
    p.add_argument("config")
    p.add_argument("--csv", action="store_true", help="also export snapshot CSVs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="release runs over a list of eta values")
    p.add_argument("config")
    p.add_argument("--eta", default="0,0.01,0.1,0.9",
                   help="comma-separated standing-wave amplitudes")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diffract", help="momentum peaks and Bragg table for a snapshot")
    p.add_argument("snapshot")
    p.add_argument("--phi-in", type=float, required=True,
                   help="grazing incidence angle in degrees")
    p.add_argument("--nu", type=float, default=1.0, help="lattice frequency")
    p.add_argument("--k", type=float, default=0.066, help="kinetic coefficient")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--threshold", type=float, default=0.05,
                   help="peak threshold as a fraction of the maximum")
    p.set_defaults(func=cmd_diffract)

    p = sub.add_parser("params", help="physical-to-dimensionless conversion report")
    p.add_argument("config", nargs="?", default=None)
    p.set_defaults(func=cmd_params)

    return ap


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # one-line cause on stderr, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
