"""Scenario runner and comparison harness.

`slitsim run <config>` executes one scenario, writes CSV data files, a
gnuplot script, and a JSON manifest; `slitsim compare <manifest>` rebuilds
the error report against the exact oracle; `slitsim list-scenarios` shows
the bundled scenario files. Exit codes: 0 run Valid, 2 run Degraded,
1 error.
"""

import argparse
import csv
import json
import os
import sys
import time
from importlib import resources

import numpy as np

from . import bohm, hydro_solver
from .analytic import exact_trajectory, field_for, sample_field
from .config import load_config
from .core import MwlsConfig, norm
from .errors import SlitsimError
from .mwls import JetOperator

#: Density threshold (relative to the instantaneous peak) below which a
#: trajectory point counts as "inside a node region" for error reporting.
#: Much looser than the velocity mask: it flags the stretches where the
#: velocity varies too quickly for any solver to track it closely.
NODE_FLAG_REL = 1e-3


def _fmt(x):
    """Round-trip-exact decimal formatting."""
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else _fmt(c)
                             for c in row])


def _config_dict(spec):
    cfg = spec.config
    return {
        "scenario": cfg.scenario,
        "mode": spec.mode,
        "solver": cfg.solver,
        "field_kind": cfg.field_kind,
        "packet": {
            "Y": cfg.packet.Y, "sigma0": cfg.packet.sigma0,
            "kx": cfg.packet.kx, "particles": cfg.packet.particles,
            "exchange_sign": cfg.packet.exchange_sign,
        },
        "grid": {"lo": cfg.grid.lo, "hi": cfg.grid.hi,
                 "n": cfg.grid.n, "dim": cfg.grid.dim},
        "t_final": cfg.t_final,
        "n_steps": cfg.n_steps,
        "trajectory_starts": [list(s) for s in cfg.trajectory_starts],
        "snapshot_times": list(cfg.snapshot_times),
        "mwls": None if cfg.mwls is None else {
            "n_neighbors": cfg.mwls.n_neighbors,
            "poly_order": cfg.mwls.poly_order,
            "weight_width": cfg.mwls.weight_width,
        },
        "qp_orders": list(spec.qp_orders),
    }


def _snapshot_rows_1d(t, fld):
    y = fld.grid.axis()
    for i in range(fld.grid.n):
        yield (t, y[i], fld.re[i], fld.im[i])


def _snapshot_rows_2d(t, fld):
    y = fld.grid.axis()
    for i in range(fld.grid.n):
        for j in range(fld.grid.n):
            yield (t, y[i], y[j], fld.re[i, j], fld.im[i, j])


def _field_errors(fld, exact_field, t):
    coords = fld.grid.meshgrid()
    psi_exact = exact_field.psi(*coords, t)
    err = np.abs(fld.to_complex() - psi_exact)
    return float(err.max()), float(np.sqrt(np.mean(err ** 2)))


def _flagged_deviation(traj, exact_traj, exact_field):
    """Max position deviation, split into off-node and flagged-node parts."""
    n = min(len(traj.times), len(exact_traj.times))
    dev = np.linalg.norm(traj.positions[:n] - exact_traj.positions[:n],
                         axis=1)
    flagged = np.zeros(n, dtype=bool)
    for i in range(n):
        t = traj.times[i]
        dens = float(np.abs(exact_field.psi(*traj.positions[i], t)) ** 2)
        flagged[i] = dens < NODE_FLAG_REL * exact_field.peak_density(t)
    off = dev[~flagged]
    on = dev[flagged]
    return {
        "max_deviation": float(dev.max()),
        "max_deviation_off_node": float(off.max()) if len(off) else 0.0,
        "max_deviation_in_node": float(on.max()) if len(on) else 0.0,
        "n_flagged_times": int(flagged.sum()),
    }


def run_fd(spec, out_dir):
    cfg = spec.config
    exact_field = field_for(cfg.packet, cfg.field_kind)
    initial = sample_field(exact_field, cfg.grid, 0.0)
    norm0 = norm(initial)
    provider = bohm.FdFieldProvider(initial, cfg.dt, cfg.n_steps)

    snap_idx = sorted({int(round(t / cfg.dt)) for t in cfg.snapshot_times}
                      | {cfg.n_steps})
    results, fields = bohm.integrate_family(
        provider, cfg.trajectory_starts, snapshot_indices=snap_idx)

    files = []
    rows = []
    field_errors = {}
    for k in snap_idx:
        t = k * cfg.dt
        fld = fields[k]
        gen = (_snapshot_rows_1d if cfg.grid.dim == 1
               else _snapshot_rows_2d)
        rows.extend(gen(t, fld))
        emax, erms = _field_errors(fld, exact_field, t)
        field_errors[f"t={t:.6g}"] = {"max": emax, "rms": erms}
    header = (("t", "y", "re", "im") if cfg.grid.dim == 1
              else ("t", "y1", "y2", "re", "im"))
    path = os.path.join(out_dir, "fields.csv")
    _write_csv(path, header, rows)
    files.append("fields.csv")

    final = fields[cfg.n_steps]
    norm_drift = abs(norm(final) - norm0)

    traj_rows = []
    traj_summary = []
    trajectories = []
    for j, (traj, incursion) in enumerate(results):
        trajectories.append(traj)
        ex = exact_trajectory(exact_field, cfg.trajectory_starts[j],
                              traj.times)
        for i, t in enumerate(traj.times):
            traj_rows.append((j,) + (t,) + tuple(traj.positions[i])
                             + tuple(ex.positions[i]))
        entry = {"start": list(cfg.trajectory_starts[j]),
                 "incursion_time": incursion}
        entry.update(_flagged_deviation(traj, ex, exact_field))
        traj_summary.append(entry)
    if results:
        dim = cfg.grid.dim
        cols = (("y",) if dim == 1 else ("y1", "y2"))
        header = ("trajectory", "t") + cols + tuple(f"{c}_exact"
                                                    for c in cols)
        path = os.path.join(out_dir, "trajectories.csv")
        _write_csv(path, [str(h) for h in header],
                   [(str(r[0]),) + r[1:] for r in traj_rows])
        files.append("trajectories.csv")

    crossings = None
    if trajectories and all(len(t.times) == len(trajectories[0].times)
                            for t in trajectories):
        report = bohm.crossing_report(
            trajectories, min_separation=cfg.grid.delta / 10.0)
        crossings = {"n_violations": len(report.violations)}

    status = "Valid" if norm_drift <= 1e-6 else "Degraded"
    errors = {
        "norm_drift": norm_drift,
        "field": field_errors,
        "trajectories": traj_summary,
        "crossings": crossings,
    }
    return status, errors, files


def run_hydro(spec, out_dir):
    cfg = spec.config
    exact_field = field_for(cfg.packet, cfg.field_kind)
    snapshots, diags = hydro_solver.propagate_hydro(cfg)

    rows = []
    for d in diags:
        for i in range(len(d.y)):
            rows.append((d.t, d.y[i], d.v_num[i], d.v_exact[i],
                         d.q_num[i], d.q_exact[i], d.status))
    path = os.path.join(out_dir, "diagnostics.csv")
    _write_csv(path, ("t", "y", "v_num", "v_exact", "Q_num", "Q_exact",
                      "status"), rows)

    status = "Degraded" if any(d.status == "Degraded" for d in diags) \
        else "Valid"
    errors = {
        "snapshots": [{"t": d.t, "max_v_error": d.max_v_error,
                       "max_q_error": d.max_q_error, "status": d.status}
                      for d in diags],
    }
    # Lagrangian point paths are the Bohmian trajectories
    if cfg.solver == "hydro_lagrange":
        traj_rows = []
        for d in diags:
            for i in range(len(d.y)):
                traj_rows.append((i, d.t, d.y[i]))
        _write_csv(os.path.join(out_dir, "trajectories.csv"),
                   ("point", "t", "y"),
                   [(str(r[0]),) + r[1:] for r in traj_rows])
        return status, errors, ["diagnostics.csv", "trajectories.csv"]
    return status, errors, ["diagnostics.csv"]


def run_qp_study(spec, out_dir):
    cfg = spec.config
    orders = spec.qp_orders or (2, 3, 4, 5)
    exact_field = field_for(cfg.packet, cfg.field_kind)
    y = cfg.grid.axis()
    g = exact_field.log_amplitude(y, 0.0)
    q_exact = exact_field.quantum_potential(y, 0.0)

    columns = [y, q_exact]
    names = ["y", "Q_exact"]
    summary = {}
    for order in orders:
        mc = MwlsConfig(n_neighbors=cfg.mwls.n_neighbors, poly_order=order,
                        weight_width=cfg.mwls.weight_width)
        op = JetOperator(y, mc)
        _, grad, lap = op.apply(g)
        q = -0.5 * (grad[:, 0] ** 2 + lap)
        columns.append(q)
        names.append(f"Q_order{order}")
        err = np.abs(q - q_exact)
        near = np.abs(y) <= 0.2
        far = np.abs(y) >= 0.5
        scale = np.abs(q_exact[far]).max()
        summary[f"order{order}"] = {
            "max_error": float(err.max()),
            "max_error_near_node": float(err[near].max()),
            "max_error_far_rel": float(err[far].max() / scale),
        }

    rows = zip(*columns)
    _write_csv(os.path.join(out_dir, "quantum_potential.csv"), names, rows)
    return "Valid", {"orders": summary}, ["quantum_potential.csv"]


_PLOT_TEMPLATES = {
    "propagate_fd_1d": """\
# gnuplot script: final-time wave function, numeric grid data
set datafile separator ','
set key autotitle columnhead
plot 'fields.csv' using 2:3 with points title 'Re psi (numeric)'
pause -1
""",
    "propagate_hydro": """\
# gnuplot script: velocity and quantum potential vs the exact curves
set datafile separator ','
set key autotitle columnhead
plot 'diagnostics.csv' using 2:3 with points title 'v (hydro)', \\
     'diagnostics.csv' using 2:4 with lines title 'v (exact)'
pause -1
""",
    "qp_study": """\
# gnuplot script: MWLS quantum potential vs exact, by polynomial order
set datafile separator ','
set key autotitle columnhead
plot for [col=3:6] 'quantum_potential.csv' using 1:col with lines, \\
     'quantum_potential.csv' using 1:2 with lines lw 2 title 'exact'
pause -1
""",
}


def _plot_script(spec):
    if spec.mode == "qp_study":
        return _PLOT_TEMPLATES["qp_study"]
    if spec.config.solver == "schrodinger_fd":
        return _PLOT_TEMPLATES["propagate_fd_1d"]
    return _PLOT_TEMPLATES["propagate_hydro"]


def run(config_path, out_root=None):
    """Execute a scenario file; returns (manifest dict, exit code)."""
    spec = load_config(config_path)
    out_root = out_root or os.environ.get("SLITSIM_OUT") or spec.out_dir
    label = spec.config.scenario or \
        os.path.splitext(os.path.basename(config_path))[0]
    out_dir = os.path.join(out_root, label)
    os.makedirs(out_dir, exist_ok=True)

    start = time.perf_counter()
    if spec.mode == "qp_study":
        status, errors, files = run_qp_study(spec, out_dir)
    elif spec.config.solver == "schrodinger_fd":
        status, errors, files = run_fd(spec, out_dir)
    else:
        status, errors, files = run_hydro(spec, out_dir)
    wall = time.perf_counter() - start

    plot_name = "plot.gp"
    with open(os.path.join(out_dir, plot_name), "w",
              encoding="utf-8") as fh:
        fh.write(_plot_script(spec))

    manifest = {
        "config": _config_dict(spec),
        "solver": spec.config.solver,
        "status": status,
        "wall_time_s": wall,
        "errors": errors,
        "files": files + [plot_name],
        "out_dir": out_dir,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest, (0 if status == "Valid" else 2)


def _rebuild_spec(manifest):
    from .config import RunSpec
    from .core import ScenarioConfig, UniformGrid, WavePacketParams
    c = manifest["config"]
    packet = WavePacketParams(**c["packet"])
    grid = UniformGrid(lo=c["grid"]["lo"], hi=c["grid"]["hi"],
                       n=c["grid"]["n"], dim=c["grid"]["dim"])
    mwls = None
    if c["mwls"]:
        mwls = MwlsConfig(**c["mwls"])
    cfg = ScenarioConfig(
        packet=packet, grid=grid, t_final=c["t_final"],
        n_steps=c["n_steps"], solver=c["solver"],
        trajectory_starts=tuple(tuple(s) for s in c["trajectory_starts"]),
        mwls=mwls, snapshot_times=tuple(c["snapshot_times"]),
        scenario=c["scenario"], field_kind=c["field_kind"])
    return RunSpec(config=cfg, mode=c["mode"],
                   qp_orders=tuple(c["qp_orders"]))


def compare(manifest_path, oracle="exact"):
    """Per-snapshot / per-trajectory error report against the exact oracle."""
    if oracle != "exact":
        raise SlitsimError(f"unknown oracle {oracle!r}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    spec = _rebuild_spec(manifest)
    cfg = spec.config
    out_dir = os.path.dirname(os.path.abspath(manifest_path))
    exact_field = field_for(cfg.packet, cfg.field_kind)

    report_rows = []
    lines = [f"scenario: {cfg.scenario or '(unnamed)'}",
             f"solver: {cfg.solver}", f"status: {manifest['status']}"]

    fields_path = os.path.join(out_dir, "fields.csv")
    if os.path.exists(fields_path):
        data = np.genfromtxt(fields_path, delimiter=",", names=True)
        for t in np.unique(data["t"]):
            sel = data[data["t"] == t]
            if cfg.grid.dim == 1:
                psi_exact = exact_field.psi(sel["y"], t)
            else:
                psi_exact = exact_field.psi(sel["y1"], sel["y2"], t)
            err = np.abs(sel["re"] + 1j * sel["im"] - psi_exact)
            emax, erms = float(err.max()), float(np.sqrt(np.mean(err ** 2)))
            report_rows.append((f"field_t={t:.6g}", emax, erms))
            lines.append(f"field t={t:.6g}: max |dpsi| = {emax:.3e}, "
                         f"rms = {erms:.3e}")

    traj_summary = manifest["errors"].get("trajectories") or []
    for j, entry in enumerate(traj_summary):
        report_rows.append((f"trajectory_{j}", entry["max_deviation"],
                            entry["max_deviation_off_node"]))
        lines.append(
            f"trajectory {j} from {entry['start']}: max dev "
            f"{entry['max_deviation']:.3e} "
            f"(off-node {entry['max_deviation_off_node']:.3e})")

    for d in manifest["errors"].get("snapshots", []):
        report_rows.append((f"hydro_t={d['t']:.6g}", d["max_v_error"],
                            d["max_q_error"]))
        lines.append(f"hydro t={d['t']:.6g}: max |dv| = "
                     f"{d['max_v_error']:.3e}, max |dQ| = "
                     f"{d['max_q_error']:.3e} [{d['status']}]")

    _write_csv(os.path.join(out_dir, "errors.csv"),
               ("quantity", "max_error", "secondary"),
               [(str(r[0]), r[1], r[2]) for r in report_rows])
    report = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, "report.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(report)
    return report


def bundled_scenarios():
    """Names of the scenario files shipped with the package."""
    root = resources.files("slitsim").joinpath("scenarios")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def scenario_path(name):
    """Filesystem path of a bundled scenario (with or without .cfg)."""
    if not name.endswith(".cfg"):
        name += ".cfg"
    path = resources.files("slitsim").joinpath("scenarios", name)
    if not path.is_file():
        raise SlitsimError(f"no bundled scenario named {name!r}")
    return str(path)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="slitsim",
        description="Two-slit interference: wave functions and Bohmian "
                    "trajectories by rival numerical schemes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("config",
                       help="scenario file path or bundled scenario name")
    p_run.add_argument("--out", default=None,
                       help="output root (default: config out.dir, "
                            "overridden by $SLITSIM_OUT)")

    p_cmp = sub.add_parser("compare", help="error report for a finished run")
    p_cmp.add_argument("manifest", help="path to a run manifest.json")
    p_cmp.add_argument("--oracle", default="exact", choices=["exact"])

    sub.add_parser("list-scenarios", help="show bundled scenarios")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = args.config
            if not os.path.exists(config):
                config = scenario_path(config)
            manifest, code = run(config, out_root=args.out)
            print(f"status: {manifest['status']}  "
                  f"wall time: {manifest['wall_time_s']:.2f} s  "
                  f"output: {manifest['out_dir']}")
            return code
        if args.command == "compare":
            print(compare(args.manifest, oracle=args.oracle), end="")
            return 0
        for name in bundled_scenarios():
            print(name)
        return 0
    except SlitsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
