"""Command-line front end: simulate, ensemble, select, verify.

Configuration comes from an optional JSON file (--config) with individual
flags overriding it. Exit codes: 0 success, 2 validation error, 3 numerical
failure (including failed verification checks), 4 archive/IO error.
HFSS_THREADS caps how many trajectories are generated concurrently.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .archive import (
    read_manifest,
    read_trajectory_archive,
    write_trajectory_archive,
)
from .errors import ArchiveError, ConfigError, HfssError
from .fields import DirectorField
from .flows import SchemeConfig, run_flow
from .initial_data import make_datum
from .mesh import build_ball_mesh
from .selection import (
    AdmissibilityTolerances,
    admissible,
    apply_enumeration,
    build_solution_set,
    default_selection_config,
    discounted_functional,
    select_with_transcript,
    semigroup_check,
    trajectory_distance,
)

DEFAULT_CONFIG = {
    "n": 16,
    "datum": {"name": "great-circle"},
    "dt": None,            # default h^2/12
    "horizon": 0.5,
    "stride": None,        # default: about 200 stored snapshots
    "dense_prefix": 8,
    "schemes": ["projection"],
    "selection": {
        "lambdas": [1.0, 2.0],
        "degree": 2,
        "delta": 1e-9,
        "aligned_first": "+",
        "enumeration": "default",
        "enforce_tail_bound": False,
    },
    "tolerances": {},
    "seed": 0,
    "out": "hfss-out",
}


def load_config(path: str | None) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        for key, value in user.items():
            if key == "selection" and isinstance(value, dict):
                cfg["selection"].update(value)
            else:
                cfg[key] = value
    return cfg


def apply_flags(cfg: dict, args) -> dict:
    if getattr(args, "n", None) is not None:
        cfg["n"] = args.n
    if getattr(args, "dt", None) is not None:
        cfg["dt"] = args.dt
    if getattr(args, "horizon", None) is not None:
        cfg["horizon"] = args.horizon
    if getattr(args, "scheme", None):
        cfg["schemes"] = list(args.scheme)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        cfg["out"] = args.out
    return cfg


def _scheme_configs(cfg: dict, mesh) -> list:
    h = mesh.h
    dt = cfg["dt"] if cfg["dt"] else h * h / 12.0
    # snap the horizon to the step grid so T is an exact multiple of dt
    m_total = max(10, int(round(cfg["horizon"] / dt)))
    horizon = m_total * dt
    stride = cfg["stride"] or max(1, m_total // 200)
    out = []
    for entry in cfg["schemes"]:
        if isinstance(entry, str):
            entry = {"scheme": entry}
        scheme = entry.get("scheme")
        out.append(SchemeConfig(
            scheme=scheme,
            dt=dt,
            horizon=horizon,
            eps=entry.get("eps", 4.0 * h) if scheme == "penalized" else None,
            lambda_damp=entry.get("lambda_damp", 1.0),
            stride=entry.get("stride", stride),
            dense_prefix=entry.get("dense_prefix", cfg["dense_prefix"]),
            gate_tol=entry.get("gate_tol"),
        ))
    if not out:
        raise ConfigError("no schemes configured")
    return out


def _tolerances(cfg: dict) -> AdmissibilityTolerances:
    t = cfg.get("tolerances") or {}
    return AdmissibilityTolerances(
        norm_tol=t.get("norm_tol", 1e-12),
        ledger_tol=t.get("ledger_tol"),
        eq_tol=t.get("eq_tol"),
        continuity_slack=t.get("continuity_slack", 1e-9),
        test_degree=t.get("test_degree", 2),
    )


def _selection_config(cfg: dict, datum: DirectorField):
    s = cfg["selection"]
    sel = default_selection_config(
        datum,
        lambdas=tuple(s.get("lambdas", (1.0, 2.0))),
        degree=s.get("degree", 2),
        aligned_first=s.get("aligned_first", "+"),
        delta=s.get("delta", 1e-9),
        enforce_tail_bound=s.get("enforce_tail_bound", False),
    )
    return apply_enumeration(sel, s.get("enumeration", "default"))


def _setup(cfg: dict):
    mesh = build_ball_mesh(cfg["n"])
    datum = make_datum(mesh, cfg["datum"], cfg.get("seed", 0))
    schemes = _scheme_configs(cfg, mesh)
    for sc in schemes:
        sc.validate(mesh)
    return mesh, datum, schemes


def cmd_simulate(args) -> int:
    cfg = apply_flags(load_config(args.config), args)
    mesh, datum, schemes = _setup(cfg)
    traj = run_flow(datum, schemes[0])
    report = admissible(traj, datum, _tolerances(cfg))
    outdir = os.path.join(cfg["out"], f"sim-{schemes[0].scheme}")
    write_trajectory_archive(outdir, traj, {
        "config": cfg,
        "admissibility": report.as_dict(),
    })
    print(json.dumps({"archive": outdir, "admissible": report.ok,
                      "energy_initial": traj.energy[0],
                      "energy_final": traj.energy[-1]}, indent=2))
    return 0


def _functional_values(ensemble, sel):
    values = {}
    for label, traj in zip(ensemble.labels, ensemble.trajectories):
        per = {}
        for fn in sel.functionals:
            dv = discounted_functional(traj, fn.lam, fn.probe)
            per[fn.name()] = {"value": dv.value, "tail_bound": dv.tail_bound,
                              "quad_err": dv.quad_err}
        values[label] = per
    return values


def cmd_ensemble(args) -> int:
    cfg = apply_flags(load_config(args.config), args)
    mesh, datum, schemes = _setup(cfg)
    tol = _tolerances(cfg)
    ensemble = build_solution_set(datum, schemes, tol)
    sel = _selection_config(cfg, datum)
    dirs = {}
    for label, traj in zip(ensemble.labels, ensemble.trajectories):
        outdir = os.path.join(cfg["out"], label)
        write_trajectory_archive(outdir, traj, {
            "config": cfg,
            "admissibility": ensemble.reports[label].as_dict(),
        })
        dirs[label] = outdir
    manifest = {
        "config": cfg,
        "members": list(ensemble.labels),
        "rejected": ensemble.rejected,
        "archives": dirs,
        "admissibility": {k: v.as_dict() for k, v in ensemble.reports.items()},
        "functional_values": _functional_values(ensemble, sel),
    }
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], "solution_set.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"solution_set": path, "members": list(ensemble.labels),
                      "rejected": list(ensemble.rejected)}, indent=2))
    return 0


def cmd_select(args) -> int:
    cfg = apply_flags(load_config(args.config), args)
    mesh, datum, schemes = _setup(cfg)
    tol = _tolerances(cfg)
    ensemble = build_solution_set(datum, schemes, tol)
    sel = _selection_config(cfg, datum)
    chosen, transcript = select_with_transcript(datum, schemes, sel, tol,
                                                ensemble=ensemble)
    result = {"config": cfg, "selection": transcript}
    if args.enumeration:
        sel2 = apply_enumeration(sel, args.enumeration)
        chosen2, transcript2 = select_with_transcript(datum, schemes, sel2, tol,
                                                      ensemble=ensemble)
        gap = trajectory_distance(chosen, chosen2)
        threshold = 1e-8 * (1.0 + float(np.sqrt(
            np.sum(datum.values[mesh.interior] ** 2) * mesh.weight)))
        result["second_enumeration"] = transcript2
        result["distinctness"] = {
            "enumeration": args.enumeration,
            "l2_gap": gap,
            "threshold": threshold,
            "distinct": bool(gap > threshold),
        }
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    selected_dir = os.path.join(outdir, "selected")
    write_trajectory_archive(selected_dir, chosen, {"config": cfg,
                                                    "selection": transcript})
    path = os.path.join(outdir, "select_transcript.json")
    with open(path, "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"transcript": path, "archive": selected_dir,
                      "selected": transcript["selected_label"],
                      "distinct": result.get("distinctness", {}).get("distinct")},
                     indent=2))
    return 0


VERIFY_CHECKS = ("norm", "trace", "energy", "weakform", "semigroup")
DEFAULT_CHECKS = ("norm", "trace", "energy", "weakform")


def cmd_verify(args) -> int:
    checks = tuple(args.check) if args.check else DEFAULT_CHECKS
    for c in checks:
        if c not in VERIFY_CHECKS:
            raise ConfigError(f"unknown check {c!r}; choose from {VERIFY_CHECKS}")
    traj, manifest = read_trajectory_archive(args.archive)
    datum = DirectorField(traj.mesh, traj.snapshot(0), validate=False)
    cfg = manifest.get("config") or {}
    tol = _tolerances(cfg) if cfg else AdmissibilityTolerances()
    report = admissible(traj, datum, tol)
    out = {"archive": args.archive, "checks": {}}
    mapping = {
        "norm": ("unit_norm", "worst_norm_defect"),
        "trace": ("initial_and_trace", "trace_exact"),
        "energy": ("energy_inequality", "energy_residual"),
        "weakform": ("weak_form", "weak_form_defect"),
    }
    for name in checks:
        if name == "semigroup":
            continue
        item, diag = mapping[name]
        out["checks"][name] = {
            "pass": bool(report.items[item]),
            "residual": report.diagnostics.get(diag),
        }
    if "semigroup" in checks:
        if not cfg:
            raise ConfigError("archive manifest has no config echo; "
                              "cannot rerun for the semigroup check")
        mesh, datum2, schemes = _setup(cfg)
        sel = _selection_config(cfg, datum2)
        grid = []
        prefix = min(traj.dense_prefix, 3)
        s = max(1, traj.n_steps // 4)
        worst = 0.0
        for m in range(prefix + 1):
            err = semigroup_check(datum2, schemes, sel, m, s, tol)
            grid.append({"m": m, "s": s, "error": err})
            worst = max(worst, err)
        scale = 1e-8 * (1.0 + float(np.sqrt(
            np.sum(datum2.values[mesh.interior] ** 2) * mesh.weight)))
        out["checks"]["semigroup"] = {"pass": bool(worst <= scale),
                                      "grid": grid, "tolerance": scale}
    ok = all(entry["pass"] for entry in out["checks"].values())
    out["pass"] = ok
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if ok else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfss",
        description="Heat flow of sphere-valued maps with semiflow selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--n", type=int, help="mesh resolution (even, >= 4)")
        p.add_argument("--dt", type=float, help="time step (default h^2/12)")
        p.add_argument("--horizon", type=float, help="final time T")
        p.add_argument("--scheme", action="append",
                       help="scheme name (repeatable)")
        p.add_argument("--seed", type=int, help="seed for randomized data")

    p = sub.add_parser("simulate", help="run one flow and archive it")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ensemble", help="run all schemes; archive the solution set")
    common(p)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("select", help="run the semiflow selection")
    common(p)
    p.add_argument("--enumeration",
                   help="second enumeration (default|flip-first|reversed|"
                        "rotate:k) for a distinctness verdict")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("verify", help="check an archive against the "
                                      "weak-solution conditions")
    p.add_argument("archive", help="archive directory")
    p.add_argument("--check", action="append",
                   help=f"check to run (repeatable): {', '.join(VERIFY_CHECKS)}")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArchiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except HfssError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
