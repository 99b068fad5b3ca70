"""Command-line interface: every computation as a subcommand.

All subcommands read a JSON config whose "vorticity" key is a family
descriptor for make_distribution, write a JSON report (sorted keys, so
identical configs byte-reproduce identical reports), and write a run
manifest carrying the config digest and output list. Timestamps appear
only in the manifest, never in reports.

Exit codes: 0 success; 2 when a hypothesis check or sweep concludes "not
applicable"; 1 on configuration or solver errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import diagnostics as dg
from . import stream as st
from . import wavesolver as ws
from .errors import ConfigError, StillwaveError
from .vorticity import make_distribution

__all__ = ["run", "main"]


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    if "vorticity" not in cfg:
        raise ConfigError(f"config {path} lacks the 'vorticity' key")
    return cfg


def _canonical_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _sanitize(obj):
    """Make an object JSON-safe: numpy scalars to python, non-finite
    floats to null (JSON has no Infinity)."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_sanitize(obj), fh, sort_keys=True, indent=2,
                  allow_nan=False)
        fh.write("\n")


def _write_manifest(path: str, subcommand: str, cfg: dict,
                    outputs: list) -> None:
    manifest = {
        "subcommand": subcommand,
        "config_digest": _canonical_digest(cfg),
        "tool_version": __version__,
        "outputs": sorted(outputs),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(path, manifest)


def _family_summary(dist, k_max: int) -> dict:
    crit = st.critical_surface_speed(dist)
    summary = {"s0": crit.speed, "tau0": crit.maximiser,
               "degenerate": crit.degenerate, "h0": None, "family": [],
               "notes": []}
    try:
        summary["h0"] = st.least_still_depth(dist)
    except (st.NotStill, st.DivergentDepth) as exc:
        summary["notes"].append(f"{type(exc).__name__}: {exc}")
        return summary
    try:
        members = st.still_depth_family(dist, k_max)
    except StillwaveError as exc:
        summary["notes"].append(f"{type(exc).__name__}: {exc}")
        return summary
    for m in members:
        sign, k = m.branch
        summary["family"].append({"sign": sign, "k": k, "h": m.depth,
                                  "surface_speed": m.surface_speed,
                                  "still": m.still})
    return summary


def _resolve_solution(cfg: dict, dist) -> st.StreamSolution:
    """Pick the stream solution a config refers to.

    "s" selects the shear flow with that bed slope (still or not);
    otherwise "member" indexes the still-depth family sorted by depth
    (default 0, the least depth), with "k_max" bounding the enumeration.
    """
    if "s" in cfg:
        return st.shear_solution(dist, float(cfg["s"]))
    member = int(cfg.get("member", 0))
    if member < 0:
        raise ConfigError("member index must be nonnegative")
    k_max = int(cfg.get("k_max", max(member, 0)))
    family = st.still_depth_family(dist, k_max)
    if member >= len(family):
        raise ConfigError(
            f"member {member} out of range; family has {len(family)} entries "
            f"for k_max={k_max}")
    return family[member]


def _profile_csv(path: str, sol: st.StreamSolution, samples: int = 257) -> None:
    ys = np.linspace(0.0, sol.depth, samples)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "U", "Uy"])
        for y, u, uy in zip(ys, np.asarray(sol.U(ys)), np.asarray(sol.Uy(ys))):
            writer.writerow([repr(float(y)), repr(float(u)), repr(float(uy))])


def _surface_csv(path: str, state: ws.WaveState) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "eta"])
        for x, e in zip(state.x, state.eta):
            writer.writerow([repr(float(x)), repr(float(e))])


def _cmd_stream(cfg, args, outputs):
    dist = make_distribution(cfg["vorticity"])
    report = _family_summary(dist, int(cfg.get("k_max", 0)))
    if "s" in cfg:
        sol = st.shear_solution(dist, float(cfg["s"]))
        report["shear"] = {"s": float(cfg["s"]), "h": sol.depth,
                           "surface_speed": sol.surface_speed,
                           "still": sol.still}
        if args.csv:
            _profile_csv(args.csv, sol)
            outputs.append(args.csv)
    elif args.csv:
        if not report["family"]:
            raise ConfigError("no family member to dump; config has no 's' "
                              "and the family is empty")
        fam = st.still_depth_family(dist, int(cfg.get("k_max", 0)))
        _profile_csv(args.csv, fam[0])
        outputs.append(args.csv)
    return report, 0


def _cmd_depths(cfg, args, outputs):
    dist = make_distribution(cfg["vorticity"])
    return _family_summary(dist, int(cfg.get("k_max", 0))), 0


def _cmd_check(cfg, args, outputs):
    from .hypotheses import check_hypotheses
    dist = make_distribution(cfg["vorticity"])
    sol = _resolve_solution(cfg, dist)
    report = check_hypotheses(dist, sol, float(cfg.get("slope_bound", 1.0)))
    return report.to_dict(), 0 if report.applicable else 2


def _cmd_solve(cfg, args, outputs):
    dist = make_distribution(cfg["vorticity"])
    sol = _resolve_solution(cfg, dist)
    period_L = float(cfg.get("period_L", 2.0))
    nx = int(cfg.get("nx", 64))
    ny = int(cfg.get("ny", 32))
    amp = float(cfg.get("amplitude", 0.0))
    if amp == 0.0:
        state0 = ws.flat_state(sol, dist, period_L, nx, ny)
    else:
        state0 = ws.perturbed_state(sol, dist, period_L, nx, ny, amp,
                                    mode=int(cfg.get("mode", 1)))
    res = ws.newton_solve(state0, dist,
                          tol=float(cfg.get("tol", ws.NEWTON_TOL)),
                          max_iter=int(cfg.get("max_iter", ws.MAX_NEWTON_ITER)))
    report = {
        "converged": True,
        "iterations": res.iterations,
        "residual_norms": res.norms._asdict(),
        "max_zeta": float(np.max(np.abs(sol.depth - res.state.eta))),
        "r": res.state.r,
    }
    if args.state_out:
        _write_json(args.state_out, res.state.to_dict())
        outputs.append(args.state_out)
        report["state_file"] = args.state_out
    if args.csv:
        _surface_csv(args.csv, res.state)
        outputs.append(args.csv)
    return report, 0


def _cmd_sweep(cfg, args, outputs):
    dist = make_distribution(cfg["vorticity"])
    sol = _resolve_solution(cfg, dist)
    if "amplitudes" not in cfg or "wavelengths" not in cfg:
        raise ConfigError("sweep config needs 'amplitudes' and 'wavelengths'")
    rep = ws.nonexistence_sweep(
        sol, dist, cfg["amplitudes"], cfg["wavelengths"],
        slope_cap=float(cfg.get("slope_cap", 1.0)),
        nx=int(cfg.get("nx", 64)), ny=int(cfg.get("ny", 32)),
        amplitude_cap=cfg.get("amplitude_cap"),
        flat_tol=float(cfg.get("flat_tol", 1e-8)),
        threads=cfg.get("threads"))
    code = 2 if rep.verdict == ws.VERDICT_NOT_APPLICABLE else 0
    return rep.to_dict(), code


def _cmd_dispersion(cfg, args, outputs):
    dist = make_distribution(cfg["vorticity"])
    sol = _resolve_solution(cfg, dist)
    k_lo = float(cfg.get("k_min", 0.0))
    k_hi = float(cfg.get("k_max_scan", 5.0))
    ks = cfg.get("k_values")
    if ks is None:
        ks = np.linspace(k_lo, k_hi, int(cfg.get("samples", 21))).tolist()
    sigma = [{"k": float(k), "sigma": ws.dispersion_sigma(sol, dist, float(k))}
             for k in ks]
    roots = ws.find_bifurcation_points(
        sol, dist, k_lo, k_hi, scan_points=int(cfg.get("scan_points", 201)))
    return {"h": sol.depth, "surface_speed": sol.surface_speed,
            "still": sol.still, "sigma": sigma,
            "roots": [float(r) for r in roots]}, 0


def _cmd_diagnose(cfg, args, outputs):
    dist = make_distribution(cfg["vorticity"])
    sol = _resolve_solution(cfg, dist)
    state_file = cfg.get("state_file") or args.state
    if not state_file:
        raise ConfigError("diagnose needs a state: config 'state_file' or --state")
    try:
        with open(state_file, "r", encoding="utf-8") as fh:
            state = ws.WaveState.from_dict(json.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read state {state_file}: {exc}") from exc
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"bad state file {state_file}: {exc}") from exc
    delta = cfg.get("delta")
    report = dg.diagnostics_report(state, sol, dist,
                                   t=float(cfg.get("t", 0.0)),
                                   delta=None if delta is None else float(delta))
    return report.to_dict(), 0


_HANDLERS = {
    "stream": _cmd_stream,
    "depths": _cmd_depths,
    "check": _cmd_check,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "dispersion": _cmd_dispersion,
    "diagnose": _cmd_diagnose,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stillwave",
        description="Steady water waves with vorticity: stream solutions, "
                    "hypothesis checks, free-boundary solves, diagnostics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="report JSON path")
        p.add_argument("--manifest", default=None, help="manifest JSON path")
        if name in ("stream", "solve"):
            p.add_argument("--csv", default=None, help="CSV dump path")
        if name == "solve":
            p.add_argument("--state-out", dest="state_out", default=None,
                           help="write the solved WaveState as JSON")
        if name == "diagnose":
            p.add_argument("--state", default=None,
                           help="WaveState JSON (overrides config state_file)")
    return parser


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out = args.out or f"{args.subcommand}_report.json"
    manifest = args.manifest or f"{args.subcommand}_manifest.json"
    try:
        cfg = _load_config(args.config)
        outputs = [out]
        report, code = _HANDLERS[args.subcommand](cfg, args, outputs)
        _write_json(out, report)
        _write_manifest(manifest, args.subcommand, cfg, outputs)
        json.dump(_sanitize(report), sys.stdout, sort_keys=True, indent=2,
                  allow_nan=False)
        sys.stdout.write("\n")
        return code
    except StillwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
