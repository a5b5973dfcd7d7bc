"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as lvio
from .analysis import LyapunovConfig, chaotic_candidate, classify_point, lyapunov_max
from .integrator import (
    EmptyTrajectoryError,
    IntegrationError,
    IntegratorConfig,
    integrate,
    integrate_fixed,
)
from .model import DomainError, Params, spectrum_closed_form, steady_states
from .topology import BandConfig, SimConfig, Thresholds, surgery_scan

JOBS_ENV = "LV_SURGERY_JOBS"

# Overridable settings.  A config file (JSON) may set any of these at top
# level or inside a section named after the command.
DEFAULTS = {
    "A": None, "B": None, "C": None,
    "x0": 0.5, "y0": 1.0, "z0": 2.0,
    "t_end": 1000.0,
    "rtol": 1e-9, "atol": 1e-12, "h_init": 1e-3, "h_min": 1e-12, "h_max": 1.0,
    "max_steps": 100_000_000, "bound": 1e4,
    "backend": "adaptive", "h": 1e-3,
    "figure": False,
    # analyze
    "lyapunov": False, "t_total": 5000.0, "t_renorm": 1.0, "t_transient": 500.0,
    # scan
    "transient_fraction": 0.3,
    "n_bins": 64, "inset": 0.1, "shell_factor": 5.0, "shell_radius": None,
    "axial_lo": None, "axial_hi": None,
    "eps_hole": None, "eps_rel": 0.02, "c_min": 0.9,
    "keep_trajectories": False,
    # render
    "width": 800, "height": 600, "mark_L": False,
}
COMMAND_DEFAULTS = {"scan": {"t_end": 50_000.0}}


class UsageError(Exception):
    pass


def _nonneg(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v) or v < 0:
        raise argparse.ArgumentTypeError(f"must be a finite value >= 0, got {text}")
    return v


def _pos(text: str) -> float:
    v = _nonneg(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _posint(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _alist(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad A list: {text!r}")
    if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise argparse.ArgumentTypeError("A values must be positive")
    return vals


def _add_params(p):
    g = p.add_argument_group("parameters")
    for name in ("A", "B", "C"):
        g.add_argument(f"--{name}", type=_nonneg, help=f"parameter {name} (>= 0)")


def _add_start(p):
    for name in ("x0", "y0", "z0"):
        p.add_argument(f"--{name}", type=float, help="initial state component")


def _add_integrator(p):
    g = p.add_argument_group("integration")
    g.add_argument("--t-end", type=_pos)
    g.add_argument("--rtol", type=_pos)
    g.add_argument("--atol", type=_pos)
    g.add_argument("--h-init", type=_pos)
    g.add_argument("--h-min", type=_pos)
    g.add_argument("--h-max", type=_pos)
    g.add_argument("--max-steps", type=_posint)
    g.add_argument("--bound", type=_pos, help="abort when |state|_inf exceeds this")
    g.add_argument("--backend", choices=("adaptive", "fixed"))
    g.add_argument("--h", type=_pos, help="step size of the fixed-step backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lv-surgery", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    parser.subparsers = {}

    def add(name, help):
        parser.subparsers[name] = sub.add_parser(name, help=help)
        return parser.subparsers[name]

    def common(sp):
        sp.add_argument("--config", type=Path, help="JSON file of default settings")

    sp = add("simulate", "integrate one trajectory to CSV")
    _add_params(sp)
    _add_start(sp)
    _add_integrator(sp)
    sp.add_argument("--figure", action="store_true", default=None, help="also write PREFIX.png")
    sp.add_argument("--out", default="trajectory", help="output prefix (default: trajectory)")
    common(sp)

    sp = add("analyze", "steady states, spectra and region report as JSON")
    _add_params(sp)
    _add_start(sp)
    sp.add_argument("--lyapunov", action="store_true", default=None)
    sp.add_argument("--t-total", type=_pos)
    sp.add_argument("--t-renorm", type=_pos)
    sp.add_argument("--t-transient", type=_nonneg)
    sp.add_argument("--rtol", type=_pos)
    sp.add_argument("--atol", type=_pos)
    sp.add_argument("--out", help="output prefix; JSON goes to stdout when omitted")
    common(sp)

    sp = add("scan", "hole metrics across a sweep of A")
    for name in ("B", "C"):
        sp.add_argument(f"--{name}", type=_nonneg)
    grid = sp.add_mutually_exclusive_group()
    grid.add_argument("--A-list", type=_alist, dest="A_list", help="comma-separated A values")
    grid.add_argument("--A-from", type=_pos, dest="A_from")
    sp.add_argument("--A-to", type=_pos, dest="A_to")
    sp.add_argument("--A-steps", type=_posint, dest="A_steps", help="number of A values in the range")
    _add_start(sp)
    _add_integrator(sp)
    g = sp.add_argument_group("hole measurement")
    g.add_argument("--transient-fraction", type=_nonneg)
    g.add_argument("--n-bins", type=_posint)
    g.add_argument("--inset", type=_nonneg)
    g.add_argument("--shell-factor", type=_pos)
    g.add_argument("--shell-radius", type=_pos)
    g.add_argument("--axial-lo", type=float)
    g.add_argument("--axial-hi", type=float)
    g.add_argument("--eps-hole", type=_pos)
    g.add_argument("--eps-rel", type=_pos)
    g.add_argument("--c-min", type=_pos)
    sp.add_argument("--jobs", type=_posint, help=f"worker processes (env {JOBS_ENV})")
    sp.add_argument("--keep-trajectories", action="store_true", default=None)
    sp.add_argument("--no-figure", action="store_true", help="skip PREFIX.png")
    sp.add_argument("--out", default="scan", help="output prefix (default: scan)")
    common(sp)

    sp = add("render", "SVG projection of a trajectory CSV")
    sp.add_argument("--in", dest="input", required=True, type=Path)
    sp.add_argument("--plane", required=True, choices=("xy", "xz", "yz"))
    sp.add_argument("--out", required=True, type=Path)
    sp.add_argument("--width", type=_posint)
    sp.add_argument("--height", type=_posint)
    sp.add_argument("--mark-L", dest="mark_L", action="store_true", default=None)
    _add_params(sp)
    common(sp)

    sp = add("rerun", "re-execute a manifest and compare CSV outputs")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("--out-dir", type=Path, default=Path("rerun"))
    return parser


# ---------------------------------------------------------------------------
# option resolution


def resolve(ns: argparse.Namespace) -> dict:
    """Merge flags over config file over defaults."""
    opt = dict(DEFAULTS)
    opt.update(COMMAND_DEFAULTS.get(ns.command, {}))
    cfg_path = getattr(ns, "config", None)
    if cfg_path is not None:
        try:
            data = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {cfg_path}: {exc}")
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        section = data.pop(ns.command, {}) if isinstance(data.get(ns.command), dict) else {}
        for source in (data, section):
            for k, v in source.items():
                if isinstance(v, dict):
                    continue
                if k not in DEFAULTS:
                    raise UsageError(f"unknown config key {k!r}")
                opt[k] = v
    for k, v in vars(ns).items():
        if k in ("config", "command", "func"):
            continue
        if v is not None:
            opt[k] = v
    opt["command"] = ns.command
    return opt


def _params(opt: dict) -> Params:
    missing = [k for k in ("A", "B", "C") if opt.get(k) is None]
    if missing:
        raise UsageError(f"missing required parameter(s): {', '.join('--' + k for k in missing)}")
    try:
        return Params(opt["A"], opt["B"], opt["C"])
    except DomainError as exc:
        raise UsageError(str(exc))


def _integrator_cfg(opt: dict) -> IntegratorConfig:
    try:
        return IntegratorConfig(rtol=opt["rtol"], atol=opt["atol"], h_init=opt["h_init"],
                                h_min=opt["h_min"], h_max=opt["h_max"],
                                max_steps=int(opt["max_steps"]), bound=opt["bound"])
    except ValueError as exc:
        raise UsageError(str(exc))


def _prefix(out, suffix: str) -> Path:
    p = Path(out)
    return p.with_suffix("") if p.suffix == suffix else p


def _start(opt):
    return (float(opt["x0"]), float(opt["y0"]), float(opt["z0"]))


def _public(opt: dict) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(opt.items()) if k != "jobs"}


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(opt: dict) -> int:
    p = _params(opt)
    cfg = _integrator_cfg(opt)
    s0 = _start(opt)
    if opt["backend"] == "fixed":
        n = int(round(opt["t_end"] / opt["h"]))
        if n < 1:
            raise UsageError("--t-end must cover at least one fixed step")
        tr = integrate_fixed(p, s0, opt["h"], n, bound=opt["bound"])
    else:
        tr = integrate(p, s0, opt["t_end"], cfg)
    prefix = _prefix(opt["out"], ".csv")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    outputs = [lvio.write_trajectory_csv(prefix.with_name(prefix.name + ".csv"), tr.times, tr.states)]
    if opt["figure"]:
        from .plotting import plot_projections
        outputs.append(plot_projections(tr.states, p, prefix.with_name(prefix.name + ".png")))
    manifest = lvio.build_manifest(
        "simulate", _public(opt), outputs, params=p.as_dict(), initial_state=list(s0),
        integrator={"method": tr.method, **tr.config.as_dict()},
        steps={"accepted": tr.accepted, "rejected": tr.rejected}, transient_cut=None)
    lvio.write_json(lvio.manifest_path(prefix), manifest)
    print(f"wrote {len(tr)} samples to {outputs[0]}")
    return 0


def _spectrum_json(spec) -> dict:
    return {
        "eigenvalues": {"re": [z.real for z in spec.eigenvalues], "im": [z.imag for z in spec.eigenvalues]},
        "eigenvectors": [None if v is None else {"re": np.real(v).tolist(), "im": np.imag(v).tolist()}
                         for v in spec.eigenvectors],
        "source": spec.source,
        "fallback": list(spec.fallback),
    }


def _character_json(ch) -> dict:
    return {"kind": ch.kind, "complex_pair": ch.complex_pair, "signs": "".join(ch.signs)}


def analysis_report(p: Params, opt: dict) -> dict:
    ss = steady_states(p)
    report = {
        "params": p.as_dict(),
        "ratio": p.ratio if p.ratio is not None else "undefined ratio",
        "steady_states": [
            {"label": e.label, "defined": e.defined, "admissible": e.admissible,
             "point": None if e.point is None else list(e.point)}
            for e in ss
        ],
        "spectra": {},
        "characters": {},
    }
    for label in ("Ss1", "Ss2", "Ss3"):
        try:
            spec = spectrum_closed_form(p, label)
        except DomainError:
            report["spectra"][label] = None
            report["characters"][label] = None
            continue
        report["spectra"][label] = _spectrum_json(spec)
        report["characters"][label] = _character_json(classify_point(spec))
    if p.A > 0:
        r = chaotic_candidate(p)
        report["region"] = {"ratio": r.ratio, "ss2": _character_json(r.ss2), "ss3": _character_json(r.ss3),
                            "chaotic_candidate": r.chaotic_candidate, "stable_side": r.stable_side,
                            "verdict": "chaotic candidate" if r.chaotic_candidate else "not a candidate"}
        report["chaotic_candidate"] = r.chaotic_candidate
    else:
        report["region"] = {"verdict": "undefined ratio"}
        report["chaotic_candidate"] = None
    if opt.get("lyapunov"):
        cfg = LyapunovConfig(t_total=opt["t_total"], t_renorm=opt["t_renorm"], t_transient=opt["t_transient"],
                             integrator=IntegratorConfig(rtol=opt["rtol"], atol=opt["atol"]))
        est = lyapunov_max(p, _start(opt), cfg)
        report["lyapunov"] = {"value": est.value, "stderr": est.stderr, "n_windows": est.n_windows,
                              "initial_state": list(_start(opt)), "t_total": cfg.t_total,
                              "t_renorm": cfg.t_renorm, "t_transient": cfg.t_transient}
    return report


def cmd_analyze(opt: dict) -> int:
    p = _params(opt)
    try:
        report = analysis_report(p, opt)
    except ValueError as exc:
        raise UsageError(str(exc))
    text = lvio.dumps(report)
    if opt.get("out"):
        prefix = _prefix(opt["out"], ".json")
        prefix.parent.mkdir(parents=True, exist_ok=True)
        path = prefix.with_name(prefix.name + ".json")
        path.write_text(text)
        manifest = lvio.build_manifest("analyze", _public(opt), [path], params=p.as_dict(),
                                       initial_state=list(_start(opt)))
        lvio.write_json(lvio.manifest_path(prefix), manifest)
    else:
        sys.stdout.write(text)
    return 0


def _a_values(opt: dict) -> list[float]:
    if opt.get("A_list"):
        vals = list(opt["A_list"])
    elif opt.get("A_from") is not None:
        if opt.get("A_steps") is None:
            raise UsageError("--A-from needs --A-steps (and --A-to unless --A-steps is 1)")
        n = int(opt["A_steps"])
        if n < 1:
            raise UsageError("--A-steps must be >= 1")
        if n == 1:
            vals = [opt["A_from"]]
        else:
            if opt.get("A_to") is None:
                raise UsageError("--A-from needs --A-to")
            vals = np.linspace(opt["A_from"], opt["A_to"], n).tolist()
    else:
        raise UsageError("give --A-list or --A-from/--A-to/--A-steps")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise UsageError("A values must be strictly increasing")
    return vals


def _jobs(opt: dict) -> int:
    if opt.get("jobs"):
        return int(opt["jobs"])
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"{JOBS_ENV} must be an integer, got {env!r}")
        if n >= 1:
            return n
    return os.cpu_count() or 1


def cmd_scan(opt: dict) -> int:
    for k in ("B", "C"):
        if opt.get(k) is None:
            raise UsageError(f"missing required parameter --{k}")
    a_values = _a_values(opt)
    opt["A_list"], opt["A_from"], opt["A_to"], opt["A_steps"] = a_values, None, None, None
    try:
        sim = SimConfig(s0=_start(opt), t_end=opt["t_end"], transient_fraction=opt["transient_fraction"],
                        backend=opt["backend"], h_fixed=opt["h"], integrator=_integrator_cfg(opt))
    except ValueError as exc:
        raise UsageError(str(exc))
    band = BandConfig(axial_lo=opt["axial_lo"], axial_hi=opt["axial_hi"], shell_radius=opt["shell_radius"],
                      inset=opt["inset"], shell_factor=opt["shell_factor"], n_bins=int(opt["n_bins"]))
    thresholds = Thresholds(eps_hole=opt["eps_hole"], eps_rel=opt["eps_rel"], c_min=opt["c_min"])
    keep = bool(opt["keep_trajectories"])
    result = surgery_scan(opt["B"], opt["C"], a_values, sim, band, thresholds,
                          jobs=_jobs(opt), keep_trajectories=keep)

    prefix = _prefix(opt["out"], ".csv")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    outputs = [lvio.write_scan_csv(prefix.with_name(prefix.name + ".csv"), result)]
    if keep:
        for i, e in enumerate(result.entries):
            if e.trajectory is not None:
                outputs.append(lvio.write_trajectory_csv(prefix.with_name(f"{prefix.name}.A{i}.csv"),
                                                         e.trajectory.times, e.trajectory.states))
    if not opt.get("no_figure"):
        from .plotting import plot_scan
        outputs.append(plot_scan(result, prefix.with_name(prefix.name + ".png")))
    entries = [{"A": e.A, "run_id": e.manifest_id, "verdict": e.verdict, "error": e.error, "note": e.note,
                "diameter": e.diameter,
                "eps_hole": None if e.shape is None else e.shape.eps_hole,
                "n_samples_in_band": None if e.metrics is None else e.metrics.n_samples_in_band,
                "band": None if e.metrics is None else vars(e.metrics.band)}
               for e in result.entries]
    manifest = lvio.build_manifest(
        "scan", _public(opt), outputs, params={"B": result.B, "C": result.C, "A_values": list(a_values)},
        initial_state=list(sim.s0), integrator=sim.as_dict(), transient_cut=sim.t_cut,
        band=band.as_dict(), thresholds=thresholds.as_dict(), entries=entries,
        transition_index=result.transition_index)
    lvio.write_json(lvio.manifest_path(prefix), manifest)
    for e in result.entries:
        md = "-" if e.metrics is None else f"{e.metrics.min_distance:.6g}"
        cov = "-" if e.metrics is None else f"{e.metrics.angular_coverage:.3f}"
        print(f"A={e.A:<10g} min_distance={md:<12} coverage={cov:<6} {e.verdict}")
    return 0


def _params_for_render(opt: dict) -> Params | None:
    if all(opt.get(k) is not None for k in ("A", "B", "C")):
        return _params(opt)
    man = lvio.manifest_path(_prefix(opt["input"], ".csv"))
    if man.exists():
        prm = lvio.load_manifest(man).get("params", {})
        if all(k in prm for k in ("A", "B", "C")):
            return Params(prm["A"], prm["B"], prm["C"])
    return None


def cmd_render(opt: dict) -> int:
    from .svg import render_svg
    path = Path(opt["input"])
    try:
        _, states = lvio.read_trajectory_csv(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if states.shape[0] == 0:
        print(f"error: {path} holds no samples", file=sys.stderr)
        return 1
    params = None
    if opt["mark_L"]:
        params = _params_for_render(opt)
        if params is None:
            raise UsageError("--mark-L needs --A --B --C or a manifest next to the input")
        if params.A <= 0:
            raise UsageError("--mark-L needs A > 0")
    svg = render_svg(states, opt["plane"], int(opt["width"]), int(opt["height"]), params, bool(opt["mark_L"]))
    out = Path(opt["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    opt = dict(opt, input=str(path), out=str(out))
    manifest = lvio.build_manifest("render", _public(opt), [out],
                                   params=None if params is None else params.as_dict(),
                                   source={"path": str(path), "sha256": lvio.sha256_file(path)})
    lvio.write_json(lvio.manifest_path(_prefix(out, ".svg")), manifest)
    return 0


COMMANDS = {"simulate": cmd_simulate, "analyze": cmd_analyze, "scan": cmd_scan, "render": cmd_render}


def cmd_rerun(manifest_file: Path, out_dir: Path) -> int:
    """Re-execute a manifest into ``out_dir`` and compare CSV hashes."""
    try:
        man = lvio.load_manifest(manifest_file)
    except (OSError, ValueError) as exc:
        print(f"error: cannot load manifest {manifest_file}: {exc}", file=sys.stderr)
        return 1
    command = man["command"]
    if command not in COMMANDS:
        print(f"error: manifest command {command!r} cannot be rerun", file=sys.stderr)
        return 1
    opt = dict(man["options"])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    opt["out"] = str(out_dir / Path(opt["out"]).name)
    if command == "scan":
        opt["no_figure"] = True
    rc = COMMANDS[command](opt)
    if rc != 0:
        return rc
    ok = True
    for entry in man["outputs"]:
        name = entry["path"]
        if not name.endswith(".csv"):
            continue
        new = out_dir / name
        same = new.exists() and lvio.sha256_file(new) == entry["sha256"]
        ok &= same
        print(f"{name}: {'identical' if same else 'DIFFERS'}")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "rerun":
        return cmd_rerun(ns.manifest, ns.out_dir)
    try:
        opt = resolve(ns)
        return COMMANDS[ns.command](opt)
    except UsageError as exc:
        parser.subparsers[ns.command].print_usage(sys.stderr)
        print(f"{parser.prog} {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, EmptyTrajectoryError) as exc:
        where = f" at t={exc.t:.17g}" if getattr(exc, "t", None) is not None else ""
        print(f"error: integration failed{where}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
