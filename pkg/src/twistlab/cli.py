"""
Command-line front end.

    twistlab {verify,orbit,equidistribute,ergodicity,volume,flow}
             [--config PATH] [--seed U64] [--out DIR] [--svg]

Each command reads an optional JSON config (unknown or mistyped fields are
rejected), merges it over built-in defaults, and writes ``<command>.json``
plus, where relevant, ``<command>.csv`` and SVG scatter plots into
``--out``.  Every output echoes the effective config.  Outputs depend only
on the config and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .errors import ConfigError, TwistLabError
from .polynomial import VARS

SEED_MAX = 2**64 - 1

DEFAULTS: dict[str, dict[str, Any]] = {
    "verify": {
        "samples": 10_000,
        "fricke_samples": 100_000,
        "rotation_samples": 1_000,
        "flow_samples": 1_000,
        "map_tol": 1e-8,
        "boundary_tol": 1e-10,
        "fricke_tol": 1e-9,
        "rotation_tol": 1e-8,
        "flow_tol": 1e-9,
        "corrupt": None,
    },
    "orbit": {
        "surface": "N13",
        "program": ["T", "U", "W"],
        "random_program": False,
        "n": 1000,
        "start": None,
    },
    "equidistribute": {
        "surface": "N13",
        "twist": "T",
        "n": 10_000,
        "start": None,
    },
    "ergodicity": {
        "surface": "N13",
        "targets": [0.0, 0.0, 0.0],
        "width": 0.05,
        "twists": ["T", "U", "W"],
        "n": 1_000_000,
        "space_batches": 16,
        "space_per_batch": 8000,
        "time_batches": 100,
        "control": "T",
        "functions": None,
    },
    "volume": {
        "k": 4,
        "epsilon": 0.15,
        "samples": 10_000_000,
        "workers": 1,
        "tol": 1e-10,
    },
    "flow": {
        "decomposition": "N22/X=AB",
        "samples": 1000,
        "times": 64,
        "tol": 1e-9,
    },
}

# fields whose default is None but which accept these types
_OPTIONAL_TYPES = {
    "corrupt": (dict,),
    "start": (list, dict),
    "control": (str,),
    "functions": (list,),
}


# --------------------------------------------------------------------------
# config


def _type_ok(value, default) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, type(default))


def load_config(command: str, path: str | None, seed: int | None) -> dict:
    """Defaults, overlaid by the JSON file, overlaid by ``--seed``."""
    cfg = dict(DEFAULTS[command])
    cfg["seed"] = 0
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"{path}: cannot read config ({e.strerror})") from None
        try:
            user = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        for key, value in user.items():
            if key not in cfg:
                known = ", ".join(sorted(cfg))
                raise ConfigError(f"{path}: unknown field {key!r} for {command} (known: {known})")
            default = cfg[key] if key != "seed" else 0
            if value is None:
                if default is not None:
                    raise ConfigError(f"{path}: field {key!r} may not be null")
            elif default is None:
                if not isinstance(value, _OPTIONAL_TYPES.get(key, ())):
                    raise ConfigError(f"{path}: field {key!r} has the wrong type ({type(value).__name__})")
            elif not _type_ok(value, default):
                raise ConfigError(
                    f"{path}: field {key!r} expects {type(default).__name__}, "
                    f"got {type(value).__name__}"
                )
            cfg[key] = value
    if seed is not None:
        cfg["seed"] = seed
    if not 0 <= int(cfg["seed"]) <= SEED_MAX:
        raise ConfigError(f"seed {cfg['seed']} outside [0, 2^64 - 1]")
    return cfg


# --------------------------------------------------------------------------
# output


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def write_json(path: Path, command: str, cfg: dict, result: dict) -> Path:
    doc = {"command": command, "version": __version__, "config": cfg, "result": result}
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def write_csv(path: Path, command: str, cfg: dict, header, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# twistlab {command} config={json.dumps(_jsonable(cfg), sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def _rng(cfg):
    return np.random.default_rng(int(cfg["seed"]))


def _start_point(cfg, rng):
    from .twists import coords_from_rep
    from .words import random_representations

    st = cfg["start"]
    if st is None:
        return coords_from_rep(random_representations(rng))
    if isinstance(st, dict):
        missing = [v for v in VARS if v not in st]
        if missing:
            raise ConfigError(f"start is missing coordinates {missing}")
        return np.array([float(st[v]) for v in VARS])
    if len(st) != 7:
        raise ConfigError(f"start needs 7 coordinates {VARS}, got {len(st)}")
    return np.array(st, dtype=float)


# --------------------------------------------------------------------------
# commands


def _corrupted(fn: Callable, coordinate: str, delta: float) -> Callable:
    i = VARS.index(coordinate)

    def wrapped(*cols):
        out = list(fn(*cols))
        out[i] = out[i] + delta
        return tuple(out)

    return wrapped


def cmd_verify(cfg, out: Path, svg: bool) -> int:
    from .flow import BUILTIN_DECOMPOSITIONS, flow, twist_equals_flow, SeparatingDecomposition
    from .twists import (TWIST_NAMES, boundary_traces, closed_form, coords_from_rep,
                         degenerate_mask, fricke_residual, printed_deviation, rotation_check)
    from .words import builtin_twists, random_representations

    rng = _rng(cfg)
    corrupt = cfg["corrupt"]
    if corrupt is not None:
        for key in ("map", "coordinate", "delta"):
            if key not in corrupt:
                raise ConfigError(f"corrupt needs field {key!r}")
        if corrupt["coordinate"] not in VARS:
            raise ConfigError(f"corrupt.coordinate must be one of {VARS}")
    checks: list[dict] = []
    coverage: list[str] = []

    def record(name, kind, value, tol, passed=None):
        ok = bool(value < tol) if passed is None else bool(passed)
        checks.append({"map": name, "check": kind, "value": float(value), "tol": tol, "passed": ok})

    pts_all = coords_from_rep(random_representations(rng, cfg["fricke_samples"]))
    record("coordinates", "fricke_residual", np.max(np.abs(fricke_residual(pts_all))), cfg["fricke_tol"])

    printed = {}
    for surface, names in TWIST_NAMES.items():
        endos = builtin_twists(surface)
        for tw in names:
            name = f"{surface}.{tw}"
            coverage.append(name)
            fn = closed_form(surface, tw)
            if corrupt is not None and corrupt["map"] == name:
                fn = _corrupted(fn, corrupt["coordinate"], float(corrupt["delta"]))
            reps = random_representations(rng, cfg["samples"])
            pts = coords_from_rep(reps)
            img = np.stack(np.broadcast_arrays(*fn(*pts.T)), axis=-1)
            oracle = coords_from_rep(endos[tw].pullback(reps))
            record(name, "oracle", np.max(np.abs(img - oracle)), cfg["map_tol"])
            b0 = np.array(boundary_traces(surface, pts).as_tuple())
            b1 = np.array(boundary_traces(surface, img).as_tuple())
            record(name, "boundary", np.max(np.abs(b1 - b0)), cfg["boundary_tol"])
            record(name, "fricke_after", np.max(np.abs(fricke_residual(img))), cfg["fricke_tol"])
            # printed text is reported, not enforced: four components are known misprints
            printed[name] = printed_deviation(surface, tw, pts[:1000])
            sample = coords_from_rep(random_representations(rng, 4 * cfg["rotation_samples"]))
            sample = sample[~degenerate_mask(surface, tw, sample)][: cfg["rotation_samples"]]
            rep = rotation_check(surface, tw, sample, tol=cfg["rotation_tol"])
            record(name, "rotation", rep.max_prediction_error, cfg["rotation_tol"], rep.passed)

    for dname, make in BUILTIN_DECOMPOSITIONS.items():
        dec = make()
        coverage.append(f"flow:{dname}")
        reps = random_representations(rng, cfg["flow_samples"])
        r = twist_equals_flow(dec, reps, tol=cfg["flow_tol"])
        record(f"flow:{dname}", "twist_equals_flow", r.max_deviation, cfg["flow_tol"])
        period = math.pi if isinstance(dec, SeparatingDecomposition) else 2 * math.pi
        dev = np.max(np.abs(coords_from_rep(flow(dec, reps, period)) - coords_from_rep(reps)))
        record(f"flow:{dname}", "periodicity", dev, cfg["flow_tol"])

    failed = [c for c in checks if not c["passed"]]
    result = {
        "passed": not failed,
        "coverage": coverage,
        "checks": checks,
        "failed_maps": sorted({c["map"] for c in failed}),
        "printed_text_deviation": printed,
    }
    write_json(out / "verify.json", "verify", cfg, result)
    with open(out / "verify.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# twistlab verify config={json.dumps(_jsonable(cfg), sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["map", "check", "value", "tol", "passed"])
        for c in checks:
            w.writerow([c["map"], c["check"], fmt(c["value"]), fmt(c["tol"]), fmt(c["passed"])])
    print(f"verify: {len(checks) - len(failed)}/{len(checks)} checks passed; coverage: {', '.join(coverage)}")
    for c in failed:
        print(f"FAIL {c['map']} {c['check']}: {c['value']:.3e} (tol {c['tol']:g})", file=sys.stderr)
    return 1 if failed else 0


def cmd_orbit(cfg, out: Path, svg: bool) -> int:
    from .errors import DegenerateEllipse
    from .twists import TWIST_NAMES, ellipse_form, orbit, random_program

    surface = cfg["surface"]
    if surface not in TWIST_NAMES:
        raise ConfigError(f"surface must be one of {sorted(TWIST_NAMES)}")
    program = list(cfg["program"])
    for t in program:
        if t not in TWIST_NAMES[surface]:
            raise ConfigError(f"program: {surface} has no twist {t!r}")
    if cfg["n"] < 0:
        raise ConfigError("n must be >= 0")
    rng = _rng(cfg)
    start = _start_point(cfg, rng)
    if cfg["random_program"] and cfg["n"] > 0:
        program = list(random_program(rng, program, cfg["n"]))
    orb = orbit(surface, program, start, cfg["n"])
    rows = ([i, *p, r] for i, (p, r) in enumerate(zip(orb.points, orb.fricke)))
    write_csv(out / "orbit.csv", "orbit", cfg, ["step", *VARS, "fricke_residual"], rows)
    result = {
        "surface": surface,
        "steps": cfg["n"],
        "twists": sorted(set(program)),
        "max_fricke_residual": float(np.max(np.abs(orb.fricke))),
    }
    form = None
    if len(set(program)) == 1:
        try:
            form = ellipse_form(surface, program[0], start)
            res = np.asarray(form.residual(orb.points), dtype=float)
            result["max_quadric_residual"] = float(np.max(np.abs(res)))
            result["nu"] = float(form.nu)
        except DegenerateEllipse as e:
            result["ellipse"] = f"degenerate: {e}"
    write_json(out / "orbit.json", "orbit", cfg, result)
    if svg:
        from .plotting import scatter_svg

        if form is not None:
            p = np.asarray(form.plane_coords(orb.points), dtype=float)
            scatter_svg(out / "orbit.svg", p[0], p[1], xlabel=form.plane[0], ylabel=form.plane[1],
                        title=f"{surface} tau_{program[0]} orbit", equal=True)
        else:
            pts = orb.points
            scatter_svg(out / "orbit.svg", pts[:, 0], pts[:, 6], xlabel="a", ylabel="d",
                        title=f"{surface} orbit", c=np.arange(len(pts)))
    print(f"orbit: {len(orb)} points, max Fricke residual {result['max_fricke_residual']:.2e}")
    return 0


def cmd_equidistribute(cfg, out: Path, svg: bool) -> int:
    from .experiments import equidistribution, screened_start
    from .twists import TWIST_NAMES

    surface, twist = cfg["surface"], cfg["twist"]
    if surface not in TWIST_NAMES or twist not in TWIST_NAMES[surface]:
        raise ConfigError(f"no twist {twist!r} on surface {surface!r}")
    if cfg["n"] < 1:
        raise ConfigError("n must be >= 1")
    rng = _rng(cfg)
    start = screened_start(surface, twist, rng) if cfg["start"] is None else _start_point(cfg, rng)
    rep = equidistribution(surface, twist, start, cfg["n"])
    result = rep.as_dict()
    result["start"] = [float(v) for v in start]
    write_json(out / "equidistribute.json", "equidistribute", cfg, result)
    rows = ([i, ph] for i, ph in enumerate(rep.phases))
    write_csv(out / "equidistribute.csv", "equidistribute", cfg, ["step", "phase"], rows)
    if svg:
        from .plotting import scatter_svg

        scatter_svg(out / "equidistribute.svg", np.arange(len(rep.phases)), rep.phases,
                    xlabel="step", ylabel="phase (turns)", title=f"{surface} tau_{twist}")
    status = "resonant" if rep.resonant else f"D_N = {rep.discrepancy:.3e}"
    print(f"equidistribute: {surface}.{twist} nu = {rep.nu:.6f}, {status}")
    return 0


def cmd_ergodicity(cfg, out: Path, svg: bool) -> int:
    from .experiments import DICTIONARY, ergodicity

    funcs = tuple(cfg["functions"]) if cfg["functions"] is not None else DICTIONARY
    main, ctrl = ergodicity(
        cfg["surface"], cfg["targets"], float(cfg["width"]), cfg["twists"], cfg["n"],
        int(cfg["seed"]), control=cfg["control"], space_batches=cfg["space_batches"],
        space_per_batch=cfg["space_per_batch"], time_batches=cfg["time_batches"],
        functions=funcs,
    )
    result = {"multi_twist": main.as_dict(), "all_within_3": main.max_abs_z < 3}
    if ctrl is not None:
        result["control"] = ctrl.as_dict()
        result["control_flagged"] = bool(ctrl.flagged())
    write_json(out / "ergodicity.json", "ergodicity", cfg, result)
    header = ["function", "time_mean", "time_se", "space_mean", "space_se", "z"]
    rows = []
    for tag, r in (("multi", main), ("control", ctrl)):
        if r is None:
            continue
        for i, f in enumerate(r.functions):
            rows.append([f"{tag}:{f}", r.time_mean[i], r.time_se[i], r.space_mean[i], r.space_se[i], r.z[i]])
    with open(out / "ergodicity.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# twistlab ergodicity config={json.dumps(_jsonable(cfg), sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([r[0]] + [fmt(v) for v in r[1:]])
    if svg:
        from .plotting import scatter_svg

        z = np.clip(main.z, -10, 10)
        scatter_svg(out / "ergodicity.svg", np.arange(len(z)), z, xlabel="dictionary index",
                    ylabel="z (time - space)", title="multi-twist z-scores", size=20)
    line = f"ergodicity: max |z| = {main.max_abs_z:.2f} over {len(funcs)} functions"
    if ctrl is not None:
        line += f"; control flags {ctrl.flagged()}"
    print(line)
    return 0


def cmd_volume(cfg, out: Path, svg: bool) -> int:
    from .measures import mc_identity_density, volume_series

    series = volume_series(cfg["k"], float(cfg["tol"]))
    est = mc_identity_density(cfg["k"], float(cfg["epsilon"]), cfg["samples"],
                              seed=int(cfg["seed"]), workers=cfg["workers"])
    result = {
        "record": est.as_record(),
        "series": series.as_dict(),
        "smeared_value": est.smeared_value,
        "bias_budget": est.bias,
        "combined_sigma": est.combined_sigma,
        "agrees_3sigma": est.agrees(),
        "agrees_debiased_3sigma": est.agrees_debiased(),
        "haar_normalization": "total mass 1",
    }
    write_json(out / "volume.json", "volume", cfg, result)
    if svg:
        from .plotting import scatter_svg

        scatter_svg(out / "volume.svg", [0, 1, 2], [series.value, est.smeared_value, est.estimate],
                    xlabel="series | smeared | Monte Carlo", ylabel="f_k(1)",
                    title=f"k = {cfg['k']}, eps = {cfg['epsilon']}", size=30)
    print(f"volume: series {series.value:.10f}, MC {est.estimate:.6f} +- {est.std_error:.6f}, "
          f"bias budget {est.bias:+.6f}, agrees: {est.agrees()}")
    return 0


def cmd_flow(cfg, out: Path, svg: bool) -> int:
    from .flow import BUILTIN_DECOMPOSITIONS, SeparatingDecomposition, flow, gamma_image, twist_equals_flow
    from .su2 import angle
    from .twists import coords_from_rep
    from .words import random_representations

    name = cfg["decomposition"]
    if name not in BUILTIN_DECOMPOSITIONS:
        raise ConfigError(f"decomposition must be one of {sorted(BUILTIN_DECOMPOSITIONS)}")
    dec = BUILTIN_DECOMPOSITIONS[name]()
    rng = _rng(cfg)
    reps = random_representations(rng, cfg["samples"])
    tol = float(cfg["tol"])
    rep = twist_equals_flow(dec, reps, tol=tol)
    separating = isinstance(dec, SeparatingDecomposition)
    period = math.pi if separating else 2 * math.pi
    base = coords_from_rep(reps)
    per_dev = float(np.max(np.abs(coords_from_rep(flow(dec, reps, period)) - base)))
    s, t = 0.37, 1.21
    comp = coords_from_rep(flow(dec, flow(dec, reps, t), s))
    group_dev = float(np.max(np.abs(comp - coords_from_rep(flow(dec, reps, s + t)))))
    f0 = angle(gamma_image(dec, reps))
    f_dev = float(np.max(np.abs(angle(gamma_image(dec, flow(dec, reps, t))) - f0)))
    result = {
        "decomposition": name,
        "kind": "separating" if separating else "hnn",
        "twist_equals_flow": rep.as_dict(),
        "period": period,
        "periodicity_deviation": per_dev,
        "flow_property_deviation": group_dev,
        "gamma_angle_drift": f_dev,
        "passed": bool(rep.passed and per_dev < tol and group_dev < tol and f_dev < 1e-10),
    }
    write_json(out / "flow.json", "flow", cfg, result)
    ts = np.linspace(0.0, period, cfg["times"] + 1)
    traj = np.stack([coords_from_rep(flow(dec, reps[0], tt)) for tt in ts])
    write_csv(out / "flow.csv", "flow", cfg, ["t", *VARS], ([tt, *p] for tt, p in zip(ts, traj)))
    if svg:
        from .plotting import scatter_svg

        scatter_svg(out / "flow.svg", traj[:, 0], traj[:, 6], xlabel="a", ylabel="d",
                    title=f"flow {name} over one period", c=ts, size=12)
    print(f"flow: {name} twist vs flow {rep.max_deviation:.2e}, period {per_dev:.2e}")
    return 0 if result["passed"] else 1


COMMANDS = {
    "verify": cmd_verify,
    "orbit": cmd_orbit,
    "equidistribute": cmd_equidistribute,
    "ergodicity": cmd_ergodicity,
    "volume": cmd_volume,
    "flow": cmd_flow,
}


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistlab", description="Twist dynamics on SU(2) character varieties.")
    p.add_argument("--version", action="version", version=f"twistlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="JSON config overriding the defaults")
        sp.add_argument("--seed", type=_seed, metavar="U64", help="random seed (overrides config)")
        sp.add_argument("--out", metavar="DIR", default=".", help="output directory")
        sp.add_argument("--svg", action="store_true", help="also write SVG scatter plots")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.svg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except TwistLabError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
