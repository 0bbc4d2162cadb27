"""Command-line entry point: ``leakage-lab SUBCOMMAND --config run.json --out DIR``.

Exit codes: 0 success, 1 runtime failure (for example no threshold crossing),
2 invalid configuration, 3 budget exceeded (partial artifacts are written
and flagged).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

import jsonschema

from . import analysis, faultpath, montecarlo
from .codes import build_code, layout_to_json
from .schedules import build_schedule, schedule_to_json

SCHEMA_VERSION = 1
SUBCOMMANDS = ("simulate", "certify", "threshold", "fit", "dump-layout", "dump-schedule")
EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3

_EXPERIMENT_PROPS = {
    "family": {"enum": ["SubspaceSurface", "SubsystemSurface", "BaconShor"]},
    "geometry": {"enum": ["Standard", "Rotated", "Periodic"]},
    "d": {"type": "integer", "minimum": 3},
    "lru": {"enum": ["None", "SwapLR", "SyndromeLR", "IntLR", "GateLR", "Cat2"]},
    "style": {"enum": ["SerialXZ", "ParallelRolling"]},
    "leak_model": {"enum": ["DP", "MS"]},
    "p_values": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1},
    "ratio": {"type": "number", "minimum": 0},
    "relax": {"enum": ["leak", "depol"]},
    "trials_cap": {"type": "integer", "minimum": 1},
    "failures_target": {"type": "integer", "minimum": 1},
    "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    "batch_size": {"type": "integer", "minimum": 1},
    "cycles": {"type": ["integer", "null"], "minimum": 1},
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "subcommand": {"enum": list(SUBCOMMANDS)},
        "experiment": {"type": "object", "additionalProperties": False, "properties": _EXPERIMENT_PROPS},
        "certify": {
            "type": "object", "additionalProperties": False,
            "properties": {"k_max": {"type": "integer", "minimum": 1, "maximum": 2},
                           "budget": {"type": "integer", "minimum": 1}},
        },
        "threshold": {
            "type": "object", "additionalProperties": False,
            "properties": {"distances": {"type": "array", "items": {"type": "integer", "minimum": 3},
                                         "minItems": 2}},
        },
        "fit": {
            "type": "object", "additionalProperties": False,
            "properties": {"input": {"type": "string"},
                           "model": {"enum": ["PowerLaw", "BaconShorTwoTerm"]},
                           "d_e": {"type": ["integer", "null"], "minimum": 1}},
        },
        "plots": {"type": "boolean"},
    },
}


class ConfigError(ValueError):
    """Configuration rejected; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunManifest:
    config_path: str | None
    out_dir: str
    subcommand: str
    workers: int
    seed: int | None


def validate_config(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(path, err.message) from None
    exp = cfg.get("experiment", {})
    try:
        montecarlo.ExperimentConfig.from_dict(exp)
    except ValueError as err:
        raise ConfigError("experiment", str(err)) from None
    return cfg


def load_config(path: str | None) -> dict:
    if path is None:
        return {"schema_version": SCHEMA_VERSION}
    try:
        with open(path) as f:
            cfg = json.load(f)
    except json.JSONDecodeError as err:
        raise ConfigError("<file>", f"not valid JSON ({err})") from None
    except OSError as err:
        raise ConfigError("<file>", str(err)) from None
    return cfg


def versioned_dir(path: str) -> str:
    """Create ``path`` (or ``path-1``, ``path-2``, ...) and return the one created."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    candidate, n = path, 0
    while True:
        try:
            os.mkdir(candidate)
            return candidate
        except FileExistsError:
            n += 1
            candidate = f"{path}-{n}"


def _write_json(path: str, data) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2)


def _experiment(cfg: dict, manifest: RunManifest, **overrides) -> montecarlo.ExperimentConfig:
    exp = dict(cfg.get("experiment", {}))
    if manifest.seed is not None:
        exp["master_seed"] = manifest.seed
    exp.update(overrides)
    return montecarlo.ExperimentConfig.from_dict(exp)


def _echo(cfg: dict, manifest: RunManifest, exp: montecarlo.ExperimentConfig | None) -> dict:
    """Fully resolved config for re-running this exact command."""
    out = json.loads(json.dumps(cfg))
    out["subcommand"] = manifest.subcommand
    if exp is not None:
        out["experiment"] = exp.to_dict()
    return out


def _summary_line(row) -> str:
    flag = " (upper bound only)" if row.upper_bound_only else ""
    return (f"p={row.p:.3e} trials={row.trials} failures={row.failures_any} "
            f"p_L={row.p_L:.3e} [{row.ci_low:.3e}, {row.ci_high:.3e}]{flag}")


def cmd_simulate(cfg, manifest, out) -> int:
    exp = _experiment(cfg, manifest)
    result = montecarlo.run_experiment(exp, workers=manifest.workers,
                                       progress=lambda r: print(_summary_line(r), flush=True))
    result.metadata["run_config"] = _echo(cfg, manifest, exp)
    montecarlo.write_result(result, out)
    if cfg.get("plots"):
        from .plotting import plot_curves
        plot_curves({f"d={exp.d}": result.rows}, os.path.join(out, "results.png"),
                    title=f"{exp.family} {exp.geometry} {exp.lru} {exp.leak_model}")
    return EXIT_OK


def cmd_certify(cfg, manifest, out) -> int:
    # the robustness analysis assumes every ancilla is reset each cycle
    lru = cfg.get("experiment", {}).get("lru", "SyndromeLR")
    exp = _experiment(cfg, manifest, lru=lru)
    opts = cfg.get("certify", {})
    layout = build_code(exp.family, exp.geometry, exp.d)
    schedule = build_schedule(layout, exp.lru, exp.style)
    report = faultpath.certify_effective_distance(layout, schedule, exp.leak_model,
                                                  k_max=opts.get("k_max", 1), cycles=exp.cycles,
                                                  budget=opts.get("budget", 20_000_000),
                                                  seed=exp.master_seed)
    data = report.to_json()
    data["config"] = _echo(cfg, manifest, exp)
    _write_json(os.path.join(out, "certify.json"), data)
    found = report.min_failing_faults
    print(f"min_failing_faults={found if found is not None else 'none'} (k_max={report.k_max}) "
          f"robust={report.robust}{' sampled' if report.sampled else ''}")
    return EXIT_BUDGET if report.sampled else EXIT_OK


def cmd_threshold(cfg, manifest, out) -> int:
    base = _experiment(cfg, manifest)
    distances = cfg.get("threshold", {}).get("distances", [5, 7, 9])
    curves, results = {}, {}
    for d in distances:
        exp = replace(base, d=d)
        print(f"d={d}", flush=True)
        res = montecarlo.run_experiment(exp, workers=manifest.workers,
                                        progress=lambda r: print("  " + _summary_line(r), flush=True))
        res.metadata["run_config"] = _echo(cfg, manifest, exp)
        montecarlo.write_result(res, out, stem=f"results_d{d}")
        results[d] = res
        curves[d] = [(r.p, r.p_L) for r in res.rows if r.failures_any > 0]
    report = {"config": _echo(cfg, manifest, base), "distances": distances}
    code = EXIT_OK
    try:
        est = analysis.estimate_threshold(curves)
        report.update(p_thr=est.p_thr, uncertainty=est.uncertainty,
                      crossings=[list(c) for c in est.crossings])
        print(f"p_thr={est.p_thr:.4e} +- {est.uncertainty:.1e}")
    except (analysis.NoCrossingError, ValueError) as err:
        report["error"] = str(err)
        print(f"no threshold: {err}", file=sys.stderr)
        est, code = None, EXIT_RUNTIME
    _write_json(os.path.join(out, "threshold.json"), report)
    if cfg.get("plots"):
        from .plotting import plot_curves
        plot_curves({f"d={d}": results[d].rows for d in distances}, os.path.join(out, "threshold.png"),
                    title=f"{base.family} {base.geometry} {base.leak_model}",
                    p_thr=est.p_thr if est else None)
    return code


def cmd_fit(cfg, manifest, out) -> int:
    opts = cfg.get("fit", {})
    if "input" not in opts:
        raise ConfigError("fit/input", "path to a results JSON is required")
    with open(opts["input"]) as f:
        data = json.load(f)
    rows = [montecarlo.SimRow(**r) for r in data["rows"]]
    pts = analysis.points_from_rows(rows)
    fit = analysis.fit_empirical_distance(pts, opts.get("model", "PowerLaw"), opts.get("d_e"))
    data["fit"] = {"model": fit.model.value, "d_emp": fit.d_emp, "amplitudes": list(fit.amplitudes),
                   "chi2": fit.chi2, "n_points": fit.n_points}
    _write_json(os.path.join(out, "fit.json"), data)
    print(f"d_emp={fit.d_emp:.3f} chi2={fit.chi2:.3g} ({fit.model.value}, {fit.n_points} points)")
    if cfg.get("plots"):
        from .plotting import plot_curves
        plot_curves({"data": rows}, os.path.join(out, "fit.png"), fits={"data": fit})
    return EXIT_OK


def cmd_dump_layout(cfg, manifest, out) -> int:
    exp = _experiment(cfg, manifest)
    layout = build_code(exp.family, exp.geometry, exp.d)
    data = layout_to_json(layout)
    _write_json(os.path.join(out, "layout.json"), data)
    print(f"{exp.family} {exp.geometry} d={exp.d}: n_data={layout.n_data} checks={layout.n_checks}")
    return EXIT_OK


def cmd_dump_schedule(cfg, manifest, out) -> int:
    exp = _experiment(cfg, manifest)
    layout = build_code(exp.family, exp.geometry, exp.d)
    schedule = build_schedule(layout, exp.lru, exp.style)
    _write_json(os.path.join(out, "schedule.json"), schedule_to_json(schedule))
    print(f"{exp.lru} {exp.style}: {schedule.n_steps} steps, {schedule.count('CNOT')} CNOTs")
    return EXIT_OK


HANDLERS = {"simulate": cmd_simulate, "certify": cmd_certify, "threshold": cmd_threshold, "fit": cmd_fit,
            "dump-layout": cmd_dump_layout, "dump-schedule": cmd_dump_schedule}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leakage-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=SUBCOMMANDS, help="subcommand to run")
    ap.add_argument("--subcommand", choices=SUBCOMMANDS, help="alternative to the positional subcommand")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", default="leakage_lab_out", help="output directory (suffixed if it exists)")
    ap.add_argument("--seed", type=int, help="override experiment.master_seed")
    ap.add_argument("--workers", type=int, help="worker processes (default: $LEAKAGE_LAB_WORKERS or 1)")
    ap.add_argument("--plots", action="store_true", help="also render PNG plots")
    ov = ap.add_argument_group("experiment overrides")
    ov.add_argument("--family")
    ov.add_argument("--geometry")
    ov.add_argument("--distance", type=int)
    ov.add_argument("--lru")
    ov.add_argument("--style")
    ov.add_argument("--leak-model")
    ov.add_argument("--p", type=float, nargs="+", help="physical error rates")
    ov.add_argument("--trials", type=int, help="trials cap per rate")
    ov.add_argument("--failures", type=int, help="failure target per rate")
    return ap


def _apply_overrides(cfg: dict, args) -> dict:
    exp = dict(cfg.get("experiment", {}))
    for name, key in (("family", "family"), ("geometry", "geometry"), ("distance", "d"), ("lru", "lru"),
                      ("style", "style"), ("leak_model", "leak_model"), ("trials", "trials_cap"),
                      ("failures", "failures_target")):
        val = getattr(args, name)
        if val is not None:
            exp[key] = val
    if args.p is not None:
        exp["p_values"] = list(args.p)
    if args.trials is not None and args.failures is None:
        exp["failures_target"] = min(exp.get("failures_target", 200), args.trials)
    if exp:
        cfg = dict(cfg, experiment=exp)
    if args.plots:
        cfg = dict(cfg, plots=True)
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
        cfg = _apply_overrides(cfg, args)
        validate_config(cfg)
        sub = args.command or args.subcommand or cfg.get("subcommand")
        if sub is None:
            raise ConfigError("subcommand", "no subcommand given")
        if args.command and args.subcommand and args.command != args.subcommand:
            raise ConfigError("subcommand", "positional and --subcommand disagree")
        workers = args.workers if args.workers is not None else montecarlo.default_workers()
        if workers < 1:
            raise ConfigError("workers", "must be at least 1")
        manifest = RunManifest(args.config, args.out, sub, workers, args.seed)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if sub == "fit" and "input" not in cfg.get("fit", {}):
            raise ConfigError("fit/input", "path to a results JSON is required")
        try:
            _experiment(cfg, manifest)
        except ValueError as err:
            raise ConfigError("experiment", str(err)) from None
    except ConfigError as err:
        print(f"configuration error at {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = versioned_dir(args.out)
    print(f"writing to {out}", flush=True)
    try:
        return HANDLERS[sub](cfg, manifest, out)
    except ConfigError as err:
        print(f"configuration error at {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
