"""Command-line front end.

One entry point, ``chirp2d``, with subcommands driven by JSON config files:

  synth        write a (optionally contaminated) chirp field to a grid file
  estimate     fit a grid file, print or write the result JSON
  mc           Monte Carlo error study, summary CSV out
  bench        evaluation-count benchmark of efficient vs direct fits
  texture      synthesize/contaminate/re-estimate and render PGM images
  asymptotics  print the theoretical covariance, bounds, and predicted sds

Exit codes: 0 success, 2 config or I/O problem, 3 estimation failure,
4 refused evaluation budget.  Unknown config keys are rejected so typos do
not silently fall back to defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .asymptotics import build_report
from .estimator import EstimationError, estimate
from .experiments import (
    MCConfig,
    complexity_benchmark,
    run_monte_carlo,
    texture_run,
    write_bench_csv,
    write_mc_csv,
)
from .fit1d import DegenerateDesignError, SearchConfig1D
from .lse2d import BudgetExceededError, SearchConfig2D, lse2d
from .model import ChirpParams, read_grid, synthesize, write_grid
from .noise import NoiseSpec, contaminate, generate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATION = 3
EXIT_BUDGET = 4


class ConfigError(ValueError):
    pass


def _load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def _check_keys(doc: dict, required: set, optional: set, where: str) -> None:
    unknown = set(doc) - required - optional
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"missing {where} keys: {sorted(missing)}")


def _params_from(doc, where: str) -> ChirpParams:
    _check_keys(doc, {"A", "B", "alpha", "beta", "gamma", "delta", "mu"}, set(), where)
    try:
        return ChirpParams.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {where}: {exc}") from exc


def _noise_from(doc, where: str) -> NoiseSpec:
    try:
        return NoiseSpec.from_dict(doc)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad {where}: {exc}") from exc


def _search1d_from(doc) -> SearchConfig1D:
    _check_keys(
        doc,
        {"freq_grid_count", "rate_grid_count"},
        {"refine_tolerance", "refine_max_iters", "refine_starts"},
        "search",
    )
    try:
        return SearchConfig1D(**{k: v for k, v in doc.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad search config: {exc}") from exc


def _search2d_from(doc) -> SearchConfig2D:
    _check_keys(
        doc,
        {"alpha_count", "beta_count", "gamma_count", "delta_count", "mu_count"},
        {"refine_tolerance", "refine_max_iters", "eval_budget"},
        "search",
    )
    try:
        return SearchConfig2D(**{k: v for k, v in doc.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad search config: {exc}") from exc


def _resolve_threads(arg) -> int:
    if arg is not None:
        n = int(arg)
    else:
        env = os.environ.get("CHIRP2D_THREADS")
        n = int(env) if env else (os.cpu_count() or 1)
    if n < 1:
        raise ConfigError("threads must be >= 1")
    return n


def _emit_json(doc: dict, output) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="ascii") as f:
            f.write(text)


def cmd_synth(args) -> int:
    doc = _load_config(args.config)
    _check_keys(doc, {"params", "M", "N", "output"}, {"format", "noise"}, "synth config")
    params = _params_from(doc["params"], "params")
    M, N = int(doc["M"]), int(doc["N"])
    grid = synthesize(params, M, N)
    if "noise" in doc:
        grid = contaminate(grid, generate(_noise_from(doc["noise"], "noise"), M, N))
    write_grid(grid, doc["output"], doc.get("format"))
    print(f"wrote {M}x{N} grid to {doc['output']}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    doc = _load_config(args.config)
    _check_keys(doc, {"input"}, {"estimator", "search", "output"}, "estimate config")
    method = doc.get("estimator", "efficient")
    if method not in ("efficient", "lse2d"):
        raise ConfigError(f"unknown estimator {method!r}")
    try:
        grid = read_grid(doc["input"])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read grid {doc['input']}: {exc}") from exc
    if method == "efficient":
        cfg = _search1d_from(doc["search"]) if "search" in doc else None
        result = estimate(grid, cfg)
    else:
        cfg = _search2d_from(doc["search"]) if "search" in doc else None
        result = lse2d(grid, cfg)
    _emit_json(result.to_dict(), doc.get("output"))
    return EXIT_OK


def cmd_mc(args) -> int:
    doc = _load_config(args.config)
    _check_keys(
        doc,
        {"truth", "sizes", "replications", "noise", "output"},
        {"estimators", "master_seed", "lse2d_budget"},
        "mc config",
    )
    sizes = []
    for s in doc["sizes"]:
        if isinstance(s, (int, float)):
            sizes.append((int(s), int(s)))
        else:
            sizes.append((int(s[0]), int(s[1])))
    try:
        config = MCConfig(
            truth=_params_from(doc["truth"], "truth"),
            sizes=tuple(sizes),
            replications=int(doc["replications"]),
            noise=_noise_from(doc["noise"], "noise"),
            master_seed=int(doc.get("master_seed", 0)),
            estimators=tuple(doc.get("estimators", ["efficient"])),
            lse2d_budget=int(doc.get("lse2d_budget", 10**8)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = run_monte_carlo(config, threads=_resolve_threads(args.threads), progress=args.verbose)
    write_mc_csv(report, doc["output"])
    print(f"wrote {len(report.cells)} summary rows to {doc['output']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    doc = _load_config(args.config)
    _check_keys(doc, {"sizes", "output"}, {"run_lse2d", "eval_budget"}, "bench config")
    try:
        report = complexity_benchmark(
            doc["sizes"],
            run_lse2d=bool(doc.get("run_lse2d", True)),
            eval_budget=int(doc.get("eval_budget", 10**8)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_bench_csv(report, doc["output"])
    fmt = lambda s: "n/a" if s is None else f"{s:.3f}"
    print(
        f"efficient slope {fmt(report.efficient_slope)} "
        f"(scan only {fmt(report.efficient_scan_slope)}), "
        f"direct lattice slope {fmt(report.lse2d_slope)}; table in {doc['output']}"
    )
    return EXIT_OK


def cmd_texture(args) -> int:
    doc = _load_config(args.config)
    _check_keys(doc, {"truth", "M", "N", "noise", "out_dir"}, {"search"}, "texture config")
    if min(int(doc["M"]), int(doc["N"])) < 20:
        raise ConfigError("texture runs need M, N >= 20")
    cfg = _search1d_from(doc["search"]) if "search" in doc else None
    report = texture_run(
        _params_from(doc["truth"], "truth"),
        int(doc["M"]),
        int(doc["N"]),
        _noise_from(doc["noise"], "noise"),
        doc["out_dir"],
        cfg,
    )
    print(
        f"reconstruction mse {report['reconstruction_mse']:.3e}; "
        f"images in {doc['out_dir']}"
    )
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    doc = _load_config(args.config)
    _check_keys(doc, {"params", "M", "N", "noise"}, {"truncation", "output"}, "asymptotics config")
    report = build_report(
        _params_from(doc["params"], "params"),
        int(doc["M"]),
        int(doc["N"]),
        _noise_from(doc["noise"], "noise"),
        truncation=int(doc.get("truncation", 100)),
    )
    _emit_json(report.to_dict(), doc.get("output"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chirp2d", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    specs = [
        ("synth", cmd_synth, "synthesize a chirp field"),
        ("estimate", cmd_estimate, "fit a grid file"),
        ("mc", cmd_mc, "Monte Carlo error study"),
        ("bench", cmd_bench, "complexity benchmark"),
        ("texture", cmd_texture, "texture estimation demo"),
        ("asymptotics", cmd_asymptotics, "theoretical covariance and bounds"),
    ]
    for name, fn, help_ in specs:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="path to JSON config")
        sp.add_argument("--verbose", action="store_true", help="progress output")
        if name == "mc":
            sp.add_argument(
                "--threads",
                type=int,
                default=None,
                help="worker processes (default: CHIRP2D_THREADS or 1)",
            )
        sp.set_defaults(fn=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (EstimationError, DegenerateDesignError) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
