"""Reproducible numerical experiments: Monte Carlo error studies, the
efficient-vs-direct complexity benchmark, and the grayscale texture demo.

All randomness flows through ``NoiseSpec`` seeds derived from a master seed
and the global replication index, so every experiment is bit-reproducible
and embarrassingly parallel: replication i uses stream
derive_seed(master_seed, size_index * replications + i) regardless of how
work is distributed over processes.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .asymptotics import PARAM_ORDER, rate_vector, sigma_matrix
from .estimator import EstimationError, EstimationResult, estimate
from .fit1d import SearchConfig1D
from .lse2d import BudgetExceededError, SearchConfig2D, lattice_count, lse2d
from .model import ChirpParams, SignalGrid, canonicalize, synthesize, wrap_centered
from .noise import NoiseSpec, contaminate, derive_seed, effective_c, generate

# reference truth used across the experiments (B gives the quadrature
# component a nonzero share: A^2 + B^2 = 1.25)
PAR_CHOICE = ChirpParams(
    A=1.0, B=0.5, alpha=0.4, beta=0.1429, gamma=0.25, delta=0.1250, mu=0.1667
)

ESTIMATORS = ("efficient", "lse2d")

# indices of the angular parameters within PARAM_ORDER whose errors are
# compared modulo 2*pi
_WRAPPED = np.array([False, False, True, False, True, False, True])


def error_vector(estimated: ChirpParams, truth: ChirpParams) -> np.ndarray:
    """Estimation error in PARAM_ORDER; frequency-like entries wrapped into
    [-pi, pi) so that a 2*pi-equivalent estimate counts as exact."""
    diff = estimated.as_array() - canonicalize(truth).as_array()
    diff[_WRAPPED] = wrap_centered(diff[_WRAPPED])
    return diff


@dataclass(frozen=True)
class MCConfig:
    """One Monte Carlo study: truth, grid sizes, noise recipe, estimators.

    The seed inside ``noise`` is ignored; each replication gets its own
    derived stream.  lse2d runs only when its default lattice fits the
    budget, which restricts it to small grids.
    """

    truth: ChirpParams
    sizes: tuple[tuple[int, int], ...]
    replications: int
    noise: NoiseSpec
    master_seed: int = 0
    estimators: tuple[str, ...] = ("efficient",)
    lse2d_budget: int = 10**8

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple((int(M), int(N)) for M, N in self.sizes))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.sizes:
            raise ValueError("need at least one grid size")
        for M, N in self.sizes:
            if M < 4 or N < 4:
                raise ValueError("grid sizes must have M, N >= 4")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad or not self.estimators:
            raise ValueError(f"unknown estimators {sorted(bad)}; pick from {ESTIMATORS}")


@dataclass
class MCCell:
    """Per (size, estimator, parameter) summary row."""

    M: int
    N: int
    estimator: str
    parameter: str
    n_used: int
    failures: int
    mse: float
    neg_log_mse: float
    bias: float
    scaled_variance: float
    predicted_scaled_variance: float


@dataclass
class MCReport:
    config: MCConfig
    cells: list[MCCell]
    # (M, N, estimator) -> raw / scaled error arrays of shape (n_used, 7)
    errors: dict
    scaled_errors: dict
    failures: dict

    def cell(self, M: int, N: int, estimator: str, parameter: str) -> MCCell:
        for c in self.cells:
            if (c.M, c.N, c.estimator, c.parameter) == (M, N, estimator, parameter):
                return c
        raise KeyError((M, N, estimator, parameter))


def _run_one(truth, M, N, spec, estimators, lse2d_budget):
    clean = synthesize(truth, M, N)
    observed = contaminate(clean, generate(spec, M, N))
    out = {}
    for name in estimators:
        try:
            if name == "efficient":
                res = estimate(observed)
            else:
                cfg = SearchConfig2D.for_grid(M, N, eval_budget=lse2d_budget)
                res = lse2d(observed, cfg)
            out[name] = error_vector(res.params, truth)
        except (EstimationError, ValueError) as exc:
            out[name] = str(exc)
    return out


def _mc_task(args):
    (gidx, truth, M, N, spec, estimators, budget) = args
    return gidx, _run_one(truth, M, N, spec, estimators, budget)


def run_monte_carlo(config: MCConfig, threads: int = 1, progress: bool = False) -> MCReport:
    """Run the study; raises if any (size, estimator) loses more than 5% of
    its replications to estimation failures."""
    if "lse2d" in config.estimators:
        for M, N in config.sizes:
            total = lattice_count(SearchConfig2D.for_grid(M, N))
            if total > config.lse2d_budget:
                raise BudgetExceededError(
                    f"lse2d lattice at {M}x{N} has {total} points, over the "
                    f"budget {config.lse2d_budget}"
                )

    R = config.replications
    tasks = []
    for si, (M, N) in enumerate(config.sizes):
        for r in range(R):
            gidx = si * R + r
            spec = replace(config.noise, seed=derive_seed(config.master_seed, gidx))
            tasks.append((gidx, config.truth, M, N, spec, config.estimators, config.lse2d_budget))

    results = {}
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for gidx, out in pool.map(_mc_task, tasks, chunksize=4):
                results[gidx] = out
                if progress and len(results) % 25 == 0:
                    print(f"  {len(results)}/{len(tasks)} replications done", flush=True)
    else:
        for task in tasks:
            gidx, out = _mc_task(task)
            results[gidx] = out
            if progress and len(results) % 25 == 0:
                print(f"  {len(results)}/{len(tasks)} replications done", flush=True)

    c = effective_c(config.noise)
    sigma2 = config.noise.sigma**2
    S = sigma_matrix(config.truth.A, config.truth.B, sigma2, c)
    predicted = np.diag(S)

    cells: list[MCCell] = []
    errors = {}
    scaled_errors = {}
    failures = {}
    for si, (M, N) in enumerate(config.sizes):
        scal = rate_vector(M, N)
        for name in config.estimators:
            errs = []
            fails = 0
            for r in range(R):
                out = results[si * R + r][name]
                if isinstance(out, str):
                    fails += 1
                else:
                    errs.append(out)
            if fails > 0.05 * R:
                raise EstimationError(
                    f"{fails}/{R} failures for {name} at {M}x{N}; study aborted"
                )
            err = np.array(errs)
            sc = err * scal[None, :]
            errors[(M, N, name)] = err
            scaled_errors[(M, N, name)] = sc
            failures[(M, N, name)] = fails
            n_used = err.shape[0]
            for j, pname in enumerate(PARAM_ORDER):
                mse = float(np.mean(err[:, j] ** 2))
                cells.append(
                    MCCell(
                        M=M,
                        N=N,
                        estimator=name,
                        parameter=pname,
                        n_used=n_used,
                        failures=fails,
                        mse=mse,
                        neg_log_mse=float(-np.log(mse)) if mse > 0 else np.inf,
                        bias=float(np.mean(err[:, j])),
                        scaled_variance=float(np.var(sc[:, j], ddof=1)) if n_used > 1 else 0.0,
                        predicted_scaled_variance=float(predicted[j]),
                    )
                )
    return MCReport(
        config=config, cells=cells, errors=errors, scaled_errors=scaled_errors,
        failures=failures,
    )


def write_mc_csv(report: MCReport, path) -> None:
    """Deterministic CSV of the summary cells."""
    cols = (
        "M,N,estimator,parameter,n_used,failures,mse,neg_log_mse,bias,"
        "scaled_variance,predicted_scaled_variance"
    )
    with open(path, "w", encoding="ascii") as f:
        f.write(cols + "\n")
        for c in report.cells:
            f.write(
                f"{c.M},{c.N},{c.estimator},{c.parameter},{c.n_used},{c.failures},"
                f"{c.mse:.17g},{c.neg_log_mse:.17g},{c.bias:.17g},"
                f"{c.scaled_variance:.17g},{c.predicted_scaled_variance:.17g}\n"
            )


# ---------------------------------------------------------------------------
# complexity benchmark
# ---------------------------------------------------------------------------


@dataclass
class BenchRow:
    M: int
    N: int
    # efficient columns are None for M < 4, where the sweep cannot run
    efficient_evals: int | None
    efficient_grid_evals: int | None
    efficient_seconds: float | None
    lse2d_lattice: int
    lse2d_executed: bool
    lse2d_seconds: float | None


@dataclass
class BenchReport:
    rows: list[BenchRow]
    efficient_slope: float | None  # d log(total evals) / d log(M)
    # scan only; the quartic law describes this count, while refinement
    # adds an O(M) term that dilutes the total at small sizes
    efficient_scan_slope: float | None
    lse2d_slope: float | None  # d log(lattice) / d log(M)

    def ratio(self, M: int) -> float:
        """lse2d lattice points per efficient objective evaluation at M."""
        for r in self.rows:
            if r.M == M and r.efficient_evals:
                return r.lse2d_lattice / r.efficient_evals
        raise KeyError(M)


def complexity_benchmark(
    sizes, truth: ChirpParams = PAR_CHOICE, run_lse2d: bool = True,
    eval_budget: int = 10**8,
) -> BenchReport:
    """Measure evaluation counts on noiseless square grids M = N.

    The efficient column reports actual objective evaluations (lattice scan
    plus refinement) of one full estimate, for sizes M >= 4 where the sweep
    is defined; the direct column reports the analytic 5-d lattice size,
    executed for wall-clock timing only where it fits the budget.  Counts
    are data-independent, so a noiseless field is as good as any.
    """
    sizes = [int(M) for M in sizes]
    if not sizes or any(M < 2 for M in sizes):
        raise ValueError("benchmark sizes must be >= 2")
    rows: list[BenchRow] = []
    for M in sizes:
        grid = synthesize(truth, M, M)
        eff_evals = eff_grid = eff_sec = None
        if M >= 4:
            t0 = time.perf_counter()
            res = estimate(grid)
            eff_sec = time.perf_counter() - t0
            eff_evals = res.total_evals
            eff_grid = res.sweep.grid_evals
        cfg = SearchConfig2D.for_grid(M, M, eval_budget=eval_budget)
        lat = lattice_count(cfg)
        lse_sec = None
        executed = False
        if run_lse2d and lat <= eval_budget:
            t0 = time.perf_counter()
            lse2d(grid, cfg)
            lse_sec = time.perf_counter() - t0
            executed = True
        rows.append(
            BenchRow(
                M=M,
                N=M,
                efficient_evals=eff_evals,
                efficient_grid_evals=eff_grid,
                efficient_seconds=eff_sec,
                lse2d_lattice=lat,
                lse2d_executed=executed,
                lse2d_seconds=lse_sec,
            )
        )
    with_eff = [r for r in rows if r.efficient_evals is not None]
    eff_slope = scan_slope = None
    if len(with_eff) >= 2:
        logm = np.log([r.M for r in with_eff])
        eff_slope = float(
            np.polyfit(logm, np.log([r.efficient_evals for r in with_eff]), 1)[0]
        )
        scan_slope = float(
            np.polyfit(logm, np.log([r.efficient_grid_evals for r in with_eff]), 1)[0]
        )
    lse_slope = None
    if len(rows) >= 2:
        logm_all = np.log([r.M for r in rows])
        lse_slope = float(
            np.polyfit(logm_all, np.log([r.lse2d_lattice for r in rows]), 1)[0]
        )
    return BenchReport(
        rows=rows,
        efficient_slope=eff_slope,
        efficient_scan_slope=scan_slope,
        lse2d_slope=lse_slope,
    )


def write_bench_csv(report: BenchReport, path) -> None:
    def cell(v, spec="") -> str:
        return "" if v is None else format(v, spec)

    with open(path, "w", encoding="ascii") as f:
        f.write(
            "M,N,efficient_evals,efficient_grid_evals,efficient_seconds,"
            "lse2d_lattice,lse2d_executed,lse2d_seconds\n"
        )
        for r in report.rows:
            f.write(
                f"{r.M},{r.N},{cell(r.efficient_evals)},{cell(r.efficient_grid_evals)},"
                f"{cell(r.efficient_seconds, '.6f')},{r.lse2d_lattice},"
                f"{int(r.lse2d_executed)},{cell(r.lse2d_seconds, '.6f')}\n"
            )


# ---------------------------------------------------------------------------
# texture demo
# ---------------------------------------------------------------------------


def render_grayscale(grid: SignalGrid) -> bytes:
    """Binary PGM (P5, maxval 255) with the field min/max mapped to 0/255.

    A constant field maps to mid-gray 128.  Pixel (row m, col n) is lattice
    point (m, n), so the image is N wide and M tall.
    """
    v = grid.values
    lo = float(v.min())
    hi = float(v.max())
    if hi == lo:
        pix = np.full(v.shape, 128, dtype=np.uint8)
    else:
        pix = np.rint((v - lo) * (255.0 / (hi - lo)))
        pix = np.clip(pix, 0, 255).astype(np.uint8)
    header = f"P5\n{grid.N} {grid.M}\n255\n".encode("ascii")
    return header + pix.tobytes()


def texture_run(
    truth: ChirpParams,
    M: int,
    N: int,
    noise_spec: NoiseSpec,
    out_dir,
    config: SearchConfig1D | None = None,
) -> dict:
    """Synthesize, contaminate, re-estimate, reconstruct; write the three
    PGM renderings and a JSON report into out_dir."""
    if min(M, N) < 20:
        raise ValueError("texture runs need M, N >= 20")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    clean = synthesize(truth, M, N)
    observed = contaminate(clean, generate(noise_spec, M, N))
    result = estimate(observed, config)
    recon = synthesize(result.params, M, N)

    (out / "original.pgm").write_bytes(render_grayscale(clean))
    (out / "contaminated.pgm").write_bytes(render_grayscale(observed))
    (out / "reconstructed.pgm").write_bytes(render_grayscale(recon))

    err = error_vector(result.params, truth)
    report = {
        "M": M,
        "N": N,
        "truth": truth.to_dict(),
        "estimate": result.params.to_dict(),
        "parameter_order": list(PARAM_ORDER),
        "error": err.tolist(),
        "residual_ss": result.residual_ss,
        "reconstruction_mse": float(np.mean((recon.values - clean.values) ** 2)),
        "contamination_mse": float(np.mean((observed.values - clean.values) ** 2)),
        "noise": noise_spec.to_dict(),
        "files": ["original.pgm", "contaminated.pgm", "reconstructed.pgm"],
    }
    with open(out / "report.json", "w", encoding="ascii") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return report
