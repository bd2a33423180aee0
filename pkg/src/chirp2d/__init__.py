"""Estimation of two-dimensional chirp signal parameters.

The model, its noise processes, a computationally efficient three-step
estimator built from 1-d fits, the direct dense-lattice least squares it is
benchmarked against, the asymptotic distribution theory, and reproducible
experiments around all of it.
"""

from .asymptotics import (
    PARAM_ORDER,
    AsymptoticReport,
    build_report,
    crlb_nonlinear,
    predicted_sd,
    rate_vector,
    sigma_matrix,
)
from .estimator import (
    EstimationError,
    EstimationResult,
    SweepResult,
    average_rates,
    combine_linear,
    estimate,
    estimate_amplitudes,
    solve_amplitudes_2d,
    sweep,
    unwrap_frequencies,
)
from .fit1d import (
    DegenerateDesignError,
    Fit1D,
    SearchConfig1D,
    canonical_freq_rate,
    estimate_1d,
    grid_search_1d,
    reduced_ss,
    refine_1d,
)
from .lse2d import (
    BudgetExceededError,
    SearchConfig2D,
    lattice_count,
    lse2d,
    profile_rss_2d,
)
from .model import (
    ChirpParams,
    EffectiveParams1D,
    NonlinearParams,
    SignalGrid,
    canonicalize,
    column_effective,
    phase,
    phase_grid,
    read_grid,
    row_effective,
    synthesize,
    write_grid,
)
from .noise import NoiseSpec, contaminate, derive_seed, effective_c, generate
from .experiments import (
    PAR_CHOICE,
    BenchReport,
    MCConfig,
    MCReport,
    complexity_benchmark,
    error_vector,
    render_grayscale,
    run_monte_carlo,
    texture_run,
    write_mc_csv,
)

__version__ = "0.1.0"

__all__ = [
    "PARAM_ORDER",
    "AsymptoticReport",
    "build_report",
    "crlb_nonlinear",
    "predicted_sd",
    "rate_vector",
    "sigma_matrix",
    "EstimationError",
    "EstimationResult",
    "SweepResult",
    "average_rates",
    "combine_linear",
    "estimate",
    "estimate_amplitudes",
    "solve_amplitudes_2d",
    "sweep",
    "unwrap_frequencies",
    "DegenerateDesignError",
    "Fit1D",
    "SearchConfig1D",
    "canonical_freq_rate",
    "estimate_1d",
    "grid_search_1d",
    "reduced_ss",
    "refine_1d",
    "BudgetExceededError",
    "SearchConfig2D",
    "lattice_count",
    "lse2d",
    "profile_rss_2d",
    "ChirpParams",
    "EffectiveParams1D",
    "NonlinearParams",
    "SignalGrid",
    "canonicalize",
    "column_effective",
    "phase",
    "phase_grid",
    "read_grid",
    "row_effective",
    "synthesize",
    "write_grid",
    "NoiseSpec",
    "contaminate",
    "derive_seed",
    "effective_c",
    "generate",
    "PAR_CHOICE",
    "BenchReport",
    "MCConfig",
    "MCReport",
    "complexity_benchmark",
    "error_vector",
    "render_grayscale",
    "run_monte_carlo",
    "texture_run",
    "write_mc_csv",
    "__version__",
]
