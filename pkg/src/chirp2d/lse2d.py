"""Direct 2-d least squares over a dense 5-d phase lattice.

This is the reference estimator the fast three-step method is measured
against.  The amplitudes are profiled out exactly as in the 1-d engine, so
the objective over (alpha, beta, gamma, delta, mu) is

    R(xi) = y'y - h' G^{-1} h

with the 2-column design evaluated on the whole M x N grid.  The scan walks
a product lattice whose default resolution is (2M, M^2, 2N, N^2, 2MN); the
lattice point count grows like M^8 for square grids, which is exactly why
this method exists only as a reference.  A budget guard refuses scans whose
lattice exceeds ``eval_budget``.

The scan is vectorized by factorizing the phase: with u_p(m) =
exp(i(alpha m + beta m^2)), v_q(n) = exp(i(gamma n + delta n^2)) and
w(m, n) = exp(i mu m n),

    T1[p, q] = sum_{m,n} y(m,n) u_p(m) w(m,n) v_q(n) = U (Y*W) V',
    T2[p, q] = sum_{m,n} (u_p w v_q)^2,

computed per mu slab as matrix products, giving the normal-equation tables
for every (alpha, beta, gamma, delta) pair at once.

The lattice stage is followed by the same simplex refinement as the 1-d
engine, over all five phase parameters, with steps equal to a quarter of
each lattice spacing.
"""

from __future__ import annotations

import numpy as np

from .estimator import EstimationResult
from .fit1d import DegenerateDesignError
from .model import (
    FREQ_RANGE,
    RATE_RANGE,
    ChirpParams,
    NonlinearParams,
    SignalGrid,
    canonicalize,
    phase_grid,
)
from .simplex import minimize_simplex

DEGENERACY_TOL = 1e-10


class BudgetExceededError(RuntimeError):
    """The requested lattice is larger than the configured evaluation budget."""


class SearchConfig2D:
    """Lattice resolution, refinement knobs and budget for the direct fit."""

    def __init__(
        self,
        alpha_count: int,
        beta_count: int,
        gamma_count: int,
        delta_count: int,
        mu_count: int,
        refine_tolerance: float = 1e-12,
        refine_max_iters: int = 500,
        eval_budget: int = 10**8,
    ):
        counts = (alpha_count, beta_count, gamma_count, delta_count, mu_count)
        if any(int(c) < 1 for c in counts):
            raise ValueError("grid counts must be >= 1")
        if refine_tolerance <= 0 or refine_max_iters < 1 or eval_budget < 1:
            raise ValueError("bad refinement or budget settings")
        self.alpha_count = int(alpha_count)
        self.beta_count = int(beta_count)
        self.gamma_count = int(gamma_count)
        self.delta_count = int(delta_count)
        self.mu_count = int(mu_count)
        self.refine_tolerance = float(refine_tolerance)
        self.refine_max_iters = int(refine_max_iters)
        self.eval_budget = int(eval_budget)

    @classmethod
    def for_grid(cls, M: int, N: int, eval_budget: int = 10**8) -> "SearchConfig2D":
        """Default resolution: (2M, M^2, 2N, N^2, 2MN)."""
        return cls(2 * M, M * M, 2 * N, N * N, 2 * M * N, eval_budget=eval_budget)

    def counts(self) -> tuple[int, int, int, int, int]:
        return (
            self.alpha_count,
            self.beta_count,
            self.gamma_count,
            self.delta_count,
            self.mu_count,
        )


def lattice_count(config: SearchConfig2D) -> int:
    """Number of 5-d lattice points, the product of the five grid counts."""
    total = 1
    for c in config.counts():
        total *= c
    return total


def _normal_2d(values: np.ndarray, ph: np.ndarray):
    c = np.cos(ph).ravel()
    s = np.sin(ph).ravel()
    y = values.ravel()
    cc = c @ c
    ss = s @ s
    cs = c @ s
    det = cc * ss - cs * cs
    tr = cc + ss
    if abs(det) < DEGENERACY_TOL * (tr / 2.0) ** 2:
        raise DegenerateDesignError("singular 2-d design at the given phase")
    h1 = c @ y
    h2 = s @ y
    explained = (ss * h1 * h1 - 2.0 * cs * h1 * h2 + cc * h2 * h2) / det
    a = (ss * h1 - cs * h2) / det
    b = (cc * h2 - cs * h1) / det
    return float(explained), float(a), float(b)


def profile_rss_2d(grid: SignalGrid, xi: NonlinearParams) -> float:
    """Residual sum of squares at xi with amplitudes profiled out."""
    ph = phase_grid(xi, grid.M, grid.N)
    explained, _, _ = _normal_2d(grid.values, ph)
    y = grid.values.ravel()
    return max(0.0, float(y @ y - explained))


def _axis_grid(count: int, lo: float, hi: float) -> np.ndarray:
    return lo + (hi - lo) * np.arange(count) / count


def _scan_lattice(grid: SignalGrid, config: SearchConfig2D):
    """Evaluate the profiled objective at every lattice point; return the
    lexicographically first minimizer (alpha, beta, gamma, delta, mu order)
    and the count of degenerate points."""
    Y = grid.values
    M, N = grid.M, grid.N
    k = M * N
    yty = float(np.sum(Y * Y))
    m = np.arange(1, M + 1, dtype=float)
    n = np.arange(1, N + 1, dtype=float)

    alphas = _axis_grid(config.alpha_count, *FREQ_RANGE)
    betas = _axis_grid(config.beta_count, *RATE_RANGE)
    gammas = _axis_grid(config.gamma_count, *FREQ_RANGE)
    deltas = _axis_grid(config.delta_count, *RATE_RANGE)
    mus = _axis_grid(config.mu_count, *FREQ_RANGE)

    # row factor: (alpha, beta) pairs, alpha-major; column factor likewise
    U = (
        np.exp(1j * alphas[:, None, None] * m[None, None, :])
        * np.exp(1j * betas[None, :, None] * (m * m)[None, None, :])
    ).reshape(-1, M)
    V = (
        np.exp(1j * gammas[:, None, None] * n[None, None, :])
        * np.exp(1j * deltas[None, :, None] * (n * n)[None, None, :])
    ).reshape(-1, N)
    U2 = U * U
    V2 = V * V
    P, Q = U.shape[0], V.shape[0]
    mn = np.outer(m, n)

    # keep per-slab work arrays around P * q_block cells
    q_block = max(1, min(Q, int(4_000_000 // max(P, 1)) or 1))

    best_val = np.inf
    best_idx: tuple[int, int, int, int, int] | None = None
    skipped = 0
    thresh = DEGENERACY_TOL * (k / 2.0) ** 2

    for i_mu, mu in enumerate(mus):
        W = np.exp(1j * mu * mn)
        YW = (Y * W).astype(np.complex128, copy=False)
        W2 = W * W
        UYW = U @ YW  # (P, N)
        U2W2 = U2 @ W2
        for q0 in range(0, Q, q_block):
            q1 = min(Q, q0 + q_block)
            T1 = UYW @ V[q0:q1].T
            T2 = U2W2 @ V2[q0:q1].T
            cc = 0.5 * (k + T2.real)
            ss = 0.5 * (k - T2.real)
            cs = 0.5 * T2.imag
            det = cc * ss - cs * cs
            deg = np.abs(det) < thresh
            n_deg = int(deg.sum())
            skipped += n_deg
            det[deg] = 1.0
            h1 = T1.real
            h2 = T1.imag
            R = yty - (ss * h1 * h1 - 2.0 * cs * h1 * h2 + cc * h2 * h2) / det
            if n_deg:
                R[deg] = np.inf
            flat = int(np.argmin(R))
            val = float(R[divmod(flat, q1 - q0)])
            if val < best_val or (val == best_val and best_idx is not None):
                ip, iq_local = divmod(flat, q1 - q0)
                iq = q0 + iq_local
                ia, ib = divmod(ip, config.beta_count)
                ig, idl = divmod(iq, config.delta_count)
                cand = (ia, ib, ig, idl, i_mu)
                if val < best_val or cand < best_idx:
                    best_val = val
                    best_idx = cand

    if best_idx is None or not np.isfinite(best_val):
        raise DegenerateDesignError("every lattice point is degenerate")
    ia, ib, ig, idl, i_mu = best_idx
    xi = NonlinearParams(
        float(alphas[ia]), float(betas[ib]), float(gammas[ig]), float(deltas[idl]), float(mus[i_mu])
    )
    return xi, max(0.0, best_val), skipped


def lse2d(grid: SignalGrid, config: SearchConfig2D | None = None) -> EstimationResult:
    """Dense-lattice direct least squares with simplex refinement.

    total_evals reports the lattice point count (the product of the five
    grid counts); refinement evaluations and degenerate skips appear in the
    diagnostics.  Raises BudgetExceededError before doing any work if the
    lattice exceeds the budget.
    """
    if grid.M < 2 or grid.N < 2:
        raise ValueError("direct fit needs M >= 2 and N >= 2")
    if config is None:
        config = SearchConfig2D.for_grid(grid.M, grid.N)
    total = lattice_count(config)
    if total > config.eval_budget:
        raise BudgetExceededError(
            f"lattice has {total} points, over the budget of {config.eval_budget}; "
            f"refusing the scan"
        )

    xi0, lattice_obj, skipped = _scan_lattice(grid, config)

    def objective(x) -> float:
        try:
            return profile_rss_2d(grid, NonlinearParams.from_array(x))
        except DegenerateDesignError:
            return np.inf

    spans = (FREQ_RANGE, RATE_RANGE, FREQ_RANGE, RATE_RANGE, FREQ_RANGE)
    steps = [
        (hi - lo) / count / 4.0
        for (lo, hi), count in zip(spans, config.counts())
    ]
    res = minimize_simplex(
        objective,
        xi0.as_array(),
        steps,
        tol=config.refine_tolerance,
        max_iter=config.refine_max_iters,
    )
    xi = NonlinearParams.from_array(res.x)
    ph = phase_grid(xi, grid.M, grid.N)
    try:
        _, A, B = _normal_2d(grid.values, ph)
    except DegenerateDesignError:
        # refinement should never land on a singular point when the scan
        # found a finite one; fall back to the lattice minimizer
        xi = xi0
        _, A, B = _normal_2d(grid.values, phase_grid(xi, grid.M, grid.N))
        res.fun = lattice_obj
    raw = ChirpParams(A, B, xi.alpha, xi.beta, xi.gamma, xi.delta, xi.mu)

    flags = [] if res.converged else ["refine-not-converged"]
    diagnostics = {
        "flags": flags,
        "lattice_evals": total,
        "skipped_lattice_points": skipped,
        "lattice_point": xi0.as_array().tolist(),
        "lattice_objective": lattice_obj,
        "refine_evals": res.evals,
    }
    return EstimationResult(
        params=canonicalize(raw),
        residual_ss=float(res.fun),
        total_evals=total,
        method="lse2d",
        sweep=None,
        diagnostics=diagnostics,
    )
