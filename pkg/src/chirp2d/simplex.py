"""Derivative-free simplex minimizer (Nelder-Mead).

Hand-rolled so that evaluation counts, the initial simplex, and the stopping
rule are exactly specified: standard coefficients (reflection 1, expansion 2,
contraction 0.5, shrink 0.5), initial simplex x0 plus one step along each
coordinate, and convergence when the function spread over the simplex drops
below tol * (1 + |best value|).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    evals: int
    iterations: int
    converged: bool


def minimize_simplex(
    fn: Callable[[np.ndarray], float],
    x0: Sequence[float],
    steps: Sequence[float],
    tol: float = 1e-12,
    max_iter: int = 500,
) -> SimplexResult:
    x0 = np.asarray(x0, dtype=float)
    steps = np.asarray(steps, dtype=float)
    d = x0.size
    if steps.size != d or not np.all(steps != 0):
        raise ValueError("steps must match x0 in length and be nonzero")

    evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        val = float(fn(x))
        return val if not np.isnan(val) else np.inf

    verts = np.empty((d + 1, d))
    verts[0] = x0
    for i in range(d):
        verts[i + 1] = x0
        verts[i + 1, i] += steps[i]
    fvals = np.array([f(v) for v in verts])

    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(fvals, kind="stable")
        verts, fvals = verts[order], fvals[order]
        if fvals[-1] - fvals[0] <= tol * (1.0 + abs(fvals[0])):
            converged = True
            break
        iterations += 1

        centroid = verts[:-1].mean(axis=0)
        xr = centroid + (centroid - verts[-1])
        fr = f(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                verts[-1], fvals[-1] = xe, fe
            else:
                verts[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            verts[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
                fc = f(xc)
                if fc <= fr:
                    verts[-1], fvals[-1] = xc, fc
                    continue
            else:
                xc = centroid - 0.5 * (centroid - verts[-1])
                fc = f(xc)
                if fc < fvals[-1]:
                    verts[-1], fvals[-1] = xc, fc
                    continue
            # shrink toward the best vertex
            for i in range(1, d + 1):
                verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
                fvals[i] = f(verts[i])

    best = int(np.argmin(fvals))
    return SimplexResult(
        x=verts[best].copy(),
        fun=float(fvals[best]),
        evals=evals,
        iterations=iterations,
        converged=converged,
    )
