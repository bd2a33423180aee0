"""Large-sample distribution of the estimator and the CRLB constants.

For the square-sided limit (M and N growing proportionally) the scaled
estimation errors

    D^{-1} (theta_hat - theta_0),
    D^{-1} = diag(sqrt(MN), sqrt(MN), M^{3/2} N^{1/2}, M^{5/2} N^{1/2},
                  M^{1/2} N^{3/2}, M^{1/2} N^{5/2}, M^{3/2} N^{3/2})

are asymptotically centered Gaussian with covariance Sigma given below, in
the parameter order (A, B, alpha, beta, gamma, delta, mu).  The common
factor is c*sigma^2/(A^2+B^2), with c the sum of squared impulse-response
weights of the noise process (1 for iid noise).

The chirp-rate variances (360) attain the corresponding Cramer-Rao bounds;
the frequency and cross-coupling variances (996, 996, 2448) sit above their
bounds (456, 456, 288).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChirpParams
from .noise import NoiseSpec, effective_c

PARAM_ORDER = ("A", "B", "alpha", "beta", "gamma", "delta", "mu")

# bound numerators before the common c*sigma^2/(A^2+B^2) factor
_CRLB_NUMERATORS = {"alpha": 456.0, "gamma": 456.0, "mu": 288.0, "beta": 360.0, "delta": 360.0}


def sigma_matrix(A: float, B: float, sigma2: float, c: float = 1.0) -> np.ndarray:
    """Asymptotic covariance of the scaled errors, order PARAM_ORDER."""
    E = A * A + B * B
    if E <= 0:
        raise ValueError("need A^2 + B^2 > 0")
    if sigma2 < 0 or c < 0:
        raise ValueError("sigma2 and c must be >= 0")
    S = np.array(
        [
            [2 * A * A + 187 * B * B, -185 * A * B, -378 * B, 60 * B, -378 * B, 60 * B, 612 * B],
            [-185 * A * B, 2 * B * B + 187 * A * A, 378 * A, -60 * A, 378 * A, -60 * A, -612 * A],
            [-378 * B, 378 * A, 996, -360, 612, 0, -1224],
            [60 * B, -60 * A, -360, 360, 0, 0, 0],
            [-378 * B, 378 * A, 612, 0, 996, -360, -1224],
            [60 * B, -60 * A, 0, 0, -360, 360, 0],
            [612 * B, -612 * A, -1224, 0, -1224, 0, 2448],
        ],
        dtype=float,
    )
    return (c * sigma2 / E) * S


def rate_vector(M: int, N: int) -> np.ndarray:
    """Diagonal of D^{-1}: the convergence-rate scalings, order PARAM_ORDER."""
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    rMN = np.sqrt(float(M) * float(N))
    return np.array(
        [
            rMN,
            rMN,
            M ** 1.5 * N ** 0.5,
            M ** 2.5 * N ** 0.5,
            M ** 0.5 * N ** 1.5,
            M ** 0.5 * N ** 2.5,
            M ** 1.5 * N ** 1.5,
        ]
    )


def crlb_nonlinear(A: float, B: float, sigma2: float, c: float = 1.0) -> dict[str, float]:
    """Cramer-Rao lower bounds for the scaled nonlinear-parameter errors.

    Keys alpha, beta, gamma, delta, mu; values are the bound on the scaled
    asymptotic variance.  The rate bounds (beta, delta) coincide with the
    sigma_matrix diagonal; the others are strictly below it.
    """
    E = A * A + B * B
    if E <= 0:
        raise ValueError("need A^2 + B^2 > 0")
    scale = c * sigma2 / E
    return {name: scale * num for name, num in _CRLB_NUMERATORS.items()}


def predicted_sd(
    params: ChirpParams, M: int, N: int, spec: NoiseSpec, truncation: int = 100
) -> np.ndarray:
    """Theory-predicted standard deviations of the unscaled estimates,
    sqrt(diag(Sigma)) divided by the rate scalings, order PARAM_ORDER."""
    c = effective_c(spec, truncation)
    S = sigma_matrix(params.A, params.B, spec.sigma**2, c)
    return np.sqrt(np.diag(S)) / rate_vector(M, N)


@dataclass
class AsymptoticReport:
    """Everything the theory predicts for one (params, M, N, noise) setup."""

    M: int
    N: int
    c: float
    sigma: np.ndarray  # 7x7 scaled covariance
    crlb: dict[str, float]
    scalings: np.ndarray  # diag of D^{-1}
    sd: np.ndarray  # predicted unscaled standard deviations
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "N": self.N,
            "c": self.c,
            "parameter_order": list(PARAM_ORDER),
            "sigma": self.sigma.tolist(),
            "crlb": dict(self.crlb),
            "scalings": self.scalings.tolist(),
            "predicted_sd": self.sd.tolist(),
            "flags": list(self.flags),
        }


def build_report(
    params: ChirpParams, M: int, N: int, spec: NoiseSpec, truncation: int = 100
) -> AsymptoticReport:
    """Assemble the asymptotic report; flags M != N since the limit theory
    is stated for proportionally growing square-ish grids."""
    c = effective_c(spec, truncation)
    sigma2 = spec.sigma**2
    flags = () if M == N else ("unequal-grid-sides",)
    return AsymptoticReport(
        M=M,
        N=N,
        c=c,
        sigma=sigma_matrix(params.A, params.B, sigma2, c),
        crlb=crlb_nonlinear(params.A, params.B, sigma2, c),
        scalings=rate_vector(M, N),
        sd=predicted_sd(params, M, N, spec, truncation),
        flags=flags,
    )
