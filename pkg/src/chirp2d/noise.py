"""Noise field generation for the 2-d chirp model.

Three stationary noise kinds are supported:

* ``iid-gaussian``: independent N(0, sigma^2) at each lattice point.
* ``fir-linear-process``: X(m, n) = sum_{(i,j)} a(i,j) * eps(m-i, n-j) for a
  finite user-supplied kernel, eps iid N(0, sigma^2).
* ``arma-example``: the fixed quarter-plane recursion

      X(m, n) = 0.06*X(m-1, n-1) - 0.054*X(m, n-1) + 0.087*X(m-1, n)
                + eps(m, n) + 0.01*eps(m-1, n-1) + 0.035*eps(m, n-1)
                + 0.042*eps(m-1, n),

  run with zero initial conditions over a padded field and cropped by a
  burn-in margin (default 50 rows and columns).

Randomness is fully deterministic given a NoiseSpec.  The stream construction:
Philox4x64 counter-based generator with 128-bit key equal to the 64-bit
stream seed (zero-extended); uniforms are numpy's 53-bit doubles
u = (top 53 bits of a 64-bit word) / 2**53; normals are
ndtri(u + 2**-54) so the argument stays strictly inside (0, 1).
Per-replication seeds come from ``derive_seed``, the index-th output of a
splitmix64 stream seeded with the master seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtri

from .model import SignalGrid

KIND_IID = "iid-gaussian"
KIND_FIR = "fir-linear-process"
KIND_ARMA = "arma-example"
KINDS = (KIND_IID, KIND_FIR, KIND_ARMA)

# lag (i, j) -> coefficient on X(m-i, n-j) and eps(m-i, n-j)
ARMA_AR = {(1, 1): 0.06, (0, 1): -0.054, (1, 0): 0.087}
ARMA_MA = {(0, 0): 1.0, (1, 1): 0.01, (0, 1): 0.035, (1, 0): 0.042}

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseSpec:
    """Recipe for one noise field: kind, level, stream seed.

    ``kernel`` (fir only) is a tuple of (i, j, coef) triples meaning
    coef * eps(m-i, n-j); offsets may be negative.  ``burn_in`` (arma only)
    is the number of leading rows and columns dropped after the zero-start
    recursion.
    """

    kind: str
    sigma: float
    seed: int
    kernel: tuple[tuple[int, int, float], ...] | None = None
    burn_in: int = 50

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected one of {KINDS}")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("sigma must be finite and >= 0")
        if not (isinstance(self.seed, int) and 0 <= self.seed < (1 << 64)):
            raise ValueError("seed must be an integer in [0, 2**64)")
        if self.kind == KIND_FIR:
            if not self.kernel:
                raise ValueError("fir-linear-process requires a nonempty kernel")
            object.__setattr__(
                self,
                "kernel",
                tuple((int(i), int(j), float(c)) for i, j, c in self.kernel),
            )
        elif self.kernel is not None:
            raise ValueError(f"kernel is only valid for {KIND_FIR}")
        if not (isinstance(self.burn_in, int) and self.burn_in >= 0):
            raise ValueError("burn_in must be a nonnegative integer")

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "sigma": self.sigma, "seed": self.seed}
        if self.kind == KIND_FIR:
            doc["kernel"] = [list(t) for t in self.kernel]
        if self.kind == KIND_ARMA:
            doc["burn_in"] = self.burn_in
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "NoiseSpec":
        allowed = {"kind", "sigma", "seed", "kernel", "burn_in"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown noise spec keys: {sorted(unknown)}")
        for key in ("kind", "sigma", "seed"):
            if key not in doc:
                raise ValueError(f"noise spec missing required key {key!r}")
        kwargs = {
            "kind": doc["kind"],
            "sigma": float(doc["sigma"]),
            "seed": int(doc["seed"]),
        }
        if "kernel" in doc:
            kwargs["kernel"] = tuple(tuple(t) for t in doc["kernel"])
        if "burn_in" in doc:
            kwargs["burn_in"] = int(doc["burn_in"])
        return cls(**kwargs)


def derive_seed(master_seed: int, index: int) -> int:
    """index-th output of a splitmix64 stream seeded with master_seed."""
    if index < 0:
        raise ValueError("index must be >= 0")
    x = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def gaussian_field(seed: int, shape: tuple[int, ...], sigma: float) -> np.ndarray:
    """Deterministic N(0, sigma^2) field via Philox + inverse normal CDF."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random(shape)
    return sigma * ndtri(u + 2.0**-54)


def _shift_down(v: np.ndarray) -> np.ndarray:
    out = np.empty_like(v)
    out[0] = 0.0
    out[1:] = v[:-1]
    return out


def _arma_scan(eps: np.ndarray) -> np.ndarray:
    """Run the arma-example recursion over a full field, zero pre-samples."""
    P, Q = eps.shape
    X = np.empty_like(eps)
    prev_x = np.zeros(P)
    prev_e = np.zeros(P)
    # column q depends on column q-1 only; within a column the AR(1)-in-m
    # part is a standard recursive filter
    ar_m = ARMA_AR[(1, 0)]
    for q in range(Q):
        e = eps[:, q]
        g = (
            e
            + ARMA_MA[(1, 0)] * _shift_down(e)
            + ARMA_MA[(0, 1)] * prev_e
            + ARMA_MA[(1, 1)] * _shift_down(prev_e)
            + ARMA_AR[(0, 1)] * prev_x
            + ARMA_AR[(1, 1)] * _shift_down(prev_x)
        )
        x = lfilter([1.0], [1.0, -ar_m], g)
        X[:, q] = x
        prev_x, prev_e = x, e
    return X


def generate(spec: NoiseSpec, M: int, N: int) -> SignalGrid:
    """Generate an M x N noise field; bit-identical for identical inputs."""
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    if spec.kind == KIND_IID:
        return SignalGrid(gaussian_field(spec.seed, (M, N), spec.sigma))
    if spec.kind == KIND_FIR:
        taps = spec.kernel
        i_hi = max(t[0] for t in taps)
        i_lo = min(t[0] for t in taps)
        j_hi = max(t[1] for t in taps)
        j_lo = min(t[1] for t in taps)
        pad = gaussian_field(spec.seed, (M + i_hi - i_lo, N + j_hi - j_lo), spec.sigma)
        # pad[r, c] holds eps(1 - i_hi + r, 1 - j_hi + c)
        out = np.zeros((M, N))
        for i, j, coef in taps:
            out += coef * pad[i_hi - i : i_hi - i + M, j_hi - j : j_hi - j + N]
        return SignalGrid(out)
    # arma-example
    B = spec.burn_in
    eps = gaussian_field(spec.seed, (B + M, B + N), spec.sigma)
    X = _arma_scan(eps)
    return SignalGrid(X[B:, B:].copy())


def effective_c(spec: NoiseSpec, truncation: int = 100) -> float:
    """Sum of squared impulse-response weights of the noise process.

    The stationary noise variance is (this constant) * sigma^2, and the same
    constant scales every asymptotic variance.  Exact for iid (1) and fir
    kernels; for arma-example the recursion is driven by a unit impulse at
    the center of a (2*truncation+1)^2 window and the squared response is
    summed, which converges rapidly because the AR coefficients are small.
    """
    if spec.kind == KIND_IID:
        return 1.0
    if spec.kind == KIND_FIR:
        return float(sum(c * c for _, _, c in spec.kernel))
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    T = truncation
    eps = np.zeros((2 * T + 1, 2 * T + 1))
    eps[T, T] = 1.0
    h = _arma_scan(eps)
    return float(np.sum(h * h))


def contaminate(signal: SignalGrid, noise: SignalGrid) -> SignalGrid:
    """Add a noise field to a signal field of the same shape."""
    if signal.values.shape != noise.values.shape:
        raise ValueError(
            f"shape mismatch: signal {signal.values.shape}, noise {noise.values.shape}"
        )
    return SignalGrid(signal.values + noise.values)
