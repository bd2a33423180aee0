"""Two-dimensional chirp signal model.

The observed field is

    y(m, n) = A*cos(phi(m, n)) + B*sin(phi(m, n)) + X(m, n)

with the quadratic phase

    phi(m, n) = alpha*m + beta*m**2 + gamma*n + delta*n**2 + mu*m*n

over 1-based indices m = 1..M (rows) and n = 1..N (columns).  A, B are real
amplitudes, alpha/gamma are frequencies along the two axes, beta/delta the
chirp rates, and mu couples the axes.  X is additive noise.

Identifiable ranges: frequencies live on [0, 2*pi), chirp rates on
[0, pi/2).  Shifting (alpha, beta) by (pi, pi) leaves the signal unchanged
because m + m**2 is always even, which is why the rate range is a quarter
circle rather than a half.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi

FREQ_RANGE = (0.0, TWO_PI)
RATE_RANGE = (0.0, np.pi / 2.0)

GRID_MAGIC = b"CHGRID1\n"


def wrap_two_pi(x):
    """Reduce angle(s) into [0, 2*pi)."""
    return np.mod(x, TWO_PI)


def wrap_centered(x):
    """Reduce angle(s) into [-pi, pi)."""
    return np.mod(np.asarray(x) + np.pi, TWO_PI) - np.pi


@dataclass(frozen=True)
class NonlinearParams:
    """Phase parameters (alpha, beta, gamma, delta, mu)."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    mu: float

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta, self.mu])

    @classmethod
    def from_array(cls, x) -> "NonlinearParams":
        a, b, g, d, u = (float(v) for v in x)
        return cls(a, b, g, d, u)

    def in_identifiable_range(self) -> bool:
        lo_f, hi_f = FREQ_RANGE
        lo_r, hi_r = RATE_RANGE
        return (
            lo_f <= self.alpha < hi_f
            and lo_f <= self.gamma < hi_f
            and lo_f <= self.mu < hi_f
            and lo_r <= self.beta < hi_r
            and lo_r <= self.delta < hi_r
        )


@dataclass(frozen=True)
class ChirpParams:
    """Full parameter vector (A, B, alpha, beta, gamma, delta, mu)."""

    A: float
    B: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    mu: float

    @property
    def xi(self) -> NonlinearParams:
        return NonlinearParams(self.alpha, self.beta, self.gamma, self.delta, self.mu)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.A, self.B, self.alpha, self.beta, self.gamma, self.delta, self.mu]
        )

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "delta": self.delta,
            "mu": self.mu,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ChirpParams":
        return cls(**{k: float(doc[k]) for k in PARAM_NAMES})

    def validate(self) -> None:
        arr = self.as_array()
        if not np.all(np.isfinite(arr)):
            raise ValueError("parameters must be finite")


PARAM_NAMES = ("A", "B", "alpha", "beta", "gamma", "delta", "mu")


def canonicalize(params: ChirpParams) -> ChirpParams:
    """Reduce frequencies into [0, 2*pi) and rates into [-pi, pi).

    Rates are centered rather than forced into [0, pi/2) so that a refined
    estimate sitting just below 0 stays near 0 instead of jumping by 2*pi.
    """
    return replace(
        params,
        alpha=float(wrap_two_pi(params.alpha)),
        gamma=float(wrap_two_pi(params.gamma)),
        mu=float(wrap_two_pi(params.mu)),
        beta=float(wrap_centered(params.beta)),
        delta=float(wrap_centered(params.delta)),
    )


def phase(xi: NonlinearParams, m, n):
    """Evaluate phi at index (m, n); broadcasts over array arguments."""
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    val = xi.alpha * m + xi.beta * m * m + xi.gamma * n + xi.delta * n * n + xi.mu * m * n
    if val.ndim == 0:
        return float(val)
    return val


def phase_grid(xi: NonlinearParams, M: int, N: int) -> np.ndarray:
    """Phase over the full M x N lattice, shape (M, N)."""
    m = np.arange(1, M + 1, dtype=float)[:, None]
    n = np.arange(1, N + 1, dtype=float)[None, :]
    return phase(xi, m, n)


@dataclass
class SignalGrid:
    """Real-valued field sampled on the M x N lattice (row m, column n)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.size == 0:
            raise ValueError("grid must be a nonempty 2-d array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        self.values = vals

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def column(self, n0: int) -> np.ndarray:
        """Column n0 (1-based), a length-M vector."""
        if not 1 <= n0 <= self.N:
            raise IndexError(f"column index {n0} outside 1..{self.N}")
        return self.values[:, n0 - 1].copy()

    def row(self, m0: int) -> np.ndarray:
        """Row m0 (1-based), a length-N vector."""
        if not 1 <= m0 <= self.M:
            raise IndexError(f"row index {m0} outside 1..{self.M}")
        return self.values[m0 - 1, :].copy()


def synthesize(params: ChirpParams, M: int, N: int) -> SignalGrid:
    """Noiseless chirp field for the given parameters.

    Accepts A = B = 0 (produces the zero grid); M, N must be >= 1.
    """
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    params.validate()
    ph = phase_grid(params.xi, M, N)
    return SignalGrid(params.A * np.cos(ph) + params.B * np.sin(ph))


@dataclass(frozen=True)
class EffectiveParams1D:
    """1-d chirp parameters of a single row or column of the 2-d model.

    The vector equals amp_cos*cos(freq*t + rate*t**2) +
    amp_sin*sin(freq*t + rate*t**2) over t = 1..len.  freq is reported
    unreduced (it may fall outside [0, 2*pi) for large n0*mu).
    """

    amp_cos: float
    amp_sin: float
    freq: float
    rate: float


def column_effective(params: ChirpParams, n0: int) -> EffectiveParams1D:
    """1-d parameters of column n0: frequency alpha + n0*mu, rate beta.

    The amplitude pair is the (A, B) pair rotated by gamma*n0 + delta*n0**2.
    """
    w = params.gamma * n0 + params.delta * n0 * n0
    a = params.A * np.cos(w) + params.B * np.sin(w)
    b = -params.A * np.sin(w) + params.B * np.cos(w)
    return EffectiveParams1D(float(a), float(b), params.alpha + n0 * params.mu, params.beta)


def row_effective(params: ChirpParams, m0: int) -> EffectiveParams1D:
    """1-d parameters of row m0: frequency gamma + m0*mu, rate delta."""
    w = params.alpha * m0 + params.beta * m0 * m0
    a = params.A * np.cos(w) + params.B * np.sin(w)
    b = -params.A * np.sin(w) + params.B * np.cos(w)
    return EffectiveParams1D(float(a), float(b), params.gamma + m0 * params.mu, params.delta)


# ---------------------------------------------------------------------------
# Grid serialization.  CSV: first line "M,N", then M lines of N values.
# Binary: magic b"CHGRID1\n", uint64 M, uint64 N, float64 row-major,
# all little-endian.
# ---------------------------------------------------------------------------


def write_grid_csv(grid: SignalGrid, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(f"{grid.M},{grid.N}\n")
        for row in grid.values:
            f.write(",".join(format(v, ".17g") for v in row))
            f.write("\n")


def read_grid_csv(path) -> SignalGrid:
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        try:
            m_str, n_str = header.split(",")
            M, N = int(m_str), int(n_str)
        except ValueError as exc:
            raise ValueError(f"bad grid header {header!r}, expected 'M,N'") from exc
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.shape != (M, N):
        raise ValueError(f"grid body shape {data.shape} does not match header ({M}, {N})")
    return SignalGrid(data)


def write_grid_binary(grid: SignalGrid, path) -> None:
    with open(path, "wb") as f:
        f.write(GRID_MAGIC)
        f.write(struct.pack("<QQ", grid.M, grid.N))
        f.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())


def read_grid_binary(path) -> SignalGrid:
    with open(path, "rb") as f:
        magic = f.read(len(GRID_MAGIC))
        if magic != GRID_MAGIC:
            raise ValueError("not a binary grid file (bad magic)")
        M, N = struct.unpack("<QQ", f.read(16))
        body = f.read()
    expected = M * N * 8
    if len(body) != expected:
        raise ValueError(f"binary grid body has {len(body)} bytes, expected {expected}")
    vals = np.frombuffer(body, dtype="<f8").reshape(M, N)
    return SignalGrid(vals.copy())


def write_grid(grid: SignalGrid, path, fmt: str | None = None) -> None:
    """Write a grid; format from `fmt` ('csv' or 'binary') or the extension."""
    if fmt is None:
        fmt = "csv" if Path(path).suffix.lower() == ".csv" else "binary"
    if fmt == "csv":
        write_grid_csv(grid, path)
    elif fmt == "binary":
        write_grid_binary(grid, path)
    else:
        raise ValueError(f"unknown grid format {fmt!r}")


def read_grid(path) -> SignalGrid:
    """Read a grid, sniffing the binary magic and falling back to CSV."""
    with open(path, "rb") as f:
        head = f.read(len(GRID_MAGIC))
    if head == GRID_MAGIC:
        return read_grid_binary(path)
    return read_grid_csv(path)
