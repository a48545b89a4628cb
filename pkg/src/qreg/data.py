"""Seeded synthetic instances of the teacher model ``y = X w0 + eps``.

Random numbers come from numpy's counter-based Philox4x64 generator keyed by
``(seed, stream)``, with separate streams for the teacher, the design matrix
and the noise.  Raw 64-bit words are turned into normals by a fixed
transform that is easy to reproduce elsewhere:

    u = ((word >> 11) + 0.5) * 2**-53          # uniform on (0, 1)
    z_even = sqrt(-2 ln u_even) cos(2 pi u_odd)  # Box-Muller on word pairs
    z_odd  = sqrt(-2 ln u_even) sin(2 pi u_odd)
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

STREAM_TEACHER = 0
STREAM_DESIGN = 1
STREAM_NOISE = 2


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    w0: np.ndarray
    sigma2: float
    seed: int
    rho: float = 1.0

    @property
    def N(self) -> int:
        return self.X.shape[1]

    @property
    def M(self) -> int:
        return self.X.shape[0]

    @property
    def alpha(self) -> float:
        return self.M / self.N

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("N,M,rho,sigma2,seed\n")
        buf.write(f"{self.N},{self.M},{self.rho!r},{self.sigma2!r},{self.seed}\n")
        for row in (self.w0, self.y, *self.X):
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> Dataset:
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if lines[0].strip() != "N,M,rho,sigma2,seed":
            raise ValueError("unexpected fixture header")
        n, m, rho, sigma2, seed = lines[1].split(",")
        N, M = int(n), int(m)
        rows = [np.array([float(v) for v in ln.split(",")]) for ln in lines[2:]]
        if len(rows) != M + 2:
            raise ValueError(f"expected {M + 2} data rows, got {len(rows)}")
        w0, y, X = rows[0], rows[1], np.vstack(rows[2:])
        if w0.shape != (N,) or y.shape != (M,) or X.shape != (M, N):
            raise ValueError("fixture dimensions inconsistent with header")
        return cls(X, y, w0, float(sigma2), int(seed), float(rho))


def uniform_stream(seed: int, stream: int, n: int) -> np.ndarray:
    """``n`` uniforms on (0, 1) from the Philox counter stream ``(seed, stream)``."""
    bitgen = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    words = bitgen.random_raw(n)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normal_stream(seed: int, stream: int, n: int) -> np.ndarray:
    u = uniform_stream(seed, stream, 2 * ((n + 1) // 2))
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    z = np.empty(u.size)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]


def generate(N: int, M: int, rho: float = 1.0, sigma2: float = 0.0, seed: int = 0) -> Dataset:
    """Draw ``w0 ~ N(0, rho)``, ``X_{mu i} ~ N(0, 1/N)`` and noise ``N(0, sigma2)``."""
    if int(N) != N or int(M) != M or N < 1 or M < 1:
        raise ValueError(f"N and M must be positive integers, got N={N}, M={M}")
    if rho <= 0 or sigma2 < 0:
        raise ValueError("rho must be positive and sigma2 non-negative")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    N, M = int(N), int(M)
    w0 = np.sqrt(rho) * normal_stream(seed, STREAM_TEACHER, N)
    X = normal_stream(seed, STREAM_DESIGN, M * N).reshape(M, N) / np.sqrt(N)
    y = X @ w0
    if sigma2 > 0:
        y = y + np.sqrt(sigma2) * normal_stream(seed, STREAM_NOISE, M)
    return Dataset(X, y, w0, float(sigma2), int(seed), float(rho))
