"""Approximate message passing for quantized ridge regression on finite instances.

Each iteration performs, with ``X2 = X**2``,

    V       = X2 v
    1/Sigma = X2.T (1 / (1 + V))
    theta   = X m - V (y - theta_prev) / (1 + V_prev)
    R       = m + Sigma X.T ((y - theta) / (1 + V))
    m, v    = denoiser output and derivative at field R / Sigma, curvature lambda + 1 / Sigma

``V_prev`` appears only in the Onsager term of ``theta``, where it belongs
to the previous output residual.  The cavity field ``R`` uses the current
``V``; the two choices share fixed points, but only this one follows the
state-evolution trajectory during the transient.

The staircase denoiser has zero derivative almost everywhere, which would
switch off the Onsager term.  Two realizations of the derivative exist:

``"hard"`` (default)
    ``m`` is the exact quantized minimizer; ``v_i`` is the Gaussian average
    of the jump comb at the empirical field scale ``sqrt(mean(u**2))`` and
    the site's own curvature.  Iterates stay on the codebook.
``"soft"``
    ``m`` and ``v`` are the mean and ``beta``-scaled variance of the Gibbs
    measure over the levels (:func:`qreg.single_body.phi_beta`).

The reported estimate is always hard-quantized.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import single_body as sb
from .codebook import Codebook, quantize_vec
from .data import Dataset, normal_stream

STREAM_AMP_INIT = 3


class AMPDivergence(FloatingPointError):
    def __init__(self, iteration: int, index: int, what: str):
        super().__init__(f"non-finite {what} at iteration {iteration}, index {index}")
        self.iteration = iteration
        self.index = index


@dataclass(frozen=True)
class AMPConfig:
    beta: float = 100.0
    T_max: int = 1000
    damping: float | None = None
    tol: float = 1e-8
    anneal: float | None = None
    beta_max: float = 1e6
    lam: float = 0.0
    seed: int = 0
    mode: str = "hard"

    def __post_init__(self) -> None:
        if self.mode not in ("hard", "soft"):
            raise ValueError(f"unknown denoiser mode {self.mode!r}")
        if self.damping is None:
            # damping mixes levels, so hard iterates are left undamped
            object.__setattr__(self, "damping", 1.0 if self.mode == "hard" else 0.7)
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.T_max < 1 or not self.tol > 0:
            raise ValueError("T_max must be >= 1 and tol positive")
        if self.anneal is not None and not self.anneal >= 1:
            raise ValueError("anneal factor must be >= 1")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")

    def beta_at(self, t: int) -> float:
        if self.anneal is None:
            return self.beta
        return min(self.beta * self.anneal**t, self.beta_max)


@dataclass
class AMPState:
    m_bar: np.ndarray
    v: np.ndarray
    V_mu: np.ndarray
    theta_mu: np.ndarray
    Sigma: np.ndarray
    R: np.ndarray
    t: int = 0


@dataclass
class AMPResult:
    w_hat: np.ndarray
    gen_error: float
    converged: bool
    iterations: int
    trajectory: list[tuple[int, float, float]] = field(repr=False)
    seed: int = 0
    message: str = ""
    state: AMPState | None = field(default=None, repr=False)

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "converged": self.converged,
            "iterations": self.iterations,
            "gen_error": self.gen_error,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary())

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,V_mean,E_emp\n")
        for t, v, e in self.trajectory:
            buf.write(f"{t},{v!r},{e!r}\n")
        return buf.getvalue()


def population_derivative(u: np.ndarray, theta: np.ndarray, cb: Codebook) -> np.ndarray:
    """Per-site jump-comb derivative for a centred Gaussian field of the empirical scale."""
    h = math.sqrt(float(np.mean(u * u)))
    if h == 0.0:
        return np.zeros_like(u)
    return sb.norm_pdf(np.outer(theta, cb.thresholds) / h) @ cb.gaps / h


def _denoise(u, theta, cb: Codebook | None, beta: float, mode: str):
    if cb is None:
        return u / theta, 1.0 / theta
    if mode == "soft":
        return sb.phi_beta(u, theta, cb, beta)
    return quantize_vec(u / theta, cb), population_derivative(u, theta, cb)


def _require_finite(arr: np.ndarray, t: int, what: str) -> None:
    bad = ~np.isfinite(arr)
    if bad.any():
        raise AMPDivergence(t, int(np.flatnonzero(bad)[0]), what)


def amp_step(
    s: AMPState,
    d: Dataset,
    cb: Codebook | None,
    cfg: AMPConfig,
    X2: np.ndarray | None = None,
) -> AMPState:
    """One sweep of the six AMP updates, with damping on ``(m_bar, v)``."""
    X, y = d.X, d.y
    if s.m_bar.shape != (X.shape[1],) or s.V_mu.shape != (X.shape[0],):
        raise ValueError("state dimensions do not match the dataset")
    if X2 is None:
        X2 = X * X
    t = s.t + 1
    V = X2 @ s.v
    Sigma = 1.0 / (X2.T @ (1.0 / (V + 1.0)))
    theta = X @ s.m_bar - V * (y - s.theta_mu) / (s.V_mu + 1.0)
    R = s.m_bar + Sigma * (X.T @ ((y - theta) / (V + 1.0)))
    _require_finite(Sigma, t, "Sigma")
    _require_finite(R, t, "R")
    mean, dmean = _denoise(R / Sigma, cfg.lam + 1.0 / Sigma, cb, cfg.beta_at(t), cfg.mode)
    g = cfg.damping
    m_bar = g * mean + (1 - g) * s.m_bar
    v = g * dmean + (1 - g) * s.v
    _require_finite(m_bar, t, "m_bar")
    _require_finite(v, t, "v")
    return AMPState(m_bar, v, V, theta, Sigma, R, t)


def initial_state(d: Dataset, seed: int) -> AMPState:
    N, M = d.N, d.M
    return AMPState(
        m_bar=normal_stream(seed, STREAM_AMP_INIT, N),
        v=np.ones(N),
        V_mu=np.zeros(M),
        theta_mu=np.zeros(M),
        Sigma=np.ones(N),
        R=np.zeros(N),
    )


def hard_estimate(s: AMPState, cb: Codebook | None, lam: float) -> np.ndarray:
    """Quantized minimizer of the final single-site problems, ``quantize(R / (1 + lambda Sigma))``."""
    u = s.R / (1.0 + lam * s.Sigma)
    return u if cb is None else quantize_vec(u, cb)


def empirical_gen_error(w_hat, w0, sigma2: float) -> float:
    """``(sigma2 + ||w_hat - w0||^2 / N) / 2`` for a design with covariance ``I / N``."""
    w_hat = np.asarray(w_hat, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    if w_hat.shape != w0.shape:
        raise ValueError(f"length mismatch {w_hat.shape} vs {w0.shape}")
    return 0.5 * (sigma2 + float(np.sum((w_hat - w0) ** 2)) / w0.size)


def energy(w, d: Dataset, cb: Codebook | None, lam: float) -> float:
    """Regularized empirical risk of the quantized parameter ``phi(w)``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (d.N,):
        raise ValueError(f"expected a vector of length {d.N}, got {w.shape}")
    q = w if cb is None else quantize_vec(w, cb)
    r = d.y - d.X @ q
    return 0.5 * float(r @ r) + 0.5 * lam * float(q @ q)


def amp_run(
    d: Dataset,
    cb: Codebook | None,
    cfg: AMPConfig = AMPConfig(),
    init: AMPState | None = None,
) -> AMPResult:
    """Run AMP until the mean squared change of ``m_bar`` is below ``tol``.

    The default start is ``m_bar ~ N(0, 1)`` (seeded by ``cfg.seed``) with
    ``v = 1``; ``init`` overrides it, e.g. ``m_bar = v = 0`` to line up with
    a state-evolution trajectory started from ``(V, E) = (0, rho)``.
    """
    if d.M < 1 or d.N < 1:
        raise ValueError("AMP needs at least one sample and one parameter")
    X2 = d.X * d.X
    s = initial_state(d, cfg.seed) if init is None else init
    traj = []
    converged = False
    message = ""
    try:
        for _ in range(cfg.T_max):
            new = amp_step(s, d, cb, cfg, X2)
            delta = float(np.mean((new.m_bar - s.m_bar) ** 2))
            s = new
            traj.append((s.t, float(np.mean(s.v)), float(np.mean((d.w0 - s.m_bar) ** 2))))
            if delta < cfg.tol:
                converged = True
                break
    except AMPDivergence as exc:
        message = str(exc)
    if s.t == 0:
        w_hat = s.m_bar if cb is None else quantize_vec(s.m_bar, cb)
    else:
        w_hat = hard_estimate(s, cb, cfg.lam)
    eg = empirical_gen_error(w_hat, d.w0, d.sigma2)
    if not math.isfinite(eg):
        eg = math.nan
    return AMPResult(w_hat, eg, converged, s.t, traj, cfg.seed, message, s)
