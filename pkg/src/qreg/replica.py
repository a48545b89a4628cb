"""Replica-symmetric saddle point of quantized ridge regression.

The order parameters ``(Q, m, chi)`` are the self-overlap of the quantized
estimate, its overlap with the teacher and the susceptibility.  Their
conjugates follow in closed form,

    Q_hat = m_hat = alpha / (1 + chi)
    chi_hat = alpha (Q - 2 m + rho + sigma2) / (1 + chi)**2
    h = sqrt(m_hat**2 rho + chi_hat),  theta_hat = Q_hat + lambda

and the new ``(Q, m, chi)`` are Gaussian averages of the scalar denoiser
(see :mod:`qreg.single_body`).  The fixed point is found by damped
iteration and classified as RS or RSB by the local stability value.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import single_body as sb
from .codebook import Codebook

LAMBDA_FLOOR = 1e-8
DIVERGENCE_BOUND = 1e12
MIN_DAMPING = 2.0**-8
OSCILLATION_WINDOW = 20

CSV_HEADER = (
    "scheme,n_p,b,omega,alpha,rho,sigma2,lambda,Q,m,chi,E_g,stability,phase,iters,residual"
)


class Phase(str, enum.Enum):
    RS = "RS"
    RSB = "RSB"
    NON_CONVERGED = "NonConverged"


class Divergence(ArithmeticError):
    pass


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    rho: float = 1.0
    sigma2: float = 0.0
    lam: float = 0.0

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.sigma2 >= 0:
            raise ValueError(f"sigma2 must be non-negative, got {self.sigma2}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    @property
    def lam_eff(self) -> float:
        """Ridge coefficient actually used; zero is lifted to a tiny floor."""
        return max(self.lam, LAMBDA_FLOOR)


@dataclass(frozen=True)
class SaddleState:
    Q: float
    m: float
    chi: float
    Q_hat: float = math.nan
    m_hat: float = math.nan
    chi_hat: float = math.nan
    h: float = math.nan
    theta_hat: float = math.nan

    def vector(self) -> np.ndarray:
        return np.array([self.Q, self.m, self.chi])


@dataclass(frozen=True)
class ReplicaSolution:
    params: ModelParams
    codebook: Codebook | None
    state: SaddleState
    gen_error: float
    stability: float
    phase: Phase
    iterations: int
    residual: float
    history: list = field(default_factory=list, repr=False, compare=False)

    @property
    def converged(self) -> bool:
        return self.phase is not Phase.NON_CONVERGED

    def csv_row(self) -> str:
        cb, p, s = self.codebook, self.params, self.state
        if cb is None:
            head = "ridge,,,,"
        else:
            head = f"{cb.scheme.value},{cb.n_p},{cb.bits!r},{cb.omega!r},"
        vals = (p.alpha, p.rho, p.sigma2, p.lam, s.Q, s.m, s.chi, self.gen_error, self.stability)
        return (
            head
            + ",".join(repr(float(v)) for v in vals)
            + f",{self.phase.value},{self.iterations},{float(self.residual)!r}"
        )


def gen_error(s: SaddleState, p: ModelParams) -> float:
    """``(Q - 2 m + rho + sigma2) / 2``."""
    return 0.5 * (s.Q - 2.0 * s.m + p.rho + p.sigma2)


def conjugates(Q: float, m: float, chi: float, p: ModelParams) -> SaddleState:
    """Attach conjugate parameters and the effective field to ``(Q, m, chi)``."""
    q_hat = p.alpha / (1.0 + chi)
    chi_hat = p.alpha * max(Q - 2.0 * m + p.rho + p.sigma2, 0.0) / (1.0 + chi) ** 2
    h = math.sqrt(q_hat**2 * p.rho + chi_hat)
    return SaddleState(Q, m, chi, q_hat, q_hat, chi_hat, h, q_hat + p.lam_eff)


def _check_finite(s: SaddleState) -> None:
    vals = (s.Q, s.m, s.chi)
    if not all(math.isfinite(v) and abs(v) < DIVERGENCE_BOUND for v in vals):
        raise Divergence(f"saddle iteration diverged at Q={s.Q}, m={s.m}, chi={s.chi}")


def saddle_step(s: SaddleState, p: ModelParams, cb: Codebook | None, damping: float = 1.0) -> SaddleState:
    """One (optionally damped) application of the saddle-point map.

    Raises:
        Divergence: if a component becomes non-finite or exceeds ``1e12``.
    """
    if not (math.isfinite(s.Q) and math.isfinite(s.m) and math.isfinite(s.chi)) or s.chi <= -1:
        raise Divergence("non-finite or invalid saddle state")
    cur = conjugates(s.Q, s.m, s.chi, p)
    ctx = sb.FieldContext(cur.h, cur.theta_hat)
    chi_new = sb.gauss_chi(ctx, cb)
    Q_new = sb.gauss_second_moment(ctx, cb)
    m_new = cur.m_hat * p.rho * chi_new
    g = damping
    out = conjugates(
        g * Q_new + (1 - g) * s.Q,
        g * m_new + (1 - g) * s.m,
        g * chi_new + (1 - g) * s.chi,
        p,
    )
    _check_finite(out)
    return out


def stability(s: SaddleState, p: ModelParams, cb: Codebook | None) -> float:
    """Left-hand side of the RS local-stability condition; RS requires a value below one."""
    s = conjugates(s.Q, s.m, s.chi, p)
    ctx = sb.FieldContext(s.h, s.theta_hat)
    return p.alpha / (1.0 + s.chi) ** 2 * sb.gauss_at_integral(ctx, cb)


def default_init(p: ModelParams) -> SaddleState:
    return conjugates(p.rho, 0.5 * p.rho, 0.5, p)


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.max(np.abs(new - old) / np.maximum(1.0, np.abs(old))))


def solve(
    p: ModelParams,
    cb: Codebook | None,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    init: SaddleState | None = None,
    keep_history: bool = False,
) -> ReplicaSolution:
    """Iterate :func:`saddle_step` to a fixed point and classify its phase.

    Convergence is declared when the largest component change, measured
    relative to ``max(1, |x|)``, falls below ``tol``.  The damping factor is
    halved (down to ``2**-8``) whenever the change has grown for 20
    consecutive iterations.  Divergence and iteration exhaustion yield a
    ``NonConverged`` solution instead of raising.

    ``cb=None`` solves the unquantized ridge problem with the same machinery.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    s = default_init(p) if init is None else conjugates(init.Q, init.m, init.chi, p)
    g = damping
    prev_res = math.inf
    rising = 0
    res = math.inf
    history = []
    it = 0
    try:
        for it in range(1, max_iter + 1):
            new = saddle_step(s, p, cb, g)
            res = _relative_change(new.vector(), s.vector())
            s = new
            if keep_history:
                history.append((s.Q, s.m, s.chi, res))
            if res < tol:
                break
            rising = rising + 1 if res > prev_res else 0
            if rising >= OSCILLATION_WINDOW and g > MIN_DAMPING:
                g = max(0.5 * g, MIN_DAMPING)
                rising = 0
            prev_res = res
        converged = res < tol
    except Divergence:
        converged = False
    eg = gen_error(s, p)
    try:
        stab = stability(s, p, cb)
    except (ValueError, ZeroDivisionError):
        stab = math.nan
    if not converged or not math.isfinite(stab):
        phase = Phase.NON_CONVERGED
    else:
        phase = Phase.RS if stab < 1.0 else Phase.RSB
    return ReplicaSolution(p, cb, s, eg, stab, phase, it, res, history)


def _ridge_chi(alpha: float, lam: float) -> float:
    # positive root of lam chi^2 + (alpha + lam - 1) chi - 1 = 0, cancellation-free
    b = alpha + lam - 1.0
    disc = math.sqrt(b * b + 4.0 * lam)
    if b >= 0:
        return 2.0 / (b + disc)
    return (disc - b) / (2.0 * lam)


def ridge_saddle(p: ModelParams) -> ReplicaSolution:
    """Closed-form saddle point with the identity denoiser ``u / theta_hat``.

    With ``chi = 1 / theta_hat`` the system collapses to a quadratic for
    ``chi`` and a linear equation for the generalization error,

        E_g = (lambda**2 chi**2 rho + sigma2) / 2 / (1 - alpha chi**2 / (1 + chi)**2).
    """
    lam = p.lam_eff
    chi = _ridge_chi(p.alpha, lam)
    a = p.alpha * chi**2 / (1.0 + chi) ** 2
    denom = 1.0 - a
    finite = math.isfinite(chi) and chi < DIVERGENCE_BOUND and denom > 1e-12
    if not finite:
        s = SaddleState(math.nan, math.nan, chi)
        return ReplicaSolution(p, None, s, math.nan, math.nan, Phase.NON_CONVERGED, 0, math.inf)
    eg = 0.5 * ((lam * chi) ** 2 * p.rho + p.sigma2) / denom
    m_hat = p.alpha / (1.0 + chi)
    m = m_hat * p.rho * chi
    Q = 2.0 * eg - p.rho - p.sigma2 + 2.0 * m
    s = conjugates(Q, m, chi, p)
    stab = a
    phase = Phase.RS if stab < 1.0 else Phase.RSB
    return ReplicaSolution(p, None, s, eg, stab, phase, 0, 0.0)


