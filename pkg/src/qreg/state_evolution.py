"""State evolution of AMP for quantized regression.

The macroscopic AMP trajectory is summarized by ``V`` (average denoiser
derivative) and ``E`` (mean squared estimation error).  One step reads

    xi = sqrt(alpha**2 rho + alpha (sigma2 + E)) / (1 + V)
    Lambda = lambda + alpha / (1 + V)
    V' = E_z[d phi*(xi z, Lambda) / d(xi z)]
    E' = rho - 2 rho alpha / (xi (1 + V)) E_z[d phi*(xi z, Lambda) / dz] + E_z[phi*(xi z, Lambda)**2]

and since ``E_z[d phi*(xi z)/dz] = xi V'`` the middle term is
``2 rho alpha V' / (1 + V)``.  Fixed points coincide with the replica
saddle point under ``V <-> chi`` and ``E <-> Q - 2 m + rho``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

from . import single_body as sb
from .codebook import Codebook
from .replica import DIVERGENCE_BOUND, Divergence, ModelParams


@dataclass(frozen=True)
class SEState:
    t: int
    V: float
    E: float
    xi: float
    Lambda: float


@dataclass
class SETrajectory:
    states: list[SEState]
    converged: bool
    params: ModelParams
    codebook: Codebook | None = field(repr=False)

    @property
    def final(self) -> SEState:
        return self.states[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,V,E,xi,Lambda\n")
        for s in self.states:
            buf.write(f"{s.t},{s.V!r},{s.E!r},{s.xi!r},{s.Lambda!r}\n")
        return buf.getvalue()


def make_state(t: int, V: float, E: float, p: ModelParams) -> SEState:
    xi = math.sqrt(p.alpha**2 * p.rho + p.alpha * max(p.sigma2 + E, 0.0)) / (1.0 + V)
    return SEState(t, V, E, xi, p.lam_eff + p.alpha / (1.0 + V))


def initial_state(p: ModelParams) -> SEState:
    return make_state(0, 0.0, p.rho, p)


def se_step(s: SEState, p: ModelParams, cb: Codebook | None, damping: float = 1.0) -> SEState:
    ctx = sb.FieldContext(s.xi, s.Lambda)
    V_new = sb.gauss_chi(ctx, cb)
    dz_term = s.xi * V_new  # E_z[d phi*(xi z)/dz] via Stein
    E_new = (
        p.rho
        - 2.0 * p.rho * p.alpha / (s.xi * (1.0 + s.V)) * dz_term
        + sb.gauss_second_moment(ctx, cb)
    )
    V_new = damping * V_new + (1 - damping) * s.V
    E_new = damping * E_new + (1 - damping) * s.E
    if not (math.isfinite(V_new) and math.isfinite(E_new)) or max(abs(V_new), abs(E_new)) > DIVERGENCE_BOUND:
        raise Divergence(f"state evolution diverged at t={s.t + 1}")
    return make_state(s.t + 1, V_new, E_new, p)


def se_run(
    p: ModelParams,
    cb: Codebook | None,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    damping: float = 1.0,
    init: SEState | None = None,
) -> SETrajectory:
    """Iterate :func:`se_step` from ``(V, E) = (0, rho)`` until the relative change drops below ``tol``."""
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    s = initial_state(p) if init is None else make_state(0, init.V, init.E, p)
    states = [s]
    converged = False
    try:
        for _ in range(max_iter):
            new = se_step(s, p, cb, damping)
            states.append(new)
            change = max(abs(new.V - s.V) / max(1.0, abs(s.V)), abs(new.E - s.E) / max(1.0, abs(s.E)))
            s = new
            if change < tol:
                converged = True
                break
    except Divergence:
        converged = False
    return SETrajectory(states, converged, p, cb)


def amp_fixed_point_stability(s: SEState, p: ModelParams, cb: Codebook | None) -> float:
    """Linear-stability value of the AMP fixed point; below one means stable."""
    ctx = sb.FieldContext(s.xi, s.Lambda)
    return p.alpha / (1.0 + s.V) ** 2 * sb.gauss_at_integral(ctx, cb)
