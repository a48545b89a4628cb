"""Scalar effective problem ``argmin_{d in levels} theta_hat d^2 / 2 - u d`` and its Gaussian averages.

Every average over ``z ~ N(0, 1)`` of the staircase denoiser ``phi*(h z)``
reduces to normal cdf/pdf values at the scaled thresholds
``theta_hat * c_k / h``.  Passing ``cb=None`` selects the unquantized ridge
denoiser ``u / theta_hat`` so the same solvers cover the continuous baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import erfc

from .codebook import Codebook, quantize_vec

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_TINY_H = 1e-300


@dataclass(frozen=True)
class FieldContext:
    h: float
    theta_hat: float

    def __post_init__(self) -> None:
        if not (self.h >= 0 and self.theta_hat > 0):
            raise ValueError(f"invalid field context h={self.h}, theta_hat={self.theta_hat}")


def norm_pdf(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


def norm_cdf(x):
    return 0.5 * erfc(-np.asarray(x, dtype=float) / _SQRT2)


def norm_sf(x):
    return 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)


def _cell_probs(edges: np.ndarray) -> np.ndarray:
    """Gaussian mass of the cells between consecutive ``edges`` (with +-inf appended).

    Cells in the upper half are differenced through the survival function so
    tail cells keep full relative accuracy.
    """
    lo = np.concatenate(([-np.inf], edges))
    hi = np.concatenate((edges, [np.inf]))
    upper = lo >= 0
    p = np.where(upper, norm_sf(lo) - norm_sf(hi), norm_cdf(hi) - norm_cdf(lo))
    return np.maximum(p, 0.0)


def _scaled_thresholds(ctx: FieldContext, cb: Codebook) -> np.ndarray:
    return ctx.theta_hat * cb.thresholds / max(ctx.h, _TINY_H)


def phi_star(u, ctx: FieldContext, cb: Codebook | None):
    """Minimizer over the levels of ``theta_hat d^2 / 2 - u d``, i.e. ``quantize(u / theta_hat)``."""
    if cb is None:
        return np.asarray(u, dtype=float) / ctx.theta_hat
    out = quantize_vec(np.asarray(u, dtype=float) / ctx.theta_hat, cb)
    return float(out) if np.ndim(out) == 0 else out


def phi_star_argmin(u: float, theta_hat: float, cb: Codebook) -> float:
    """Reference minimizer by explicit energy comparison (ties to smaller |d|, then +)."""
    energies = 0.5 * theta_hat * cb.levels**2 - u * cb.levels
    best = energies.min()
    cand = cb.levels[energies == best]
    return float(sorted(cand, key=lambda d: (abs(d), -d))[0])


def phi_beta(u, theta_hat, cb: Codebook, beta: float):
    """Mean and u-derivative of the Gibbs measure ``exp(-beta (theta_hat d^2/2 - u d))`` over the levels.

    ``u`` and ``theta_hat`` broadcast against each other.  Exponents are
    shifted by their maximum so large ``beta`` cannot overflow.

    Returns:
        ``(mean, dmean_du)`` with ``dmean_du = beta * Var(d)``.
    """
    u = np.asarray(u, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    d = cb.levels
    expo = -beta * (0.5 * theta_hat[..., None] * d**2 - u[..., None] * d)
    expo = expo - expo.max(axis=-1, keepdims=True)
    w = np.exp(expo)
    w /= w.sum(axis=-1, keepdims=True)
    mean = w @ d
    var = np.maximum(w @ d**2 - mean**2, 0.0)
    dmean = beta * var
    if mean.ndim == 0:
        return float(mean), float(dmean)
    return mean, dmean


def gauss_second_moment(ctx: FieldContext, cb: Codebook | None) -> float:
    """``E_z[phi*(h z)^2]``."""
    if cb is None:
        return (ctx.h / ctx.theta_hat) ** 2
    probs = _cell_probs(_scaled_thresholds(ctx, cb))
    return float(probs @ cb.levels**2)


def gauss_first_moment(ctx: FieldContext, cb: Codebook | None) -> float:
    """``E_z[phi*(h z)]``; zero for symmetric codebooks up to the tie convention."""
    if cb is None:
        return 0.0
    probs = _cell_probs(_scaled_thresholds(ctx, cb))
    return float(probs @ cb.levels)


def gauss_chi(ctx: FieldContext, cb: Codebook | None) -> float:
    """``E_z[d phi*(u)/du at u = h z]`` as the sum of Gaussian-weighted jumps, divided by ``h``."""
    if cb is None:
        return 1.0 / ctx.theta_hat
    h = max(ctx.h, _TINY_H)
    return float(np.sum(cb.gaps * norm_pdf(_scaled_thresholds(ctx, cb))) / h)


def gauss_at_integral(ctx: FieldContext, cb: Codebook | None) -> float:
    """Squared-derivative average entering the replica-symmetry stability test.

    The staircase derivative is a sum of point masses; each threshold
    contributes its squared jump times the field density there.  For the
    ridge denoiser this is the ordinary ``1 / theta_hat**2``.
    """
    if cb is None:
        return 1.0 / ctx.theta_hat**2
    h = max(ctx.h, _TINY_H)
    return float(np.sum(cb.gaps**2 * norm_pdf(_scaled_thresholds(ctx, cb))) / h)


def quadrature_oracle(
    f: Callable[[np.ndarray], np.ndarray],
    nodes: int = 64,
    breakpoints: Sequence[float] | None = None,
    cutoff: float = 14.0,
    panel: float = 0.5,
) -> float:
    """Numerical ``E_z[f(z)]`` for ``z ~ N(0, 1)``, independent of the closed forms.

    Without ``breakpoints`` this is plain Gauss-Hermite with the probabilists'
    weight.  With breakpoints (discontinuities of ``f``) the line is cut at
    each of them, truncated at ``+-cutoff`` and integrated panel by panel with
    Gauss-Legendre so that every panel sees a smooth integrand.
    """
    if nodes < 16:
        raise ValueError("nodes must be >= 16")
    if breakpoints is None:
        x, w = hermegauss(nodes)
        return float(np.sum(w * f(x)) / math.sqrt(2.0 * math.pi))
    cuts = sorted({-cutoff, cutoff, *(float(b) for b in breakpoints if abs(b) < cutoff)})
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        n_panels = max(1, int(math.ceil((b - a) / panel)))
        edges = np.linspace(a, b, n_panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            x = 0.5 * (hi + lo) + half * xg
            total += half * float(np.sum(wg * f(x) * norm_pdf(x)))
    return total


def field_breakpoints(ctx: FieldContext, cb: Codebook) -> np.ndarray:
    """Values of ``z`` where ``phi*(h z)`` jumps."""
    return _scaled_thresholds(ctx, cb)


def gauss_at_integral_beta(ctx: FieldContext, cb: Codebook, beta: float, nodes: int = 48) -> float:
    """Finite-temperature probe ``E_z[(d mean/du)^2]`` of the stability integrand.

    Grows without bound as ``beta`` increases; useful only to gauge how
    sensitive the stability verdict is to the point-mass prescription.
    """
    width = 1.0 / (beta * max(cb.gaps.min(), 1e-300) * ctx.theta_hat / max(ctx.h, _TINY_H))
    panel = min(0.5, max(width, 1e-4))
    return quadrature_oracle(
        lambda z: phi_beta(ctx.h * z, ctx.theta_hat, cb, beta)[1] ** 2,
        nodes=nodes,
        breakpoints=field_breakpoints(ctx, cb),
        panel=panel,
    )
