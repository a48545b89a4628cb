"""Quantizer codebooks: uniform and log-domain (non-uniform) partitions of [-omega, omega]."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np


class QuantScheme(str, enum.Enum):
    UNIFORM = "uniform"
    NONUNIFORM = "nonuniform"


@dataclass(frozen=True)
class JumpComb:
    """Threshold locations and jump sizes of the staircase quantizer."""

    locations: np.ndarray
    sizes: np.ndarray

    def __len__(self) -> int:
        return len(self.locations)

    def pairs(self) -> list[tuple[float, float]]:
        return [(float(c), float(s)) for c, s in zip(self.locations, self.sizes)]


@dataclass(frozen=True, eq=False)
class Codebook:
    """An immutable set of quantization levels with midpoint decision thresholds.

    Levels are sorted ascending and symmetric about zero, spanning exactly
    ``[-omega, omega]``.  ``thresholds[k-1]`` separates ``levels[k-1]`` and
    ``levels[k]``.
    """

    scheme: QuantScheme
    n_p: int
    omega: float
    levels: np.ndarray
    thresholds: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=float)
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        thresholds = 0.5 * (levels[:-1] + levels[1:])
        thresholds.setflags(write=False)
        object.__setattr__(self, "thresholds", thresholds)
        if len(levels) != self.n_p + 1:
            raise ValueError(f"expected {self.n_p + 1} levels, got {len(levels)}")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("levels must be strictly increasing")

    @property
    def bits(self) -> float:
        return bits_of(self.n_p)

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.levels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return (
            self.scheme == other.scheme
            and self.n_p == other.n_p
            and self.omega == other.omega
            and np.array_equal(self.levels, other.levels)
        )

    def __hash__(self) -> int:
        return hash((self.scheme, self.n_p, self.omega, self.levels.tobytes()))

    def __repr__(self) -> str:
        return f"Codebook({self.scheme.value}, n_p={self.n_p}, omega={self.omega:g})"

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "n_p": self.n_p,
            "omega": self.omega,
            "levels": [float(x) for x in self.levels],
            "thresholds": [float(x) for x in self.thresholds],
        }

    def to_json(self) -> str:
        # repr-based float formatting round-trips doubles exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> Codebook:
        cb = cls(QuantScheme(data["scheme"]), int(data["n_p"]), float(data["omega"]),
                 np.asarray(data["levels"], dtype=float))
        if "thresholds" in data and not np.array_equal(cb.thresholds, np.asarray(data["thresholds"])):
            raise ValueError("thresholds inconsistent with levels")
        return cb

    @classmethod
    def from_json(cls, text: str) -> Codebook:
        return cls.from_dict(json.loads(text))


def _check_args(n_p: int, omega: float) -> None:
    if int(n_p) != n_p or n_p < 1:
        raise ValueError(f"n_p must be a positive integer, got {n_p!r}")
    if not (omega > 0 and math.isfinite(omega)):
        raise ValueError(f"omega must be positive and finite, got {omega!r}")


def _symmetrize(positive_edges: list[float], with_zero: bool) -> np.ndarray:
    neg = [-x for x in reversed(positive_edges)]
    middle = [0.0] if with_zero else []
    return np.array(neg + middle + positive_edges, dtype=float)


def build_uniform(n_p: int, omega: float) -> Codebook:
    """Equal-width partition: levels ``-omega + k * 2 omega / n_p``."""
    _check_args(n_p, omega)
    n_p = int(n_p)
    width = 2.0 * omega / n_p
    # build the positive half and mirror it so symmetry holds bit-exactly
    if n_p % 2 == 0:
        half = [k * width for k in range(1, n_p // 2 + 1)]
    else:
        half = [(k + 0.5) * width for k in range(0, (n_p + 1) // 2)]
    half[-1] = float(omega)
    levels = _symmetrize(half, with_zero=(n_p % 2 == 0))
    return Codebook(QuantScheme.UNIFORM, n_p, float(omega), levels)


def nonuniform_delta0(n_p: int, omega: float) -> float:
    k = 2 if n_p % 2 == 0 else 3
    return omega / (2.0 ** ((n_p + k) / 2.0) - k)


def build_nonuniform(n_p: int, omega: float) -> Codebook:
    """Log-domain partition whose widths double moving away from zero.

    With ``d0 = nonuniform_delta0(n_p, omega)``: for odd ``n_p`` the central
    cell is ``[-d0, d0]`` followed by per-side widths ``4 d0, 8 d0, ...``; for
    even ``n_p`` zero is an edge and the per-side widths are
    ``2 d0, 4 d0, ..., 2**(n_p/2) d0``.  Both reach ``omega`` exactly.
    """
    _check_args(n_p, omega)
    n_p = int(n_p)
    d0 = nonuniform_delta0(n_p, omega)
    if n_p % 2 == 0:
        half = [d0 * (2.0 ** (j + 1) - 2.0) for j in range(1, n_p // 2 + 1)]
    else:
        half = [d0 * (2.0 ** (j + 2) - 3.0) for j in range(0, (n_p + 1) // 2)]
    half[-1] = float(omega)
    levels = _symmetrize(half, with_zero=(n_p % 2 == 0))
    return Codebook(QuantScheme.NONUNIFORM, n_p, float(omega), levels)


def build(scheme: QuantScheme | str, n_p: int, omega: float) -> Codebook:
    scheme = QuantScheme(scheme)
    if scheme is QuantScheme.UNIFORM:
        return build_uniform(n_p, omega)
    return build_nonuniform(n_p, omega)


def bits_of(n_p: int) -> float:
    if n_p < 1:
        raise ValueError("n_p must be >= 1")
    return math.log2(n_p + 2)


def np_of_bits(b: float) -> int:
    if not b >= math.log2(3) - 1e-12:
        raise ValueError(f"b must be at least log2(3), got {b!r}")
    return max(1, int(round(2.0 ** b)) - 2)


def _level_index(w: np.ndarray, cb: Codebook) -> np.ndarray:
    left = np.searchsorted(cb.thresholds, w, side="left")
    right = np.searchsorted(cb.thresholds, w, side="right")
    # exact threshold hits go to the level nearer zero; a hit on 0 goes up
    return np.where(w > 0, left, right)


def quantize_vec(w, cb: Codebook) -> np.ndarray:
    """Componentwise nearest-level map with clipping at +-omega."""
    w = np.asarray(w, dtype=float)
    if w.size and not np.all(np.isfinite(w)):
        raise ValueError("quantize: non-finite input")
    return cb.levels[_level_index(w, cb)]


def quantize(w: float, cb: Codebook) -> float:
    if not math.isfinite(w):
        raise ValueError(f"quantize: non-finite input {w!r}")
    return float(quantize_vec(np.array([w]), cb)[0])


def jumps(cb: Codebook) -> JumpComb:
    return JumpComb(cb.thresholds.copy(), np.diff(cb.levels))
