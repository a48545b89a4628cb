"""Parameter sweeps behind the phase diagrams, optimal-range curves, double descent and AMP checks.

Everything here returns plain data (solutions, rows, summaries); writing CSV
or JSON is left to the caller.  Sweeps along a continuous axis warm-start each
solve from the previous grid point, which keeps the solver on one branch.
"""

from __future__ import annotations

import concurrent.futures
import enum
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import replica
from .amp import AMPConfig, amp_run
from .codebook import Codebook, QuantScheme, build
from .data import generate
from .replica import CSV_HEADER, ModelParams, Phase, ReplicaSolution


class Axis(str, enum.Enum):
    OMEGA = "omega"
    ALPHA = "alpha"
    BITS = "bits"
    LAMBDA = "lambda"
    SIGMA2 = "sigma2"


def default_omega_grid(n: int = 60, lo: float = 0.1, hi: float = 10.0) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


@dataclass(frozen=True)
class SweepSpec:
    axis: Axis
    grid: tuple
    fixed: ModelParams
    schemes: tuple[QuantScheme, ...] = (QuantScheme.UNIFORM,)
    n_p: int = 6
    omega: float = 1.0
    warm_start: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "schemes", tuple(QuantScheme(s) for s in self.schemes))
        if len(self.grid) == 0:
            raise ValueError("sweep grid is empty")
        if any(b < a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be sorted")


def _solve_row(p: ModelParams, cbs: Sequence[Codebook], params: Sequence[ModelParams], warm: bool):
    out = []
    init = None
    for cb, pp in zip(cbs, params):
        sol = replica.solve(pp, cb, init=init)
        out.append(sol)
        init = sol.state if (warm and sol.converged) else None
    return out


def _run_rows(jobs_args: list[tuple], jobs: int) -> list[list[ReplicaSolution]]:
    if jobs <= 1 or len(jobs_args) <= 1:
        return [_solve_row(*a) for a in jobs_args]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_solve_row, *zip(*jobs_args)))


def sweep(spec: SweepSpec, jobs: int = 1) -> list[ReplicaSolution]:
    """Solve along one axis for every scheme; rows come back grouped by scheme, in grid order."""
    args = []
    for scheme in spec.schemes:
        if spec.axis is Axis.BITS:
            cbs = [build(scheme, int(n), spec.omega) for n in spec.grid]
            params = [spec.fixed] * len(cbs)
            # different n_p are different problems; no continuation across them
            args.append((spec.fixed, cbs, params, False))
            continue
        cb = build(scheme, spec.n_p, spec.omega)
        if spec.axis is Axis.OMEGA:
            cbs = [build(scheme, spec.n_p, float(w)) for w in spec.grid]
            params = [spec.fixed] * len(cbs)
        else:
            key = {"alpha": "alpha", "lambda": "lam", "sigma2": "sigma2"}[spec.axis.value]
            params = [replace(spec.fixed, **{key: float(x)}) for x in spec.grid]
            cbs = [cb] * len(params)
        args.append((spec.fixed, cbs, params, spec.warm_start))
    return [sol for row in _run_rows(args, jobs) for sol in row]


@dataclass
class PhaseDiagram:
    np_list: list[int]
    omega_grid: np.ndarray
    scheme: QuantScheme
    params: ModelParams
    solutions: list[list[ReplicaSolution]] = field(repr=False)

    def phases(self) -> np.ndarray:
        return np.array([[s.phase.value for s in row] for row in self.solutions])

    def count(self, phase: Phase) -> int:
        return int(np.sum(self.phases() == phase.value))

    def phase_at(self, n_p: int, omega: float) -> Phase:
        i = self.np_list.index(n_p)
        j = int(np.argmin(np.abs(np.log(self.omega_grid) - math.log(omega))))
        return self.solutions[i][j].phase

    def render(self) -> str:
        glyph = {"RS": ".", "RSB": "#", "NonConverged": "?"}
        lines = [f"{n:4d} " + "".join(glyph[s.phase.value] for s in row)
                 for n, row in zip(self.np_list, self.solutions)]
        return "\n".join(lines)


def phase_diagram(
    np_list: Iterable[int],
    omega_grid: Sequence[float],
    p: ModelParams,
    scheme: QuantScheme | str = QuantScheme.UNIFORM,
    jobs: int = 1,
) -> PhaseDiagram:
    """One replica solution per (n_p, omega) cell, warm-started along omega within each n_p row."""
    np_list = [int(n) for n in np_list]
    omega_grid = np.asarray(omega_grid, dtype=float)
    if not np_list or omega_grid.size == 0:
        raise ValueError("phase diagram grids must be non-empty")
    scheme = QuantScheme(scheme)
    args = [(p, [build(scheme, n, float(w)) for w in omega_grid], [p] * omega_grid.size, True)
            for n in np_list]
    return PhaseDiagram(np_list, omega_grid, scheme, p, _run_rows(args, jobs))


def omega_sweep(
    np_list: Iterable[int],
    omega_grid: Sequence[float],
    p: ModelParams,
    schemes: Sequence[QuantScheme | str] = (QuantScheme.UNIFORM, QuantScheme.NONUNIFORM),
    jobs: int = 1,
) -> list[ReplicaSolution]:
    out = []
    for n in np_list:
        spec = SweepSpec(Axis.OMEGA, tuple(omega_grid), p, tuple(schemes), n_p=int(n))
        out.extend(sweep(spec, jobs))
    return out


def interior_minima(values: Sequence[float]) -> list[int]:
    v = np.asarray(values, dtype=float)
    return [i for i in range(1, len(v) - 1) if v[i] < v[i - 1] and v[i] <= v[i + 1]]


def log_curvature_at_min(x: Sequence[float], y: Sequence[float]) -> float:
    """Second derivative of ``y`` with respect to ``log x`` at the grid minimum (three-point stencil)."""
    lx = np.log(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    i = int(np.argmin(y))
    if i == 0 or i == len(y) - 1:
        return math.nan
    h1, h2 = lx[i] - lx[i - 1], lx[i + 1] - lx[i]
    return 2.0 * (h1 * y[i + 1] - (h1 + h2) * y[i] + h2 * y[i - 1]) / (h1 * h2 * (h1 + h2))


def parabolic_peak(x: Sequence[float], y: Sequence[float]) -> float:
    """Location of the maximum of ``y``, refined by a parabola through the top three points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.nanargmax(y))
    if i == 0 or i == len(y) - 1:
        return float(x[i])
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    if a >= 0:
        return float(x1)
    return float(np.clip(-b / (2 * a), x0, x2))


@dataclass
class AlphaSweep:
    alphas: np.ndarray
    ridge: list[ReplicaSolution]
    curves: dict[tuple[str, int, float], list[ReplicaSolution]]

    def ridge_peak(self) -> float:
        return parabolic_peak(self.alphas, [s.gen_error for s in self.ridge])

    def peak(self, key: tuple[str, int, float]) -> float:
        return parabolic_peak(self.alphas, [s.gen_error for s in self.curves[key]])

    def rows(self) -> list[ReplicaSolution]:
        return list(self.ridge) + [s for sols in self.curves.values() for s in sols]


def alpha_sweep(
    alphas: Sequence[float],
    p: ModelParams,
    np_list: Sequence[int],
    omega_list: Sequence[float],
    schemes: Sequence[QuantScheme | str] = (QuantScheme.UNIFORM,),
    jobs: int = 1,
) -> AlphaSweep:
    alphas = np.asarray(alphas, dtype=float)
    ridge = [replica.ridge_saddle(replace(p, alpha=float(a))) for a in alphas]
    curves = {}
    for scheme in schemes:
        scheme = QuantScheme(scheme)
        for n in np_list:
            for w in omega_list:
                spec = SweepSpec(Axis.ALPHA, tuple(alphas), p, (scheme,), n_p=int(n), omega=float(w))
                curves[(scheme.value, int(n), float(w))] = sweep(spec, jobs)
    return AlphaSweep(alphas, ridge, curves)


def bits_sweep(
    np_list: Sequence[int],
    omega: float,
    p: ModelParams,
    schemes: Sequence[QuantScheme | str] = (QuantScheme.UNIFORM, QuantScheme.NONUNIFORM),
    jobs: int = 1,
) -> tuple[list[ReplicaSolution], ReplicaSolution]:
    """Quantized solutions per integer n_p and scheme, plus the ridge reference."""
    spec = SweepSpec(Axis.BITS, tuple(int(n) for n in np_list), p, tuple(schemes), omega=omega)
    return sweep(spec, jobs), replica.ridge_saddle(p)


def optimal_omega(p: ModelParams, scheme: QuantScheme | str, n_p: int,
                  omega_grid: Sequence[float] | None = None) -> float:
    """Grid minimizer of the RS generalization error over omega."""
    grid = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    sols = sweep(SweepSpec(Axis.OMEGA, tuple(grid), p, (scheme,), n_p=n_p))
    return float(grid[int(np.argmin([s.gen_error for s in sols]))])


def derive_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


@dataclass
class EnsembleSummary:
    n_runs: int
    N: int
    mean: float
    std_error: float | None
    replica_gen_error: float
    replica_phase: str
    agree: bool | None
    runs: list[dict] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "N": self.N,
            "mean_gen_error": self.mean,
            "std_error": self.std_error,
            "replica_gen_error": self.replica_gen_error,
            "replica_phase": self.replica_phase,
            "agree": self.agree,
        }

    def runs_csv(self) -> str:
        buf = io.StringIO()
        buf.write("run,seed,converged,iterations,gen_error\n")
        for i, r in enumerate(self.runs):
            buf.write(f"{i},{r['seed']},{int(r['converged'])},{r['iterations']},{r['gen_error']!r}\n")
        return buf.getvalue()


def amp_ensemble(
    p: ModelParams,
    cb: Codebook,
    n_runs: int,
    N: int,
    cfg: AMPConfig = AMPConfig(),
    master_seed: int = 0,
    rel_tol: float = 0.05,
) -> EnsembleSummary:
    """Mean and standard error of AMP's empirical generalization error over independent instances.

    Agreement with the replica prediction means the difference is within
    ``max(3 * std_error, rel_tol * |replica|)``; it is only asserted in the RS
    phase and reported as ``None`` otherwise or when fewer than two runs exist.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be positive")
    M = int(round(p.alpha * N))
    runs = []
    for i in range(n_runs):
        seed = derive_seed(master_seed, i)
        d = generate(N, M, p.rho, p.sigma2, seed)
        res = amp_run(d, cb, replace(cfg, seed=seed, lam=p.lam))
        runs.append(res.summary())
    egs = np.array([r["gen_error"] for r in runs])
    mean = float(egs.mean())
    se = float(egs.std(ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else None
    theory = replica.solve(p, cb)
    agree = None
    if se is not None and theory.phase is Phase.RS:
        agree = abs(mean - theory.gen_error) <= max(3 * se, rel_tol * abs(theory.gen_error))
    return EnsembleSummary(n_runs, N, mean, se, theory.gen_error, theory.phase.value, agree, runs)


def solutions_csv(sols: Iterable[ReplicaSolution]) -> str:
    return CSV_HEADER + "\n" + "".join(s.csv_row() + "\n" for s in sols)
