"""Command-line entry point: ``qreg <subcommand> [flags]``.

Every flag may also be given in a JSON file passed with ``--config``; keys
are flag names without the leading dashes (``np``, ``omega``, ``lambda``,
``np-list`` ...).  Flags on the command line override the file.

Exit codes: 0 success, 2 invalid configuration, 3 non-convergence under
``--strict``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import experiments as ex
from . import replica
from .amp import AMPConfig, amp_run, energy, empirical_gen_error
from .codebook import QuantScheme, build
from .data import generate
from .oracle import enumerate_min
from .replica import ModelParams, Phase
from .state_evolution import amp_fixed_point_stability, se_run

log = logging.getLogger("qreg")

EXIT_INVALID = 2
EXIT_NONCONVERGED = 3

DEFAULTS = {
    "scheme": "uniform",
    "np": 6,
    "omega": 1.0,
    "alpha": 1.5,
    "rho": 1.0,
    "sigma2": 1e-4,
    "lambda": 0.0,
    "seed": 0,
    "np-list": "1-30",
    "omega-grid": "0.1,10,60",
    "omega-list": "2,4,8,16",
    "alpha-grid": "0.3,2.0,0.01",
    "schemes": "uniform,nonuniform",
    "N": 2500,
    "M": None,
    "runs": 100,
    "beta": 100.0,
    "T-max": 1000,
    "damping": None,
    "mode": "hard",
    "jobs": 1,
    "trajectory": None,
    "tol": 1e-10,
}


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _log_grid(text: str) -> np.ndarray:
    lo, hi, n = str(text).split(",")
    return ex.default_omega_grid(int(n), float(lo), float(hi))


def _step_grid(text: str) -> np.ndarray:
    lo, hi, step = (float(x) for x in str(text).split(","))
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON file with default flag values")
    sp.add_argument("--scheme", choices=["uniform", "nonuniform", "ridge"])
    sp.add_argument("--np", type=int, dest="np")
    sp.add_argument("--omega", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--lambda", type=float, dest="lambda")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--strict", action="store_true", help="exit 3 on non-convergence")
    sp.add_argument("--jobs", type=int, help="worker processes for grid sweeps")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="replica saddle point at one parameter point")
    _add_common(sp)
    sp.add_argument("--tol", type=float)

    sp = sub.add_parser("phase", help="RS/RSB phase diagram on the (n_p, omega) grid")
    _add_common(sp)
    sp.add_argument("--np-list", dest="np-list")
    sp.add_argument("--omega-grid", dest="omega-grid", help="lo,hi,count (log-spaced)")

    sp = sub.add_parser("sweep-omega", help="generalization error versus omega")
    _add_common(sp)
    sp.add_argument("--np-list", dest="np-list")
    sp.add_argument("--omega-grid", dest="omega-grid")
    sp.add_argument("--schemes")

    sp = sub.add_parser("sweep-alpha", help="generalization error versus alpha, with ridge baseline")
    _add_common(sp)
    sp.add_argument("--alpha-grid", dest="alpha-grid", help="lo,hi,step")
    sp.add_argument("--omega-list", dest="omega-list")
    sp.add_argument("--np-list", dest="np-list")
    sp.add_argument("--schemes")

    sp = sub.add_parser("sweep-bits", help="generalization error versus n_p (bits)")
    _add_common(sp)
    sp.add_argument("--np-list", dest="np-list")
    sp.add_argument("--schemes")

    sp = sub.add_parser("se", help="state-evolution trajectory")
    _add_common(sp)
    sp.add_argument("--tol", type=float)

    for name, helptext in (("amp", "one AMP run on a synthetic instance"),
                           ("amp-ensemble", "AMP over independent instances vs replica")):
        sp = sub.add_parser(name, help=helptext)
        _add_common(sp)
        sp.add_argument("--N", type=int, dest="N")
        sp.add_argument("--beta", type=float)
        sp.add_argument("--T-max", type=int, dest="T-max")
        sp.add_argument("--damping", type=float)
        sp.add_argument("--mode", choices=["hard", "soft"])
        if name == "amp":
            sp.add_argument("--trajectory", help="per-iteration CSV output path")
        else:
            sp.add_argument("--runs", type=int)

    sp = sub.add_parser("oracle", help="exhaustive minimizer on a tiny instance")
    _add_common(sp)
    sp.add_argument("--N", type=int, dest="N")
    sp.add_argument("--M", type=int, dest="M")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, the ``--config`` file and explicit flags (highest priority)."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key, val in vars(args).items():
        if val is not None and key in DEFAULTS:
            cfg[key] = val
    return cfg


def _params(cfg: dict) -> ModelParams:
    return ModelParams(float(cfg["alpha"]), float(cfg["rho"]), float(cfg["sigma2"]), float(cfg["lambda"]))


def _codebook(cfg: dict):
    if cfg["scheme"] == "ridge":
        return None
    return build(cfg["scheme"], int(cfg["np"]), float(cfg["omega"]))


def _schemes(cfg: dict) -> list[QuantScheme]:
    return [QuantScheme(s.strip()) for s in str(cfg["schemes"]).split(",") if s.strip()]


def _amp_config(cfg: dict) -> AMPConfig:
    return AMPConfig(beta=float(cfg["beta"]), T_max=int(cfg["T-max"]), damping=cfg["damping"],
                     lam=float(cfg["lambda"]), seed=int(cfg["seed"]), mode=cfg["mode"])


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(args: argparse.Namespace) -> int:
    cfg = resolve(args)
    p = _params(cfg)
    jobs = int(cfg["jobs"])
    ok = True
    cmd = args.command

    if cmd == "solve":
        cb = _codebook(cfg)
        sol = replica.solve(p, cb, tol=float(cfg["tol"]))
        ok = sol.converged
        _emit(ex.solutions_csv([sol]), args.out)

    elif cmd == "phase":
        if cfg["scheme"] == "ridge":
            raise ConfigError("phase diagrams need a quantized scheme")
        pd = ex.phase_diagram(_int_list(cfg["np-list"]), _log_grid(cfg["omega-grid"]), p,
                              cfg["scheme"], jobs=jobs)
        sols = [s for row in pd.solutions for s in row]
        ok = all(s.converged for s in sols)
        log.info("RS=%d RSB=%d NonConverged=%d", pd.count(Phase.RS), pd.count(Phase.RSB),
                 pd.count(Phase.NON_CONVERGED))
        log.info("\n%s", pd.render())
        _emit(ex.solutions_csv(sols), args.out)

    elif cmd == "sweep-omega":
        sols = ex.omega_sweep(_int_list(cfg["np-list"]), _log_grid(cfg["omega-grid"]), p,
                              _schemes(cfg), jobs=jobs)
        ok = all(s.converged for s in sols)
        _emit(ex.solutions_csv(sols), args.out)

    elif cmd == "sweep-alpha":
        res = ex.alpha_sweep(_step_grid(cfg["alpha-grid"]), p, _int_list(cfg["np-list"]),
                             _float_list(cfg["omega-list"]), _schemes(cfg), jobs=jobs)
        rows = res.rows()
        ok = all(s.converged for s in rows)
        log.info("ridge peak at alpha=%.4f", res.ridge_peak())
        for key in res.curves:
            log.info("%s n_p=%d omega=%g peak at alpha=%.4f", *key, res.peak(key))
        _emit(ex.solutions_csv(rows), args.out)

    elif cmd == "sweep-bits":
        sols, ridge = ex.bits_sweep(_int_list(cfg["np-list"]), float(cfg["omega"]), p,
                                    _schemes(cfg), jobs=jobs)
        ok = all(s.converged for s in sols)
        _emit(ex.solutions_csv([*sols, ridge]), args.out)

    elif cmd == "se":
        cb = _codebook(cfg)
        traj = se_run(p, cb, tol=min(float(cfg["tol"]), 1e-12))
        ok = traj.converged
        log.info("AMP fixed-point stability %.6g", amp_fixed_point_stability(traj.final, p, cb))
        _emit(traj.to_csv(), args.out)

    elif cmd == "amp":
        cb = _codebook(cfg)
        N = int(cfg["N"])
        d = generate(N, int(round(p.alpha * N)), p.rho, p.sigma2, int(cfg["seed"]))
        res = amp_run(d, cb, _amp_config(cfg))
        ok = res.converged
        if cfg.get("trajectory"):
            _emit(res.trajectory_csv(), cfg["trajectory"])
        _emit(json.dumps(res.summary()) + "\n", args.out)

    elif cmd == "amp-ensemble":
        cb = _codebook(cfg)
        if cb is None:
            raise ConfigError("amp-ensemble needs a quantized scheme")
        summary = ex.amp_ensemble(p, cb, int(cfg["runs"]), int(cfg["N"]), _amp_config(cfg),
                                  master_seed=int(cfg["seed"]))
        log.info("%s", json.dumps(summary.to_dict()))
        _emit(summary.runs_csv(), args.out)

    elif cmd == "oracle":
        cb = _codebook(cfg)
        if cb is None:
            raise ConfigError("oracle needs a quantized scheme")
        # the AMP default N is far beyond exhaustive reach; fall back to a tiny instance
        N = int(cfg["N"]) if cfg["N"] != DEFAULTS["N"] else 6
        M = int(cfg["M"]) if cfg["M"] is not None else int(round(p.alpha * N))
        d = generate(N, M, p.rho, p.sigma2, int(cfg["seed"]))
        w, e = enumerate_min(d, cb, p.lam)
        amp_res = amp_run(d, cb, AMPConfig(lam=p.lam, seed=int(cfg["seed"]), T_max=200))
        out = {
            "seed": int(cfg["seed"]),
            "w_hat": [float(x) for x in w],
            "energy": e,
            "gen_error": empirical_gen_error(w, d.w0, p.sigma2),
            "amp_energy": energy(amp_res.w_hat, d, cb, p.lam),
        }
        _emit(json.dumps(out) + "\n", args.out)

    if args.strict and not ok:
        log.error("non-convergence detected")
        return EXIT_NONCONVERGED
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return run(args)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
