"""Generalization error versus alpha = M/N for quantized and ridge regression (double descent)."""

import argparse
from pathlib import Path

import numpy as np

from qreg import experiments as ex
from qreg.replica import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma2", type=float, default=1.0)
    ap.add_argument("--lambda", dest="lam", type=float, default=1e-6)
    ap.add_argument("--n-p", type=int, default=30)
    ap.add_argument("--omegas", default="1,2,4,8,16")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    alphas = np.round(np.arange(0.3, 2.0001, 0.01), 10)
    omegas = [float(w) for w in args.omegas.split(",")]
    res = ex.alpha_sweep(alphas, ModelParams(1.0, 1.0, args.sigma2, args.lam), [args.n_p], omegas,
                         ["uniform", "nonuniform"])
    Path(args.out).mkdir(exist_ok=True)
    path = Path(args.out) / f"alpha_sigma2{args.sigma2:g}.csv"
    path.write_text(ex.solutions_csv(res.rows()))
    print(f"ridge peak at alpha={res.ridge_peak():.3f}")
    for key in res.curves:
        print(f"{key[0]:>10} n_p={key[1]} omega={key[2]:g}: peak at alpha={res.peak(key):.3f}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
