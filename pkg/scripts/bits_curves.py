"""Generalization error versus bits b = log2(n_p + 2), with the ridge reference."""

import argparse
from pathlib import Path

from qreg import experiments as ex
from qreg.replica import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega", type=float, default=5.0)
    ap.add_argument("--alpha", type=float, default=1.4)
    ap.add_argument("--sigma2", type=float, default=1e-4)
    ap.add_argument("--lambda", dest="lam", type=float, default=0.01)
    ap.add_argument("--max-np", type=int, default=62)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    sols, ridge = ex.bits_sweep(range(1, args.max_np + 1), args.omega,
                                ModelParams(args.alpha, 1.0, args.sigma2, args.lam))
    Path(args.out).mkdir(exist_ok=True)
    path = Path(args.out) / f"bits_omega{args.omega:g}.csv"
    path.write_text(ex.solutions_csv([*sols, ridge]))
    print(f"ridge E_g = {ridge.gen_error:.5f}")
    for s in sols[:: max(1, len(sols) // 12)]:
        print(f"{s.codebook.scheme.value:>10} b={s.codebook.bits:.2f}: E_g={s.gen_error:.5f} [{s.phase.value}]")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
