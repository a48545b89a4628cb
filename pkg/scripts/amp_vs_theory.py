"""AMP ensembles against the replica prediction along an omega sweep (uniform, n_p = 6)."""

import argparse
import json
from pathlib import Path

from qreg import experiments as ex
from qreg.amp import AMPConfig
from qreg.codebook import build_uniform
from qreg.replica import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=2500)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--T-max", type=int, default=100)
    ap.add_argument("--n-p", type=int, default=6)
    ap.add_argument("--omegas", default="0.5,1.0,1.8,3.0,5.0")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    p = ModelParams(1.4, 1.0, 1e-4, 0.01)
    Path(args.out).mkdir(exist_ok=True)
    rows = []
    for w in (float(x) for x in args.omegas.split(",")):
        s = ex.amp_ensemble(p, build_uniform(args.n_p, w), args.runs, args.N, AMPConfig(T_max=args.T_max))
        rows.append({"omega": w, **s.to_dict()})
        print(json.dumps(rows[-1]))
    (Path(args.out) / "amp_vs_theory.json").write_text(json.dumps(rows, indent=1) + "\n")


if __name__ == "__main__":
    main()
