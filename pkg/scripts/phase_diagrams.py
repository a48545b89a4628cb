"""RS/RSB phase diagrams on the (n_p, omega) plane at (sigma, alpha) = (0.01, 1.5).

Writes one CSV per (scheme, lambda) into results/ and prints the ASCII maps
('.' = RS, '#' = RSB, '?' = not converged; rows are n_p, columns log omega).
"""

import argparse
from pathlib import Path

from qreg import experiments as ex
from qreg.replica import ModelParams, Phase


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--max-np", type=int, default=30)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(exist_ok=True)
    omegas = ex.default_omega_grid()
    for scheme in ("uniform", "nonuniform"):
        for lam in (0.0, 1.0):
            p = ModelParams(1.5, 1.0, 1e-4, lam)
            pd = ex.phase_diagram(range(1, args.max_np + 1), omegas, p, scheme, jobs=args.jobs)
            sols = [s for row in pd.solutions for s in row]
            (out / f"phase_{scheme}_lambda{lam:g}.csv").write_text(ex.solutions_csv(sols))
            print(f"{scheme}, lambda={lam:g}: RS={pd.count(Phase.RS)} RSB={pd.count(Phase.RSB)}")
            print(pd.render())


if __name__ == "__main__":
    main()
