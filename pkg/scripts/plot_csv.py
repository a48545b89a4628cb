"""Line chart of E_g from a sweep CSV (needs the optional matplotlib extra).

    python scripts/plot_csv.py results/omega_alpha1.4_sigma20.0001_lambda0.01.csv --x omega --logx
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--x", default="omega", choices=["omega", "alpha", "b"])
    ap.add_argument("--y", default="E_g")
    ap.add_argument("--logx", action="store_true")
    ap.add_argument("--out", default=None, help="image path (default: CSV name with .svg)")
    args = ap.parse_args()
    curves = defaultdict(list)
    with open(args.csv) as fh:
        for row in csv.DictReader(fh):
            if not row[args.x]:
                continue
            key = (row["scheme"], row["n_p"])
            if args.x == "alpha":
                key = (*key, row["omega"])
            curves[key].append((float(row[args.x]), float(row[args.y]), row["phase"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, pts in sorted(curves.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=" ".join(key))
        rsb = [p for p in pts if p[2] == "RSB"]
        if rsb:
            ax.scatter([p[0] for p in rsb], [p[1] for p in rsb], marker="x", color="k", s=12)
    if args.logx:
        ax.set_xscale("log")
    ax.set_xlabel(args.x)
    ax.set_ylabel(args.y)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out or args.csv.rsplit(".", 1)[0] + ".svg")


if __name__ == "__main__":
    main()
