"""Kernel convergence for q_eps(t) = exp(i t / eps) with Dirichlet conditions.

Prints the sweep table and the fitted rate; pass --out to also write CSV/JSON.
"""
import argparse
from pathlib import Path

from slresolvent import Grid, boundary_preset, convergence_sweep, family_exp_osc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmax", type=int, default=10, help="smallest eps is 2**-kmax")
    ap.add_argument("--grid-n", type=int, default=201)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    ladder = [2.0**-k for k in range(3, args.kmax + 1)]
    rep = convergence_sweep(family_exp_osc(), boundary_preset("dirichlet"), 0.0, ladder,
                            Grid(0.0, 1.0, args.grid_n))
    print(f"{'eps':>12} {'gamma_dist':>12} {'opnorm_est':>12} {'z_dist':>12}")
    for r in rep.records:
        print(f"{r.eps:12.4g} {r.gamma_dist:12.4e} {r.opnorm_est:12.4e} {r.z_dist:12.4e}")
    print(f"fitted rate: {rep.rate.rate:.3f}")
    for v in rep.verdicts:
        print(f"  {v.name:12s} {v.classification}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "exp_osc.csv").write_text(rep.to_csv())
        (args.out / "exp_osc.json").write_text(rep.to_json())


if __name__ == "__main__":
    main()
