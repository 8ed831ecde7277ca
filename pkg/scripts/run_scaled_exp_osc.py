"""q_eps = eps^-theta exp(i t / eps): ||q_eps||_2 grows, yet kernels converge while eps * rho^3 -> 0."""
import argparse

from slresolvent import Grid, boundary_preset, convergence_sweep, family_scaled_exp_osc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, default=0.2)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4])
    ap.add_argument("--grid-n", type=int, default=201)
    args = ap.parse_args()

    rep = convergence_sweep(family_scaled_exp_osc(theta=args.theta), boundary_preset("dirichlet"), 0.0,
                            args.eps, Grid(0.0, 1.0, args.grid_n))
    cols = ("eps", "q_l2", "rrv_l1", "comm_l1", "z_dist", "gamma_dist")
    print(" ".join(f"{c:>11}" for c in cols))
    for r in rep.records:
        print(" ".join(f"{getattr(r, c):11.4g}" for c in cols))


if __name__ == "__main__":
    main()
