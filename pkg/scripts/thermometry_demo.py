"""Simulated thermometry runs compared with the Cramer-Rao bound over a range of couplings."""

import argparse
import math

from weakthermo import CouplingParams, PostselectionAngles, SpinParams, simulate_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=1e-11)
    ap.add_argument("--theta", type=float, default=math.pi / 4)
    ap.add_argument("--phi", type=float, default=0.0)
    ap.add_argument("--n-samples", type=int, default=10_000)
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    spin = SpinParams(4.8e6, 3e9)
    angles = PostselectionAngles(args.theta, args.phi)
    print(f"{'g0':>8} {'mean beta_hat':>14} {'bias':>10} {'var':>11} {'CRB':>11} {'var/CRB':>8}")
    for g0 in (0.01, 0.02, 0.05, 0.1):
        rec = simulate_experiment(args.beta, angles, CouplingParams(g0), spin, args.n_samples, args.seed, args.replicates)
        print(
            f"{g0:8.3g} {rec.beta_estimate:14.5e} {rec.beta_estimate - args.beta:10.2e} "
            f"{rec.sample_variance:11.3e} {rec.crb:11.3e} {rec.variance_ratio:8.3f}"
        )


if __name__ == "__main__":
    main()
