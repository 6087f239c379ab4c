"""QFI against temperature for several postselection polar angles (phi = 0).

Writes theta_sweep.csv and theta_sweep.png to the output directory.
"""

import argparse
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from weakthermo.cli import SWEEP_COLUMNS, resolve_config, run_qfi_sweep, write_records


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    thetas = [math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2, 3 * math.pi / 4]
    records = []
    for th in thetas:
        cfg = resolve_config("qfi-sweep", overrides=dict(theta=th, phi=0.0, beta_steps=60, workers=args.workers))
        records += run_qfi_sweep(cfg)
    write_records(out / "theta_sweep.csv", records, SWEEP_COLUMNS)

    fig, ax = plt.subplots(figsize=(6, 4))
    for th in thetas:
        rows = sorted((r for r in records if r.theta == th), key=lambda r: r.temperature)
        ax.plot([r.temperature for r in rows], [r.qfi for r in rows], label=f"theta = {th / math.pi:.3g} pi")
    ax.set_xlabel("T (1/beta, units of hbar/k_B s)")
    ax.set_ylabel("F(beta)")
    ax.set_xscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "theta_sweep.png", dpi=150)

    for th in thetas:
        f = np.array([r.qfi for r in records if r.theta == th])
        print(f"theta = {th:.4f}: F in [{f.min():.4g}, {f.max():.4g}]")


if __name__ == "__main__":
    main()
