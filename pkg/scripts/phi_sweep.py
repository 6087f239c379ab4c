"""QFI against temperature for several postselection phases at theta = pi/4.

Writes phi_sweep.csv and phi_sweep.png; also reports whether each curve is
non-decreasing in temperature over the high-temperature window.
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

    cfg = resolve_config(
        "qfi-sweep",
        overrides=dict(theta=math.pi / 4, phi_steps=8, beta_steps=60, workers=args.workers),
    )
    records = run_qfi_sweep(cfg)
    write_records(out / "phi_sweep.csv", records, SWEEP_COLUMNS)

    fig, ax = plt.subplots(figsize=(6, 4))
    for ph in cfg.phi_grid():
        rows = sorted((r for r in records if r.phi == ph), key=lambda r: r.temperature)
        f = np.array([r.qfi for r in rows])
        trend = "non-decreasing" if np.all(np.diff(f) >= 0) else "decreasing somewhere"
        print(f"phi = {ph:.4f}: F in [{f.min():.4g}, {f.max():.4g}], {trend} in T")
        ax.plot([r.temperature for r in rows], f, label=f"phi = {ph / math.pi:.3g} pi")
    ax.set_xlabel("T (1/beta)")
    ax.set_ylabel("F(beta)")
    ax.set_xscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "phi_sweep.png", dpi=150)


if __name__ == "__main__":
    main()
