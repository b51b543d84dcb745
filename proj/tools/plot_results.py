#!/usr/bin/env python3
"""Render regret and violation figures from an experiment aggregate.json.

Usage: plot_results.py <output_dir> [figure.png]
"""

import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    out_dir = Path(sys.argv[1])
    target = Path(sys.argv[2]) if len(sys.argv) > 2 else out_dir / "figures.png"
    groups = json.loads((out_dir / "aggregate.json").read_text())["groups"]
    if not groups:
        print("aggregate.json has no groups", file=sys.stderr)
        return 1

    fig, (ax_regret, ax_viol) = plt.subplots(1, 2, figsize=(11, 4))
    labels = []
    for g in groups:
        label = f"{g['agent']} (eta={g['eta']:g})"
        ax_regret.plot(g["episodes"], g["mean_cum_regret"], label=label)
        labels.append((label, g["mean_violations"]))
    ax_regret.set_xlabel("episode")
    ax_regret.set_ylabel("mean cumulative regret")
    ax_regret.legend(fontsize=7)

    ax_viol.bar(range(len(labels)), [v for _, v in labels])
    ax_viol.set_xticks(range(len(labels)))
    ax_viol.set_xticklabels([name for name, _ in labels], rotation=30, ha="right",
                            fontsize=7)
    ax_viol.set_ylabel("mean constraint violations")

    fig.tight_layout()
    fig.savefig(target, dpi=130)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
