#!/usr/bin/env python3
"""Reconstruct the default test signal once per variant and plot the overlay.

Equivalent to `gflasso reconstruct`; kept as a script for quick editing
during experiments.
"""

import argparse
from pathlib import Path

from gflasso.bench import emit_outputs, load_config, run_reconstruction, spec_from_dict


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--mu", type=float, default=None)
    ap.add_argument("--out", type=Path, default=Path("out/reconstruction"))
    args = ap.parse_args()

    if args.config is not None:
        spec = load_config(args.config)
    else:
        cfg = {}
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.mu is not None:
            cfg["mu"] = args.mu
        spec = spec_from_dict(cfg)

    result = run_reconstruction(spec)
    for _, report, trial in result.runs:
        print(
            f"{trial.variant:10s} mse={trial.mse:10.4f} iterations={trial.iterations:4d} "
            f"converged={trial.converged} final_objective={report.objective[-1]:.6g}"
        )
    for path in emit_outputs(result, args.out):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
