#!/usr/bin/env python3
"""Run the mean-MSE-versus-compression sweep and emit the CSV/plot.

Equivalent to `gflasso sweep`; kept as a script for quick editing during
experiments.
"""

import argparse
from pathlib import Path

from gflasso.bench import emit_outputs, load_config, run_mse_sweep, spec_from_dict


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("out/sweep"))
    args = ap.parse_args()

    if args.config is not None:
        spec = load_config(args.config)
    else:
        cfg = {}
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.trials is not None:
            cfg["trials"] = args.trials
        spec = spec_from_dict(cfg)

    result = run_mse_sweep(spec)
    variants = {c.variant for c in result.table}
    for variant in (e.name for e in spec.entries if e.name in variants):
        cells = [c for c in result.table if c.variant == variant]
        row = "  ".join(f"{c.mean_mse:9.3f}" for c in cells)
        print(f"{variant:10s} {row}")
    print(f"{'mu':10s} " + "  ".join(f"{c.mu:9.2f}" for c in cells))
    for path in emit_outputs(result, args.out):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
