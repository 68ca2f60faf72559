"""Command-line front end for the two benchmark experiments.

Exit codes: 0 success, 1 config/validation error, 2 solver failure,
3 I/O error while writing outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    ConfigError,
    VariantSolveError,
    default_variant_dicts,
    emit_outputs,
    run_mse_sweep,
    run_reconstruction,
    spec_from_dict,
)
from .solvers import VARIANT_KINDS, SolverDivergenceError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gflasso",
        description="Reconstruct block-sparse smooth signals from compressed "
        "measurements and benchmark the solver variants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("reconstruct", "solve every variant once at a fixed compression ratio"),
        ("sweep", "mean MSE per variant over a grid of compression ratios"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the base seed")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument(
            "--variants",
            type=str,
            default=None,
            help="comma-separated variant names/kinds to run (overrides config)",
        )
        p.add_argument("--trials", type=int, default=None, help="override trials per cell")
    return parser


def _load_config_dict(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    if not text.strip():
        return {}
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config root must be an object, got {type(cfg).__name__}")
    return cfg


def _apply_variant_selection(cfg: dict, tokens: list[str]) -> None:
    """Replace cfg['variants'] with the requested names/kinds.

    A token naming a configured variant keeps that entry; a bare kind not
    in the config gets a default entry of that kind.
    """
    configured = cfg.get("variants", default_variant_dicts())
    if not isinstance(configured, list):
        raise ConfigError("variants must be a list of objects")
    selected = []
    for token in tokens:
        match = next(
            (
                v
                for v in configured
                if isinstance(v, dict) and (v.get("name") == token or v.get("kind") == token)
            ),
            None,
        )
        if match is not None:
            selected.append(match)
        elif token in VARIANT_KINDS:
            selected.append({"kind": token})
        else:
            raise ConfigError(
                f"unknown variant {token!r}: not configured and not one of {VARIANT_KINDS}"
            )
    cfg["variants"] = selected


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config_dict(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.trials is not None:
            cfg["trials"] = args.trials
        if args.variants is not None:
            tokens = [t.strip() for t in args.variants.split(",") if t.strip()]
            if not tokens:
                raise ConfigError("--variants must name at least one variant")
            _apply_variant_selection(cfg, tokens)
        spec = spec_from_dict(cfg)

        if args.command == "reconstruct":
            result = run_reconstruction(spec)
            for _, _, trial in result.runs:
                print(
                    f"{trial.variant}: mse={trial.mse:.6g} "
                    f"iterations={trial.iterations} converged={trial.converged}"
                )
        else:
            result = run_mse_sweep(spec)
            for cell in result.table:
                print(
                    f"{cell.variant} mu={cell.mu:g}: mean_mse={cell.mean_mse:.6g} "
                    f"(stderr {cell.stderr_mse:.2g}, {cell.trials} trials)"
                )
        written = emit_outputs(result, args.out)
        for path in written:
            print(f"wrote {path}")
        return 0
    except (SolverDivergenceError, VariantSolveError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
