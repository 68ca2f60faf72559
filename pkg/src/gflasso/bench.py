"""Experiment harness: config loading, reconstruction/sweep runs, file emission.

Drives the two benchmark experiments (a single-signal reconstruction
comparison at fixed compression, and the mean-MSE-versus-compression sweep)
with deterministic seeding, CSV/SVG outputs, and a run manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

plt.rcParams["svg.hashsalt"] = "gflasso"

from .problem import (
    AdmmConfig,
    GroupPartition,
    LatentGroupLayout,
    PenaltyConfig,
    build_latent_layout,
    build_partition,
    mse,
)
from .sensing import (
    BlockSpec,
    Segment,
    SensingConfig,
    default_block_spec,
    derive_seed,
    gaussian_orthonormal_matrix,
    make_test_signal,
    measurement_count,
    sense,
)
from .solvers import (
    VARIANT_KINDS,
    SolveReport,
    factorize_lgf,
    factorize_sgf,
    lgf_admm_solve,
    sgf_admm_solve,
    variant_config,
)
from .problem import DifferenceOperator


class ConfigError(ValueError):
    """Config file failed to parse or validate; message names the field."""


class VariantSolveError(RuntimeError):
    """A solver failed inside the harness; message names the variant."""


@dataclass(frozen=True)
class SolverEntry:
    """One solver to benchmark: a variant kind, its penalties, its grouping."""

    name: str
    kind: str
    penalties: PenaltyConfig
    grouping: GroupPartition | LatentGroupLayout


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved experiment description."""

    sensing: SensingConfig
    signal: BlockSpec
    entries: tuple[SolverEntry, ...]
    admm: AdmmConfig
    trials: int = 20
    mu_grid: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "mu_grid", tuple(float(m) for m in self.mu_grid))
        object.__setattr__(self, "trials", int(self.trials))
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.entries:
            raise ConfigError("at least one variant entry is required")
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ConfigError(f"variant names must be unique, got {names}")
        for m in self.mu_grid:
            if not 0.0 < m <= 1.0:
                raise ConfigError(f"mu_grid values must be in (0, 1], got {m}")
        if any(b <= a for a, b in zip(self.mu_grid, self.mu_grid[1:])):
            raise ConfigError(f"mu_grid must be strictly increasing, got {list(self.mu_grid)}")
        if self.signal.n != self.sensing.n:
            raise ConfigError(
                f"signal segments sum to {self.signal.n} but n is {self.sensing.n}"
            )


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one (variant, mu, trial) solve."""

    variant: str
    mu: float
    trial: int
    seed: int
    mse: float
    iterations: int
    converged: bool
    duration_s: float


@dataclass(frozen=True)
class SweepCell:
    """Aggregate over the trials of one (variant, mu) cell."""

    variant: str
    mu: float
    mean_mse: float
    stderr_mse: float
    mean_iters: float
    trials: int


@dataclass(frozen=True)
class ReconstructionResult:
    spec: ExperimentSpec
    x_true: np.ndarray
    runs: tuple[tuple[SolverEntry, SolveReport, TrialResult], ...]


@dataclass(frozen=True)
class SweepResult:
    spec: ExperimentSpec
    trial_results: tuple[TrialResult, ...]
    table: tuple[SweepCell, ...]


# ---------------------------------------------------------------------------
# Config loading
# ---------------------------------------------------------------------------

_DEFAULT_MU_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
_TOP_KEYS = {
    "n", "mu", "sigma2", "seed", "trials", "mu_grid",
    "group_size", "overlap", "groups", "penalties", "admm", "variants", "signal",
}
_PENALTY_KEYS = {"lambda_e", "lambda_g", "lambda_f"}
_ADMM_KEYS = {"c_u", "c_z", "max_iter", "tol", "jacobi_updates"}
_VARIANT_KEYS = {"kind", "name", "penalties", "groups", "group_size", "overlap"}
_SEGMENT_KEYS = {"kind", "length", "amplitude", "decay_rate"}


def default_variant_dicts() -> list[dict]:
    """The benchmark's three reference variants.

    The group-only variant runs at a raised group weight (12.5), the
    smallest that still recreates the zero blocks on its own.
    """
    return [
        {"kind": "sgf"},
        {"kind": "lgf"},
        {"kind": "g_lasso", "penalties": {"lambda_g": 12.5}},
    ]


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} field(s): {sorted(unknown)}")


def _get_number(mapping: dict, key: str, default, where: str = "config"):
    value = mapping.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} field {key!r} must be a number, got {value!r}")
    return value


def _build_grouping(kind: str, n: int, vdict: dict, group_size: int, overlap: int, name: str):
    if kind == "lgf":
        gs = int(_get_number(vdict, "group_size", group_size, f"variant {name!r}"))
        k = int(_get_number(vdict, "overlap", overlap, f"variant {name!r}"))
        try:
            return build_latent_layout(n, gs, k)
        except ValueError as exc:
            raise ConfigError(f"variant {name!r}: {exc}") from exc
    if "groups" in vdict:
        g = int(_get_number(vdict, "groups", None, f"variant {name!r}"))
    else:
        gs = int(_get_number(vdict, "group_size", group_size, f"variant {name!r}"))
        if n % gs != 0:
            raise ConfigError(f"variant {name!r}: group_size {gs} does not divide n={n}")
        g = n // gs
    try:
        return build_partition(n, g)
    except ValueError as exc:
        raise ConfigError(f"variant {name!r}: {exc}") from exc


def spec_from_dict(cfg: dict) -> ExperimentSpec:
    """Build a validated ExperimentSpec; missing fields take the benchmark defaults."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"config root must be an object, got {type(cfg).__name__}")
    _reject_unknown(cfg, _TOP_KEYS, "config")

    n = int(_get_number(cfg, "n", 140))
    mu = float(_get_number(cfg, "mu", 0.5))
    sigma2 = float(_get_number(cfg, "sigma2", 0.25))
    seed = int(_get_number(cfg, "seed", 0))
    trials = int(_get_number(cfg, "trials", 20))
    group_size = int(_get_number(cfg, "group_size", 10))
    overlap = int(_get_number(cfg, "overlap", 5))

    mu_grid = cfg.get("mu_grid", list(_DEFAULT_MU_GRID))
    if not isinstance(mu_grid, (list, tuple)) or not all(
        isinstance(m, (int, float)) and not isinstance(m, bool) for m in mu_grid
    ):
        raise ConfigError(f"mu_grid must be a list of numbers, got {mu_grid!r}")

    pen_cfg = cfg.get("penalties", {})
    if not isinstance(pen_cfg, dict):
        raise ConfigError("penalties must be an object")
    _reject_unknown(pen_cfg, _PENALTY_KEYS, "penalties")
    try:
        base_penalties = PenaltyConfig(
            lambda_e=float(_get_number(pen_cfg, "lambda_e", 0.5, "penalties")),
            lambda_g=float(_get_number(pen_cfg, "lambda_g", 5.0, "penalties")),
            lambda_f=float(_get_number(pen_cfg, "lambda_f", 3.0, "penalties")),
        )
    except ValueError as exc:
        raise ConfigError(f"penalties: {exc}") from exc

    admm_cfg = cfg.get("admm", {})
    if not isinstance(admm_cfg, dict):
        raise ConfigError("admm must be an object")
    _reject_unknown(admm_cfg, _ADMM_KEYS, "admm")
    jacobi = admm_cfg.get("jacobi_updates", False)
    if not isinstance(jacobi, bool):
        raise ConfigError(f"admm field 'jacobi_updates' must be a boolean, got {jacobi!r}")
    try:
        admm = AdmmConfig(
            c_u=float(_get_number(admm_cfg, "c_u", 2.0, "admm")),
            c_z=float(_get_number(admm_cfg, "c_z", 2.0, "admm")),
            max_iter=int(_get_number(admm_cfg, "max_iter", 150, "admm")),
            tol=float(_get_number(admm_cfg, "tol", 1e-3, "admm")),
            jacobi_updates=jacobi,
        )
    except ValueError as exc:
        raise ConfigError(f"admm: {exc}") from exc

    try:
        sensing = SensingConfig(n=n, mu=mu, sigma2=sigma2, seed=seed)
    except ValueError as exc:
        raise ConfigError(f"sensing: {exc}") from exc

    seg_cfg = cfg.get("signal")
    if seg_cfg is None:
        signal = default_block_spec() if n == 140 else None
        if signal is None:
            raise ConfigError(f"a 'signal' section is required when n != 140 (got n={n})")
    else:
        if not isinstance(seg_cfg, list) or not all(isinstance(s, dict) for s in seg_cfg):
            raise ConfigError("signal must be a list of segment objects")
        segments = []
        for i, sdict in enumerate(seg_cfg):
            _reject_unknown(sdict, _SEGMENT_KEYS, f"signal[{i}]")
            if "kind" not in sdict or "length" not in sdict:
                raise ConfigError(f"signal[{i}] needs 'kind' and 'length'")
            try:
                segments.append(
                    Segment(
                        kind=sdict["kind"],
                        length=int(_get_number(sdict, "length", None, f"signal[{i}]")),
                        amplitude=float(_get_number(sdict, "amplitude", 0.0, f"signal[{i}]")),
                        decay_rate=float(_get_number(sdict, "decay_rate", 0.0, f"signal[{i}]")),
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"signal[{i}]: {exc}") from exc
        signal = BlockSpec(segments=tuple(segments))

    var_cfg = cfg.get("variants", default_variant_dicts())
    if not isinstance(var_cfg, list) or not all(isinstance(v, dict) for v in var_cfg):
        raise ConfigError("variants must be a list of objects")
    entries = []
    for vdict in var_cfg:
        _reject_unknown(vdict, _VARIANT_KEYS, "variant")
        kind = vdict.get("kind")
        if kind not in VARIANT_KINDS:
            raise ConfigError(f"variant kind must be one of {VARIANT_KINDS}, got {kind!r}")
        name = vdict.get("name", kind)
        if not isinstance(name, str) or not name:
            raise ConfigError(f"variant name must be a non-empty string, got {name!r}")
        penalties = variant_config(kind, base_penalties)
        overrides = vdict.get("penalties", {})
        if not isinstance(overrides, dict):
            raise ConfigError(f"variant {name!r}: penalties must be an object")
        _reject_unknown(overrides, _PENALTY_KEYS, f"variant {name!r} penalties")
        if overrides:
            merged = {
                "lambda_e": penalties.lambda_e,
                "lambda_g": penalties.lambda_g,
                "lambda_f": penalties.lambda_f,
            }
            for key in overrides:
                merged[key] = float(_get_number(overrides, key, None, f"variant {name!r}"))
            try:
                penalties = PenaltyConfig(**merged)
            except ValueError as exc:
                raise ConfigError(f"variant {name!r}: {exc}") from exc
        grouping = _build_grouping(kind, n, vdict, group_size, overlap, name)
        entries.append(SolverEntry(name=name, kind=kind, penalties=penalties, grouping=grouping))

    return ExperimentSpec(
        sensing=sensing,
        signal=signal,
        entries=tuple(entries),
        admm=admm,
        trials=trials,
        mu_grid=tuple(mu_grid),
    )


def load_config(path) -> ExperimentSpec:
    """Load and validate a JSON experiment config; empty files mean all defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    if not text.strip():
        return spec_from_dict({})
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return spec_from_dict(cfg)


def spec_to_dict(spec: ExperimentSpec) -> dict:
    """Serialize a resolved spec (round-trips through spec_from_dict)."""
    variants = []
    for e in spec.entries:
        v: dict = {"kind": e.kind, "name": e.name}
        v["penalties"] = {
            "lambda_e": e.penalties.lambda_e,
            "lambda_g": e.penalties.lambda_g,
            "lambda_f": e.penalties.lambda_f,
        }
        if isinstance(e.grouping, LatentGroupLayout):
            v["group_size"] = e.grouping.group_size
            v["overlap"] = e.grouping.k
        else:
            v["groups"] = e.grouping.g
        variants.append(v)
    return {
        "n": spec.sensing.n,
        "mu": spec.sensing.mu,
        "sigma2": spec.sensing.sigma2,
        "seed": spec.sensing.seed,
        "trials": spec.trials,
        "mu_grid": list(spec.mu_grid),
        "admm": {
            "c_u": spec.admm.c_u,
            "c_z": spec.admm.c_z,
            "max_iter": spec.admm.max_iter,
            "tol": spec.admm.tol,
            "jacobi_updates": spec.admm.jacobi_updates,
        },
        "signal": [
            {
                "kind": s.kind,
                "length": s.length,
                "amplitude": s.amplitude,
                "decay_rate": s.decay_rate,
            }
            for s in spec.signal.segments
        ],
        "variants": variants,
    }


def config_hash(spec: ExperimentSpec) -> str:
    blob = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Running experiments
# ---------------------------------------------------------------------------


def _solve_entry(entry: SolverEntry, y, phi, admm, factors: dict) -> SolveReport:
    try:
        if entry.kind == "lgf":
            layout = entry.grouping
            key = ("lgf", layout.n, layout.group_size, layout.k)
            if key not in factors:
                factors[key] = factorize_lgf(phi, DifferenceOperator(layout.n), layout, admm)
            return lgf_admm_solve(y, phi, layout, entry.penalties, admm, factor=factors[key])
        key = ("sgf",)
        if key not in factors:
            factors[key] = factorize_sgf(phi, DifferenceOperator(entry.grouping.n), admm)
        return sgf_admm_solve(y, phi, entry.grouping, entry.penalties, admm, factor=factors[key])
    except RuntimeError as exc:
        raise VariantSolveError(f"variant {entry.name!r} failed: {exc}") from exc


def _run_cell(spec: ExperimentSpec, x_true, mu: float, trial: int):
    """Solve every variant on one shared (phi, y) realization."""
    sensing = spec.sensing
    m = measurement_count(mu, sensing.n)
    phi_seed = derive_seed(sensing.seed, trial, mu, stream=0)
    noise_seed = derive_seed(sensing.seed, trial, mu, stream=1)
    phi = gaussian_orthonormal_matrix(m, sensing.n, phi_seed)
    y = sense(phi, x_true, sensing.sigma2, noise_seed)

    factors: dict = {}
    out = []
    for entry in spec.entries:
        t0 = time.perf_counter()
        report = _solve_entry(entry, y, phi, spec.admm, factors)
        duration = time.perf_counter() - t0
        result = TrialResult(
            variant=entry.name,
            mu=mu,
            trial=trial,
            seed=phi_seed,
            mse=mse(x_true, report.x_hat),
            iterations=report.iterations,
            converged=report.converged,
            duration_s=duration,
        )
        out.append((entry, report, result))
    return out


def run_reconstruction(spec: ExperimentSpec) -> ReconstructionResult:
    """Solve every variant once on the same realization at the spec's fixed mu."""
    x_true = make_test_signal(spec.signal)
    runs = _run_cell(spec, x_true, spec.sensing.mu, trial=0)
    return ReconstructionResult(spec=spec, x_true=x_true, runs=tuple(runs))


def run_mse_sweep(spec: ExperimentSpec) -> SweepResult:
    """Mean MSE per (variant, mu) over freshly sensed trials.

    Every (mu, trial) cell draws its own (phi, noise) pair, shared by all
    variants within the cell for fairness.
    """
    if not spec.mu_grid:
        raise ConfigError("mu_grid must be non-empty for a sweep")
    x_true = make_test_signal(spec.signal)

    all_results: list[TrialResult] = []
    for mu in spec.mu_grid:
        for trial in range(spec.trials):
            for _, _, result in _run_cell(spec, x_true, mu, trial):
                all_results.append(result)

    order = {e.name: i for i, e in enumerate(spec.entries)}
    all_results.sort(key=lambda r: (order[r.variant], r.mu, r.trial))

    table = []
    for entry in spec.entries:
        for mu in spec.mu_grid:
            cell = [r for r in all_results if r.variant == entry.name and r.mu == mu]
            mses = np.array([r.mse for r in cell])
            stderr = float(mses.std(ddof=1) / np.sqrt(len(cell))) if len(cell) > 1 else 0.0
            table.append(
                SweepCell(
                    variant=entry.name,
                    mu=mu,
                    mean_mse=float(mses.mean()),
                    stderr_mse=stderr,
                    mean_iters=float(np.mean([r.iterations for r in cell])),
                    trials=len(cell),
                )
            )
    return SweepResult(spec=spec, trial_results=tuple(all_results), table=tuple(table))


# ---------------------------------------------------------------------------
# Output emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    """Full-precision, round-trippable cell formatting."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(path: Path, spec: ExperimentSpec, written: list[Path]) -> None:
    from gflasso import __version__

    lines = [
        f"config_sha256={config_hash(spec)}",
        f"seed={spec.sensing.seed}",
        f"gflasso_version={__version__}",
    ]
    lines += [f"output={p.name}" for p in written]
    path.write_text("\n".join(lines) + "\n")


def _savefig(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _plot_reconstruction(result: ReconstructionResult, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(result.x_true, color="black", linewidth=1.8, label="true signal")
    for entry, report, _ in result.runs:
        ax.plot(report.x_hat, linewidth=1.0, label=entry.name)
    ax.set_xlabel("sample index")
    ax.set_ylabel("amplitude")
    ax.set_title(f"reconstruction at mu={result.spec.sensing.mu}")
    ax.legend()
    fig.tight_layout()
    _savefig(fig, path)


def _plot_sweep(result: SweepResult, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for entry in result.spec.entries:
        cells = [c for c in result.table if c.variant == entry.name]
        mus = [c.mu for c in cells]
        means = [c.mean_mse for c in cells]
        ax.semilogy(mus, means, marker="o", label=entry.name)
    ax.set_xlabel("compression ratio")
    ax.set_ylabel("mean MSE")
    ax.set_title(f"mean MSE over {result.spec.trials} trials")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _savefig(fig, path)


def emit_outputs(result: ReconstructionResult | SweepResult, out_dir) -> list[Path]:
    """Write the result's CSVs, SVG plot, and run manifest into out_dir.

    Returns the list of written paths (manifest last). CSV bytes are
    deterministic for a given spec and seed.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        if isinstance(result, ReconstructionResult):
            for entry, report, _ in result.runs:
                p = out / f"signal_{entry.name}.csv"
                rows = (
                    (i, float(t), float(h))
                    for i, (t, h) in enumerate(zip(result.x_true, report.x_hat))
                )
                _write_csv(p, ["index", "x_true", "x_hat"], rows)
                written.append(p)
            p = out / "reconstruction_summary.csv"
            _write_csv(
                p,
                ["variant", "mu", "trial", "seed", "mse", "iterations", "converged"],
                (
                    (r.variant, r.mu, r.trial, r.seed, r.mse, r.iterations, r.converged)
                    for _, _, r in result.runs
                ),
            )
            written.append(p)
            p = out / "reconstruction.svg"
            _plot_reconstruction(result, p)
            written.append(p)
        elif isinstance(result, SweepResult):
            p = out / "mse_sweep.csv"
            _write_csv(
                p,
                ["variant", "mu", "mean_mse", "stderr_mse", "mean_iters", "trials"],
                (
                    (c.variant, c.mu, c.mean_mse, c.stderr_mse, c.mean_iters, c.trials)
                    for c in result.table
                ),
            )
            written.append(p)
            p = out / "mse_sweep.svg"
            _plot_sweep(result, p)
            written.append(p)
        else:
            raise TypeError(f"cannot emit outputs for {type(result).__name__}")
        manifest = out / "manifest.txt"
        _write_manifest(manifest, result.spec, written)
        written.append(manifest)
        return written
    except OSError as exc:
        raise OSError(f"failed writing outputs under {out}: {exc}") from exc
