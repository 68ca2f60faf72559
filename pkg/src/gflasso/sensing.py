"""Measurement matrices, synthetic block-structured test signals, noisy sensing.

Everything here is deterministic given explicit seeds; sweep code derives
per-trial seeds with :func:`derive_seed` so cells never share randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_SEGMENT_KINDS = ("zero", "exp_decay", "step", "lone_group")
_U64 = 2**64


def measurement_count(mu: float, n: int) -> int:
    """m = round(mu * n), rounding halves up."""
    return int(math.floor(mu * n + 0.5))


@dataclass(frozen=True)
class SensingConfig:
    """Signal length, compression ratio, noise power, and base seed."""

    n: int = 140
    mu: float = 0.5
    sigma2: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"mu must be in (0, 1], got {self.mu}")
        if self.sigma2 < 0.0 or not np.isfinite(self.sigma2):
            raise ValueError(f"sigma2 must be finite and >= 0, got {self.sigma2}")
        if self.m < 1:
            raise ValueError(f"mu={self.mu} with n={self.n} gives no measurements")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "seed", int(self.seed) % _U64)

    @property
    def m(self) -> int:
        return measurement_count(self.mu, int(self.n))


@dataclass(frozen=True)
class Segment:
    """One piece of a synthetic test signal.

    kind is one of zero, exp_decay (amplitude * exp(-decay_rate * t)),
    step (constant amplitude), lone_group (a short constant nonzero run).
    """

    kind: str
    length: int
    amplitude: float = 0.0
    decay_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in _SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}, expected one of {_SEGMENT_KINDS}")
        if int(self.length) < 1:
            raise ValueError(f"segment length must be >= 1, got {self.length}")
        if not np.isfinite(self.amplitude):
            raise ValueError(f"segment amplitude must be finite, got {self.amplitude}")
        if not np.isfinite(self.decay_rate):
            raise ValueError(f"segment decay_rate must be finite, got {self.decay_rate}")
        object.__setattr__(self, "length", int(self.length))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "decay_rate", float(self.decay_rate))

    def render(self) -> np.ndarray:
        t = np.arange(self.length, dtype=float)
        if self.kind == "zero":
            return np.zeros(self.length)
        if self.kind == "exp_decay":
            return self.amplitude * np.exp(-self.decay_rate * t)
        # step and lone_group are both constant runs
        return np.full(self.length, self.amplitude)


@dataclass(frozen=True)
class BlockSpec:
    """Ordered segments whose lengths sum to the signal length."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("block spec needs at least one segment")

    @property
    def n(self) -> int:
        return sum(s.length for s in self.segments)


def default_block_spec() -> BlockSpec:
    """The canonical length-140 test signal.

    Two exponentially decaying blocks, one step block, one lone small group
    of nonzeros, and zero blocks in between; 86 of 140 entries are exactly
    zero and the nonzero blocks straddle the size-10 group boundaries.
    Amplitudes sit well above the reference penalty weights so the signal
    survives shrinkage at moderate compression.
    """
    return BlockSpec(
        segments=(
            Segment("zero", 15),
            Segment("exp_decay", 20, amplitude=30.0, decay_rate=0.15),
            Segment("zero", 20),
            Segment("step", 15, amplitude=18.0),
            Segment("zero", 20),
            Segment("exp_decay", 15, amplitude=24.0, decay_rate=0.2),
            Segment("zero", 13),
            Segment("lone_group", 4, amplitude=12.0),
            Segment("zero", 18),
        )
    )


def make_test_signal(spec: BlockSpec, jitter: float = 0.0, seed: int = 0) -> np.ndarray:
    """Concatenate the spec's segments into one signal.

    Pure by default. With jitter > 0, each non-zero segment's amplitude is
    scaled by (1 + jitter * u), u drawn uniformly from [-1, 1] with the
    given seed, one draw per segment.
    """
    if jitter < 0.0 or not np.isfinite(jitter):
        raise ValueError(f"jitter must be finite and >= 0, got {jitter}")
    parts = [seg.render() for seg in spec.segments]
    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        u = rng.uniform(-1.0, 1.0, size=len(parts))
        parts = [
            p * (1.0 + jitter * u[i]) if seg.kind != "zero" else p
            for i, (seg, p) in enumerate(zip(spec.segments, parts))
        ]
    return np.concatenate(parts)


def gaussian_orthonormal_matrix(m: int, n: int, seed: int) -> np.ndarray:
    """m-by-n Gaussian draw (entry variance 1/m) with rows orthonormalized.

    The raw draw is seeded; rows are then orthonormalized by QR so that
    phi @ phi.T equals the identity while the row span is preserved.
    Requires m <= n.
    """
    m, n = int(m), int(n)
    if m < 1:
        raise ValueError(f"need at least one row, got m={m}")
    if m > n:
        raise ValueError(f"cannot orthonormalize {m} rows of length {n} (m > n)")
    rng = np.random.default_rng(int(seed) % _U64)
    raw = rng.normal(0.0, 1.0 / np.sqrt(m), size=(m, n))
    q, _ = np.linalg.qr(raw.T)
    return np.ascontiguousarray(q.T)


def generate_measurement_matrix(config: SensingConfig) -> np.ndarray:
    """Row-orthonormalized Gaussian measurement matrix for the given config."""
    return gaussian_orthonormal_matrix(config.m, config.n, config.seed)


def sense(phi: np.ndarray, x: np.ndarray, sigma2: float, seed: int) -> np.ndarray:
    """y = phi @ x + v with v ~ N(0, sigma2) i.i.d. from the given seed.

    sigma2 = 0 returns phi @ x exactly.
    """
    phi = np.asarray(phi, dtype=float)
    x = np.asarray(x, dtype=float)
    if phi.ndim != 2 or x.ndim != 1 or phi.shape[1] != x.size:
        raise ValueError(f"shape mismatch: matrix {phi.shape}, signal {x.shape}")
    if sigma2 < 0.0 or not np.isfinite(sigma2):
        raise ValueError(f"sigma2 must be finite and >= 0, got {sigma2}")
    y = phi @ x
    if sigma2 > 0.0:
        rng = np.random.default_rng(int(seed) % _U64)
        y = y + rng.normal(0.0, np.sqrt(sigma2), size=phi.shape[0])
    return y


def derive_seed(base_seed: int, trial: int, mu: float, stream: int = 0) -> int:
    """Independent per-(trial, mu, stream) seed from one base seed.

    stream separates consumers within a trial (0: measurement matrix,
    1: measurement noise, ...).
    """
    mu_key = int(round(float(mu) * 1_000_000))
    ss = np.random.SeedSequence([int(base_seed) % _U64, int(trial), mu_key, int(stream)])
    return int(ss.generate_state(1, np.uint64)[0])
