"""Problem ingredients shared by all solvers and the benchmark harness.

Holds the first-difference operator behind the fusion penalty, disjoint and
overlapping group index structures, penalty/ADMM configuration dataclasses,
the two composite objectives, and the reconstruction-error metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_signal(values) -> np.ndarray:
    """Validate and return a signal as a 1-D float64 array.

    Signals must have length >= 2 (the difference operator needs at least
    one consecutive pair) and contain only finite entries.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {x.shape}")
    if x.size < 2:
        raise ValueError(f"signal length must be >= 2, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite entries")
    return x


class DifferenceOperator:
    """The n-by-n upper-bidiagonal first-difference matrix.

    Row j (j < n-1) computes x[j+1] - x[j]; the last row keeps x[n-1], which
    makes the matrix invertible and lets the solvers split on z = Dx.
    Applications are O(n) slicing, no matrix is materialized unless asked.
    """

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"difference operator needs n >= 2, got {n}")
        self.n = int(n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """D @ x."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected length-{self.n} vector, got shape {x.shape}")
        out = np.empty(self.n)
        out[:-1] = x[1:] - x[:-1]
        out[-1] = x[-1]
        return out

    def apply_transpose(self, z: np.ndarray) -> np.ndarray:
        """D.T @ z."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise ValueError(f"expected length-{self.n} vector, got shape {z.shape}")
        out = np.empty(self.n)
        out[0] = -z[0]
        out[1:-1] = z[:-2] - z[1:-1]
        out[-1] = z[-2] + z[-1]
        return out

    def gram(self) -> np.ndarray:
        """D.T @ D as a dense tridiagonal matrix."""
        g = np.zeros((self.n, self.n))
        diag = np.full(self.n, 2.0)
        diag[0] = 1.0
        np.fill_diagonal(g, diag)
        idx = np.arange(self.n - 1)
        g[idx, idx + 1] = -1.0
        g[idx + 1, idx] = -1.0
        return g

    def to_dense(self) -> np.ndarray:
        d = np.zeros((self.n, self.n))
        idx = np.arange(self.n - 1)
        d[idx, idx] = -1.0
        d[idx, idx + 1] = 1.0
        d[-1, -1] = 1.0
        return d


def build_difference_operator(n: int) -> DifferenceOperator:
    """First-difference operator for length-n signals (n >= 2)."""
    return DifferenceOperator(n)


@dataclass(frozen=True)
class GroupPartition:
    """g contiguous, disjoint, equal-size groups covering indices 0..n-1."""

    n: int
    g: int

    @property
    def group_size(self) -> int:
        return self.n // self.g

    def slices(self) -> list[slice]:
        s = self.group_size
        return [slice(i * s, (i + 1) * s) for i in range(self.g)]

    def group_view(self, x: np.ndarray) -> np.ndarray:
        """Reshape a conformal vector to (g, group_size), one row per group."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected length-{self.n} vector, got shape {x.shape}")
        return x.reshape(self.g, self.group_size)


def build_partition(n: int, g: int) -> GroupPartition:
    """Partition of n indices into g equal contiguous groups; g must divide n."""
    n, g = int(n), int(g)
    if n < 1 or g < 1:
        raise ValueError(f"n and g must be positive, got n={n}, g={g}")
    if n % g != 0:
        raise ValueError(f"group count {g} does not divide signal length {n}")
    return GroupPartition(n=n, g=g)


class LatentGroupLayout:
    """Overlapping fixed-size groups, consecutive groups sharing k indices.

    Group i covers [i*stride, i*stride + group_size) with
    stride = group_size - k. The stacked space concatenates all group
    copies (length g_tilde * group_size); gather/scatter move between it
    and the length-n signal space, playing the role of the group
    sub-selection matrices and their transpose.
    """

    def __init__(self, n: int, group_size: int, k: int):
        n, group_size, k = int(n), int(group_size), int(k)
        if group_size < 2 or group_size > n:
            raise ValueError(f"group_size must be in [2, n], got {group_size} for n={n}")
        if not 1 <= k <= group_size - 1:
            raise ValueError(f"overlap k must satisfy 1 <= k <= group_size-1, got k={k}")
        stride = group_size - k
        if (n - group_size) % stride != 0:
            raise ValueError(
                f"stride {stride} must divide n - group_size = {n - group_size} "
                f"so the last group ends at index n-1"
            )
        self.n = n
        self.group_size = group_size
        self.k = k
        self.stride = stride
        self.g_tilde = (n - group_size) // stride + 1
        starts = np.arange(self.g_tilde) * stride
        # signal index feeding each slot of the stacked group space
        self._stacked_index = (starts[:, None] + np.arange(group_size)[None, :]).ravel()
        self._stacked_index.setflags(write=False)
        counts = np.bincount(self._stacked_index, minlength=n)
        if np.any(counts == 0):
            raise ValueError("layout leaves some indices uncovered")
        self._counts = counts.astype(float)
        self._counts.setflags(write=False)

    @property
    def stacked_size(self) -> int:
        return self.g_tilde * self.group_size

    def groups(self) -> list[np.ndarray]:
        """Index set of each group, in order."""
        return list(self._stacked_index.reshape(self.g_tilde, self.group_size))

    def membership_counts(self) -> np.ndarray:
        """Per-element group membership count (diagonal of the stacked Gram)."""
        return self._counts

    def gather(self, x: np.ndarray) -> np.ndarray:
        """Signal space -> stacked group space (apply every group selector)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected length-{self.n} vector, got shape {x.shape}")
        return x[self._stacked_index]

    def scatter(self, stacked: np.ndarray) -> np.ndarray:
        """Stacked group space -> signal space (transpose of gather; adds overlaps)."""
        stacked = np.asarray(stacked, dtype=float)
        if stacked.shape != (self.stacked_size,):
            raise ValueError(
                f"expected length-{self.stacked_size} stacked vector, got shape {stacked.shape}"
            )
        return np.bincount(self._stacked_index, weights=stacked, minlength=self.n)


def build_latent_layout(n: int, group_size: int, k: int) -> LatentGroupLayout:
    """Overlapping-group layout with overlap k; use build_partition for k=0."""
    if int(k) == 0:
        raise ValueError("k=0 means disjoint groups; use build_partition instead")
    return LatentGroupLayout(n, group_size, k)


@dataclass(frozen=True)
class PenaltyConfig:
    """Weights of the element-wise (l1), group (l2), and fusion penalties."""

    lambda_e: float = 0.0
    lambda_g: float = 0.0
    lambda_f: float = 0.0

    def __post_init__(self):
        for name in ("lambda_e", "lambda_g", "lambda_f"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class AdmmConfig:
    """ADMM augmentation constants, iteration cap, and stopping tolerance.

    ``jacobi_updates=True`` makes the u/z sub-steps read the previous
    iterate's x instead of the freshly updated one; the default is the
    standard fresh-x (Gauss-Seidel) ordering. The stale-x ordering is kept
    for comparison only: it is linearly unstable when the shrinkage
    thresholds are small relative to the data, and the solvers raise a
    divergence error when that happens.
    """

    c_u: float = 2.0
    c_z: float = 2.0
    max_iter: int = 150
    tol: float = 1e-3
    jacobi_updates: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.c_u) and self.c_u > 0.0):
            raise ValueError(f"c_u must be finite and > 0, got {self.c_u}")
        if not (np.isfinite(self.c_z) and self.c_z > 0.0):
            raise ValueError(f"c_z must be finite and > 0, got {self.c_z}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (np.isfinite(self.tol) and self.tol > 0.0):
            raise ValueError(f"tol must be finite and > 0, got {self.tol}")
        object.__setattr__(self, "c_u", float(self.c_u))
        object.__setattr__(self, "c_z", float(self.c_z))
        object.__setattr__(self, "max_iter", int(self.max_iter))
        object.__setattr__(self, "tol", float(self.tol))


def fusion_penalty(x: np.ndarray) -> float:
    """Sum of absolute consecutive differences, sum_j |x[j] - x[j-1]|.

    This is the objective's fusion term; it differs from ||Dx||_1 by the
    |x[n-1]| contribution of the operator's last row.
    """
    x = as_signal(x)
    return float(np.abs(np.diff(x)).sum())


def _check_system(x: np.ndarray, y: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = as_signal(x)
    y = np.asarray(y, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2:
        raise ValueError(f"measurement matrix must be 2-D, got shape {phi.shape}")
    m, n = phi.shape
    if n != x.size:
        raise ValueError(f"matrix has {n} columns but signal has length {x.size}")
    if y.shape != (m,):
        raise ValueError(f"matrix has {m} rows but measurements have shape {y.shape}")
    return x, y, phi


def sgf_objective(
    x: np.ndarray,
    y: np.ndarray,
    phi: np.ndarray,
    partition: GroupPartition,
    penalties: PenaltyConfig,
) -> float:
    """Least-squares fit plus element-wise l1, disjoint-group l2, and fusion terms.

    0.5*||y - phi@x||^2 + lambda_e*||x||_1
    + lambda_g * sum_i ||x_i||_2 + lambda_f * fusion_penalty(x)
    """
    x, y, phi = _check_system(x, y, phi)
    if partition.n != x.size:
        raise ValueError(f"partition is for n={partition.n}, signal has length {x.size}")
    resid = y - phi @ x
    group_norms = np.linalg.norm(partition.group_view(x), axis=1)
    return float(
        0.5 * resid @ resid
        + penalties.lambda_e * np.abs(x).sum()
        + penalties.lambda_g * group_norms.sum()
        + penalties.lambda_f * fusion_penalty(x)
    )


def lgf_objective(
    x: np.ndarray,
    y: np.ndarray,
    phi: np.ndarray,
    layout: LatentGroupLayout,
    penalties: PenaltyConfig,
) -> float:
    """Least-squares fit plus overlapping-group l2 and full ||Dx||_1 terms.

    Elements in several groups contribute to every group norm containing
    them; there is no element-wise sparsity term. The fusion term here is
    ||Dx||_1 verbatim, last row included.
    """
    x, y, phi = _check_system(x, y, phi)
    if layout.n != x.size:
        raise ValueError(f"layout is for n={layout.n}, signal has length {x.size}")
    resid = y - phi @ x
    stacked = layout.gather(x).reshape(layout.g_tilde, layout.group_size)
    group_norms = np.linalg.norm(stacked, axis=1)
    dx = build_difference_operator(x.size).apply(x)
    return float(
        0.5 * resid @ resid
        + penalties.lambda_g * group_norms.sum()
        + penalties.lambda_f * np.abs(dx).sum()
    )


def mse(x_true: np.ndarray, x_hat: np.ndarray) -> float:
    """Mean squared error ||x_true - x_hat||_2^2 / n."""
    x_true = np.asarray(x_true, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x_true.shape != x_hat.shape:
        raise ValueError(f"length mismatch: {x_true.shape} vs {x_hat.shape}")
    d = x_true - x_hat
    return float(d @ d / x_true.size)
