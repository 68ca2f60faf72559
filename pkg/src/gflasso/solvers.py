"""ADMM solvers for the two group-fused formulations.

Both solvers split the composite objective with auxiliary variables
(group copies u and the difference image z = Dx), solve the quadratic
x-step through one precomputed Cholesky factorization, apply the
closed-form shrinkages from :mod:`gflasso.prox` to u and z, and ascend
the multipliers. Iterations stop when the l2 change between successive
x iterates falls below the configured tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .problem import (
    AdmmConfig,
    DifferenceOperator,
    GroupPartition,
    LatentGroupLayout,
    PenaltyConfig,
    as_signal,
)
from .prox import block_shrink, soft_threshold, sparse_group_shrink

VARIANT_KINDS = ("lasso", "g_lasso", "sg_lasso", "f_lasso", "sgf", "lgf")


class SolverDivergenceError(RuntimeError):
    """A solver produced a non-finite iterate; carries the iteration index."""

    def __init__(self, solver: str, iteration: int):
        super().__init__(f"{solver} produced a non-finite iterate at iteration {iteration}")
        self.solver = solver
        self.iteration = iteration


class LinearSystemFactor:
    """Cached Cholesky factorization of an x-step system matrix.

    Immutable once built; one instance can back any number of solves that
    share the same measurement matrix and config.
    """

    def __init__(self, matrix: np.ndarray, formulation: str):
        self.matrix = matrix
        self.formulation = formulation
        self._cho = cho_factor(matrix, lower=True)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve(self._cho, b)


def _check_phi(phi: np.ndarray, n: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[1] != n:
        raise ValueError(f"measurement matrix must be m-by-{n}, got shape {phi.shape}")
    if not np.all(np.isfinite(phi)):
        raise ValueError("measurement matrix contains non-finite entries")
    return phi


def factorize_sgf(phi: np.ndarray, diff_op: DifferenceOperator, admm: AdmmConfig) -> LinearSystemFactor:
    """Factor phi.T@phi + c_z*D.T@D + c_u*I for the disjoint-group x-step.

    The c_u*I term makes the matrix positive definite regardless of phi.
    """
    phi = _check_phi(phi, diff_op.n)
    a = phi.T @ phi + admm.c_z * diff_op.gram()
    a[np.diag_indices_from(a)] += admm.c_u
    return LinearSystemFactor(a, "sgf")


def factorize_lgf(
    phi: np.ndarray,
    diff_op: DifferenceOperator,
    layout: LatentGroupLayout,
    admm: AdmmConfig,
) -> LinearSystemFactor:
    """Factor phi.T@phi + c_z*D.T@D + c_u*diag(membership counts).

    The stacked-selector Gram matrix is diagonal (the per-element group
    membership counts), so it is never assembled explicitly. Every count
    must be >= 1 for positive definiteness.
    """
    phi = _check_phi(phi, diff_op.n)
    if layout.n != diff_op.n:
        raise ValueError(f"layout is for n={layout.n}, operator for n={diff_op.n}")
    counts = layout.membership_counts()
    if np.any(counts < 1):
        raise ValueError("layout leaves some indices uncovered; system could be singular")
    a = phi.T @ phi + admm.c_z * diff_op.gram()
    a[np.diag_indices_from(a)] += admm.c_u * counts
    return LinearSystemFactor(a, "lgf")


@dataclass(frozen=True)
class SolveReport:
    """Estimate plus per-iteration diagnostics.

    objective is the value the splitting actually minimizes (fusion term
    ||Dx||_1, last row included); fusion_objective replaces it with the
    plain sum of consecutive differences. primal_residual_u is ||u - x||_2
    for the disjoint-group solver and the stacked ||u - Wx||_2 for the
    overlapping one. All traces have length == iterations.
    """

    x_hat: np.ndarray
    iterations: int
    converged: bool
    objective: np.ndarray
    fusion_objective: np.ndarray
    primal_residual_u: np.ndarray
    primal_residual_z: np.ndarray
    x_change: np.ndarray


def least_squares_init(y: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution of y = phi @ x, for warm starts."""
    return np.linalg.lstsq(np.asarray(phi, dtype=float), np.asarray(y, dtype=float), rcond=None)[0]


def sgf_admm_solve(
    y: np.ndarray,
    phi: np.ndarray,
    partition: GroupPartition,
    penalties: PenaltyConfig,
    admm: AdmmConfig,
    init: np.ndarray | None = None,
    factor: LinearSystemFactor | None = None,
) -> SolveReport:
    """Solve the sparse-group-fused formulation (disjoint groups) by ADMM.

    Minimizes 0.5*||y - phi@x||^2 + lambda_e*||x||_1
    + lambda_g*sum_i ||x_i||_2 + lambda_f*||Dx||_1 over the partition's
    groups. Zero initialization by default; pass ``init`` (e.g. a
    least-squares solution) to warm-start, or ``factor`` to reuse a
    prebuilt x-step factorization.
    """
    n = partition.n
    diff_op = DifferenceOperator(n)
    phi = _check_phi(phi, n)
    y = np.asarray(y, dtype=float)
    if y.shape != (phi.shape[0],):
        raise ValueError(f"measurements must have shape ({phi.shape[0]},), got {y.shape}")
    if factor is None:
        factor = factorize_sgf(phi, diff_op, admm)

    c_u, c_z = admm.c_u, admm.c_z
    tau_e, tau_g, tau_f = penalties.lambda_e / c_u, penalties.lambda_g / c_u, penalties.lambda_f / c_z

    if init is None:
        x = np.zeros(n)
    else:
        x = as_signal(init).copy()
        if x.size != n:
            raise ValueError(f"init has length {x.size}, expected {n}")
    u = x.copy()
    z = diff_op.apply(x)
    rho_u = np.zeros(n)
    rho_z = np.zeros(n)
    phi_t_y = phi.T @ y

    def objective_at(x_val, dx_val, resid):
        fit = 0.5 * float(resid @ resid)
        pen = (
            penalties.lambda_e * float(np.abs(x_val).sum())
            + penalties.lambda_g * float(np.linalg.norm(partition.group_view(x_val), axis=1).sum())
        )
        full = fit + pen + penalties.lambda_f * float(np.abs(dx_val).sum())
        return full, full - penalties.lambda_f * abs(float(x_val[-1]))

    obj_trace, fobj_trace, ru_trace, rz_trace, dx_trace = [], [], [], [], []
    converged = False
    iterations = 0
    for it in range(1, admm.max_iter + 1):
        x_prev = x
        rhs = phi_t_y + diff_op.apply_transpose(rho_z + c_z * z) + rho_u + c_u * u
        if not np.all(np.isfinite(rhs)):
            raise SolverDivergenceError("sgf_admm_solve", it)
        x = factor.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SolverDivergenceError("sgf_admm_solve", it)

        x_sub = x_prev if admm.jacobi_updates else x
        u = sparse_group_shrink(
            partition.group_view(x_sub - rho_u / c_u), tau_e, tau_g, axis=-1
        ).ravel()
        z = soft_threshold(diff_op.apply(x_sub) - rho_z / c_z, tau_f)

        dx_new = diff_op.apply(x)
        rho_u = rho_u + c_u * (u - x)
        rho_z = rho_z + c_z * (z - dx_new)

        obj, fobj = objective_at(x, dx_new, y - phi @ x)
        obj_trace.append(obj)
        fobj_trace.append(fobj)
        ru_trace.append(float(np.linalg.norm(u - x)))
        rz_trace.append(float(np.linalg.norm(z - dx_new)))
        step = float(np.linalg.norm(x - x_prev))
        dx_trace.append(step)
        iterations = it
        # the x step can reproduce a warm start exactly before any dual has
        # moved, so the successive-change test only counts from iteration 2
        if it >= 2 and step <= admm.tol:
            converged = True
            break

    return SolveReport(
        x_hat=x,
        iterations=iterations,
        converged=converged,
        objective=np.asarray(obj_trace),
        fusion_objective=np.asarray(fobj_trace),
        primal_residual_u=np.asarray(ru_trace),
        primal_residual_z=np.asarray(rz_trace),
        x_change=np.asarray(dx_trace),
    )


def lgf_admm_solve(
    y: np.ndarray,
    phi: np.ndarray,
    layout: LatentGroupLayout,
    penalties: PenaltyConfig,
    admm: AdmmConfig,
    init: np.ndarray | None = None,
    factor: LinearSystemFactor | None = None,
) -> SolveReport:
    """Solve the latent-group-fused formulation (overlapping groups) by ADMM.

    Minimizes 0.5*||y - phi@x||^2 + lambda_g*sum_i ||W_i x||_2
    + lambda_f*||Dx||_1; there is no element-wise sparsity term, so
    penalties.lambda_e is ignored. The auxiliary group variable lives in
    the layout's stacked space and is shrunk one group row at a time.
    """
    n = layout.n
    diff_op = DifferenceOperator(n)
    phi = _check_phi(phi, n)
    y = np.asarray(y, dtype=float)
    if y.shape != (phi.shape[0],):
        raise ValueError(f"measurements must have shape ({phi.shape[0]},), got {y.shape}")
    if factor is None:
        factor = factorize_lgf(phi, diff_op, layout, admm)

    c_u, c_z = admm.c_u, admm.c_z
    tau_g, tau_f = penalties.lambda_g / c_u, penalties.lambda_f / c_z
    rows = (layout.g_tilde, layout.group_size)

    if init is None:
        x = np.zeros(n)
    else:
        x = as_signal(init).copy()
        if x.size != n:
            raise ValueError(f"init has length {x.size}, expected {n}")
    ut = layout.gather(x)
    z = diff_op.apply(x)
    rho_ut = np.zeros(layout.stacked_size)
    rho_z = np.zeros(n)
    phi_t_y = phi.T @ y

    def objective_at(x_val, wx_val, dx_val, resid):
        fit = 0.5 * float(resid @ resid)
        pen = penalties.lambda_g * float(np.linalg.norm(wx_val.reshape(rows), axis=1).sum())
        full = fit + pen + penalties.lambda_f * float(np.abs(dx_val).sum())
        return full, full - penalties.lambda_f * abs(float(x_val[-1]))

    obj_trace, fobj_trace, ru_trace, rz_trace, dx_trace = [], [], [], [], []
    converged = False
    iterations = 0
    for it in range(1, admm.max_iter + 1):
        x_prev = x
        rhs = phi_t_y + diff_op.apply_transpose(rho_z + c_z * z) + layout.scatter(rho_ut + c_u * ut)
        if not np.all(np.isfinite(rhs)):
            raise SolverDivergenceError("lgf_admm_solve", it)
        x = factor.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SolverDivergenceError("lgf_admm_solve", it)

        x_sub = x_prev if admm.jacobi_updates else x
        ut = block_shrink(
            (layout.gather(x_sub) - rho_ut / c_u).reshape(rows), tau_g, axis=-1
        ).ravel()
        z = soft_threshold(diff_op.apply(x_sub) - rho_z / c_z, tau_f)

        wx_new = layout.gather(x)
        dx_new = diff_op.apply(x)
        rho_ut = rho_ut + c_u * (ut - wx_new)
        rho_z = rho_z + c_z * (z - dx_new)

        obj, fobj = objective_at(x, wx_new, dx_new, y - phi @ x)
        obj_trace.append(obj)
        fobj_trace.append(fobj)
        ru_trace.append(float(np.linalg.norm(ut - wx_new)))
        rz_trace.append(float(np.linalg.norm(z - dx_new)))
        step = float(np.linalg.norm(x - x_prev))
        dx_trace.append(step)
        iterations = it
        # same guard as the disjoint solver: never stop on the first cycle
        if it >= 2 and step <= admm.tol:
            converged = True
            break

    return SolveReport(
        x_hat=x,
        iterations=iterations,
        converged=converged,
        objective=np.asarray(obj_trace),
        fusion_objective=np.asarray(fobj_trace),
        primal_residual_u=np.asarray(ru_trace),
        primal_residual_z=np.asarray(rz_trace),
        x_change=np.asarray(dx_trace),
    )


def variant_config(kind: str, base: PenaltyConfig) -> PenaltyConfig:
    """Zero out the penalties a formulation variant excludes.

    lasso keeps only lambda_e, g_lasso only lambda_g, sg_lasso drops the
    fusion term, f_lasso drops the group term, lgf drops the element-wise
    term, and sgf keeps everything.
    """
    if kind not in VARIANT_KINDS:
        raise ValueError(f"unknown variant kind {kind!r}, expected one of {VARIANT_KINDS}")
    keep_e = kind in ("lasso", "sg_lasso", "f_lasso", "sgf")
    keep_g = kind in ("g_lasso", "sg_lasso", "sgf", "lgf")
    keep_f = kind in ("f_lasso", "sgf", "lgf")
    return PenaltyConfig(
        lambda_e=base.lambda_e if keep_e else 0.0,
        lambda_g=base.lambda_g if keep_g else 0.0,
        lambda_f=base.lambda_f if keep_f else 0.0,
    )
