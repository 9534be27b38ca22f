"""Baseband (digital) precoder and combiner designs.

The workhorse is the power-constrained linear MMSE precoder: minimize the
receive-side mean-square error over precoders satisfying a quadratic power
constraint ``tr(a @ f @ r_x @ f^H) = e_t``, allowing for a receiver-side
scalar.  Block diagonalization and the per-user SVD combiner cover the
interference-nulling baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (ConfigError, Diagnostics, SolverError, _check_hermitian,
                   eigh_desc, svd_sorted)


@dataclass
class MmseProblem:
    """Data of one constrained MMSE design.

    ``h_eff`` is the effective channel seen by the precoder (rows are
    receive streams, columns transmit ports); ``constraint`` the Hermitian
    PSD weight ``a`` of the power constraint; ``r_x`` / ``r_n`` the input
    and noise covariances; ``e_t`` the power budget.
    """

    h_eff: np.ndarray
    constraint: np.ndarray
    r_x: np.ndarray
    r_n: np.ndarray
    e_t: float


@dataclass
class MmseSolution:
    """Precoder ``f`` plus the receiver scale ``beta``.

    ``beta * h_eff @ f`` is the end-to-end map the MSE is measured
    against; ``f`` itself satisfies the power constraint exactly.
    """

    f: np.ndarray
    beta: float


def _solve_regularized(m: np.ndarray, rhs: np.ndarray,
                       diag: Diagnostics | None = None) -> np.ndarray:
    """Solve ``m x = rhs`` with one diagonal-ridge retry on singularity."""
    try:
        x = np.linalg.solve(m, rhs)
        if np.all(np.isfinite(x)):
            return x
    except np.linalg.LinAlgError:
        pass
    if diag is not None:
        diag.solver_regularizations += 1
    n = m.shape[0]
    ridge = 1e-12 * max(float(np.trace(m).real) / n, 1.0)
    m_reg = m + ridge * np.eye(n)
    try:
        x = np.linalg.solve(m_reg, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError("system singular after regularization "
                          "(cond %.3e)" % float(np.linalg.cond(m))) from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("system singular after regularization "
                          "(cond %.3e)" % float(np.linalg.cond(m)))
    return x


def constrained_mmse(problem: MmseProblem,
                     diag: Diagnostics | None = None) -> MmseSolution:
    """Linear MMSE precoder under ``tr(a f r_x f^H) = e_t``.

    The unscaled direction is ``f0 = (h^H h + (tr(r_n)/e_t) a)^{-1} h^H``;
    the receiver scale ``beta = sqrt(tr(a f0 r_x f0^H) / e_t)`` then fixes
    the power, with the returned precoder ``f = f0 / beta``.  At the
    optimum the pair satisfies the stationarity condition
    ``beta^2 h^H h f + lambda a f = beta h^H`` with
    ``lambda/beta^2 = tr(r_n)/e_t``.
    """
    h = np.asarray(problem.h_eff, dtype=np.complex128)
    a = _check_hermitian(problem.constraint, "constraint")
    r_x = _check_hermitian(problem.r_x, "r_x")
    r_n = _check_hermitian(problem.r_n, "r_n")
    e_t = float(problem.e_t)
    if e_t <= 0.0:
        raise ConfigError("power budget must be positive")
    m = h.conj().T @ h + (float(np.trace(r_n).real) / e_t) * a
    m = 0.5 * (m + m.conj().T)
    f0 = _solve_regularized(m, h.conj().T, diag)
    energy = float(np.trace(a @ f0 @ r_x @ f0.conj().T).real)
    if energy <= 0.0 or not np.isfinite(energy):
        raise SolverError("constraint energy %r is not positive" % energy)
    beta = math.sqrt(energy / e_t)
    return MmseSolution(f=f0 / beta, beta=beta)


def mmse_mse(problem: MmseProblem, f: np.ndarray, beta: float) -> float:
    """Mean-square error of a candidate pair under the problem data:
    ``tr((i - beta h f) r_x (.)^H) + beta^2 tr(r_n)``."""
    h = problem.h_eff
    r = np.eye(h.shape[0]) - beta * (h @ f)
    return float((np.trace(r @ problem.r_x @ r.conj().T)
                  + beta ** 2 * np.trace(problem.r_n)).real)


def mmse_bb(h_tilde: np.ndarray, f_rf: np.ndarray, gamma: float, e_t: float,
            diag: Diagnostics | None = None) -> np.ndarray:
    """Baseband MMSE precoder behind a fixed RF stage.

    ``h_tilde`` is the effective channel through combiners and RF precoder
    (k*n_s rows, n_rf_t columns), ``gamma`` the trace of the combined
    post-combining noise covariance.  Returns the unscaled direction

        (h^H h + (gamma/e_t) f_rf^H f_rf)^{-1} h^H

    whose final transmit scale is fixed later by power normalization; that
    two-step form equals the exactly constrained solver with constraint
    weight ``f_rf^H f_rf``.
    """
    h = np.asarray(h_tilde, dtype=np.complex128)
    a = f_rf.conj().T @ f_rf
    m = h.conj().T @ h + (float(gamma) / float(e_t)) * a
    m = 0.5 * (m + m.conj().T)
    return _solve_regularized(m, h.conj().T, diag)


def pseudo_mmse(h_bb: np.ndarray, noise_var: float,
                diag: Diagnostics | None = None) -> np.ndarray:
    """Regularized channel inverse ``h^H (h h^H + noise_var i)^{-1}``.

    This is the classical MMSE transmit filter that ignores the RF-stage
    power coloring; used by the designs that normalize power afterwards.
    """
    h = np.asarray(h_bb, dtype=np.complex128)
    s = h @ h.conj().T + float(noise_var) * np.eye(h.shape[0])
    s = 0.5 * (s + s.conj().T)
    return _solve_regularized(s, h, diag).conj().T


@dataclass
class BdOutput:
    """Block-diagonalization result over the effective baseband channel.

    ``f_bb`` concatenates per-user blocks ``f_a_k @ f_b_k`` (n_rf_t rows,
    k*n_s columns); ``w_bb`` holds the per-user combiners; the diagonal
    power loading is kept explicit (identity here: equal allocation).
    """

    f_bb: np.ndarray
    w_bb: list[np.ndarray] = field(default_factory=list)
    power_loading: list[np.ndarray] = field(default_factory=list)


def bd_precoder(h_bb_list: list[np.ndarray], n_s: int,
                rank_tol: float = 1e-10,
                diag: Diagnostics | None = None) -> BdOutput:
    """Interference-nulling baseband design.

    Each user's precoder block lives in the null space of the other users'
    stacked effective channels (``f_a_k``, null directions ordered by
    ascending singular value) and aligns with its own channel inside that
    subspace through a second SVD (``f_b_k``, combiner from the matching
    left vectors).  Raises if any null space is thinner than ``n_s``.
    """
    k = len(h_bb_list)
    n_rf_t = h_bb_list[0].shape[1]
    f_blocks = []
    w_bb = []
    loading = []
    for kk in range(k):
        others = [h_bb_list[j] for j in range(k) if j != kk]
        if others:
            stack = np.vstack(others)
            _, s, vh = svd_sorted(stack, full_matrices=True)
            s_max = float(s[0]) if s.size else 0.0
            rank = int(np.sum(s > rank_tol * s_max)) if s_max > 0.0 else 0
            null_dim = n_rf_t - rank
            if null_dim < n_s:
                raise ConfigError(
                    "user %d null space has %d < %d directions"
                    % (kk, null_dim, n_s))
            v = vh.conj().T
            # smallest singular directions first (purest null space)
            f_a = v[:, ::-1][:, :n_s]
        else:
            f_a = np.eye(n_rf_t, dtype=np.complex128)[:, :n_s]
        h_eff = h_bb_list[kk] @ f_a
        u2, _, vh2 = svd_sorted(h_eff, full_matrices=False)
        lam = np.eye(n_s, dtype=np.complex128)
        f_b = vh2.conj().T[:, :n_s] @ lam
        f_blocks.append(f_a @ f_b)
        w_bb.append(u2[:, :n_s])
        loading.append(lam)
    return BdOutput(f_bb=np.hstack(f_blocks), w_bb=w_bb,
                    power_loading=loading)


def svd_digital_combiner(h_check: np.ndarray, n_s: int) -> np.ndarray:
    """Dominant ``n_s`` eigenvectors of ``h h^H`` for the post-RF channel
    ``h_check`` (n_rf_r rows).  Orthonormal columns, shape (n_rf_r, n_s)."""
    _, v = eigh_desc(h_check @ h_check.conj().T)
    return v[:, :n_s]
