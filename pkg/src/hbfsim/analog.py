"""Analog (constant-modulus) precoder and combiner designs.

Two families live here.  The column-iterative ascent (CIA) maximizes the
determinant of the reduced channel Gram ``|b^H d b|`` over matrices with
fixed entry magnitude ``1/sqrt(n)``, one entry at a time against the Schur
complement of the remaining columns.  The phase-projection family takes
dominant eigenvectors of a channel Gram and keeps only their phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .channel import ChannelSet
from .core import (ConfigError, Diagnostics, SolverError, SystemConfig,
                   _check_hermitian, eigh_desc, phase_project)


@dataclass(frozen=True)
class CiaSettings:
    """Stopping rule and numerics of the column-iterative ascent.

    A sweep updates every entry once; iteration stops when the largest
    entrywise change over a sweep drops below ``conv_tol`` or after
    ``max_sweeps`` sweeps.  ``reg_eps`` scales the ridge added to the
    reduced Gram when it is numerically singular.
    """

    max_sweeps: int = 100
    conv_tol: float = 1e-6
    reg_eps: float = 1e-10
    record_objective: bool = False


_DEFAULT_CIA = CiaSettings()


def _log2_volume(d: np.ndarray, b: np.ndarray) -> float:
    """log2 |det(b^H d b)|, -inf when the projected Gram is singular."""
    sign, logdet = np.linalg.slogdet(b.conj().T @ d @ b)
    if sign == 0:
        return float("-inf")
    return float(logdet / math.log(2.0))


def column_iterative(d: np.ndarray, m: int,
                     settings: CiaSettings | None = None,
                     diag: Diagnostics | None = None) -> np.ndarray:
    """Constant-modulus ascent on ``|det(b^H d b)|``.

    Parameters
    ----------
    d : (n, n) Hermitian PSD matrix (a channel Gram).
    m : number of columns to design, ``1 <= m <= n``.

    Returns
    -------
    (n, m) complex matrix with all entries of magnitude ``1/sqrt(n)``.

    Starting point is the all-constant matrix; entries are revisited in a
    fixed order so the result is deterministic.  The objective is
    non-decreasing over sweeps because each entry update is the exact
    phase-only maximizer given all other entries.
    """
    if settings is None:
        settings = _DEFAULT_CIA
    d = np.ascontiguousarray(_check_hermitian(d, "d"))
    n = d.shape[0]
    if not 1 <= m <= n:
        raise ConfigError("need 1 <= m <= n, got m=%d n=%d" % (m, n))
    scale = 1.0 / math.sqrt(n)
    b = np.full((n, m), scale + 0j)
    trace = [_log2_volume(d, b)] if settings.record_objective else None
    sweeps = 0
    for sweeps in range(1, settings.max_sweeps + 1):
        try:
            delta, n_reg = _kernels.cia_sweep(d, b, scale, settings.reg_eps)
        except RuntimeError as exc:
            raise SolverError(str(exc)) from exc
        if diag is not None:
            diag.cia_regularizations += n_reg
        if trace is not None:
            trace.append(_log2_volume(d, b))
        if delta < settings.conv_tol:
            break
    else:
        if diag is not None:
            diag.notes.append("cia: sweep cap %d reached" % settings.max_sweeps)
    if diag is not None:
        diag.cia_sweep_counts.append(sweeps)
        if trace is not None:
            diag.cia_objective_traces.append(trace)
    return b


def cia_analog_combiner(h_k: np.ndarray, n_cols: int,
                        settings: CiaSettings | None = None,
                        diag: Diagnostics | None = None) -> np.ndarray:
    """CIA combiner for one user from the receive-side Gram ``h h^H``.

    ``h_k`` is (n_r, n_t); returns (n_r, n_cols) with entries of magnitude
    ``1/sqrt(n_r)``.
    """
    gram = h_k @ h_k.conj().T
    return column_iterative(gram, n_cols, settings, diag)


def cia_analog_precoder(h_stack: np.ndarray, w_blkdiag: np.ndarray,
                        n_cols: int, settings: CiaSettings | None = None,
                        diag: Diagnostics | None = None) -> np.ndarray:
    """CIA precoder from the combined-channel Gram ``h^H w w^H h``.

    ``h_stack`` is the (k*n_r, n_t) stacked channel and ``w_blkdiag`` the
    block-diagonal collection of user combiners; returns (n_t, n_cols).
    """
    z = h_stack.conj().T @ w_blkdiag
    gram = z @ z.conj().T
    return column_iterative(gram, n_cols, settings, diag)


def block_diag_combiners(w_list: list[np.ndarray]) -> np.ndarray:
    """Stack per-user combiners into one block-diagonal matrix."""
    return scipy.linalg.block_diag(*w_list)


def recursive_cia(channels: ChannelSet, cfg: SystemConfig,
                  settings: CiaSettings | None = None,
                  outer_max: int = 10,
                  diag: Diagnostics | None = None
                  ) -> tuple[np.ndarray, list[np.ndarray]]:
    """Alternating CIA over the transmit precoder and all user combiners.

    Each outer pass designs every user combiner against the Gram of its
    precoded channel block and then the precoder against the combined
    channel of all users; both inner problems restart the ascent from the
    all-constant matrix.  Stops when no matrix entry moved by more than
    ``settings.conv_tol`` over a pass, else after ``outer_max`` passes with
    ``diag.converged`` cleared.

    Requires ``n_rf_t == k_users * n_s`` so precoder columns split into
    per-user blocks.  Returns ``(f_rf, w_rf_list)``.
    """
    if settings is None:
        settings = _DEFAULT_CIA
    n_s, n_r, n_t = cfg.n_s, cfg.n_r, cfg.n_t
    k = cfg.k_users
    if cfg.n_rf_t != k * n_s:
        raise ConfigError(
            "recursive design needs n_rf_t == k_users*n_s (got %d != %d)"
            % (cfg.n_rf_t, k * n_s))
    w_list = [np.full((n_r, n_s), 1.0 / math.sqrt(n_r) + 0j)
              for _ in range(k)]
    f_rf = np.full((n_t, k * n_s), 1.0 / math.sqrt(n_t) + 0j)
    h_stack = channels.stacked()
    converged = False
    it = 0
    for it in range(1, outer_max + 1):
        f_prev = f_rf.copy()
        w_prev = [w.copy() for w in w_list]
        for kk in range(k):
            z = channels.h[kk] @ f_rf[:, kk * n_s:(kk + 1) * n_s]
            gram = z @ z.conj().T
            w_list[kk] = column_iterative(gram, n_s, settings, diag)
        f_rf = cia_analog_precoder(h_stack, block_diag_combiners(w_list),
                                   k * n_s, settings, diag)
        delta = float(np.max(np.abs(f_rf - f_prev)))
        for kk in range(k):
            delta = max(delta, float(np.max(np.abs(w_list[kk] - w_prev[kk]))))
        if delta < settings.conv_tol:
            converged = True
            break
    if diag is not None:
        diag.outer_iterations = it
        if not converged:
            diag.converged = False
            diag.notes.append("recursive cia: outer cap %d reached" % outer_max)
    return f_rf, w_list


def svd_phase_combiner(h_k: np.ndarray, n_cols: int) -> np.ndarray:
    """Phases of the ``n_cols`` dominant left singular vectors of ``h_k``,
    at magnitude ``1/sqrt(n_r)``.  Shape (n_r, n_cols)."""
    n_r = h_k.shape[0]
    _, v = eigh_desc(h_k @ h_k.conj().T)
    return phase_project(v[:, :n_cols], 1.0 / math.sqrt(n_r))


def conjugate_phase_precoder(h_k: np.ndarray,
                             w_rf_k: np.ndarray) -> np.ndarray:
    """Phase-only matched filter to the combined channel of one user:
    ``Psi(h^H w)`` at magnitude ``1/sqrt(n_t)``.  Shape (n_t, cols(w))."""
    n_t = h_k.shape[1]
    return phase_project(h_k.conj().T @ w_rf_k, 1.0 / math.sqrt(n_t))


def eig_phase_precoder(h_stack: np.ndarray, w_blkdiag: np.ndarray,
                       n_cols: int) -> np.ndarray:
    """Phases of the dominant eigenvectors of the combined-channel Gram
    ``h^H w w^H h``, at magnitude ``1/sqrt(n_t)``.  Shape (n_t, n_cols)."""
    n_t = h_stack.shape[1]
    z = h_stack.conj().T @ w_blkdiag
    _, v = eigh_desc(z @ z.conj().T)
    return phase_project(v[:, :n_cols], 1.0 / math.sqrt(n_t))
