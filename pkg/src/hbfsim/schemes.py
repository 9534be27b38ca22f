"""End-to-end wiring of the seven precoder/combiner designs.

Every design factors into a noise-independent part (all analog matrices,
plus any digital matrices that depend only on the channel) and a
noise-dependent baseband precoder.  ``design_channel_stage`` /
``design_noise_stage`` expose that split so an SNR sweep can reuse the
expensive first part; ``design`` composes the two.

All finished designs satisfy the same invariants: constant-modulus RF
entries (``1/sqrt(n_t)`` transmit, ``1/sqrt(n_r)`` receive) and composite
transmit power ``||f_rf @ f_bb||_F**2 == k_users * n_s``.
"""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass

import numpy as np

from .analog import (CiaSettings, block_diag_combiners, cia_analog_combiner,
                     cia_analog_precoder, conjugate_phase_precoder,
                     eig_phase_precoder, recursive_cia, svd_phase_combiner)
from .channel import ChannelSet
from .core import (ConfigError, Diagnostics, HybridPrecoder, SystemConfig,
                   UserCombiner, normalize_power)
from .digital import bd_precoder, mmse_bb, pseudo_mmse, svd_digital_combiner
from .metrics import eig_product_metric


class SchemeId(str, enum.Enum):
    """Stable identifiers of the seven designs (used in CLI and CSV)."""

    REF21_SVD_MMSE = "REF21_SVD_MMSE"
    REF29_CIA_BD = "REF29_CIA_BD"
    M3_CIA_MMSE = "M3_CIA_MMSE"
    P_CIA_STAR_MMSE_STAR = "P_CIA_STAR_MMSE_STAR"
    P_SVD_MMSE_STAR = "P_SVD_MMSE_STAR"
    P_CIA_MMSE_STAR = "P_CIA_MMSE_STAR"
    P_SVD_STAR_MMSE_STAR = "P_SVD_STAR_MMSE_STAR"


#: Designs whose per-user RF precoder blocks require n_rf_t == k_users*n_s.
_BLOCK_SCHEMES = frozenset({
    SchemeId.REF21_SVD_MMSE,
    SchemeId.P_SVD_MMSE_STAR,
    SchemeId.P_CIA_STAR_MMSE_STAR,
})

#: Designs that skip digital combining, so the RF combiner must produce
#: exactly n_s outputs.
_IDENTITY_WBB_CIA = frozenset({
    SchemeId.M3_CIA_MMSE,
    SchemeId.P_CIA_MMSE_STAR,
})


@dataclass
class ChannelStage:
    """Noise-independent part of a design.

    ``w_bb_list`` is ``None`` for designs that combine in RF only;
    ``f_bb_fixed`` is set when the baseband precoder itself does not
    depend on the noise level (interference nulling).  ``h_bb_analog`` is
    the effective channel through the RF stages only, used both by the
    eigenvalue metric and as input to the noise-dependent solvers.
    """

    scheme: SchemeId
    cfg: SystemConfig
    f_rf: np.ndarray
    w_rf_list: list[np.ndarray]
    w_bb_list: list[np.ndarray] | None
    h_bb_analog: np.ndarray
    f_bb_fixed: np.ndarray | None
    diagnostics: Diagnostics


@dataclass
class DesignResult:
    """Finished design: transmit pair, per-user combiners, telemetry."""

    precoder: HybridPrecoder
    combiners: list[UserCombiner]
    diagnostics: Diagnostics


def design_channel_stage(scheme: SchemeId, channels: ChannelSet,
                         cfg: SystemConfig,
                         settings: CiaSettings | None = None
                         ) -> ChannelStage:
    """Run the noise-independent part of ``scheme`` on one channel set."""
    scheme = SchemeId(scheme)
    diag = Diagnostics()
    k, n_s = cfg.k_users, cfg.n_s
    h_stack = channels.stacked()
    w_bb_list = None
    f_bb_fixed = None

    if scheme in _BLOCK_SCHEMES and cfg.n_rf_t != k * n_s:
        raise ConfigError(
            "%s needs n_rf_t == k_users*n_s (got %d != %d)"
            % (scheme.value, cfg.n_rf_t, k * n_s))
    if scheme in _IDENTITY_WBB_CIA and cfg.n_rf_r != n_s:
        raise ConfigError(
            "%s needs n_rf_r == n_s (got %d != %d)"
            % (scheme.value, cfg.n_rf_r, n_s))

    if scheme in (SchemeId.REF21_SVD_MMSE, SchemeId.P_SVD_MMSE_STAR):
        w_rf_list = [svd_phase_combiner(h_k, n_s) for h_k in channels.h]
        f_rf = np.hstack([conjugate_phase_precoder(h_k, w_k)
                          for h_k, w_k in zip(channels.h, w_rf_list)])
    elif scheme in _IDENTITY_WBB_CIA:
        w_rf_list = [cia_analog_combiner(h_k, n_s, settings, diag)
                     for h_k in channels.h]
        f_rf = cia_analog_precoder(h_stack, block_diag_combiners(w_rf_list),
                                   cfg.n_rf_t, settings, diag)
    elif scheme is SchemeId.REF29_CIA_BD:
        w_rf_list = [cia_analog_combiner(h_k, cfg.n_rf_r, settings, diag)
                     for h_k in channels.h]
        f_rf = cia_analog_precoder(h_stack, block_diag_combiners(w_rf_list),
                                   cfg.n_rf_t, settings, diag)
    elif scheme is SchemeId.P_CIA_STAR_MMSE_STAR:
        f_rf, w_rf_list = recursive_cia(channels, cfg, settings, diag=diag)
    elif scheme is SchemeId.P_SVD_STAR_MMSE_STAR:
        w_rf_list = [svd_phase_combiner(h_k, cfg.n_rf_r)
                     for h_k in channels.h]
        w_bb_list = [svd_digital_combiner(w_k.conj().T @ h_k, n_s)
                     for h_k, w_k in zip(channels.h, w_rf_list)]
        composite = [w_rf_list[kk] @ w_bb_list[kk] for kk in range(k)]
        f_rf = eig_phase_precoder(h_stack, block_diag_combiners(composite),
                                  cfg.n_rf_t)
    else:  # pragma: no cover - enum is exhaustive
        raise ConfigError("unhandled scheme %r" % (scheme,))

    h_bb_analog = block_diag_combiners(w_rf_list).conj().T @ h_stack @ f_rf
    diag.eig_metric = eig_product_metric(h_bb_analog, n_values=k * n_s)

    if scheme is SchemeId.REF29_CIA_BD:
        blocks = [w_rf_list[kk].conj().T @ channels.h[kk] @ f_rf
                  for kk in range(k)]
        bd = bd_precoder(blocks, n_s, diag=diag)
        f_bb_fixed = bd.f_bb
        w_bb_list = bd.w_bb

    return ChannelStage(scheme=scheme, cfg=cfg, f_rf=f_rf,
                        w_rf_list=w_rf_list, w_bb_list=w_bb_list,
                        h_bb_analog=h_bb_analog, f_bb_fixed=f_bb_fixed,
                        diagnostics=diag)


def design_noise_stage(stage: ChannelStage, noise_var: float) -> DesignResult:
    """Finish a design for one noise level and normalize transmit power."""
    cfg = stage.cfg
    k, n_s = cfg.k_users, cfg.n_s
    diag = copy.deepcopy(stage.diagnostics)
    scheme = stage.scheme

    if scheme is SchemeId.REF29_CIA_BD:
        f_bb = stage.f_bb_fixed
    elif scheme in (SchemeId.REF21_SVD_MMSE, SchemeId.M3_CIA_MMSE):
        f_bb = pseudo_mmse(stage.h_bb_analog, noise_var, diag)
    else:
        # power-constrained MMSE behind the fixed RF stage; the noise the
        # receiver actually sees is colored by its combiner
        if stage.w_bb_list is None:
            h_tilde = stage.h_bb_analog
            cov_list = [noise_var * (w.conj().T @ w)
                        for w in stage.w_rf_list]
        else:
            h_tilde = (block_diag_combiners(stage.w_bb_list).conj().T
                       @ stage.h_bb_analog)
            cov_list = []
            for w_rf, w_bb in zip(stage.w_rf_list, stage.w_bb_list):
                w = w_rf @ w_bb
                cov_list.append(noise_var * (w.conj().T @ w))
        gamma = float(sum(np.trace(c).real for c in cov_list))
        f_bb = mmse_bb(h_tilde, stage.f_rf, gamma, cfg.e_t, diag)

    precoder = normalize_power(HybridPrecoder(stage.f_rf, f_bb), cfg.e_t)
    combiners = []
    for kk in range(k):
        w_rf = stage.w_rf_list[kk]
        if stage.w_bb_list is None:
            w_bb = np.eye(w_rf.shape[1], n_s, dtype=np.complex128)
        else:
            w_bb = stage.w_bb_list[kk]
        combiners.append(UserCombiner(w_rf=w_rf, w_bb=w_bb))
    return DesignResult(precoder=precoder, combiners=combiners,
                        diagnostics=diag)


def design(scheme: SchemeId, channels: ChannelSet, cfg: SystemConfig,
           settings: CiaSettings | None = None) -> DesignResult:
    """Full design of ``scheme`` at the configured noise variance."""
    stage = design_channel_stage(scheme, channels, cfg, settings)
    return design_noise_stage(stage, cfg.noise_var)
