"""Link-quality metrics evaluated on finished designs.

The eigenvalue-product metric scores the analog stage alone (the digital
precoders are matched to noise, so comparing RF front ends is only fair
before them); sum rate and BER evaluate the full design including the
baseband parts.  BER trials draw their symbols and noise from a stream
keyed only on the trial seed, so every scheme, detector and SNR point in
one trial sees identical realizations (paired comparison).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .detection import (Constellation, DetectorMode, _APPROXIMATE, _WHITENED,
                        detect_batch, effective_matrix,
                        interference_covariance, noise_covariance)

if TYPE_CHECKING:
    from .channel import ChannelSet
    from .schemes import DesignResult

#: second Philox key word of the symbol/noise stream; keeps BER draws
#: disjoint from channel draws (which use the user index there)
_BER_STREAM = 0x0B17E7


@dataclass
class TrialRecord:
    """Per-trial measurement bundle for one (scheme, detector, snr) cell."""

    eig_metric: float
    sum_rate: float
    bit_errors: int
    bits_sent: int


def eig_product_metric(h_bb: np.ndarray, n_values: int | None = None) -> float:
    """Log-volume of the effective baseband channel:
    ``sum_i log2(sigma_i**2)`` over the ``n_values`` largest singular
    values.  Returns ``-inf`` when any counted singular value is zero."""
    s = np.linalg.svd(np.asarray(h_bb, dtype=np.complex128),
                      compute_uv=False)
    if n_values is not None:
        if n_values > s.size:
            raise ValueError("asked for %d singular values, have %d"
                             % (n_values, s.size))
        s = s[:n_values]
    if np.any(s <= 0.0):
        return float("-inf")
    return float(2.0 * np.sum(np.log2(s)))


def sum_rate(channels: "ChannelSet", result: "DesignResult",
             noise_var: float) -> float:
    """Achievable downlink sum rate in bit/s/Hz, treating other users'
    signals as Gaussian interference."""
    total = 0.0
    for k in range(len(result.combiners)):
        s = effective_matrix(channels, result, k)
        cov = interference_covariance(channels, result, k, noise_var)
        total += _log2_det_ratio(cov + s @ s.conj().T, cov)
    return total


def _log2_det_ratio(num: np.ndarray, den: np.ndarray) -> float:
    """log2(det(num)/det(den)) for Hermitian PD matrices, with a diagonal
    ridge retry when the denominator is numerically singular."""
    sign_n, ld_n = np.linalg.slogdet(num)
    sign_d, ld_d = np.linalg.slogdet(den)
    if sign_d == 0 or not np.isfinite(ld_d):
        n = den.shape[0]
        ridge = 1e-12 * max(float(np.trace(den).real) / n, 1.0)
        eye = ridge * np.eye(n)
        sign_n, ld_n = np.linalg.slogdet(num + eye)
        sign_d, ld_d = np.linalg.slogdet(den + eye)
    return float((ld_n - ld_d) / math.log(2.0))


def ber_trial(channels: "ChannelSet", result: "DesignResult",
              noise_var: float, detector: DetectorMode, q: Constellation,
              n_vectors: int, rng_seed: int) -> tuple[int, int]:
    """Simulate ``n_vectors`` downlink uses and count bit errors.

    Symbols for all users and per-antenna receiver noise are drawn first
    (fixed order, standard-normal noise scaled by the noise level
    afterwards), so two calls with the same ``rng_seed`` use identical
    realizations whatever the design, detector or noise level.  Returns
    ``(bit_errors, bits_sent)`` summed over users.
    """
    detector = DetectorMode(detector)
    k_users = len(result.combiners)
    n_s = result.combiners[0].w_bb.shape[1]
    n_r = channels.h[0].shape[0]
    rng = np.random.Generator(np.random.Philox(key=[rng_seed, _BER_STREAM]))
    sym_idx = rng.integers(0, q.order, size=(n_vectors, k_users * n_s))
    noise = (rng.standard_normal((n_vectors, k_users, n_r))
             + 1j * rng.standard_normal((n_vectors, k_users, n_r)))
    noise *= math.sqrt(noise_var / 2.0)

    x = q.points[sym_idx] @ result.precoder.product().T  # (n_vectors, n_t)
    errors = 0
    bits = 0
    for k in range(k_users):
        w_k = result.combiners[k].composite()
        y = (x @ channels.h[k].T + noise[:, k, :]) @ w_k.conj()
        a = None if detector in _APPROXIMATE else \
            effective_matrix(channels, result, k)
        if detector in _WHITENED:
            if detector is DetectorMode.NWIMDD:
                cov = interference_covariance(channels, result, k, noise_var)
            else:
                cov = noise_covariance(result, k, noise_var)
        else:
            cov = None
        det_idx = detect_batch(y, a, cov, detector, q)
        true_idx = sym_idx[:, k * n_s:(k + 1) * n_s]
        errors += int(np.sum(q.bits[det_idx] != q.bits[true_idx]))
        bits += n_vectors * n_s * q.bits_per_symbol
    return errors, bits
