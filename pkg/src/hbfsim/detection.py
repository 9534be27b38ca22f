"""Symbol detection at the user terminals.

The detectors do an exhaustive search over all ``M**n_s`` transmit
hypotheses for one user.  Variants differ in the assumed effective matrix
(the true genie-aided end-to-end map, or identity) and in whether the
metric is whitened by an estimated interference-plus-noise covariance:

- ``mdd``    : min ||y - a d||^2 with the true per-user map
- ``amdd``   : min ||y - d||^2 (assumes the map is ~identity)
- ``nwmdd``  : mdd whitened by the combined noise covariance
- ``nwamdd`` : amdd whitened by the combined noise covariance
- ``nwimdd`` : mdd whitened by noise plus inter-user interference
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .core import hermitian_inv_sqrt

if TYPE_CHECKING:
    from .channel import ChannelSet
    from .schemes import DesignResult


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy constellation with a Gray bit labeling.

    ``points[i]`` is the symbol whose label is ``bits[i]`` (row of
    ``bits_per_symbol`` 0/1 entries); the label-to-index map is the usual
    binary weighting, so ``points`` is ordered by label value.
    """

    name: str
    points: np.ndarray
    bits: np.ndarray

    @property
    def order(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return self.bits.shape[1]

    def symbols_from_bits(self, bits: np.ndarray) -> np.ndarray:
        """Map bit rows (..., bits_per_symbol) to symbols (...)."""
        bits = np.asarray(bits)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        idx = (bits * weights).sum(axis=-1)
        return self.points[idx]

    def bits_from_symbols(self, symbols: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`symbols_from_bits`; raises on foreign symbols."""
        symbols = np.asarray(symbols, dtype=np.complex128)
        dist = np.abs(symbols[..., np.newaxis] - self.points)
        idx = np.argmin(dist, axis=-1)
        if float(np.max(np.take_along_axis(
                dist, idx[..., np.newaxis], axis=-1))) > 1e-9:
            raise ValueError("symbol not in constellation %s" % self.name)
        return self.bits[idx]


def make_constellation(name: str) -> Constellation:
    """Build ``"qpsk"`` or ``"16qam"`` with Gray labeling and unit average
    symbol energy."""
    if name == "qpsk":
        bits = np.array(list(itertools.product((0, 1), repeat=2)))
        levels = np.array([1.0, -1.0])  # bit 0 -> +1, bit 1 -> -1
        points = (levels[bits[:, 0]] + 1j * levels[bits[:, 1]]) / math.sqrt(2)
        return Constellation(name=name, points=points, bits=bits)
    if name == "16qam":
        bits = np.array(list(itertools.product((0, 1), repeat=4)))
        # per-axis Gray: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
        axis = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}
        re = np.array([axis[(b[0], b[1])] for b in bits])
        im = np.array([axis[(b[2], b[3])] for b in bits])
        points = (re + 1j * im) / math.sqrt(10.0)
        return Constellation(name=name, points=points, bits=bits)
    raise ValueError("unknown constellation %r" % (name,))


class DetectorMode(str, enum.Enum):
    MDD = "mdd"
    AMDD = "amdd"
    NWMDD = "nwmdd"
    NWAMDD = "nwamdd"
    NWIMDD = "nwimdd"


_APPROXIMATE = frozenset({DetectorMode.AMDD, DetectorMode.NWAMDD})
_WHITENED = frozenset({DetectorMode.NWMDD, DetectorMode.NWAMDD,
                       DetectorMode.NWIMDD})

MAX_HYPOTHESES = 1 << 20


def effective_matrix(channels: "ChannelSet", result: "DesignResult",
                     k: int) -> np.ndarray:
    """True end-to-end map of user ``k``'s own streams:
    ``w_k^H h_k f_k`` with ``f_k`` the user's composite precoder block.
    Shape (n_s, n_s)."""
    n_s = result.combiners[k].w_bb.shape[1]
    f_k = result.precoder.user_block(k, n_s)
    w_k = result.combiners[k].composite()
    return w_k.conj().T @ channels.h[k] @ f_k


def noise_covariance(result: "DesignResult", k: int,
                     noise_var: float) -> np.ndarray:
    """Post-combining noise covariance ``noise_var * w_k^H w_k``."""
    w_k = result.combiners[k].composite()
    cov = noise_var * (w_k.conj().T @ w_k)
    return 0.5 * (cov + cov.conj().T)


def interference_covariance(channels: "ChannelSet", result: "DesignResult",
                            k: int, noise_var: float) -> np.ndarray:
    """Noise plus inter-user interference covariance after combining."""
    n_s = result.combiners[k].w_bb.shape[1]
    w_k = result.combiners[k].composite()
    cov = noise_var * (w_k.conj().T @ w_k)
    wh = w_k.conj().T @ channels.h[k]
    k_users = len(result.combiners)
    for j in range(k_users):
        if j == k:
            continue
        cross = wh @ result.precoder.user_block(j, n_s)
        cov = cov + cross @ cross.conj().T
    return 0.5 * (cov + cov.conj().T)


def hypothesis_grid(q: Constellation, n_s: int) -> np.ndarray:
    """Index matrix of all ``order**n_s`` hypotheses in lexicographic
    order, shape (n_hyp, n_s).  Raises when the grid exceeds the cap."""
    n_hyp = q.order ** n_s
    if n_hyp > MAX_HYPOTHESES:
        raise ValueError("hypothesis grid %d exceeds cap %d"
                         % (n_hyp, MAX_HYPOTHESES))
    grids = np.meshgrid(*([np.arange(q.order)] * n_s), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def detect_batch(ys: np.ndarray, a: np.ndarray | None,
                 k_cov: np.ndarray | None, mode: DetectorMode,
                 q: Constellation) -> np.ndarray:
    """Detect many received vectors at once.

    ``ys`` is (n_vectors, n_s); returns hypothesis symbol indices of shape
    (n_vectors, n_s).  Distance ties resolve to the lowest hypothesis
    index (lexicographic).
    """
    mode = DetectorMode(mode)
    ys = np.atleast_2d(np.asarray(ys, dtype=np.complex128))
    n_s = ys.shape[1]
    hyp_idx = hypothesis_grid(q, n_s)
    cand = q.points[hyp_idx]                      # (n_hyp, n_s)
    if mode not in _APPROXIMATE:
        if a is None:
            raise ValueError("mode %s needs the effective matrix" % mode.value)
        cand = cand @ np.asarray(a, dtype=np.complex128).T
    if mode in _WHITENED:
        if k_cov is None:
            raise ValueError("mode %s needs a covariance" % mode.value)
        white = hermitian_inv_sqrt(k_cov)
        ys = ys @ white.T
        cand = cand @ white.T
    # squared whitened distance to every hypothesis
    diff = ys[:, np.newaxis, :] - cand[np.newaxis, :, :]
    metric = np.einsum("vhs,vhs->vh", diff, diff.conj()).real
    best = np.argmin(metric, axis=1)
    return hyp_idx[best]


def detect(y: np.ndarray, a: np.ndarray | None, k_cov: np.ndarray | None,
           mode: DetectorMode, q: Constellation) -> np.ndarray:
    """Single-vector detection; returns the detected symbol vector."""
    idx = detect_batch(np.asarray(y)[np.newaxis, :], a, k_cov, mode, q)
    return q.points[idx[0]]
