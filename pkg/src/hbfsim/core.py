"""Shared types and small linear-algebra helpers used across the simulator.

Conventions kept throughout the package:

- eigendecompositions and SVDs are returned with eigenvalues / singular
  values sorted in descending order;
- eigenvector (and left singular vector) columns are phase-fixed so that
  the entry of largest magnitude is real and positive, which makes every
  decomposition-based design deterministic across runs and platforms;
- transmit power is always measured as ``||F_RF @ F_BB||_F**2``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Raised when a configuration is inconsistent or unsupported."""


class SolverError(RuntimeError):
    """Raised when a linear system stays singular after regularization."""


@dataclass
class Diagnostics:
    """Mutable side-channel collecting solver telemetry during a design.

    A single instance is threaded through the analog and digital stages so
    that regularization events and iteration counts are visible to callers
    without changing any return value.
    """

    cia_sweep_counts: list[int] = field(default_factory=list)
    cia_objective_traces: list[list[float]] = field(default_factory=list)
    cia_regularizations: int = 0
    inv_sqrt_floored: int = 0
    solver_regularizations: int = 0
    outer_iterations: int = 0
    converged: bool = True
    eig_metric: float | None = None
    notes: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class SystemConfig:
    """Static geometry and dimensioning of the downlink.

    Attributes
    ----------
    n_t : int
        Transmit antennas at the base station (square UPA).
    n_r : int
        Receive antennas per user (square UPA).
    n_s : int
        Data streams per user.
    k_users : int
        Number of simultaneously served users.
    n_rf_t : int
        Transmit RF chains, ``k_users * n_s <= n_rf_t <= n_t``.
    n_rf_r : int
        Receive RF chains per user, ``n_s <= n_rf_r <= n_r``.
    n_paths : int
        Propagation paths per user channel.
    noise_var : float
        Receiver noise variance (per antenna, complex symmetric).
    modulation : str
        Constellation name, ``"qpsk"`` or ``"16qam"``.
    """

    n_t: int
    n_r: int
    n_s: int
    k_users: int
    n_rf_t: int
    n_rf_r: int
    n_paths: int = 8
    noise_var: float = 1.0
    modulation: str = "qpsk"

    def __post_init__(self):
        if min(self.n_t, self.n_r, self.n_s, self.k_users, self.n_rf_t,
               self.n_rf_r, self.n_paths) < 1:
            raise ConfigError("all dimensions must be positive")
        if not (self.k_users * self.n_s <= self.n_rf_t <= self.n_t):
            raise ConfigError(
                "need k_users*n_s <= n_rf_t <= n_t, got %d <= %d <= %d"
                % (self.k_users * self.n_s, self.n_rf_t, self.n_t))
        if not (self.n_s <= self.n_rf_r <= self.n_r):
            raise ConfigError(
                "need n_s <= n_rf_r <= n_r, got %d <= %d <= %d"
                % (self.n_s, self.n_rf_r, self.n_r))
        if round(math.isqrt(self.n_t)) ** 2 != self.n_t:
            raise ConfigError("n_t=%d is not a square UPA size" % self.n_t)
        if round(math.isqrt(self.n_r)) ** 2 != self.n_r:
            raise ConfigError("n_r=%d is not a square UPA size" % self.n_r)
        if self.noise_var <= 0.0:
            raise ConfigError("noise_var must be positive")
        if self.modulation not in ("qpsk", "16qam"):
            raise ConfigError("unknown modulation %r" % (self.modulation,))

    @property
    def e_t(self) -> float:
        """Total transmit power budget ``k_users * n_s``."""
        return float(self.k_users * self.n_s)

    @property
    def upa_side_t(self) -> int:
        return math.isqrt(self.n_t)

    @property
    def upa_side_r(self) -> int:
        return math.isqrt(self.n_r)

    def with_noise_var(self, noise_var: float) -> "SystemConfig":
        return dataclasses.replace(self, noise_var=float(noise_var))


@dataclass
class HybridPrecoder:
    """Base-station precoder pair.

    ``f_rf`` is ``(n_t, n_rf_t)`` with constant-modulus entries
    ``1/sqrt(n_t)``; ``f_bb`` is ``(n_rf_t, k_users*n_s)`` and carries the
    per-user blocks side by side.
    """

    f_rf: np.ndarray
    f_bb: np.ndarray

    def product(self) -> np.ndarray:
        """Composite precoder ``f_rf @ f_bb`` of shape (n_t, k_users*n_s)."""
        return self.f_rf @ self.f_bb

    def user_block(self, k: int, n_s: int) -> np.ndarray:
        """Composite columns serving user ``k``: shape (n_t, n_s)."""
        return self.product()[:, k * n_s:(k + 1) * n_s]


@dataclass
class UserCombiner:
    """Per-user combiner pair.

    ``w_rf`` is ``(n_r, m)`` constant-modulus with ``m <= n_rf_r`` columns
    (designs that skip the digital combining step use ``m = n_s`` directly);
    ``w_bb`` is ``(m, n_s)``.
    """

    w_rf: np.ndarray
    w_bb: np.ndarray

    def composite(self) -> np.ndarray:
        """Effective combiner ``w_rf @ w_bb`` of shape (n_r, n_s)."""
        return self.w_rf @ self.w_bb


def phase_project(a: np.ndarray, scale: float) -> np.ndarray:
    """Project onto the constant-modulus set: ``scale * exp(1j*angle(a))``.

    Zero entries map to ``scale`` (phase zero) so the output magnitude is
    exactly ``scale`` everywhere.
    """
    a = np.asarray(a, dtype=np.complex128)
    mag = np.abs(a)
    out = np.full(a.shape, scale + 0j)
    nz = mag > 0.0
    out[nz] = scale * a[nz] / mag[nz]
    return out


def normalize_power(precoder: HybridPrecoder, target: float) -> HybridPrecoder:
    """Rescale ``f_bb`` so that ``||f_rf @ f_bb||_F**2 == target``.

    Only the baseband factor is scaled; the RF factor keeps its
    constant-modulus entries untouched.
    """
    power = float(np.linalg.norm(precoder.f_rf @ precoder.f_bb) ** 2)
    if power <= 0.0 or not np.isfinite(power):
        raise SolverError(
            "cannot normalize precoder with composite power %r" % power)
    return HybridPrecoder(f_rf=precoder.f_rf,
                          f_bb=precoder.f_bb * math.sqrt(target / power))


def snr_to_noise_var(snr_db: float, e_t: float) -> float:
    """Noise variance realizing ``SNR = e_t / noise_var`` for SNR in dB."""
    return float(e_t) / (10.0 ** (float(snr_db) / 10.0))


_HERM_TOL = 1e-8


def _check_hermitian(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("%s must be square, got shape %r" % (name, a.shape))
    scale = max(1.0, float(np.linalg.norm(a)))
    if float(np.linalg.norm(a - a.conj().T)) > _HERM_TOL * scale:
        raise ValueError("%s is not Hermitian" % name)
    return 0.5 * (a + a.conj().T)


def pseudo_det(a: np.ndarray, rank_tol: float = 1e-10) -> float:
    """Product of the eigenvalues of Hermitian PSD ``a`` above the rank cut.

    Eigenvalues below ``rank_tol * max(eigenvalue)`` are treated as zero and
    skipped, which makes the value a pseudo-determinant for rank-deficient
    inputs.  An empty (0 x 0) matrix gives 1.0; a matrix whose eigenvalues
    all fall below the cut gives 0.0.
    """
    a = _check_hermitian(a, "a")
    if a.shape[0] == 0:
        return 1.0
    w = np.linalg.eigvalsh(a)
    w_max = float(w[-1])
    if w_max <= 0.0:
        return 0.0
    kept = w[w > rank_tol * w_max]
    if kept.size == 0:
        return 0.0
    return float(np.prod(kept))


def hermitian_inv_sqrt(k: np.ndarray, floor_ratio: float = 1e-12,
                       diag: Diagnostics | None = None) -> np.ndarray:
    """Inverse matrix square root ``k**(-1/2)`` of a Hermitian PD matrix.

    Eigenvalues below ``floor_ratio * max(eigenvalue)`` are clamped to the
    floor before inversion; when that happens the event is counted in
    ``diag.inv_sqrt_floored``.  The result is Hermitian by construction.
    """
    k = _check_hermitian(k, "k")
    w, v = np.linalg.eigh(k)
    w_max = float(w[-1])
    if w_max <= 0.0:
        raise SolverError("matrix is not positive definite (max eig %r)"
                          % w_max)
    floor = floor_ratio * w_max
    if bool(np.any(w < floor)):
        if diag is not None:
            diag.inv_sqrt_floored += 1
        w = np.maximum(w, floor)
    m = (v * (w ** -0.5)) @ v.conj().T
    return 0.5 * (m + m.conj().T)


def fix_column_phases(v: np.ndarray) -> np.ndarray:
    """Return ``v`` with each column rotated so its largest-magnitude entry
    is real and positive (first index wins magnitude ties)."""
    v = np.array(v, dtype=np.complex128, copy=True)
    for j in range(v.shape[1]):
        col = v[:, j]
        i = int(np.argmax(np.abs(col)))
        z = col[i]
        if abs(z) > 0.0:
            v[:, j] = col * (z.conj() / abs(z))
    return v


def eigh_desc(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition, eigenvalues descending, deterministic
    column phases.  Returns ``(w, v)`` with ``a ~ v @ diag(w) @ v^H``."""
    a = _check_hermitian(a, "a")
    w, v = np.linalg.eigh(a)
    w = w[::-1].copy()
    v = fix_column_phases(v[:, ::-1])
    return w, v


def svd_sorted(a: np.ndarray, full_matrices: bool = False
               ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD with descending singular values and deterministic phases.

    The phase of each singular pair is fixed from the left vector (largest
    entry real positive) and mirrored onto the matching row of ``vh`` so
    that ``u @ diag(s) @ vh`` still reconstructs ``a``.  Extra columns of
    ``v`` (null-space directions present when ``full_matrices=True``) are
    phase-fixed from ``v`` itself.
    """
    a = np.asarray(a, dtype=np.complex128)
    u, s, vh = np.linalg.svd(a, full_matrices=full_matrices)
    u = np.array(u, copy=True)
    vh = np.array(vh, copy=True)
    n_pairs = min(u.shape[1], vh.shape[0], s.size)
    for j in range(n_pairs):
        col = u[:, j]
        i = int(np.argmax(np.abs(col)))
        z = col[i]
        if abs(z) > 0.0:
            c = z.conj() / abs(z)
            u[:, j] = col * c
            vh[j, :] = vh[j, :] * c.conj()
    for j in range(n_pairs, vh.shape[0]):
        row = vh[j, :]
        i = int(np.argmax(np.abs(row)))
        z = row[i]
        if abs(z) > 0.0:
            # row of vh is the conjugate of the v column: make the v entry
            # real positive.
            vh[j, :] = row * (z.conj() / abs(z))
    return u, s, vh
