"""Clustered geometric mmWave channel with UPA front ends.

Each user channel is a sum of ``n_paths`` planar-wave components

    H_k = sqrt(n_t*n_r/n_paths) * sum_p alpha_p a_r(p) a_t(p)^H

with complex-normal path gains and uniformly drawn azimuth/elevation at
both ends, so that ``E||H_k||_F**2 = n_t * n_r``.  Randomness comes from a
counter-based Philox generator keyed on ``(seed, user)``; the intra-stream
draw order is fixed, which makes every channel reproducible from the seed
alone regardless of how many users or trials were generated before it.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .core import SystemConfig


@dataclass(frozen=True)
class PathComponent:
    """One planar-wave path: complex gain plus the four angles.

    Angles follow the (azimuth, elevation) convention with azimuth in
    ``[0, 2*pi)`` and elevation in ``[0, pi)``.
    """

    gain: complex
    azimuth_r: float
    elevation_r: float
    azimuth_t: float
    elevation_t: float


@dataclass
class ChannelSet:
    """Channels of all users for one trial.

    ``h`` holds ``k_users`` matrices of shape ``(n_r, n_t)``; ``paths``
    holds the per-user path parameters in draw order.
    """

    h: list[np.ndarray]
    paths: list[list[PathComponent]]
    seed: int

    @property
    def k_users(self) -> int:
        return len(self.h)

    def stacked(self) -> np.ndarray:
        """All user channels stacked row-wise: shape (k_users*n_r, n_t)."""
        return np.vstack(self.h)


def ula_response(psi: float | np.ndarray, m: int) -> np.ndarray:
    """Uniform linear array response ``(1/sqrt(m)) * exp(1j*psi*[0..m-1])``.

    ``psi`` is the electrical phase increment between adjacent elements.
    Accepts a scalar (returns shape ``(m,)``) or an array of phases
    (returns ``psi.shape + (m,)``).
    """
    psi = np.asarray(psi, dtype=np.float64)
    n = np.arange(m)
    return np.exp(1j * psi[..., np.newaxis] * n) / math.sqrt(m)


def upa_response(phi: float | np.ndarray, theta: float | np.ndarray,
                 m_h: int, m_v: int) -> np.ndarray:
    """Square-grid UPA response as a Kronecker product of two ULA factors.

    Horizontal phase ``pi*cos(phi)*sin(theta)``, vertical phase
    ``pi*cos(theta)`` (half-wavelength spacing).  Returns shape
    ``(..., m_h*m_v)`` with unit norm along the last axis.
    """
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    horiz = ula_response(np.pi * np.cos(phi) * np.sin(theta), m_h)
    vert = ula_response(np.pi * np.cos(theta), m_v)
    # batched kron along the trailing axis
    out = horiz[..., :, np.newaxis] * vert[..., np.newaxis, :]
    return out.reshape(out.shape[:-2] + (m_h * m_v,))


def _user_rng(seed: int, user: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, user]))


def generate_channel(cfg: SystemConfig, seed: int) -> ChannelSet:
    """Draw one multiuser channel realization.

    Per user the generator emits, in this fixed order: real and imaginary
    path-gain parts (each N(0, 1/2)), receive azimuth, receive elevation,
    transmit azimuth, transmit elevation — all as length ``n_paths``
    arrays.  Azimuths are U(0, 2*pi), elevations U(0, pi).
    """
    n_p = cfg.n_paths
    side_t, side_r = cfg.upa_side_t, cfg.upa_side_r
    gain_scale = math.sqrt(cfg.n_t * cfg.n_r / n_p)
    h = []
    paths = []
    for k in range(cfg.k_users):
        rng = _user_rng(seed, k)
        re = rng.standard_normal(n_p) * math.sqrt(0.5)
        im = rng.standard_normal(n_p) * math.sqrt(0.5)
        alpha = re + 1j * im
        phi_r = rng.uniform(0.0, 2.0 * np.pi, n_p)
        theta_r = rng.uniform(0.0, np.pi, n_p)
        phi_t = rng.uniform(0.0, 2.0 * np.pi, n_p)
        theta_t = rng.uniform(0.0, np.pi, n_p)
        a_r = upa_response(phi_r, theta_r, side_r, side_r)   # (n_p, n_r)
        a_t = upa_response(phi_t, theta_t, side_t, side_t)   # (n_p, n_t)
        h_k = gain_scale * np.einsum("p,pr,pt->rt", alpha, a_r, a_t.conj())
        h.append(h_k)
        paths.append([PathComponent(complex(alpha[p]), float(phi_r[p]),
                                    float(theta_r[p]), float(phi_t[p]),
                                    float(theta_t[p])) for p in range(n_p)])
    return ChannelSet(h=h, paths=paths, seed=seed)


def channel_to_json(channels: ChannelSet, cfg: SystemConfig) -> dict:
    """JSON-serializable dump: dimensions, path parameters and the channel
    entries row-major as (re, im) pairs."""
    users = []
    for k in range(channels.k_users):
        h_k = channels.h[k]
        users.append({
            "paths": [{
                "gain": [p.gain.real, p.gain.imag],
                "azimuth_r": p.azimuth_r,
                "elevation_r": p.elevation_r,
                "azimuth_t": p.azimuth_t,
                "elevation_t": p.elevation_t,
            } for p in channels.paths[k]],
            "h": [[z.real, z.imag] for z in h_k.ravel(order="C")],
        })
    return {
        "n_t": cfg.n_t,
        "n_r": cfg.n_r,
        "n_paths": cfg.n_paths,
        "k_users": cfg.k_users,
        "seed": channels.seed,
        "users": users,
    }


def channel_from_json(doc: dict) -> ChannelSet:
    """Inverse of :func:`channel_to_json` (path parameters and matrices)."""
    n_r, n_t = doc["n_r"], doc["n_t"]
    h = []
    paths = []
    for user in doc["users"]:
        flat = np.array([complex(re, im) for re, im in user["h"]])
        h.append(flat.reshape(n_r, n_t))
        paths.append([PathComponent(
            complex(p["gain"][0], p["gain"][1]), p["azimuth_r"],
            p["elevation_r"], p["azimuth_t"], p["elevation_t"])
            for p in user["paths"]])
    return ChannelSet(h=h, paths=paths, seed=doc["seed"])


def dump_channel(channels: ChannelSet, cfg: SystemConfig, path: str) -> None:
    """Atomically write the JSON channel dump to ``path``."""
    doc = channel_to_json(channels, cfg)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
