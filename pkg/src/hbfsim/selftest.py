"""Built-in invariant battery behind ``hbfsim selftest``.

Runs in a few seconds on a deliberately small configuration and checks
the invariants that every healthy installation must satisfy: RF entry
magnitudes, transmit power, channel reproducibility, constellation round
trips and noise-free detection.  Prints one line per check; exit code 0
only when everything holds.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .channel import generate_channel
from .core import SystemConfig
from .detection import DetectorMode, detect_batch, make_constellation
from .metrics import ber_trial
from .schemes import SchemeId, design


def _checks():
    cfg = SystemConfig(n_t=16, n_r=4, n_s=2, k_users=2, n_rf_t=4, n_rf_r=2,
                       n_paths=4, noise_var=0.5)

    def channel_repeatability():
        a = generate_channel(cfg, 7)
        b = generate_channel(cfg, 7)
        return all(np.array_equal(x, y) for x, y in zip(a.h, b.h))

    yield "channel repeatability", channel_repeatability

    def constellation_round_trip():
        ok = True
        for name in ("qpsk", "16qam"):
            q = make_constellation(name)
            bits = q.bits
            ok &= bool(np.array_equal(q.bits_from_symbols(
                q.symbols_from_bits(bits)), bits))
            ok &= abs(float(np.mean(np.abs(q.points) ** 2)) - 1.0) < 1e-12
        return ok

    yield "constellation round trip", constellation_round_trip

    def design_invariants():
        channels = generate_channel(cfg, 11)
        ok = True
        for scheme in SchemeId:
            result = design(scheme, channels, cfg)
            f_rf = result.precoder.f_rf
            ok &= bool(np.allclose(np.abs(f_rf), 1.0 / math.sqrt(cfg.n_t),
                                   rtol=1e-12, atol=1e-12))
            for comb in result.combiners:
                ok &= bool(np.allclose(np.abs(comb.w_rf),
                                       1.0 / math.sqrt(cfg.n_r),
                                       rtol=1e-12, atol=1e-12))
            power = float(np.linalg.norm(result.precoder.product()) ** 2)
            ok &= abs(power - cfg.e_t) < 1e-9 * cfg.e_t
        return ok

    yield "design invariants (all schemes)", design_invariants

    def noise_free_detection():
        q = make_constellation("qpsk")
        rng = np.random.Generator(np.random.Philox(key=[3, 1]))
        a = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        idx = rng.integers(0, 4, size=(64, 2))
        ys = q.points[idx] @ a.T
        got = detect_batch(ys, a, None, DetectorMode.MDD, q)
        return bool(np.array_equal(got, idx))

    yield "noise-free detection", noise_free_detection

    def ber_reproducible():
        channels = generate_channel(cfg, 23)
        result = design(SchemeId.REF29_CIA_BD, channels, cfg)
        q = make_constellation("qpsk")
        one = ber_trial(channels, result, cfg.noise_var, DetectorMode.MDD,
                        q, 32, 23)
        two = ber_trial(channels, result, cfg.noise_var, DetectorMode.MDD,
                        q, 32, 23)
        return one == two

    yield "ber trial reproducibility", ber_reproducible


def run_selftest() -> int:
    failures = 0
    for name, check in _checks():
        try:
            ok = bool(check())
            detail = ""
        except Exception as exc:  # noqa: BLE001 - report, do not crash
            ok = False
            detail = " (%s)" % exc
        if ok:
            print("selftest: %-34s ok" % name)
        else:
            failures += 1
            print("selftest: %-34s FAIL%s" % (name, detail))
    print("selftest: kernel backend = %s" % _kernels.BACKEND)
    return 0 if failures == 0 else 2
