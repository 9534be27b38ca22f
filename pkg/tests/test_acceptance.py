"""Acceptance gate: eleven behavioral criteria for the full pipeline.

Each test prints one ``criterion N: PASS/FAIL`` line through the shared
recorder (replayed in the terminal summary) and asserts the same verdict,
so a failing criterion fails the suite.  Monte-Carlo sizes and tolerances
are stated inline; wall-clock figures are printed for information only —
they depend on the host and are never asserted.
"""

import dataclasses
import math
import time

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.stats

import _criteria
from hbfsim.analog import CiaSettings, column_iterative, _log2_volume
from hbfsim.channel import generate_channel
from hbfsim.core import (Diagnostics, SystemConfig, eigh_desc, pseudo_det,
                         snr_to_noise_var)
from hbfsim.detection import DetectorMode, detect_batch, make_constellation
from hbfsim.digital import MmseProblem, constrained_mmse, mmse_bb, mmse_mse
from hbfsim.harness import ExperimentSpec, run
from hbfsim.metrics import ber_trial, sum_rate
from hbfsim.schemes import (SchemeId, design, design_channel_stage,
                            design_noise_stage)

# headline desk-scale geometry: 64-antenna transmitter, 4-antenna users,
# 2 streams per user, 8 paths
DESK4 = SystemConfig(n_t=64, n_r=4, n_s=2, k_users=4, n_rf_t=8, n_rf_r=2,
                     n_paths=8)
DESK8 = SystemConfig(n_t=64, n_r=4, n_s=2, k_users=8, n_rf_t=16, n_rf_r=2,
                     n_paths=8)

QPSK = make_constellation("qpsk")


def _t_one_sided(diffs):
    """Paired one-sided test of mean(diffs) > 0 at 95%.

    Returns ``(t, threshold, significant)``.
    """
    d = np.asarray(diffs, dtype=float)
    n = d.size
    t = float(d.mean() / (d.std(ddof=1) / math.sqrt(n)))
    thr = float(scipy.stats.t.ppf(0.95, n - 1))
    return t, thr, t > thr


# --------------------------------------------------------------------- 1


def test_criterion_01_constraint_invariants():
    t0 = time.perf_counter()
    n_channels = 100
    worst_mag = 0.0
    worst_pow = 0.0
    for trial in range(n_channels):
        ch = generate_channel(DESK4, seed=1000 + trial)
        for scheme in SchemeId:
            res = design(scheme, ch, DESK4)
            mag_t = np.abs(res.precoder.f_rf) * math.sqrt(DESK4.n_t)
            worst_mag = max(worst_mag, float(np.max(np.abs(mag_t - 1.0))))
            for comb in res.combiners:
                mag_r = np.abs(comb.w_rf) * math.sqrt(DESK4.n_r)
                worst_mag = max(worst_mag,
                                float(np.max(np.abs(mag_r - 1.0))))
            power = float(np.linalg.norm(res.precoder.product()) ** 2)
            worst_pow = max(worst_pow, abs(power - DESK4.e_t) / DESK4.e_t)
    ok = worst_mag <= 1e-12 and worst_pow <= 1e-9
    detail = ("max modulus err %.2e, max power err %.2e, %d channels x %d "
              "schemes, %.0f s" % (worst_mag, worst_pow, n_channels,
                                   len(SchemeId), time.perf_counter() - t0))
    assert _criteria.record("criterion 1", ok, detail), detail


# --------------------------------------------------------------------- 2


def test_criterion_02_channel_normalization():
    t0 = time.perf_counter()
    cfg = SystemConfig(n_t=64, n_r=4, n_s=2, k_users=1, n_rf_t=2, n_rf_r=2,
                       n_paths=8)
    n_seeds = 10_000
    total = 0.0
    for seed in range(n_seeds):
        total += float(np.linalg.norm(generate_channel(cfg, seed).h[0]) ** 2)
    mean = total / n_seeds
    target = cfg.n_t * cfg.n_r
    rel = abs(mean - target) / target
    ok = rel <= 0.02
    detail = ("mean power %.2f vs %d (%.2f%% off), %d seeds, %.0f s"
              % (mean, target, 100 * rel, n_seeds, time.perf_counter() - t0))
    assert _criteria.record("criterion 2", ok, detail), detail


# --------------------------------------------------------------------- 3


def _best_random_objective(rng, d, m, n_samples, chunk=20_000):
    n = d.shape[0]
    scale = 1.0 / math.sqrt(n)
    best = 0.0
    done = 0
    while done < n_samples:
        t = min(chunk, n_samples - done)
        cand = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi,
                                       size=(t, n, m))) * scale
        tmp = np.einsum("ij,tjl->til", d, cand)
        gram = np.einsum("tji,tjl->til", cand.conj(), tmp)
        dets = (gram[:, 0, 0] * gram[:, 1, 1]
                - gram[:, 0, 1] * gram[:, 1, 0])
        best = max(best, float(np.abs(dets).max()))
        done += t
    return math.log2(best)


def test_criterion_03_ascent_monotone_and_beats_search():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    worst_drop = 0.0
    worst_violation = -np.inf
    for _ in range(100):
        n = int(rng.integers(2, 17))
        m = int(rng.integers(1, n + 1))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        d = a @ a.conj().T
        diag = Diagnostics()
        column_iterative(d, m, CiaSettings(record_objective=True), diag)
        (trace,) = diag.cia_objective_traces
        trace = [v for v in trace if np.isfinite(v)]
        for prev, cur in zip(trace, trace[1:]):
            slack = 1e-9 * max(1.0, abs(prev))
            worst_drop = max(worst_drop, prev - cur)
            worst_violation = max(worst_violation, (prev - cur) - slack)
    monotone = worst_violation <= 0.0

    margins = []
    for _ in range(20):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        d = a @ a.conj().T
        ascent = _log2_volume(d, column_iterative(d, 2))
        search = _best_random_objective(rng, d, 2, 100_000)
        margins.append(ascent - search)
    beats = min(margins) >= 0.0
    ok = monotone and beats
    detail = ("max per-sweep drop %.2e, min margin over search %.4f bits, "
              "%.0f s" % (worst_drop, min(margins),
                          time.perf_counter() - t0))
    assert _criteria.record("criterion 3", ok, detail), detail


# --------------------------------------------------------------------- 4


def test_criterion_04_digital_combiner_diagonalizes():
    t0 = time.perf_counter()
    worst_off = 0.0
    worst_det = 0.0
    for trial in range(100):
        ch = generate_channel(DESK4, seed=2000 + trial)
        stage = design_channel_stage(SchemeId.P_SVD_STAR_MMSE_STAR, ch,
                                     DESK4)
        for kk in range(DESK4.k_users):
            h_check = stage.w_rf_list[kk].conj().T @ ch.h[kk]
            gram = h_check @ h_check.conj().T
            w_bb = stage.w_bb_list[kk]
            m = w_bb.conj().T @ gram @ w_bb
            off = m - np.diag(np.diag(m))
            worst_off = max(worst_off, float(np.linalg.norm(off)
                                             / np.trace(m).real))
            vals = eigh_desc(gram)[0][:DESK4.n_s]
            top = float(np.prod(vals))
            worst_det = max(worst_det,
                            abs(pseudo_det(m) - top) / abs(top))
    ok = worst_off < 1e-9 and worst_det <= 1e-9
    detail = ("max off-diagonal mass %.2e, max det mismatch %.2e, "
              "100 channels, %.0f s" % (worst_off, worst_det,
                                        time.perf_counter() - t0))
    assert _criteria.record("criterion 4", ok, detail), detail


# --------------------------------------------------------------------- 5


def test_criterion_05_nulling_leakage():
    t0 = time.perf_counter()
    worst = 0.0
    n_s = DESK4.n_s
    for trial in range(100):
        ch = generate_channel(DESK4, seed=3000 + trial)
        res = design(SchemeId.REF29_CIA_BD, ch, DESK4)
        f_bb = res.precoder.f_bb
        h_bb = [res.combiners[j].w_rf.conj().T @ ch.h[j]
                @ res.precoder.f_rf for j in range(DESK4.k_users)]
        for j in range(DESK4.k_users):
            denom = float(np.linalg.norm(h_bb[j]))
            for kk in range(DESK4.k_users):
                if kk == j:
                    continue
                blk = f_bb[:, kk * n_s:(kk + 1) * n_s]
                worst = max(worst,
                            float(np.linalg.norm(h_bb[j] @ blk)) / denom)
    ok = worst < 1e-9
    detail = ("max cross-user leakage %.2e, 100 channels, %.0f s"
              % (worst, time.perf_counter() - t0))
    assert _criteria.record("criterion 5", ok, detail), detail


# --------------------------------------------------------------------- 6


def _random_mmse_problem(rng, rows, cols):
    h = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    a_raw = rng.normal(size=(cols, cols)) + 1j * rng.normal(size=(cols,
                                                                  cols))
    a = a_raw @ a_raw.conj().T + 0.5 * np.eye(cols)
    return MmseProblem(h_eff=h, constraint=a,
                       r_x=np.eye(rows, dtype=complex),
                       r_n=0.4 * np.eye(rows, dtype=complex),
                       e_t=float(rows))


def _batched_feasible_mse(prob, f_star, rng, n_cand):
    """Best-response MSE of random feasible perturbations (r_x = I)."""
    h, a = prob.h_eff, prob.constraint
    rows = h.shape[0]
    tr_rn = float(np.trace(prob.r_n).real)
    eps = rng.choice([1e-3, 1e-2, 1e-1], size=n_cand)
    g = (rng.normal(size=(n_cand,) + f_star.shape)
         + 1j * rng.normal(size=(n_cand,) + f_star.shape))
    cand = f_star[None, :, :] + eps[:, None, None] * g
    energy = np.einsum("ij,tjk,tik->t", a, cand, cand.conj()).real
    cand *= np.sqrt(prob.e_t / energy)[:, None, None]
    hf = np.einsum("ij,tjk->tik", h, cand)
    num = np.einsum("tii->t", hf).real
    den = np.einsum("tik,tik->t", hf, hf.conj()).real + tr_rn
    beta = num / den
    resid = np.eye(rows)[None, :, :] - beta[:, None, None] * hf
    return (np.einsum("tik,tik->t", resid, resid.conj()).real
            + beta ** 2 * tr_rn)


def test_criterion_06_constrained_mmse_optimality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(88)
    sizes = [(2, 3), (3, 4), (4, 6), (6, 8), (2, 8)] * 4
    worst_energy = 0.0
    worst_gap = -np.inf
    for rows, cols in sizes:
        prob = _random_mmse_problem(rng, rows, cols)
        sol = constrained_mmse(prob)
        energy = float(np.trace(prob.constraint @ sol.f @ prob.r_x
                                @ sol.f.conj().T).real)
        worst_energy = max(worst_energy,
                           abs(energy - prob.e_t) / prob.e_t)
        base = mmse_mse(prob, sol.f, sol.beta)
        cand = _batched_feasible_mse(prob, sol.f, rng, 10_000)
        worst_gap = max(worst_gap, float(base - cand.min()))
    energy_ok = worst_energy <= 1e-9
    perturb_ok = worst_gap <= 1e-9

    # numerical-optimizer oracle on a 2x3 instance
    prob = _random_mmse_problem(rng, 2, 3)
    sol = constrained_mmse(prob)
    closed = mmse_mse(prob, sol.f, sol.beta)

    def cost(x):
        g = (x[:6] + 1j * x[6:]).reshape(3, 2)
        energy = float(np.trace(prob.constraint @ g @ prob.r_x
                                @ g.conj().T).real)
        if energy <= 1e-12:
            return 1e6
        beta = math.sqrt(energy / prob.e_t)
        return mmse_mse(prob, g / beta, beta)

    starts = [np.concatenate([sol.f.real.ravel(), sol.f.imag.ravel()])]
    starts += [rng.normal(size=12) for _ in range(3)]
    numeric = min(scipy.optimize.minimize(cost, x0, method="BFGS",
                                          options={"gtol": 1e-10}).fun
                  for x0 in starts)
    oracle_ok = abs(closed - numeric) <= 1e-5 * max(1.0, abs(numeric))

    # two-step baseband shortcut agrees with the exactly constrained
    # solver (identity input covariance, block-diagonal colored noise)
    ch = generate_channel(DESK4, seed=4000)
    stage = design_channel_stage(SchemeId.P_CIA_MMSE_STAR, ch, DESK4)
    nv = snr_to_noise_var(10.0, DESK4.e_t)
    cov = [nv * (w.conj().T @ w) for w in stage.w_rf_list]
    gamma = float(sum(np.trace(c).real for c in cov))
    f1 = mmse_bb(stage.h_bb_analog, stage.f_rf, gamma, DESK4.e_t)
    r_n = scipy.linalg.block_diag(*cov)
    sol2 = constrained_mmse(MmseProblem(
        h_eff=stage.h_bb_analog,
        constraint=stage.f_rf.conj().T @ stage.f_rf,
        r_x=np.eye(stage.h_bb_analog.shape[0], dtype=complex),
        r_n=r_n, e_t=DESK4.e_t))
    u1 = f1 / np.linalg.norm(f1)
    u2 = sol2.f / np.linalg.norm(sol2.f)
    scalar_dev = float(np.linalg.norm(u1 - u2))
    ratio = float(np.vdot(u2, u1).real)
    twostep_ok = scalar_dev < 1e-8 and ratio > 0.0

    ok = energy_ok and perturb_ok and oracle_ok and twostep_ok
    detail = ("max energy err %.2e, max perturb gap %.2e, oracle |d| %.2e, "
              "two-step dev %.2e, %.0f s"
              % (worst_energy, worst_gap, abs(closed - numeric),
                 scalar_dev, time.perf_counter() - t0))
    assert _criteria.record("criterion 6", ok, detail), detail


# --------------------------------------------------------------------- 7


def test_criterion_07_detector_sanity():
    t0 = time.perf_counter()
    ch = generate_channel(DESK4, seed=5000)
    stage = design_channel_stage(SchemeId.P_SVD_STAR_MMSE_STAR, ch, DESK4)

    res0 = design_noise_stage(stage, 1e-12)
    err0, _ = ber_trial(ch, res0, 1e-12, DetectorMode.MDD, QPSK, 64,
                        rng_seed=1)
    exact_ok = err0 == 0

    rng = np.random.default_rng(9)
    a = np.eye(2) + 0.3 * (rng.normal(size=(2, 2))
                           + 1j * rng.normal(size=(2, 2)))
    idx = rng.integers(0, 4, size=(1000, 2))
    ys = QPSK.points[idx] @ a.T + 0.5 * (
        rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2)))
    scalar_cov = 0.6 * np.eye(2, dtype=complex)
    agree_m = np.array_equal(
        detect_batch(ys, a, None, DetectorMode.MDD, QPSK),
        detect_batch(ys, a, scalar_cov, DetectorMode.NWMDD, QPSK))
    agree_a = np.array_equal(
        detect_batch(ys, None, None, DetectorMode.AMDD, QPSK),
        detect_batch(ys, None, scalar_cov, DetectorMode.NWAMDD, QPSK))

    res = design_noise_stage(stage, DESK4.noise_var)
    errs, bits = ber_trial(ch, res, 1e12, DetectorMode.MDD, QPSK, 625,
                           rng_seed=2)
    ber = errs / bits
    sigma = 0.5 / math.sqrt(bits)
    coin_ok = abs(ber - 0.5) <= 3.0 * sigma

    ok = exact_ok and agree_m and agree_a and coin_ok
    detail = ("noise-free errors %d, scalar-cov agreement %s/%s, "
              "saturated ber %.4f over %d bits, %.0f s"
              % (err0, agree_m, agree_a, ber, bits,
                 time.perf_counter() - t0))
    assert _criteria.record("criterion 7", ok, detail), detail


# --------------------------------------------------------------------- 8


def test_criterion_08_eig_metric_ordering():
    t0 = time.perf_counter()
    n_trials = 200
    schemes = (SchemeId.P_SVD_STAR_MMSE_STAR, SchemeId.REF21_SVD_MMSE,
               SchemeId.REF29_CIA_BD)
    vals = {s: [] for s in schemes}
    for trial in range(n_trials):
        ch = generate_channel(DESK4, seed=6000 + trial)
        for s in schemes:
            stage = design_channel_stage(s, ch, DESK4)
            vals[s].append(stage.diagnostics.eig_metric)
    arr = {s: np.array(v) for s, v in vals.items()}
    legs = []
    for s in (SchemeId.P_SVD_STAR_MMSE_STAR, SchemeId.REF21_SVD_MMSE):
        t, thr, sig = _t_one_sided(arr[s] - arr[SchemeId.REF29_CIA_BD])
        legs.append((s.value, t, thr, sig))
    ok = all(sig for _, _, _, sig in legs)
    means = ", ".join("%s %.2f" % (s.value, arr[s].mean()) for s in schemes)
    tstats = "; ".join("%s vs REF29_CIA_BD t=%.1f (need >%.2f)"
                       % (name, t, thr) for name, t, thr, _ in legs)
    detail = ("means: %s; %s; %d paired channels, %.0f s"
              % (means, tstats, n_trials, time.perf_counter() - t0))
    assert _criteria.record("criterion 8", ok, detail), detail


# --------------------------------------------------------------------- 9


def test_criterion_09_sum_rate_ordering():
    t0 = time.perf_counter()
    n_trials = 500
    nv = snr_to_noise_var(10.0, DESK4.e_t)
    vals = {s: [] for s in SchemeId}
    for trial in range(n_trials):
        ch = generate_channel(DESK4, seed=7000 + trial)
        for s in SchemeId:
            stage = design_channel_stage(s, ch, DESK4)
            res = design_noise_stage(stage, nv)
            vals[s].append(sum_rate(ch, res, nv))
    arr = {s: np.array(v) for s, v in vals.items()}

    star = SchemeId.P_CIA_STAR_MMSE_STAR
    top = SchemeId.REF29_CIA_BD
    t_top, thr_top, sig_top = _t_one_sided(arr[top] - arr[star])
    failing = []
    for s in SchemeId:
        if s in (star, top):
            continue
        t, thr, sig = _t_one_sided(arr[star] - arr[s])
        if not sig:
            failing.append("%s (t=%.1f)" % (s.value, t))
    ok = sig_top and not failing
    means = ", ".join("%s %.2f" % (s.value, arr[s].mean())
                      for s in sorted(SchemeId,
                                      key=lambda s: -arr[s].mean()))
    detail = ("means: %s; top-leg t=%.1f (need >%.2f); second-leg "
              "failures: %s; %d paired channels at 10 dB, %.0f s"
              % (means, t_top, thr_top, ", ".join(failing) or "none",
                 n_trials, time.perf_counter() - t0))
    assert _criteria.record("criterion 9", ok, detail), detail


# -------------------------------------------------------------------- 10


def _ber_cells(cfg, tag):
    spec = ExperimentSpec(cfg=cfg, schemes=tuple(SchemeId),
                          detectors=(DetectorMode.MDD, DetectorMode.AMDD),
                          snr_grid_db=(15.0,), n_trials=1000,
                          vectors_per_trial=16, base_seed=1)
    summary = run(spec, measures=("ber",))
    cells = {(r.scheme, r.detector): r for r in summary.rows}
    return cells, tag


def test_criterion_10_ber_ordering_and_gap():
    t0 = time.perf_counter()
    star = SchemeId.P_SVD_STAR_MMSE_STAR
    problems = []
    gaps = []
    for cfg, tag in ((DESK4, "K=4"), (DESK8, "K=8")):
        cells, _ = _ber_cells(cfg, tag)
        for det in (DetectorMode.MDD, DetectorMode.AMDD):
            star_row = cells[(star, det)]
            if star_row.bits_sent == 0 or math.isnan(star_row.ber):
                problems.append("%s/%s: no data" % (tag, det.value))
                continue
            for s in SchemeId:
                if s is star:
                    continue
                rival = cells[(s, det)]
                if star_row.ber > rival.ber:
                    problems.append("%s/%s: %.2e > %.2e vs %s"
                                    % (tag, det.value, star_row.ber,
                                       rival.ber, s.value))
        mdd = cells[(star, DetectorMode.MDD)]
        amdd = cells[(star, DetectorMode.AMDD)]
        # factor-two gap judged on interval overlap so zero-error cells
        # cannot produce a spurious fail
        if not (amdd.ber_ci_low <= 2.0 * mdd.ber_ci_high):
            problems.append("%s approx-detector gap: amdd ci [%.2e,%.2e] "
                            "vs mdd ci [%.2e,%.2e]"
                            % (tag, amdd.ber_ci_low, amdd.ber_ci_high,
                               mdd.ber_ci_low, mdd.ber_ci_high))
        gaps.append("%s best ber mdd %.2e amdd %.2e"
                    % (tag, mdd.ber, amdd.ber))
    ok = not problems
    detail = ("%s; violations: %s; 1000 trials, 15 dB, %.0f s"
              % ("; ".join(gaps), "; ".join(problems) or "none",
                 time.perf_counter() - t0))
    assert _criteria.record("criterion 10", ok, detail), detail


# -------------------------------------------------------------------- 11


def test_criterion_11_run_determinism():
    t0 = time.perf_counter()
    spec = ExperimentSpec(cfg=DESK4,
                          schemes=(SchemeId.REF21_SVD_MMSE,
                                   SchemeId.REF29_CIA_BD),
                          detectors=(DetectorMode.MDD,),
                          snr_grid_db=(0.0, 15.0), n_trials=2,
                          vectors_per_trial=8, base_seed=11)
    first = run(spec).csv_text()
    second = run(spec).csv_text()
    parallel = run(dataclasses.replace(spec, workers=2))
    ok = first == second == parallel.csv_text()
    detail = ("repeat identical %s, worker-count identical %s, %.0f s"
              % (first == second, first == parallel.csv_text(),
                 time.perf_counter() - t0))
    assert _criteria.record("criterion 11", ok, detail), detail
