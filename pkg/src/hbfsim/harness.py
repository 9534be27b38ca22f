"""Monte-Carlo experiment driver.

One trial = one channel realization consumed by every scheme, detector
and SNR point (paired comparisons throughout).  Trials are independent
and seeded as ``base_seed + trial_index``, so the result of a run is a
pure function of the experiment spec: worker processes only change the
wall-clock time, never the bytes of the output CSV.  Aggregation happens
in trial order regardless of completion order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import generate_channel
from .core import SolverError, SystemConfig, snr_to_noise_var
from .detection import DetectorMode, make_constellation
from .metrics import ber_trial, sum_rate
from .schemes import SchemeId, design_channel_stage, design_noise_stage

CSV_HEADER = ("scheme,detector,snr_db,trials,eig_metric_mean,sum_rate_mean,"
              "bits_sent,bit_errors,ber,ber_ci_low,ber_ci_high,fail_count,"
              "config_hash")

ALL_MEASURES = ("eig", "sumrate", "ber")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that determines a run's output.

    ``workers`` and ``output_path`` are execution details and excluded
    from the config hash; all other fields (and the requested measures)
    identify the experiment.
    """

    cfg: SystemConfig
    schemes: tuple[SchemeId, ...]
    detectors: tuple[DetectorMode, ...]
    snr_grid_db: tuple[float, ...]
    n_trials: int = 1000
    vectors_per_trial: int = 16
    base_seed: int = 1
    output_path: str | None = None
    workers: int | None = None


@dataclass
class CellSummary:
    """Aggregated row for one (scheme, detector, snr) cell."""

    scheme: SchemeId
    detector: DetectorMode | None
    snr_db: float
    trials: int
    eig_metric_mean: float
    sum_rate_mean: float
    bits_sent: int
    bit_errors: int
    ber: float
    ber_ci_low: float
    ber_ci_high: float
    fail_count: int


@dataclass
class RunSummary:
    """All rows of one run plus the config hash stamped on every row."""

    spec: ExperimentSpec
    measures: tuple[str, ...]
    rows: list[CellSummary]
    config_hash: str

    def csv_text(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([
                r.scheme.value,
                r.detector.value if r.detector is not None else "-",
                repr(float(r.snr_db)),
                str(r.trials),
                repr(r.eig_metric_mean),
                repr(r.sum_rate_mean),
                str(r.bits_sent),
                str(r.bit_errors),
                repr(r.ber),
                repr(r.ber_ci_low),
                repr(r.ber_ci_high),
                str(r.fail_count),
                self.config_hash,
            ]))
        return "\n".join(lines) + "\n"


def wilson_interval(errors: int, total: int, z: float = 1.96
                    ) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if total <= 0:
        return (math.nan, math.nan)
    p_hat = errors / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (p_hat + z2 / (2.0 * total)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / total
                                   + z2 / (4.0 * total * total))
    return (max(0.0, center - half), min(1.0, center + half))


def config_hash(spec: ExperimentSpec, measures: tuple[str, ...]) -> str:
    """SHA-256 over the canonical JSON of everything that shapes results."""
    doc = {
        "cfg": dataclasses.asdict(spec.cfg),
        "schemes": [s.value for s in spec.schemes],
        "detectors": [d.value for d in spec.detectors],
        "snr_grid_db": [float(x) for x in spec.snr_grid_db],
        "n_trials": spec.n_trials,
        "vectors_per_trial": spec.vectors_per_trial,
        "base_seed": spec.base_seed,
        "measures": list(measures),
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _cells(spec: ExperimentSpec, measures: tuple[str, ...]):
    """Cell keys in output order."""
    if "ber" in measures and spec.detectors:
        dets: tuple = spec.detectors
    else:
        dets = (None,)
    for scheme in spec.schemes:
        for det in dets:
            for snr in spec.snr_grid_db:
                yield (scheme, det, float(snr))


def _trial_worker(item) -> tuple[int, dict]:
    """Run one full trial; returns per-cell records (None marks a solver
    failure for that cell)."""
    spec, measures, trial = item
    cfg = spec.cfg
    seed = spec.base_seed + trial
    channels = generate_channel(cfg, seed)
    want_ber = "ber" in measures and bool(spec.detectors)
    q = make_constellation(cfg.modulation) if want_ber else None
    records: dict = {}
    for scheme in spec.schemes:
        scheme_cells = [c for c in _cells(spec, measures) if c[0] == scheme]
        try:
            stage = design_channel_stage(scheme, channels, cfg)
        except (SolverError, np.linalg.LinAlgError):
            for cell in scheme_cells:
                records[cell] = None
            continue
        for snr in spec.snr_grid_db:
            snr = float(snr)
            noise_var = snr_to_noise_var(snr, cfg.e_t)
            snr_cells = [c for c in scheme_cells if c[2] == snr]
            try:
                result = design_noise_stage(stage, noise_var)
                eig = (stage.diagnostics.eig_metric
                       if "eig" in measures else math.nan)
                rate = (sum_rate(channels, result, noise_var)
                        if "sumrate" in measures else math.nan)
                if want_ber:
                    for det in spec.detectors:
                        err, bits = ber_trial(channels, result, noise_var,
                                              det, q, spec.vectors_per_trial,
                                              seed)
                        records[(scheme, det, snr)] = (eig, rate, err, bits)
                else:
                    records[(scheme, None, snr)] = (eig, rate, 0, 0)
            except (SolverError, np.linalg.LinAlgError):
                for cell in snr_cells:
                    records[cell] = None
    return trial, records


def _resolve_workers(spec: ExperimentSpec) -> int:
    if spec.workers is not None:
        return max(1, int(spec.workers))
    env = os.environ.get("HBF_WORKERS", "").strip()
    if env:
        return max(1, int(env))
    return 1


def run(spec: ExperimentSpec,
        measures: tuple[str, ...] = ALL_MEASURES,
        verbose: bool = False) -> RunSummary:
    """Execute the experiment and (when configured) write the CSV.

    Identical specs produce byte-identical CSV bodies; the worker count
    only affects scheduling.
    """
    cells = list(_cells(spec, measures))
    sums = {c: {"eig": 0.0, "rate": 0.0, "err": 0, "bits": 0,
                "ok": 0, "fail": 0} for c in cells}
    items = [(spec, tuple(measures), t) for t in range(spec.n_trials)]
    workers = _resolve_workers(spec)

    if workers > 1 and spec.n_trials > 1:
        chunk = max(1, spec.n_trials // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_trial_worker, items, chunksize=chunk)
            ordered = sorted(results, key=lambda tr: tr[0])
    else:
        ordered = []
        for item in items:
            ordered.append(_trial_worker(item))
            if verbose and (item[2] + 1) % 50 == 0:
                print("trial %d/%d" % (item[2] + 1, spec.n_trials),
                      flush=True)

    # trial-order reduction keeps float sums independent of scheduling
    for _, records in ordered:
        for cell in cells:
            rec = records.get(cell)
            acc = sums[cell]
            if rec is None:
                acc["fail"] += 1
                continue
            eig, rate, err, bits = rec
            acc["eig"] += eig
            acc["rate"] += rate
            acc["err"] += err
            acc["bits"] += bits
            acc["ok"] += 1

    chash = config_hash(spec, tuple(measures))
    rows = []
    for cell in cells:
        scheme, det, snr = cell
        acc = sums[cell]
        n_ok = acc["ok"]
        ber = acc["err"] / acc["bits"] if acc["bits"] > 0 else math.nan
        ci_low, ci_high = wilson_interval(acc["err"], acc["bits"])
        rows.append(CellSummary(
            scheme=scheme, detector=det, snr_db=snr, trials=n_ok,
            eig_metric_mean=acc["eig"] / n_ok if n_ok else math.nan,
            sum_rate_mean=acc["rate"] / n_ok if n_ok else math.nan,
            bits_sent=acc["bits"], bit_errors=acc["err"], ber=ber,
            ber_ci_low=ci_low, ber_ci_high=ci_high,
            fail_count=acc["fail"]))
    summary = RunSummary(spec=spec, measures=tuple(measures), rows=rows,
                         config_hash=chash)
    if spec.output_path:
        write_csv(summary, spec.output_path)
    return summary


def write_csv(summary: RunSummary, path: str) -> None:
    """Atomically write the summary CSV (temp file + rename)."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(summary.csv_text())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
