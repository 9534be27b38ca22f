"""Command-line front end.

Subcommands select which measures the run produces::

    hbfsim eigmetric | sumrate | ber | all   [common flags]
    hbfsim dump-channel --seed N [--out file.json]
    hbfsim selftest

Common flags: ``--config file.json`` (JSON mirror of the experiment
spec; unknown keys are rejected), ``--out``, ``--seed``, ``--trials``,
``--vectors``, ``--snr`` (comma list ``0,5,10`` or range ``0:15:5``),
``--schemes``, ``--detectors``, ``--workers``, ``--verbose``.  Flags
override config-file values.  Exit codes: 0 success, 1 configuration
error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .channel import channel_to_json, generate_channel
from .core import ConfigError, SolverError, SystemConfig
from .detection import DetectorMode
from .harness import ExperimentSpec, run
from .schemes import SchemeId

_CFG_KEYS = ("n_t", "n_r", "n_s", "k_users", "n_rf_t", "n_rf_r", "n_paths",
             "noise_var", "modulation")
_SPEC_KEYS = ("cfg", "schemes", "detectors", "snr_grid_db", "n_trials",
              "vectors_per_trial", "base_seed", "output_path", "workers")

_MEASURES = {
    "eigmetric": ("eig",),
    "sumrate": ("sumrate",),
    "ber": ("ber",),
    "all": ("eig", "sumrate", "ber"),
}


def default_config() -> SystemConfig:
    """Headline downlink setting: 64-antenna transmitter, 4 users with 4
    antennas and 2 streams each, 8 paths."""
    return SystemConfig(n_t=64, n_r=4, n_s=2, k_users=4, n_rf_t=8,
                        n_rf_r=2, n_paths=8)


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with the config code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(1)


def _parse_snr(text: str) -> tuple[float, ...]:
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ConfigError("snr range must be start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0:
                raise ConfigError("snr step must be positive")
            grid = np.arange(start, stop + step * 1e-9, step)
            return tuple(float(x) for x in grid)
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("bad snr value in %r" % text)


def _parse_schemes(text: str) -> tuple[SchemeId, ...]:
    out = []
    for name in text.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            out.append(SchemeId(name))
        except ValueError:
            valid = ", ".join(s.value for s in SchemeId)
            raise ConfigError("unknown scheme %r; valid: %s" % (name, valid))
    if not out:
        raise ConfigError("no schemes selected")
    return tuple(out)


def _parse_detectors(text: str) -> tuple[DetectorMode, ...]:
    out = []
    for name in text.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            out.append(DetectorMode(name))
        except ValueError:
            valid = ", ".join(d.value for d in DetectorMode)
            raise ConfigError("unknown detector %r; valid: %s" % (name, valid))
    return tuple(out)


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc))
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - set(_SPEC_KEYS)
    if unknown:
        raise ConfigError("unknown config keys: %s"
                          % ", ".join(sorted(unknown)))
    if "cfg" in doc:
        bad = set(doc["cfg"]) - set(_CFG_KEYS)
        if bad:
            raise ConfigError("unknown cfg keys: %s" % ", ".join(sorted(bad)))
    return doc


def _cfg_from_doc(doc: dict) -> SystemConfig:
    if not doc.get("cfg"):
        return default_config()
    try:
        return SystemConfig(**doc["cfg"])
    except TypeError as exc:
        raise ConfigError("bad cfg section: %s" % exc)


def _build_spec(args) -> ExperimentSpec:
    doc = _load_config_file(args.config) if args.config else {}
    cfg = _cfg_from_doc(doc)

    try:
        schemes = tuple(SchemeId(s) for s in doc.get("schemes", [])) or \
            tuple(SchemeId)
        detectors = tuple(DetectorMode(d) for d in doc.get("detectors", [])) \
            if "detectors" in doc else (DetectorMode.MDD, DetectorMode.AMDD)
        snr_grid = tuple(float(x) for x in doc.get("snr_grid_db",
                                                   (0.0, 5.0, 10.0, 15.0)))
        spec_kwargs = dict(
            cfg=cfg, schemes=schemes, detectors=detectors,
            snr_grid_db=snr_grid,
            n_trials=int(doc.get("n_trials", 1000)),
            vectors_per_trial=int(doc.get("vectors_per_trial", 16)),
            base_seed=int(doc.get("base_seed", 1)),
            output_path=doc.get("output_path"),
            workers=doc.get("workers"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("bad config value: %s" % exc)
    if args.schemes:
        spec_kwargs["schemes"] = _parse_schemes(args.schemes)
    if args.detectors:
        spec_kwargs["detectors"] = _parse_detectors(args.detectors)
    if args.snr:
        spec_kwargs["snr_grid_db"] = _parse_snr(args.snr)
    if args.trials is not None:
        spec_kwargs["n_trials"] = args.trials
    if args.vectors is not None:
        spec_kwargs["vectors_per_trial"] = args.vectors
    if args.seed is not None:
        spec_kwargs["base_seed"] = args.seed
    if args.out:
        spec_kwargs["output_path"] = args.out
    if args.workers is not None:
        spec_kwargs["workers"] = args.workers
    if spec_kwargs["n_trials"] < 1:
        raise ConfigError("n_trials must be at least 1")
    try:
        return ExperimentSpec(**spec_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON experiment spec")
    sub.add_argument("--out", help="output CSV path")
    sub.add_argument("--seed", type=int, help="base RNG seed")
    sub.add_argument("--trials", type=int, help="Monte-Carlo trials")
    sub.add_argument("--vectors", type=int,
                     help="transmit vectors per BER trial")
    sub.add_argument("--snr", help="SNR grid, list 0,5,10 or range 0:15:5")
    sub.add_argument("--schemes", help="comma-separated scheme names")
    sub.add_argument("--detectors", help="comma-separated detector names")
    sub.add_argument("--workers", type=int, help="worker processes")
    sub.add_argument("--verbose", action="store_true")


def _run_selftest() -> int:
    """Fast invariant battery on a small configuration."""
    from . import selftest
    return selftest.run_selftest()


def main(argv=None) -> int:
    parser = _Parser(prog="hbfsim",
                     description="hybrid beamforming link simulator")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("eigmetric", "sumrate", "ber", "all"):
        sub = subs.add_parser(name, help="run the %s experiment" % name)
        _add_common(sub)
    dump = subs.add_parser("dump-channel",
                           help="write one channel realization as JSON")
    dump.add_argument("--seed", type=int, required=True)
    dump.add_argument("--config", help="JSON experiment spec (cfg part)")
    dump.add_argument("--out", help="output path (default stdout)")
    subs.add_parser("selftest", help="run built-in invariant checks")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "selftest":
            return _run_selftest()
        if args.command == "dump-channel":
            doc = _load_config_file(args.config) if args.config else {}
            cfg = _cfg_from_doc(doc)
            channels = generate_channel(cfg, args.seed)
            text = json.dumps(channel_to_json(channels, cfg), indent=2)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
            else:
                print(text)
            return 0
        spec = _build_spec(args)
        summary = run(spec, measures=_MEASURES[args.command],
                      verbose=args.verbose)
        if spec.output_path:
            if args.verbose:
                print("wrote %s" % spec.output_path, file=sys.stderr)
        else:
            sys.stdout.write(summary.csv_text())
        return 0
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    except (SolverError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        print("runtime error: %s" % exc, file=sys.stderr)
        return 2
    except ValueError as exc:
        # bad names/values that slipped past explicit validation
        print("config error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
