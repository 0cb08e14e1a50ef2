"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Output files are named ``<subcommand>-<config hash>-<artifact>.{csv,json}``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, NumericalError, UndefinedMetricError
from ..solvers import SOLVERS
from . import config as cfgmod
from .experiments import (
    run_ccdf_experiment,
    run_detection_experiment,
    run_envelope_experiment,
)
from .export import ambiguity_columns, signal_columns, symbol_columns, write_json, write_table

log = logging.getLogger("ofdmtr")

PRESETS = {"design": "envelope", "ccdf": "ccdf", "af": "detect", "detect": "detect"}
FULL_CCDF_TRIALS = 50_000
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _common(p):
    p.add_argument("--config", type=Path, help="experiment config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--solver", choices=SOLVERS + ("none",))
    p.add_argument("--iters", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key"
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="ofdmtr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("design", "solve one instance; write symbols, envelopes and traces"),
        ("ccdf", "Monte-Carlo PMEPR CCDF per solver"),
        ("af", "ambiguity functions of the detection-study waveforms"),
        ("detect", "matched-filter detection probability versus SNR"),
    ]:
        p = sub.add_parser(name, help=help_)
        _common(p)
        if name == "ccdf":
            p.add_argument(
                "--full-trials", action="store_true",
                help=f"use {FULL_CCDF_TRIALS} trials instead of the desk-scale default",
            )
    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


def resolve_config(args) -> cfgmod.ExperimentConfig:
    config = cfgmod.load(args.config) if args.config else cfgmod.preset(PRESETS[args.command])
    changes = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in cfgmod._FIELDS:
            raise ConfigError(f"bad --set override {item!r}")
        changes[key] = cfgmod._convert(key, value)
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.solver is not None:
        changes["solvers"] = (args.solver,)
    if args.iters is not None:
        changes["max_iters"] = args.iters
    if getattr(args, "full_trials", False):
        changes["n_trials"] = FULL_CCDF_TRIALS
    if args.trials is not None:
        changes["detect_trials" if args.command == "detect" else "n_trials"] = args.trials
    try:
        return config.replace(**changes) if changes else config
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _design(config, out, stem):
    result = run_envelope_experiment(config)
    write_table(out, f"{stem}-envelope-initial", signal_columns(result.initial))
    for name, d in result.designs.items():
        write_table(out, f"{stem}-symbols-{name}", symbol_columns(d.symbols))
        write_table(out, f"{stem}-envelope-{name}", signal_columns(d.signal))
        if d.trace is not None:
            write_table(out, f"{stem}-trace-{name}", d.trace.to_dict())
    return {"pmepr": result.pmeprs()}


def _ccdf(config, out, stem):
    result = run_ccdf_experiment(config)
    for name, curve in result.curves.items():
        write_table(out, f"{stem}-ccdf-{name}", curve.to_dict())
    trials = {
        "trial": list(range(config.n_trials)),
        "carriers": [" ".join(str(int(n)) for n in row) for row in result.carriers],
    }
    trials.update({name: [float(v) for v in vals] for name, vals in result.per_trial.items()})
    write_table(out, f"{stem}-trials", trials)
    return {"median_pmepr": {k: float(sorted(v)[len(v) // 2]) for k, v in result.per_trial.items()}}


def _af(config, out, stem):
    result = run_detection_experiment(config, ambiguity=True, detection=False)
    comment = "delay: samples; doppler: cycles per pulse; magnitude: |chi|/|chi(0,0)|"
    for name, grid in result.ambiguity.items():
        write_table(out, f"{stem}-af-{name}", ambiguity_columns(grid), comment=comment)
        grid.to_binary(Path(out) / f"{stem}-af-{name}.bin")
    return {"pmepr": result.pmeprs, "peak_sidelobe": {
        k: g.peak_sidelobe(guard_delay=config.oversampling, guard_doppler=1.0)
        for k, g in result.ambiguity.items()
    }}


def _detect(config, out, stem):
    result = run_detection_experiment(config, ambiguity=False, detection=True)
    for name, curve in result.pd.items():
        write_table(out, f"{stem}-pd-{name}", curve.to_dict())
    return {"pmepr": result.pmeprs}


def _selftest(seed):
    from ..selftest import run

    results = run(seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:18s} {detail}")
    return all(ok for _, ok, _ in results)


RUNNERS = {"design": _design, "ccdf": _ccdf, "af": _af, "detect": _detect}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "selftest":
            return 0 if _selftest(args.seed) else EXIT_NUMERICAL
        config = resolve_config(args)
        stem = f"{args.command}-{cfgmod.config_hash(config)}"
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}-config.ini").write_text(cfgmod.serialize(config))
        log.info("running %s -> %s/%s-*", args.command, out, stem)
        summary = RUNNERS[args.command](config, out, stem)
        write_json(out, f"{stem}-summary", summary)
        print(f"{stem}: wrote outputs to {out}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, UndefinedMetricError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
