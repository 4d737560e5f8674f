"""Command-line interface.

    vbvarsel fit        --input.path X.csv [--config run.cfg] [--model.k_max 5 ...]
    vbvarsel experiment --simulate.enabled true --run.repetitions 10 ...
    vbvarsel simulate   --simulate.frac_relevant 0.05 --output.dir sim/
    vbvarsel reproduce  1 --output.dir table1/

Every configuration key is also a flag.  Exit status is 0 on success, 1 for
configuration errors and 2 for data errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as cfg
from .exceptions import ConfigError, DataError, VBVarSelError
from .harness import run_experiment, run_fit, run_simulate
from .metrics import format_interval
from .reproduce import reproduce, table_ids

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_config_flags(parser, keys):
    parser.add_argument("--config", help="flat key=value configuration file")
    for key in keys:
        _, default = cfg.SCHEMA[key]
        parser.add_argument(f"--{key}", dest=key, default=None, metavar="VALUE", help=f"default: {default}")


def build_parser():
    parser = _Parser(prog="vbvarsel", description="Variational mixture clustering with covariate selection")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    all_keys = list(cfg.SCHEMA)
    _add_config_flags(sub.add_parser("fit", help="fit one dataset"), all_keys)
    _add_config_flags(sub.add_parser("experiment", help="repetition harness"), all_keys)
    simulate_keys = [k for k in all_keys if k.startswith("simulate.") or k == "output.dir"]
    _add_config_flags(sub.add_parser("simulate", help="write a synthetic dataset"), simulate_keys)
    rep = sub.add_parser("reproduce", help="rerun a canned simulation table")
    rep.add_argument("table", help=f"one of: {', '.join(table_ids())}")
    rep.add_argument("--large", action="store_true", help="include the n=1000 rows")
    for key in ("run.repetitions", "run.workers", "run.base_seed", "output.dir"):
        rep.add_argument(f"--{key}", dest=key, default=None, metavar="VALUE")
    return parser


def _overrides(args, keys):
    out = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = cfg.parse_value(key, value)
    return out


def _load(args):
    file_values = cfg.read_config_file(args.config) if getattr(args, "config", None) else {}
    return cfg.RunConfig(cfg.resolve(file_values, _overrides(args, cfg.SCHEMA)))


def _print_summary(summary):
    for name, stats in summary.aggregates.items():
        print(f"{name:<18}{format_interval(stats, 3)}")
    if summary.failures:
        print(f"failed repetitions: {summary.failures}")


def dispatch(args) -> int:
    if args.command == "fit":
        rep = run_fit(_load(args))
        print(f"iterations {rep.iterations}  converged {rep.converged}  effective_k {rep.effective_k}")
        print(f"selected {int(rep.selected.sum())} of {rep.selected.size} covariates")
    elif args.command == "experiment":
        summary, _ = run_experiment(_load(args))
        _print_summary(summary)
    elif args.command == "simulate":
        values = _load(args).values
        values["simulate.enabled"] = True
        dataset = run_simulate(cfg.RunConfig(values))
        print(f"wrote {dataset.data.n} x {dataset.data.j} to {values['output.dir']}")
    else:
        extra = _overrides(args, ("run.repetitions", "run.workers", "run.base_seed"))
        out = getattr(args, "output.dir") or f"reproduce_{args.table}"
        report = reproduce(args.table, out, extra, include_large=args.large)
        print(report["text"], end="")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return dispatch(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except VBVarSelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
