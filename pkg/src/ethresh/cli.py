"""Command-line entry point: ``ethresh <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import ebh, tables
from .harness import KEY_COLUMNS, ConfigError, build_config, run_scenario, write_csv
from .thresholds import EClass, calibrate, threshold, worst_case_error

EXIT_OK = 0
EXIT_USAGE = 2

SCENARIO_ALIASES = {"ui": "universal-inference"}
NULLS = {"exp1": ebh.exp1_survival}


def _eclass(name: str) -> EClass:
    try:
        return EClass.parse(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _read_evalues(path: Path) -> list[float]:
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        return []
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is None or "e" not in reader.fieldnames:
        raise ValueError(f"{path}: expected a CSV with an 'e' column")
    vals = []
    for i, row in enumerate(reader, start=2):
        try:
            vals.append(float(row["e"]))
        except (TypeError, ValueError):
            raise ValueError(f"{path}:{i}: not a number: {row['e']!r}") from None
    return vals


def cmd_threshold(args):
    r = threshold(args.eclass, args.alpha)
    print(f"{r.value:.10g} kind={r.kind}")


def cmd_worst_case(args):
    r = worst_case_error(args.eclass, args.gamma)
    print(f"{r.value:.10g} kind={r.kind}")


def cmd_calibrate(args):
    print(f"{calibrate(args.eclass, args.e):.10g}")


def cmd_boost(args):
    if args.kind == "lcs-ad":
        r = ebh.boost_lcs_ad(args.alpha)
    elif args.kind == "lcs-pr":
        r = ebh.boost_lcs_pr(args.alpha)
    else:
        S = NULLS[args.null]
        if args.regime == "ad":
            crit = "full-T" if args.criterion == "full" else "relaxed"
            b = ebh.boost_generic_ad(S, args.alpha, args.K, crit)
        else:
            crit = "grid" if args.criterion == "full" else "relaxed"
            b = ebh.boost_generic_pr(S, args.alpha, args.K, crit)
        print(f"{b:.10g}")
        return
    print(f"lower={r.lower:.10g} upper={r.upper:.10g} regime={r.regime}")


def cmd_ebh(args):
    e = _read_evalues(args.input)
    if not e:
        print("discoveries=0")
        return
    if not args.boost >= 1:
        raise ValueError("--boost must be at least 1")
    d = ebh.ebh_reject([args.boost * x for x in e], args.alpha)
    print(f"discoveries={d.k}")
    if d.k:
        print("rejected=" + ",".join(str(int(i)) for i in d.rejected))


def cmd_simulate(args):
    scenario = SCENARIO_ALIASES.get(args.scenario, args.scenario)
    try:
        raw = json.loads(args.config.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.setdefault("scenario", scenario) != scenario:
        raise ConfigError(f"config is for scenario {raw['scenario']!r}, not {scenario!r}")
    cfg = build_config(raw, seed=args.seed, threads=args.threads)
    rows = run_scenario(cfg)
    write_csv(args.out, rows, KEY_COLUMNS[scenario])
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_table(args):
    text = tables.table_csv(args.which)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _prob(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None


def _u64(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _pos_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ethresh", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("threshold", help="improved rejection threshold T_alpha")
    s.add_argument("--class", dest="eclass", type=_eclass, required=True)
    s.add_argument("--alpha", type=_prob, required=True)
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("worst-case", help="worst-case type-I error R_gamma")
    s.add_argument("--class", dest="eclass", type=_eclass, required=True)
    s.add_argument("--gamma", type=_prob, required=True)
    s.set_defaults(func=cmd_worst_case)

    s = sub.add_parser("calibrate", help="e-to-p calibration on a class")
    s.add_argument("--class", dest="eclass", type=_eclass, required=True)
    s.add_argument("--e", type=_prob, required=True)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("boost", help="e-BH boosting factors")
    s.add_argument("kind", choices=["lcs-ad", "lcs-pr", "generic"])
    s.add_argument("--alpha", type=_prob, required=True)
    s.add_argument("--null", choices=sorted(NULLS), default="exp1")
    s.add_argument("--K", type=_pos_int, default=1000)
    s.add_argument("--criterion", choices=["full", "relaxed"], default="full")
    s.add_argument("--regime", choices=["ad", "prds"], default="ad")
    s.set_defaults(func=cmd_boost)

    s = sub.add_parser("ebh", help="run e-BH on a CSV column 'e'")
    s.add_argument("--input", type=Path, required=True)
    s.add_argument("--alpha", type=_prob, required=True)
    s.add_argument("--boost", type=_prob, default=1.0)
    s.set_defaults(func=cmd_ebh)

    s = sub.add_parser("simulate", help="run a Monte Carlo scenario to CSV")
    s.add_argument("scenario", choices=["gaussian", "universal-inference", "ui", "gamma", "ebh"])
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--seed", type=_u64)
    s.add_argument("--threads", type=_pos_int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("table", help="regenerate a reference table as CSV")
    s.add_argument("which", type=int, choices=[1, 2, 7])
    s.add_argument("--out")
    s.set_defaults(func=cmd_table)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"ethresh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
