"""Batch command-line front end.

Subcommands: ``run`` executes one simulation and prints the run report
as JSON; ``sweep`` runs a parameter grid and prints summary CSV;
``scenario-list`` shows canned scenario builders; ``accept`` executes
the acceptance suite and prints one pass/fail line per criterion.

Every flag has an environment-variable override with prefix ``ACOOL_``
(for example ``ACOOL_SEED=7``).  Exit codes: 0 success, 1 bad
arguments, 2 property violation, 3 liveness failure (event cap or
deadlock).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .field_ecc import ResilienceViolation
from .simnet import (
    ADVERSARIES, CSV_HEADER, PROTOCOLS, SCHEDULERS, SCENARIOS, SimConfig,
    run, sweep,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _env(name: str, default):
    return os.environ.get(f"ACOOL_{name.upper()}", default)


def _env_flag(name: str) -> bool:
    return str(_env(name, "")).lower() in ("1", "true", "yes", "on")


def _add_common(p: _Parser):
    p.add_argument("--protocol", choices=PROTOCOLS + ("auto",),
                   default=_env("protocol", "acool"),
                   help="auto picks small_t once n reaches the committee "
                        "ratio threshold")
    p.add_argument("--small-t-ratio", type=float,
                   default=float(_env("small_t_ratio", 2.0)),
                   help="auto selects small_t when n >= ratio * (3t+1)")
    p.add_argument("--n", type=int, default=int(_env("n", 4)))
    p.add_argument("--t", type=int, default=None,
                   help="fault bound; default floor((n-1)/3)")
    p.add_argument("--len", type=int, dest="msg_len_bits",
                   default=int(_env("len", 256)),
                   help="message length in bits")
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p.add_argument("--adversary", choices=("none",) + ADVERSARIES,
                   default=_env("adversary", "none"))
    p.add_argument("--scheduler", choices=SCHEDULERS,
                   default=_env("scheduler", "uniform"))
    p.add_argument("--abba", choices=("oracle", "coin"),
                   default=_env("abba", "oracle"))
    p.add_argument("--abba-hint", type=int, choices=(0, 1),
                   default=int(_env("abba_hint", 0)))
    p.add_argument("--skip-brba", action="store_true",
                   default=_env_flag("skip_brba"))
    p.add_argument("--count-abba-bits", action="store_true",
                   default=_env_flag("count_abba_bits"))
    p.add_argument("--count-byzantine-bits", action="store_true",
                   default=_env_flag("count_byzantine_bits"))
    p.add_argument("--legacy-cool", action="store_true",
                   default=_env_flag("legacy_cool"))
    p.add_argument("--leader", type=int, default=int(_env("leader", 1)))
    p.add_argument("--unbalanced", action="store_true",
                   default=_env_flag("unbalanced"))
    p.add_argument("--event-cap", type=int,
                   default=int(_env("event_cap", 1_000_000)))
    p.add_argument("--out", default=_env("out", None),
                   help="write report JSON here (event log beside it)")


def _config_from(args, seed=None) -> SimConfig:
    t = args.t if args.t is not None else (args.n - 1) // 3
    protocol = args.protocol
    if protocol == "auto":
        protocol = ("small_t" if args.n >= args.small_t_ratio * (3 * t + 1)
                    else "acool")
    return SimConfig(
        n=args.n, t=t, seed=args.seed if seed is None else seed,
        msg_len_bits=args.msg_len_bits, protocol=protocol,
        adversary=args.adversary, scheduler=args.scheduler,
        abba=args.abba, abba_hint=args.abba_hint,
        skip_brba=args.skip_brba, count_abba_bits=args.count_abba_bits,
        count_byzantine_bits=args.count_byzantine_bits,
        legacy_cool=args.legacy_cool, leader=args.leader,
        balanced=not args.unbalanced, event_cap=args.event_cap,
    )


def cmd_run(args) -> int:
    if args.scenario:
        builder = SCENARIOS[args.scenario]
        t = args.t if args.t is not None else (args.n - 1) // 3
        config = builder(
            args.n, t, seed=args.seed, msg_len_bits=args.msg_len_bits,
            scheduler=args.scheduler, abba=args.abba,
            abba_hint=args.abba_hint, skip_brba=args.skip_brba,
            count_abba_bits=args.count_abba_bits,
            legacy_cool=args.legacy_cool, event_cap=args.event_cap,
        )
    else:
        config = _config_from(args)
    report = run(config)
    print(report.to_json())
    if args.out:
        with open(args.out, "w") as f:
            f.write(report.to_json() + "\n")
        with open(args.out + ".ndjson", "w") as f:
            f.write(report.log_ndjson() + "\n")
        with open(args.out + ".csv", "w") as f:
            f.write(CSV_HEADER + "\n" + report.metrics.csv_row(config) + "\n")
    if not all(report.checks.values()):
        return 2
    if report.reason != "ok":
        return 3
    return 0


def cmd_sweep(args) -> int:
    ns = [int(x) for x in args.n_list.split(",")]
    cells = []
    for n in ns:
        t = args.t if args.t is not None else (n - 1) // 3
        cells.append({"n": n, "t": t})
    base = _config_from(args)
    rows = sweep(base, cells, seeds=args.seeds)
    cols = ["n", "t", "mean_bits", "max_bits", "mean_ideal_bits",
            "mean_rounds", "max_rounds", "ratio", "ideal_ratio", "ok"]
    print(",".join(cols))
    failed = False
    for row in rows:
        print(",".join(str(row[c]) for c in cols))
        failed = failed or not row["ok"]
    if args.out:
        with open(args.out, "w") as f:
            json.dump(rows, f, sort_keys=True, indent=1)
    return 2 if failed else 0


def cmd_scenario_list(_args) -> int:
    for name, builder in sorted(SCENARIOS.items()):
        doc = (builder.__doc__ or "").strip().splitlines()[0]
        print(f"{name}: {doc}")
    return 0


def cmd_accept(args) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(quick=args.quick, workers=args.workers)
    failed = False
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name}: {detail}")
        failed = failed or not ok
    return 2 if failed else 0


def main(argv=None) -> int:
    parser = _Parser(prog="acool", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation", parents=[])
    _add_common(p_run)
    p_run.add_argument("--scenario", choices=sorted(SCENARIOS),
                       default=_env("scenario", None))
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--n-list", default=_env("n_list", "4,7,13"),
                         help="comma-separated node counts")
    p_sweep.add_argument("--seeds", type=int, default=int(_env("seeds", 3)))
    p_sweep.set_defaults(func=cmd_sweep)

    p_list = sub.add_parser("scenario-list", help="list canned scenarios")
    p_list.set_defaults(func=cmd_scenario_list)

    p_acc = sub.add_parser("accept", help="run the acceptance suite")
    p_acc.add_argument("--quick", action="store_true",
                       default=_env_flag("quick"))
    p_acc.add_argument("--workers", type=int,
                       default=int(_env("workers", os.cpu_count() or 1)))
    p_acc.set_defaults(func=cmd_accept)

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    try:
        return args.func(args)
    except (ResilienceViolation, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
