"""Command-line front end: ``rsvessel run <scenario>`` and ``rsvessel list-checks``."""

from __future__ import annotations

import argparse
import json
import sys

from .checks import catalog_entries
from .errors import ConfigError
from .runner import run_scenario
from .scenario import bundled_scenarios, load_scenario


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsvessel", description="Verify vessel and kernel identities on real curves.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file (path or bundled name)")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    r.add_argument("--out", default=None, help="write the JSON report here (default: stdout)")
    r.add_argument("--csv-dir", default=None, help="directory for CSV grid dumps")
    r.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance by X")
    r.add_argument("--jobs", type=int, default=1, help="worker threads for independent checks")
    lc = sub.add_parser("list-checks", help="print the verification catalog")
    lc.add_argument("--json", action="store_true")
    sub.add_parser("list-scenarios", help="print bundled scenario files")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-checks":
        entries = catalog_entries()
        if args.json:
            print(json.dumps(entries, indent=2))
        else:
            for e in entries:
                print(f"{e['name']:<24} tol={e['default_tolerance']:<8.0e} modules={','.join(e['modules'])}")
                print(f"{'':<24} anchor: {e['anchor']}")
        return 0
    if args.command == "list-scenarios":
        for p in bundled_scenarios():
            print(p.name)
        return 0
    try:
        scenario = load_scenario(args.scenario)
        report, code = run_scenario(scenario, args.seed, args.tol_scale, args.csv_dir, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    s = report["summary"]
    print(f"{report['scenario']}: {s['passed']}/{s['total']} checks passed", file=sys.stderr)
    for c in report["checks"]:
        if not c["passed"]:
            print(f"  FAIL {c['name']}: {c['error'] or ', '.join(k for k, r in c['residuals'].items() if not r['passed'])}",
                  file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
