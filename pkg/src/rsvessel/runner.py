"""Execute a scenario's checks and assemble the JSON report."""

from __future__ import annotations

import csv
import datetime as _dt
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .checks import CATALOG, Outcome, _jsonable, tolerance_for
from .errors import ConfigError
from .scenario import Scenario, ScenarioContext

REPORT_SCHEMA = 1


def _clean(x):
    """JSON-safe floats (non-finite values become strings)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    x = _jsonable(x)
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, (list, dict)):
        return _clean(x)
    return x


def run_check(sc: ScenarioContext, index: int, decl, seed: int, tol_scale: float):
    spec = CATALOG[decl.name]
    rng = np.random.default_rng([seed, index])
    t0 = time.perf_counter()
    entry = {"name": decl.name, "index": index}
    csv_rows = None
    try:
        out: Outcome = spec.func(sc, decl.params, rng)
        results, passed = {}, True
        for key in sorted(out.residuals):
            val = out.residuals[key]
            tol = tolerance_for(spec, key, decl.tol) * tol_scale
            ok = bool(np.isfinite(val) and val <= tol)
            passed &= ok
            results[key] = {"residual": val, "tolerance": tol, "passed": ok}
        entry.update(passed=passed, residuals=results, error=None)
        failing = [k for k, r in results.items() if not r["passed"]]
        entry["witness"] = {k: (out.witness or {}).get(k, out.witness) for k in failing} if failing else None
        entry["info"] = out.info
        csv_rows = out.csv_rows
    except ConfigError:
        raise
    except Exception as exc:  # a failing check is recorded, not raised
        entry.update(passed=False, residuals={}, error=f"{type(exc).__name__}: {exc}",
                     witness={"params": decl.params}, info={})
    return entry, time.perf_counter() - t0, csv_rows


def run_scenario(scenario: Scenario, seed: int | None = None, tol_scale: float = 1.0,
                 csv_dir: str | None = None, jobs: int = 1) -> tuple[dict, int]:
    if not tol_scale > 0:
        raise ConfigError("tol-scale must be positive", "--tol-scale")
    seed = scenario.seed if seed is None else seed
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    sc = ScenarioContext(scenario)
    decls = list(enumerate(scenario.checks))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: run_check(sc, p[0], p[1], seed, tol_scale), decls))
    else:
        results = [run_check(sc, i, d, seed, tol_scale) for i, d in decls]
    checks, timing = [], {}
    for (entry, wall, rows), (i, decl) in zip(results, decls):
        checks.append(entry)
        timing[f"{i}:{decl.name}"] = wall
        if csv_dir and rows:
            os.makedirs(csv_dir, exist_ok=True)
            with open(os.path.join(csv_dir, f"{scenario.name}_{i}_{decl.name}.csv"), "w", newline="") as fh:
                csv.writer(fh).writerows(rows)
    n_pass = sum(1 for c in checks if c["passed"])
    report = {
        "schema": REPORT_SCHEMA,
        "scenario": scenario.name,
        "source": os.path.basename(scenario.source),
        "version": __version__,
        "seed": seed,
        "tol_scale": tol_scale,
        "environment": sc.environment(),
        "checks": checks,
        "summary": {"total": len(checks), "passed": n_pass, "failed": len(checks) - n_pass},
        "timestamps": {"started": started, "finished": _dt.datetime.now(_dt.timezone.utc).isoformat()},
        "timing": timing,
    }
    return _clean(report), (0 if n_pass == len(checks) else 1)


def payload(report: dict) -> dict:
    """The report without its nondeterministic fields (timestamps, wall times)."""
    return {k: v for k, v in report.items() if k not in ("timestamps", "timing")}
