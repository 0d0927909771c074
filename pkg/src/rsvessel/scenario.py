"""Scenario files: parsing, validation and lazy resolution of curve, functions,
model spaces, vessels and transfer functions.

Schema 1 (TOML or JSON):

    schema = 1
    name = "..."
    seed = 0                      # optional, CLI --seed overrides
    [curve]  type = "genus0" | "genus1";  tau = [re, im]   (genus 1)
    [zeta]        nu = [..], a = [..]     (genus 1; default T_0, a = 0)
    [zeta_tilde]  nu = [..], a = [..]
    [functions.<name>]  kind = rational | zeta_pair | weierstrass | constant | sum | product | moebius
    [model_space]  points = [[re, im], ...]  or  random = m (+ margin)
    [transfer]     zeros = [[re, im], ...], scale = 1.0
    [[checks]]     name = "...", tol = 1e-8 or {key = tol}, plus check parameters

Complex numbers are written as [re, im], plain numbers, or "inf".
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .kernels import KernelContext
from .meromorphic import (ConstantFn, MeromorphicFn, MoebiusFn, ProductFn, RationalFn, SumFn, WeierstrassFn,
                          ZetaPairFn)
from .model_ops import ModelSpace
from .surface import INFINITY, RealCurve, SurfacePoint, torii_point

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = 1
SCENARIO_DIR = Path(__file__).parent / "scenarios"


def bundled_scenarios() -> list[Path]:
    return sorted(p for p in SCENARIO_DIR.iterdir() if p.suffix in (".toml", ".json"))


def resolve_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    for cand in (SCENARIO_DIR / name, SCENARIO_DIR / f"{name}.toml", SCENARIO_DIR / f"{name}.json"):
        if cand.exists():
            return cand
    raise ConfigError(f"scenario file not found: {name}", "path")


def load_raw(path) -> dict:
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON parse error: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}", str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a table", "<root>")
    return data


def parse_complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError("expected a number", where)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"cannot read a complex number from {value!r}", where)


def parse_point(value, where: str) -> SurfacePoint:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return INFINITY
    return SurfacePoint(parse_complex(value, where))


@dataclass
class CheckDecl:
    name: str
    tol: object
    params: dict
    where: str


@dataclass
class Scenario:
    name: str
    seed: int
    raw: dict
    checks: list[CheckDecl]
    source: str = ""


def parse_scenario(data: dict, source: str = "") -> Scenario:
    from .checks import CATALOG

    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema {schema!r} (expected {SCHEMA_VERSION})", "schema")
    name = data.get("name", Path(source).stem if source else "scenario")
    if not isinstance(name, str):
        raise ConfigError("name must be a string", "name")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer", "seed")
    curve = data.get("curve")
    if not isinstance(curve, dict) or curve.get("type") not in ("genus0", "genus1"):
        raise ConfigError("curve.type must be 'genus0' or 'genus1'", "curve.type")
    fns = data.get("functions", {})
    if not isinstance(fns, dict):
        raise ConfigError("functions must be a table", "functions")
    _validate_functions(fns)
    checks = []
    raw_checks = data.get("checks", [])
    if not isinstance(raw_checks, list):
        raise ConfigError("checks must be an array of tables", "checks")
    for i, c in enumerate(raw_checks):
        where = f"checks[{i}]"
        if not isinstance(c, dict) or "name" not in c:
            raise ConfigError("each check needs a name", where)
        if c["name"] not in CATALOG:
            raise ConfigError(f"unknown check {c['name']!r}", where + ".name")
        tol = c.get("tol")
        if tol is not None:
            vals = tol.values() if isinstance(tol, dict) else [tol]
            if not all(isinstance(t, (int, float)) and not isinstance(t, bool) and t > 0 for t in vals):
                raise ConfigError("tolerances must be positive numbers", where + ".tol")
        params = {k: v for k, v in c.items() if k not in ("name", "tol")}
        for key in ("function",):
            if key in params and params[key] not in fns:
                raise ConfigError(f"undeclared function {params[key]!r}", f"{where}.{key}")
        for key in ("functions",):
            for nm in params.get(key, []):
                if nm not in fns:
                    raise ConfigError(f"undeclared function {nm!r}", f"{where}.{key}")
        if "expect" in params:
            for nm in params["expect"]:
                if nm not in fns:
                    raise ConfigError(f"undeclared function {nm!r}", f"{where}.expect")
        checks.append(CheckDecl(c["name"], tol, params, where))
    ms = data.get("model_space", {})
    pts = ms.get("points", [])
    parsed = [parse_point(p, f"model_space.points[{i}]") for i, p in enumerate(pts)]
    for i in range(len(parsed)):
        for j in range(i):
            if parsed[i] == parsed[j]:
                raise ConfigError("basis points must be distinct", f"model_space.points[{i}]")
    return Scenario(name, seed, data, checks, source)


def load_scenario(path) -> Scenario:
    path = resolve_path(str(path))
    return parse_scenario(load_raw(path), str(path))


_KINDS = {"rational", "zeta_pair", "weierstrass", "constant", "sum", "product", "moebius"}


def _validate_functions(fns: dict) -> None:
    seen = []
    for name, decl in fns.items():
        where = f"functions.{name}"
        if not isinstance(decl, dict) or decl.get("kind") not in _KINDS:
            raise ConfigError(f"kind must be one of {sorted(_KINDS)}", where + ".kind")
        for ref in decl.get("args", []) + ([decl["arg"]] if "arg" in decl else []):
            if ref not in seen:
                raise ConfigError(f"reference to undeclared (or later) function {ref!r}", where)
        seen.append(name)


# ----------------------------------------------------------------------
# resolved context


@dataclass(eq=False)
class ScenarioContext:
    scenario: Scenario
    curve: RealCurve = field(init=False)
    _lock: threading.RLock = field(init=False, default_factory=threading.RLock)
    _cache: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        self.raw = self.scenario.raw
        cv = self.raw["curve"]
        if cv["type"] == "genus0":
            self.curve = RealCurve.genus0()
        else:
            tau = parse_complex(cv.get("tau", [0.0, 1.0]), "curve.tau")
            try:
                self.curve = RealCurve.genus1(tau)
            except Exception as exc:
                raise ConfigError(str(exc), "curve.tau") from exc
        self.zeta = self._zeta("zeta")
        self.zeta_tilde = self._zeta("zeta_tilde") if "zeta_tilde" in self.raw else self.zeta

    def _zeta(self, key):
        if self.curve.genus == 0:
            return torii_point(self.curve)
        d = self.raw.get(key, {})
        k = self.curve.component_count
        try:
            return torii_point(self.curve, d.get("nu", [0] * (k - 1)), d.get("a", [0.0]))
        except Exception as exc:
            raise ConfigError(str(exc), key) from exc

    def _cached(self, key, build):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    def kernel_context(self, zeta=None) -> KernelContext:
        z = zeta or self.zeta_tilde
        return self._cached(("ctx", tuple(np.round(z.zeta, 14)), z.nu), lambda: KernelContext(self.curve, z))

    def function(self, name: str) -> MeromorphicFn:
        return self._cached(("fn", name), lambda: self._build_function(name))

    def _build_function(self, name: str) -> MeromorphicFn:
        decls = self.raw.get("functions", {})
        if name not in decls:
            raise ConfigError(f"undeclared function {name!r}", "functions")
        d = decls[name]
        where = f"functions.{name}"
        c = self.curve
        kind = d["kind"]
        try:
            if kind == "rational":
                num = [parse_complex(x, where + ".num") for x in d.get("num", [1.0])]
                den = [parse_complex(x, where + ".den") for x in d.get("den", [1.0])]
                return RationalFn(c, num, den)
            if kind == "zeta_pair":
                return ZetaPairFn(c, parse_complex(d["a"], where + ".a"), parse_complex(d["b"], where + ".b"),
                                  d.get("scale", 1.0), d.get("const", 0.0))
            if kind == "weierstrass":
                return WeierstrassFn(c, parse_complex(d["a"], where + ".a"), d.get("scale", 1.0), d.get("const", 0.0))
            if kind == "constant":
                return ConstantFn(c, parse_complex(d.get("value", 0.0), where + ".value"))
            if kind == "sum":
                f, g = (self.function(a) for a in d["args"])
                return SumFn(f, g)
            if kind == "product":
                f, g = (self.function(a) for a in d["args"])
                return ProductFn(f, g)
            if kind == "moebius":
                return MoebiusFn(self.function(d["arg"]), [float(x) for x in d["coeffs"]])
        except ConfigError:
            raise
        except KeyError as exc:
            raise ConfigError(f"missing field {exc.args[0]!r}", where) from exc
        except Exception as exc:
            raise ConfigError(f"{type(exc).__name__}: {exc}", where) from exc
        raise ConfigError(f"unknown kind {kind!r}", where + ".kind")

    def basis_points(self) -> list[SurfacePoint]:
        def build():
            ms = self.raw.get("model_space", {})
            if "points" in ms:
                return [parse_point(p, f"model_space.points[{i}]") for i, p in enumerate(ms["points"])]
            rng = np.random.default_rng([self.scenario.seed, 7919])
            return self.curve.sample_plus(rng, int(ms.get("random", 4)), margin=float(ms.get("margin", 0.1)))
        return self._cached(("basis",), build)

    def model_space(self, basis=None, zeta=None) -> ModelSpace:
        basis = list(basis) if basis is not None else self.basis_points()
        ctx = self.kernel_context(zeta)
        key = ("ms", id(ctx), tuple(basis))
        return self._cached(key, lambda: ModelSpace(ctx, basis))

    def vessel(self, y1, y2, basis=None, zeta=None, chart_scale=None):
        from .vessel import build_model_vessel
        ms = self.model_space(basis, zeta)
        key = ("vessel", id(ms), id(y1), id(y2), chart_scale)
        rng = np.random.default_rng([self.scenario.seed, 104729])
        return self._cached(key, lambda: build_model_vessel(ms, y1, y2, chart_scale=chart_scale, rng=rng))

    def transfer(self):
        from .transfer import BlaschkeProduct

        def build():
            d = self.raw.get("transfer")
            if d is None:
                raise ConfigError("this check needs a [transfer] table", "transfer")
            zeros = [parse_point(z, f"transfer.zeros[{i}]") for i, z in enumerate(d.get("zeros", []))]
            try:
                return BlaschkeProduct(self.curve, zeros, self.zeta, float(d.get("scale", 1.0)))
            except Exception as exc:
                raise ConfigError(str(exc), "transfer") from exc
        return self._cached(("transfer",), build)

    def environment(self) -> dict:
        from . import theta
        env = {"theta_backend": theta.BACKEND, "theta_tol": theta.DEFAULT_TOL, "theta_radius_cap": theta.RADIUS_CAP,
               "curve": self.raw["curve"]}
        with self._lock:
            conds = sorted((val.dim, float(val.cond)) for key, val in self._cache.items() if key[0] == "ms")
        env["gram_condition_numbers"] = [{"dim": d, "cond": c} for d, c in conds]
        return env
