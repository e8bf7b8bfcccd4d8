"""Command-line entry point: sample, density and verify.

Exit codes: 0 success, 1 verification failure, 2 usage error.

Settings are resolved as command-line flags, then the config file given
with ``--config``, then the ``BESSEL_SUBORDINATE_SEED`` environment
variable (seed only), then built-in defaults.  The config file is flat
``key = value`` text; ``#`` starts a comment and keys match the long flag
names with dashes or underscores.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import os
import platform
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
import scipy

from . import __version__
from . import suites as su
from .errors import BesselSubordinateError
from .registry import LAWS, law
from .samplers import ProcessSpec, sample

SCHEMA_VERSION = "1.0"
DEFAULT_SEED = 20261016
SEED_ENV = "BESSEL_SUBORDINATE_SEED"
PARAM_KEYS = ("gamma", "mu", "nu", "n", "t", "x")

# sampler kind for each law; the pushforward laws are transforms of R(T_t)
SAMPLED = {
    "bessel_transition": "BesselAtT",
    "iterated_bessel": "IteratedBessel",
    "jr": "JRSquaredClock",
    "bessel_at_fpt": "BesselAtFPT",
    "hat_r": "BesselAtFPT",
    "beta_arcsin": "BesselAtFPT",
    "inverse_bessel_at_fpt": "BesselAtFPT",
    "inverted_composition": "TRgamma",
    "stable_ratio": "StableRatio",
    "fpt": "FPT",
    "drifted_fpt": "DriftedFPT",
    "drifted_composite": "BesselAtDriftedFPT",
    "iterated_fpt": "IteratedFPT",
    "cauchy_at_stable": "CauchyAtStable",
    "stable": "StableSubordinator",
    "cauchy": "Cauchy",
    "hyp2": "HypDistanceH2",
    "hyp3": "HypDistanceH3",
    "hypJ2": "HypH2AtFPT",
    "hypJ3": "HypH3AtFPT",
}

DEFAULTS = dict(t=1.0, count=10_000, output="csv", convention="half", suite="all")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    law: str | None = None
    parameters: dict = field(default_factory=dict)
    grid: list | None = None
    seed: int = DEFAULT_SEED
    count: int = DEFAULTS["count"]
    output: str = "csv"
    output_path: str | None = None
    method: str | None = None
    convention: str = "half"
    suite: str = "all"


# ------------------------------------------------------------ parsing

def parse_grid(text: str) -> list[float]:
    """``min:max:step``, min included and max excluded."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must look like min:max:step, got {text!r}") from None
    if not step > 0 or not hi > lo:
        raise UsageError("grid needs step > 0 and max > min")
    ratio = (hi - lo) / step
    n = round(ratio) if abs(ratio - round(ratio)) < 1e-9 else math.ceil(ratio)
    return [lo + k * step for k in range(n)]


def parse_points(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"points must be comma separated numbers, got {text!r}") from None


def read_config(path: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[run]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in parser["run"].items()}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--law", help=f"one of {', '.join(sorted(set(LAWS) | set(SAMPLED)))}")
    for key in PARAM_KEYS:
        p.add_argument(f"--{key}", type=int if key == "n" else float)
    p.add_argument("--convention", choices=("half", "whole"), help="hyperbolic time scaling")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", choices=("csv", "json"))
    p.add_argument("--output-path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bessel-subordinate",
                                     description="Sample, evaluate and verify laws of Bessel processes at random times.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    ps = sub.add_parser("sample", help="draw a batch and write it as CSV or JSON")
    _add_common(ps)
    ps.add_argument("--count", type=int)
    pd = sub.add_parser("density", help="density and distribution function on a grid")
    _add_common(pd)
    pd.add_argument("--grid", help="min:max:step, max excluded")
    pd.add_argument("--points", help="comma separated evaluation points")
    pd.add_argument("--method", choices=("fox", "quadrature"), help="route for the iterated Bessel density")
    pv = sub.add_parser("verify", help="run a verification suite and write a JSON report")
    _add_common(pv)
    pv.add_argument("--suite", choices=sorted(su.SUITES) + ["all"])
    return parser


def _convert(key, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in ("seed", "count", "n"):
            return int(value)
        if key in ("gamma", "mu", "nu", "t", "x"):
            return float(value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None
    return value


def resolve(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    """Merge flags over the config file over the environment over defaults."""
    merged = dict(DEFAULTS)
    if environ.get(SEED_ENV):
        merged["seed"] = environ[SEED_ENV]
    if args.config:
        merged.update(read_config(args.config))
    merged.update({k: v for k, v in vars(args).items() if v is not None})
    merged = {k: _convert(k, v) for k, v in merged.items()}

    seed = merged.get("seed", DEFAULT_SEED)
    if not 0 <= seed < 2 ** 64:
        raise UsageError("seed must lie in [0, 2^64)")
    grid = None
    if merged.get("grid") is not None:
        grid = parse_grid(merged["grid"])
    elif merged.get("points") is not None:
        grid = parse_points(merged["points"])
    params = {k: merged[k] for k in PARAM_KEYS if merged.get(k) is not None}
    cfg = RunConfig(command=args.command, law=merged.get("law"), parameters=params, grid=grid, seed=seed,
                    count=merged["count"], output=merged["output"], output_path=merged.get("output_path"),
                    method=merged.get("method"), convention=merged["convention"], suite=merged["suite"])
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.output not in ("csv", "json"):
        raise UsageError("output must be csv or json")
    if cfg.command == "sample":
        if cfg.law not in SAMPLED:
            raise UsageError(f"no sampler for law {cfg.law!r}")
        if not cfg.count > 0:
            raise UsageError("count must be positive")
        if cfg.law == "bessel_transition" and cfg.parameters.get("x", 0.0) != 0.0:
            raise UsageError("the Bessel sampler starts at the origin; drop --x")
        _process_spec(cfg)
    elif cfg.command == "density":
        if cfg.law not in LAWS:
            raise UsageError(f"no density for law {cfg.law!r}")
        if not cfg.grid:
            raise UsageError("density needs --grid or --points")
        if cfg.method and cfg.law != "iterated_bessel":
            raise UsageError("--method applies to the iterated_bessel law only")
    elif cfg.command == "verify":
        if cfg.suite != "all" and cfg.suite not in su.SUITES:
            raise UsageError(f"unknown suite {cfg.suite!r}")
        if cfg.law is not None and cfg.suite not in ("pde", "all"):
            raise UsageError("--law narrows the pde suite only")


def _process_spec(cfg: RunConfig) -> ProcessSpec:
    p = cfg.parameters
    try:
        return ProcessSpec(SAMPLED[cfg.law], t=p.get("t", 1.0), gamma=p.get("gamma"), mu=p.get("mu", 0.0),
                           nu=p.get("nu"), depth=p.get("n", 1), convention=cfg.convention)
    except BesselSubordinateError as exc:
        raise UsageError(str(exc)) from None


def _law(cfg: RunConfig):
    params = dict(cfg.parameters)
    if cfg.law == "iterated_bessel" and cfg.method:
        params["method"] = cfg.method
    if cfg.law in ("hyp2", "hyp3", "hypJ2", "hypJ3"):
        params["convention"] = cfg.convention
    try:
        return law(cfg.law, **params)
    except BesselSubordinateError as exc:
        raise UsageError(str(exc)) from None


# ------------------------------------------------------------ output

def write_atomic(path: str, text: str):
    """Write through a temporary file in the same directory, then rename."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.splitext(path)[1])
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(v) -> str:
    return format(float(v), ".17g")


def jsonable(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _pushforward(law_id: str, t: float):
    return {"hat_r": lambda r: 1 / (1 + r),
            "beta_arcsin": lambda r: t ** 3 / (t * t + r * r),
            "inverse_bessel_at_fpt": lambda r: 1 / r}.get(law_id)


# ------------------------------------------------------------ commands

def cmd_sample(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    spec = _process_spec(cfg)
    values = sample(spec, cfg.count, cfg.seed).values
    transform = _pushforward(cfg.law, spec.t)
    if transform is not None:
        values = transform(values)
    path = cfg.output_path or f"{cfg.law}_sample.{cfg.output}"
    if cfg.output == "csv":
        text = "value\n" + "".join(fmt(v) + "\n" for v in values)
    else:
        text = json.dumps([jsonable(v) for v in values]) + "\n"
    write_atomic(path, text)
    q = np.quantile(values, [0.05, 0.5, 0.95])
    print(f"{cfg.law}: {len(values)} draws -> {path}", file=out)
    print(f"mean {np.mean(values):.6g}  q05 {q[0]:.6g}  median {q[1]:.6g}  q95 {q[2]:.6g}", file=out)
    return 0


def density_rows(cfg: RunConfig) -> list[dict]:
    f = _law(cfg)
    lo, hi = f.support
    rows = []
    for x in cfg.grid:
        inside = lo < x < hi
        try:
            dens, cdf = f.pdf(x), f.cdf(x)
        except BesselSubordinateError:
            dens, cdf, inside = math.nan, math.nan, False
        rows.append(dict(point=x, density=float(dens), cdf=float(cdf), in_support=bool(inside)))
    return rows


def cmd_density(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    rows = density_rows(cfg)
    path = cfg.output_path or f"{cfg.law}_density.{cfg.output}"
    if cfg.output == "csv":
        buf = io.StringIO()
        buf.write("point,density,cdf,in_support\n")
        for r in rows:
            buf.write(f"{fmt(r['point'])},{fmt(r['density'])},{fmt(r['cdf'])},{int(r['in_support'])}\n")
        text = buf.getvalue()
    else:
        text = json.dumps(jsonable(rows), indent=1) + "\n"
    write_atomic(path, text)
    flagged = sum(not r["in_support"] for r in rows)
    print(f"{cfg.law}: {len(rows)} rows -> {path}" + (f" ({flagged} outside the support)" if flagged else ""),
          file=out)
    return 0


def build_report(suite: str, records, seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "suite": suite,
        "records": [jsonable(dict(check_id=r.name, anchor=r.identity, value=r.value, reference=r.reference,
                                  tolerance=r.tolerance, passed=r.passed, informational=r.informational,
                                  detail=r.detail)) for r in records],
        "summary": su.summarize(records),
        "environment": dict(version=__version__, seed=seed, timestamp=datetime.now(timezone.utc).isoformat(),
                            python=platform.python_version(), numpy=np.__version__, scipy=scipy.__version__),
    }


def cmd_verify(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        records = su.run_suite(cfg.suite, cfg.seed, cfg.law, cfg.parameters.get("gamma"))
    except BesselSubordinateError as exc:
        raise UsageError(str(exc)) from None
    report = build_report(cfg.suite, records, cfg.seed)
    path = cfg.output_path or f"report_{cfg.suite}.json"
    write_atomic(path, json.dumps(report, indent=1) + "\n")
    for r in records:
        status = "info" if r.informational else ("PASS" if r.passed else "FAIL")
        print(f"{status:4s} {r.name}: {r.identity}", file=out)
    s = report["summary"]
    print(f"{s['passed']}/{s['counted']} passed, {s['informational']} informational -> {path}", file=out)
    return 0 if s["failed"] == 0 else 1


COMMANDS = {"sample": cmd_sample, "density": cmd_density, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
