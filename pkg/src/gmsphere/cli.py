"""Command-line driver: run verification suites and write a JSON report."""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dirac, eigen
from .grid import ResolutionError
from .matrices import ORDERING, BandCouplingError, MatrixCache
from .operators import GmParams
from .results import DEFAULT_TOLERANCES, CheckResult

SCHEMA_VERSION = 1
SUITES = ("algebra", "scan", "gamma", "casimir", "anomaly", "rotation", "boost", "eigen")
SMALL_LMAX = 12
SMALL_LMAX_FACTOR = 10.0
# floors and the boost ratio window are not loosened for small instances
_UNSCALED = {"scan.away_floor", "hermiticity.nonphysical", "eigen.not_band_limited",
             "boost.scaling"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    l_max: int = 30
    buffer_algebraic: int = 2
    buffer_exponential: int = 10
    alpha: float = 1.0
    beta: float = 0.0
    hbar: float = 1.0
    r: float = 1.0
    mu: float = 1.0
    scan_alpha: tuple = (-1.0, 3.0, 21)
    scan_beta: tuple = (-1.0, 1.0, 11)
    tolerances: dict = field(default_factory=dict)
    suites: tuple = SUITES
    report_path: str | None = None
    csv_path: str | None = None
    cache_dir: str | None = None
    cross_route_lmax: int = 12
    boost_delta: float = 1e-2
    seed: int = 0

    def validate(self) -> None:
        if self.l_max - self.buffer_algebraic < 5:
            raise ConfigError(
                f"l_max - buffer = {self.l_max - self.buffer_algebraic} < 5: interior too small"
            )
        if self.buffer_algebraic < 1:
            raise ConfigError("algebraic buffer must be at least 1")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}; choose from {list(SUITES)}")
        unknown = [k for k in self.tolerances if k not in DEFAULT_TOLERANCES]
        if unknown:
            raise ConfigError(f"unknown tolerance key(s) {unknown}")
        for name, (lo, hi, n) in (("alpha", self.scan_alpha), ("beta", self.scan_beta)):
            if int(n) < 1 or (int(n) > 1 and not hi > lo) or (int(n) == 1 and lo != hi):
                raise ConfigError(f"bad scan range for {name}: {lo}:{hi}:{n}")
        try:
            GmParams(self.alpha, self.beta, self.hbar, self.r, self.mu)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    @property
    def exp_buffer(self) -> int:
        return max(1, min(self.buffer_exponential, self.l_max - 5))

    def effective_tolerances(self) -> dict:
        tol = {}
        if self.l_max < SMALL_LMAX:
            for k, v in DEFAULT_TOLERANCES.items():
                if k not in _UNSCALED:
                    tol[k] = (v * SMALL_LMAX_FACTOR,
                              f"default x{SMALL_LMAX_FACTOR:g} (l_max < {SMALL_LMAX})")
        tol.update({k: float(v) for k, v in self.tolerances.items()})
        return tol


def _error_result(suite: str, exc: Exception) -> CheckResult:
    return CheckResult(f"{suite}.error", "suite completed", {}, math.inf, 0.0,
                       notes=f"{type(exc).__name__}: {exc}")


def _run_suite(name: str, cfg: RunConfig, ctx: dict, report: dict) -> list[CheckResult]:
    tol = ctx["tol"]
    units, alg, alg_u = ctx["units"], ctx["alg"], ctx["alg_units"]
    L, b = cfg.l_max, cfg.buffer_algebraic
    if name == "algebra":
        out = []
        choices = [(a, bb) for _, a, bb in dirac.LITERATURE]
        if (cfg.alpha, cfg.beta) not in choices:
            choices.append((cfg.alpha, cfg.beta))
        seen = set()
        for a, bb in choices:
            if (a, bb) in seen:
                continue
            seen.add((a, bb))
            p = GmParams(a, bb, cfg.hbar, cfg.r, cfg.mu)
            out += dirac.check_fundamental_algebra(p, L, b, alg=alg_u, tolerances=tol)
        out += dirac.check_secondary_algebra(L, b, alg=alg, tolerances=tol)
        out.append(dirac.check_pphi_equals_Lz(L, b, alg=alg, tolerances=tol))
        out += dirac.check_hermiticity(L, b, alg=alg, tolerances=tol)
        out.append(dirac.check_cross_route(min(cfg.cross_route_lmax, L), b, tolerances=tol))
        report["literature"] = dirac.literature_table(L, b, alg=alg)
        return out
    if name == "scan":
        (a0, a1, na), (b0, b1, nb) = cfg.scan_alpha, cfg.scan_beta
        scan = dirac.scan_compatibility((a0, a1), (b0, b1), (int(na), int(nb)), L, b,
                                        alg=alg_u)
        report["scan"] = scan.to_dict()
        ctx["scan"] = scan
        rec = {"l_max": L, "buffer": b, "alpha": [a0, a1, na], "beta": [b0, b1, nb],
               "hbar": cfg.hbar, "r": cfg.r, "mu": cfg.mu}
        return dirac.check_scan(scan, rec, tolerances=tol)
    if name == "gamma":
        rng = np.random.default_rng(cfg.seed)
        (a0, a1, _), (b0, b1, _) = cfg.scan_alpha, cfg.scan_beta
        pairs = [(cfg.alpha, cfg.beta)]
        pairs += [(float(rng.uniform(a0, a1)), float(rng.uniform(b0, b1))) for _ in range(10)]
        return [dirac.check_gamma(a, bb, L, b, alg=alg_u, tolerances=tol) for a, bb in pairs]
    if name == "casimir":
        out = dirac.check_casimirs(L, b, alg=alg, tolerances=tol)
        c1 = out[-1].values
        report["reference_values"] = [{
            "quantity": "C1 = L^2 - p^2 in units of hbar^2",
            "measured": c1["measured"][0],
            "independent": c1["oracle"],
            "published": c1["published"],
            "agrees_with_published": c1["published_agrees"],
            "is_scalar": c1["off_scalar"] <= out[-1].tolerance,
        }]
        return out
    if name == "anomaly":
        return dirac.check_ptheta_anomaly(params=units, tolerances=tol)
    if name == "rotation":
        return dirac.check_rotation_conjugation(L, b, alg=alg, tolerances=tol)
    if name == "boost":
        d = cfg.boost_delta
        return [dirac.check_boost_composition(d, d, L, cfg.exp_buffer, alg=alg, tolerances=tol)]
    if name == "eigen":
        return eigen.check_eigen(seed=cfg.seed, tolerances=tol)
    raise ConfigError(f"unknown suite {name}")


def run(cfg: RunConfig) -> dict:
    """Run the selected suites in canonical order; return the report object."""
    cfg.validate()
    cache = MatrixCache(cfg.cache_dir) if cfg.cache_dir else None
    units = GmParams(cfg.alpha, cfg.beta, cfg.hbar, cfg.r, cfg.mu)
    alg = dirac.Algebra(cfg.l_max, GmParams(), cache=cache)
    same_units = (cfg.hbar, cfg.r, cfg.mu) == (1.0, 1.0, 1.0)
    alg_units = alg if same_units else dirac.Algebra(cfg.l_max, units, cache=cache)
    ctx = {"tol": cfg.effective_tolerances(), "units": units, "alg": alg, "alg_units": alg_units}
    config = asdict(cfg)
    config["exp_buffer_effective"] = cfg.exp_buffer
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "basis_ordering": ORDERING,
        "suites": [s for s in SUITES if s in cfg.suites],
    }
    checks, timing = [], {}
    start = time.perf_counter()
    for name in report["suites"]:
        t0 = time.perf_counter()
        try:
            checks += _run_suite(name, cfg, ctx, report)
        except (ResolutionError, BandCouplingError, ValueError, OverflowError) as e:
            checks.append(_error_result(name, e))
        timing[name] = time.perf_counter() - t0
    timing["total"] = time.perf_counter() - start
    report["checks"] = [c.to_dict() for c in checks]
    report["passed"] = all(c.passed for c in checks)
    report["timing"] = timing
    if cfg.csv_path and "scan" in ctx:
        write_scan_csv(cfg.csv_path, ctx["scan"])
    if cfg.report_path:
        write_report(cfg.report_path, report)
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_report(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2, allow_nan=False)
        fh.write("\n")


def write_scan_csv(path, scan: dirac.ScanResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "beta", "R1", "R2"])
        for a, b, r1, r2 in scan.rows():
            w.writerow([repr(a), repr(b), repr(r1), repr(r2)])


def _range(text: str) -> tuple:
    try:
        a, b, n = text.split(":")
        return float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from None


def _tol(text: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected check=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value in {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gmsphere",
        description="Verify the geometric-momentum operator algebra on the 2-sphere.",
    )
    p.add_argument("--lmax", type=int, default=30, help="truncation degree (default 30)")
    p.add_argument("--buffer", type=int, default=2, help="algebraic buffer bands (default 2)")
    p.add_argument("--buffer-exp", type=int, default=10,
                   help="buffer for matrix exponentials (default 10, capped at lmax-5)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--r", type=float, default=1.0, help="sphere radius")
    p.add_argument("--mu", type=float, default=1.0, help="particle mass")
    p.add_argument("--suite", action="append", choices=SUITES,
                   help="suite to run; repeatable (default: all)")
    p.add_argument("--scan-alpha", type=_range, default=(-1.0, 3.0, 21), metavar="A:B:N")
    p.add_argument("--scan-beta", type=_range, default=(-1.0, 1.0, 11), metavar="A:B:N")
    p.add_argument("--tol", type=_tol, action="append", default=[], metavar="CHECK=VALUE",
                   help="override a tolerance; repeatable")
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    p.add_argument("--csv", metavar="PATH", help="write the scan surface as CSV")
    p.add_argument("--cache", metavar="DIR", help="matrix cache directory")
    p.add_argument("--cross-lmax", type=int, default=12,
                   help="truncation for the nested-application cross check (default 12)")
    p.add_argument("--seed", type=int, default=0, help="seed for random parameter draws")
    p.add_argument("-q", "--quiet", action="store_true", help="only print the summary line")
    return p


def _check_writable(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise ConfigError(f"cannot write {path}")
    if os.path.isdir(path):
        raise ConfigError(f"{path} is a directory")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        l_max=args.lmax, buffer_algebraic=args.buffer, buffer_exponential=args.buffer_exp,
        alpha=args.alpha, beta=args.beta, hbar=args.hbar, r=args.r, mu=args.mu,
        scan_alpha=args.scan_alpha, scan_beta=args.scan_beta, tolerances=dict(args.tol),
        suites=tuple(args.suite) if args.suite else SUITES, report_path=args.report,
        csv_path=args.csv, cache_dir=args.cache, cross_route_lmax=args.cross_lmax,
        seed=args.seed,
    )
    try:
        cfg.validate()
        for path in (args.report, args.csv):
            if path:
                _check_writable(path)
        report = run(cfg)
    except ConfigError as e:
        print(f"gmsphere: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"gmsphere: error: {e}", file=sys.stderr)
        return 2
    if not args.quiet:
        for c in report["checks"]:
            flag = "PASS" if c["passed"] else "FAIL"
            op = "<=" if c["sense"] == "max" else ">"
            print(f"{flag}  {c['name']:<26} {c['residual']:.3e} {op} {c['tolerance']:.1e}")
    n_fail = sum(not c["passed"] for c in report["checks"])
    print(f"{len(report['checks']) - n_fail}/{len(report['checks'])} checks passed "
          f"in {report['timing']['total']:.1f} s")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
