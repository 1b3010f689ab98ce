"""
Experiment runner: sweep (scheme x alpha x SNR), fit DoF slopes, write
CSV or JSON-lines.

Configuration precedence, highest first: command-line flags, environment
variables ``MISOBC_<FIELD>`` (e.g. ``MISOBC_TRIALS=200``), a JSON config
file given by ``--config``, built-in defaults.

Exit codes: 0 success, 1 I/O failure, 2 usage error.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

from .analysis import fit_dof, outer_bound_sum
from .channel import SimParams, stream
from .schemes import COMMON_NOISE_MODELS, run_scheme

log = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "ResultRow", "ConfigError", "HEADER", "parse_config",
           "run_sweep", "emit", "format_rows", "main"]

ALL_SCHEMES = ("zf", "mat", "kobayashi", "optimal", "outer_bound")
# stream keys; changing these changes every published number
SCHEME_CODES = {"zf": 0, "mat": 1, "kobayashi": 2, "optimal": 3}
FORMATS = ("csv", "jsonl")
ENV_PREFIX = "MISOBC_"

HEADER = ("scheme,alpha,p_db,trials,rate_user1,rate_user2,sum_rate,duration,"
          "overflow_count,degenerate_count,fitted_dof")
FIELDS = tuple(HEADER.split(","))


class ConfigError(ValueError):
    pass


def _default_alpha_grid():
    return [round(0.1 * i, 12) for i in range(11)]


@dataclass
class ExperimentConfig:
    schemes: list = field(default_factory=lambda: list(ALL_SCHEMES))
    alpha_grid: list = field(default_factory=_default_alpha_grid)
    p_grid_db: list = field(default_factory=lambda: [40.0, 50.0, 60.0, 70.0])
    trials: int = 2000
    seed: int = 42
    epsilon: float = 0.05
    zeta: float = 0.01
    out_path: str = None
    format: str = "csv"
    threads: int = 1
    common_noise_model: str = "printed"

    def validate(self):
        if not self.schemes or not self.alpha_grid or not self.p_grid_db:
            raise ConfigError("schemes, alpha grid and SNR grid must be non-empty")
        bad = [s for s in self.schemes if s not in ALL_SCHEMES]
        if bad:
            raise ConfigError(f"unknown scheme(s): {', '.join(bad)}")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha_grid):
            raise ConfigError("alpha values must lie in [0, 1]")
        if len(set(self.p_grid_db)) != len(self.p_grid_db):
            raise ConfigError("duplicate SNR values")
        if any(10.0 ** (p / 10.0) <= 1.0 for p in self.p_grid_db):
            raise ConfigError("SNR values must be positive dB (P > 1)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not self.epsilon > 0 or not self.zeta > 0:
            raise ConfigError("epsilon and zeta must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.common_noise_model not in COMMON_NOISE_MODELS:
            raise ConfigError(f"common noise model must be one of {COMMON_NOISE_MODELS}")
        return self


@dataclass
class ResultRow:
    scheme: str
    alpha: float
    p_db: float = None
    trials: int = None
    rate_user1: float = None
    rate_user2: float = None
    sum_rate: float = None
    duration: float = None
    overflow_count: int = None
    degenerate_count: int = None
    fitted_dof: float = None


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------
def _float_list(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _range_spec(text):
    """``start:step:end`` (inclusive) or a comma list."""
    text = str(text)
    if ":" not in text:
        return _float_list(text)
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:step:end, got {text!r}")
    start, step, end = (float(p) for p in parts)
    if step <= 0 or end < start:
        raise ValueError(f"bad range {text!r}")
    n = int(round((end - start) / step))
    return [round(start + i * step, 12) for i in range(n + 1)]


def _schemes(text):
    if isinstance(text, (list, tuple)):
        return list(text)
    return [s.strip() for s in str(text).split(",") if s.strip()]


_COERCE = {
    "schemes": _schemes,
    "alpha_grid": lambda v: [float(x) for x in v] if isinstance(v, list) else _range_spec(v),
    "p_grid_db": lambda v: [float(x) for x in v] if isinstance(v, list) else _range_spec(v),
    "trials": int,
    "seed": int,
    "epsilon": float,
    "zeta": float,
    "out_path": lambda v: None if v in (None, "", "-") else str(v),
    "format": str,
    "threads": int,
    "common_noise_model": str,
}


def _apply(cfg, values, origin):
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown {origin} key(s): {', '.join(unknown)}")
    out = {}
    for key, val in values.items():
        try:
            out[key] = _COERCE[key](val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key} from {origin}: {val!r} ({exc})") from None
    return replace(cfg, **out)


def build_parser():
    p = argparse.ArgumentParser(
        prog="misobc",
        description="Monte Carlo DoF sweep for the two-user MISO BC with mixed CSIT.")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--schemes", help="comma list of " + ",".join(ALL_SCHEMES))
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float, help="single alpha value")
    g.add_argument("--alpha-grid", help="start:step:end or comma list")
    p.add_argument("--p-db-grid", help="SNR grid in dB, start:step:end or comma list")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--zeta", type=float)
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--threads", type=int)
    p.add_argument("--common-noise-model", choices=COMMON_NOISE_MODELS)
    return p


def parse_config(argv=None, env=None):
    """
    Build an ExperimentConfig from flags, environment and config file.

    Raises ConfigError on malformed or out-of-range values; argparse itself
    exits with status 2 on unparseable flags.
    """
    args = build_parser().parse_args(argv)
    env = os.environ if env is None else env
    cfg = ExperimentConfig()

    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = _apply(cfg, data, "config file")

    env_vals = {k[len(ENV_PREFIX):].lower(): v for k, v in env.items()
                if k.startswith(ENV_PREFIX)}
    cfg = _apply(cfg, env_vals, "environment")

    flags = {
        "schemes": args.schemes,
        "alpha_grid": [args.alpha] if args.alpha is not None else args.alpha_grid,
        "p_grid_db": args.p_db_grid,
        "trials": args.trials,
        "seed": args.seed,
        "epsilon": args.epsilon,
        "zeta": args.zeta,
        "out_path": args.out,
        "format": args.format,
        "threads": args.threads,
        "common_noise_model": args.common_noise_model,
    }
    cfg = _apply(cfg, {k: v for k, v in flags.items() if v is not None}, "command line")
    return cfg.validate()


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------
def _alpha_key(alpha):
    return int(round(alpha * 1e9))


def _run_job(cfg, scheme, alpha):
    """All SNR points of one (scheme, alpha) pair plus its summary row."""
    rows, points = [], []
    for p_db in sorted(cfg.p_grid_db):
        params = SimParams.from_db(p_db, alpha, epsilon=cfg.epsilon, zeta=cfg.zeta,
                                   trials=cfg.trials, seed=cfg.seed)
        # same stream at every SNR: common random numbers across the slope fit
        rng = stream(cfg.seed, SCHEME_CODES[scheme], _alpha_key(alpha))
        res = run_scheme(scheme, params, rng, common_noise=cfg.common_noise_model)
        rows.append(ResultRow(
            scheme=scheme, alpha=alpha, p_db=p_db, trials=res.trials,
            rate_user1=res.rate_user1, rate_user2=res.rate_user2, sum_rate=res.sum_rate,
            duration=res.duration, overflow_count=res.overflow_count,
            degenerate_count=res.degenerate_count))
        points.append((params.power, res.sum_rate))
    summary = ResultRow(scheme=scheme, alpha=alpha, trials=cfg.trials)
    if len(points) >= 3:
        summary.fitted_dof = fit_dof(points).slope
    else:
        log.warning("fewer than 3 SNR points for %s at alpha=%g; no DoF fit", scheme, alpha)
    rows.append(summary)
    return rows


def run_sweep(cfg):
    """
    Run every (scheme, alpha, SNR) point of `cfg`.

    Returns rows sorted by (scheme, alpha, p_db), each (scheme, alpha)
    group followed by its summary row (blank p_db, fitted DoF filled in).
    The output does not depend on ``cfg.threads``.
    """
    cfg.validate()
    jobs = [(s, a) for s in sorted(set(cfg.schemes)) for a in sorted(set(cfg.alpha_grid))]
    mc_jobs = [j for j in jobs if j[0] != "outer_bound"]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda j: _run_job(cfg, *j), mc_jobs))
    else:
        results = [_run_job(cfg, *j) for j in mc_jobs]
    by_job = dict(zip(mc_jobs, results))
    rows = []
    for job in jobs:
        if job[0] == "outer_bound":
            rows.append(ResultRow(scheme="outer_bound", alpha=job[1],
                                  fitted_dof=outer_bound_sum(job[1])))
        else:
            rows.extend(by_job[job])
    return rows


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------
def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".6g")


def _json_value(value):
    if value is None or isinstance(value, (str, int)):
        return value
    return float(format(float(value), ".6g"))


def format_rows(rows, fmt="csv"):
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        buf.write(HEADER + "\n")
        for row in rows:
            writer.writerow([_fmt(getattr(row, k)) for k in FIELDS])
    elif fmt == "jsonl":
        for row in rows:
            buf.write(json.dumps({k: _json_value(getattr(row, k)) for k in FIELDS}) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def emit(rows, fmt, path=None):
    """Write rows to `path` (stdout when None). Raises OSError on I/O failure."""
    text = format_rows(rows, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"misobc: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    rows = run_sweep(cfg)
    try:
        emit(rows, cfg.format, cfg.out_path)
    except OSError as exc:
        print(f"misobc: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0
