"""Command-line runner: ``qdynlab <experiment> [--config FILE] [--key value ...]``.

Settings come from built-in defaults, then a flat ``key = value`` config file,
then command-line flags.  Each run writes one CSV per table and a JSON
summary into the output directory (``--out-dir``, the ``out_dir`` config key,
``$QDYNLAB_OUTPUT_DIR`` or ``./qdynlab-output``, in that order).

Exit status: 0 success, 1 invalid configuration, 2 numerical failure or a
failed check.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import json
import math
import os
import platform
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__
from .errors import QDynError
from .experiments import EXPERIMENTS, ExperimentResult

SCHEMA_VERSION = 1
OUTPUT_ENV = "QDYNLAB_OUTPUT_DIR"
DEFAULT_OUTPUT = "qdynlab-output"

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- settings schema


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


@dataclass(frozen=True)
class Setting:
    name: str
    kind: Callable[[str], Any]
    default: Any
    check: Callable[[Any], bool] = lambda v: True
    rule: str = ""
    choices: tuple[str, ...] = ()

    def parse(self, raw) -> Any:
        try:
            value = self.kind(raw) if isinstance(raw, str) else raw
        except (TypeError, ValueError):
            raise ConfigError(f"{self.name}: cannot parse {raw!r}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{self.name}: must be finite")
        if self.choices and value not in self.choices:
            raise ConfigError(f"{self.name}: must be one of {', '.join(self.choices)}")
        if not self.check(value):
            raise ConfigError(f"{self.name}: {self.rule} (got {value!r})")
        return value


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _choice(name, default, *choices):
    return Setting(name, str, default, choices=choices)


_MASER = [
    Setting("eps", float, 1.0, _pos, "must be > 0"),
    Setting("lam", float, 0.2),
    Setting("tau", float, 1.0, _pos, "must be > 0"),
    Setting("p", float, 0.5, lambda v: 0 <= v <= 1, "must lie in [0, 1]"),
    Setting("sigma", float, 0.0, _nonneg, "must be >= 0"),
    Setting("cutoff", int, 40, lambda v: v >= 1, "must be >= 1"),
    Setting("atom_energy", float, 1.0, _pos, "must be > 0"),
    _choice("initial", "vacuum", "vacuum", "gibbs", "fock"),
    Setting("beta", float, 1.0, _pos, "must be > 0"),
    Setting("fock_level", int, 0, _nonneg, "must be >= 0"),
]

_CHAIN = [
    Setting("coupling", float, 1.0),
    Setting("dephasing", float, 0.1, _nonneg, "must be >= 0"),
    Setting("damping", float, 0.05, _nonneg, "must be >= 0"),
    Setting("mu", float, 1.0, _pos, "must be > 0"),
    Setting("eps_f", float, 1.0, _pos, "must be > 0"),
    Setting("tol", float, 1e-9, _pos, "must be > 0"),
]


def _override(settings, **defaults):
    out = []
    for s in settings:
        if s.name in defaults:
            s = Setting(s.name, s.kind, defaults[s.name], s.check, s.rule, s.choices)
        out.append(s)
    return out


SCHEMA: dict[str, list[Setting]] = {
    "lr-scan": _CHAIN + [
        Setting("sites", int, 6, lambda v: 2 <= v <= 10, "must lie in 2..10"),
        Setting("t_max", float, 2.0, _pos, "must be > 0"),
        Setting("points", int, 100, lambda v: v >= 2, "must be >= 2"),
        Setting("modulation", float, 0.0, lambda v: abs(v) < 1, "must satisfy |m| < 1"),
        _choice("kind", "both", "both", "commutator", "lindblad"),
    ],
    "euler-convergence": [
        Setting("sites", int, 2, lambda v: 1 <= v <= 3, "must lie in 1..3"),
        Setting("t", float, 1.0, _pos, "must be > 0"),
        Setting("n", _int_list, [8, 16, 32, 64, 128], lambda v: len(v) >= 1 and all(x >= 1 for x in v),
                "must be a comma list of positive integers"),
        Setting("jumps", int, 1, _nonneg, "must be >= 0"),
        Setting("seed", int, 0, _nonneg, "must be >= 0"),
        Setting("tol", float, 1e-12, _pos, "must be > 0"),
    ],
    "cp-certify": [
        Setting("trials", int, 50, _nonneg, "must be >= 0"),
        Setting("cocycles", int, 8, _nonneg, "must be >= 0"),
        Setting("max_sites", int, 4, lambda v: 1 <= v <= 4, "must lie in 1..4"),
        Setting("t_max", float, 1.0, _pos, "must be > 0"),
        Setting("seed", int, 0, _nonneg, "must be >= 0"),
        Setting("tol", float, 1e-9, _pos, "must be > 0"),
    ],
    "thermo-limit": _override(_CHAIN, damping=0.0) + [
        Setting("sizes", _int_list, [3, 5, 7, 9],
                lambda v: len(v) >= 2 and all(x % 2 == 1 for x in v) and v == sorted(set(v)) and v[-1] <= 11,
                "must be increasing odd sizes up to 11"),
        Setting("t", float, 0.5, _pos, "must be > 0"),
        _choice("observable", "z", "x", "y", "z"),
    ],
    "maser-photons": _MASER + [
        Setting("n", int, 50, _nonneg, "must be >= 0"),
        Setting("tol", float, 1e-6, _pos, "must be > 0"),
    ],
    "maser-state": _override(_MASER, lam=0.3, sigma=0.4, cutoff=30) + [
        Setting("n", int, 25, _nonneg, "must be >= 0"),
        Setting("alphas", int, 20, lambda v: v >= 1, "must be >= 1"),
        Setting("alpha_radius", float, 1.0, _pos, "must be > 0"),
        Setting("seed", int, 0, _nonneg, "must be >= 0"),
        Setting("tol", float, 1e-5, _pos, "must be > 0"),
        Setting("limit_tol", float, 1e-6, _pos, "must be > 0"),
        Setting("quasifree_radius", float, 2.0, _pos, "must be > 0"),
        Setting("quasifree_points", int, 9, lambda v: v >= 3, "must be >= 3"),
    ],
    "maser-energy": _override(_MASER, lam=0.3, cutoff=15, p=0.3) + [
        Setting("n", int, 3, lambda v: v >= 1, "must be >= 1"),
        Setting("oracle_atoms", int, 2, lambda v: 1 <= v <= 4, "must lie in 1..4"),
        Setting("tol", float, 1e-7, _pos, "must be > 0"),
    ],
    "maser-entropy": _override(_MASER, cutoff=15, p=0.3, initial="gibbs") + [
        Setting("n", int, 2, _nonneg, "must be >= 0"),
        Setting("oracle_atoms", int, 2, lambda v: 1 <= v <= 4, "must lie in 1..4"),
        Setting("tol", float, 1e-6, _pos, "must be > 0"),
    ],
}

assert set(SCHEMA) == set(EXPERIMENTS)


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, hyphens and underscores are interchangeable."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file: {exc}") from None
    return {k.replace("-", "_"): v for k, v in parser["config"].items()}


def resolve_config(experiment: str, file_values: dict[str, str], cli_values: dict[str, Any]) -> dict:
    """Merge defaults, file and command-line values and validate every key."""
    settings = {s.name: s for s in SCHEMA[experiment]}
    merged = dict(file_values)
    merged.update({k: v for k, v in cli_values.items() if v is not None})
    unknown = set(merged) - set(settings) - {"out_dir", "experiment"}
    if unknown:
        raise ConfigError(f"unknown settings for {experiment}: {', '.join(sorted(unknown))}")
    if merged.get("experiment", experiment) != experiment:
        raise ConfigError(f"config file is for {merged['experiment']!r}, not {experiment!r}")
    out = {name: s.parse(merged[name]) if name in merged else s.default for name, s in settings.items()}
    if "out_dir" in merged:
        out["out_dir"] = merged["out_dir"]
    return out


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, table, stamp: str) -> None:
    with path.open("w", newline="") as fh:
        fh.write(f"# generated {stamp}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def versions() -> dict[str, str]:
    return {
        "qdynlab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_outputs(experiment: str, cfg: dict, result: ExperimentResult, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    files = []
    for name, table in result.tables.items():
        path = out_dir / f"{experiment}_{name}.csv"
        write_csv(path, table, stamp)
        files.append(path.name)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "generated": stamp,
        "config": {k: _jsonable(v) for k, v in cfg.items() if k != "out_dir"},
        "versions": versions(),
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in result.checks],
        "passed": result.passed,
        "values": {k: _jsonable(v) for k, v in result.values.items()},
        "files": files,
    }
    (out_dir / f"{experiment}_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdynlab", description="Open-quantum-dynamics experiments.")
    parser.add_argument("--version", action="version", version=f"qdynlab {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name, settings in SCHEMA.items():
        doc = (EXPERIMENTS[name].__doc__ or "").strip().splitlines()
        p = sub.add_parser(name, help=doc[0] if doc else None)
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--out-dir", dest="out_dir", help=f"output directory (default ${OUTPUT_ENV})")
        for s in settings:
            p.add_argument(
                "--" + s.name.replace("_", "-"), dest=s.name, default=None, metavar="VALUE",
                help=f"default {s.default!r}" + (f"; one of {', '.join(s.choices)}" if s.choices else ""),
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    experiment = args.experiment
    cli_values = {k: v for k, v in vars(args).items() if k not in ("experiment", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(experiment, file_values, cli_values)
    except ConfigError as exc:
        print(f"qdynlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out_dir = Path(cfg.get("out_dir") or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
    try:
        result = EXPERIMENTS[experiment](cfg)
    except QDynError as exc:
        print(f"qdynlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except ValueError as exc:
        print(f"qdynlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    write_outputs(experiment, cfg, result, out_dir)
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else ""))
    return EXIT_OK if result.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
