"""Command-line runner: ``wenolab <experiment> [options]``.

Results go to ``<out>/<experiment>-<timestamp>/``: one CSV per table plus
``manifest.yaml`` with the full configuration, versions and wall time.  The
directory is assembled under a temporary name and only renamed into place
once the run succeeded, so failed runs leave nothing behind.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical
failures (inadmissible states, eigensolver or stencil breakdown).
"""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import os
import platform
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import scipy
import yaml

import wenolab
from wenolab.analysis import EigenSolverError
from wenolab.experiments import EXPERIMENTS, ConfigError, Report, merged_config
from wenolab.quadtree2d import StencilError
from wenolab.systems import InadmissibleStateError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (InadmissibleStateError, EigenSolverError, StencilError, FloatingPointError,
                    np.linalg.LinAlgError)

log = logging.getLogger("wenolab")


def _parse_value(text: str):
    return yaml.safe_load(text)


def _parse_sets(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v)
    return out


def load_config_file(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    except yaml.YAMLError as err:
        raise ConfigError(f"config file {path} is not valid YAML: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wenolab", description=__doc__.splitlines()[0])
    p.add_argument("--list", action="store_true", help="list the available experiments")
    p.add_argument("--version", action="version", version=f"wenolab {wenolab.__version__}")
    sub = p.add_subparsers(dest="experiment")

    def common(sp):
        sp.add_argument("--config", help="YAML file with experiment options")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one option (YAML value syntax), repeatable")
        sp.add_argument("--seed", type=int, help="seed for randomised grids")
        sp.add_argument("--out", default="runs", help="root output directory (default: runs)")
        sp.add_argument("-v", "--verbose", action="store_true")

    for name, exp in EXPERIMENTS.items():
        common(sub.add_parser(name, help=exp.description, description=exp.description))
    common(sub.add_parser("run", help="run the experiment named in --config"))
    return p


def resolve_config(args) -> tuple[str, dict]:
    file_cfg = load_config_file(args.config) if args.config else {}
    name = args.experiment
    if name == "run":
        name = file_cfg.get("experiment")
        if name is None:
            raise ConfigError("'run' needs a config file with an 'experiment' field")
    elif file_cfg.get("experiment", name) != name:
        raise ConfigError(f"config file is for {file_cfg['experiment']!r}, not {name!r}")
    overrides = {k: v for k, v in file_cfg.items() if k != "experiment"}
    overrides.update(_parse_sets(args.set))
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = merged_config(name, overrides)
    cfg.setdefault("seed", 0)
    return name, cfg


def versions() -> dict:
    return {
        "wenolab": wenolab.__version__,
        "backend": wenolab.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def write_report(report: Report, cfg: dict, out_root: str | os.PathLike, wall_time: float,
                 started: dt.datetime) -> Path:
    """Write CSVs and the manifest atomically into a fresh run directory."""
    root = Path(out_root)
    try:
        root.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=root))
    except OSError as err:
        raise ConfigError(f"output directory {root} is not writable: {err}") from err

    try:
        for name, table in report.tables.items():
            (tmp / f"{name}.csv").write_text(table.to_csv(), encoding="utf-8")
        for name, text in report.files.items():
            (tmp / name).write_text(text, encoding="utf-8")
        manifest = {
            "experiment": report.experiment,
            "config": _plain(cfg),
            "seed": cfg.get("seed", 0),
            "versions": versions(),
            "started": started.isoformat(timespec="seconds"),
            "wall_time_seconds": round(wall_time, 3),
            "tables": sorted(report.tables),
            "files": sorted(report.files),
        }
        (tmp / "manifest.yaml").write_text(yaml.safe_dump(manifest, sort_keys=False),
                                           encoding="utf-8")
        stamp = started.strftime("%Y%m%dT%H%M%S")
        final = root / f"{report.experiment}-{stamp}"
        k = 1
        while final.exists():
            final = root / f"{report.experiment}-{stamp}-{k}"
            k += 1
        tmp.rename(final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return final


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list:
        for name, exp in EXPERIMENTS.items():
            print(f"{name:22s} {exp.description}")
        return EXIT_OK
    if args.experiment is None:
        parser.print_usage(sys.stderr)
        print("wenolab: error: no experiment given (see --list)", file=sys.stderr)
        return EXIT_CONFIG

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        name, cfg = resolve_config(args)
        started = dt.datetime.now()
        t0 = time.perf_counter()
        log.info("running %s with %s", name, cfg)
        with np.errstate(invalid="raise"):
            report = EXPERIMENTS[name].runner(cfg)
        out = write_report(report, cfg, args.out, time.perf_counter() - t0, started)
    except ConfigError as err:
        print(f"wenolab: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as err:
        print(f"wenolab: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, KeyError) as err:
        # invalid option values surface from the mesh and reconstruction layers
        print(f"wenolab: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
