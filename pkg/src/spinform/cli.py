"""Command line driver.

    spinform verify|restrict|convergence --surface NAME [--grid AxB[xC]]
             [--eta auto] [--out PATH] [--config FILE]

Exit status: 0 when every check passes, 1 when some identity fails,
2 for configuration errors.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, replace
import json
import logging
from pathlib import Path
import sys
import time

import numpy as np

from . import killing_flow as kf
from . import suite
from .errors import ConfigError, GeometryError, StencilError

log = logging.getLogger("spinform")

COMMANDS = ("verify", "restrict", "convergence")
MIN_GRID = 5
CHART_PARAMS = ("radius", "rho")


@dataclass(frozen=True)
class RunConfig:
    command: str
    surfaces: tuple
    grid: tuple = None
    steps: int = kf.STEPS_PER_CELL
    eta: complex = None  # None: the ambient space decides
    out: str = None
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    ladder: tuple = (16, 32, 64)
    jobs: int = 1

    def echo(self):
        return {
            "command": self.command,
            "surfaces": list(self.surfaces),
            "grid": None if self.grid is None else list(self.grid),
            "steps": self.steps,
            "eta": "auto" if self.eta is None else [self.eta.real, self.eta.imag],
            "params": dict(sorted(self.params.items())),
            "tolerances": dict(sorted(self.tolerances.items())),
            "ladder": list(self.ladder),
        }


# --- parsing ----------------------------------------------------------------------


def parse_grid(text):
    try:
        dims = tuple(int(part) for part in str(text).lower().split("x"))
    except ValueError:
        raise ConfigError(f"grid must look like 64x64 or 16x16x16, got {text!r}") from None
    if len(dims) not in (2, 3):
        raise ConfigError(f"grid needs 2 or 3 axes, got {text!r}")
    if min(dims) < MIN_GRID:
        raise ConfigError(f"grid must have at least {MIN_GRID} nodes per axis, got {text!r}")
    return dims


def parse_eta(text):
    if text is None or str(text).strip().lower() == "auto":
        return None
    cleaned = str(text).strip().replace(" ", "").replace("i", "j")
    num, _, den = cleaned.partition("/")
    if num in ("j", "+j", "-j"):
        num = num.replace("j", "1j")
    try:
        return complex(num) / (float(den) if den else 1.0)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot read eta {text!r}; use auto, 0, 0.5, 0.5j or i/2") from None


def parse_ladder(text):
    try:
        ladder = tuple(int(x) for x in str(text).replace(",", "/").split("/"))
    except ValueError:
        raise ConfigError(f"ladder must look like 16/32/64, got {text!r}") from None
    if len(ladder) < 3 or min(ladder) < MIN_GRID:
        raise ConfigError("a convergence ladder needs at least 3 grids of 5+ nodes")
    return ladder


def read_config_file(path):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _positive(value, what):
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(f"{what} must be a number, got {value!r}") from None
    if not number > 0:
        raise ConfigError(f"{what} must be positive")
    return number


def build_config(args):
    """Merge the config file with command-line flags (flags win)."""
    values = read_config_file(args.config) if args.config else {}
    for key in ("surface", "grid", "eta", "out", "steps", "ladder", "jobs"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for item in args.tol or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        name, value = item.split("=", 1)
        values[f"tol.{name.strip()}"] = value
    for key in CHART_PARAMS:
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)

    known = {"surface", "grid", "eta", "out", "steps", "ladder", "jobs", *CHART_PARAMS}
    unknown = [k for k in values if k not in known and not k.startswith("tol.")]
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "surface" not in values:
        raise ConfigError("no surface given (--surface NAME)")
    surfaces = tuple(s.strip() for s in str(values["surface"]).split(",") if s.strip())
    for name in surfaces:
        if name not in suite.CATALOG and not suite.is_hypersurface(name):
            raise ConfigError(f"unknown surface {name!r}")
    grid = parse_grid(values["grid"]) if "grid" in values else None
    if grid is not None:
        for name in surfaces:
            want = 3 if suite.is_hypersurface(name) else 2
            if len(grid) != want:
                raise ConfigError(f"{name} needs a {want}-axis grid, got {values['grid']}")
    steps = int(_positive(values.get("steps", kf.STEPS_PER_CELL), "steps"))
    params = {k: _positive(values[k], k) for k in CHART_PARAMS if k in values}
    tolerances = {k[4:]: _positive(v, k) for k, v in values.items() if k.startswith("tol.")}
    return RunConfig(
        command=args.command,
        surfaces=surfaces,
        grid=grid,
        steps=steps,
        eta=parse_eta(values.get("eta")),
        out=values.get("out"),
        params=params,
        tolerances=tolerances,
        ladder=parse_ladder(values["ladder"]) if "ladder" in values else (16, 32, 64),
        jobs=int(_positive(values.get("jobs", 1), "jobs")),
    )


def _chart_params(config, name):
    """Only pass the parameters a catalog entry actually accepts."""
    factory = suite.h4.CATALOG3.get(name) or suite.CATALOG[name]
    accepted = factory.__code__.co_varnames[: factory.__code__.co_argcount]
    return {k: v for k, v in config.params.items() if k in accepted}


# --- commands ---------------------------------------------------------------------


def _verify_one(config, name):
    """Run one surface; returns plain data so it can cross process boundaries."""
    try:
        result = suite.run_verify(
            name, config.grid, config.eta, config.steps, _chart_params(config, name), config.tolerances
        )
    except (GeometryError, StencilError) as exc:
        raise ConfigError(str(exc)) from None
    out = {"run": result.to_dict()}
    if config.command == "restrict":
        out["rows"] = suite.field_rows(result.field)
        out["dim"] = len(result.field.grid.shape)
        out["tensor"] = suite.tensor_summary(result.tensor)
    return out


def _run_all(config):
    if config.jobs > 1 and len(config.surfaces) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_verify_one, [config] * len(config.surfaces), config.surfaces))
    else:
        outcomes = [_verify_one(config, name) for name in config.surfaces]
    for outcome in outcomes:
        run = outcome["run"]
        for check in run["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            log.info("%-20s %-26s sup=%.3e tol=%.0e %s", run["surface"], check["name"], check["sup"], check["tol"], status)
    return outcomes


def cmd_verify(config):
    runs = [outcome["run"] for outcome in _run_all(config)]
    passed = all(run["passed"] for run in runs)
    return {"config": config.echo(), "runs": runs, "passed": passed}, passed


def _field_stem(config, name):
    out = Path(config.out or ".")
    if len(config.surfaces) == 1 and out.suffix:
        return out.with_suffix("")
    return out / f"{name}_field"


def cmd_restrict(config):
    runs = []
    for name, outcome in zip(config.surfaces, _run_all(config)):
        stem = _field_stem(config, name)
        stem.parent.mkdir(parents=True, exist_ok=True)
        csv_path = stem.with_suffix(".csv")
        with open(csv_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(suite.field_header(outcome["dim"]))
            writer.writerows([[repr(float(x)) for x in row] for row in outcome["rows"]])
        run = outcome["run"]
        run["field_csv"] = str(csv_path)
        run["tensor"] = outcome["tensor"]
        runs.append(run)
    passed = all(run["passed"] for run in runs)
    return {"config": config.echo(), "runs": runs, "passed": passed}, passed


def cmd_convergence(config):
    runs = []
    for name in config.surfaces:
        try:
            study = suite.convergence_study(name, config.ladder, _chart_params(config, name))
        except GeometryError as exc:
            raise ConfigError(str(exc)) from None
        runs.append(study)
        for label, data in study["studies"].items():
            log.info("%-20s %-18s orders=%s fitted=%s", name, label, data["orders"], data["fitted_order"])
    return {"config": config.echo(), "runs": runs, "passed": True}, True


HANDLERS = {"verify": cmd_verify, "restrict": cmd_restrict, "convergence": cmd_convergence}


def dump_report(report, wall_time, out=None):
    """Sorted, indented JSON; ``wall_time`` is the only run-dependent field."""
    payload = dict(report)
    payload["wall_time"] = round(wall_time, 3)
    text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    return text


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _report_path(config):
    if config.out is None:
        return None
    out = Path(config.out)
    if config.command == "restrict":
        if len(config.surfaces) == 1 and out.suffix:
            return out.with_suffix(".json")
        return out / "report.json"
    return out


def make_parser():
    parser = argparse.ArgumentParser(prog="spinform", description="Verify spinorial descriptions of immersed surfaces.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--surface", help="catalog name, or several separated by commas")
    parser.add_argument("--grid", help="nodes per axis, e.g. 64x64 or 16x16x16")
    parser.add_argument("--eta", help="Killing number: auto (from the ambient space), 0, 0.5 or 0.5j")
    parser.add_argument("--out", help="report path (restrict: field/report stem or directory)")
    parser.add_argument("--config", help="flat key = value file; flags override it")
    parser.add_argument("--steps", type=int, help="RK4 steps per grid cell")
    parser.add_argument("--ladder", help="grid ladder for convergence, e.g. 16/32/64")
    parser.add_argument("--radius", type=float)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override one check tolerance")
    parser.add_argument("--jobs", type=int, help="verify several surfaces in parallel")
    parser.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    started = time.perf_counter()
    try:
        config = build_config(args)
        report, passed = HANDLERS[config.command](config)
    except ConfigError as exc:
        log.error("spinform: %s", exc)
        return 2
    dump_report(report, time.perf_counter() - started, _report_path(config))
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
