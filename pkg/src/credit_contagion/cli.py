"""Command-line front end.

``price <command> --config <file> [--out <file>] [--set key=value ...]``

The config is flat ``key = value`` text with ``#`` comments. A sweep is
written ``sweep = axis: v1, v2, ...``. Output is CSV.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Any, Sequence

from .bond import BondContract, bond_price, bond_yield
from .cds import FLAVORS, CdsContract, cds_legs
from .errors import DomainError, PricingError
from .model import MAX_ABS_RHO, NumericsConfig, PairModel, firm_from_quality
from .montecarlo import McConfig, simulate
from .survival import joint_survival, restricted_exp_moment

__all__ = ["COMMANDS", "COLUMNS", "RunSpec", "ConfigError", "parse_config", "render", "run", "main"]

COMMANDS = ("survival", "bond", "cds", "sweep", "validate")
TARGETS = ("survival", "bond", "cds")

COLUMNS = {
    "survival": ("t", "rho", "P"),
    "bond": ("rho", "T", "omega", "yield_bp_over_rf", "yield"),
    "cds": ("flavor", "rho", "T", "R", "spread_bp"),
    "validate": ("quantity", "analytic", "mc_mean", "mc_se", "z_score"),
}

# keys that set the same parameter of both firms
SHARED = {"sigma": ("sigma1", "sigma2"), "q": ("q1", "q2"), "gamma": ("gamma1", "gamma2"),
          "quality": ("quality1", "quality2"), "face": ("face1", "face2")}


class ConfigError(DomainError):
    """A configuration line or value is invalid."""


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to run one command; defaults are the base case."""

    command: str = "bond"
    target: str = "bond"
    sigma1: float = 0.2
    sigma2: float = 0.2
    q1: float = 0.0
    q2: float = 0.0
    gamma1: float = 0.03
    gamma2: float = 0.03
    quality1: float = 2.0
    quality2: float = 2.0
    face1: float = 100.0
    face2: float = 100.0
    rf: float = 0.05
    rho: float = 0.4
    T: float = 5.0
    t: float | None = None
    omega: float = 0.7
    R: float = 0.5
    flavor: str = "first"
    series_tol: float = 1e-10
    n_max: int = 200
    theta_nodes: int = 64
    r_nodes: int = 96
    inner_nodes: int = 64
    grid_kind: str = "tensor"
    time_nodes: int = 64
    sparse_level: int = 3
    sparse_base: int = 32
    paths: int = 1_000_000
    steps_per_year: int = 200
    seed: int = 20240229
    bridge: bool = True
    antithetic: bool = False
    sweep: tuple | None = None
    out: str | None = None

    def numerics(self) -> NumericsConfig:
        return NumericsConfig(**{f.name: getattr(self, f.name) for f in fields(NumericsConfig)})

    def mc(self) -> McConfig:
        return McConfig(self.paths, self.steps_per_year, self.seed, self.bridge, self.antithetic)

    def model(self) -> PairModel:
        f1 = firm_from_quality(self.quality1, self.sigma1, self.T, self.q1, self.gamma1, self.face1)
        f2 = firm_from_quality(self.quality2, self.sigma2, self.T, self.q2, self.gamma2, self.face2)
        return PairModel(f1, f2, self.rho, self.rf, self.T)

    def at(self, axis: str, value: Any) -> "RunSpec":
        """This spec with one sweep coordinate set."""
        keys = SHARED.get(axis, (axis,))
        return dataclasses.replace(self, sweep=None, **{k: value for k in keys})


_TYPES = {f.name: f.type for f in fields(RunSpec)}
_SCALAR_KEYS = tuple(k for k in _TYPES if k not in ("sweep", "command", "out"))
SWEEP_AXES = tuple(k for k in _SCALAR_KEYS if k != "target") + tuple(SHARED)


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


_CHECKS = {
    "sigma1": (_positive, "(0, inf)"),
    "sigma2": (_positive, "(0, inf)"),
    "quality1": (lambda v: v >= 1, "[1, inf)"),
    "quality2": (lambda v: v >= 1, "[1, inf)"),
    "face1": (_positive, "(0, inf)"),
    "face2": (_positive, "(0, inf)"),
    "rho": (lambda v: -MAX_ABS_RHO <= v <= MAX_ABS_RHO, f"[-{MAX_ABS_RHO}, {MAX_ABS_RHO}] within (-1, 1)"),
    "T": (_positive, "(0, inf)"),
    "t": (lambda v: v is None or v > 0, "(0, inf)"),
    "omega": (lambda v: 0 < v <= 1, "(0, 1]"),
    "R": (lambda v: 0 <= v <= 1, "[0, 1]"),
    "series_tol": (_positive, "(0, inf)"),
    "n_max": (lambda v: v >= 8, "[8, inf)"),
    "theta_nodes": (lambda v: v >= 4, "[4, inf)"),
    "r_nodes": (lambda v: v >= 4, "[4, inf)"),
    "inner_nodes": (lambda v: v >= 4, "[4, inf)"),
    "time_nodes": (lambda v: v >= 4, "[4, inf)"),
    "sparse_level": (_nonneg, "[0, inf)"),
    "sparse_base": (lambda v: v >= 4, "[4, inf)"),
    "paths": (lambda v: v >= 10_000, "[10000, inf)"),
    "steps_per_year": (lambda v: v >= 50, "[50, inf)"),
    "seed": (lambda v: 0 <= v < 2**64, "[0, 2^64)"),
}
_CHOICES = {"command": COMMANDS, "target": TARGETS, "flavor": FLAVORS, "grid_kind": ("tensor", "sparse")}


def _convert(key: str, raw: str, where: str) -> Any:
    kind = _TYPES[SHARED[key][0]] if key in SHARED else _TYPES[key]
    raw = raw.strip()
    try:
        if kind.startswith("float"):
            if kind.endswith("None") and raw.lower() in ("", "none"):
                value = None
            else:
                value = float(raw)
                if not math.isfinite(value):
                    raise ValueError
        elif kind == "int":
            try:
                value = int(raw)
            except ValueError:
                # accept 1e6-style integers
                as_float = float(raw)
                if as_float != int(as_float):
                    raise
                value = int(as_float)
        elif kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            value = low in ("true", "1", "yes")
        else:
            value = raw
    except (ValueError, OverflowError):
        raise ConfigError(f"{where}: malformed value {raw!r} for {key!r}") from None
    _check_value(key, value, where)
    return value


def _check_value(key: str, value: Any, where: str) -> None:
    for k in SHARED.get(key, (key,)):
        if k in _CHOICES and value not in _CHOICES[k]:
            raise ConfigError(f"{where}: {key} = {value!r} is not one of {_CHOICES[k]}")
        if k in _CHECKS and value is not None:
            ok, interval = _CHECKS[k]
            if not ok(value):
                raise ConfigError(f"{where}: {key} = {value!r} is outside the admissible interval {interval}")


def _parse_sweep(raw: str, where: str) -> tuple:
    axis, sep, values = raw.partition(":")
    axis = axis.strip()
    if not sep or axis not in SWEEP_AXES:
        raise ConfigError(f"{where}: sweep must read 'axis: v1, v2, ...' with axis in {SWEEP_AXES}")
    items = [v for v in values.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"{where}: sweep over {axis!r} lists no values")
    return (axis, tuple(_convert(axis, v, where) for v in items))


def parse_config(text: str, overrides: Sequence[str] = ()) -> RunSpec:
    """Parse ``key = value`` lines into a validated :class:`RunSpec`.

    ``overrides`` are extra ``key=value`` strings applied after the text.
    Per-firm keys (``sigma2``) take precedence over shared keys
    (``sigma``) regardless of line order.
    """
    shared: dict[str, Any] = {}
    specific: dict[str, Any] = {}
    lines = [(f"line {i}", s) for i, s in enumerate(text.splitlines(), start=1)]
    lines += [(f"--set {s!r}", s) for s in overrides]
    for where, line in lines:
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, raw = body.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{where}: expected 'key = value', got {line.strip()!r}")
        if key == "sweep":
            specific["sweep"] = _parse_sweep(raw, where)
        elif key == "out":
            specific["out"] = raw.strip() or None
        elif key in SHARED:
            shared[key] = _convert(key, raw, where)
        elif key in _TYPES:
            specific[key] = _convert(key, raw, where)
        else:
            raise ConfigError(f"{where}: unknown key {key!r}")
    values: dict[str, Any] = {}
    for key, value in shared.items():
        for k in SHARED[key]:
            values[k] = value
    values.update(specific)
    spec = RunSpec(**values)
    _validate(spec)
    return spec


def _validate(spec: RunSpec) -> None:
    if spec.command == "sweep" and spec.sweep is None:
        raise ConfigError("the sweep command needs exactly one 'sweep = axis: values' line")
    points = [spec] if spec.sweep is None else [spec.at(spec.sweep[0], v) for v in spec.sweep[1]]
    for point in points:
        try:
            point.numerics()
            point.mc()
        except DomainError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None
    if spec.sweep is None:
        try:
            spec.model()
        except DomainError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(spec: RunSpec) -> str:
    """Config text that :func:`parse_config` maps back to ``spec``."""
    lines = []
    for f in fields(RunSpec):
        value = getattr(spec, f.name)
        if value is None:
            continue
        if f.name == "sweep":
            axis, values = value
            lines.append(f"sweep = {axis}: " + ", ".join(_format_value(v) for v in values))
        else:
            lines.append(f"{f.name} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def _num(x: float) -> str:
    return f"{x:.12g}"


def _row(spec: RunSpec, target: str) -> list[str]:
    model = spec.model()
    cfg = spec.numerics()
    if target == "survival":
        t = spec.T if spec.t is None else spec.t
        return [_num(t), _num(spec.rho), _num(joint_survival(model, t, cfg))]
    if target == "bond":
        y = bond_yield(model, BondContract(spec.face1, spec.T, spec.omega), cfg)
        return [_num(spec.rho), _num(spec.T), _num(spec.omega), _num((y - spec.rf) * 1e4), _num(y)]
    legs = cds_legs(model, CdsContract(spec.face1, spec.T, spec.R, spec.flavor), cfg)
    return [spec.flavor, _num(spec.rho), _num(spec.T), _num(spec.R), _num(legs.spread * 1e4)]


def _failed_row(spec: RunSpec, target: str) -> list[str]:
    keys = {"survival": ("t", "rho"), "bond": ("rho", "T", "omega"), "cds": ("flavor", "rho", "T", "R")}[target]
    row = []
    for k in keys:
        v = getattr(spec, k)
        if k == "t" and v is None:
            v = spec.T
        row.append(v if isinstance(v, str) else _num(v))
    return row + ["failed"] * (len(COLUMNS[target]) - len(row))


def _validate_rows(spec: RunSpec) -> list[list[str]]:
    model, cfg, T = spec.model(), spec.numerics(), spec.T
    sample = simulate(model, T, spec.mc())
    rows = []

    def add(name, analytic, est):
        rows.append([name, _num(analytic), _num(est.mean), _num(est.std_error), _num(est.z_score(analytic))])

    add("joint_survival", joint_survival(model, T, cfg), sample.estimate_joint_survival())
    if spec.rho >= 0:
        bond = BondContract(spec.face1, T, spec.omega)
        d = model.B1 - math.log(spec.omega)
        add("maturity_full_mass", restricted_exp_moment(model, T, 0.0, d, math.inf, cfg),
            sample.estimate_restricted_moment(0.0, d))
        add("maturity_band_moment", restricted_exp_moment(model, T, 1.0, model.B1, d, cfg),
            sample.estimate_restricted_moment(1.0, model.B1, d))
        add("bond_price", bond_price(model, bond, cfg), sample.estimate_bond_price(bond))
    for flavor in FLAVORS:
        if flavor != "first" and flavor != "second" and spec.rho < 0:
            continue
        if flavor == "counterparty_homogeneous" and model.firm1 != model.firm2:
            continue
        cds = CdsContract(spec.face1, T, spec.R, flavor)
        legs = cds_legs(model, cds, cfg)
        est = sample.estimate_cds_legs(cds)
        add(f"cds_{flavor}_premium_leg", legs.premium, est.premium)
        add(f"cds_{flavor}_protection_leg", legs.protection, est.protection)
        add(f"cds_{flavor}_spread", legs.spread, est.spread)
    return rows


def run(spec: RunSpec, stderr=None) -> str:
    """Execute ``spec`` and return the CSV document.

    Sweep points that fail are kept as rows whose result columns read
    ``failed``; the reason goes to ``stderr``.
    """
    stderr = stderr if stderr is not None else sys.stderr
    if spec.command == "validate":
        header, rows = COLUMNS["validate"], _validate_rows(spec)
    else:
        target = spec.target if spec.command == "sweep" else spec.command
        header = COLUMNS[target]
        points = [spec] if spec.sweep is None else [spec.at(spec.sweep[0], v) for v in spec.sweep[1]]

        def one(point: RunSpec) -> list[str]:
            try:
                return _row(point, target)
            except (PricingError, ValueError, ArithmeticError) as exc:
                if spec.sweep is None:
                    raise
                axis = spec.sweep[0]
                print(f"{axis} = {getattr(point, SHARED.get(axis, (axis,))[0])}: {exc}", file=stderr)
                return _failed_row(point, target)

        with ThreadPoolExecutor() as pool:
            rows = list(pool.map(one, points))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="price", description="Two-firm structural credit pricing.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", help="write CSV here instead of stdout")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    args = parser.parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        spec = parse_config(text, [f"command={args.command}", *args.overrides])
        if args.out:
            spec = dataclasses.replace(spec, out=args.out)
        document = run(spec)
    except (OSError, PricingError, ValueError, ArithmeticError) as exc:
        print(f"price: error: {exc}", file=sys.stderr)
        return 2
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(document)
    else:
        sys.stdout.write(document)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
