"""Command-line entry point: constants, lift reports, sweeps, and check suites.

Configuration is a flat key-value file (one ``key = value`` per line) plus
flags; flags override the file.  Only the standard library is imported at
module level so that ``--threads`` can pin the BLAS pool size before numpy
comes up.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .errors import ConfigError, TranslayerError

SCHEMA_VERSION = "1"

_COMMANDS = ("constant", "lift", "sweep", "check")
_WHICH = ("m", "sigma", "c_under", "c_over", "c_delta")
_KINDS = ("f1d", "g1d", "full2d")
_SUITES = ("inequalities", "extension", "all")
_INITS = ("linear", "profile", "layer")
_WELL_KINDS = ("quartic",)


def _as_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}") from None


def _as_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}") from None


def _as_count(raw: str) -> int:
    value = _as_int(raw)
    if value < 0:
        raise ConfigError(f"expected a nonnegative integer, got {raw!r}")
    return value


def _as_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected true/false, got {raw!r}")


def _as_pair(raw: str) -> tuple[float, float]:
    parts = [p for p in raw.split(",") if p.strip()]
    if len(parts) != 2:
        raise ConfigError(f"expected two comma-separated numbers, got {raw!r}")
    return (_as_float(parts[0]), _as_float(parts[1]))


def _as_floats(raw: str) -> tuple[float, ...]:
    parts = [p for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"expected comma-separated numbers, got {raw!r}")
    return tuple(_as_float(p) for p in parts)


def _as_choice(options: Sequence[str]) -> Callable[[str], str]:
    def parse(raw: str) -> str:
        if raw not in options:
            raise ConfigError(f"expected one of {'|'.join(options)}, got {raw!r}")
        return raw

    return parse


_REQUIRED = object()


@dataclass(frozen=True)
class _Param:
    parse: Callable[[str], object]
    default: object
    help: str


_SCHEMAS: dict[str, dict[str, _Param]] = {
    "constant": {
        "which": _Param(_as_choice(_WHICH), _REQUIRED, "which constant to estimate"),
        "kind": _Param(_as_choice(_WELL_KINDS), "quartic", "potential family"),
        "wells": _Param(_as_pair, (-1.0, 1.0), "well positions a,b"),
        "scale": _Param(_as_float, 1.0, "potential scale factor"),
        "R": _Param(_as_float, 5.0, "half-width of the profile window"),
        "n": _Param(_as_int, 512, "cells across the window"),
        "z": _Param(_as_float, -1.0, "boundary value (sigma only)"),
        "xi": _Param(_as_float, 0.0, "pinned start value (sigma only)"),
        "delta": _Param(_as_float, 1e-3, "range margin (c_delta only)"),
    },
    "lift": {
        "n": _Param(_as_int, 128, "cells across the trace window"),
    },
    "sweep": {
        "kind": _Param(_as_choice(_KINDS), _REQUIRED, "which sweep to run"),
        "wells": _Param(_as_pair, (-1.0, 1.0), "well positions a,b"),
        "scale": _Param(_as_float, 1.0, "potential scale factor"),
        "L": _Param(_as_float, 1.0, "coupling target eps*lambda^(2/3)"),
        "eps": _Param(_as_floats, _REQUIRED, "descending eps ladder, comma-separated"),
        "n": _Param(_as_int, 0, "domain cells (0 picks 512 in 1-D, 96 per axis in 2-D)"),
        "mass": _Param(_as_float, None, "mass-average target (default: well midpoint)"),
        "init": _Param(_as_choice(_INITS), None, "initializer (default per kind)"),
        "stable_output": _Param(_as_bool, False, "zero out wall_ms in the artifacts"),
    },
    "check": {
        "suite": _Param(_as_choice(_SUITES), "all", "which suite to run"),
        "trials": _Param(_as_count, 0, "random trials per check (0 keeps suite defaults)"),
        "n": _Param(_as_count, 256, "cells for randomized traces"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation: a command, its parameters, and run plumbing."""

    command: str
    params: dict[str, object]
    output_dir: Path
    seed: int
    threads: int

    def __post_init__(self) -> None:
        if self.command not in _COMMANDS:
            raise ConfigError(
                f"unknown command {self.command!r}; expected one of {'|'.join(_COMMANDS)}"
            )
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def _build_config(
    command: str, raw: Mapping[str, tuple[str, str]]
) -> RunConfig:
    """Normalize raw string values; ``raw`` maps key -> (value, location)."""
    schema = _SCHEMAS[command] if command in _SCHEMAS else None
    if schema is None:
        raise ConfigError(
            f"unknown command {command!r}; expected one of {'|'.join(_COMMANDS)}"
        )
    out_dir = Path(".")
    seed = 0
    threads = 1
    params: dict[str, object] = {
        key: spec.default for key, spec in schema.items() if spec.default is not _REQUIRED
    }
    for key, (value, where) in raw.items():
        if key == "command":
            continue
        if key == "out":
            out_dir = Path(value)
        elif key == "seed":
            try:
                seed = _as_int(value)
            except ConfigError as exc:
                raise ConfigError(f"{where}: seed: {exc}") from None
        elif key == "threads":
            try:
                threads = _as_int(value)
            except ConfigError as exc:
                raise ConfigError(f"{where}: threads: {exc}") from None
        elif key in schema:
            try:
                params[key] = schema[key].parse(value)
            except ConfigError as exc:
                raise ConfigError(f"{where}: {key}: {exc}") from None
        else:
            raise ConfigError(f"{where}: unknown key {key!r} for command {command!r}")
    missing = [k for k, spec in schema.items() if spec.default is _REQUIRED and k not in params]
    if missing:
        raise ConfigError(
            f"command {command!r} is missing required keys: {', '.join(missing)}"
        )
    return RunConfig(command, params, out_dir, seed, threads)


def parse_config(text: str) -> RunConfig:
    """Parse the flat key-value config format into a validated RunConfig."""
    pairs: dict[str, tuple[str, str]] = {}
    first_line: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key before '='")
        if key in pairs:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} (first set on line {first_line[key]})"
            )
        pairs[key] = (value, f"line {lineno}")
        first_line[key] = lineno
    if not pairs:
        required = ", ".join(
            f"{cmd}: {', '.join(k for k, s in schema.items() if s.default is _REQUIRED) or 'none'}"
            for cmd, schema in _SCHEMAS.items()
        )
        raise ConfigError(
            "empty config; required keys: 'command' (one of "
            f"{'|'.join(_COMMANDS)}) plus per-command requirements ({required})"
        )
    if "command" not in pairs:
        raise ConfigError("config does not set 'command'")
    return _build_config(pairs["command"][0], pairs)


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def echo_config(config: RunConfig, *, with_out: bool = True) -> str:
    """Canonical flat text for a config; re-parsing it reproduces the config.

    Artifacts embed the ``with_out=False`` form: the output directory cannot
    change any result, and leaving it out keeps repeat runs byte-identical
    no matter where they land.
    """
    lines = [f"command = {config.command}"]
    for key in sorted(config.params):
        value = config.params[key]
        if value is None:
            continue
        lines.append(f"{key} = {_format_value(value)}")
    if with_out:
        lines.append(f"out = {config.output_dir}")
    lines.append(f"seed = {config.seed}")
    lines.append(f"threads = {config.threads}")
    return "\n".join(lines) + "\n"


def _merge_dash_values(argv: Sequence[str]) -> list[str]:
    """Join ``--wells -1,1`` into ``--wells=-1,1`` so argparse keeps the value.

    argparse only recognizes bare negative numbers after an option; values
    like ``-1,1`` would otherwise be read as an unknown flag.
    """
    value_flags = {"--out", "--seed", "--threads", "--config"}
    value_flags.update(
        f"--{key.replace('_', '-')}" for schema in _SCHEMAS.values() for key in schema
    )
    out: list[str] = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in value_flags and nxt is not None and nxt.startswith("-") and any(
            c.isdigit() for c in nxt[:3]
        ):
            out.append(f"{tok}={nxt}")
            skip = True
        else:
            out.append(tok)
    return out


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    ap = argparse.ArgumentParser(
        prog="translayer",
        description="Transition-layer constants, lifting ratios, and scaling sweeps.",
    )
    ap.add_argument("command", choices=_COMMANDS, help="what to run")
    ap.add_argument("--config", help="flat key-value config file; flags override it")
    ap.add_argument("--out", help="output directory (default: current directory)")
    ap.add_argument("--seed", type=int, help="seed for randomized suites (default 0)")
    ap.add_argument("--threads", type=int, help="thread budget, owns BLAS pools (default 1)")
    ap.add_argument("--dry-run", action="store_true", help="echo the effective config and exit")
    for key in sorted({k for schema in _SCHEMAS.values() for k in schema}):
        helps = [
            f"[{cmd}] {schema[key].help}" for cmd, schema in _SCHEMAS.items() if key in schema
        ]
        ap.add_argument(f"--{key.replace('_', '-')}", dest=key, help="; ".join(helps))
    if argv is None:
        argv = sys.argv[1:]
    return ap.parse_args(_merge_dash_values(argv))


def _assemble(args: argparse.Namespace) -> RunConfig:
    pairs: dict[str, tuple[str, str]] = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from None
        file_cfg = parse_config(text)
        if file_cfg.command != args.command:
            raise ConfigError(
                f"config file sets command = {file_cfg.command} but the command "
                f"line says {args.command}"
            )
        for key, value in file_cfg.params.items():
            if value is not None:
                pairs[key] = (_format_value(value), "config file")
        pairs["out"] = (str(file_cfg.output_dir), "config file")
        pairs["seed"] = (str(file_cfg.seed), "config file")
        pairs["threads"] = (str(file_cfg.threads), "config file")
    for key in _SCHEMAS[args.command]:
        flag = getattr(args, key, None)
        if flag is not None:
            pairs[key] = (str(flag), f"flag --{key.replace('_', '-')}")
    if args.out is not None:
        pairs["out"] = (args.out, "flag --out")
    if args.seed is not None:
        pairs["seed"] = (str(args.seed), "flag --seed")
    if args.threads is not None:
        pairs["threads"] = (str(args.threads), "flag --threads")
    return _build_config(args.command, pairs)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def load_report(path: Path | str) -> dict:
    """Read a JSON artifact back, rejecting unknown schema versions."""
    with Path(path).open(encoding="utf-8") as handle:
        payload = json.load(handle)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"{path}: unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})"
        )
    return payload


def _make_well(config: RunConfig):
    from .potentials import quartic_well

    a, b = config.params["wells"]
    return quartic_well(a, b, config.params["scale"])


def _payload(config: RunConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "config": echo_config(config, with_out=False),
    }


def _cmd_constant(config: RunConfig) -> bool:
    from . import constants

    well = _make_well(config)
    which = config.params["which"]
    big_r = config.params["R"]
    n = config.params["n"]
    if which == "m":
        est = constants.compute_m(well, big_r, n)
    elif which == "sigma":
        est = constants.compute_sigma(
            well, config.params["z"], config.params["xi"], big_r, n
        )
    elif which == "c_under":
        est = constants.compute_c_under(well, big_r, n)
    elif which == "c_over":
        est = constants.compute_c_over(well, big_r, n)
    else:
        est = constants.compute_c_delta(well, config.params["delta"], big_r, n)

    profile_path = config.output_dir / f"{which}_profile.csv"
    grid = est.profile.grid
    _write_csv(
        profile_path,
        ("x", "f"),
        [(repr(float(x)), repr(float(v))) for x, v in zip(grid.nodes, est.profile.values)],
    )
    payload = _payload(config)
    payload.update(
        {
            "constant": which,
            "wells": list(config.params["wells"]),
            "scale": config.params["scale"],
            "R": est.R,
            "n": est.n,
            "value": est.value,
            "extrapolated": est.extrapolated,
            "converged": est.converged,
            "profile_path": profile_path.name,
        }
    )
    if which == "sigma":
        payload["z"] = config.params["z"]
        payload["xi"] = config.params["xi"]
    if which == "c_delta":
        payload["delta"] = config.params["delta"]
    _write_json(config.output_dir / f"{which}.json", payload)
    return True


def _cmd_lift(config: RunConfig) -> bool:
    import numpy as np

    from .grid import Grid1D, make_triangle_grid
    from .lifting import average_extension, estimate_zeta, lifting_ratio_explicit
    from .randomfields import smooth_profile

    n = config.params["n"]
    rng = np.random.default_rng(config.seed)
    grid = Grid1D(0.0, 1.0, n)
    g = smooth_profile(grid, rng)
    explicit = lifting_ratio_explicit(g)
    tri = make_triangle_grid(1.0, n)
    sharp = estimate_zeta(g, tri)

    u = average_extension(g, tri)
    xx, yy = tri.node_xy()
    mask = tri.mask
    rows = [
        (repr(float(x)), repr(float(y)), repr(float(v)))
        for x, y, v in zip(xx[mask], yy[mask], u.values[mask])
    ]
    _write_csv(config.output_dir / "lift_extension.csv", ("x", "y", "u"), rows)

    payload = _payload(config)
    payload.update(
        {
            "n": n,
            "seed": config.seed,
            "explicit": {
                "numerator": explicit.numerator,
                "denominator": explicit.denominator,
                "ratio": explicit.ratio,
                "method": explicit.method.value,
            },
            "sharp": {
                "numerator": sharp.numerator,
                "denominator": sharp.denominator,
                "ratio": sharp.ratio,
                "method": sharp.method.value,
            },
            "extension_path": "lift_extension.csv",
        }
    )
    _write_json(config.output_dir / "lift.json", payload)
    return True


_SWEEP_HEADER = (
    "eps",
    "lambda",
    "L",
    "min_energy",
    "bending",
    "potential",
    "fractional",
    "boundary_potential",
    "converged",
    "wall_ms",
)


def _cmd_sweep(config: RunConfig) -> bool:
    from .grid import make_grid_1d, make_rectangle_grid
    from .optimize import Constraint
    from . import scaling

    well = _make_well(config)
    kind = config.params["kind"]
    n = config.params["n"] or (96 if kind == "full2d" else 512)
    a, b = config.params["wells"]
    mass = config.params["mass"]
    if mass is None:
        mass = 0.5 * (a + b)
    init_map = {
        "linear": scaling.InitKind.LINEAR_INTERP,
        "profile": scaling.InitKind.PROFILE_ANSATZ,
        "layer": scaling.InitKind.BOUNDARY_LAYER_ANSATZ,
    }
    init_key = config.params["init"] or ("layer" if kind == "full2d" else "profile")

    if kind == "full2d":
        domain = make_rectangle_grid(0.0, 0.0, 1.0, 1.0, n, n)
        constraint = scaling.boundary_mass_constraint(domain, mass)
    else:
        domain = make_grid_1d(0.0, 1.0, n)
        constraint = Constraint.mass_average(domain.trapezoid_weights, mass)
    cfg = scaling.SweepConfig(
        L=config.params["L"],
        eps_list=config.params["eps"],
        bulk_well=well,
        trace_well=well,
        domain=domain,
        constraint=constraint,
        init=init_map[init_key],
    )
    runner = {
        "f1d": scaling.sweep_f1d,
        "g1d": scaling.sweep_g1d,
        "full2d": scaling.sweep_full2d,
    }[kind]
    records = runner(cfg, threads=config.threads)

    stable = bool(config.params["stable_output"])
    rows = []
    for rec in records:
        bd = rec.breakdown
        rows.append(
            (
                repr(rec.eps),
                repr(rec.lam),
                repr(rec.L),
                repr(rec.min_energy),
                repr(bd.bending),
                repr(bd.potential),
                repr(bd.fractional),
                repr(bd.boundary_potential),
                str(rec.converged).lower(),
                0 if stable else rec.wall_ms,
            )
        )
    _write_csv(config.output_dir / "sweep.csv", _SWEEP_HEADER, rows)

    energies = [rec.min_energy for rec in records]
    payload = _payload(config)
    payload.update(
        {
            "kind": kind,
            "L": config.params["L"],
            "records": len(records),
            "plateau_value": energies[-1],
            "plateau_change": scaling.plateau_change(records),
            "all_converged": all(rec.converged for rec in records),
            "csv_path": "sweep.csv",
        }
    )
    _write_json(config.output_dir / "sweep.json", payload)
    return True


def _suite_inequalities(config: RunConfig) -> list[dict]:
    import numpy as np

    from .grid import Grid1D, make_grid_1d, make_triangle_grid
    from .lifting import (
        estimate_zeta,
        hardy_check,
        lifting_ratio_explicit,
        seminorm_comparison_check,
    )
    from .randomfields import smooth_profile

    rng = np.random.default_rng(config.seed)
    n = config.params["n"]
    trials = config.params["trials"]
    results = []

    count = trials or 50
    worst = -np.inf
    passed = True
    for _ in range(count):
        r = float(rng.uniform(1.3, 3.0))
        span = float(rng.uniform(0.5, 2.0))
        u = smooth_profile(
            make_grid_1d(0.0, span, n), rng, nonneg=True, zero_at_origin=True
        )
        check = hardy_check(u, r, slack=1e-3)
        passed &= check.passed
        worst = max(worst, check.lhs - check.rhs)
    results.append(
        {"name": "hardy", "trials": count, "passed": bool(passed), "worst_excess": worst}
    )

    passed = True
    worst = -np.inf
    for _ in range(count):
        u = smooth_profile(make_grid_1d(0.0, 1.0, n), rng)
        check = seminorm_comparison_check(u)
        passed &= check.passed
        worst = max(worst, check.h32 - check.bound)
    results.append(
        {
            "name": "seminorm",
            "trials": count,
            "passed": bool(passed),
            "worst_excess": worst,
        }
    )

    count = trials or 20
    lo, hi = 0.125 - 0.03, 0.4375 + 0.03
    passed = True
    ratios = []
    for _ in range(count):
        g = smooth_profile(Grid1D(0.0, 1.0, n), rng)
        explicit = lifting_ratio_explicit(g)
        sharp = estimate_zeta(g, make_triangle_grid(1.0, n))
        ratios.append((sharp.ratio, explicit.ratio))
        passed &= lo <= sharp.ratio <= explicit.ratio + 1e-9 <= hi + 1e-9
        passed &= lo <= explicit.ratio <= hi
    results.append(
        {
            "name": "lifting_bracket",
            "trials": count,
            "passed": bool(passed),
            "ratio_min": min(r[0] for r in ratios),
            "ratio_max": max(r[1] for r in ratios),
        }
    )
    return results


def _suite_extension(config: RunConfig) -> list[dict]:
    import numpy as np

    from .grid import Grid1D, make_triangle_grid, sample
    from .lifting import average_extension

    n = min(config.params["n"], 128)
    g_lin = sample(Grid1D(0.0, 1.0, n), lambda x: x)
    tri = make_triangle_grid(1.0, n)
    u_lin = average_extension(g_lin, tri)
    xx, yy = tri.node_xy()
    err_lin = float(np.max(np.abs(u_lin.values[tri.mask] - xx[tri.mask])))

    # the interpolant reproduces parabolas, so the window average of x^2 must
    # land on x^2 + y^2/3 up to rounding in the accumulated antiderivative
    g_sq = sample(Grid1D(0.0, 1.0, n), lambda x: x * x)
    u_sq = average_extension(g_sq, tri)
    want = xx * xx + yy * yy / 3.0
    err_sq = float(np.max(np.abs(u_sq.values[tri.mask] - want[tri.mask])))

    return [
        {"name": "extension_linear", "passed": bool(err_lin <= 1e-12), "max_error": err_lin},
        {"name": "extension_quadratic", "passed": bool(err_sq <= 1e-12), "max_error": err_sq},
    ]


def _cmd_check(config: RunConfig) -> bool:
    suite = config.params["suite"]
    results: list[dict] = []
    if suite in ("inequalities", "all"):
        results.extend(_suite_inequalities(config))
    if suite in ("extension", "all"):
        results.extend(_suite_extension(config))
    all_passed = all(r["passed"] for r in results)
    payload = _payload(config)
    payload.update(
        {
            "suite": suite,
            "seed": config.seed,
            "results": results,
            "passed": all_passed,
        }
    )
    _write_json(config.output_dir / "check.json", payload)
    for r in results:
        status = "pass" if r["passed"] else "FAIL"
        print(f"{r['name']}: {status}")
    return all_passed


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    try:
        config = _assemble(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.dry_run:
        sys.stdout.write(echo_config(config))
        return 0
    # pin the BLAS pools before numpy is imported by the command bodies
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(config.threads))
    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        runner = {
            "constant": _cmd_constant,
            "lift": _cmd_lift,
            "sweep": _cmd_sweep,
            "check": _cmd_check,
        }[config.command]
        ok = runner(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TranslayerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
