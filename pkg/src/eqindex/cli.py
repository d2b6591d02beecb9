"""Command-line front end: ``eqindex run | suite | dump``.

Configuration is TOML::

    [model]
    kind = "plane_weight"      # shift, toeplitz, circle, derham_circle, product, plane_weight
    n_r = 400
    f_choice = "one"

    [policy]
    abs_floor = 1e-10
    rel_factor = 1e-6
    min_gap = 10.0

    [run]
    window = [0, 8]
    resolutions = [100, 200, 400]
    seed = 0
    format = "text"            # or "machine"

    [suite]
    trials = 100
    rank = 3
    relative_norm = 0.4
    path = "circle_potential"
    r0 = 4.0
    warp = "log"

Command-line flags override the file.  Exit codes: 0 confident result or
passing suite, 2 indeterminate, 1 error or failing suite.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import acceptance
from .index import IndeterminateRankError, RankPolicy
from .models import ModelSpec, jsonable
from .report import IndexReport, model_report, plane_report
from .suites import (
    HOMOTOPY_PATHS,
    NoPlateauError,
    circle_kernel_quantity,
    convergence_study,
    glued_quantity,
    gluing_check,
    homotopy_suite,
    plane_weight_quantity,
    shift_quantity,
    stability_suite,
    symbol_suite,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SUITES = ("acceptance", "stability", "homotopy", "gluing", "convergence", "symbols")
SECTIONS = {"model", "policy", "run", "suite"}
EXIT_OK, EXIT_ERROR, EXIT_INDETERMINATE = 0, 1, 2
SUITE_SCHEMA = "eqindex.suite/1"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: ModelSpec | None = None
    policy: RankPolicy = field(default_factory=RankPolicy)
    window: tuple[int, int] | None = None
    resolutions: list[int] | None = None
    resolution: int | None = None
    seed: int = 0
    format: str = "text"
    suite: dict = field(default_factory=dict)


def _window(value) -> tuple[int, int]:
    if isinstance(value, str):
        parts = value.replace(":", ",").split(",")
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ConfigError(f"window needs two integers, got {value!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except (TypeError, ValueError):
        raise ConfigError(f"window needs two integers, got {value!r}") from None
    if lo > hi:
        raise ConfigError(f"empty window [{lo}, {hi}]")
    return lo, hi


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return config_from_dict(data)


def config_from_dict(data: dict) -> RunConfig:
    unknown = set(data) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    cfg = RunConfig()
    try:
        if "model" in data:
            cfg.model = ModelSpec.from_dict(data["model"])
        if "policy" in data:
            extra = set(data["policy"]) - {"abs_floor", "rel_factor", "min_gap"}
            if extra:
                raise ConfigError(f"unknown policy keys {sorted(extra)}")
            cfg.policy = RankPolicy(**{k: float(v) for k, v in data["policy"].items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    run = dict(data.get("run", {}))
    extra = set(run) - {"window", "resolutions", "resolution", "seed", "format"}
    if extra:
        raise ConfigError(f"unknown run keys {sorted(extra)}")
    if "window" in run:
        cfg.window = _window(run["window"])
    if "resolutions" in run:
        cfg.resolutions = [int(r) for r in run["resolutions"]]
    if "resolution" in run:
        cfg.resolution = int(run["resolution"])
    cfg.seed = int(run.get("seed", 0))
    cfg.format = str(run.get("format", "text"))
    cfg.suite = dict(data.get("suite", {}))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.format not in ("text", "machine"):
        raise ConfigError(f"format must be 'text' or 'machine', got {cfg.format!r}")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")
    if cfg.resolution is not None and cfg.resolution <= 0:
        raise ConfigError("resolution must be positive")
    if cfg.resolutions is not None and (len(cfg.resolutions) < 3 or any(r <= 0 for r in cfg.resolutions)):
        raise ConfigError("resolutions needs at least three positive entries")


def apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.model is not None:
        if cfg.model is None or cfg.model.kind != args.model:
            try:
                cfg.model = ModelSpec(args.model)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    if args.tol is not None:
        try:
            cfg.policy = RankPolicy(cfg.policy.abs_floor, args.tol, cfg.policy.min_gap)
        except ValueError:
            raise ConfigError(f"--tol must lie in (0, 1), got {args.tol}") from None
    if args.window is not None:
        cfg.window = _window(args.window)
    if args.resolution is not None:
        cfg.resolution = args.resolution
    if args.seed is not None:
        cfg.seed = args.seed
    if args.format is not None:
        cfg.format = args.format
    _validate(cfg)
    return cfg


_RESOLUTION_KEY = {"shift": "n", "toeplitz": "n", "circle": "k_max", "derham_circle": "k_max", "plane_weight": "n_r"}


def _model_spec(cfg: RunConfig) -> ModelSpec:
    if cfg.model is None:
        raise ConfigError("no [model] section and no --model flag")
    spec = cfg.model
    if cfg.resolution is not None:
        key = _RESOLUTION_KEY.get(spec.kind)
        if key is None:
            raise ConfigError(f"--resolution does not apply to model kind {spec.kind!r}")
        spec = spec.with_params(**{key: cfg.resolution})
    return spec


def build_run_report(cfg: RunConfig) -> IndexReport:
    spec = _model_spec(cfg)
    if spec.kind == "plane_weight" and cfg.window is not None:
        p = spec.params
        rep = plane_report(
            cfg.window,
            int(p.get("n_r", 400)),
            float(p.get("R", 8.0)),
            str(p.get("f_choice", "one")),
            str(p.get("lift", "spinor")),
            cfg.policy,
        )
    else:
        rep = model_report(spec.build(), cfg.policy)
        if cfg.window is not None and rep.index is not None and hasattr(rep.index, "restrict"):
            rep.index = rep.index.restrict(*cfg.window)
            rep.diagnostics["window"] = list(rep.index.window)
    rep.model = {**spec.to_dict(), **rep.model}
    rep.seed = cfg.seed
    return rep


def _emit(payload: str, out) -> None:
    out.write(payload)
    if not payload.endswith("\n"):
        out.write("\n")


def _render(reports: list[IndexReport], fmt: str, suite: str | None = None) -> str:
    if fmt == "machine":
        if suite is None:
            return reports[0].to_json()
        doc = {
            "schema_version": SUITE_SCHEMA,
            "suite": suite,
            "reports": [r.to_dict() for r in reports],
            "passed": all(r.passed for r in reports),
        }
        return json.dumps(doc, sort_keys=True, indent=2)
    return "\n\n".join(r.to_text() for r in reports)


def cmd_run(cfg: RunConfig, out=sys.stdout) -> int:
    rep = build_run_report(cfg)
    _emit(_render([rep], cfg.format), out)
    return EXIT_INDETERMINATE if rep.indeterminate else EXIT_OK


def cmd_dump(cfg: RunConfig, out=sys.stdout) -> int:
    spec = _model_spec(cfg)
    model = spec.build()
    doc = {"schema_version": "eqindex.dump/1", "spec": spec.to_dict(), **model.dump()}
    if cfg.format == "machine":
        _emit(json.dumps(doc, sort_keys=True, indent=2), out)
        return EXIT_OK
    dense = model.to_dense()
    lines = [
        f"model: {spec.kind}",
        f"shape: {dense.shape[0]} x {dense.shape[1]}",
        f"domain labels: {list(model.domain_labels)}",
        f"codomain labels: {list(model.codomain_labels)}",
    ]
    for row in dense:
        lines.append(" ".join(_fmt_entry(z) for z in row))
    _emit("\n".join(lines), out)
    return EXIT_OK


def _fmt_entry(z: complex) -> str:
    if z == 0:
        return "0"
    if z.imag == 0:
        return f"{z.real:.6g}"
    if z.real == 0:
        return f"{z.imag:.6g}i"
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _acceptance(cfg: RunConfig, out) -> int:
    results = acceptance.run_acceptance(cfg.policy)
    passed = all(r.passed for r in results)
    if cfg.format == "machine":
        doc = {"schema_version": SUITE_SCHEMA, "suite": "acceptance", "criteria": [r.to_dict() for r in results], "passed": passed}
        _emit(json.dumps(jsonable(doc), sort_keys=True, indent=2), out)
    else:
        lines = [r.line() for r in results]
        lines.append(f"acceptance: {sum(r.passed for r in results)}/{len(results)} passed")
        _emit("\n".join(lines), out)
    return EXIT_OK if passed else EXIT_ERROR


def suite_reports(name: str, cfg: RunConfig) -> list[IndexReport]:
    s = cfg.suite
    if name == "stability":
        spec = cfg.model or ModelSpec("shift", {"n": 20})
        if cfg.model is not None:
            spec = _model_spec(cfg)
        return [
            stability_suite(
                spec.build(),
                int(s.get("trials", 100)),
                int(s.get("rank", 3)),
                float(s.get("relative_norm", 0.4)),
                cfg.seed,
                cfg.policy,
            )
        ]
    if name == "homotopy":
        paths = [s["path"]] if "path" in s else sorted(HOMOTOPY_PATHS)
        return [homotopy_suite(p, int(s.get("steps", 11)), cfg.policy) for p in paths]
    if name == "gluing":
        window = cfg.window or (-4, 4)
        r0, warp = float(s.get("r0", 4.0)), str(s.get("warp", "log"))
        resolutions = cfg.resolutions or [100, 200, 400]
        study = convergence_study(glued_quantity(window, r0, warp), resolutions, cfg.policy, "gluing_convergence")
        res = cfg.resolution or study.diagnostics["converged_resolution"]
        return [study, gluing_check(window, r0, res, warp, policy=cfg.policy)]
    if name == "convergence":
        kind = cfg.model.kind if cfg.model else "plane_weight"
        if kind == "plane_weight":
            m = int(cfg.model.params.get("m", 0)) if cfg.model else 0
            q, default = plane_weight_quantity(m), [100, 200, 400]
        elif kind == "circle":
            q, default = circle_kernel_quantity(), [16, 32, 64]
        elif kind == "shift":
            q, default = shift_quantity(), [8, 16, 32]
        else:
            raise ConfigError(f"no convergence quantity for model kind {kind!r}")
        return [convergence_study(q, cfg.resolutions or default, cfg.policy, f"convergence[{q.__name__}]")]
    if name == "symbols":
        return [symbol_suite(cfg.seed)]
    raise ConfigError(f"unknown suite {name!r}; expected one of {SUITES}")


def cmd_suite(name: str, cfg: RunConfig, out=sys.stdout) -> int:
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; expected one of {SUITES}")
    if name == "acceptance":
        return _acceptance(cfg, out)
    try:
        reports = suite_reports(name, cfg)
    except NoPlateauError as exc:
        _emit(_render([exc.report], cfg.format, name), out)
        return EXIT_INDETERMINATE
    _emit(_render(reports, cfg.format, name), out)
    if any(r.indeterminate for r in reports):
        return EXIT_INDETERMINATE
    return EXIT_OK if all(r.passed for r in reports) else EXIT_ERROR


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--model", help="model kind (overrides [model].kind)")
    p.add_argument("--tol", type=float, help="relative singular value threshold")
    p.add_argument("--window", help="label window 'lo,hi'")
    p.add_argument("--resolution", type=int, help="model size: n, k_max or n_r depending on the kind")
    p.add_argument("--seed", type=int, help="seed for random perturbations")
    p.add_argument("--format", choices=("text", "machine"), help="report format")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqindex", description="Fredholm and equivariant indices of matrix models")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="compute the index of a configured model"))
    suite = sub.add_parser("suite", help="run a verification suite")
    suite.add_argument("name", help=f"one of {', '.join(SUITES)}")
    _common(suite)
    _common(sub.add_parser("dump", help="write the dense model matrix with labels"))
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        cfg = apply_flags(load_config(args.config), args)
        if args.command == "run":
            return cmd_run(cfg, out)
        if args.command == "dump":
            return cmd_dump(cfg, out)
        return cmd_suite(args.name, cfg, out)
    except IndeterminateRankError as exc:
        print(f"eqindex: indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"eqindex: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
