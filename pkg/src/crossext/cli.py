"""Command line: run scenarios, suites of scenarios, and region grids.

Every flag can also come from an environment variable ``CROSSEXT_<FLAG>``
(e.g. ``CROSSEXT_TOL_QUAD=1e-9``); explicit flags win.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .regions import SliceSpec
from .scenario import ScenarioError, emit_region_grids, load_scenario, run_scenario, run_suite

ENV_PREFIX = "CROSSEXT_"

# flag name -> (scenario field, type)
OVERRIDES = {
    "tol_quad": ("tol_quad", float),
    "tol_limit": ("tol_limit", float),
    "quad_nodes": ("quad_nodes", int),
    "grid_n": ("grid_n", int),
    "seed": ("seed", int),
}


class UsageError(Exception):
    pass


def _env(name: str, cast):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None or raw == "":
        return None
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"bad value {raw!r} for {ENV_PREFIX + name.upper()}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", default=None, help="directory for reports and grids")
    p.add_argument("--tol-quad", type=float, default=None, help="tolerance for quadrature identities")
    p.add_argument("--tol-limit", type=float, default=None, help="tolerance for angular limits")
    p.add_argument("--quad-nodes", type=int, default=None, help="quadrature nodes on circles")
    p.add_argument("--grid-n", type=int, default=None, help="grid resolution per axis")
    p.add_argument("--seed", type=int, default=None, help="seed for sample placement")
    p.add_argument("--timings", action="store_true", help="record wall-clock seconds in reports")


def parse_slice(text: str) -> tuple[str, complex]:
    """``'z=0.6'`` or ``'w=0.1+0.2j'`` -> ``('z', 0.6)``."""
    try:
        fixed, value = text.split("=", 1)
        fixed = fixed.strip()
        value = complex(value.strip().replace(" ", ""))
    except ValueError:
        raise UsageError(f"bad slice {text!r}; expected z=<complex> or w=<complex>") from None
    try:
        SliceSpec(fixed, value)
    except ValueError as exc:
        raise UsageError(f"rejected slice {text!r}: {exc}") from None
    return fixed, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crossext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("scenario")
    _add_common(p)
    p = sub.add_parser("suite", help="run every scenario in a directory")
    p.add_argument("directory")
    _add_common(p)
    p = sub.add_parser("grids", help="emit region grids for a scenario")
    p.add_argument("scenario")
    p.add_argument("--slice", action="append", default=[], help="z=<complex> or w=<complex>")
    _add_common(p)
    return parser


def resolve(args) -> tuple[dict, str | None, bool]:
    """Scenario overrides, output directory and timing flag from flags and environment."""
    overrides = {}
    for flag, (fieldname, cast) in OVERRIDES.items():
        val = getattr(args, flag)
        if val is None:
            val = _env(flag, cast)
        if val is not None:
            overrides[fieldname] = val
    if "quad_nodes" in overrides:
        overrides["order"] = max(1, overrides["quad_nodes"] // 4)
    out_dir = args.out_dir if args.out_dir is not None else os.environ.get(ENV_PREFIX + "OUT_DIR")
    timings = args.timings or os.environ.get(ENV_PREFIX + "TIMINGS", "") not in ("", "0")
    return overrides, out_dir, timings


def _load(path, overrides):
    sc = load_scenario(path)
    if overrides:
        sc = replace(sc, **overrides)
        try:
            sc.validate()
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
    return sc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides, out_dir, timings = resolve(args)
        if args.command == "run":
            sc = _load(args.scenario, overrides)
            rep = run_scenario(sc, out_dir, timings)
            print("\n".join(rep.summary_lines()))
            print(f"{sc.name}: {'PASS' if rep.passed else 'FAIL'} "
                  f"({len(rep.checks) - len(rep.failed())}/{len(rep.checks)})")
            return 0 if rep.passed else 1
        if args.command == "suite":
            agg, _ = run_suite(args.directory, out_dir, overrides, timings)
            print("\n".join(agg.summary_lines()))
            n_pass = len(agg.checks) - len(agg.failed())
            print(f"suite: {n_pass}/{len(agg.checks)} scenarios pass")
            return 0 if agg.passed else 1
        sc = _load(args.scenario, overrides)
        slices = [parse_slice(s) for s in args.slice] or None
        target = os.path.join(out_dir or ".", sc.name, "grids")
        grids = emit_region_grids(sc, target, slices)
        for name in grids:
            print(os.path.join(target, name + ".csv"))
        return 0
    except (UsageError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
