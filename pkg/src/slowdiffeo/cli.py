"""Command line entry point: ``slowdiffeo <subcommand> [options]``.

Outputs go to ``--out`` (default from the config).  Every file is written to a
temporary name and renamed into place, so it is either complete or absent.
Floats are written with 17 significant digits.  Each run also writes
``<subcommand>.manifest.json`` with the resolved config, versions and wall
time; it is the only output that differs between identical runs.
"""

from __future__ import annotations

import argparse
import math
import os
import platform
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, geometry, growth, weyl
from .checks import run_checks
from .config import ConfigError, RunConfig, build_config, load_config, parse_schedule
from .diffeo import ChartPoint, SphereChart, SpherePole, example_apply, f1_iterate_closed
from .numeric import circle_reduce
from .psi import PsiSpec, psi_validate

GROWTH_HEADER = ("n", "gamma", "ratio", "argmax_phi1", "argmax_u", "psi")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def fmt(x) -> str:
    """Scalar to text: ints as-is, floats with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"refusing to serialise non-finite value {x}")
    return format(x, ".17g")


def _json_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in '"\\':
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: keys in insertion order, two-space indent."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return _json_str(obj)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return fmt(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


# subcommands return (files, status); files maps name -> text


def cmd_weyl(run: RunConfig, args):
    sec = run.section("weyl")
    N = int(args.N if args.N is not None else sec["N"])
    grid = args.grid if args.grid is not None else sec["grid"]
    F = run.map.F
    r = weyl.weyl_extrema(F, run.map.alpha, N, grid)
    out = {
        "N": r.N,
        "grid_size": r.grid_size,
        "max_abs_W": r.max_abs_W,
        "max_abs_Wprime": r.max_abs_Wprime,
        "argmax_x": r.argmax_x,
    }
    if F.is_zero_mean:
        slack = 2 * math.pi * F.m_max * N / r.grid_size
        out["discretisation_slack"] = slack
        out["W_le_Wprime"] = bool(r.max_abs_W <= r.max_abs_Wprime + slack)
    return {"weyl.json": to_json(out) + "\n"}, EXIT_OK


def _u_text(u) -> str:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return ";".join(fmt(v) for v in u)


def cmd_growth(run: RunConfig, args):
    schedule = parse_schedule(args.schedule) if args.schedule else run.schedule
    psi = PsiSpec.parse(args.psi) if args.psi else run.psi
    psi_validate(psi, strict=True)
    cfg = replace(run.map, variant="chart")
    series = growth.gamma_series(cfg, schedule, run.grids, psi, threads=args.threads)
    rows = [(e.n, e.gamma, e.ratio, e.argmax.phi1, _u_text(e.argmax.u), e.psi) for e in series.entries]
    summary = series.summary()
    return {"growth.csv": csv_text(GROWTH_HEADER, rows), "growth_summary.json": to_json(summary) + "\n"}, EXIT_OK


def _parse_point(text, dim: int):
    if isinstance(text, str):
        vals = [float(t) for t in text.split(",")]
    else:
        vals = [float(t) for t in text]
    if len(vals) != 2 + dim:
        raise ConfigError(f"orbit point needs {2 + dim} coordinates, got {len(vals)}")
    return vals


def cmd_orbit(run: RunConfig, args):
    sec = run.section("orbit")
    cfg = run.map
    vals = _parse_point(args.point if args.point is not None else sec["point"], cfg.dim)
    steps = int(args.steps if args.steps is not None else sec["steps"])
    if steps < 0:
        raise ConfigError("orbit steps must be >= 0")
    rows = []
    if cfg.variant == "chart":
        x = ChartPoint.make(vals[0], vals[1], vals[2:], cfg.dim)
        header = ["step", "phi1", "phi2"] + [f"u{i + 1}" for i in range(cfg.dim)] + ["branch"]
        for m in range(steps + 1):
            y = f1_iterate_closed(cfg, m, x)
            rows.append([m, y.phi1, y.phi2, *np.asarray(y.u, dtype=float).ravel().tolist(), "chart"])
    else:
        lam, theta, z = vals
        if abs(z) >= 1.0:
            if abs(z) != 1.0:
                raise ConfigError("orbit point: |z| must be < 1, or exactly 1 for a pole")
            p = SpherePole(circle_reduce(lam), int(z))
        else:
            p = SphereChart(circle_reduce(lam), circle_reduce(theta), z)
        header = ["step", "lambda", "theta", "z", "branch"]
        for m in range(steps + 1):
            q = example_apply(cfg, m, p)
            if isinstance(q, SpherePole):
                rows.append([m, q.lam, "", q.sign, "pole"])
            else:
                rows.append([m, q.lam, q.theta, q.z, "chart"])
    return {"orbit.csv": csv_text(header, rows)}, EXIT_OK


def cmd_flux(run: RunConfig, args):
    variant = args.variant or run.section("flux")["variant"]
    if variant is None:
        variant = run.map.variant if run.map.variant != "chart" else "example1"
    if variant == "loop":
        rep = geometry.generator_loop_flux()
    elif variant == "example1":
        rep = geometry.flux_example1(replace(run.map, variant="example1"))
    elif variant == "example2":
        rep = geometry.flux_example2(replace(run.map, variant="example2"))
    else:
        raise ConfigError(f"flux variant must be example1, example2 or loop, got {variant!r}")
    out = {"variant": variant, **rep.to_dict()}
    return {"flux.json": to_json(out) + "\n"}, EXIT_OK


def cmd_volcheck(run: RunConfig, args):
    sec = run.section("volcheck")
    m = int(args.m if args.m is not None else sec["m"])
    n = int(args.samples if args.samples is not None else sec["samples"])
    b = int(args.bins if args.bins is not None else sec["bins"])
    rep = geometry.volume_pushforward_test(run.map, m, n, b, run.seed, broken=args.broken,
                                           threads=args.threads, sampling=sec["sampling"])
    return {"volcheck.json": to_json(rep.to_dict()) + "\n"}, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_check(run: RunConfig, args):
    results = run_checks(run)
    ok = all(r.passed for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    out = {"passed": ok, "checks": [r.to_dict() for r in results]}
    return {"check.json": to_json(out) + "\n"}, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "weyl": cmd_weyl,
    "growth": cmd_growth,
    "orbit": cmd_orbit,
    "flux": cmd_flux,
    "volcheck": cmd_volcheck,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON run config")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output directory (overrides config 'output')")
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")

    p = argparse.ArgumentParser(prog="slowdiffeo", description="Slow-growth diffeomorphism experiments")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("weyl", parents=[common], help="extrema of a Weyl sum and its derivative")
    s.add_argument("--N", type=int)
    s.add_argument("--grid", type=int)

    s = sub.add_parser("growth", parents=[common], help="growth sequence over a schedule")
    s.add_argument("--schedule", help="dyadic:<max> or list:<n1,n2,...>")
    s.add_argument("--psi", help="power:<beta>, log or loglog")

    s = sub.add_parser("orbit", parents=[common], help="orbit of a point")
    s.add_argument("--point", help="comma separated coordinates, e.g. 0.1,0.2,0")
    s.add_argument("--steps", type=int)

    s = sub.add_parser("flux", parents=[common], help="flux of an example path or the generator loop")
    s.add_argument("--variant", choices=["example1", "example2", "loop"])

    s = sub.add_parser("volcheck", parents=[common], help="Monte-Carlo volume preservation test")
    s.add_argument("--m", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--bins", type=int)
    s.add_argument("--broken", action="store_true", help="negative control: scale the second angle by 1.1")

    sub.add_parser("check", parents=[common], help="run the invariant suite")
    return p


def _versions() -> dict:
    import numba

    return {
        "slowdiffeo": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba.__version__,
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        run = load_config(args.config) if args.config else build_config({})
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed: must be a non-negative integer")
            run.seed = args.seed
            run.raw["seed"] = args.seed
        if args.threads < 1:
            raise ConfigError("threads: must be >= 1")
        out_dir = Path(args.out or run.output)
        files, status = COMMANDS[args.command](run, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "config": run.raw,
        "outputs": sorted(files),
        "versions": _versions(),
        "threads": args.threads,
        "exit_status": status,
        "wall_time_s": time.perf_counter() - t0,
    }
    files = {**files, f"{args.command}.manifest.json": to_json(manifest) + "\n"}
    try:
        for name, text in files.items():
            write_atomic(out_dir / name, text)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name in sorted(files):
        print(out_dir / name)
    return status
