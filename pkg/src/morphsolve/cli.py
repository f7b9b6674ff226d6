"""``morphsolve`` command line.

Exit codes: 0 success, 1 usage or configuration error, 2 solver failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .config import ConfigError, RunConfig, load_config, with_param
from .errors import MorphsolveError
from .evolve import State, simulate
from .grid import build_grid
from .model import Params
from .steady import SteadySolution, one_sided_slopes, solve as solve_steady
from .verify import run_suite

log = logging.getLogger("morphsolve")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(stage, cause)
        self.stage = stage
        self.cause = cause

    def __str__(self) -> str:
        return f"{self.stage}: {type(self.cause).__name__}: {self.cause}"


class _Outputs:
    """Track written files so a failed command leaves nothing half-done."""

    def __init__(self, out_dir: Path):
        self.dir = Path(out_dir)
        self.paths: list[Path] = []
        self._made_dirs: list[Path] = []

    def mkdir(self, path: Path) -> Path:
        path = Path(path)
        missing = []
        p = path
        while not p.exists():
            missing.append(p)
            p = p.parent
        path.mkdir(parents=True, exist_ok=True)
        self._made_dirs.extend(reversed(missing))
        return path

    def add(self, path: Path) -> Path:
        self.paths.append(Path(path))
        return Path(path)

    def discard(self) -> None:
        for p in self.paths:
            with contextlib.suppress(FileNotFoundError):
                p.unlink()
        for d in reversed(self._made_dirs):
            with contextlib.suppress(OSError):
                d.rmdir()


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except MorphsolveError as exc:
        raise StageError(name, exc) from exc


@contextlib.contextmanager
def _transaction(out_dir: Path):
    outs = _Outputs(out_dir)
    outs.mkdir(out_dir)
    try:
        yield outs
    except BaseException:
        outs.discard()
        raise


def _steady(cfg: RunConfig, n: int | None = None) -> SteadySolution:
    g = build_grid(n or cfg.grid_n)
    with _stage(f"steady solve ({cfg.mode}, n={g.n})"):
        return solve_steady(cfg.params, g, cfg.mode, cfg.steady_options)


def cmd_steady(cfg: RunConfig) -> list[Path]:
    with _transaction(cfg.output_dir) as outs:
        sol = _steady(cfg)
        x = sol.grid.nodes
        outs.add(io.write_profiles_csv(cfg.output_dir / "steady.csv", x, sol.u))
        if cfg.emit_svg:
            outs.add(io.write_profiles_svg(cfg.output_dir / "steady.svg", x, sol.u))
        log.info("steady: %s, %d iterations, residual %.2e", sol.mode, sol.iterations, sol.residual)
        return outs.paths


TRAJ_HEADER = ["t", "sup3to5", "l1_1", "l1_2", "l1_4", "l1_5", "bound6a", "bound6b", "dist_to_steady"]


def cmd_evolve(cfg: RunConfig) -> list[Path]:
    with _transaction(cfg.output_dir) as outs:
        g = build_grid(cfg.grid_n)
        ref = _steady(cfg)
        with _stage("time integration"):
            traj = simulate(State.zeros(g), cfg.t_end, cfg.dt, cfg.params, g, stride=cfg.stride, ref=ref)
        rows = [(d.t, d.sup3to5, *d.l1, d.bound6a, d.bound6b, d.dist_to_steady) for d in traj.diagnostics]
        outs.add(io.write_csv(cfg.output_dir / "trajectory.csv", TRAJ_HEADER, rows))
        snap_dir = outs.mkdir(cfg.output_dir / "snapshots")
        for k, s in enumerate(traj.snapshots):
            outs.add(io.write_profiles_csv(snap_dir / f"snapshot_{k:05d}.csv", g.nodes, s.u))
        log.info("evolve: %d steps, final distance to steady %.3e", traj.steps, traj.diagnostics[-1].dist_to_steady)
        return outs.paths


def cmd_verify(cfg: RunConfig) -> tuple[int, list[Path]]:
    with _transaction(cfg.output_dir) as outs:
        checks = run_suite(
            cfg.params, cfg.grid_n, cfg.dt, cfg.t_end, cfg.mode, cfg.steady_options,
            progress=lambda c: print(c.line(), flush=True),
        )
        failed = [c for c in checks if c.passed is False]
        lines = [c.line() for c in checks]
        lines.append(f"{len(failed)} failed, {sum(c.passed is True for c in checks)} passed")
        path = cfg.output_dir / "report.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        outs.add(path)
        return (EXIT_VERIFY if failed else EXIT_OK), outs.paths


def half_decay_length(x: np.ndarray, u: np.ndarray, j0: int) -> float:
    """Distance from the source at which u first falls to half its centre value (x >= 0)."""
    xs, us = x[j0:], u[j0:]
    half = us[0] / 2.0
    below = np.flatnonzero(us <= half)
    if us[0] <= 0 or below.size == 0:
        return float("nan")
    k = int(below[0])
    x0, x1, y0, y1 = xs[k - 1], xs[k], us[k - 1], us[k]
    return float(x0 + (half - y0) * (x1 - x0) / (y1 - y0))


def _sweep_point(cfg: RunConfig, key: str, value: float, out_dir: Path) -> tuple:
    sol = _steady(cfg)
    g = sol.grid
    io.write_profiles_csv(out_dir / "steady.csv", g.nodes, sol.u)
    slopes = one_sided_slopes(sol.u, g)
    return (value, sol.u[0, g.j0], *slopes, half_decay_length(g.nodes, sol.u[0], g.j0), sol.iterations)


SUMMARY_HEADER = ["value", "u1_at_0", "slope1", "slope2", "slope3", "slope4", "slope5", "half_length_u1", "iterations"]


def cmd_sweep(cfg: RunConfig, key: str, values: Sequence[float], jobs: int = 1) -> list[Path]:
    points = [(v, with_param(cfg, key, v)) for v in values]
    with _transaction(cfg.output_dir) as outs:
        dirs = []
        for v, _ in points:
            d = outs.mkdir(cfg.output_dir / f"{key}={io.fmt(v)}")
            dirs.append(d)
            outs.add(d / "steady.csv")
        args = [(c, key, v, d) for (v, c), d in zip(points, dirs)]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                rows = list(ex.map(_sweep_point, *zip(*args)))
        else:
            rows = [_sweep_point(*a) for a in args]
        outs.add(io.write_csv(cfg.output_dir / "summary.csv", SUMMARY_HEADER, rows))
        return outs.paths


def green_oracle(P: Params, x: np.ndarray) -> np.ndarray | None:
    """Closed-form u1 when the morphogen decouples (c = 0, p3 = 0), else None."""
    if any(P.c) or P.p3 != 0:
        return None
    k = np.sqrt(P.b[0])
    return P.p1 * np.cosh(k * (1 - np.abs(x))) / (2 * k * np.sinh(k))


CONV_HEADER = ["n", "h", "sup_diff_prev", "order_diff", "oracle_err", "order_err", "iterations"]


def convergence_table(cfg: RunConfig, grids: Sequence[int]) -> list[tuple]:
    grids = sorted(grids)
    rows = []
    prev = None
    prev_diff = prev_err = None
    for n in grids:
        sol = _steady(cfg, n)
        diff = order_diff = err = order_err = float("nan")
        if prev is not None:
            step = n // prev.grid.n
            if step * prev.grid.n != n:
                raise ConfigError(f"grids must be successive multiples, {prev.grid.n} does not divide {n}")
            diff = float(np.max(np.abs(sol.u[:, ::step] - prev.u)))
            if prev_diff is not None and diff > 0:
                order_diff = float(np.log(prev_diff / diff) / np.log(step))
        exact = green_oracle(cfg.params, sol.grid.nodes)
        if exact is not None:
            err = float(np.max(np.abs(sol.u[0] - exact)) / np.max(np.abs(exact)))
            if prev_err is not None and err > 0:
                order_err = float(np.log(prev_err / err) / np.log(n / prev.grid.n))
            prev_err = err
        rows.append((n, sol.grid.h, diff, order_diff, err, order_err, sol.iterations))
        prev_diff = diff if prev is not None else None
        prev = sol
    return rows


def cmd_convergence(cfg: RunConfig, grids: Sequence[int]) -> list[Path]:
    with _transaction(cfg.output_dir) as outs:
        rows = convergence_table(cfg, grids)
        outs.add(io.write_csv(cfg.output_dir / "convergence.csv", CONV_HEADER, rows))
        print(f"mode: {cfg.mode}")
        print(" ".join(f"{h:>14s}" for h in CONV_HEADER))
        for r in rows:
            print(" ".join(f"{v:>14.6g}" for v in r))
        return outs.paths


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="morphsolve", description="Steady states and transients of the 1D morphogen-glypican model.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("steady", "compute the steady state"),
        ("evolve", "integrate from zero initial data"),
        ("verify", "run the discrete property suite"),
        ("sweep", "steady states over values of one parameter"),
        ("convergence", "grid refinement study of the steady state"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
        sp.add_argument("--svg", action="store_true", help="also write steady.svg")
        if name == "sweep":
            sp.add_argument("--key", required=True)
            sp.add_argument("--values", required=True, type=_floats)
            sp.add_argument("--jobs", type=int, default=1)
        if name == "convergence":
            sp.add_argument("--grids", type=_ints, default=[128, 256, 512, 1024])
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg = replace(cfg, output_dir=args.out)
        if args.svg:
            cfg = replace(cfg, emit_svg=True)
        if args.command == "steady":
            paths = cmd_steady(cfg)
        elif args.command == "evolve":
            paths = cmd_evolve(cfg)
        elif args.command == "verify":
            code, paths = cmd_verify(cfg)
            for p in paths:
                print(p)
            return code
        elif args.command == "sweep":
            if not args.values:
                raise ConfigError("--values is empty")
            paths = cmd_sweep(cfg, args.key, args.values, jobs=args.jobs)
        else:
            if any(n < 4 or n % 2 for n in args.grids):
                raise ConfigError(f"--grids entries must be even integers >= 4, got {args.grids}")
            paths = cmd_convergence(cfg, args.grids)
    except (ConfigError, OSError) as exc:
        print(f"morphsolve: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"morphsolve: solver failure in {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except MorphsolveError as exc:
        print(f"morphsolve: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.command != "convergence":
        for p in paths:
            print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
