"""Command-line entry point: ``qopo {steady,wigner,classical,validate}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .classical import fixed_points
from .config import RunConfig, load_config
from .errors import ConfigParseError, OutputUnwritable, QOPOError
from .liouvillian import build_liouvillian
from .metrics import compute_metrics
from .model import ModelParams
from .steady import SolverOptions, evolve_rk4, max_stable_dt, steady_state, tail_mass
from .sweep import CLASSICAL_COLUMNS, SWEEP_COLUMNS, classical_rows, run_points, write_csv
from .wigner import default_extent, find_lobes, wigner_grid, wigner_point

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3
CROSSCHECK_NMAX = 12
CROSSCHECK_TOL = 1e-7
CONVERGENCE_PAD = 8
CONVERGENCE_TOL = 1e-8

log = logging.getLogger("qopo")


class SolverFailure(Exception):
    pass


def _out_dir(cfg: RunConfig) -> Path:
    return Path(cfg.outputs.directory)


def _single_point(cfg: RunConfig, what: str) -> ModelParams:
    if cfg.n_points != 1:
        raise ConfigParseError(f"'{what}' needs a single (h, F) point, config has {cfg.n_points}")
    return cfg.model.points()[0]


def run_steady(cfg: RunConfig) -> int:
    points = cfg.model.points()
    log.info("solving %d point(s) at n_max=%d", len(points), cfg.model.n_max)
    results = run_points(
        points,
        cfg.solver,
        workers=cfg.workers,
        keep_states=cfg.wigner.enabled and len(points) == 1,
        progress=lambda i, n: log.info("point %d/%d done", i, n),
    )
    rows = [r.row for r in results]
    if not cfg.outputs.record_timing:
        for row in rows:
            row["wall_time_seconds"] = 0.0
    out = _out_dir(cfg)
    if cfg.outputs.emit_csv:
        write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    ok_rows = [r for r in rows if not r["error"]]
    if cfg.outputs.emit_plots and len(ok_rows) > 1:
        from .plotting import plot_sweep

        plot_sweep(ok_rows, out / "steady_metrics.png")
    if cfg.wigner.enabled and len(points) == 1 and results[0].state is not None:
        _emit_wigner(cfg, points[0], results[0].state.entries)
    failed = len(rows) - len(ok_rows)
    for r in rows:
        if r["error"]:
            log.error("h=%g F=%g failed: %s", r["h"], r["F"], r["error"])
    print(f"steady: {len(rows)} point(s), {failed} failed, output in {out}")
    return EXIT_SOLVER if failed else EXIT_OK


def _emit_wigner(cfg: RunConfig, params: ModelParams, rho: np.ndarray) -> list:
    extent = cfg.wigner.extent or default_extent(params)
    grid = wigner_grid(rho, extent, cfg.wigner.points)
    lobes = find_lobes(grid)
    out = _out_dir(cfg)
    if cfg.outputs.emit_csv:
        X, P = np.meshgrid(grid.x_axis, grid.p_axis)
        write_csv(
            out / "wigner.csv",
            ("x", "p", "W"),
            ({"x": x, "p": p, "W": w} for x, p, w in zip(X.ravel(), P.ravel(), grid.values.ravel())),
        )
    if cfg.outputs.emit_plots:
        from .plotting import plot_wigner

        plot_wigner(
            grid, fixed_points(params), out / "wigner.png", title=f"h={params.h:g}, F={params.F:g}"
        )
    for z, w in lobes:
        print(f"lobe at z = {z.real:+.4f} {z.imag:+.4f}i, W = {w:.6g}")
    print(f"wigner: normalization {grid.normalization():.6f}, max |Im W| {grid.imag_residual:.2e}")
    return lobes


def run_wigner(cfg: RunConfig) -> int:
    params = _single_point(cfg, "wigner")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            state = steady_state(build_liouvillian(params), cfg.solver)
    except QOPOError as exc:
        raise SolverFailure(str(exc)) from exc
    _emit_wigner(cfg, params, state.entries)
    print(f"wigner: output in {_out_dir(cfg)}")
    return EXIT_OK


def run_classical(cfg: RunConfig) -> int:
    rows = classical_rows(cfg.model.points())
    out = _out_dir(cfg)
    if cfg.outputs.emit_csv:
        write_csv(out / "classical.csv", CLASSICAL_COLUMNS, rows)
    if cfg.outputs.emit_plots:
        from .plotting import plot_classical

        plot_classical(rows, out / "classical.png")
    print(f"classical: {len(rows)} fixed point row(s), output in {out}")
    return EXIT_OK


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _check(name: str, fn: Callable[[], tuple[bool, str]]) -> Check:
    try:
        passed, detail = fn()
    except (QOPOError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return Check(name, passed, detail)


def _validation_points(cfg: RunConfig) -> list[ModelParams]:
    """Corners of the sweep box; interior points are not revisited."""
    m = cfg.model
    hs = sorted({m.h.start, m.h.stop})
    Fs = sorted({m.F.start, m.F.stop})
    return [ModelParams(h, m.g, m.beta, F, m.n_max) for h in hs for F in Fs]


def _trace_preservation(p: ModelParams) -> tuple[bool, str]:
    L = build_liouvillian(p)
    diag = [m + p.n_max * m for m in range(p.n_max)]
    worst = float(np.abs(np.asarray(L.matrix[diag, :].sum(axis=0))).max())
    return worst <= 1e-12, f"max |column trace| = {worst:.2e}"


def _crosscheck(p: ModelParams) -> tuple[bool, str]:
    small = p.replace(n_max=CROSSCHECK_NMAX)
    L = build_liouvillian(small)
    opts = SolverOptions(method="dense-eigendecomposition")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ref = steady_state(L, opts)
    evals = np.linalg.eigvals(L.matrix.toarray())
    rates = np.abs(evals.real)
    slow = rates[rates > 1e-9].min()
    t_final = min(30.0 / slow, 2e4)
    rho0 = np.zeros((CROSSCHECK_NMAX, CROSSCHECK_NMAX), dtype=complex)
    rho0[0, 0] = 1.0
    evo = evolve_rk4(L, rho0, max_stable_dt(L), t_final)
    diff = float(np.abs(evo.entries - ref.entries).max())
    return diff <= CROSSCHECK_TOL, f"|rho_eig - rho_rk4|max = {diff:.2e} (n_max={CROSSCHECK_NMAX}, t={t_final:.4g})"


def _state_checks(p: ModelParams, opts: SolverOptions) -> list[Check]:
    checks: list[Check] = []
    label = f"h={p.h:g} F={p.F:g} n_max={p.n_max}"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            state = steady_state(build_liouvillian(p), opts)
            bigger = steady_state(build_liouvillian(p.replace(n_max=p.n_max + CONVERGENCE_PAD)), opts)
        except QOPOError as exc:
            return [Check(f"steady state [{label}]", False, f"{type(exc).__name__}: {exc}")]
    res = state.invariant_residuals()
    checks.append(
        Check(
            f"state validity [{label}]",
            state.is_valid(),
            ", ".join(f"{k} {v:.2e}" for k, v in res.items()),
        )
    )
    band = min(opts.tail_band, p.n_max - 1)
    tm = tail_mass(state.entries, band)
    checks.append(Check(f"tail mass [{label}]", tm <= opts.tail_eps, f"{tm:.2e} (band {band}, eps {opts.tail_eps:g})"))
    n = p.n_max
    diff = float(np.abs(state.entries - bigger.entries[:n, :n]).max())
    checks.append(
        Check(
            f"truncation convergence [{label}]",
            diff <= CONVERGENCE_TOL,
            f"|rho(n_max) - rho(n_max+{CONVERGENCE_PAD})|max = {diff:.2e}",
        )
    )
    return checks


def _vacuum_checks(cfg: RunConfig) -> list[Check]:
    p = ModelParams(0.0, cfg.model.g, cfg.model.beta, 0.0, min(cfg.model.n_max, CROSSCHECK_NMAX))

    def state_is_vacuum() -> tuple[bool, str]:
        rho = steady_state(build_liouvillian(p)).entries
        target = np.zeros_like(rho)
        target[0, 0] = 1.0
        d = float(np.abs(rho - target).max())
        m = compute_metrics(rho)
        worst = max(abs(m.delta_hs), abs(m.s_entropy), abs(m.q_photon))
        return d <= 1e-10 and worst <= 1e-10, f"|rho - |0><0||max = {d:.2e}, max metric {worst:.2e}"

    def wigner_origin() -> tuple[bool, str]:
        rho = np.zeros((p.n_max, p.n_max), dtype=complex)
        rho[0, 0] = 1.0
        d = abs(wigner_point(rho, 0.0) - 2 / math.pi)
        return d <= 1e-10, f"|W(0) - 2/pi| = {d:.2e}"

    return [_check("vacuum steady state and metrics", state_is_vacuum), _check("vacuum W(0)", wigner_origin)]


def run_validate(cfg: RunConfig) -> int:
    checks = _vacuum_checks(cfg)
    for p in _validation_points(cfg):
        tag = f"[h={p.h:g} F={p.F:g}]"
        checks.append(_check(f"trace preservation {tag}", lambda p=p: _trace_preservation(p)))
        checks.append(_check(f"eigen vs RK4 cross-check {tag}", lambda p=p: _crosscheck(p)))
        checks.extend(_state_checks(p, cfg.solver))
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    failed = sum(not c.passed for c in checks)
    print(f"validate: {len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_VALIDATION if failed else EXIT_OK


COMMANDS = {
    "steady": (run_steady, "solve the (h, F) sweep and write sweep.csv"),
    "wigner": (run_wigner, "Wigner grid of a single steady state"),
    "classical": (run_classical, "mean-field fixed points over the (h, F) range"),
    "validate": (run_validate, "run the invariant suite and report pass/fail"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run configuration (defaults if omitted)")
    common.add_argument("--out", help="output directory (overrides outputs.directory)")
    common.add_argument("--workers", type=int, help="parallel worker processes, 0 = all cores")
    common.add_argument("--n-max", type=int, dest="n_max", help="Fock truncation override")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(
        prog="qopo", description="Steady states and non-Gaussianity of a degenerate parametric oscillator."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(n_max=args.n_max, out=args.out, workers=args.workers)
        return COMMANDS[args.command][0](cfg)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputUnwritable as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailure, QOPOError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
