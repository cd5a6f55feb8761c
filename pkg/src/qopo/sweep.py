"""Parameter sweeps over ``(h, F)`` with ordered, deterministic CSV output."""

from __future__ import annotations

import csv
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .classical import fixed_points, saddle_node_field
from .errors import OutputUnwritable, QOPOError
from .liouvillian import build_liouvillian
from .metrics import compute_metrics
from .model import ModelParams
from .steady import DensityMatrix, SolverOptions, steady_state

SWEEP_COLUMNS = (
    "h", "F", "g", "beta", "n_max", "h_over_hth",
    "purity_rho", "mean_photon", "mean_X", "mean_P",
    "sigma11", "sigma22", "sigma12", "nbar", "xi_r", "xi_phi", "alpha_re", "alpha_im",
    "delta_hs", "s_entropy", "q_photon",
    "eigen_residual", "tail_mass", "wall_time_seconds",
    "error",
)  # fmt: skip

CLASSICAL_COLUMNS = (
    "h", "F", "g", "beta", "F_star", "n_fixed", "index", "A_re", "A_im", "stability",
    "marginal", "eig1_re", "eig1_im", "eig2_re", "eig2_im",
)  # fmt: skip


def format_value(value: Any) -> str:
    """CSV cell text: ``%.17g`` for floats, plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row.get(c, "")) for c in columns])
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {path}: {exc}") from exc


@dataclass(frozen=True)
class PointResult:
    row: dict[str, Any]
    state: DensityMatrix | None = None


def solve_point(params: ModelParams, opts: SolverOptions, keep_state: bool = False) -> PointResult:
    """Steady state and metrics for one parameter point.

    Failures are caught and reported in the ``error`` column; the numeric
    columns of a failed row are NaN.
    """
    row: dict[str, Any] = {
        "h": params.h, "F": params.F, "g": params.g, "beta": params.beta,
        "n_max": params.n_max, "h_over_hth": params.h / params.h_th,
    }  # fmt: skip
    t0 = time.perf_counter()
    state = None
    try:
        with warnings.catch_warnings():
            # tail mass is reported as a column instead
            warnings.simplefilter("ignore")
            state = steady_state(build_liouvillian(params), opts)
        rec = compute_metrics(state.entries)
        row.update(
            purity_rho=rec.purity_rho, mean_photon=rec.mean_photon,
            mean_X=rec.mean_X, mean_P=rec.mean_P,
            sigma11=rec.sigma11, sigma22=rec.sigma22, sigma12=rec.sigma12,
            nbar=rec.nbar, xi_r=rec.xi_r, xi_phi=rec.xi_phi,
            alpha_re=rec.alpha_re, alpha_im=rec.alpha_im,
            delta_hs=rec.delta_hs, s_entropy=rec.s_entropy, q_photon=rec.q_photon,
            eigen_residual=state.diagnostics["residual"], tail_mass=state.diagnostics["tail_mass"],
            error="",
        )  # fmt: skip
    except (QOPOError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        for col in SWEEP_COLUMNS[6:-2]:
            row[col] = math.nan
        row["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    row["wall_time_seconds"] = time.perf_counter() - t0
    return PointResult(row, state if keep_state else None)


def _solve_star(args: tuple) -> PointResult:
    return solve_point(*args)


def resolve_workers(workers: int) -> int:
    if workers == 0:
        return os.cpu_count() or 1
    return workers


def run_points(
    points: Sequence[ModelParams],
    opts: SolverOptions,
    workers: int = 1,
    keep_states: bool = False,
    progress: Callable[[int, int], None] | None = None,
) -> list[PointResult]:
    """Solve every point; results come back in input order."""
    workers = resolve_workers(workers)
    tasks = [(p, opts, keep_states) for p in points]
    results: list[PointResult] = []
    if workers <= 1 or len(tasks) <= 1:
        for i, t in enumerate(tasks):
            results.append(_solve_star(t))
            if progress:
                progress(i + 1, len(tasks))
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order regardless of completion order
        for i, res in enumerate(pool.map(_solve_star, tasks)):
            results.append(res)
            if progress:
                progress(i + 1, len(tasks))
    return results


def classical_rows(points: Sequence[ModelParams]) -> list[dict[str, Any]]:
    """One row per fixed point, grouped by parameter point in input order."""
    rows: list[dict[str, Any]] = []
    for p in points:
        fps = fixed_points(p)
        for i, fp in enumerate(fps):
            e1, e2 = fp.jacobian_eigs
            rows.append(
                {
                    "h": p.h, "F": p.F, "g": p.g, "beta": p.beta,
                    "F_star": saddle_node_field(p), "n_fixed": len(fps), "index": i,
                    "A_re": fp.A.real, "A_im": fp.A.imag, "stability": fp.stability,
                    "marginal": fp.marginal,
                    "eig1_re": e1.real, "eig1_im": e1.imag, "eig2_re": e2.real, "eig2_im": e2.imag,
                }
            )  # fmt: skip
    return rows
