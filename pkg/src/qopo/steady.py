"""Steady state of the Liouvillian and the RK4 time-propagation oracle."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from .errors import (
    DegenerateSteadyState,
    DimensionMismatch,
    IndexOutOfRange,
    NoZeroEigenvalue,
    SolverError,
    TailMassExceeded,
    UnstableStep,
)
from .liouvillian import LiouvillianMatrix, devectorize, vectorize

METHODS = ("auto", "dense-eigendecomposition", "shift-invert-iteration", "time-evolution")
DENSE_MAX_NMAX = 45
TRACE_SELECT_TOL = 1e-6


@dataclass
class DensityMatrix:
    """Fock-basis density matrix with solver diagnostics attached."""

    entries: NDArray[np.complex128]
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {self.entries.shape}")

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def n_max(self) -> int:
        return self.entries.shape[0]

    def invariant_residuals(self) -> dict[str, float]:
        rho = self.entries
        return {
            "hermiticity": float(np.max(np.abs(rho - rho.conj().T))),
            "trace": float(abs(np.trace(rho) - 1.0)),
            "min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()),
        }

    def is_valid(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10, psd_tol: float = 1e-9) -> bool:
        res = self.invariant_residuals()
        return res["hermiticity"] <= herm_tol and res["trace"] <= trace_tol and res["min_eigenvalue"] >= -psd_tol


@dataclass(frozen=True)
class SolverOptions:
    """Steady-state solver settings.

    ``method='auto'`` uses the dense eigendecomposition up to ``n_max = 45``
    and sparse shift-invert iteration above.
    """

    method: str = "auto"
    eigen_tol: float = 1e-10
    tail_eps: float = 1e-10
    tail_band: int = 4
    shift: float = -1e-7
    t_max: float = 2e4

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown solver method {self.method!r}; choose from {METHODS}")
        if not (self.eigen_tol > 0 and self.tail_eps > 0 and self.t_max > 0):
            raise ValueError("solver tolerances must be positive")
        if self.tail_band < 1:
            raise ValueError("tail_band must be >= 1")


def tail_mass(rho: NDArray | DensityMatrix, band: int) -> float:
    """Largest ``|rho[m, n]|`` with ``m`` or ``n`` in the last ``band`` Fock levels."""
    rho = np.asarray(rho)
    n = rho.shape[0]
    if not 1 <= band < n:
        raise IndexOutOfRange(f"band must satisfy 1 <= band < n_max={n}, got {band}")
    edge = np.abs(rho)
    return float(max(edge[n - band :, :].max(), edge[:, n - band :].max()))


def _finalize(vec: NDArray, n_max: int) -> NDArray[np.complex128]:
    rho = devectorize(vec, n_max)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _select_null_vector(evals: NDArray, evecs: NDArray, n_max: int, tol: float) -> tuple[int, dict]:
    near = np.flatnonzero(np.abs(evals) <= tol)
    if near.size == 0:
        raise NoZeroEigenvalue(
            f"no eigenvalue within {tol:g} of zero (closest: {np.abs(evals).min():.3e})"
        )
    traces = np.array([abs(devectorize(evecs[:, i], n_max).trace()) for i in near])
    # normalized eigenvectors: compare trace against the vector 2-norm
    norms = np.linalg.norm(evecs[:, near], axis=0)
    physical = near[traces / norms > TRACE_SELECT_TOL]
    if physical.size == 0:
        raise NoZeroEigenvalue("all null vectors are traceless")
    if physical.size > 1:
        raise DegenerateSteadyState(
            f"{physical.size} independent unit-trace null vectors, eigenvalues {evals[physical]}"
        )
    others = np.delete(np.abs(evals), physical[0])
    info = {
        "zero_eigenvalue": complex(evals[physical[0]]),
        "eigen_gap": float(others.min()) if others.size else math.inf,
        "n_near_zero": int(np.count_nonzero(np.abs(evals) <= 1e-8)),
    }
    return int(physical[0]), info


def _dense_null(L: LiouvillianMatrix, opts: SolverOptions) -> tuple[NDArray, dict]:
    A = L.matrix.toarray()
    if L.is_real():
        A = A.real
    evals, evecs = sla.eig(A, overwrite_a=True, check_finite=False)
    idx, info = _select_null_vector(evals, evecs, L.n_max, opts.eigen_tol)
    return evecs[:, idx], info


def _shift_invert_null(L: LiouvillianMatrix, opts: SolverOptions) -> tuple[NDArray, dict]:
    A = L.matrix.tocsc()
    if L.is_real():
        A = A.real
    k = min(4, L.dim - 2)
    # random start so every parity sector enters the Krylov space
    rng = np.random.default_rng(12345)
    v0 = rng.standard_normal(L.dim)
    if not L.is_real():
        v0 = v0 + 1j * rng.standard_normal(L.dim)
    evals, evecs = spla.eigs(A, k=k, sigma=opts.shift, which="LM", v0=v0)
    idx, info = _select_null_vector(evals, evecs, L.n_max, opts.eigen_tol)
    return evecs[:, idx], info


def spectral_radius_estimate(L: LiouvillianMatrix, n_iter: int = 60, seed: int = 0) -> float:
    """Power-iteration estimate of the largest ``|lambda|`` of the Liouvillian."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(L.dim) + 1j * rng.standard_normal(L.dim)
    x /= np.linalg.norm(x)
    logs = []
    for _ in range(n_iter):
        y = L.matrix @ x
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        logs.append(math.log(nrm))
        x = y / nrm
    tail = logs[n_iter // 2 :]
    return float(math.exp(max(np.mean(tail), max(tail))))


def max_stable_dt(L: LiouvillianMatrix) -> float:
    """RK4 step bound ``0.5 / spectral radius``."""
    rad = spectral_radius_estimate(L)
    return 0.5 / rad if rad > 0 else math.inf


def _rk4(A: sp.csr_matrix, v: NDArray, dt: float, n_steps: int) -> NDArray:
    for _ in range(n_steps):
        k1 = A @ v
        k2 = A @ (v + 0.5 * dt * k1)
        k3 = A @ (v + 0.5 * dt * k2)
        k4 = A @ (v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def evolve_rk4(
    L: LiouvillianMatrix,
    rho0: NDArray | DensityMatrix,
    dt: float,
    t_final: float,
    check_every: int = 1000,
) -> DensityMatrix:
    """Integrate ``d rho/dt = L rho`` with fixed-step classical RK4.

    The step is adjusted down to ``t_final / ceil(t_final / dt)`` so the run
    ends exactly at ``t_final``. The trace is renormalized only at the end;
    the accumulated drift is reported in ``diagnostics['trace_drift']``.
    """
    if not (dt > 0 and t_final > 0):
        raise ValueError("dt and t_final must be positive")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (L.n_max, L.n_max):
        raise DimensionMismatch(f"rho0 shape {rho0.shape} does not match n_max={L.n_max}")
    n_steps = max(1, math.ceil(t_final / dt - 1e-12))
    h = t_final / n_steps
    A = L.matrix
    v = vectorize(rho0)
    tr0 = np.trace(rho0)
    done = 0
    while done < n_steps:
        chunk = min(check_every, n_steps - done)
        v = _rk4(A, v, h, chunk)
        done += chunk
        if not np.all(np.isfinite(v)) or np.abs(v).max() > 1e6:
            raise UnstableStep(f"RK4 blew up at t={done * h:.4g} with dt={h:.4g}")
    rho = devectorize(v, L.n_max)
    tr = np.trace(rho)
    return DensityMatrix(
        rho / tr,
        {"method": "rk4", "dt": h, "t_final": t_final, "trace_drift": float(abs(tr - tr0))},
    )


def _time_evolution_null(L: LiouvillianMatrix, opts: SolverOptions) -> tuple[NDArray, dict]:
    dt = max_stable_dt(L)
    rho = np.zeros((L.n_max, L.n_max), dtype=complex)
    rho[0, 0] = 1.0
    v = vectorize(rho)
    t, chunk = 0.0, 50.0
    n_chunk = max(1, math.ceil(chunk / dt))
    h = chunk / n_chunk
    while t < opts.t_max:
        v = _rk4(L.matrix, v, h, n_chunk)
        t += chunk
        if not np.all(np.isfinite(v)) or np.abs(v).max() > 1e6:
            raise UnstableStep(f"RK4 blew up at t={t:.4g}")
        if np.abs(L.matrix @ v).max() <= 0.1 * opts.eigen_tol:
            return v, {"t_converged": t, "dt": h}
    raise NoZeroEigenvalue(f"time evolution did not converge by t={opts.t_max}")


def steady_state(L: LiouvillianMatrix, opts: SolverOptions | None = None) -> DensityMatrix:
    """Steady state as the null eigenvector of the Liouvillian.

    The eigenvector is devectorized, divided by its trace and Hermitized.
    Null vectors with vanishing trace are rejected; two physical candidates
    raise :class:`DegenerateSteadyState`. A :class:`TailMassExceeded`
    warning is issued if the truncation edge carries weight above
    ``opts.tail_eps``.
    """
    opts = opts or SolverOptions()
    method = opts.method
    if method == "auto":
        method = "dense-eigendecomposition" if L.n_max <= DENSE_MAX_NMAX else "shift-invert-iteration"
    if method == "dense-eigendecomposition":
        vec, info = _dense_null(L, opts)
    elif method == "shift-invert-iteration":
        vec, info = _shift_invert_null(L, opts)
    else:
        vec, info = _time_evolution_null(L, opts)

    if abs(devectorize(vec, L.n_max).trace()) == 0:
        raise NoZeroEigenvalue("selected null vector has zero trace")
    rho = _finalize(vec, L.n_max)
    residual = float(np.abs(L.matrix @ vectorize(rho)).max())
    if residual > opts.eigen_tol:
        raise SolverError(f"steady-state residual {residual:.3e} exceeds eigen_tol={opts.eigen_tol:g}")
    band = min(opts.tail_band, L.n_max - 1)
    tail = tail_mass(rho, band)
    info.update({"method": method, "residual": residual, "tail_mass": tail, "tail_band": band})
    if tail > opts.tail_eps:
        warnings.warn(
            f"tail mass {tail:.3e} in the last {band} Fock levels exceeds {opts.tail_eps:g}; "
            f"increase n_max (currently {L.n_max})",
            TailMassExceeded,
            stacklevel=2,
        )
    return DensityMatrix(rho, info)
