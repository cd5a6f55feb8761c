"""Mean-field limit of the oscillator: fixed points, stability and trajectories.

The classical amplitude obeys

    dA/dt = (h/4) A^* - (g + beta |A|^2) A / 2 + F

Writing ``A = x + i y``, the imaginary part always relaxes
(``dy/dt = -(h/4 + g/2 + beta |A|^2 / 2) y``), so every fixed point is real
and solves the cubic ``beta x^3 / 2 + (g/2 - h/4) x - F = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, root

from .errors import RootFindingFailed, UnstableStep
from .model import ModelParams

MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class ClassicalFixedPoint:
    A: complex
    stability: str  # "stable", "saddle" or "unstable"
    jacobian_eigs: tuple[complex, complex]
    marginal: bool = False


def meanfield_rhs(A: complex, params: ModelParams) -> complex:
    A = complex(A)
    return (params.h / 4) * A.conjugate() - 0.5 * (params.g + params.beta * abs(A) ** 2) * A + params.F


def jacobian(A: complex, params: ModelParams) -> np.ndarray:
    """Jacobian of the real flow ``(x, y) -> (dx/dt, dy/dt)``."""
    x, y = A.real, A.imag
    h, g, b = params.h, params.g, params.beta
    r2 = x * x + y * y
    return np.array(
        [
            [h / 4 - 0.5 * (g + b * r2) - b * x * x, -b * x * y],
            [-b * x * y, -h / 4 - 0.5 * (g + b * r2) - b * y * y],
        ]
    )


def classify(A: complex, params: ModelParams) -> ClassicalFixedPoint:
    eigs = np.linalg.eigvals(jacobian(A, params))
    re = eigs.real
    marginal = bool(np.any(np.abs(re) <= MARGINAL_TOL))
    if marginal:
        stability = "unstable"
    elif np.all(re < 0):
        stability = "stable"
    elif np.all(re > 0):
        stability = "unstable"
    else:
        stability = "saddle"
    return ClassicalFixedPoint(complex(A), stability, (complex(eigs[0]), complex(eigs[1])), marginal)


def _cubic(x: float, params: ModelParams) -> float:
    return params.g * x / 2 + params.beta * x**3 / 2 - params.h * x / 4 - params.F


def _real_roots(params: ModelParams) -> list[float]:
    """Real roots of the fixed-point cubic by bracketing between its critical points."""
    b, c = params.beta / 2, params.g / 2 - params.h / 4
    # cubic grows like b x^3; bound all roots by Cauchy's bound
    bound = 1.0 + max(abs(c), abs(params.F)) / b
    knots = [-bound]
    if c < 0:
        xc = math.sqrt(-c / (3 * b))
        knots += [-xc, xc]
    knots.append(bound)
    roots: list[float] = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        flo, fhi = _cubic(lo, params), _cubic(hi, params)
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi < 0:
            try:
                roots.append(brentq(_cubic, lo, hi, args=(params,), xtol=1e-15, rtol=4 * np.finfo(float).eps))
            except (ValueError, RuntimeError) as exc:
                raise RootFindingFailed(str(exc)) from exc
    if _cubic(knots[-1], params) == 0.0:
        roots.append(knots[-1])
    return sorted(set(roots))


def _newton_2d(params: ModelParams, seeds: int = 9) -> list[complex]:
    scale = math.sqrt(max(params.h / 2 - params.g, 0.0) / params.beta) + abs(params.F) / params.g + 1.0
    grid = np.linspace(-2 * scale, 2 * scale, seeds)
    found: list[complex] = []

    def fun(v):
        z = meanfield_rhs(complex(v[0], v[1]), params)
        return [z.real, z.imag]

    for x0 in grid:
        for y0 in grid:
            sol = root(fun, [x0, y0], jac=lambda v: jacobian(complex(v[0], v[1]), params), tol=1e-14)
            if not sol.success:
                continue
            z = complex(sol.x[0], sol.x[1])
            if abs(meanfield_rhs(z, params)) > 1e-10:
                continue
            if all(abs(z - w) > 1e-7 for w in found):
                found.append(z)
    return sorted(found, key=lambda z: (z.real, z.imag))


def fixed_points(params: ModelParams, method: str = "cubic") -> list[ClassicalFixedPoint]:
    """All fixed points of the mean-field flow, sorted by ``Re A``.

    ``method='cubic'`` (default) uses the closed form at ``F = 0`` and
    bracketed root finding on the real cubic otherwise; ``method='newton2d'``
    runs a seeded 2D Newton search in the complex plane for verification.
    """
    if method == "newton2d":
        return [classify(z, params) for z in _newton_2d(params)]
    if method != "cubic":
        raise ValueError(f"unknown method {method!r}")
    if params.F == 0.0:
        xs = [0.0]
        if params.h > params.h_th:
            amp = math.sqrt((params.h / 2 - params.g) / params.beta)
            xs = [-amp, 0.0, amp]
    else:
        xs = _real_roots(params)
    out = [classify(complex(x, 0.0), params) for x in xs]
    for fp in out:
        if abs(meanfield_rhs(fp.A, params)) > 1e-10:
            raise RootFindingFailed(f"fixed point {fp.A} has residual {abs(meanfield_rhs(fp.A, params)):.2e}")
    return out


def saddle_node_field(params: ModelParams) -> float:
    """Field magnitude ``|F|`` at which the saddle and one attractor annihilate.

    Zero when the pump is at or below threshold.
    """
    p = (params.g - params.h / 2) / params.beta
    if p >= 0:
        return 0.0
    return params.beta * (-p) ** 1.5 / (3 * math.sqrt(3))


def integrate_meanfield(
    A0: complex, params: ModelParams, t_final: float, dt: float = 0.01
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 trajectory of the mean-field amplitude; returns ``(t, A)`` arrays."""
    if not (t_final > 0 and dt > 0):
        raise ValueError("t_final and dt must be positive")
    n = max(1, math.ceil(t_final / dt))
    h = t_final / n
    ts = np.linspace(0.0, t_final, n + 1)
    out = np.empty(n + 1, dtype=complex)
    a = complex(A0)
    out[0] = a
    f = meanfield_rhs
    for i in range(n):
        k1 = f(a, params)
        k2 = f(a + 0.5 * h * k1, params)
        k3 = f(a + 0.5 * h * k2, params)
        k4 = f(a + h * k3, params)
        a = a + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not math.isfinite(abs(a)) or abs(a) > 1e6:
            raise UnstableStep(f"mean-field integration diverged at t={ts[i + 1]:.4g}")
        out[i + 1] = a
    return ts, out
