"""Model parameters and Fock-basis operator matrices.

All matrices use the convention ``M[n, m] = <n|M|m>`` with photon numbers
``0 .. n_max - 1`` as row/column indices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from .errors import NegativePump, NonPositiveRate, TruncationTooSmall

SQUEEZE_ERR_WARN = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Rates of the parametric oscillator and the Fock truncation.

    Parameters
    ----------
    h : float
        Two-photon pump amplitude (>= 0).
    g : float
        One-photon loss rate (> 0).
    beta : float
        Two-photon loss rate (> 0).
    F : float
        Real additive one-photon field amplitude.
    n_max : int
        Number of retained Fock states ``|0> .. |n_max-1>``.
    """

    h: float
    g: float
    beta: float
    F: float = 0.0
    n_max: int = 40

    def __post_init__(self) -> None:
        if not self.g > 0 or not self.beta > 0:
            raise NonPositiveRate(f"g and beta must be > 0, got g={self.g}, beta={self.beta}")
        if not self.h >= 0:
            raise NegativePump(f"pump amplitude h must be >= 0, got {self.h}")
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise TruncationTooSmall(f"n_max must be an integer >= 2, got {self.n_max}")
        if not math.isfinite(self.F):
            raise ValueError(f"F must be finite, got {self.F}")

    @property
    def h_th(self) -> float:
        """Classical oscillation threshold ``2 g``."""
        return 2.0 * self.g

    def replace(self, **changes: Any) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **changes)


def validate_params(raw: Mapping[str, Any] | None = None, **kwargs: Any) -> ModelParams:
    """Build a :class:`ModelParams` from a mapping, raising on invalid values.

    Values are never clamped; ``n_max`` must already be integral.
    """
    data = dict(raw or {})
    data.update(kwargs)
    allowed = {"h", "g", "beta", "F", "n_max"}
    unknown = set(data) - allowed
    if unknown:
        raise TypeError(f"unknown parameter(s): {sorted(unknown)}")
    n_max = data.get("n_max", 40)
    if isinstance(n_max, float) and n_max.is_integer():
        n_max = int(n_max)
    if not isinstance(n_max, (int, np.integer)):
        raise TruncationTooSmall(f"n_max must be an integer, got {n_max!r}")
    return ModelParams(
        h=float(data["h"]),
        g=float(data["g"]),
        beta=float(data["beta"]),
        F=float(data.get("F", 0.0)),
        n_max=int(n_max),
    )


def _check_dim(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 2:
        raise TruncationTooSmall(f"n_max must be an integer >= 2, got {n_max}")
    return int(n_max)


def annihilation_matrix(n_max: int) -> NDArray[np.complex128]:
    """Return the truncated annihilation operator, ``a[n-1, n] = sqrt(n)``."""
    n_max = _check_dim(n_max)
    return np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1).astype(complex)


def creation_matrix(n_max: int) -> NDArray[np.complex128]:
    return annihilation_matrix(n_max).conj().T


def number_matrix(n_max: int) -> NDArray[np.complex128]:
    return np.diag(np.arange(_check_dim(n_max), dtype=float)).astype(complex)


def laguerre_table(x: ArrayLike, n_max: int) -> NDArray[np.float64]:
    """Generalized Laguerre polynomials ``L_j^{(k)}(x)`` for ``j, k < n_max``.

    Returns an array of shape ``(n_max, n_max) + x.shape`` indexed as
    ``[k, j, ...]``. Upward three-term recurrence in ``j`` at fixed ``k``.
    """
    x = np.asarray(x, dtype=float)
    k = np.arange(n_max, dtype=float).reshape((n_max,) + (1,) * x.ndim)
    table = np.empty((n_max, n_max) + x.shape)
    table[:, 0] = 1.0
    if n_max > 1:
        table[:, 1] = 1.0 + k - x
    for j in range(1, n_max - 1):
        table[:, j + 1] = ((2 * j + 1 + k - x) * table[:, j] - (j + k) * table[:, j - 1]) / (j + 1)
    return table


def displacement_matrices(zs: ArrayLike, n_max: int) -> NDArray[np.complex128]:
    """Batched Fock matrices of ``D(z) = exp(z a^dag - z^* a)``.

    Returns shape ``zs.shape + (n_max, n_max)``. Factorial prefactors are
    combined in log space so large ``n_max`` does not overflow.
    """
    n_max = _check_dim(n_max)
    zs = np.asarray(zs, dtype=complex)
    shape = zs.shape
    z = zs.reshape(-1)
    x = np.abs(z) ** 2
    lag = laguerre_table(x, n_max)  # [k, j, p]

    idx = np.arange(n_max)
    row = idx[:, None]
    col = idx[None, :]
    lo = np.minimum(row, col)
    k = np.abs(row - col)
    lgam = gammaln(np.arange(n_max) + 1.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        log_abs = np.where(x > 0, 0.5 * np.log(x), -np.inf)  # log|z|
        pow_log = np.where(k[..., None] == 0, 0.0, k[..., None] * log_abs[None, None, :])
    log_pref = 0.5 * (lgam[lo] - lgam[lo + k])[..., None] - 0.5 * x[None, None, :] + pow_log
    # above the diagonal (m > n): (-z^*)^k ; below: z^k
    arg = np.angle(z)
    phase_up = np.exp(1j * k[..., None] * (np.pi - arg)[None, None, :])
    phase_lo = np.exp(1j * k[..., None] * arg[None, None, :])
    phase = np.where((col > row)[..., None], phase_up, phase_lo)
    lag_vals = lag[k, lo]  # (n_max, n_max, p)
    out = np.exp(log_pref) * phase * lag_vals
    return np.moveaxis(out, -1, 0).reshape(shape + (n_max, n_max))


def displacement_matrix(z: complex, n_max: int) -> NDArray[np.complex128]:
    """Fock matrix of the displacement operator ``D(z)``.

    ``D[n, m] = <n|D(z)|m>``; the truncated matrix is not exactly unitary,
    see :func:`unitarity_residual`.
    """
    return displacement_matrices(np.asarray([z]), n_max)[0]


def squeezing_matrix(r: float, phi: float, n_max: int) -> NDArray[np.complex128]:
    """Fock matrix of ``S(xi) = exp((xi^* a a - xi a^dag a^dag) / 2)``, ``xi = r e^{i phi}``.

    Closed-form finite series in ``zeta = e^{i phi} tanh r`` and
    ``eta = 2 log cosh r`` with log-gamma factorials. The series alternates,
    so large ``r`` and ``n_max`` lose digits to cancellation (about 1e-10 at
    ``r = 1.5, n_max = 40``); a ``RuntimeWarning`` is issued when the
    estimated error exceeds 1e-8. Entries between states of opposite parity
    are exactly zero.
    """
    n_max = _check_dim(n_max)
    if not math.isfinite(r) or r < 0:
        raise ValueError(f"squeezing magnitude must be finite and >= 0, got {r}")
    out = np.zeros((n_max, n_max), dtype=complex)
    if r == 0.0:
        np.fill_diagonal(out, 1.0)
        return out

    eta = 2.0 * math.log(math.cosh(r))
    log_q = 2.0 * math.log(math.sinh(r)) - math.log(4.0)  # log(|zeta|^2 e^eta / 4)
    log_half_zeta = math.log(math.tanh(r) / 2.0)
    lgam = gammaln(np.arange(n_max) + 1.0)

    n_idx, m_idx = np.nonzero((np.add.outer(np.arange(n_max), np.arange(n_max)) % 2) == 0)
    lo = np.minimum(n_idx, m_idx)
    d = np.abs(n_idx - m_idx) // 2
    ks = np.arange(n_max // 2 + 1)
    valid = ks[None, :] <= (lo // 2)[:, None]
    kk = np.where(valid, ks[None, :], 0)
    log_terms = kk * log_q - lgam[lo[:, None] - 2 * kk] - lgam[kk] - lgam[d[:, None] + kk]
    log_terms = np.where(valid, log_terms, -np.inf)
    shift = log_terms.max(axis=1)
    scaled = np.exp(log_terms - shift[:, None])
    signs = np.where(ks % 2 == 0, 1.0, -1.0)
    series = (scaled * signs[None, :]).sum(axis=1)
    abs_series = scaled.sum(axis=1)
    log_mag = d * log_half_zeta - 0.5 * eta * (lo + 0.5) + 0.5 * (lgam[n_idx] + lgam[m_idx]) + shift
    values = series * np.exp(log_mag)
    # each term carries ~eps * |log term| relative error from the log-gamma sums
    rel = np.finfo(float).eps * (1.0 + np.abs(np.where(valid, log_terms, 0.0)).max(axis=1))
    err_est = rel * abs_series * np.exp(log_mag)
    if err_est.max() > SQUEEZE_ERR_WARN:
        warnings.warn(
            f"squeezing_matrix(r={r:g}, n_max={n_max}): cancellation error up to ~{err_est.max():.1e}",
            RuntimeWarning,
            stacklevel=2,
        )

    phase = np.where(
        n_idx >= m_idx,
        (-np.exp(1j * phi)) ** d,
        np.exp(-1j * phi) ** d,
    )
    out[n_idx, m_idx] = phase * values
    return out


def unitarity_residual(mat: NDArray[np.complex128], block: int | None = None) -> float:
    """Max-norm of ``M M^dag - 1`` on the leading ``block`` x ``block`` corner."""
    n = mat.shape[0]
    block = n // 2 if block is None else block
    prod = mat @ mat.conj().T
    return float(np.max(np.abs(prod[:block, :block] - np.eye(block))))
