"""Vectorized Liouvillian of the parametric oscillator in the truncated Fock basis.

The density matrix element ``rho[m, n]`` maps to the vector slot
``p = m + n_max * n`` (column-major / Fortran order), and
``d rho_p / dt = sum_q L[p, q] rho_q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

from .errors import DimensionMismatch, IndexOutOfRange
from .model import ModelParams


@dataclass(frozen=True)
class LiouvillianMatrix:
    n_max: int
    matrix: sp.csr_matrix
    params: ModelParams | None = None

    @property
    def dim(self) -> int:
        return self.n_max * self.n_max

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def is_real(self) -> bool:
        return not np.any(self.matrix.data.imag)

    def dump_triplets(self, path: str | Path) -> None:
        """Write ``p q re im`` lines, one stored entry per line, row-major."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w") as fh:
            for i in order:
                v = coo.data[i]
                fh.write(f"{coo.row[i]} {coo.col[i]} {v.real:.17g} {v.imag:.17g}\n")


def vec_index(m: int, n: int, n_max: int) -> int:
    """Vector slot of density-matrix element ``(m, n)``."""
    if not (0 <= m < n_max and 0 <= n < n_max):
        raise IndexOutOfRange(f"({m}, {n}) outside 0..{n_max - 1}")
    return m + n_max * n


def vectorize(rho: NDArray) -> NDArray[np.complex128]:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def devectorize(vec: NDArray, n_max: int) -> NDArray[np.complex128]:
    return np.asarray(vec, dtype=complex).reshape((n_max, n_max), order="F")


def _couplings(params: ModelParams):
    """Yield ``(dm, dn, coeff_array)`` blocks: coupling of rho[m, n] to rho[m+dm, n+dn].

    ``coeff_array[m, n]`` is the tensor element for every target ``(m, n)``;
    entries whose source falls outside the truncation are dropped by the caller.
    """
    N = params.n_max
    m = np.arange(N, dtype=float)[:, None] * np.ones((1, N))
    n = np.ones((N, 1)) * np.arange(N, dtype=float)[None, :]
    h, g, beta, F = params.h, params.g, params.beta, params.F

    diag = -0.5 * g * (m + n) - 0.25 * beta * (m * (m - 1) + n * (n - 1))
    yield 0, 0, diag
    # one-photon loss in-flow
    yield 1, 1, g * np.sqrt((m + 1) * (n + 1))
    # two-photon loss in-flow
    yield 2, 2, 0.5 * beta * np.sqrt((m + 1) * (m + 2) * (n + 1) * (n + 2))
    if h != 0.0:
        yield -2, 0, (h / 8) * np.sqrt(m * (m - 1))
        yield 2, 0, -(h / 8) * np.sqrt((m + 1) * (m + 2))
        yield 0, -2, (h / 8) * np.sqrt(n * (n - 1))
        yield 0, 2, -(h / 8) * np.sqrt((n + 1) * (n + 2))
    if F != 0.0:
        yield -1, 0, F * np.sqrt(m)
        yield 1, 0, -F * np.sqrt(m + 1)
        yield 0, -1, F * np.sqrt(n)
        yield 0, 1, -F * np.sqrt(n + 1)


def build_liouvillian(params: ModelParams) -> LiouvillianMatrix:
    """Assemble the sparse vectorized Liouvillian for ``params``.

    Contributions: two-photon pump Hamiltonian, one- and two-photon loss and
    (when ``F != 0``) the additive field. Couplings to Fock indices
    ``>= n_max`` or ``< 0`` are dropped (hard truncation).
    """
    N = params.n_max
    m = np.arange(N)[:, None] * np.ones((1, N), dtype=int)
    n = np.ones((N, 1), dtype=int) * np.arange(N)[None, :]
    rows, cols, vals = [], [], []
    for dm, dn, coeff in _couplings(params):
        r, s = m + dm, n + dn
        keep = (r >= 0) & (r < N) & (s >= 0) & (s < N) & (coeff != 0)
        rows.append((m + N * n)[keep])
        cols.append((r + N * s)[keep])
        vals.append(coeff[keep])
    coo = sp.coo_matrix(
        (np.concatenate(vals).astype(complex), (np.concatenate(rows), np.concatenate(cols))),
        shape=(N * N, N * N),
    )
    return LiouvillianMatrix(n_max=N, matrix=coo.tocsr(), params=params)


def apply_liouvillian(L: LiouvillianMatrix, rho: NDArray) -> NDArray[np.complex128]:
    """Return ``d rho / dt`` as an ``n_max x n_max`` matrix."""
    rho = np.asarray(rho)
    if rho.shape != (L.n_max, L.n_max):
        raise DimensionMismatch(f"rho has shape {rho.shape}, Liouvillian expects n_max={L.n_max}")
    return devectorize(L.matrix @ vectorize(rho), L.n_max)


def liouvillian_tensor_naive(params: ModelParams) -> NDArray[np.complex128]:
    """Dense ``L[m, n, r, s]`` built entry by entry from the projected master equation.

    Slow reference implementation used for cross-checking :func:`build_liouvillian`.
    """
    N = params.n_max
    h, g, beta, F = params.h, params.g, params.beta, params.F
    T = np.zeros((N, N, N, N), dtype=complex)

    for m in range(N):
        for n in range(N):
            for r in range(N):
                for s in range(N):
                    if (r, s) == (m - 2, n):
                        T[m, n, r, s] += h / 8 * np.sqrt(m * (m - 1))
                    if (r, s) == (m + 2, n):
                        T[m, n, r, s] -= h / 8 * np.sqrt((m + 1) * (m + 2))
                    if (r, s) == (m, n - 2):
                        T[m, n, r, s] += h / 8 * np.sqrt(n * (n - 1))
                    if (r, s) == (m, n + 2):
                        T[m, n, r, s] -= h / 8 * np.sqrt((n + 1) * (n + 2))
                    if (r, s) == (m + 1, n + 1):
                        T[m, n, r, s] += g * np.sqrt((m + 1) * (n + 1))
                    if (r, s) == (m, n):
                        T[m, n, r, s] -= g * (m + n) / 2
                        T[m, n, r, s] -= beta * (m * (m - 1) + n * (n - 1)) / 4
                    if (r, s) == (m + 2, n + 2):
                        T[m, n, r, s] += beta / 2 * np.sqrt((m + 1) * (m + 2) * (n + 1) * (n + 2))
                    if (r, s) == (m - 1, n):
                        T[m, n, r, s] += F * np.sqrt(m)
                    if (r, s) == (m + 1, n):
                        T[m, n, r, s] -= F * np.sqrt(m + 1)
                    if (r, s) == (m, n - 1):
                        T[m, n, r, s] += F * np.sqrt(n)
                    if (r, s) == (m, n + 1):
                        T[m, n, r, s] -= F * np.sqrt(n + 1)
    return T


def tensor_to_matrix(T: NDArray) -> NDArray:
    """Reshape ``L[m, n, r, s]`` to ``L[p, q]`` with ``p = m + N n``, ``q = r + N s``."""
    N = T.shape[0]
    return T.transpose(1, 0, 3, 2).reshape(N * N, N * N)
