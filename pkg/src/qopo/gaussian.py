"""Moments of a Fock-basis state and its displaced squeezed thermal reference.

Quadratures are ``X = (a + a^dag)/sqrt(2)`` and ``P = (a - a^dag)/(i sqrt(2))``,
so the vacuum covariance is ``diag(1/2, 1/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import UnphysicalCovariance
from .model import annihilation_matrix, displacement_matrix, squeezing_matrix

DET_TOL = 1e-9
EDGE_TOL = 1e-14
MAX_WORK_DIM = 1800


@dataclass(frozen=True)
class MomentData:
    mean_X: float
    mean_P: float
    sigma: NDArray[np.float64]

    @property
    def nu(self) -> float:
        """Symplectic eigenvalue ``sqrt(det sigma)``."""
        return math.sqrt(max(np.linalg.det(self.sigma), 0.0))


@dataclass(frozen=True)
class GaussianRef:
    """Displaced squeezed thermal state ``D(alpha) S(xi) rho_th(nbar) S^dag D^dag``."""

    alpha: complex
    xi_r: float
    xi_phi: float
    nbar: float

    @property
    def purity(self) -> float:
        return 1.0 / (2.0 * self.nbar + 1.0)

    @property
    def entropy(self) -> float:
        """Von Neumann entropy ``(nbar+1) log(nbar+1) - nbar log nbar`` (natural log)."""
        n = max(self.nbar, 0.0)
        if n == 0.0:
            return 0.0
        return (n + 1.0) * math.log(n + 1.0) - n * math.log(n)

    def covariance(self) -> NDArray[np.float64]:
        """Covariance ``(2 nbar + 1) R(phi/2) diag(e^{-2r}, e^{2r}) R(phi/2)^T / 2``."""
        c, s = math.cos(self.xi_phi / 2), math.sin(self.xi_phi / 2)
        R = np.array([[c, -s], [s, c]])
        base = 0.5 * np.diag([math.exp(-2 * self.xi_r), math.exp(2 * self.xi_r)])
        return (2 * self.nbar + 1) * (R @ base @ R.T)


def moments(rho: NDArray) -> MomentData:
    """Quadrature means and symmetrized covariance of ``rho``.

    Evaluated from the exact ladder expectations ``<a>``, ``<a^2>`` and
    ``<a^dag a>`` so the truncation edge introduces no spurious term.
    """
    rho = np.asarray(rho, dtype=complex)
    n = np.arange(rho.shape[0])
    a1 = np.sum(np.sqrt(n[1:]) * np.diagonal(rho, offset=-1))  # Tr[a rho] = sum sqrt(n+1) rho[n+1, n]
    a2 = np.sum(np.sqrt(n[2:] * (n[2:] - 1)) * np.diagonal(rho, offset=-2))
    nn = np.sum(n * np.diagonal(rho)).real
    mean_X = math.sqrt(2) * a1.real
    mean_P = math.sqrt(2) * a1.imag
    s11 = a2.real + nn + 0.5 - mean_X**2
    s22 = -a2.real + nn + 0.5 - mean_P**2
    s12 = a2.imag - mean_X * mean_P
    sigma = np.array([[s11, s12], [s12, s22]])
    return MomentData(float(mean_X), float(mean_P), sigma)


def fit_gaussian(m: MomentData) -> GaussianRef:
    """Gaussian state sharing the first and second moments ``m``.

    ``nbar = sqrt(det sigma) - 1/2``; the squeezing magnitude is
    ``log(s1/s2)/4`` from the covariance eigenvalues ``s1 >= s2`` and its
    phase places the anti-squeezed axis along the ``s1`` eigenvector.
    A diagonal covariance with ``sigma11 > sigma22`` yields ``phi = pi``,
    i.e. the negative real squeezing ``-log(sigma11/sigma22)/4``.
    """
    sigma = 0.5 * (m.sigma + m.sigma.T)
    det = float(np.linalg.det(sigma))
    if det < 0.25 - DET_TOL:
        raise UnphysicalCovariance(f"det(sigma)={det:.6g} violates the uncertainty bound 1/4")
    nbar = math.sqrt(max(det, 0.0)) - 0.5
    s, vecs = np.linalg.eigh(sigma)
    s2, s1 = s
    if s1 - s2 <= 1e-14 * s1 or s2 <= 0:
        r, phi = 0.0, 0.0
    else:
        r = 0.25 * math.log(s1 / s2)
        v = vecs[:, 1]
        # anti-squeezed direction of R(phi/2) diag(e^{-2r}, e^{2r}) R^T is (-sin, cos)(phi/2)
        half = math.atan2(-v[0], v[1])
        phi = math.remainder(2 * half, 2 * math.pi)
        if phi <= -math.pi + 1e-15:
            phi = math.pi
    alpha = complex(m.mean_X, m.mean_P) / math.sqrt(2)
    return GaussianRef(alpha=alpha, xi_r=r, xi_phi=phi, nbar=max(nbar, 0.0))


def thermal_weights(nbar: float, n_max: int, full_output: bool = False):
    """Thermal populations ``nbar^n / (nbar+1)^(n+1)`` for ``n < n_max``.

    With ``full_output=True`` also returns the truncated tail ``1 - sum f_n``.
    """
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    n = np.arange(n_max, dtype=float)
    if nbar == 0:
        f = (n == 0).astype(float)
        tail = 0.0
    else:
        ratio = nbar / (nbar + 1.0)
        f = np.exp(n * math.log(ratio)) / (nbar + 1.0)
        tail = ratio**n_max
    return (f, tail) if full_output else f


def reference_state_matrix(
    ref: GaussianRef,
    n_max: int,
    work_dim: int | None = None,
    full_output: bool = False,
):
    """Fock matrix of the Gaussian reference state.

    ``tau = S diag(f) S^dag``, conjugated by ``D(alpha)`` when ``alpha != 0``.
    The matrices are built on ``work_dim >= n_max`` levels (default
    ``n_max``) and cropped. The result is Hermitized and renormalized; with
    ``full_output=True`` the pre-normalization trace deficit is returned too.
    """
    dim = n_max if work_dim is None else max(int(work_dim), n_max)
    S = squeezing_matrix(ref.xi_r, ref.xi_phi, dim)
    f = thermal_weights(ref.nbar, dim)
    tau = (S * f[None, :]) @ S.conj().T
    if ref.alpha != 0:
        D = displacement_matrix(ref.alpha, dim)
        tau = D @ tau @ D.conj().T
    tau = tau[:n_max, :n_max]
    tau = 0.5 * (tau + tau.conj().T)
    tr = np.trace(tau).real
    deficit = 1.0 - tr
    tau = tau / tr
    return (tau, deficit) if full_output else tau


def _mode_operator_number(ref: GaussianRef, dim: int) -> NDArray[np.complex128]:
    """``K = b^dag b`` for ``b = mu (a - alpha) + nu (a^dag - alpha^*)`` on ``dim`` levels.

    ``mu = cosh r``, ``nu = e^{i phi} sinh r``. The product ``a a^dag`` is
    replaced by ``a^dag a + 1`` so the truncation edge adds no error to the
    retained block.
    """
    mu = math.cosh(ref.xi_r)
    nu = complex(math.cos(ref.xi_phi), math.sin(ref.xi_phi)) * math.sinh(ref.xi_r)
    b0 = mu * ref.alpha + nu * ref.alpha.conjugate()
    a = annihilation_matrix(dim)
    ad = a.conj().T
    num = np.diag(np.arange(dim, dtype=float))
    eye = np.eye(dim)
    K = (
        (mu * mu + abs(nu) ** 2) * num
        + abs(nu) ** 2 * eye
        + mu * nu * (ad @ ad)
        + mu * nu.conjugate() * (a @ a)
        - b0 * (mu * ad + nu.conjugate() * a)
        - b0.conjugate() * (mu * a + nu * ad)
        + abs(b0) ** 2 * eye
    )
    return 0.5 * (K + K.conj().T)


def _gibbs_matrix(ref: GaussianRef, dim: int) -> NDArray[np.complex128]:
    lam, vecs = np.linalg.eigh(_mode_operator_number(ref, dim))
    if ref.nbar == 0.0:
        w = np.zeros(dim)
        w[0] = 1.0
    else:
        x = ref.nbar / (ref.nbar + 1.0)
        w = (1.0 - x) * np.exp(np.clip(lam, 0.0, None) * math.log(x))
    tau = (vecs * w[None, :]) @ vecs.conj().T
    return 0.5 * (tau + tau.conj().T)


def gaussian_work_dim(ref: GaussianRef, n_max: int) -> int:
    """Initial padded dimension from the reference's mean photon number."""
    mean_n = abs(ref.alpha) ** 2 + (ref.nbar + 0.5) * math.cosh(2 * ref.xi_r) - 0.5
    spread = math.sqrt(max(mean_n, 1.0)) * math.exp(ref.xi_r) * math.sqrt(2 * ref.nbar + 1)
    return int(min(MAX_WORK_DIM, max(n_max + 20, math.ceil(mean_n + 12 * spread + 20))))


def gaussian_state_matrix(
    ref: GaussianRef,
    n_max: int | None = None,
    work_dim: int | None = None,
    full_output: bool = False,
):
    """Fock matrix of the Gaussian reference in Gibbs form ``(1-x) x^{b^dag b}``.

    Built on a padded basis that grows until the last Fock levels carry less
    than ``1e-14`` of weight. The padded matrix is returned without
    cropping or renormalization, so states living on ``n_max`` levels should
    be zero-padded to ``tau.shape[0]`` before comparison. With
    ``full_output=True`` the missing trace ``1 - Tr tau`` is returned too.
    """
    dim = work_dim if work_dim is not None else gaussian_work_dim(ref, n_max or 2)
    if n_max is not None:
        dim = max(dim, n_max)
    while True:
        tau = _gibbs_matrix(ref, dim)
        edge = np.abs(np.diagonal(tau)[-8:]).max()
        if work_dim is not None or edge < EDGE_TOL or dim >= MAX_WORK_DIM:
            break
        dim = min(MAX_WORK_DIM, int(dim * 1.5))
    deficit = 1.0 - float(np.trace(tau).real)
    return (tau, deficit) if full_output else tau
