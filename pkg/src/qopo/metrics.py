"""Non-Gaussianity measures of a Fock-basis state against its Gaussian reference.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch
from .gaussian import GaussianRef, fit_gaussian, gaussian_state_matrix, moments

EIG_CUTOFF = 1e-14


def _same_shape(a: NDArray, b: NDArray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")


def purity(rho: NDArray) -> float:
    """``Tr rho^2 = sum |rho_mn|^2`` for Hermitian ``rho``."""
    rho = np.asarray(rho)
    return float(np.sum(np.abs(rho) ** 2))


def overlap(rho: NDArray, tau: NDArray) -> float:
    """``Tr[rho tau] = sum rho_mn tau_mn^*`` for Hermitian matrices."""
    rho, tau = np.asarray(rho), np.asarray(tau)
    _same_shape(rho, tau)
    return float(np.sum(rho * tau.conj()).real)


def hs_nongaussianity(rho: NDArray, tau: NDArray, nbar: float | None = None) -> float:
    """Normalized squared Hilbert-Schmidt distance ``D_HS^2 / (2 Tr rho^2)``.

    ``Tr tau^2`` is the analytic thermal purity ``1/(2 nbar + 1)`` when
    ``nbar`` is given, else the Fock-space sum.
    """
    rho, tau = np.asarray(rho), np.asarray(tau)
    _same_shape(rho, tau)
    p_rho = purity(rho)
    p_tau = 1.0 / (2.0 * nbar + 1.0) if nbar is not None else purity(tau)
    return (p_rho + p_tau - 2.0 * overlap(rho, tau)) / (2.0 * p_rho)


def von_neumann_entropy(rho: NDArray) -> float:
    lam = np.linalg.eigvalsh(0.5 * (np.asarray(rho) + np.asarray(rho).conj().T))
    if lam.min() < -1e-9:
        raise ValueError(f"state is not positive semidefinite (min eigenvalue {lam.min():.3e})")
    lam = lam[lam > EIG_CUTOFF]
    return float(-np.sum(lam * np.log(lam)))


def relative_entropy_ng(rho: NDArray, ref: GaussianRef) -> float:
    """``S(tau) - S(rho)`` with the analytic thermal entropy for ``S(tau)``.

    Only needs ``rho`` and the fitted ``nbar``; no Fock matrix of ``tau``.
    """
    return ref.entropy - von_neumann_entropy(rho)


def photon_distance(rho: NDArray, tau: NDArray) -> float:
    """Squared Euclidean distance between the two photon-number distributions."""
    rho, tau = np.asarray(rho), np.asarray(tau)
    _same_shape(rho, tau)
    d = np.diagonal(rho).real - np.diagonal(tau).real
    return float(np.sum(d * d))


@dataclass(frozen=True)
class MetricsRecord:
    delta_hs: float
    s_entropy: float
    q_photon: float
    purity_rho: float
    purity_tau: float
    purity_tau_fock: float
    overlap: float
    mean_photon: float
    mean_X: float
    mean_P: float
    sigma11: float
    sigma22: float
    sigma12: float
    nbar: float
    xi_r: float
    xi_phi: float
    alpha_re: float
    alpha_im: float
    tau_trace_deficit: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def pad_to(rho: NDArray, dim: int) -> NDArray[np.complex128]:
    """Embed ``rho`` in the leading block of a ``dim`` x ``dim`` zero matrix."""
    rho = np.asarray(rho, dtype=complex)
    if dim < rho.shape[0]:
        raise DimensionMismatch(f"cannot pad {rho.shape} down to {dim}")
    out = np.zeros((dim, dim), dtype=complex)
    out[: rho.shape[0], : rho.shape[0]] = rho
    return out


def compute_metrics(rho: NDArray, work_dim: int | None = None) -> MetricsRecord:
    """Fit the Gaussian reference of ``rho`` and evaluate all three measures.

    The reference is built on a padded Fock basis and ``rho`` is zero-padded
    to match, so the values do not depend on the truncation of ``rho`` once
    ``rho`` itself has converged.
    """
    rho = np.asarray(rho, dtype=complex)
    mom = moments(rho)
    ref = fit_gaussian(mom)
    tau, deficit = gaussian_state_matrix(ref, rho.shape[0], work_dim=work_dim, full_output=True)
    rho = pad_to(rho, tau.shape[0])
    n = np.arange(rho.shape[0])
    return MetricsRecord(
        delta_hs=hs_nongaussianity(rho, tau, nbar=ref.nbar),
        s_entropy=relative_entropy_ng(rho, ref),
        q_photon=photon_distance(rho, tau),
        purity_rho=purity(rho),
        purity_tau=ref.purity,
        purity_tau_fock=purity(tau),
        overlap=overlap(rho, tau),
        mean_photon=float(np.sum(n * np.diagonal(rho).real)),
        mean_X=mom.mean_X,
        mean_P=mom.mean_P,
        sigma11=float(mom.sigma[0, 0]),
        sigma22=float(mom.sigma[1, 1]),
        sigma12=float(mom.sigma[0, 1]),
        nbar=ref.nbar,
        xi_r=ref.xi_r,
        xi_phi=ref.xi_phi,
        alpha_re=ref.alpha.real,
        alpha_im=ref.alpha.imag,
        tau_trace_deficit=float(deficit),
    )
