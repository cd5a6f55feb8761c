import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import solve
from qopo.errors import UnphysicalCovariance
from qopo.gaussian import (
    GaussianRef,
    MomentData,
    fit_gaussian,
    gaussian_state_matrix,
    moments,
    reference_state_matrix,
    thermal_weights,
)
from qopo.metrics import pad_to


def md(s11, s22, s12=0.0, x=0.0, p=0.0):
    return MomentData(x, p, np.array([[s11, s12], [s12, s22]]))


def thermal_rho(nbar, n):
    return np.diag(thermal_weights(nbar, n)).astype(complex)


class TestMoments:
    def test_vacuum(self, vacuum40):
        m = moments(vacuum40)
        assert (m.mean_X, m.mean_P) == (0.0, 0.0)
        np.testing.assert_allclose(m.sigma, np.eye(2) / 2, atol=1e-15)
        assert m.nu == pytest.approx(0.5)

    def test_thermal(self):
        m = moments(thermal_rho(1.0, 80))
        np.testing.assert_allclose(m.sigma, 1.5 * np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("h", [0.5, 1.5, 2.2])
    def test_zero_field_structure(self, h):
        m = moments(solve(h).entries)
        assert abs(m.mean_X) <= 1e-9 and abs(m.mean_P) <= 1e-9
        assert abs(m.sigma[0, 1]) <= 1e-10
        assert m.sigma[0, 0] > m.sigma[1, 1]

    def test_matches_operator_traces(self):
        rho = solve(1.5, 0.1).entries
        n = 40
        a = np.diag(np.sqrt(np.arange(1, n)), 1)
        X = (a + a.T) / math.sqrt(2)
        P = (a - a.T) / (1j * math.sqrt(2))
        mx, mp = np.trace(X @ rho).real, np.trace(P @ rho).real
        m = moments(rho)
        assert m.mean_X == pytest.approx(mx, abs=1e-13)
        assert m.mean_P == pytest.approx(mp, abs=1e-13)
        # interior check: X^2 is accurate as long as rho has no weight at the edge
        s11 = np.trace(X @ X @ rho).real - mx**2
        assert m.sigma[0, 0] == pytest.approx(s11, abs=1e-9)

    def test_symmetric(self):
        m = moments(solve(1.4, -0.2, n_max=20).entries)
        assert m.sigma[0, 1] == m.sigma[1, 0]


class TestFit:
    def test_vacuum(self):
        ref = fit_gaussian(md(0.5, 0.5))
        assert (ref.alpha, ref.xi_r, ref.xi_phi, ref.nbar) == (0, 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("r0", [0.2, 0.7, 1.2])
    def test_squeezed_diagonal_gives_negative_real_xi(self, r0):
        ref = fit_gaussian(md(math.exp(2 * r0) / 2, math.exp(-2 * r0) / 2))
        assert ref.nbar == pytest.approx(0.0, abs=1e-12)
        xi = ref.xi_r * complex(math.cos(ref.xi_phi), math.sin(ref.xi_phi))
        assert xi.real == pytest.approx(-r0, abs=1e-12)
        assert abs(xi.imag) < 1e-12
        assert ref.xi_phi == math.pi

    def test_thermal(self):
        ref = fit_gaussian(md(1.5, 1.5))
        assert ref.nbar == pytest.approx(1.0)
        assert ref.xi_r == 0.0 and ref.xi_phi == 0.0

    def test_displacement(self):
        ref = fit_gaussian(md(0.5, 0.5, x=1.0, p=-2.0))
        assert ref.alpha == pytest.approx(complex(1.0, -2.0) / math.sqrt(2))

    def test_uncertainty_violation(self):
        with pytest.raises(UnphysicalCovariance):
            fit_gaussian(md(0.4, 0.5))

    @settings(max_examples=80, deadline=None)
    @given(
        nbar=st.floats(0, 5),
        r=st.floats(0, 1.5),
        phi=st.floats(-math.pi + 1e-6, math.pi),
    )
    def test_covariance_reconstruction(self, nbar, r, phi):
        sigma = GaussianRef(0j, r, phi, nbar).covariance()
        ref = fit_gaussian(MomentData(0.0, 0.0, sigma))
        assert np.abs(ref.covariance() - sigma).max() <= 1e-9 * max(1.0, np.abs(sigma).max())
        assert ref.nbar == pytest.approx(nbar, abs=1e-9)
        if r > 1e-6:
            assert ref.xi_r == pytest.approx(r, abs=1e-9)
            assert math.remainder(ref.xi_phi - phi, 2 * math.pi) == pytest.approx(0, abs=1e-6)
        assert -math.pi < ref.xi_phi <= math.pi


class TestThermal:
    def test_vacuum_weights(self):
        f, tail = thermal_weights(0.0, 5, full_output=True)
        np.testing.assert_array_equal(f, [1, 0, 0, 0, 0])
        assert tail == 0.0

    def test_geometric(self):
        f = thermal_weights(1.0, 3)
        np.testing.assert_allclose(f, [0.5, 0.25, 0.125], rtol=1e-15)

    @pytest.mark.parametrize("nbar", [0.3, 1.0, 5.0])
    def test_tail(self, nbar):
        f, tail = thermal_weights(nbar, 30, full_output=True)
        assert tail == pytest.approx((nbar / (nbar + 1)) ** 30, rel=1e-12)
        assert 1 - f.sum() == pytest.approx(tail, abs=1e-14)

    @pytest.mark.parametrize("nbar", [0.0, 0.5, 1.0, 4.0])
    def test_purity_and_entropy(self, nbar):
        ref = GaussianRef(0j, 0.0, 0.0, nbar)
        assert ref.purity == pytest.approx(1 / (2 * nbar + 1), abs=1e-15)
        f = thermal_weights(nbar, 400)
        f = f[f > 0]
        assert ref.entropy == pytest.approx(-np.sum(f * np.log(f)), abs=1e-10)

    def test_negative(self):
        with pytest.raises(ValueError):
            thermal_weights(-0.1, 4)


class TestReferenceMatrix:
    def test_thermal_is_diagonal(self):
        tau, deficit = reference_state_matrix(GaussianRef(0j, 0.0, 0.0, 1.0), 40, full_output=True)
        f, tail = thermal_weights(1.0, 40, full_output=True)
        np.testing.assert_allclose(tau, np.diag(f / f.sum()), atol=1e-15)
        assert deficit == pytest.approx(tail, abs=1e-15)

    def test_real_squeezing_gives_real_symmetric(self):
        tau = reference_state_matrix(GaussianRef(0j, 0.6, math.pi, 0.4), 40)
        assert np.abs(tau.imag).max() < 1e-15
        assert np.abs(tau - tau.T).max() < 1e-15

    def test_purity_converges(self):
        ref = GaussianRef(0j, 0.5, 0.3, 0.8)
        gaps = [abs(np.sum(np.abs(reference_state_matrix(ref, n)) ** 2) - ref.purity) for n in (10, 20, 40)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-5

    @pytest.mark.filterwarnings("ignore:.*cancellation:RuntimeWarning")
    @pytest.mark.parametrize(
        "ref",
        [GaussianRef(0.7 - 0.3j, 0.5, 1.1, 0.3), GaussianRef(1.5 + 0j, 0.9, math.pi, 0.0), GaussianRef(0.2j, 0.0, 0.0, 1.2)],
    )
    def test_gibbs_form_equals_product_form(self, ref):
        gibbs = gaussian_state_matrix(ref, 30, work_dim=120)[:30, :30]
        product = reference_state_matrix(ref, 200)
        assert np.abs(gibbs - product[:30, :30]).max() < 1e-10

    def test_valid_density_matrix(self):
        tau = reference_state_matrix(GaussianRef(1.0 + 0.5j, 0.8, 0.4, 0.6), 40)
        assert np.abs(tau - tau.conj().T).max() == 0
        assert np.trace(tau).real == pytest.approx(1.0, abs=1e-14)
        assert np.linalg.eigvalsh(tau).min() >= -1e-9

    def test_gibbs_padding_reaches_edge_tolerance(self):
        ref = GaussianRef(0j, 0.87, math.pi, 1.63)
        tau, deficit = gaussian_state_matrix(ref, 40, full_output=True)
        assert tau.shape[0] > 40
        assert np.diagonal(tau)[-8:].real.max() < 1e-14
        assert abs(deficit) < 1e-12


class TestRoundTrip:
    # the widest corner (r=1.2, nbar=5) needs ~1700 levels and is covered by the acceptance suite
    BOX = [
        GaussianRef(complex(a), r, phi, nbar)
        for a in (0.0, 1.0 - 1.0j, 3.0)
        for r in (0.0, 0.6, 1.2)
        for phi in (0.0, 2.0)
        for nbar in (0.0, 1.0, 5.0)
        if not (r == 1.2 and nbar == 5.0)
    ]

    @pytest.mark.parametrize("ref", BOX, ids=lambda g: f"a={g.alpha},r={g.xi_r},phi={g.xi_phi},n={g.nbar}")
    def test_padded_reference_round_trip(self, ref):
        tau = gaussian_state_matrix(ref, 40)
        back = fit_gaussian(moments(tau))
        assert abs(back.alpha - ref.alpha) <= 1e-6
        assert back.nbar == pytest.approx(ref.nbar, abs=1e-6)
        assert back.xi_r == pytest.approx(ref.xi_r, abs=1e-6)

    @pytest.mark.parametrize("ref", [GaussianRef(0.3 + 0.2j, 0.3, 0.5, 0.2), GaussianRef(0j, 0.5, math.pi, 0.0)])
    def test_cropped_reference_round_trip_small_states(self, ref):
        back = fit_gaussian(moments(reference_state_matrix(ref, 40)))
        assert abs(back.alpha - ref.alpha) <= 1e-6
        assert back.nbar == pytest.approx(ref.nbar, abs=1e-6)
        assert back.xi_r == pytest.approx(ref.xi_r, abs=1e-6)

    def test_cropped_reference_fails_for_wide_states(self):
        # weight beyond 40 photons is cut off and the fit drifts
        ref = GaussianRef(0j, 1.2, 0.0, 5.0)
        back = fit_gaussian(moments(reference_state_matrix(ref, 40)))
        assert abs(back.nbar - ref.nbar) > 1e-2


def test_pad_preserves_moments():
    rho = solve(1.5, 0.1, n_max=20).entries
    big = pad_to(rho, 35)
    a, b = moments(rho), moments(big)
    assert np.abs(a.sigma - b.sigma).max() < 1e-13
    assert (a.mean_X, a.mean_P) == pytest.approx((b.mean_X, b.mean_P), abs=1e-14)
