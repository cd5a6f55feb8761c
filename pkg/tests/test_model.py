import math
import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from qopo.errors import NegativePump, NonPositiveRate, TruncationTooSmall
from qopo.model import (
    ModelParams,
    annihilation_matrix,
    creation_matrix,
    displacement_matrices,
    displacement_matrix,
    laguerre_table,
    number_matrix,
    squeezing_matrix,
    unitarity_residual,
    validate_params,
)


def expm_displacement(z, n, big=200):
    a = annihilation_matrix(big)
    return sla.expm(z * a.conj().T - np.conj(z) * a)[:n, :n]


def expm_squeezing(r, phi, n, big=400):
    a = annihilation_matrix(big)
    ad = a.conj().T
    xi = r * np.exp(1j * phi)
    return sla.expm(0.5 * (np.conj(xi) * a @ a - xi * ad @ ad))[:n, :n]


class TestParams:
    def test_paper_point_is_valid(self):
        p = validate_params(h=1.0, g=0.5, beta=0.1, F=0.0, n_max=40)
        assert p.h_th == 1.0

    def test_boundary_truncation(self):
        assert validate_params({"h": 0, "g": 0.5, "beta": 0.1, "F": 0, "n_max": 2}).n_max == 2

    @pytest.mark.parametrize(
        "kwargs, exc",
        [
            (dict(h=1, g=-0.5, beta=0.1), NonPositiveRate),
            (dict(h=1, g=0.5, beta=0.0), NonPositiveRate),
            (dict(h=-0.1, g=0.5, beta=0.1), NegativePump),
            (dict(h=1, g=0.5, beta=0.1, n_max=1), TruncationTooSmall),
            (dict(h=1, g=0.5, beta=0.1, n_max=12.5), TruncationTooSmall),
        ],
    )
    def test_rejects_without_clamping(self, kwargs, exc):
        with pytest.raises(exc):
            validate_params(**kwargs)

    def test_unknown_field(self):
        with pytest.raises(TypeError):
            validate_params(h=1, g=0.5, beta=0.1, gamma=3)

    def test_frozen(self):
        p = ModelParams(1.0, 0.5, 0.1)
        with pytest.raises(AttributeError):
            p.h = 2.0
        assert p.replace(h=2.0).h == 2.0


class TestLadder:
    def test_two_level(self):
        np.testing.assert_array_equal(annihilation_matrix(2), [[0, 1], [0, 0]])

    def test_three_level(self):
        a = annihilation_matrix(3)
        assert a[0, 1] == 1 and a[1, 2] == math.sqrt(2)
        assert np.count_nonzero(a) == 2

    def test_number_from_ladder(self):
        a = annihilation_matrix(17)
        ada = a.conj().T @ a
        # structure is exact; sqrt(n)**2 is n only to one ulp
        assert np.count_nonzero(ada - np.diag(np.diagonal(ada))) == 0
        np.testing.assert_allclose(np.diagonal(ada).real, np.arange(17), rtol=3e-16, atol=0)
        np.testing.assert_array_equal(number_matrix(17), np.diag(np.arange(17)))
        np.testing.assert_array_equal(creation_matrix(17), a.conj().T)

    def test_too_small(self):
        with pytest.raises(TruncationTooSmall):
            annihilation_matrix(1)


class TestDisplacement:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(displacement_matrix(0.0, 12), np.eye(12), atol=1e-15)

    @pytest.mark.parametrize("z", [0.3, 1.1 - 0.4j, -2.0j, 2.5 + 1.5j])
    def test_low_elements(self, z):
        D = displacement_matrix(z, 10)
        assert abs(D[0, 0] - math.exp(-abs(z) ** 2 / 2)) < 1e-14
        assert abs(D[1, 0] - z * math.exp(-abs(z) ** 2 / 2)) < 1e-14

    @pytest.mark.parametrize("z", [0.4 + 0.2j, 1.7 - 1.1j, 3.0])
    def test_matches_matrix_exponential(self, z):
        assert np.abs(displacement_matrix(z, 30) - expm_displacement(z, 30)).max() < 1e-12

    @pytest.mark.parametrize("z", [1.0, 2.0 + 1.0j, 3.0])
    def test_unitarity_residual_shrinks(self, z):
        res = [unitarity_residual(displacement_matrix(z, n)) for n in (20, 40, 80, 200)]
        assert all(y < x or y < 1e-13 for x, y in zip(res, res[1:]))
        assert res[-1] < 1e-8

    @settings(max_examples=30, deadline=None)
    @given(
        st.floats(-3, 3, allow_nan=False),
        st.floats(-3, 3, allow_nan=False),
    )
    def test_inverse_is_adjoint(self, x, y):
        z = complex(x, y)
        assert np.abs(displacement_matrix(-z, 25) - displacement_matrix(z, 25).conj().T).max() < 1e-12

    def test_batched_matches_single(self):
        zs = np.array([[0.1, 1j], [2 - 1j, -0.5]])
        D = displacement_matrices(zs, 8)
        assert D.shape == (2, 2, 8, 8)
        for idx in np.ndindex(2, 2):
            np.testing.assert_array_equal(D[idx], displacement_matrix(zs[idx], 8))

    def test_large_truncation_does_not_overflow(self):
        D = displacement_matrix(4.0 + 3.0j, 200)
        assert np.all(np.isfinite(D))

    def test_laguerre_low_orders(self):
        x = np.array([0.0, 0.7, 3.2])
        L = laguerre_table(x, 4)
        np.testing.assert_allclose(L[2, 1], 3 - x)
        np.testing.assert_allclose(L[1, 2], (x**2 - 6 * x + 6) / 2)


class TestSqueezing:
    def test_zero_is_identity(self):
        np.testing.assert_array_equal(squeezing_matrix(0.0, 0.4, 9), np.eye(9))

    @pytest.mark.parametrize("r", [0.1, 0.8, 1.5])
    def test_vacuum_element(self, r):
        assert abs(squeezing_matrix(r, 0.3, 6)[0, 0] - math.cosh(r) ** -0.5) < 1e-15

    def test_parity_selection_is_exact(self):
        S = squeezing_matrix(0.9, 1.3, 30)
        odd = (np.add.outer(np.arange(30), np.arange(30)) % 2) == 1
        assert np.all(S[odd] == 0)
        assert S[1, 0] == 0

    @pytest.mark.parametrize("r, phi", [(0.3, 0.0), (1.0, 0.7), (1.5, np.pi), (1.2, -2.0)])
    def test_matches_matrix_exponential(self, r, phi):
        assert np.abs(squeezing_matrix(r, phi, 40) - expm_squeezing(r, phi, 40)).max() < 1e-9

    @pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
    def test_columns_orthonormal_up_to_truncation(self, r):
        S = squeezing_matrix(r, 0.2, 40)
        gram = S.conj().T @ S
        # the only defect is the weight each column carries above n_max
        full = expm_squeezing(r, 0.2, 400)[:, :40]
        kept = full[:40].conj().T @ full[:40]
        assert np.abs(gram - kept).max() < 1e-9
        assert np.abs(full.conj().T @ full - np.eye(40))[:20, :20].max() < 1e-9

    def test_negative_real_xi_is_phi_pi(self):
        r = 0.6
        a = annihilation_matrix(300)
        ad = a.conj().T
        xi = -r
        ref = sla.expm(0.5 * (xi * a @ a - xi * ad @ ad))[:20, :20]
        assert np.abs(squeezing_matrix(r, np.pi, 20) - ref).max() < 1e-12

    def test_cancellation_warning_at_large_truncation(self):
        with pytest.warns(RuntimeWarning, match="cancellation"):
            squeezing_matrix(1.0, 0.0, 70)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            squeezing_matrix(1.5, 0.0, 40)

    def test_rejects_negative_r(self):
        with pytest.raises(ValueError):
            squeezing_matrix(-0.1, 0.0, 5)
