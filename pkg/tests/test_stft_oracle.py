from math import exp, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import random_signal, seeds
from phaseless.errors import GridTooCoarse
from phaseless.frames_c2 import FIG1_FRAME, FrameC2
from phaseless.hermite_bargmann import HermiteSignal, bargmann, eta
from phaseless.stft_oracle import (QuadratureGrid, ambiguity_search_c2, certificate_polynomial,
                                   lifted_measurements, phase_distance, stft_quadrature,
                                   weighted_norm_quadrature)

H0 = HermiteSignal([1])
H1 = HermiteSignal([0, 1])


def trimmed(c, rtol=1e-12):
    keep = np.flatnonzero(np.abs(c) > rtol * np.max(np.abs(c)))
    return c[: keep[-1] + 1]


class TestQuadrature:
    def test_unit_inner_product(self):
        assert abs(stft_quadrature(H0, H0, (0, 0)) - 1) <= 1e-8

    def test_shifted_gaussian(self):
        assert abs(stft_quadrature(H0, H0, (1, 0))) == pytest.approx(exp(-pi / 2), abs=1e-6)

    def test_orthogonality(self):
        assert abs(stft_quadrature(H1, H0, (0, 0))) <= 1e-8

    def test_trapezoid_rule_agrees(self):
        f = random_signal(3, 4)
        g = QuadratureGrid(rule="trapezoid", nodes=512)
        assert stft_quadrature(f, H0, (0.5, -1.0), g) == pytest.approx(
            stft_quadrature(f, H0, (0.5, -1.0)), abs=1e-10)

    def test_coarse_grid_detected(self):
        with pytest.raises(GridTooCoarse):
            stft_quadrature(H0, H0, (0, 0), QuadratureGrid(half_width=200, nodes=64,
                                                          rule="trapezoid"))

    @pytest.mark.parametrize("kwargs", [dict(half_width=0), dict(nodes=10), dict(rule="simpson")])
    def test_grid_validation(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureGrid(**kwargs)

    def test_weighted_norm_of_monomial(self):
        # ||z^n||_alpha^2 = n! / alpha^n
        assert weighted_norm_quadrature(lambda z: z ** 3, 2.0) == pytest.approx(sqrt(6 / 8))


class TestAmbiguitySearch:
    def test_collinear_frame(self):
        frame = [(1, 0), (0, 1), (1, 1), (2, 1)]
        pair = ambiguity_search_c2(frame, trials=10)
        assert pair is not None
        z, w = pair
        f = FrameC2(frame)
        np.testing.assert_allclose(f.magnitudes(z), f.magnitudes(w), atol=1e-10)
        assert phase_distance(z, w) > 1e-6

    def test_fig1_frame_has_no_ambiguity(self):
        assert ambiguity_search_c2(FIG1_FRAME, trials=100_000, rng_seed=1) is None

    def test_single_vector(self):
        z, w = ambiguity_search_c2([(1, 0)], trials=1)
        assert abs(np.vdot((1, 0), z)) == pytest.approx(abs(np.vdot((1, 0), w)))
        assert phase_distance(z, w) > 1e-6

    def test_random_search_finds_hidden_ambiguity(self):
        # three vectors: the lifted map has a null matrix, but check the search too
        from phaseless.stft_oracle import _random_search
        frame = np.array([(1, 0), (0, 1), (1, 1)], dtype=complex)
        z, w = _random_search(frame, 4096, np.random.default_rng(0))
        np.testing.assert_allclose(np.abs(frame.conj() @ z), np.abs(frame.conj() @ w),
                                   atol=1e-10)
        assert phase_distance(z, w) > 1e-6

    def test_deterministic(self):
        frame = [(1, 0), (0, 1), (1, 1)]
        a = ambiguity_search_c2(frame, trials=100, rng_seed=7)
        b = ambiguity_search_c2(frame, trials=100, rng_seed=7)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            ambiguity_search_c2(FIG1_FRAME, trials=0)
        with pytest.raises(ValueError):
            ambiguity_search_c2(np.zeros((0, 2)), trials=1)

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_lifting_identity(self, seed):
        rng = np.random.default_rng(seed)
        phi = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        Z = np.outer(z, z.conj())
        lifted = lifted_measurements(phi) @ [Z[0, 0].real, Z[1, 1].real, Z[0, 1].real,
                                             Z[0, 1].imag]
        np.testing.assert_allclose(lifted, np.abs(phi.conj() @ z) ** 2, atol=1e-10)

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_phase_distance_invariance(self, seed):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        tau = np.exp(1j * rng.uniform(0, 2 * pi))
        assert phase_distance(z, tau * z) <= 1e-12 * np.linalg.norm(z)


class TestCertificate:
    def test_identical_signals(self):
        f = random_signal(0, 5)
        assert np.max(np.abs(certificate_polynomial(f, f).coeffs)) <= 1e-12

    def test_h0_h1(self):
        G = certificate_polynomial(H0, H1)
        np.testing.assert_allclose(G.coeffs, [0, pi], atol=1e-14)
        assert G.alpha == 4 * pi

    def test_phase_changes_only_scale(self):
        f, h = random_signal(1, 3), random_signal(2, 3)
        tau = np.exp(0.7j)
        G = certificate_polynomial(f, h)
        Gt = certificate_polynomial(f.scaled(tau), h)
        a, b = trimmed(Gt.coeffs), trimmed(G.coeffs)
        np.testing.assert_allclose(a, tau ** 2 * b, atol=1e-12)
        np.testing.assert_allclose(np.sort_complex(np.roots(a[::-1])),
                                   np.sort_complex(np.roots(b[::-1])), atol=1e-6)

    @pytest.mark.parametrize("degree", [1, 4, 7])
    def test_degree_bound(self, degree):
        G = certificate_polynomial(random_signal(5, degree), random_signal(6, degree))
        assert G.degree <= 4 * degree - 1

    @given(seeds)
    @settings(max_examples=10, deadline=None)
    def test_fock_chain(self, seed):
        # each of the two terms is bounded by sqrt(2 pi) ||f|| ||h||
        f, h = random_signal(seed, 4), random_signal(seed + 1, 4)
        F, H = bargmann(f), bargmann(h)
        dF, dH = F.derivative(), H.derivative()

        def first(z):
            return (dF(z) - pi * np.conj(z) * F(z)) * H(z)

        def second(z):
            return F(z) * (dH(z) - pi * np.conj(z) * H(z))

        bound = sqrt(2 * pi) * f.norm * h.norm
        assert weighted_norm_quadrature(first, 2 * pi) <= bound * (1 + 1e-8)
        assert weighted_norm_quadrature(second, 2 * pi) <= bound * (1 + 1e-8)
        diff = weighted_norm_quadrature(lambda z: first(z) - second(z), 2 * pi)
        assert diff <= 2 * bound * (1 + 1e-8)
        # the difference equals F H' - F' H, a polynomial in F^2_{2 pi}
        wr = F * dH - dF * H
        assert diff == pytest.approx(weighted_norm_quadrature(wr, 2 * pi), rel=1e-8)

    def test_eta_modulus_used_in_chain(self):
        z = 0.3 - 0.8j
        assert abs(eta(z)) == pytest.approx(exp(pi / 2 * abs(z) ** 2))
