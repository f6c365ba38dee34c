import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stcov.geom import RFParams, rotation
from stcov.kernels import TemporalKernelSpec, spatiotemporal_kernel
from stcov.scspace import (DerivativeSpec, derivative,
                           directional_terms, is_eigendirection, lgn_response,
                           eigendirection_angles, simple_cell_response, smooth,
                           substitute_terms, term_add, term_multiply,
                           term_power, total_order, velocity_adapted_terms)
from stcov.volume import VideoVolume, constant_volume

GAUSS = TemporalKernelSpec()


def gaussian_blob(shape, center, s_spatial, tau_temporal, spacing=(1.0, 1.0, 1.0)):
    i, j, k = np.meshgrid(*(np.arange(n) * d for n, d in zip(shape, spacing)),
                          indexing="ij")
    r2 = (i - center[0]) ** 2 + (j - center[1]) ** 2
    g = np.exp(-r2 / (2 * s_spatial)) / (2 * np.pi * s_spatial)
    h = np.exp(-(k - center[2]) ** 2 / (2 * tau_temporal)) / np.sqrt(2 * np.pi * tau_temporal)
    return VideoVolume(g * h, spacing)


class TestTermAlgebra:
    def test_multiply_adds_orders(self):
        out = term_multiply({(1, 0, 0): 2.0}, {(0, 1, 1): 3.0})
        assert out == {(1, 1, 1): 6.0}

    def test_add_cancels(self):
        assert term_add({(1, 0, 0): 1.0}, {(1, 0, 0): 1.0}, scale=-1.0) == {}

    def test_directional_binomial(self):
        phi = 0.6
        out = directional_terms(phi, 2)
        c, s = np.cos(phi), np.sin(phi)
        assert np.isclose(out[(2, 0, 0)], c * c)
        assert np.isclose(out[(1, 1, 0)], 2 * c * s)
        assert np.isclose(out[(0, 2, 0)], s * s)

    def test_velocity_adapted_expansion(self):
        out = velocity_adapted_terms((2.0, 0.0), 2)
        assert out == {(2, 0, 0): 4.0, (1, 0, 1): 4.0, (0, 0, 2): 1.0}

    def test_power_zero_is_unit(self):
        assert term_power({(1, 0, 0): 5.0}, 0) == {(0, 0, 0): 1.0}

    def test_substitute_identity(self):
        t = directional_terms(0.3, 2)
        assert substitute_terms(t, np.eye(3)) == pytest.approx(t)

    def test_substitute_composes(self, rng):
        # substitution by M then N equals substitution by M @ N
        t = term_multiply(velocity_adapted_terms((0.5, -0.3), 1),
                          {(1, 0, 0): 1.0})
        M, N = rng.standard_normal((2, 3, 3))
        a = substitute_terms(substitute_terms(t, M), N)
        b = substitute_terms(t, M @ N)
        for k in set(a) | set(b):
            assert np.isclose(a.get(k, 0.0), b.get(k, 0.0), atol=1e-12)

    def test_total_order(self):
        assert total_order({(2, 1, 1): 1.0, (0, 0, 1): 2.0}) == 4
        assert total_order({}) == 0


class TestDerivativeSpec:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            DerivativeSpec(kind="curl")

    def test_rejects_excessive_order(self):
        with pytest.raises(ValueError):
            DerivativeSpec(kind="partial", orders=(3, 1, 1))

    def test_laplacian_terms(self):
        t = DerivativeSpec(kind="laplacian", n=1).terms()
        assert t == {(2, 0, 1): 1.0, (0, 2, 1): 1.0}

    def test_lgn_sign(self):
        t = DerivativeSpec(kind="lgn", sign=-1).terms()
        assert t == {(2, 0, 0): -1.0, (0, 2, 0): -1.0}

    def test_json_round_trip(self):
        for d in (DerivativeSpec(kind="partial", orders=(1, 0, 1)),
                  DerivativeSpec(kind="directional", phi=0.4, m=2, n=1),
                  DerivativeSpec(kind="velocity_adapted", v=(1.0, 0.5), n=2),
                  DerivativeSpec(kind="simple_cell", phi=0.2, m1=2, m2=1,
                                 n=1, v=(0.3, 0.0))):
            assert DerivativeSpec.from_json(d.to_json()) == d


class TestSmooth:
    def test_constant_preserved(self):
        p = RFParams(s=2.0, Sigma=np.eye(2), tau=2.0, v=(0.0, 0.0))
        out = smooth(constant_volume(3.0, (32, 32, 24)), p, GAUSS)
        assert out.mask.any()
        assert np.allclose(out.data[out.mask], 3.0, rtol=1e-6)

    def test_impulse_reproduces_kernel(self):
        p = RFParams(s=2.0, Sigma=np.eye(2), tau=2.0, v=(0.5, 0.0))
        data = np.zeros((40, 40, 32))
        data[20, 20, 16] = 1.0
        out = smooth(VideoVolume(data), p, GAUSS)
        k = spatiotemporal_kernel(p, GAUSS)
        o1, o2, o3 = k.origin
        n1, n2, n3 = k.values.shape
        sub = out.data[20 - o1: 20 - o1 + n1,
                       20 - o2: 20 - o2 + n2,
                       16 - o3: 16 - o3 + n3]
        assert np.allclose(sub, k.values, atol=1e-12)

    def test_variance_addition(self):
        # smoothing a unit-mass Gaussian blob adds variances; check the peak
        s0, tau0, s, tau = 3.0, 3.0, 2.0, 2.0
        f = gaussian_blob((48, 48, 40), (24.0, 24.0, 20.0), s0, tau0)
        p = RFParams(s=s, Sigma=np.eye(2), tau=tau, v=(0.0, 0.0))
        out = smooth(f, p, GAUSS)
        peak = 1.0 / (2 * np.pi * (s0 + s)) / np.sqrt(2 * np.pi * (tau0 + tau))
        assert np.isclose(out.data[24, 24, 20], peak, rtol=1e-3)

    def test_shift_equivariance(self):
        f = gaussian_blob((40, 40, 32), (18.0, 20.0, 14.0), 3.0, 3.0)
        g = gaussian_blob((40, 40, 32), (21.0, 20.0, 14.0), 3.0, 3.0)
        p = RFParams(s=1.5, Sigma=np.eye(2), tau=1.5, v=(0.0, 0.0))
        a, b = smooth(f, p, GAUSS), smooth(g, p, GAUSS)
        m = a.mask[:-3] & b.mask[3:]
        assert m.any()
        assert np.allclose(a.data[:-3][m], b.data[3:][m], atol=1e-9)

    def test_linearity(self, rng):
        f = VideoVolume(rng.standard_normal((24, 24, 20)))
        g = VideoVolume(rng.standard_normal((24, 24, 20)))
        p = RFParams(s=1.0, Sigma=np.eye(2), tau=1.0, v=(0.0, 0.0))
        lhs = smooth(VideoVolume(2.0 * f.data - 3.0 * g.data), p, GAUSS)
        rhs = 2.0 * smooth(f, p, GAUSS).data - 3.0 * smooth(g, p, GAUSS).data
        assert np.allclose(lhs.data, rhs, atol=1e-10)

    def test_rejects_oversized_kernel(self):
        p = RFParams(s=25.0, Sigma=np.eye(2), tau=1.0, v=(0.0, 0.0))
        with pytest.raises(ValueError, match="volume too small"):
            smooth(constant_volume(1.0, (16, 16, 16)), p, GAUSS)


class TestDerivatives:
    def test_polynomial_exact(self):
        # 4th-order central differences are exact on these polynomials
        i, j, k = np.meshgrid(*(np.arange(16, dtype=float),) * 3, indexing="ij")
        vol = VideoVolume(i**3 + 2 * j**2 * k - k**2)
        d = derivative(vol, DerivativeSpec(kind="partial", orders=(1, 0, 0)))
        assert np.allclose(d.data[d.mask], (3 * i**2)[d.mask], atol=1e-8)
        d = derivative(vol, DerivativeSpec(kind="partial", orders=(0, 2, 1)))
        assert np.allclose(d.data[d.mask], 4.0, atol=1e-8)
        d = derivative(vol, DerivativeSpec(kind="partial", orders=(3, 0, 0)))
        assert np.allclose(d.data[d.mask], 6.0, atol=1e-7)

    def test_spacing_scaling(self):
        i = np.arange(16, dtype=float)
        vol = VideoVolume(np.broadcast_to((i**2)[:, None, None], (16, 8, 8)).copy(),
                          spacing=(0.5, 1.0, 1.0))
        # data[i] = i**2 with x = 0.5 i, so f(x) = 4 x**2 and f'' = 8
        d = derivative(vol, DerivativeSpec(kind="partial", orders=(2, 0, 0)))
        assert np.allclose(d.data[d.mask], 8.0, atol=1e-9)

    def test_directional_steering(self, rng):
        # the directional derivative equals the projected gradient sum
        f = VideoVolume(rng.standard_normal((20, 20, 12)))
        phi = 0.8
        d = derivative(f, DerivativeSpec(kind="directional", phi=phi, m=1))
        dx = derivative(f, DerivativeSpec(kind="partial", orders=(1, 0, 0)))
        dy = derivative(f, DerivativeSpec(kind="partial", orders=(0, 1, 0)))
        expect = np.cos(phi) * dx.data + np.sin(phi) * dy.data
        assert np.allclose(d.data[d.mask], expect[d.mask], atol=1e-12)

    def test_commutes_with_smoothing(self, rng):
        f = VideoVolume(rng.standard_normal((28, 28, 22)))
        p = RFParams(s=1.0, Sigma=np.eye(2), tau=1.0, v=(0.0, 0.0))
        spec = DerivativeSpec(kind="partial", orders=(1, 1, 0))
        a = derivative(smooth(f, p, GAUSS), spec)
        b = smooth(derivative(f, spec), p, GAUSS)
        m = a.mask & b.mask
        assert m.any()
        assert np.allclose(a.data[m], b.data[m], atol=1e-10)

    def test_velocity_adapted_annihilates_comoving_pattern(self):
        # D_t-bar = v d_x + d_t nulls any pattern translating at velocity v
        u = 1.0
        i, j, k = np.meshgrid(np.arange(48.0), np.arange(32.0), np.arange(32.0),
                              indexing="ij")
        data = np.exp(-(((i - u * k) - 12.0) ** 2 + (j - 16.0) ** 2) / (2 * 9.0))
        f = VideoVolume(data)
        adapted = derivative(f, DerivativeSpec(kind="velocity_adapted",
                                               v=(u, 0.0), n=1))
        plain = derivative(f, DerivativeSpec(kind="partial", orders=(0, 0, 1)))
        m = adapted.mask
        assert np.max(np.abs(adapted.data[m])) < 1e-3 * np.max(np.abs(plain.data[m]))

    def test_mask_erosion_by_stencil(self, rng):
        f = VideoVolume(rng.standard_normal((12, 12, 12)))
        d = derivative(f, DerivativeSpec(kind="partial", orders=(1, 0, 0)),
                       accuracy=4)
        assert not d.mask[:2].any() and not d.mask[-2:].any()
        assert d.mask[2:-2].all()

    def test_rejects_tiny_volume(self):
        with pytest.raises(ValueError, match="volume too small"):
            derivative(VideoVolume(np.zeros((3, 12, 12))),
                       DerivativeSpec(kind="partial", orders=(2, 0, 0)))


class TestIdealizedModels:
    def test_lgn_zero_crossing_radius(self):
        # center-surround response of a blob changes sign at r = sqrt(2(s+s0))
        s0, s = 4.0, 3.0
        f = gaussian_blob((64, 64, 32), (32.0, 32.0, 16.0), s0, 4.0)
        out = lgn_response(f, s=s, tau=2.0, sign=-1)
        r_expect = np.sqrt(2 * (s + s0))
        profile = out.data[32:, 32, 16]
        cross = np.nonzero(np.diff(np.sign(profile)))[0][0]
        # linear interpolation of the crossing position
        r_est = cross + profile[cross] / (profile[cross] - profile[cross + 1])
        assert abs(r_est - r_expect) < 0.02 * r_expect

    def test_lgn_sign_flip(self):
        f = gaussian_blob((40, 40, 24), (20.0, 20.0, 12.0), 4.0, 4.0)
        on = lgn_response(f, s=2.0, tau=2.0, sign=-1)
        off = lgn_response(f, s=2.0, tau=2.0, sign=1)
        assert np.allclose(on.data, -off.data, atol=1e-12)
        assert on.data[20, 20, 12] > 0  # bright blob excites the ON response

    def test_eigendirection_helpers(self):
        R = rotation(0.5)
        Sigma = R @ np.diag([4.0, 1.0]) @ R.T
        angs = eigendirection_angles(Sigma)
        assert any(np.isclose(a, 0.5, atol=1e-10) for a in angs)
        assert is_eigendirection(Sigma, 0.5)
        assert is_eigendirection(Sigma, 0.5 + np.pi / 2)
        assert not is_eigendirection(Sigma, 0.5 + 0.3)
        assert is_eigendirection(np.eye(2), 1.234)  # degenerate case

    def test_simple_cell_rejects_bad_orientation(self):
        f = constant_volume(0.0, (16, 16, 16))
        p = RFParams(s=1.0, Sigma=np.diag([4.0, 1.0]), tau=1.0, v=(0.0, 0.0))
        with pytest.raises(ValueError, match="eigendirection"):
            simple_cell_response(f, p, phi=0.7)

    def test_simple_cell_grating_amplitude(self):
        # Fourier oracle: first directional derivative of a smoothed grating
        # cos(w x1) has amplitude w * exp(-w^2 s lam1 / 2)
        w = 2 * np.pi / 12.0
        lam1 = 2.0
        s = 2.0
        i = np.arange(64.0)
        data = np.broadcast_to(np.cos(w * i)[:, None, None], (64, 32, 32)).copy()
        p = RFParams(s=s, Sigma=np.diag([lam1, 1.0]), tau=2.0, v=(0.0, 0.0))
        out = simple_cell_response(VideoVolume(data), p, phi=0.0, m1=1)
        amp = np.max(np.abs(out.data[out.mask]))
        expect = w * np.exp(-w * w * s * lam1 / 2.0)
        assert np.isclose(amp, expect, rtol=5e-3)


@given(st.integers(0, 2), st.integers(0, 2),
       st.floats(0.0, 2 * np.pi), st.floats(-1.5, 1.5))
@settings(max_examples=40, deadline=None)
def test_spec_terms_order_invariant(m, n, phi, v1):
    # expanding and re-collecting never changes the total derivative order
    if m + n == 0 or m + n > 4:
        return
    d = DerivativeSpec(kind="simple_cell", phi=phi, m1=m, n=n, v=(v1, 0.0))
    assert total_order(d.terms()) == m + n
