import numpy as np
import pytest

from reference import mp_j, mp_sph_j, mp_sph_y, mp_y
from wavetomo.special import (bessel_j0, bessel_j1, bessel_jn_all, bessel_y0,
                              bessel_y1, bessel_yn_all, hankel1_0, hankel1_1,
                              legendre_all, spherical_jn_all, spherical_yn_all)


def test_order01_kernels_frozen_values():
    # high-precision references (mpmath, 30 digits)
    assert bessel_j0(1.0) == pytest.approx(0.76519768655796655, abs=1e-13)
    assert bessel_y0(1.0) == pytest.approx(0.08825696421567696, abs=1e-13)
    assert bessel_j1(1.0) == pytest.approx(0.44005058574493355, abs=1e-13)
    assert bessel_y1(1.0) == pytest.approx(-0.78121282130028871, abs=1e-13)


def test_order01_kernels_sweep_against_mpmath():
    rng = np.random.default_rng(7)
    xs = np.concatenate([rng.uniform(0.01, 12.0, 60),
                         rng.uniform(12.0, 100.0, 60),
                         [0.02, 7.99, 8.0, 11.999, 12.0, 12.001, 100.0]])
    for x in xs:
        envelope = np.sqrt(2.0 / (np.pi * x))
        assert abs(bessel_j0(x) - mp_j(0, x)) <= 1e-10 * envelope
        assert abs(bessel_y0(x) - mp_y(0, x)) <= 1e-10 * envelope
        assert abs(bessel_j1(x) - mp_j(1, x)) <= 1e-10 * envelope
        assert abs(bessel_y1(x) - mp_y(1, x)) <= 1e-10 * envelope


def test_kernels_reject_nonpositive():
    with pytest.raises(ValueError):
        bessel_j0(0.0)
    with pytest.raises(ValueError):
        bessel_y0(-1.0)


def test_hankel_composition():
    x = 2.7
    assert hankel1_0(x) == pytest.approx(bessel_j0(x) + 1j * bessel_y0(x))
    assert hankel1_1(x) == pytest.approx(bessel_j1(x) + 1j * bessel_y1(x))


@pytest.mark.parametrize("x", [0.3, 2.0, 6.28, 22.4, 83.9, 104.9])
def test_high_order_cylindrical(x):
    nmax = 60
    jn = bessel_jn_all(nmax, np.array([x]))[:, 0]
    yn = bessel_yn_all(nmax, np.array([x]))[:, 0]
    for n in range(nmax + 1):
        jt = mp_j(n, x)
        yt = mp_y(n, x)
        assert abs(jn[n] - jt) <= 1e-10 * max(abs(jt), 1e-250)
        assert abs(yn[n] - yt) <= 1e-10 * max(abs(yt), 1e-250)


@pytest.mark.parametrize("x", [0.3, 2.0, 6.28, 19.0, 84.0])
def test_high_order_spherical(x):
    lmax = 55
    jl = spherical_jn_all(lmax, np.array([x]))[:, 0]
    yl = spherical_yn_all(lmax, np.array([x]))[:, 0]
    for l in range(lmax + 1):
        jt = mp_sph_j(l, x)
        yt = mp_sph_y(l, x)
        assert abs(jl[l] - jt) <= 1e-10 * max(abs(jt), 1e-250)
        assert abs(yl[l] - yt) <= 1e-10 * max(abs(yt), 1e-250)


def test_spherical_closed_form_seeds():
    x = np.array([0.7, 3.3, 11.0])
    jl = spherical_jn_all(2, x)
    yl = spherical_yn_all(2, x)
    assert np.allclose(jl[0], np.sin(x) / x, rtol=1e-12)
    assert np.allclose(jl[1], np.sin(x) / x ** 2 - np.cos(x) / x, rtol=1e-10)
    assert np.allclose(yl[0], -np.cos(x) / x, rtol=1e-12)


def test_legendre_small_orders():
    x = np.linspace(-1.0, 1.0, 11)
    p = legendre_all(3, x)
    assert np.allclose(p[0], 1.0)
    assert np.allclose(p[1], x)
    assert legendre_all(2, 0.5)[2] == pytest.approx(-0.125, abs=1e-15)
    assert np.allclose(p[2], 0.5 * (3 * x ** 2 - 1), atol=1e-14)
    assert np.allclose(p[3], 0.5 * (5 * x ** 3 - 3 * x), atol=1e-14)
