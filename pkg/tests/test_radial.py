import math

import numpy as np
import pytest

from radlevy.numerics import DomainError
from radlevy.radial import (
    RadialProfile,
    default_grid,
    descente,
    fourier_profile,
    fourier_radial,
    inverse_fourier_radial,
    montee,
    radial_mass,
    tabulated,
    tail_integrable,
    zero_profile,
)
from radlevy.transition import closed_form_density

R = np.array([0.0, 0.3, 1.0, 2.5, 6.0])


def gauss(k, t=1.0):
    return closed_form_density("gaussian", k, t)


def cauchy(k, t=1.0):
    return closed_form_density("cauchy", k, t)


def test_profile_rejects_negative_radius():
    with pytest.raises(DomainError):
        gauss(1)(-1.0)
    with pytest.raises(DomainError):
        RadialProfile(0, lambda r: r)


def test_zero_profile_transform():
    for k in (1, 2, 3):
        assert np.all(fourier_radial(zero_profile(k), R) == 0.0)


def test_gaussian_transform_k3():
    # radial transform of exp(-s^2) with the (2 pi)^{-k} forward normalisation
    u = RadialProfile(3, lambda s: np.exp(-np.asarray(s) ** 2))
    got = fourier_radial(u, R)
    assert np.allclose(got, (4 * math.pi) ** -1.5 * np.exp(-R ** 2 / 4), rtol=1e-9, atol=1e-15)
    # the inverse differs by (2 pi)^k
    assert np.allclose(inverse_fourier_radial(u, R), (2 * math.pi) ** 3 * got, rtol=1e-12)


def test_exponential_transform_is_cauchy():
    u = RadialProfile(1, lambda s: np.exp(-np.asarray(s)))
    assert np.allclose(fourier_radial(u, R), 1 / (math.pi * (1 + R ** 2)), rtol=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_gaussian_transform_any_dimension(k):
    u = RadialProfile(k, lambda s: np.exp(-np.asarray(s) ** 2 / 2))
    expected = (2 * math.pi) ** (-k / 2) * np.exp(-R ** 2 / 2)
    assert np.allclose(fourier_radial(u, R), expected, rtol=1e-8, atol=1e-14)


def test_fourier_profile_wraps():
    u = RadialProfile(1, lambda s: np.exp(-np.asarray(s)))
    assert fourier_profile(u)(1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-9)
    assert fourier_profile(u, inverse=True)(1.0) == pytest.approx(1.0, rel=1e-9)


def test_roundtrip_via_tabulated_surrogate():
    # F_k F_k^{-1} u = u, with the inner transform tabulated once on a fine grid
    u = gauss(1)
    inner = tabulated(fourier_profile(u, inverse=True), np.linspace(0, 16, 321))
    back = fourier_radial(inner, np.array([0.0, 0.5, 1.5, 3.0]))
    assert np.allclose(back, u(np.array([0.0, 0.5, 1.5, 3.0])), atol=1e-7)


def test_radial_mass_of_densities():
    for k in (1, 2, 3):
        assert radial_mass(gauss(k)) == pytest.approx(1.0, abs=1e-10)
    assert radial_mass(cauchy(3)) == pytest.approx(1.0, abs=1e-9)


def test_montee_gaussian_analytic():
    up = montee(gauss(1))
    r = np.linspace(0, 5, 26)
    assert up.dim == 3
    assert np.allclose(up(r), gauss(3)(r), rtol=1e-8, atol=1e-16)


def test_montee_gaussian_finite_difference():
    # strip the derivative to force the stencil and the origin fit
    g = gauss(1)
    plain = RadialProfile(1, g.fn)
    r = np.concatenate(([0.0, 1e-7], np.linspace(0.01, 4, 40)))
    assert np.allclose(montee(plain)(r), gauss(3)(r), rtol=1e-6, atol=1e-12)


def test_montee_constant_is_zero():
    u = RadialProfile(1, lambda r: np.ones_like(np.asarray(r, dtype=float)))
    assert np.allclose(montee(u)(np.linspace(0, 3, 7)), 0.0, atol=1e-12)


def test_montee_cauchy_ladder():
    r = np.geomspace(0.01, 10, 50)
    assert np.allclose(montee(cauchy(1))(r), cauchy(3)(r), rtol=1e-10)
    assert np.allclose(montee(cauchy(3))(r), cauchy(5)(r), rtol=1e-10)


def test_descente_gaussian():
    r = np.array([0.0, 0.4, 1.0, 2.0, 4.0])
    assert np.allclose(descente(gauss(3))(r), gauss(1)(r), rtol=1e-8, atol=1e-14)


def test_descente_cauchy():
    r = np.array([0.0, 0.5, 1.0, 3.0])
    assert np.allclose(descente(cauchy(3))(r), cauchy(1)(r), rtol=1e-8)


def test_descente_inverts_montee():
    plain = RadialProfile(1, cauchy(1).fn)
    r = np.array([0.2, 1.0, 2.0])
    assert np.allclose(descente(montee(plain))(r), cauchy(1)(r), rtol=1e-6)


def test_descente_errors():
    with pytest.raises(DomainError):
        descente(gauss(1))
    slow = RadialProfile(3, lambda r: 1 / (1 + np.asarray(r) ** 2))
    assert not tail_integrable(slow)
    with pytest.raises(DomainError):
        descente(slow)


def test_csv_export(tmp_path):
    u = gauss(1).with_grid(np.linspace(0, 1, 5))
    text = u.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "r,value"
    assert len(lines) == 6
    path = tmp_path / "u.csv"
    u.to_csv(path)
    assert path.read_text() == text


def test_default_grid():
    g = default_grid()
    assert g[0] > 0 and np.all(np.diff(g) > 0)


def test_tabulated_needs_origin():
    with pytest.raises(DomainError):
        tabulated(gauss(1), np.linspace(0.1, 1, 5))
