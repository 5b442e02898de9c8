import json
import math

import numpy as np
import pytest
from scipy import integrate as sint

from radlevy.bernstein import BernsteinSpec, ExponentialCP, Null, catalog
from radlevy.numerics import DomainError
from radlevy.radial import RadialProfile
from radlevy.subordinator import SubordinatorModel, neg_moment
from radlevy.transition import (
    PreconditionError,
    TransitionDensity,
    closed_form_density,
    cm_ladder_check,
    density_fourier,
    density_mixture,
    dimwalk_check,
    levy_density,
    levy_dimwalk_check,
    levy_profile,
    levy_shell_mass,
    mixture_identity_check,
    normalization_check,
    origin_value,
    richardson,
    scaled_cm_check,
    shell_probability,
    transition_density,
    unimodality_check,
    vague_limit_check,
)

CAT = {name: SubordinatorModel(spec) for name, spec in catalog().items()}


def test_mixture_gaussian_peak():
    assert density_mixture(CAT["drift"], 3, 1.0, 0.0) == pytest.approx((4 * math.pi) ** -1.5, rel=1e-12)


def test_mixture_cauchy_value():
    assert density_mixture(CAT["stable12"], 1, 1.0, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-10)


def test_fourier_examples():
    assert density_fourier(catalog()["drift"], 1, 1.0, 2.0) == pytest.approx((4 * math.pi) ** -0.5 / math.e, rel=1e-9)
    assert density_fourier(catalog()["stable12"], 3, 1.0, 1.0) == pytest.approx(1 / (4 * math.pi ** 2), rel=1e-9)


def test_fourier_precondition():
    with pytest.raises(PreconditionError, match="Hartman-Wintner"):
        density_fourier(catalog()["gamma"], 1, 0.3, 0.5)
    with pytest.raises(PreconditionError):
        transition_density(CAT["cp"], 1, 1.0, route="fourier")


@pytest.mark.parametrize("conv", ["default", "paper-literal"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_routes_agree_on_closed_forms(conv, k):
    r = np.array([0.0, 0.5, 1.5, 4.0])
    for name, fam in (("drift", "gaussian"), ("stable12", "cauchy")):
        exact = closed_form_density(fam, k, 0.8, conv)(r)
        assert np.allclose(density_mixture(CAT[name], k, 0.8, r, conv), exact, rtol=1e-9, atol=1e-15)
        assert np.allclose(density_fourier(catalog()[name], k, 0.8, r, conv), exact, rtol=1e-8, atol=1e-13)


def test_literal_convention_is_standard_heat_kernel():
    p = density_mixture(CAT["drift"], 1, 1.0, 0.0, "paper-literal")
    assert p == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)


def test_domain_errors():
    with pytest.raises(DomainError):
        density_mixture(CAT["drift"], 1, 0.0, 1.0)
    with pytest.raises(DomainError):
        density_mixture(CAT["drift"], 1, 1.0, -1.0)
    with pytest.raises(DomainError):
        density_mixture(CAT["drift"], 1, 1.0, 1.0, "other")


def test_atom_and_mass():
    for name, m in CAT.items():
        td = transition_density(m, 1, 1.0)
        assert td.mass() + td.atom_weight == pytest.approx(1.0, abs=1e-6), name
        assert normalization_check(td).passed
    assert transition_density(CAT["cp"], 2, 1.0).atom_weight == pytest.approx(math.exp(-2))


def test_transition_csv(tmp_path):
    td = transition_density(CAT["cp"], 1, 0.5, grid=np.linspace(0, 2, 5))
    text = td.to_csv()
    first, header, *rows = text.strip().splitlines()
    meta = json.loads(first[2:])
    assert first.startswith("# ")
    assert meta["atom_weight"] == pytest.approx(math.exp(-1))
    assert header == "r,value"
    assert len(rows) == 5


def test_levy_density_closed_forms():
    r = np.array([0.3, 1.0, 3.0])
    assert np.all(levy_density(CAT["drift"], 2, r) == 0.0)
    # stable-1/2 in k = 1: m_1(r) = 1/(pi r^2)
    assert np.allclose(levy_density(CAT["stable12"], 1, r), 1 / (math.pi * r ** 2), rtol=1e-10)
    # CP: Gaussian mixture against 2 e^{-y}, brute force with scipy
    for x in r:
        brute = sint.quad(lambda y: 2 * math.exp(-y) * math.exp(-x * x / (4 * y)) / math.sqrt(4 * math.pi * y),
                          0, np.inf)[0]
        assert levy_density(CAT["cp"], 1, x) == pytest.approx(brute, rel=1e-8)


def test_levy_mass_cp():
    assert levy_shell_mass(CAT["cp"], 1, 0.0, math.inf) == pytest.approx(2.0, rel=1e-8)


def test_dimwalk_examples():
    g1 = transition_density(CAT["drift"], 1, 1.0)
    g3 = transition_density(CAT["drift"], 3, 1.0)
    c1 = transition_density(CAT["stable12"], 1, 1.0)
    c3 = transition_density(CAT["stable12"], 3, 1.0)
    rep = dimwalk_check(g1, g3)
    assert rep.passed and rep.max_error <= 1e-8
    assert dimwalk_check(c1, c3).passed
    assert not dimwalk_check(g1, c3).passed


def test_dimwalk_rejects_mismatch():
    g1 = transition_density(CAT["drift"], 1, 1.0)
    with pytest.raises(DomainError):
        dimwalk_check(g1, transition_density(CAT["drift"], 5, 1.0))
    with pytest.raises(DomainError):
        dimwalk_check(g1, transition_density(CAT["drift"], 3, 2.0))


def test_levy_dimwalk_examples():
    for name in ("stable12", "cp", "drift"):
        rep = levy_dimwalk_check(levy_profile(CAT[name], 1), levy_profile(CAT[name], 3))
        assert rep.passed, name
        assert rep.max_error <= 1e-4


def test_unimodality():
    for name in ("drift", "stable12", "ig", "gamma", "cp"):
        assert unimodality_check(transition_density(CAT[name], 1, 1.0)).passed, name
    assert unimodality_check(transition_density(CAT["stable12"], 3, 0.5)).passed
    bimodal = RadialProfile(1, lambda r: np.exp(-np.asarray(r) ** 2) + 0.5 * np.exp(-(np.asarray(r) - 3) ** 2))
    td = TransitionDensity(1, 1.0, 0.0, bimodal, "mixture", "default", "bimodal")
    assert not unimodality_check(td).passed


def test_origin_value_matches_negative_moment():
    # p_t^k(0+) = (4 pi)^{-k/2} E[S^{-k/2}; S > 0]
    for name in ("stable12", "ig", "drift"):
        for k in (1, 3):
            val = origin_value(CAT[name], k, 1.0)
            mom = neg_moment(CAT[name], k / 2, 1.0).value
            assert val == pytest.approx((4 * math.pi) ** (-k / 2) * mom, rel=1e-8)
    assert origin_value(CAT["gamma"], 1, 0.3) == math.inf


def test_cm_checks():
    assert scaled_cm_check(transition_density(CAT["stable12"], 1, 1.0)).passed
    rep = cm_ladder_check(CAT["stable12"], 1.0)
    assert rep.passed and rep.max_error <= 1e-3


def test_mixture_identity():
    for name in ("stable12", "ig", "drift"):
        assert mixture_identity_check(CAT[name], 1.0).passed, name


def test_richardson_recovers_limit():
    times = np.array([0.2, 0.1, 0.05, 0.025])
    vals = 3.0 + 2.0 * times ** 2
    limit, order = richardson(times, vals)
    assert limit == pytest.approx(3.0, abs=1e-12)
    assert order == pytest.approx(2.0, abs=1e-6)


def test_shell_probability_cauchy():
    # P(1 < |X_1| < 2) for the standard Cauchy
    expected = 2 * (math.atan(2) - math.atan(1)) / math.pi
    assert shell_probability(CAT["stable12"], 1, 1.0, 1.0, 2.0) == pytest.approx(expected, rel=1e-8)


def test_vague_limit_examples():
    rep = vague_limit_check(CAT["stable12"], 1, [(1.0, 2.0)])
    assert rep.passed
    assert vague_limit_check(CAT["drift"], 1, [(1.0, 2.0)]).passed
    assert vague_limit_check(CAT["cp"], 1, [(0.5, 3.0)]).passed


def test_vague_limit_scales_with_intensity():
    # doubling the jump intensity doubles the Levy measure of every shell
    spec = BernsteinSpec(0.0, ExponentialCP(4.0, 1.0), "cp4")
    rep = vague_limit_check(SubordinatorModel(spec), 1, [(0.5, 3.0)])
    assert rep.passed
    assert levy_shell_mass(SubordinatorModel(spec), 1, 0.5, 3.0) == pytest.approx(
        2 * levy_shell_mass(CAT["cp"], 1, 0.5, 3.0), rel=1e-10)
