import math

import numpy as np
import pytest
from scipy import stats

from radlevy.bernstein import BernsteinSpec, GammaJump, catalog
from radlevy.numerics import DomainError
from radlevy.subordinator import SubordinatorModel
from radlevy.transition import PreconditionError
from radlevy.simulation import (
    CHUNK,
    atom_check,
    chirp,
    empirical_density_check,
    gradient_bound_check,
    jump_count_check,
    laplace_check,
    neg_moment_mc,
    sample_subordinated,
    sample_subordinator,
    samples_to_csv,
    smoothed,
)

CAT = {name: SubordinatorModel(spec) for name, spec in catalog().items()}


def test_single_sample_reproducible():
    a = sample_subordinated(CAT["stable12"], 2, 1.0, 1, seed=5)
    b = sample_subordinated(CAT["stable12"], 2, 1.0, 1, seed=5)
    assert a.shape == (1, 2)
    assert np.array_equal(a, b)


def test_thread_count_does_not_change_samples():
    n = 2 * CHUNK + 17
    one = sample_subordinated(CAT["ig"], 3, 0.5, n, seed=9, threads=1)
    four = sample_subordinated(CAT["ig"], 3, 0.5, n, seed=9, threads=4)
    assert np.array_equal(one, four)
    r1 = laplace_check(CAT["gamma"], 1.0, n, seed=2, threads=1)
    r4 = laplace_check(CAT["gamma"], 1.0, n, seed=2, threads=3)
    assert [r.to_json() for r in r1] == [r.to_json() for r in r4]


def test_seed_changes_samples():
    a = sample_subordinator(CAT["gamma"], 1.0, 100, seed=1)
    b = sample_subordinator(CAT["gamma"], 1.0, 100, seed=2)
    assert not np.array_equal(a, b)


def test_rejects_empty_sample():
    with pytest.raises(DomainError):
        sample_subordinator(CAT["gamma"], 1.0, 0)


def test_subordinated_law_cauchy():
    # under the default convention X_1 for stable-1/2 is standard Cauchy
    x = sample_subordinated(CAT["stable12"], 1, 1.0, 20000, seed=3)[:, 0]
    assert stats.kstest(x, stats.cauchy.cdf).pvalue > 1e-3


def test_subordinated_law_literal_convention():
    x = sample_subordinated(CAT["drift"], 1, 1.0, 20000, seed=3, convention="paper-literal")[:, 0]
    assert stats.kstest(x, stats.norm.cdf).pvalue > 1e-3


@pytest.mark.parametrize("name", sorted(CAT))
def test_laplace_check(name):
    reps = laplace_check(CAT[name], 1.0, 50_000, seed=4)
    assert all(r.passed for r in reps)


def test_atom_checks():
    cp = atom_check(CAT["cp"], 1.0, 100_000, seed=7)
    assert cp.passed
    assert abs(cp.observed - math.exp(-2)) <= 3 * cp.details["standard_error"]
    for name in ("stable12", "ig", "gamma", "drift"):
        rep = atom_check(CAT[name], 1.0, 20_000, seed=7)
        assert rep.passed and rep.observed == 0.0


def test_empirical_density_examples():
    assert empirical_density_check(CAT["stable12"], 1, 1.0, 100_000, 40, seed=1).passed
    assert empirical_density_check(CAT["drift"], 2, 1.0, 50_000, 40, seed=1).passed
    assert empirical_density_check(CAT["cp"], 1, 1.0, 50_000, 40, seed=1).passed


def test_literal_convention_samples_have_unit_variance():
    x = sample_subordinated(CAT["drift"], 1, 1.0, 50_000, seed=1, convention="paper-literal")
    assert abs(np.mean(x ** 2) - 1.0) < 0.03
    y = sample_subordinated(CAT["drift"], 1, 1.0, 50_000, seed=1)
    assert abs(np.mean(y ** 2) - 2.0) < 0.06


def test_jump_counts():
    reps = jump_count_check(CAT["cp"], 1, 1.0, [(0.0, 1.0), (1.0, 3.0), (3.0, math.inf)], 50_000, seed=3)
    names = [r.statistic for r in reps]
    assert "no-jump-fraction" in names and "zero-iff-no-jump" in names
    assert any(n.startswith("count-covariance") for n in names)
    assert all(r.passed for r in reps), [r.statistic for r in reps if not r.passed]


def test_jump_counts_need_cp():
    with pytest.raises(DomainError):
        jump_count_check(CAT["stable12"], 1, 1.0, [(0.0, 1.0)], 100)


def test_smoothed_constant_and_gaussian():
    grid, ones, p = smoothed(CAT["drift"], 1.0, lambda y: np.ones_like(y), (-2.0, 2.0))
    assert grid[0] == -2.0 and grid[-1] == pytest.approx(2.0)
    assert np.allclose(ones, 1.0, atol=1e-6)
    # P_t cos(a .) = e^{-t a^2} cos(a x) when the exponent is xi^2
    grid, got, _ = smoothed(CAT["drift"], 0.5, lambda y: np.cos(1.5 * y), (-2.0, 2.0))
    assert np.allclose(got, math.exp(-0.5 * 1.5 ** 2) * np.cos(1.5 * grid), atol=1e-6)


def test_gradient_bound():
    for t in (0.5, 1.0):
        reps = gradient_bound_check(CAT["drift"], t)
        assert len(reps) == 3 and all(r.passed for r in reps)
        assert all(r.details["ratio_to_bound"] < 1 for r in reps)


def test_gradient_bound_needs_hw():
    with pytest.raises(PreconditionError):
        gradient_bound_check(CAT["gamma"], 1.0)


def test_chirp_bounded():
    x = np.linspace(-5, 5, 1001)
    assert np.max(np.abs(chirp(x))) <= 1.0


def test_neg_moment_mc_examples():
    assert neg_moment_mc(CAT["stable12"], 0.5, 1.0, 100_000, seed=0).passed
    gam = neg_moment_mc(SubordinatorModel(BernsteinSpec(0.0, GammaJump(1.0, 1.0))), 1.0, 0.5, 100_000, seed=0)
    assert gam.passed and gam.details["unstable"]
    drift = neg_moment_mc(CAT["drift"], 1.0, 2.0, 1000)
    assert drift.observed == 0.5 and drift.passed
    with pytest.raises(DomainError):
        neg_moment_mc(CAT["cp"], 0.5, 1.0, 100)


def test_samples_csv(tmp_path):
    s = sample_subordinator(CAT["gamma"], 1.0, 5, seed=0)
    text = samples_to_csv(1.0, s)
    lines = text.strip().splitlines()
    assert lines[0] == "t,sample" and len(lines) == 6
    assert float(lines[1].split(",")[1]) == s[0]
    path = tmp_path / "s.csv"
    samples_to_csv(1.0, s, path)
    assert path.read_text() == text
