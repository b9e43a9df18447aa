from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbcrc.errors import CapacityError, DomainError
from cbcrc.wce import (GeneratingVector, bernoulli_b2, error_profile, projection_error, squared_wce,
                       wce_expectation, wce_std, wce_variance)
from cbcrc.weights import RandomWeightModel, WeightAssignment, holder_ratio

from oracles import projection_error_exact, subsets, wce_product_exact, wce_subset_sum

W = WeightAssignment


def random_vector(rng, n, s):
    return GeneratingVector.of(n, rng.integers(1, n, size=s))


@pytest.mark.parametrize("x,expected", [(0, 1 / 6), (0.5, -1 / 12), (0.25, -1 / 48)])
def test_bernoulli_b2(x, expected):
    assert bernoulli_b2(x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("x", [-0.1, 1.0, 1.5, float("nan")])
def test_bernoulli_b2_domain(x):
    with pytest.raises(DomainError):
        bernoulli_b2(x)


def test_generating_vector_checks():
    with pytest.raises(DomainError):
        GeneratingVector.of(5, [1, 5])
    with pytest.raises(DomainError):
        GeneratingVector.of(5, [])
    g = GeneratingVector.of(7, [1, 3])
    assert GeneratingVector.from_json(g.to_json()) == g
    with pytest.raises(DomainError):
        GeneratingVector.from_json({"n": 7, "s": 3, "g": [1, 2]})
    with pytest.raises(DomainError):
        GeneratingVector.from_json({"n": 7})


def test_projection_error_examples():
    assert projection_error(GeneratingVector.of(2, [1]), [1]) == pytest.approx(1 / 24, rel=1e-15)
    for n in range(2, 101):
        for g in {1, n - 1, max(1, n // 3)}:
            if math.gcd(g, n) == 1:
                assert projection_error(GeneratingVector.of(n, [g]), [1]) == pytest.approx(
                    1 / (6 * n * n), rel=1e-13)
    g = GeneratingVector.of(5, [1, 2])
    assert projection_error(g, [1, 2]) == pytest.approx(float(projection_error_exact((1, 2), 5, (1, 2))), rel=1e-14)
    with pytest.raises(DomainError):
        projection_error(g, [])


def test_error_profile_examples():
    prof = error_profile(GeneratingVector.of(2, [1]))
    assert prof.values.tolist() == pytest.approx([1 / 24])
    g = GeneratingVector.of(11, [1, 4])
    prof = error_profile(g)
    for u in subsets(2):
        assert prof[u] == pytest.approx(projection_error(g, u), rel=1e-13)
    g = GeneratingVector.of(7, [1, 2, 3])
    prof = error_profile(g)
    for u in subsets(3):
        assert prof[u] == pytest.approx(float(projection_error_exact((1, 2, 3), 7, u)), rel=1e-12, abs=1e-17)
    with pytest.raises(CapacityError):
        error_profile(GeneratingVector.of(7, [1] * 17))


def test_error_profile_nonnegative_and_chunked():
    rng = np.random.default_rng(3)
    g = random_vector(rng, 5003, 9)
    prof = error_profile(g)
    assert np.all(prof.values >= 0)
    for u in [(1,), (2, 5), (1, 3, 9), tuple(range(1, 10))]:
        assert prof[u] == pytest.approx(projection_error(g, u), rel=1e-9, abs=1e-18)
    d = math.gcd(g.components[0], 5003)
    assert prof[(1,)] == pytest.approx(d * d / (6 * 5003**2), rel=1e-15)


def test_squared_wce_examples():
    assert squared_wce(GeneratingVector.of(2, [1]), W.product([1.0])) == pytest.approx(1 / 24, rel=1e-15)
    exact = float(wce_product_exact((1, 2), 5, (1, 1)))
    got = squared_wce(GeneratingVector.of(5, [1, 2]), W.product([1.0, 1.0]))
    assert got == pytest.approx(exact, rel=1e-14)
    # the documented approximate value 0.0184993 agrees to about 1e-4
    assert got == pytest.approx(0.0184993, rel=1e-4)


@given(st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_general_matches_exact_rational(seed):
    rng = np.random.default_rng(seed)
    n, s = int(rng.integers(2, 30)), int(rng.integers(1, 5))
    g = rng.integers(1, n, size=s)
    gam = {u: Fraction(int(rng.integers(0, 7)), int(rng.integers(1, 7))) for u in subsets(s)}
    exact = sum(gam[u] * projection_error_exact(g, n, u) for u in subsets(s))
    w = W.general({u: float(v) for u, v in gam.items()}, s)
    assert squared_wce(GeneratingVector.of(n, g), w) == pytest.approx(float(exact), rel=1e-12, abs=1e-18)


def test_squared_wce_zero_weights_and_dimension_check():
    g = GeneratingVector.of(31, [1, 12, 7])
    assert squared_wce(g, W.product([0, 0, 0])) == 0
    assert squared_wce(g, W.product([1, 1, 1], scale=0)) == 0
    with pytest.raises(DomainError):
        squared_wce(g, W.product([1, 1]))
    with pytest.raises(DomainError):
        squared_wce(g, W.from_vector(np.ones(3), 2))


@given(st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_product_matches_exact_rational(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    s = int(rng.integers(1, 5))
    gh = [Fraction(int(rng.integers(0, 9)), int(rng.integers(1, 9))) for _ in range(s)]
    g = rng.integers(1, n, size=s)
    exact = float(wce_product_exact(g, n, gh))
    got = squared_wce(GeneratingVector.of(n, g), W.product([float(x) for x in gh]))
    assert got == pytest.approx(exact, rel=1e-12, abs=1e-18)


@given(st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_dot_product_identity(seed):
    rng = np.random.default_rng(seed)
    n, s = int(rng.integers(3, 120)), int(rng.integers(1, 8))
    g = random_vector(rng, n, s)
    w = W.from_vector(rng.uniform(size=2**s - 1) * (rng.uniform(size=2**s - 1) < 0.7), s)
    # the float oracle itself cancels at about 1e-12 relative
    ref = wce_subset_sum(g.components, n, w.weight_of)
    assert squared_wce(g, w) == pytest.approx(ref, rel=1e-10, abs=1e-18)
    prof = error_profile(g)
    total = math.fsum(w.weight_of(u) * prof[u] for u in subsets(s))
    assert squared_wce(g, w) == pytest.approx(total, rel=1e-12, abs=1e-18)


@given(st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_symmetry_under_reflection(seed):
    rng = np.random.default_rng(seed)
    n, s = int(rng.integers(3, 200)), int(rng.integers(1, 6))
    comps = list(rng.integers(1, n, size=s))
    w = W.product(rng.uniform(0, 2, size=s))
    j = int(rng.integers(0, s))
    flipped = comps.copy()
    flipped[j] = n - flipped[j]
    a = squared_wce(GeneratingVector.of(n, comps), w)
    b = squared_wce(GeneratingVector.of(n, flipped), w)
    assert a == pytest.approx(b, rel=1e-13, abs=1e-18)


def test_tiny_weights_keep_relative_accuracy():
    gh = 10.0 ** -np.arange(1, 31)
    g = GeneratingVector.of(13, [1, 5, 3, 4, 2, 6] * 5)
    exact = float(wce_product_exact(g.components, 13, [Fraction(1, 10**j) for j in range(1, 31)]))
    assert squared_wce(g, W.product(gh)) == pytest.approx(exact, rel=1e-12)


def test_large_weights_dimension_100():
    g = GeneratingVector.of(7, [1, 2, 3, 4, 5, 6] * 16 + [1, 2, 3, 4])
    exact = float(wce_product_exact(g.components, 7, [1] * 100))
    assert squared_wce(g, W.product(np.ones(100))) == pytest.approx(exact, rel=1e-13)


def single_subset_model(mean, std, s=1):
    return RandomWeightModel(W.general({(1,): mean}, s), W.general({(1,): std}, s))


def test_expectation_examples():
    g = GeneratingVector.of(2, [1])
    assert wce_expectation(g, single_subset_model(0.0, 5.0)) == 0
    assert wce_expectation(g, single_subset_model(3.0, 1.0)) == pytest.approx(1 / 8)
    rng = np.random.default_rng(1)
    model = RandomWeightModel.product(rng.uniform(size=5), rng.uniform(size=5))
    g = random_vector(rng, 31, 5)
    assert wce_expectation(g, model) == squared_wce(g, model.mean)


def test_variance_and_std_examples():
    g = GeneratingVector.of(2, [1])
    assert wce_variance(g, single_subset_model(1.0, 0.0)) == 0
    assert wce_variance(g, single_subset_model(1.0, 2.0)) == pytest.approx(1 / 144)
    assert wce_std(g, single_subset_model(1.0, 2.0)) == pytest.approx(1 / 12)
    sd = W.product([1 / j for j in range(1, 5)])
    model = RandomWeightModel(W.product([1, 1, 1, 1]), sd)
    g = GeneratingVector.of(31, [1, 12, 7, 20])
    brute = sum((sd.weight_of(u) * float(projection_error_exact(g.components, 31, u))) ** 2
                for u in subsets(4))
    assert wce_variance(g, model) == pytest.approx(brute, rel=1e-12)
    with pytest.raises(CapacityError):
        wce_variance(GeneratingVector.of(31, [1] * 17),
                     RandomWeightModel.product(np.ones(17), np.ones(17)))


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_jensen_and_holder_chains(seed):
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, 9))
    n = int(rng.integers(3, 102))
    g = random_vector(rng, n, s)
    model = RandomWeightModel.product(rng.uniform(size=s), rng.uniform(0.05, 1, size=s))
    std = wce_std(g, model)
    e_sigma = squared_wce(g, model.std)
    h = holder_ratio(model.mean, model.std)
    slack = 1 + 1e-12
    assert std <= e_sigma * slack
    assert wce_expectation(g, model) <= std * h * slack
    assert std * h <= e_sigma * h * slack
