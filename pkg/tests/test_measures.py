import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sftnorm as S
from sftnorm.errors import ValidationError
from sftnorm.measures import loads_measure

PHI = (1 + math.sqrt(5)) / 2


def test_bernoulli_examples():
    uniform = S.bernoulli({"0": 0.5, "1": 0.5})
    assert uniform.evaluate("01") == 0.25
    degenerate = S.bernoulli({"a": 1.0, "b": 0.0})
    assert degenerate.evaluate("aaa") == 1.0
    assert degenerate.evaluate("ab") == 0.0
    skew = S.bernoulli({"0": 0.75, "1": 0.25})
    assert abs(skew.evaluate("00") - 0.5625) < 1e-15
    with pytest.raises(ValidationError):
        S.bernoulli({"0": 0.7, "1": 0.7})


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.text(alphabet="01", min_size=0, max_size=8))
def test_bernoulli_additivity(p, w):
    mu = S.bernoulli({"0": p, "1": 1.0 - p})
    assert mu.evaluate("") == 1.0
    assert abs(sum(mu.evaluate(w + a) for a in "01") - mu.evaluate(w)) < 1e-12


def test_markov_examples(gm_parry):
    mu = S.markov(("0", "1"), gm_parry.pi, gm_parry.P)
    assert abs(mu.evaluate("01") - 1 / (1 + PHI**2)) < 1e-9
    assert abs(mu.evaluate("0") - gm_parry.pi[0]) < 1e-12
    uniform = S.markov(("0", "1"), [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]])
    bern = S.bernoulli({"0": 0.5, "1": 0.5})
    for w in ["", "0", "01", "1101"]:
        assert abs(uniform.evaluate(w) - bern.evaluate(w)) < 1e-15


def test_markov_warns_when_not_stationary():
    with pytest.warns(UserWarning):
        S.markov(("a", "b"), [0.5, 0.5], [[0.9, 0.1], [0.2, 0.8]])


def test_markov_validation():
    with pytest.raises(ValidationError):
        S.markov(("a", "b"), [0.5, 0.5], [[1.0, 0.0]])
    with pytest.raises(ValidationError):
        S.markov(("a", "b"), [0.6, 0.6], [[1, 0], [0, 1]])


def test_parry_golden_closed_forms(golden, gm_parry):
    assert abs(gm_parry.eigenvalue - PHI) < 1e-11
    assert abs(gm_parry.pi[0] - PHI**2 / (1 + PHI**2)) < 1e-10
    assert abs(gm_parry.pi[1] - 1 / (1 + PHI**2)) < 1e-10
    assert abs(gm_parry.P[0, 0] - 1 / PHI) < 1e-10
    assert abs(gm_parry.P[0, 1] - 1 / PHI**2) < 1e-10
    assert abs(gm_parry.P[1, 0] - 1.0) < 1e-10
    assert gm_parry.P[1, 1] == 0.0


def test_parry_full_shifts():
    two = S.parry(S.full_shift("01"))
    assert np.allclose(two.pi, [0.5, 0.5], atol=1e-10)
    assert np.allclose(two.P, 0.5, atol=1e-10)
    three = S.parry(S.full_shift("abc"))
    bern = S.bernoulli({"a": 1 / 3, "b": 1 / 3, "c": 1 / 3})
    for w in ["a", "ab", "cab"]:
        assert abs(three.evaluate(w) - bern.evaluate(w)) < 1e-10


def test_parry_requires_irreducible():
    with pytest.raises(ValidationError):
        S.parry(S.ShiftSpec(("0", "1"), ((1, 1), (0, 1))))


def test_invariance(golden, gm_parry):
    assert S.is_invariant(gm_parry.to_measure(), golden, max_len=6)
    assert S.is_invariant(S.bernoulli({"0": 0.3, "1": 0.7}), S.full_shift("01"), max_len=6)


def test_empirical_measure_generally_not_invariant(golden):
    # bigram-style measure with first-symbol weight 1/M and skewed rows
    nu = S.empirical(("0", "1"), [[0.95, 0.05], [1.0, 0.0]])
    assert not S.is_invariant(nu, golden, max_len=4)


def test_compatibility(golden, gm_parry):
    assert S.is_compatible(gm_parry.to_measure(), golden, max_len=6)
    assert not S.is_compatible(S.bernoulli({"0": 0.5, "1": 0.5}), golden, max_len=2)
    assert S.is_compatible(S.bernoulli({"0": 0.5, "1": 0.5}), S.full_shift("01"), max_len=6)


def test_markov_entropy(golden, gm_parry):
    h = S.topological_entropy(golden)
    assert abs(S.markov_entropy(gm_parry.pi, gm_parry.P) - h) < 1e-9
    assert S.markov_entropy([0.5, 0.5], [[0, 1], [1, 0]]) == 0.0
    assert abs(S.markov_entropy([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]) - 1.0) < 1e-12


def test_compatible_measures_below_topological_entropy(golden):
    h = S.topological_entropy(golden)
    rng = np.random.default_rng(17)
    for _ in range(25):
        u = rng.uniform(0.05, 0.95)
        p = np.array([[u, 1 - u], [1.0, 0.0]])
        pi = np.array([1 / (2 - u), (1 - u) / (2 - u)])  # stationary for p
        assert np.allclose(pi @ p, pi, atol=1e-12)
        assert S.markov_entropy(pi, p) <= h + 1e-9


def test_measure_entropy_truncated(golden, gm_parry):
    h = S.topological_entropy(golden)
    mu = gm_parry.to_measure()
    assert abs(S.measure_entropy_truncated(mu, 8) - h) < 0.05
    fair = S.bernoulli({"0": 0.5, "1": 0.5})
    for n in (1, 3, 7):
        assert S.measure_entropy_truncated(fair, n) == 1.0
    point_mass = S.bernoulli({"a": 1.0, "b": 0.0})
    assert S.measure_entropy_truncated(point_mass, 6) == 0.0
    # two equally likely deterministic orbits still vanish like 1/n
    det = S.markov(("a", "b"), [0.5, 0.5], [[0, 1], [1, 0]])
    assert S.measure_entropy_truncated(det, 6) == pytest.approx(1 / 6)


def test_truncated_entropy_converges(gm_parry):
    mu = gm_parry.to_measure()
    target = S.markov_entropy(gm_parry.pi, gm_parry.P)
    diffs = [abs(S.measure_entropy_truncated(mu, 2 * n) - target) for n in range(1, 6)]
    assert all(a >= b - 1e-12 for a, b in zip(diffs, diffs[1:]))


def test_parry_measure_suite(golden, gm_parry):
    mu = gm_parry.to_measure()
    # additivity and the two invariance forms on short words
    for ell in range(0, 6):
        for syms in itertools.product("01", repeat=ell):
            w = "".join(syms)
            v = mu.evaluate(w)
            assert abs(sum(mu.evaluate(w + a) for a in "01") - v) < 1e-9
            assert abs(sum(mu.evaluate(a + w) for a in "01") - v) < 1e-9
    for ell in range(1, 11):
        assert abs(S.total_block_mass(mu, golden, ell) - 1.0) < 1e-9


def test_measure_json_roundtrip(gm_parry):
    mu = gm_parry.to_measure()
    again = loads_measure(json.dumps(mu.to_json_dict()))
    for w in ["", "0", "01", "0100101"]:
        assert abs(again.evaluate(w) - mu.evaluate(w)) < 1e-12
    bern = S.bernoulli({"x": 0.25, "y": 0.75})
    again = loads_measure(json.dumps(bern.to_json_dict()))
    assert abs(again.evaluate("yx") - 0.1875) < 1e-15
