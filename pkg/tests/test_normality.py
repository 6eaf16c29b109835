import numpy as np
import pytest

import sftnorm as S
from sftnorm.errors import ValidationError
from sftnorm.normality import default_tolerance
from sftnorm.prng import splitmix64, uniforms


def test_splitmix_reference_values():
    # vectorized outputs must match the scalar splitmix64 definition
    def scalar(seed, i):
        mask = (1 << 64) - 1
        z = (seed + i * 0x9E3779B97F4A7C15) & mask
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    for seed in (0, 1, 1234567):
        got = splitmix64(seed, 5)
        expect = [scalar(seed, i) for i in range(1, 6)]
        assert [int(v) for v in got] == expect
    u = uniforms(42, 1000)
    assert np.all(u >= 0.0) and np.all(u < 1.0)


def test_sample_parry_valid_for_many_seeds(golden):
    for seed in range(10):
        x = S.sample_parry(golden, 2000, seed=seed)
        assert len(x) == 2000
        assert "11" not in x
        assert S.is_block(golden, x)


def test_sample_parry_deterministic(golden):
    assert S.sample_parry(golden, 5000, seed=3) == S.sample_parry(golden, 5000, seed=3)
    assert S.sample_parry(golden, 5000, seed=3) != S.sample_parry(golden, 5000, seed=4)


def test_sample_parry_frequencies(golden, gm_parry, parry_sample_1m):
    freq0 = parry_sample_1m.count("0") / len(parry_sample_1m)
    assert abs(freq0 - gm_parry.pi[0]) < 0.005


def test_sample_skewed(golden):
    q = np.array([[0.95, 0.05], [1.0, 0.0]])
    x = S.sample_skewed(golden, q, 5000, seed=2)
    assert S.is_block(golden, x)
    bad = np.array([[0.5, 0.5], [0.5, 0.5]])  # puts weight on forbidden 11
    with pytest.raises(ValidationError):
        S.sample_skewed(golden, bad, 100, seed=0)


def test_sample_skewed_deterministic_cycle(full2):
    q = np.array([[0.0, 1.0], [1.0, 0.0]])
    x = S.sample_skewed(full2, q, 100, seed=9)
    assert x in ("01" * 50, "10" * 50)


def test_aligned_on_parry_sample(gm_parry, parry_sample_1m):
    report = S.test_aligned(parry_sample_1m, gm_parry.to_measure(), 4, tol=0.01)
    assert report.consistent
    assert report.max_deviation < 0.01
    for stats in report.per_length:
        assert stats.sum_estimates <= 1.0 + stats.block_length / stats.slots + 1e-12


def test_aligned_flags_periodic(gm_parry, periodic_1m):
    report = S.test_aligned(periodic_1m, gm_parry.to_measure(), 1, tol=0.01)
    assert not report.consistent
    est, target = report.per_length[0].table["0"]
    assert abs(est - 0.5) < 1e-12
    assert abs(target - gm_parry.pi[0]) < 1e-9


def test_aligned_trivial_constant_sequence():
    mu = S.bernoulli({"a": 1.0, "b": 0.0})
    report = S.test_aligned("a" * 1000, mu, 1, tol=0.001)
    assert report.consistent


def test_strong_aligned_on_parry_sample(gm_parry, parry_sample_1m):
    report = S.test_strong_aligned(
        parry_sample_1m[:200_000], gm_parry.to_measure(), 3, 8, tol=0.01
    )
    assert report.consistent
    assert report.shifts_tested == tuple(range(9))


def test_strong_aligned_flags_single_one():
    mu = S.bernoulli({"0": 0.5, "1": 0.5})
    x = "1" + "0" * 9999
    report = S.test_strong_aligned(x, mu, 1, 4, tol=0.01)
    assert not report.consistent


def test_strong_aligned_flags_period_four():
    mu = S.bernoulli({"0": 0.5, "1": 0.5})
    x = "0110" * 2500
    report = S.test_strong_aligned(x, mu, 2, 1, tol=0.05)
    assert not report.consistent
    by_shift = {s.shift: s for s in report.per_length if s.block_length == 2}
    assert set(by_shift) == {0, 1}
    # shift 0 sees only {01, 10}; shift 1 sees only {11, 00}
    assert by_shift[0].table["01"][0] == pytest.approx(0.5, abs=1e-3)
    assert by_shift[1].table["11"][0] == pytest.approx(0.5, abs=1e-3)
    assert by_shift[0].table.get("11", (0.0, 0.25))[0] == 0.0


def test_nonaligned_on_parry_sample(gm_parry, parry_sample_1m):
    report = S.test_nonaligned(parry_sample_1m, gm_parry.to_measure(), 4, tol=0.01)
    assert report.consistent


def test_nonaligned_flags_periodic_in_full_shift():
    mu = S.bernoulli({"0": 0.5, "1": 0.5})
    report = S.test_nonaligned("01" * 5000, mu, 2, tol=0.01)
    assert not report.consistent
    est, target = report.per_length[1].table["11"]
    assert est == 0.0 and target == 0.25


def test_nonaligned_length_one_sums_to_one(gm_parry, parry_sample_1m):
    report = S.test_nonaligned(parry_sample_1m[:5000], gm_parry.to_measure(), 1, tol=0.5)
    assert report.per_length[0].sum_estimates == 1.0


def test_testers_require_minimum_mass(gm_parry):
    with pytest.raises(ValidationError):
        S.test_aligned("01" * 10, gm_parry.to_measure(), 4, tol=0.01)


def test_mass_conservation_identity(gm_parry, parry_sample_1m):
    # if every estimate is below target + t, every estimate is above
    # target - |A|^ell * t (aligned estimates sum to exactly 1)
    x = parry_sample_1m[:100_000]
    mu = gm_parry.to_measure()
    report = S.test_aligned(x, mu, 3, tol=1.0)
    for stats in report.per_length:
        ell = stats.block_length
        t = max(est - tgt for est, tgt in stats.table.values())
        t = max(t, 0.0)
        slack = (2**ell) * t + 1e-12
        for est, tgt in stats.table.values():
            assert est >= tgt - slack


def test_three_testers_agree_on_corpus(gm_parry, parry_sample_1m, periodic_1m,
                                       skewed_sample_1m):
    mu = gm_parry.to_measure()
    for x, expected in [
        (parry_sample_1m[:300_000], True),
        (periodic_1m[:300_000], False),
        (skewed_sample_1m[:300_000], False),
    ]:
        verdicts = (
            S.test_aligned(x, mu, 4, tol=0.01).consistent,
            S.test_strong_aligned(x, mu, 4, 4, tol=0.01).consistent,
            S.test_nonaligned(x, mu, 4, tol=0.01).consistent,
        )
        assert verdicts == (expected,) * 3


def test_default_tolerance_rule():
    assert default_tolerance(10**6) >= 0.01
    assert default_tolerance(100) > default_tolerance(10**6)


def test_report_json(gm_parry, parry_sample_1m):
    report = S.test_aligned(parry_sample_1m[:10_000], gm_parry.to_measure(), 2, tol=0.02)
    obj = report.to_json_dict()
    assert obj["definition"] == "aligned"
    assert obj["consistent"] is True
    assert len(obj["per_length"]) == 2
