import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sftnorm as S
from sftnorm.errors import ValidationError
from sftnorm.occurrences import build_occurrence_table


def naive_occ(w, u):
    return sum(1 for i in range(len(w) - len(u) + 1) if w[i : i + len(u)] == u)


def naive_alocc(w, u, r):
    ell = len(u)
    return sum(
        1
        for i in range(1, len(w) - ell + 2)
        if i % ell == r % ell and w[i - 1 : i - 1 + ell] == u
    )


def test_reference_triple():
    assert S.occ("aaaa", "aa") == 3
    assert S.alocc("aaaa", "aa") == 2
    assert S.alocc("aaaa", "aa", 2) == 1


def test_occ_examples():
    assert S.occ("ababa", "aba") == 2
    for w in ["x", "abc", "0101"]:
        assert S.occ(w, w) == 1
    assert S.occ("ab", "abc") == 0
    with pytest.raises(ValidationError):
        S.occ("ab", "")


def test_alocc_residues_partition():
    for w_len in range(0, 12):
        for w in ("01" * 6)[:w_len], ("0011" * 3)[:w_len]:
            for u in ["0", "01", "001"]:
                total = sum(S.alocc(w, u, r) for r in range(1, len(u) + 1))
                assert total == S.occ(w, u)


def test_alocc_offset_validation():
    with pytest.raises(ValidationError):
        S.alocc("0101", "01", 0)
    with pytest.raises(ValidationError):
        S.alocc("0101", "01", 3)


def test_alocc_star():
    assert S.alocc_star("aaaa", "aa") == 2
    assert S.alocc_star("abab", "ba") == 1
    for w in ["ab", "0101", "xyz"]:
        assert S.alocc_star(w, w) == 1


@settings(max_examples=150, deadline=None)
@given(
    st.text(alphabet="ab", min_size=0, max_size=40),
    st.text(alphabet="ab", min_size=1, max_size=4),
)
def test_counts_match_naive_scanner(w, u):
    assert S.occ(w, u) == naive_occ(w, u)
    for r in range(1, len(u) + 1):
        assert S.alocc(w, u, r) == naive_alocc(w, u, r)


def test_occ_decomposes_into_shifted_aligned_counts():
    # occ over a prefix equals the sum of offset-1 aligned counts of the tails
    words = ["0110100101", "0000000000", "0101010101", "1001100110"]
    for x in words:
        for ell in (1, 2, 3):
            for u in ("".join(t) for t in itertools.product("01", repeat=ell)):
                total = sum(
                    S.alocc(S.shift_prefix(x, i), u) for i in range(ell)
                )
                assert total == S.occ(x, u)


def test_aligned_increment_bound(parry_sample_1m):
    # between consecutive multiples of k blocks, at most k new aligned hits
    x = parry_sample_1m[:5000]
    ell, k = 2, 5
    u = "01"
    prev = S.alocc(x[: 1 * k * ell], u)
    for n in range(1, 40):
        cur = S.alocc(x[: (n + 1) * k * ell], u)
        assert 0 <= cur - prev <= k
        prev = cur


def test_k_multiple_prefixes_control_all_prefixes(parry_sample_1m, periodic_1m):
    # between bracketing k-multiples at most k aligned hits appear, so the
    # frequency at any m in [kn, k(n+1)] is within k/m of the one at kn
    for x in (parry_sample_1m[:4000], periodic_1m[:4000]):
        for ell, k in [(1, 3), (2, 4), (3, 2)]:
            for u in ["0" * ell, ("01" * ell)[:ell]]:
                for n in range(1, 300 // k):
                    base = S.alocc(x[: k * n * ell], u) / (k * n)
                    for m in range(k * n, k * (n + 1) + 1):
                        cur = S.alocc(x[: m * ell], u) / m
                        assert abs(cur - base) <= k / m + 1e-12


def test_relative_frequency():
    assert S.relative_frequency("0101", "01") == 1.0
    assert S.relative_frequency("0110", "01") == 0.5
    with pytest.raises(ValidationError):
        S.relative_frequency("01011", "01")
    for u in ["01100110", "00000000", "01010101"]:
        total = sum(
            S.relative_frequency(u, "".join(t)) for t in itertools.product("01", repeat=2)
        )
        assert abs(total - 1.0) < 1e-12


def test_block_entropy():
    assert S.block_entropy("0" * 64, 4) == 0.0
    assert S.block_entropy("01010101", 1) == 1.0
    assert S.block_entropy("01010101", 2) == 0.0
    assert 0.0 <= S.block_entropy("0110011010", 1) <= 1.0


def test_block_entropy_permutation_invariant():
    u = "011010"
    chunks = [u[i : i + 2] for i in range(0, 6, 2)]
    for perm in itertools.permutations(chunks):
        assert S.block_entropy("".join(perm), 2) == S.block_entropy(u, 2)


def test_block_entropy_prefix(golden, gm_parry, parry_sample_1m):
    const = S.block_entropy_prefix("0" * 1000, 5)
    assert const.value == 0.0 and const.trailing_min == 0.0
    single = S.block_entropy_prefix("0110", 4)
    assert single.value == 0.0
    # estimator against the exact Parry block-entropy target at ell = 4
    mu = gm_parry.to_measure()
    target = sum(
        -mu.evaluate(w) * math.log2(mu.evaluate(w))
        for w in S.blocks(golden, 4).words
        if mu.evaluate(w) > 0
    ) / 4
    est = S.block_entropy_prefix(parry_sample_1m, 4)
    assert abs(est.value - target) < 0.02
    assert abs(est.trailing_min - target) < 0.02


def test_occurrence_table_invariants(parry_sample_1m):
    x = parry_sample_1m[:20_000]
    for ell in (1, 2, 3, 4):
        table = build_occurrence_table(x, ell, alphabet="01")
        assert table.prefix_length == len(x)
        aligned_total = 0
        for u, (occ_count, aligned) in table.counts.items():
            assert occ_count == S.occ(x, u)
            assert occ_count == sum(aligned)
            assert aligned[0] == S.alocc(x, u)
            aligned_total += aligned[0]
        assert aligned_total <= len(x) // ell


@settings(max_examples=60, deadline=None)
@given(
    st.text(alphabet="01", min_size=2, max_size=200),
    st.integers(1, 4),
    st.integers(1, 50),
)
def test_chunked_table_merge_exact(x, ell, chunk):
    whole = build_occurrence_table(x, ell, alphabet="01")
    chunked = build_occurrence_table(x, ell, alphabet="01", chunk_size=chunk)
    assert whole.counts == chunked.counts


def test_table_json(parry_sample_1m):
    table = build_occurrence_table(parry_sample_1m[:1000], 2, alphabet="01")
    obj = table.to_json_dict()
    assert obj["block_length"] == 2
    assert "11" not in obj["counts"]
    assert obj["counts"]["01"]["occ"] == S.occ(parry_sample_1m[:1000], "01")
