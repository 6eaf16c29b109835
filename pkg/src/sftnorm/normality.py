"""Finite-prefix testers for the three equivalent normality definitions.

A sequence is normal in a shift when the frequency of every block
converges to its Parry-measure value; the three classical formulations are
aligned frequencies, aligned frequencies of every shifted tail, and plain
(non-aligned) frequencies.  On a finite prefix these limits can only be
estimated, so the testers report deviations against a threshold and the
verdict is an estimator, never a proof.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from . import prng
from .errors import ValidationError
from .occurrences import aligned_counts, decode_index, occurrence_counts
from .sft import ShiftSpec, is_irreducible, shift_prefix

#: per-(length, shift) minimum number of aligned slots the tester demands
DEFAULT_MIN_SLOTS = 100


def default_tolerance(n: int) -> float:
    """Threshold scaling with prefix length: max(0.01, 3 sqrt(log2(n)/n))."""
    if n < 2:
        return 1.0
    return max(0.01, 3.0 * math.sqrt(math.log2(n) / n))


@dataclass
class LengthStats:
    """Deviation summary for one block length (and one tail shift)."""

    block_length: int
    shift: int
    slots: int
    max_deviation: float
    worst_word: str
    sum_estimates: float
    table: dict[str, tuple[float, float]] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "block_length": self.block_length,
            "shift": self.shift,
            "slots": self.slots,
            "max_deviation": self.max_deviation,
            "worst_word": self.worst_word,
            "sum_estimates": self.sum_estimates,
            "estimates": {
                w: {"estimate": est, "target": tgt} for w, (est, tgt) in sorted(self.table.items())
            },
        }


@dataclass
class NormalityReport:
    """Verdict plus per-length deviations for one normality definition."""

    definition: str
    consistent: bool
    tolerance: float
    prefix_length: int
    max_block_length: int
    shifts_tested: tuple[int, ...]
    per_length: list[LengthStats]

    @property
    def max_deviation(self) -> float:
        return max((s.max_deviation for s in self.per_length), default=0.0)

    def to_json_dict(self) -> dict:
        return {
            "definition": self.definition,
            "consistent": self.consistent,
            "tolerance": self.tolerance,
            "prefix_length": self.prefix_length,
            "max_block_length": self.max_block_length,
            "shifts_tested": list(self.shifts_tested),
            "max_deviation": self.max_deviation,
            "per_length": [s.to_json_dict() for s in self.per_length],
        }


_TABLE_LIMIT = 256  # full estimate tables only for small A^ell


def _length_stats(x, mu, ell, shift, tol, aligned, min_slots):
    symbols = tuple(mu.symbols)
    k = len(symbols)
    if aligned:
        n_units = len(x) // ell
        counts = aligned_counts(x, ell, symbols)
    else:
        n_units = len(x)
        counts = occurrence_counts(x, ell, symbols)
    if n_units < min_slots:
        raise ValidationError(
            f"prefix gives {n_units} slots at block length {ell}; below minimum {min_slots}"
        )
    estimates = counts / n_units
    max_dev = -1.0
    worst = ""
    table: dict[str, tuple[float, float]] = {}
    keep_table = k**ell <= _TABLE_LIMIT
    for code in range(k**ell):
        w = decode_index(code, ell, symbols)
        target = mu.evaluate(w)
        est = float(estimates[code])
        dev = abs(est - target)
        if dev > max_dev:
            max_dev, worst = dev, w
        if keep_table and (est > 0.0 or target > 0.0):
            table[w] = (est, target)
    return LengthStats(
        block_length=ell,
        shift=shift,
        slots=n_units,
        max_deviation=max_dev,
        worst_word=worst,
        sum_estimates=float(estimates.sum()),
        table=table,
    )


def test_aligned(x: str, mu, l_max: int, tol: float | None = None,
                 min_slots: int = DEFAULT_MIN_SLOTS) -> NormalityReport:
    """Compare offset-1 aligned block frequencies to mu, lengths 1..l_max."""
    if tol is None:
        tol = default_tolerance(len(x))
    if len(x) < min_slots * l_max:
        raise ValidationError(f"prefix of {len(x)} symbols too short for l_max={l_max}")
    stats = [_length_stats(x, mu, ell, 0, tol, True, min_slots) for ell in range(1, l_max + 1)]
    return NormalityReport(
        definition="aligned",
        consistent=all(s.max_deviation <= tol for s in stats),
        tolerance=tol,
        prefix_length=len(x),
        max_block_length=l_max,
        shifts_tested=(0,),
        per_length=stats,
    )


def test_strong_aligned(x: str, mu, l_max: int, k_max: int, tol: float | None = None,
                        min_slots: int = DEFAULT_MIN_SLOTS) -> NormalityReport:
    """Aligned test on every tail shifted by 0..k_max; verdict is the conjunction."""
    if k_max < 0:
        raise ValidationError("k_max must be >= 0")
    if tol is None:
        tol = default_tolerance(len(x))
    if len(x) - k_max < min_slots * l_max:
        raise ValidationError(f"prefix of {len(x)} symbols too short for l_max={l_max}, k_max={k_max}")
    stats = []
    for k in range(k_max + 1):
        tail = shift_prefix(x, k)
        stats.extend(
            _length_stats(tail, mu, ell, k, tol, True, min_slots)
            for ell in range(1, l_max + 1)
        )
    return NormalityReport(
        definition="strong_aligned",
        consistent=all(s.max_deviation <= tol for s in stats),
        tolerance=tol,
        prefix_length=len(x),
        max_block_length=l_max,
        shifts_tested=tuple(range(k_max + 1)),
        per_length=stats,
    )


def test_nonaligned(x: str, mu, l_max: int, tol: float | None = None,
                    min_slots: int = DEFAULT_MIN_SLOTS) -> NormalityReport:
    """Compare occurrence frequencies at every position to mu."""
    if tol is None:
        tol = default_tolerance(len(x))
    if len(x) < min_slots * l_max:
        raise ValidationError(f"prefix of {len(x)} symbols too short for l_max={l_max}")
    stats = [_length_stats(x, mu, ell, 0, tol, False, min_slots) for ell in range(1, l_max + 1)]
    return NormalityReport(
        definition="nonaligned",
        consistent=all(s.max_deviation <= tol for s in stats),
        tolerance=tol,
        prefix_length=len(x),
        max_block_length=l_max,
        shifts_tested=(0,),
        per_length=stats,
    )


def sample_parry(spec: ShiftSpec, n: int, seed: int) -> str:
    """Length-n word sampled from the Parry chain of the spec.

    The initial symbol is drawn from the stationary vector and successors
    from the transition rows, consuming one splitmix64 uniform per symbol;
    a fixed seed gives a bit-identical word on every platform.
    """
    from .measures import parry

    pm = parry(spec)
    return _sample_chain(spec.alphabet, pm.pi, pm.P, n, seed)


def sample_skewed(spec: ShiftSpec, Q, n: int, seed: int) -> str:
    """Markov sample from a compatible transition matrix Q (valid in the shift).

    The initial symbol is drawn from the stationary distribution of Q so
    block frequencies match the chain's long-run behavior from the start.
    """
    Q = np.asarray(Q, dtype=float)
    k = spec.n_symbols
    if Q.shape != (k, k):
        raise ValidationError("Q dimension must match the alphabet")
    if np.any(np.abs(Q.sum(axis=1) - 1.0) > 1e-9):
        raise ValidationError("Q must be row-stochastic")
    for i in range(k):
        for j in range(k):
            if Q[i, j] > 0.0 and spec.matrix[i][j] == 0:
                raise ValidationError(
                    f"Q[{i},{j}] > 0 but pair "
                    f"{spec.alphabet[i]}{spec.alphabet[j]} is forbidden"
                )
    support = ShiftSpec(
        spec.alphabet,
        tuple(tuple(1 if Q[i, j] > 0 else 0 for j in range(k)) for i in range(k)),
    )
    if not is_irreducible(support):
        raise ValidationError("Q must be irreducible")
    pi = _stationary(Q)
    return _sample_chain(spec.alphabet, pi, Q, n, seed)


def _stationary(P: np.ndarray, iters: int = 200_000, tol: float = 1e-14) -> np.ndarray:
    k = P.shape[0]
    v = np.ones(k) / k
    for _ in range(iters):
        w = v @ P
        if float(np.abs(w - v).sum()) < tol:
            return w / w.sum()
        v = w
    return v / v.sum()


def _sample_chain(symbols, pi, P, n: int, seed: int) -> str:
    if n < 1:
        raise ValidationError("sample length must be >= 1")
    us = prng.uniforms(seed, n)
    P = np.asarray(P, dtype=float)
    pi = np.asarray(pi, dtype=float)
    cum_pi = list(np.cumsum(pi))
    cum_rows = [list(np.cumsum(row)) for row in P]
    # overflow clamp must land on a positive-probability symbol
    clamp_pi = int(np.max(np.nonzero(pi > 0)))
    clamp_rows = [int(np.max(np.nonzero(row > 0))) for row in P]
    state = min(bisect_right(cum_pi, us[0]), clamp_pi)
    out = [symbols[state]]
    append = out.append
    for t in range(1, n):
        nxt = bisect_right(cum_rows[state], us[t])
        state = min(nxt, clamp_rows[state])
        append(symbols[state])
    return "".join(out)
