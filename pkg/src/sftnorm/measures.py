"""Probability measures on finite words: Bernoulli, Markov, Parry, empirical.

A measure assigns each word a value in [0,1] with mu(empty) = 1 and
sum_a mu(wa) = mu(w).  Markov measures evaluate the product
pi[w1] * P[w1,w2] * ... ; the "empirical" kind uses the same product but
starts every word with weight 1/M instead of a stationary distribution
(the form produced by bigram estimation), so it is generally not shift
invariant.  All logarithms are base 2 and 0*log(0) = 0.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapError, ValidationError
from .sft import DEFAULT_BLOCK_CAP, ShiftSpec, is_irreducible

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Measure:
    """Word measure with an evaluate() method; immutable.

    kind is one of "bernoulli", "markov", "empirical".  For bernoulli only
    `initial` is used (the per-symbol weights); for the Markov kinds
    `initial` is the first-symbol weight vector and `P` the row-stochastic
    transition matrix.
    """

    kind: str
    symbols: tuple[str, ...]
    initial: np.ndarray
    P: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("bernoulli", "markov", "empirical"):
            raise ValidationError(f"unknown measure kind {self.kind!r}")
        if len(self.initial) != len(self.symbols):
            raise ValidationError("weight vector length must match symbol count")

    def index(self, sym: str) -> int:
        try:
            return self.symbols.index(sym)
        except ValueError:
            raise ValidationError(f"symbol {sym!r} not in measure alphabet") from None

    def evaluate(self, word: str) -> float:
        """Probability of the word; 1.0 for the empty word."""
        if not word:
            return 1.0
        i = self.index(word[0])
        value = float(self.initial[i])
        if self.kind == "bernoulli":
            for c in word[1:]:
                value *= float(self.initial[self.index(c)])
            return value
        prev = i
        for c in word[1:]:
            cur = self.index(c)
            value *= float(self.P[prev, cur])
            prev = cur
        return value

    def to_json_dict(self) -> dict:
        obj = {"kind": self.kind, "symbols": list(self.symbols)}
        if self.kind == "bernoulli":
            obj["weights"] = [float(v) for v in self.initial]
        else:
            obj["pi"] = [float(v) for v in self.initial]
            obj["P"] = [[float(v) for v in row] for row in self.P]
        return obj


def measure_from_json(obj: dict) -> Measure:
    kind = obj.get("kind")
    symbols = tuple(obj.get("symbols", ()))
    if kind == "bernoulli":
        weights = {s: w for s, w in zip(symbols, obj["weights"])}
        return bernoulli(weights)
    if kind in ("markov", "empirical"):
        pi = np.array(obj["pi"], dtype=float)
        P = np.array(obj["P"], dtype=float)
        if kind == "markov":
            return markov(symbols, pi, P)
        return empirical(symbols, P)
    raise ValidationError(f"unknown measure kind {kind!r}")


def loads_measure(text: str) -> Measure:
    return measure_from_json(json.loads(text))


def bernoulli(weights: dict[str, float]) -> Measure:
    """Product measure from per-symbol weights that sum to 1."""
    symbols = tuple(weights)
    vec = np.array([weights[s] for s in symbols], dtype=float)
    if abs(float(vec.sum()) - 1.0) > _SUM_TOL:
        raise ValidationError(f"weights sum to {vec.sum()}, not 1")
    if np.any(vec < 0) or np.any(vec > 1):
        raise ValidationError("weights must lie in [0, 1]")
    return Measure(kind="bernoulli", symbols=symbols, initial=vec)


def markov(symbols, pi, P, stationary_tol: float = 1e-8) -> Measure:
    """Markov measure mu(a1..ak) = pi[a1] P[a1,a2] ... P[a_{k-1},ak].

    Warns (rather than fails) when pi is not stationary for P: the product
    formula still defines a measure, just not an invariant one.
    """
    symbols = tuple(symbols)
    pi = np.asarray(pi, dtype=float)
    P = np.asarray(P, dtype=float)
    k = len(symbols)
    if pi.shape != (k,) or P.shape != (k, k):
        raise ValidationError("dimension mismatch between symbols, pi, and P")
    if abs(float(pi.sum()) - 1.0) > _SUM_TOL:
        raise ValidationError(f"pi sums to {pi.sum()}, not 1")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-9):
        raise ValidationError("P must be row-stochastic")
    if float(np.max(np.abs(pi @ P - pi))) > stationary_tol:
        warnings.warn("pi is not stationary for P; measure is not shift invariant", stacklevel=2)
    return Measure(kind="markov", symbols=symbols, initial=pi, P=P)


def empirical(symbols, P) -> Measure:
    """Bigram-style measure: every first symbol weighted 1/M."""
    symbols = tuple(symbols)
    P = np.asarray(P, dtype=float)
    m = len(symbols)
    if P.shape != (m, m):
        raise ValidationError("dimension mismatch between symbols and P")
    init = np.full(m, 1.0 / m)
    return Measure(kind="empirical", symbols=symbols, initial=init, P=P)


@dataclass(frozen=True)
class ParryMeasure:
    """Maximal-entropy Markov measure of an irreducible spec.

    P[i,j] = M[i,j] * r[j] / (lam * r[i]) and pi[i] = l[i] * r[i] for the
    dominant eigendata (lam, l, r) with l @ r = 1.
    """

    spec: ShiftSpec
    eigenvalue: float
    pi: np.ndarray
    P: np.ndarray

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.spec.alphabet

    def evaluate(self, word: str) -> float:
        return self.to_measure().evaluate(word)

    def to_measure(self) -> Measure:
        return Measure(kind="markov", symbols=self.spec.alphabet, initial=self.pi, P=self.P)

    def to_json_dict(self) -> dict:
        return {
            "eigenvalue": self.eigenvalue,
            "entropy_bits": math.log2(self.eigenvalue),
            "symbols": list(self.spec.alphabet),
            "pi": [float(v) for v in self.pi],
            "P": [[float(v) for v in row] for row in self.P],
        }


def parry(spec: ShiftSpec, tol: float = 1e-12) -> ParryMeasure:
    """Construct and audit the Parry measure of an irreducible spec."""
    from .spectral import perron

    if not is_irreducible(spec):
        raise ValidationError("Parry measure needs an irreducible spec")
    data = perron(spec, tol=tol)
    lam, left, right = data.eigenvalue, data.left, data.right
    k = spec.n_symbols
    P = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if spec.matrix[i][j]:
                P[i, j] = right[j] / (lam * right[i])
    pi = left * right

    if np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-10:
        raise ValidationError("Parry rows failed to normalize; spectral data inconsistent")
    if abs(float(pi.sum()) - 1.0) > 1e-10 or np.max(np.abs(pi @ P - pi)) > 1e-10:
        raise ValidationError("Parry stationary vector inconsistent")
    # zero pattern must match the matrix exactly
    if any(
        (P[i, j] == 0.0) != (spec.matrix[i][j] == 0)
        for i in range(k)
        for j in range(k)
    ):
        raise ValidationError("Parry zero pattern does not match the spec")
    return ParryMeasure(spec=spec, eigenvalue=lam, pi=pi, P=P)


def markov_entropy(pi, P) -> float:
    """Entropy rate -sum_i pi_i sum_j P_ij log2 P_ij in bits per symbol."""
    pi = np.asarray(pi, dtype=float)
    P = np.asarray(P, dtype=float)
    if P.shape != (len(pi), len(pi)):
        raise ValidationError("dimension mismatch between pi and P")
    total = 0.0
    for i in range(len(pi)):
        for j in range(len(pi)):
            p = P[i, j]
            if p > 0.0 and pi[i] > 0.0:
                total -= pi[i] * p * math.log2(p)
    return total


def measure_entropy_truncated(mu, n: int, cap: int = DEFAULT_BLOCK_CAP) -> float:
    """n-th term -(1/n) sum_{|w|=n} mu(w) log2 mu(w) of the entropy limit."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    values = _word_values(mu, n, cap)
    pos = values[values > 0]
    return float(-(pos * np.log2(pos)).sum() / n)


def is_invariant(mu, spec: ShiftSpec, max_len: int, tol: float = 1e-9,
                 cap: int = DEFAULT_BLOCK_CAP) -> bool:
    """Bounded check of sum_a mu(aw) = mu(w) for all |w| <= max_len."""
    k = len(mu.symbols)
    for ell in range(0, max_len + 1):
        v = _word_values(mu, ell, cap)
        v_ext = _word_values(mu, ell + 1, cap)
        # words aw in lex order: leading symbol is the most significant digit
        summed = v_ext.reshape(k, -1).sum(axis=0)
        if float(np.max(np.abs(summed - v))) > tol:
            return False
    return True


def is_compatible(mu, spec: ShiftSpec, max_len: int, cap: int = DEFAULT_BLOCK_CAP) -> bool:
    """True iff mu(w) > 0 implies w is a block, for all |w| <= max_len."""
    if tuple(mu.symbols) != spec.alphabet:
        raise ValidationError("measure and spec alphabets differ")
    k = spec.n_symbols
    allowed = spec.matrix_array().astype(bool)
    for ell in range(1, max_len + 1):
        v = _word_values(mu, ell, cap)
        legal = _legal_mask(allowed, ell)
        if np.any((v > 0.0) & ~legal):
            return False
    return True


def total_block_mass(mu, spec: ShiftSpec, ell: int, cap: int = DEFAULT_BLOCK_CAP) -> float:
    """sum of mu over the length-ell blocks of the spec (vectorized)."""
    if tuple(mu.symbols) != spec.alphabet:
        raise ValidationError("measure and spec alphabets differ")
    v = _word_values(mu, ell, cap)
    legal = _legal_mask(spec.matrix_array().astype(bool), ell)
    return float(v[legal].sum())


def _word_values(mu, ell: int, cap: int) -> np.ndarray:
    """mu over all |A|^ell words in lex order (alphabet order per position)."""
    if isinstance(mu, ParryMeasure):
        mu = mu.to_measure()
    k = len(mu.symbols)
    if k**ell > cap:
        raise EnumerationCapError(f"{k}^{ell} words exceed cap {cap}")
    if ell == 0:
        return np.ones(1)
    values = np.asarray(mu.initial, dtype=float).copy()
    last = np.arange(k)
    if mu.kind == "bernoulli":
        step = np.asarray(mu.initial, dtype=float)
        for _ in range(ell - 1):
            values = (values[:, None] * step[None, :]).ravel()
        return values
    P = np.asarray(mu.P, dtype=float)
    for _ in range(ell - 1):
        values = (values[:, None] * P[last, :]).ravel()
        last = np.tile(np.arange(k), len(last))
    return values


def _legal_mask(allowed: np.ndarray, ell: int) -> np.ndarray:
    """Boolean mask over A^ell in lex order marking the blocks."""
    k = allowed.shape[0]
    mask = np.ones(k, dtype=bool)
    last = np.arange(k)
    for _ in range(ell - 1):
        mask = (mask[:, None] & allowed[last, :]).ravel()
        last = np.tile(np.arange(k), len(last))
    return mask
