"""Shifts of finite type presented by 0/1 transition matrices.

A shift is specified by an ordered alphabet of single glyphs and a square
0/1 matrix m where m[a][b] = 1 iff the two-glyph factor ab is allowed.
Equivalently, the forbidden set is the set of pairs with m[a][b] = 0;
longer forbidden factors are rejected rather than recoded.  Blocks are the
finite words all of whose adjacent pairs are allowed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import gcd, log2
from pathlib import Path

import numpy as np

from .errors import EnumerationCapError, ValidationError

#: Default cap on how many words a block enumeration may produce.
DEFAULT_BLOCK_CAP = 1 << 22


@dataclass(frozen=True)
class ShiftSpec:
    """Alphabet plus allowed-pair matrix; immutable and hashable."""

    alphabet: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.alphabet) < 2:
            raise ValidationError("alphabet needs at least 2 symbols")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValidationError("alphabet symbols must be distinct")
        for sym in self.alphabet:
            if not isinstance(sym, str) or len(sym) != 1:
                raise ValidationError(f"symbol {sym!r} is not a single glyph")
        k = len(self.alphabet)
        if len(self.matrix) != k or any(len(row) != k for row in self.matrix):
            raise ValidationError("matrix dimension must equal alphabet size")
        for row in self.matrix:
            for entry in row:
                if entry not in (0, 1):
                    raise ValidationError("matrix entries must be 0 or 1")

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    def index(self, sym: str) -> int:
        try:
            return self.alphabet.index(sym)
        except ValueError:
            raise ValidationError(f"symbol {sym!r} not in alphabet") from None

    def allowed(self, a: str, b: str) -> bool:
        return self.matrix[self.index(a)][self.index(b)] == 1

    def forbidden_pairs(self) -> set[str]:
        """The forbidden two-glyph factors; reproduces the matrix exactly."""
        return {
            a + b
            for i, a in enumerate(self.alphabet)
            for j, b in enumerate(self.alphabet)
            if self.matrix[i][j] == 0
        }

    def matrix_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    def index_map(self) -> dict[str, int]:
        return {sym: i for i, sym in enumerate(self.alphabet)}

    def encode(self, word: str) -> np.ndarray:
        """Word as an int64 index array; rejects unknown symbols."""
        idx = self.index_map()
        try:
            return np.array([idx[c] for c in word], dtype=np.int64)
        except KeyError as exc:
            raise ValidationError(f"symbol {exc.args[0]!r} not in alphabet") from None

    def to_json_dict(self) -> dict:
        return {"alphabet": list(self.alphabet), "matrix": [list(r) for r in self.matrix]}


@dataclass(frozen=True)
class BlockSet:
    """All blocks of one length, as a frozen set of words."""

    length: int
    words: frozenset[str]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, w: str) -> bool:
        return w in self.words

    def sorted_words(self) -> list[str]:
        return sorted(self.words)


def matrix_from_forbidden(alphabet, forbidden) -> ShiftSpec:
    """Build a spec whose matrix has zeros exactly on the forbidden pairs."""
    alphabet = tuple(alphabet)
    probe = ShiftSpec(alphabet, tuple((1,) * len(alphabet) for _ in alphabet))
    idx = probe.index_map()
    matrix = [[1] * len(alphabet) for _ in alphabet]
    for w in forbidden:
        if len(w) != 2:
            raise ValidationError(
                f"forbidden block {w!r} has length {len(w)}; only length-2 blocks "
                "are supported (recode longer blocks to a larger alphabet first)"
            )
        if w[0] not in idx or w[1] not in idx:
            raise ValidationError(f"forbidden block {w!r} uses unknown symbols")
        matrix[idx[w[0]]][idx[w[1]]] = 0
    return ShiftSpec(alphabet, tuple(tuple(row) for row in matrix))


def full_shift(alphabet) -> ShiftSpec:
    return matrix_from_forbidden(alphabet, set())


def golden_mean_spec() -> ShiftSpec:
    return matrix_from_forbidden("01", {"11"})


def is_block(spec: ShiftSpec, w: str) -> bool:
    """True iff every adjacent pair of w is allowed (empty word included)."""
    idx = spec.index_map()
    prev = None
    for c in w:
        if c not in idx:
            raise ValidationError(f"symbol {c!r} not in alphabet")
        cur = idx[c]
        if prev is not None and spec.matrix[prev][cur] == 0:
            return False
        prev = cur
    return True


def blocks(spec: ShiftSpec, n: int, cap: int = DEFAULT_BLOCK_CAP) -> BlockSet:
    """Enumerate the length-n blocks; errors if the set would exceed `cap`."""
    if n < 1:
        raise ValidationError("block length must be >= 1")
    if count_blocks(spec, n) > cap:
        raise EnumerationCapError(
            f"{count_blocks(spec, n)} blocks of length {n} exceed cap {cap}"
        )
    words = list(spec.alphabet)
    for _ in range(n - 1):
        nxt = []
        for w in words:
            i = spec.index(w[-1])
            for j, b in enumerate(spec.alphabet):
                if spec.matrix[i][j]:
                    nxt.append(w + b)
        words = nxt
    return BlockSet(length=n, words=frozenset(words))


def count_blocks(spec: ShiftSpec, n: int) -> int:
    """|B_n| as an exact integer: the total of the (n-1)-th matrix power."""
    if n < 1:
        raise ValidationError("block length must be >= 1")
    power = int_matrix_power([list(r) for r in spec.matrix], n - 1)
    return sum(sum(row) for row in power)


def int_matrix_power(mat: list[list[int]], e: int) -> list[list[int]]:
    """Exact nonnegative-integer matrix power (Python ints, no overflow)."""
    k = len(mat)
    result = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    base = [row[:] for row in mat]
    while e > 0:
        if e & 1:
            result = _int_matmul(result, base)
        base = _int_matmul(base, base)
        e >>= 1
    return result


def _int_matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    k = len(a)
    return [
        [sum(a[i][t] * b[t][j] for t in range(k)) for j in range(k)]
        for i in range(k)
    ]


def is_irreducible(spec: ShiftSpec) -> bool:
    """True iff the symbol graph {a -> b : m_ab = 1} is strongly connected."""
    k = spec.n_symbols
    fwd = _reachable(spec.matrix, 0)
    bwd = _reachable(tuple(zip(*spec.matrix)), 0)
    return len(fwd) == k and len(bwd) == k


def _reachable(matrix, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, entry in enumerate(matrix[u]):
            if entry and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def is_aperiodic(spec: ShiftSpec) -> bool:
    """For an irreducible spec: gcd of all cycle lengths equals 1.

    Computed from BFS levels: every edge u -> v contributes
    gcd-term level(u) + 1 - level(v), and the gcd of all terms over a
    strongly connected graph is the period.
    """
    if not is_irreducible(spec):
        raise ValidationError("aperiodicity is only defined for irreducible specs")
    k = spec.n_symbols
    level = [-1] * k
    level[0] = 0
    queue = [0]
    g = 0
    while queue:
        u = queue.pop(0)
        for v, entry in enumerate(spec.matrix[u]):
            if not entry:
                continue
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = gcd(g, level[u] + 1 - level[v])
    return abs(g) == 1


def topological_entropy(spec: ShiftSpec) -> float:
    """log2 of the dominant eigenvalue; growth rate of the block counts."""
    if not is_irreducible(spec):
        raise ValidationError("entropy via the dominant eigenvalue needs an irreducible spec")
    from .spectral import perron

    return log2(perron(spec).eigenvalue)


def shift_prefix(x: str, k: int) -> str:
    """Drop the first k symbols of a finite word."""
    if k < 0 or k > len(x):
        raise ValidationError(f"shift amount {k} outside 0..{len(x)}")
    return x[k:]


# ---------------------------------------------------------------------------
# File formats


def parse_shift_spec(obj: dict) -> ShiftSpec:
    """Spec from a JSON object with exactly one of "forbidden"/"matrix"."""
    if not isinstance(obj, dict) or "alphabet" not in obj:
        raise ValidationError('shift spec must be an object with an "alphabet" key')
    has_forbidden = "forbidden" in obj
    has_matrix = "matrix" in obj
    if has_forbidden == has_matrix:
        raise ValidationError('exactly one of "forbidden" or "matrix" must be present')
    alphabet = tuple(obj["alphabet"])
    if has_forbidden:
        return matrix_from_forbidden(alphabet, obj["forbidden"])
    try:
        matrix = tuple(tuple(int(v) for v in row) for row in obj["matrix"])
    except (TypeError, ValueError):
        raise ValidationError("matrix must be a square array of 0/1 integers") from None
    return ShiftSpec(alphabet, matrix)


def load_shift_spec(path) -> ShiftSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from None
    return parse_shift_spec(obj)


def load_sequence(path, cap: int = 1 << 30) -> str:
    """Sequence file: one glyph per symbol, all whitespace ignored."""
    text = Path(path).read_text()
    seq = "".join(text.split())
    if len(seq) > cap:
        raise ValidationError(f"sequence of {len(seq)} symbols exceeds cap {cap}")
    return seq


def save_sequence(path, seq: str, width: int = 100) -> None:
    with open(path, "w") as fh:
        for i in range(0, len(seq), width):
            fh.write(seq[i : i + width])
            fh.write("\n")
