"""Occurrence counting and block-entropy estimation on finite words.

Positions are 1-based.  occ counts every (possibly overlapping) occurrence;
alocc restricts to one residue class of start positions modulo the block
length, with offsets represented by 1..len(u) where len(u) stands for
residue 0.  alocc with the offset omitted means offset 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapError, ValidationError

_TABLE_CAP = 1 << 22


def occ(w: str, u: str) -> int:
    """Occurrences of u in w, overlaps included."""
    if not u:
        raise ValidationError("pattern must be nonempty")
    count = 0
    start = 0
    while True:
        i = w.find(u, start)
        if i < 0:
            return count
        count += 1
        start = i + 1


def alocc(w: str, u: str, r: int = 1) -> int:
    """Occurrences of u at 1-based positions congruent to r modulo len(u)."""
    ell = len(u)
    if ell == 0:
        raise ValidationError("pattern must be nonempty")
    if not 1 <= r <= ell:
        raise ValidationError(f"offset {r} outside 1..{ell}")
    return sum(1 for i in range(r - 1, len(w) - ell + 1, ell) if w[i : i + ell] == u)


def alocc_star(v: str, w: str) -> int:
    """Maximum aligned count over all len(w) offsets."""
    return max(alocc(v, w, r) for r in range(1, len(w) + 1))


def relative_frequency(u: str, w: str) -> float:
    """Aligned frequency len(w) * alocc(u, w) / len(u); len(u) must be a multiple."""
    ell = len(w)
    n = len(u)
    if ell == 0:
        raise ValidationError("block must be nonempty")
    if n == 0 or n % ell != 0:
        raise ValidationError(f"length {n} is not a positive multiple of {ell}; truncate first")
    return ell * alocc(u, w) / n


def block_entropy(u: str, ell: int) -> float:
    """Entropy (bits/symbol) of the aligned ell-block distribution of u."""
    n = len(u)
    if ell < 1 or n == 0 or n % ell != 0:
        raise ValidationError(f"length {n} is not a positive multiple of {ell}")
    counts: dict[str, int] = {}
    for i in range(0, n, ell):
        b = u[i : i + ell]
        counts[b] = counts.get(b, 0) + 1
    slots = n // ell
    total = 0.0
    for c in counts.values():
        p = c / slots
        total -= p * np.log2(p)
    return float(total) / ell


@dataclass(frozen=True)
class PrefixBlockEntropy:
    """Block entropy at the longest usable prefix plus a trailing minimum.

    The trailing minimum over the last tenth of sampled prefix lengths is
    the finite-scale stand-in for a liminf.
    """

    value: float
    trailing_min: float
    prefix_length: int


def block_entropy_prefix(x: str, ell: int, samples: int = 16) -> PrefixBlockEntropy:
    """Estimate the limiting ell-block entropy from a finite prefix."""
    k = len(x) // ell
    if k < 1:
        raise ValidationError("word shorter than one block")
    value = block_entropy(x[: k * ell], ell)
    lo = max(1, int(k * 0.9))
    ks = sorted({lo + round(i * (k - lo) / max(1, samples - 1)) for i in range(samples)})
    trailing = min(block_entropy(x[: kk * ell], ell) for kk in ks if kk >= 1)
    return PrefixBlockEntropy(value=value, trailing_min=trailing, prefix_length=k * ell)


@dataclass
class OccurrenceTable:
    """All length-ell block counts of a word: plain and per-offset aligned.

    counts maps each observed block to (occ, [alocc offset 1, ..., offset ell]).
    """

    block_length: int
    prefix_length: int
    alphabet: tuple[str, ...]
    counts: dict[str, tuple[int, list[int]]]

    def occ_of(self, u: str) -> int:
        return self.counts.get(u, (0, [0] * self.block_length))[0]

    def aligned_of(self, u: str, r: int = 1) -> int:
        return self.counts.get(u, (0, [0] * self.block_length))[1][r - 1]

    def to_json_dict(self) -> dict:
        return {
            "block_length": self.block_length,
            "prefix_length": self.prefix_length,
            "alphabet": list(self.alphabet),
            "counts": {
                u: {"occ": c, "aligned": aligned}
                for u, (c, aligned) in sorted(self.counts.items())
            },
        }


def build_occurrence_table(
    x: str,
    ell: int,
    alphabet=None,
    chunk_size: int | None = None,
) -> OccurrenceTable:
    """Single-pass (optionally chunked) table of all ell-block counts.

    Chunks are counted by start position with an (ell-1)-symbol overlap and
    merged by addition, so chunked and single-pass results are identical.
    """
    if ell < 1:
        raise ValidationError("block length must be >= 1")
    if alphabet is None:
        alphabet = tuple(sorted(set(x)))
    alphabet = tuple(alphabet)
    idx = {sym: i for i, sym in enumerate(alphabet)}
    for c in set(x):
        if c not in idx:
            raise ValidationError(f"symbol {c!r} not in alphabet")
    n = len(x)
    k = len(alphabet)
    if k**ell > _TABLE_CAP:
        raise EnumerationCapError(f"{k}^{ell} table entries exceed cap {_TABLE_CAP}")
    total_starts = n - ell + 1
    occ_counts = np.zeros(k**ell, dtype=np.int64)
    aligned = np.zeros((ell, k**ell), dtype=np.int64)
    if total_starts > 0:
        if chunk_size is None:
            chunk_size = total_starts
        if chunk_size < 1:
            raise ValidationError("chunk size must be >= 1")
        arr = np.array([idx[c] for c in x], dtype=np.int64)
        for s in range(0, total_starts, chunk_size):
            e = min(s + chunk_size, total_starts)
            codes = _window_codes(arr[s : e + ell - 1], ell, k)
            occ_counts += np.bincount(codes, minlength=k**ell)
            for pos_mod in range(ell):
                # global 1-based positions with (i mod ell) == (r mod ell)
                first = (pos_mod - s) % ell
                sel = codes[first::ell]
                if len(sel):
                    aligned[pos_mod] += np.bincount(sel, minlength=k**ell)
    counts: dict[str, tuple[int, list[int]]] = {}
    for code in np.nonzero(occ_counts)[0]:
        word = _decode(int(code), ell, alphabet)
        # offset r=1..ell corresponds to 0-based start residue (r-1) mod ell
        per_offset = [int(aligned[(r - 1) % ell, code]) for r in range(1, ell + 1)]
        counts[word] = (int(occ_counts[code]), per_offset)
    return OccurrenceTable(
        block_length=ell, prefix_length=n, alphabet=alphabet, counts=counts
    )


def _window_codes(arr: np.ndarray, ell: int, k: int) -> np.ndarray:
    """Base-k codes of all length-ell windows of arr."""
    m = len(arr) - ell + 1
    codes = np.zeros(m, dtype=np.int64)
    for j in range(ell):
        codes = codes * k + arr[j : j + m]
    return codes


def _decode(code: int, ell: int, alphabet) -> str:
    k = len(alphabet)
    out = []
    for _ in range(ell):
        out.append(alphabet[code % k])
        code //= k
    return "".join(reversed(out))


def aligned_counts(x: str, ell: int, alphabet) -> np.ndarray:
    """Counts of offset-1 aligned blocks over the prefix of floor(n/ell) blocks."""
    alphabet = tuple(alphabet)
    idx = {sym: i for i, sym in enumerate(alphabet)}
    k = len(alphabet)
    if k**ell > _TABLE_CAP:
        raise EnumerationCapError(f"{k}^{ell} table entries exceed cap {_TABLE_CAP}")
    n_blocks = len(x) // ell
    if n_blocks == 0:
        return np.zeros(k**ell, dtype=np.int64)
    arr = np.array([idx[c] for c in x[: n_blocks * ell]], dtype=np.int64)
    codes = arr.reshape(n_blocks, ell)
    flat = np.zeros(n_blocks, dtype=np.int64)
    for j in range(ell):
        flat = flat * k + codes[:, j]
    return np.bincount(flat, minlength=k**ell)


def occurrence_counts(x: str, ell: int, alphabet) -> np.ndarray:
    """Counts of blocks at every start position (overlapping)."""
    alphabet = tuple(alphabet)
    idx = {sym: i for i, sym in enumerate(alphabet)}
    k = len(alphabet)
    if k**ell > _TABLE_CAP:
        raise EnumerationCapError(f"{k}^{ell} table entries exceed cap {_TABLE_CAP}")
    if len(x) < ell:
        return np.zeros(k**ell, dtype=np.int64)
    arr = np.array([idx[c] for c in x], dtype=np.int64)
    codes = _window_codes(arr, ell, k)
    return np.bincount(codes, minlength=k**ell)


def decode_index(code: int, ell: int, alphabet) -> str:
    """Block corresponding to a base-|alphabet| code (for count arrays)."""
    return _decode(code, ell, tuple(alphabet))
