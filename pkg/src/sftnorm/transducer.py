"""Real-time nondeterministic transducers with recurrent-final acceptance.

A machine reads exactly one input symbol per transition and emits a finite
(possibly empty) output word.  Acceptance on infinite inputs is the
recurrent-final (Buechi) condition; the finite surrogate used here is
viability: a state is viable iff it can reach a cycle through a final
state.  Machines are trimmed at construction so that every state is
accessible from an initial state and viable.

Runs on finite words are genuinely ambiguous near the tail for some
machines, because several complete runs may remain extendable.  run()
therefore returns a canonical run -- the first complete run in depth-first
order over transitions as listed -- and flags whether any other complete
run emits a different output; strict callers can turn the flag into an
error.  Transition order is part of a machine's identity for this purpose.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from pathlib import Path

import numpy as np

from .errors import (
    AmbiguousRunError,
    EnumerationCapError,
    RunRejectedError,
    ValidationError,
)

#: cap on simultaneous (state, output-length) pairs tracked by the ambiguity sweep
DEFAULT_WIDTH_CAP = 1 << 16
#: cap on n * |Q| for the general (nondeterministic) run search
GENERAL_BITS_CAP = 1 << 26


class Transducer:
    """Trim, immutable machine <states, A, B, transitions, I, F>."""

    def __init__(self, states, input_alphabet, output_alphabet, transitions,
                 initial, final, name: str = ""):
        self.states: tuple[str, ...] = tuple(states)
        self.input_alphabet: tuple[str, ...] = tuple(input_alphabet)
        self.output_alphabet: tuple[str, ...] = tuple(output_alphabet)
        self.name = name
        index = {s: i for i, s in enumerate(self.states)}
        if len(index) != len(self.states):
            raise ValidationError("duplicate state names")
        in_set = set(self.input_alphabet)
        out_set = set(self.output_alphabet)
        for sym in self.input_alphabet + self.output_alphabet:
            if not isinstance(sym, str) or len(sym) != 1:
                raise ValidationError(f"alphabet symbol {sym!r} is not a single glyph")
        for s in tuple(initial) + tuple(final):
            if s not in index:
                raise ValidationError(f"initial/final state {s!r} not declared")
        packed = []
        for src, inp, out, dst in transitions:
            if src not in index or dst not in index:
                raise ValidationError(f"transition uses unknown state {src!r} or {dst!r}")
            if inp not in in_set or len(inp) != 1:
                raise ValidationError(f"transition input {inp!r} must be one input symbol")
            if any(c not in out_set for c in out):
                raise ValidationError(f"transition output {out!r} leaves the output alphabet")
            packed.append((index[src], inp, out, index[dst]))
        self.transitions: tuple[tuple[int, str, str, int], ...] = tuple(packed)
        self.initial: tuple[int, ...] = tuple(sorted(index[s] for s in initial))
        self.final: frozenset[int] = frozenset(index[s] for s in final)
        if not self.initial:
            raise ValidationError("machine needs at least one initial state")

        self._step: dict[tuple[int, str], list[tuple[int, str, int]]] = {}
        for tidx, (src, inp, out, dst) in enumerate(self.transitions):
            self._step.setdefault((src, inp), []).append((tidx, out, dst))
        self._sym_arrays: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    # -- structural helpers -------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def max_output_len(self) -> int:
        return max((len(out) for _, _, out, _ in self.transitions), default=0)

    def options(self, state: int, symbol: str) -> list[tuple[int, str, int]]:
        return self._step.get((state, symbol), [])

    def to_json_dict(self) -> dict:
        return {
            "states": list(self.states),
            "input_alphabet": list(self.input_alphabet),
            "output_alphabet": list(self.output_alphabet),
            "initial": [self.states[i] for i in self.initial],
            "final": sorted(self.states[i] for i in self.final),
            "transitions": [
                {"from": self.states[s], "in": a, "out": v, "to": self.states[d]}
                for s, a, v, d in self.transitions
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    def _arrays_for(self, symbol: str):
        """(src, dst, output-length) arrays of the transitions reading `symbol`."""
        cached = self._sym_arrays.get(symbol)
        if cached is None:
            rows = [(s, d, len(v)) for s, a, v, d in self.transitions if a == symbol]
            cached = (
                np.array([r[0] for r in rows], dtype=np.int64),
                np.array([r[1] for r in rows], dtype=np.int64),
                np.array([r[2] for r in rows], dtype=np.float64),
            )
            self._sym_arrays[symbol] = cached
        return cached


@dataclass
class RunResult:
    """Canonical run of a machine on one finite input."""

    output: str
    visited: list[str]
    final_hits: tuple[int, ...]
    ambiguous: bool
    prefix_output_lengths: np.ndarray | None = None

    @property
    def input_length(self) -> int:
        return len(self.visited) - 1


def build_transducer(states, input_alphabet, output_alphabet, transitions,
                     initial, final, name: str = "", warn_on_trim: bool = True) -> Transducer:
    """Validate, compute viability, and trim a machine description."""
    raw = Transducer(states, input_alphabet, output_alphabet, transitions, initial, final, name)
    keep = _trim_states(raw)
    if not keep or not any(i in keep for i in raw.initial):
        raise ValidationError("machine is empty after trimming")
    if len(keep) < raw.n_states:
        if warn_on_trim:
            dropped = sorted(raw.states[i] for i in range(raw.n_states) if i not in keep)
            warnings.warn(f"trimmed unusable states: {dropped}", stacklevel=2)
        kept_names = [raw.states[i] for i in sorted(keep)]
        kept_set = {raw.states[i] for i in keep}
        return Transducer(
            kept_names,
            raw.input_alphabet,
            raw.output_alphabet,
            [
                (raw.states[s], a, v, raw.states[d])
                for s, a, v, d in raw.transitions
                if raw.states[s] in kept_set and raw.states[d] in kept_set
            ],
            [raw.states[i] for i in raw.initial if i in keep],
            [raw.states[i] for i in raw.final if i in keep],
            name,
        )
    return raw


def _trim_states(t: Transducer) -> set[int]:
    """States accessible from I and able to reach a cycle through a final state."""
    succ: list[set[int]] = [set() for _ in range(t.n_states)]
    pred: list[set[int]] = [set() for _ in range(t.n_states)]
    for s, _a, _v, d in t.transitions:
        succ[s].add(d)
        pred[d].add(s)
    accessible = _closure(set(t.initial), succ)
    # a final state anchors recurrence iff it can reach itself in >= 1 step
    cores = {f for f in t.final if f in _closure(set(succ[f]), succ)}
    viable = _closure(cores, pred)
    return accessible & viable


def _closure(seed: set[int], adj: list[set[int]]) -> set[int]:
    seen = set(seed)
    stack = list(seed)
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def parse_transducer(obj: dict, warn_on_trim: bool = True) -> Transducer:
    try:
        return build_transducer(
            obj["states"],
            obj["input_alphabet"],
            obj["output_alphabet"],
            [(tr["from"], tr["in"], tr["out"], tr["to"]) for tr in obj["transitions"]],
            obj["initial"],
            obj["final"],
            name=obj.get("name", ""),
            warn_on_trim=warn_on_trim,
        )
    except KeyError as exc:
        raise ValidationError(f"transducer file missing key {exc.args[0]!r}") from None


def load_transducer(path, warn_on_trim: bool = True) -> Transducer:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from None
    return parse_transducer(obj, warn_on_trim=warn_on_trim)


def identity_transducer(alphabet) -> Transducer:
    alphabet = tuple(alphabet)
    return build_transducer(
        ["s"], alphabet, alphabet, [("s", a, a, "s") for a in alphabet], ["s"], ["s"],
        name="identity",
    )


# ---------------------------------------------------------------------------
# Running


def run(t: Transducer, x: str, strict: bool = False,
        collect_prefix_lengths: bool = False,
        width_cap: int = DEFAULT_WIDTH_CAP) -> RunResult:
    """Canonical complete run of t on x (see module docstring).

    Raises RunRejectedError when no complete run consumes x, and
    AmbiguousRunError in strict mode when complete runs disagree on the
    output; otherwise disagreement only sets the `ambiguous` flag.
    """
    for c in x:
        if c not in t.input_alphabet:
            raise ValidationError(f"input symbol {c!r} not in machine alphabet")
    result = _run_deterministic(t, x, collect_prefix_lengths)
    if result is None:
        result = _run_general(t, x, collect_prefix_lengths, width_cap)
    if strict and result.ambiguous:
        raise AmbiguousRunError("complete runs emit different outputs on this input")
    return result


def _run_deterministic(t: Transducer, x: str, collect: bool) -> RunResult | None:
    """Fast path: valid only while exactly one transition applies per step."""
    if len(t.initial) != 1:
        return None
    state = t.initial[0]
    visited = [t.states[state]]
    final_hits = [0] if state in t.final else []
    pieces: list[str] = []
    out_len = 0
    lengths = np.zeros(len(x) + 1, dtype=np.int64) if collect else None
    options = t.options
    final = t.final
    names = t.states
    for i, sym in enumerate(x):
        opts = options(state, sym)
        if len(opts) != 1:
            if not opts:
                raise RunRejectedError(
                    f"no transition from state {names[state]!r} on {sym!r} "
                    f"after {i} symbols",
                    position=i,
                )
            return None  # branching: fall back to the general search
        _tidx, out, state = opts[0]
        if out:
            pieces.append(out)
            out_len += len(out)
        visited.append(names[state])
        if state in final:
            final_hits.append(i + 1)
        if collect:
            lengths[i + 1] = out_len
    return RunResult(
        output="".join(pieces),
        visited=visited,
        final_hits=tuple(final_hits),
        ambiguous=False,
        prefix_output_lengths=lengths,
    )


def _run_general(t: Transducer, x: str, collect: bool, width_cap: int) -> RunResult:
    n = len(x)
    if (n + 1) * t.n_states > GENERAL_BITS_CAP:
        raise EnumerationCapError(
            "nondeterministic run search too large; input length times state "
            f"count exceeds {GENERAL_BITS_CAP}"
        )
    # forward reachable state masks
    fwd = [0] * (n + 1)
    for i in t.initial:
        fwd[0] |= 1 << i
    for i, sym in enumerate(x):
        cur = fwd[i]
        nxt = 0
        state = 0
        while cur:
            low = cur & -cur
            state = low.bit_length() - 1
            cur ^= low
            for _tidx, _out, dst in t.options(state, sym):
                nxt |= 1 << dst
        if nxt == 0:
            raise RunRejectedError(
                f"no run survives symbol {x[i]!r} at position {i + 1}", position=i
            )
        fwd[i + 1] = nxt
    # backward feasibility: states at position i on some complete run
    feas = [0] * (n + 1)
    feas[n] = fwd[n]
    for i in range(n - 1, -1, -1):
        cur = fwd[i]
        keep = 0
        while cur:
            low = cur & -cur
            state = low.bit_length() - 1
            cur ^= low
            if any((feas[i + 1] >> dst) & 1 for _t, _o, dst in t.options(state, x[i])):
                keep |= low
        feas[i] = keep
    if feas[0] == 0:
        raise RunRejectedError("no complete run consumes the input", position=0)

    # canonical walk: first initial state, first feasible transition each step
    state = next(i for i in t.initial if (feas[0] >> i) & 1)
    visited = [t.states[state]]
    final_hits = [0] if state in t.final else []
    pieces: list[str] = []
    out_len = 0
    lengths = np.zeros(n + 1, dtype=np.int64) if collect else None
    for i, sym in enumerate(x):
        for _tidx, out, dst in t.options(state, sym):
            if (feas[i + 1] >> dst) & 1:
                state = dst
                if out:
                    pieces.append(out)
                    out_len += len(out)
                break
        visited.append(t.states[state])
        if state in t.final:
            final_hits.append(i + 1)
        if collect:
            lengths[i + 1] = out_len
    output = "".join(pieces)

    ambiguous = _outputs_disagree(t, x, feas, output, width_cap)
    return RunResult(
        output=output,
        visited=visited,
        final_hits=tuple(final_hits),
        ambiguous=ambiguous,
        prefix_output_lengths=lengths,
    )


def _outputs_disagree(t: Transducer, x: str, feas: list[int], canonical: str,
                      width_cap: int) -> bool:
    """True iff some complete run emits an output other than `canonical`.

    Tracks (state, emitted-length) pairs whose emitted text is known to be a
    prefix of the canonical output; any deviation or length mismatch at the
    end witnesses a second distinct output.
    """
    total = len(canonical)
    frontier = {(i, 0) for i in t.initial if (feas[0] >> i) & 1}
    for i, sym in enumerate(x):
        nxt: set[tuple[int, int]] = set()
        for state, olen in frontier:
            for _tidx, out, dst in t.options(state, sym):
                if not (feas[i + 1] >> dst) & 1:
                    continue
                end = olen + len(out)
                if end > total or (out and canonical[olen:end] != out):
                    return True
                nxt.add((dst, end))
        if len(nxt) > width_cap:
            raise EnumerationCapError(
                f"ambiguity sweep width exceeded {width_cap} at position {i + 1}"
            )
        frontier = nxt
    return any(olen != total for _state, olen in frontier)


# ---------------------------------------------------------------------------
# Composition


def compose(outer: Transducer, inner: Transducer, word_run_cap: int = 4096) -> Transducer:
    """Product machine computing outer(inner(x)).

    The inner machine consumes one input symbol and emits a word; the outer
    machine is driven over that word symbol by symbol, following every
    outer run.  A product state is final when both components are final.
    """
    if set(inner.output_alphabet) != set(outer.input_alphabet):
        raise ValidationError("inner output alphabet must equal outer input alphabet")
    start_pairs = [(qi, qo) for qi in inner.initial for qo in outer.initial]
    seen: dict[tuple[int, int], str] = {}
    order: list[tuple[int, int]] = []

    def name_of(pair):
        if pair not in seen:
            seen[pair] = f"{inner.states[pair[0]]}|{outer.states[pair[1]]}"
            order.append(pair)
        return seen[pair]

    for p in start_pairs:
        name_of(p)
    transitions = []
    queue = list(start_pairs)
    visited = set(start_pairs)
    while queue:
        qi, qo = queue.pop(0)
        for src, a, v, dst in inner.transitions:
            if src != qi:
                continue
            for w, qo2 in _word_runs(outer, qo, v, word_run_cap):
                pair = (dst, qo2)
                transitions.append((name_of((qi, qo)), a, w, name_of(pair)))
                if pair not in visited:
                    visited.add(pair)
                    queue.append(pair)
    finals = [
        name_of(p) for p in order
        if p[0] in inner.final and p[1] in outer.final and p in visited
    ]
    return build_transducer(
        [name_of(p) for p in order],
        inner.input_alphabet,
        outer.output_alphabet,
        transitions,
        [name_of(p) for p in start_pairs],
        finals,
        name=f"compose({outer.name or 'outer'},{inner.name or 'inner'})",
        warn_on_trim=False,
    )


def _word_runs(t: Transducer, start: int, word: str, cap: int) -> list[tuple[str, int]]:
    """All (output, end-state) pairs of runs consuming `word` from `start`."""
    runs = [("", start)]
    for sym in word:
        nxt = []
        for out, state in runs:
            for _tidx, piece, dst in t.options(state, sym):
                nxt.append((out + piece, dst))
                if len(nxt) > cap:
                    raise EnumerationCapError("word-run expansion exceeded cap in composition")
        runs = nxt
        if not runs:
            return []
    return runs


# ---------------------------------------------------------------------------
# Minimum output lengths and the Kraft audit


def min_output_length(t: Transducer, w: str) -> int:
    """Fewest output symbols over all finite runs (any start) reading w."""
    dist = _min_length_vector(t, w)
    best = float(dist.min())
    if not np.isfinite(best):
        raise RunRejectedError(f"no finite run has input label {w!r}")
    return int(best)


def _min_length_vector(t: Transducer, w: str) -> np.ndarray:
    dist = np.zeros(t.n_states)
    for sym in w:
        src, dst, wt = t._arrays_for(sym)
        nd = np.full(t.n_states, np.inf)
        if len(src):
            np.minimum.at(nd, dst, dist[src] + wt)
        dist = nd
    return dist


@dataclass
class KraftAudit:
    """Exact evaluation of the state-bounded prefix-code inequality."""

    ell: int
    claimed_preimage_bound: int
    max_transition_output: int
    n_states: int
    lhs: Fraction
    rhs: int
    holds: bool
    words_total: int
    words_without_run: int

    @property
    def margin(self) -> float:
        return float(Fraction(self.rhs) - self.lhs)

    def to_json_dict(self) -> dict:
        return {
            "ell": self.ell,
            "claimed_preimage_bound": self.claimed_preimage_bound,
            "max_transition_output": self.max_transition_output,
            "n_states": self.n_states,
            "lhs": {"num": self.lhs.numerator, "den": self.lhs.denominator},
            "lhs_float": float(self.lhs),
            "rhs": self.rhs,
            "holds": self.holds,
            "margin": self.margin,
            "words_total": self.words_total,
            "words_without_run": self.words_without_run,
        }


def check_kraft_bound(t: Transducer, ell: int, K: int,
                      cap: int = 1 << 18) -> KraftAudit:
    """Audit sum over A^ell of 2^(-L(w)) <= K |Q|^2 (1 + ell r) exactly.

    Words with no finite run contribute 0 (their minimum length is
    infinite), which only strengthens the inequality being audited.
    """
    if ell < 1 or K < 1:
        raise ValidationError("ell and K must be >= 1")
    n_words = len(t.input_alphabet) ** ell
    if n_words > cap:
        raise EnumerationCapError(f"{n_words} words exceed cap {cap}")
    lhs = Fraction(0)
    no_run = 0
    for syms in iter_product(t.input_alphabet, repeat=ell):
        dist = _min_length_vector(t, "".join(syms))
        best = float(dist.min())
        if np.isfinite(best):
            lhs += Fraction(1, 2 ** int(best))
        else:
            no_run += 1
    r = t.max_output_len
    rhs = K * t.n_states**2 * (1 + ell * r)
    return KraftAudit(
        ell=ell,
        claimed_preimage_bound=K,
        max_transition_output=r,
        n_states=t.n_states,
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs,
        words_total=n_words,
        words_without_run=no_run,
    )


# ---------------------------------------------------------------------------
# Bounded injectivity


def enumerate_io(t: Transducer, max_len: int,
                 run_cap: int = 1 << 20) -> dict[int, dict[str, tuple[str, int, bool]]]:
    """Canonical (output, end state) of every consumable word up to max_len.

    Returns {length: {word: (canonical output, canonical end state,
    ambiguous)}}, built by one depth-first enumeration of complete runs in
    transition order (so the first run found per word is the canonical one).
    """
    per_len: dict[int, dict[str, tuple[str, int, bool]]] = {
        m: {} for m in range(1, max_len + 1)
    }
    budget = [run_cap]

    def visit(state: int, word: str, out: str):
        depth = len(word)
        if depth:
            table = per_len[depth]
            prev = table.get(word)
            if prev is None:
                table[word] = (out, state, False)
            elif prev[0] != out:
                table[word] = (prev[0], prev[1], True)
        if depth == max_len:
            return
        for sym in t.input_alphabet:
            for _tidx, piece, dst in t.options(state, sym):
                budget[0] -= 1
                if budget[0] < 0:
                    raise EnumerationCapError("run enumeration exceeded cap")
                visit(dst, word + sym, out + piece)

    for start in t.initial:
        visit(start, "", "")
    return per_len


def check_injective_blocks(t: Transducer, depth: int, on_ambiguity: str = "canonical",
                           run_cap: int = 1 << 20) -> bool:
    """Bounded injectivity surrogate: no two same-length inputs merge.

    Two consumable inputs of the same length merge when their canonical
    runs agree on both the output and the end state; from a merged pair
    every common continuation stays indistinguishable, witnessing a
    violation of one-to-one-ness.  Inputs with equal outputs but distinct
    end states can still be separated by later output, so they do not
    count as collisions.  The verdict certifies injectivity only up to the
    given depth.  Ambiguous inputs are compared through their canonical
    runs by default; "skip" ignores them and "error" raises.
    """
    if on_ambiguity not in ("canonical", "skip", "error"):
        raise ValidationError(f"unknown ambiguity policy {on_ambiguity!r}")
    per_len = enumerate_io(t, depth, run_cap)
    for _m, table in per_len.items():
        seen: dict[tuple[str, int], str] = {}
        for word, (out, end_state, ambiguous) in table.items():
            if ambiguous:
                if on_ambiguity == "error":
                    raise AmbiguousRunError(f"input {word!r} has runs with different outputs")
                if on_ambiguity == "skip":
                    continue
            key = (out, end_state)
            if key in seen:
                return False
            seen[key] = word
    return True
