"""Command-line front end: shift analysis, sampling, normality, compression.

Every subcommand emits a single JSON report (stdout or --output) with the
invoked configuration, the tool version, and, where sampling is involved,
the PRNG identifier.  Reports contain no timestamps, so identical
invocations produce byte-identical output.  Exit codes: 0 on success
(an "inconsistent" verdict is still a successful analysis), 2 for
validation or file errors, 3 for internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, measures, normality, transducer as td
from .compressor import (
    build_empirical_chain,
    block_encoder,
    compress_nonnormal,
    design_recoder,
    entropy_gap_certificate,
    recoder_from_plan,
    GLYPHS,
)
from .errors import (
    AmbiguousRunError,
    ConstructionError,
    ConvergenceError,
    EnumerationCapError,
    RunRejectedError,
    ValidationError,
)
from .occurrences import build_occurrence_table
from .prng import PRNG_ID
from .sft import (
    blocks,
    is_aperiodic,
    is_irreducible,
    load_sequence,
    load_shift_spec,
    save_sequence,
    topological_entropy,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3

_REPORT_KEYS = {
    "entropy": ["eigenvalue", "entropy_bits", "irreducible", "aperiodic"],
    "parry": ["parry", "audit"],
    "blocks": ["block_length", "count"],
    "generate": ["path", "length", "seed"],
    "occ": ["table"],
    "normality": ["results"],
    "run": ["output", "ambiguous"],
    "injectivity": ["injective", "depth"],
    "kraft-audit": ["audit"],
    "recoder": ["plan", "machine"],
    "compress": ["ratio_report"],
    "certificate": ["certificate", "block_shift_entropy"],
}


def _emit(report: dict, args) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _envelope(kind: str, args, payload: dict, with_prng: bool = False) -> dict:
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "output") and v is not None
    }
    report = {"report": kind, "version": __version__, "config": config}
    if with_prng:
        report["prng"] = PRNG_ID
    report.update(payload)
    return report


def cmd_entropy(args) -> dict:
    spec = load_shift_spec(args.shift)
    if not is_irreducible(spec):
        raise ValidationError("shift not irreducible")
    h = topological_entropy(spec)
    return _envelope(
        "entropy",
        args,
        {
            "eigenvalue": 2.0**h,
            "entropy_bits": h,
            "irreducible": True,
            "aperiodic": is_aperiodic(spec),
        },
    )


def cmd_parry(args) -> dict:
    spec = load_shift_spec(args.shift)
    pm = measures.parry(spec)
    mu = pm.to_measure()
    audit = {
        "rows_sum_to_one": float(np.max(np.abs(pm.P.sum(axis=1) - 1.0))),
        "stationary_residual": float(np.max(np.abs(pm.pi @ pm.P - pm.pi))),
        "invariant_to_len6": measures.is_invariant(mu, spec, max_len=6),
        "compatible_to_len6": measures.is_compatible(mu, spec, max_len=6),
        "block_mass_len8": measures.total_block_mass(mu, spec, 8),
    }
    return _envelope("parry", args, {"parry": pm.to_json_dict(), "audit": audit})


def cmd_blocks(args) -> dict:
    spec = load_shift_spec(args.shift)
    bs = blocks(spec, args.n)
    payload = {"block_length": args.n, "count": len(bs)}
    if len(bs) <= args.limit:
        payload["words"] = bs.sorted_words()
    return _envelope("blocks", args, payload)


def cmd_generate(args) -> dict:
    spec = load_shift_spec(args.shift)
    if args.Q:
        q_matrix = json.loads(Path(args.Q).read_text())
        seq = normality.sample_skewed(spec, np.array(q_matrix, dtype=float), args.n, args.seed)
        kind = "skewed"
    else:
        seq = normality.sample_parry(spec, args.n, args.seed)
        kind = "parry"
    save_sequence(args.out, seq)
    return _envelope(
        "generate",
        args,
        {"path": args.out, "length": len(seq), "seed": args.seed, "chain": kind},
        with_prng=True,
    )


def cmd_occ(args) -> dict:
    seq = load_sequence(args.seq)
    alphabet = None
    if args.shift:
        alphabet = load_shift_spec(args.shift).alphabet
    table = build_occurrence_table(seq, args.l, alphabet=alphabet)
    return _envelope("occ", args, {"table": table.to_json_dict()})


def cmd_normality(args) -> dict:
    spec = load_shift_spec(args.shift)
    seq = load_sequence(args.seq)
    mu = measures.parry(spec).to_measure()
    results = {}
    wanted = ("aligned", "strong", "nonaligned") if args.definition == "all" else (args.definition,)
    for which in wanted:
        if which == "aligned":
            rep = normality.test_aligned(seq, mu, args.lmax, tol=args.tol)
        elif which == "strong":
            rep = normality.test_strong_aligned(seq, mu, args.lmax, args.kmax, tol=args.tol)
        else:
            rep = normality.test_nonaligned(seq, mu, args.lmax, tol=args.tol)
        results[which] = rep.to_json_dict()
    return _envelope(
        "normality",
        args,
        {"results": results, "verdicts": {k: v["consistent"] for k, v in results.items()}},
    )


def cmd_run(args) -> dict:
    machine = td.load_transducer(args.transducer)
    if args.input_text is not None:
        word = args.input_text
    else:
        word = load_sequence(args.seq)
    result = td.run(machine, word)
    return _envelope(
        "run",
        args,
        {
            "output": result.output,
            "ambiguous": result.ambiguous,
            "final_hits": len(result.final_hits),
            "input_length": result.input_length,
        },
    )


def cmd_injectivity(args) -> dict:
    machine = td.load_transducer(args.transducer)
    verdict = td.check_injective_blocks(machine, args.depth)
    return _envelope("injectivity", args, {"injective": verdict, "depth": args.depth})


def cmd_kraft_audit(args) -> dict:
    machine = td.load_transducer(args.transducer)
    audit = td.check_kraft_bound(machine, args.l, args.K)
    return _envelope("kraft-audit", args, {"audit": audit.to_json_dict()})


def cmd_recoder(args) -> dict:
    spec_x = load_shift_spec(args.shift_x)
    spec_y = load_shift_spec(args.shift_y)
    plan = design_recoder(spec_x, spec_y, args.epsilon)
    machine = recoder_from_plan(spec_x, spec_y, plan)
    if args.save_transducer:
        machine.save(args.save_transducer)
    return _envelope(
        "recoder",
        args,
        {
            "plan": plan.to_json_dict(),
            "machine": {"states": machine.n_states, "transitions": len(machine.transitions)},
        },
    )


def cmd_compress(args) -> dict:
    spec = load_shift_spec(args.shift)
    seq = load_sequence(args.seq)
    machine, report = compress_nonnormal(spec, seq, args.l, args.k, samples=args.samples)
    if args.save_transducer:
        machine.save(args.save_transducer)
    if args.save_bits:
        result = td.run(machine, seq)
        _write_bitstream(args.save_bits, result.output)
    return _envelope("compress", args, {"ratio_report": report.to_json_dict()})


def cmd_certificate(args) -> dict:
    spec = load_shift_spec(args.shift)
    seq = load_sequence(args.seq)
    h = topological_entropy(spec)
    if args.l == 1:
        chain = build_empirical_chain(seq, spec.alphabet)
    else:
        _, fmap = block_encoder(spec, args.l)
        usable = (len(seq) // args.l) * args.l
        encoded = "".join(fmap[seq[i : i + args.l]] for i in range(0, usable, args.l))
        chain = build_empirical_chain(encoded, tuple(GLYPHS[: len(fmap)]), block_length=args.l)
    gap = entropy_gap_certificate(chain, args.l * h)
    return _envelope(
        "certificate",
        args,
        {
            "certificate": gap,
            "block_shift_entropy": args.l * h,
            "chain_entropy": gap + args.l * h,
            "chain": chain.to_json_dict(),
        },
    )


def cmd_validate_report(args) -> dict:
    obj = json.loads(Path(args.report).read_text())
    kind = obj.get("report")
    if kind not in _REPORT_KEYS:
        raise ValidationError(f"unknown report kind {kind!r}")
    missing = [k for k in ("version", "config", *_REPORT_KEYS[kind]) if k not in obj]
    if missing:
        raise ValidationError(f"report missing keys: {missing}")
    return _envelope("validate-report", args, {"valid": True, "checked_kind": kind})


def _write_bitstream(path, bits: str) -> None:
    """Raw bits packed big-endian into bytes after a 64-bit length header."""
    arr = np.array([1 if b == "1" else 0 for b in bits], dtype=np.uint8)
    packed = np.packbits(arr, bitorder="big").tobytes()
    with open(path, "wb") as fh:
        fh.write(len(bits).to_bytes(8, "big"))
        fh.write(packed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sftnorm",
        description="Shifts of finite type: entropy, Parry measures, normality, compression",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, configure):
        p = sub.add_parser(name)
        p.add_argument("--output", help="write the JSON report here instead of stdout")
        p.add_argument("--format", choices=["json"], default="json")
        configure(p)
        p.set_defaults(func=func)

    add("entropy", cmd_entropy, lambda p: p.add_argument("--shift", required=True))
    add("parry", cmd_parry, lambda p: p.add_argument("--shift", required=True))

    def conf_blocks(p):
        p.add_argument("--shift", required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--limit", type=int, default=4096, help="list words only up to this count")

    add("blocks", cmd_blocks, conf_blocks)

    def conf_generate(p):
        p.add_argument("--shift", required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out", required=True, help="sequence file to write")
        p.add_argument("--Q", help="JSON matrix file: sample this chain instead of the Parry chain")

    add("generate", cmd_generate, conf_generate)

    def conf_occ(p):
        p.add_argument("--seq", required=True)
        p.add_argument("--l", type=int, required=True)
        p.add_argument("--shift", help="take the alphabet from this spec")

    add("occ", cmd_occ, conf_occ)

    def conf_normality(p):
        p.add_argument("--shift", required=True)
        p.add_argument("--seq", required=True)
        p.add_argument("--lmax", type=int, default=4)
        p.add_argument("--kmax", type=int, default=4)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--def", dest="definition", default="all",
                       choices=["aligned", "strong", "nonaligned", "all"])

    add("normality", cmd_normality, conf_normality)

    def conf_run(p):
        p.add_argument("--transducer", required=True)
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--seq", help="sequence file to feed the machine")
        group.add_argument("--input-text", help="literal input word")

    add("run", cmd_run, conf_run)

    def conf_injectivity(p):
        p.add_argument("--transducer", required=True)
        p.add_argument("--depth", type=int, required=True)

    add("injectivity", cmd_injectivity, conf_injectivity)

    def conf_kraft(p):
        p.add_argument("--transducer", required=True)
        p.add_argument("--l", type=int, required=True)
        p.add_argument("--K", type=int, default=1)

    add("kraft-audit", cmd_kraft_audit, conf_kraft)

    def conf_recoder(p):
        p.add_argument("--shift-x", required=True)
        p.add_argument("--shift-y", required=True)
        p.add_argument("--epsilon", type=float, required=True)
        p.add_argument("--save-transducer")

    add("recoder", cmd_recoder, conf_recoder)

    def conf_compress(p):
        p.add_argument("--shift", required=True)
        p.add_argument("--seq", required=True)
        p.add_argument("--l", type=int, default=1)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--samples", type=int, default=50)
        p.add_argument("--save-transducer")
        p.add_argument("--save-bits")

    add("compress", cmd_compress, conf_compress)

    def conf_certificate(p):
        p.add_argument("--shift", required=True)
        p.add_argument("--seq", required=True)
        p.add_argument("--l", type=int, default=1)

    add("certificate", cmd_certificate, conf_certificate)

    add("validate-report", cmd_validate_report,
        lambda p: p.add_argument("--report", required=True))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except (ValidationError, EnumerationCapError, FileNotFoundError,
            json.JSONDecodeError, RunRejectedError, AmbiguousRunError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConstructionError, ConvergenceError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _emit(report, args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
