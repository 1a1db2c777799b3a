"""Command-line front end: classify, gen, verify, count.

JSON reports are the stable machine contract and are byte-identical across
runs with the same inputs and flags (timing is only included on request);
text output is a human courtesy.  Every report echoes the effective
tolerances, because a numerical verdict without its thresholds is not
reproducible.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from slocc3 import __version__
from slocc3.bipartite import classify_bipartite
from slocc3.classifier import DEFAULT_BUDGET, classify_tripartite, count_classes, \
    verify_equivalence
from slocc3.harness import apply_ilo_tripartite, random_ilo
from slocc3.numerics import DEFAULT_TOL, NumericalError, TolerancePolicy
from slocc3.states import CanonicalId, StateFormatError, canonical_state, read_state, \
    variant_count, write_state

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_UNCLASSIFIED = 3

_CANONICAL_NAMES = {1: "Psi0", 2: "Psi1", 3: "Psi2"}


class CliError(Exception):
    pass


def _tolerances(args):
    rank_rel = args.tol
    if rank_rel is None:
        env = os.environ.get("SLOCC3_TOL")
        rank_rel = float(env) if env else DEFAULT_TOL.rank_rel
    try:
        return TolerancePolicy(rank_rel=rank_rel)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _load_state(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
        return read_state(data), hashlib.sha256(data).hexdigest()
    except (OSError, StateFormatError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from exc


def _report(args, tol, verdict, digest=None, elapsed_ms=None):
    rep = {
        "schema_version": 1,
        "tool": {"name": "slocc3", "version": __version__},
        "tolerances": {
            "rank_rel": tol.rank_rel,
            "root_cluster": tol.root_cluster,
            "tol_unitary": tol.tol_unitary,
            "tol_recon": tol.tol_recon,
        },
        "verdict": verdict,
    }
    if digest is not None:
        rep["input_sha256"] = digest
    if getattr(args, "timings", False) and elapsed_ms is not None:
        rep["elapsed_ms"] = elapsed_ms
    return rep


def _emit(args, report, text_lines):
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _cmd_classify(args):
    tol = _tolerances(args)
    state, digest = _load_state(args.path)
    start = time.perf_counter()
    if state.parties == 2:
        cls = classify_bipartite(state, tol)
        elapsed = (time.perf_counter() - start) * 1e3
        verdict = {
            "type": "bipartite",
            "schmidt_rank": cls.schmidt_rank,
            "canonical": _CANONICAL_NAMES.get(cls.schmidt_rank, str(cls.schmidt_rank)),
        }
        text = [f"bipartite rank {cls.schmidt_rank} "
                f"({verdict['canonical']})"]
        _emit(args, _report(args, tol, verdict, digest, elapsed), text)
        return EXIT_OK

    v = classify_tripartite(state, tol, budget=args.budget)
    elapsed = (time.perf_counter() - start) * 1e3
    verdict = {"type": "tripartite", **v.to_json_dict()}
    family = v.family if v.family is not None else "unclassified"
    text = [f"family={family} variant={v.variant if v.variant else '-'} "
            f"dim_pi={v.dim_pi} ranks={v.rank_triple} {v.separability} "
            f"confidence={v.confidence}"]
    if v.family is None:
        text.append(f"signature: {v.signature.to_json_dict()}")
    _emit(args, _report(args, tol, verdict, digest, elapsed), text)
    return EXIT_OK if v.family is not None else EXIT_UNCLASSIFIED


def _parse_family(spec):
    fam, _, variant = spec.partition(":")
    try:
        return CanonicalId(fam, int(variant) if variant else 1)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _parse_params(blob):
    try:
        raw = json.loads(blob)
        if not isinstance(raw, dict):
            raise ValueError("parameters must be a JSON object")
        params = {}
        for key, vec in raw.items():
            vals = []
            for entry in vec:
                if isinstance(entry, (int, float)):
                    vals.append(complex(entry))
                else:
                    vals.append(complex(entry[0], entry[1]))
            params[key] = np.asarray(vals, dtype=np.complex128)
        return params
    except (ValueError, TypeError, IndexError, json.JSONDecodeError) as exc:
        raise CliError(f"bad --params: {exc}") from exc


def _cmd_gen(args):
    tol = _tolerances(args)
    spec = args.canonical or args.orbit
    cid = _parse_family(spec)
    if args.params is not None:
        if cid.family != "P0P0P1":
            raise CliError("--params applies to family P0P0P1 only")
        cid = CanonicalId(cid.family, cid.variant, _parse_params(args.params))
    try:
        state = canonical_state(cid)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.orbit:
        if state.parties != 3:
            raise CliError("--orbit requires a tripartite family")
        triple = random_ilo(args.seed, args.cond)
        state = apply_ilo_tripartite(state, triple).normalized()
    payload = write_state(state)
    with open(args.out, "wb") as fh:
        fh.write(payload)
    if args.verify:
        reread = read_state(payload)
        if reread.parties == 2:
            ok = classify_bipartite(reread, tol).schmidt_rank == \
                classify_bipartite(state, tol).schmidt_rank
        else:
            got = classify_tripartite(reread, tol, budget=args.budget)
            ok = got.family == cid.family
        if not ok:
            raise CliError(f"verification failed: emitted state does not "
                           f"re-classify to {cid.family}")
    if not args.json:
        print(f"wrote {args.out} ({cid})")
    else:
        print(json.dumps({"written": args.out, "id": str(cid)}, sort_keys=True))
    return EXIT_OK


def _cmd_verify(args):
    tol = _tolerances(args)
    s1, d1 = _load_state(args.path1)
    s2, d2 = _load_state(args.path2)
    try:
        result = verify_equivalence(s1, s2, tol, budget=args.budget)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    report = _report(args, tol, {"type": "equivalence", "result": result})
    report["inputs_sha256"] = [d1, d2]
    _emit(args, report, [result])
    return EXIT_OK


def _cmd_count(args):
    try:
        result = count_classes(args.n)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.json:
        print(json.dumps({"n": result.n, "classes": result.total}, sort_keys=True))
    else:
        print(result.total)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="slocc3",
        description="SLOCC classification of two- and three-qutrit pure states "
                    "via right-singular-subspace analysis.")
    parser.add_argument("--version", action="version", version=f"slocc3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None,
                       help="relative rank threshold (default 1e-9; "
                            "env SLOCC3_TOL overrides)")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                       help="line-sampling budget for 3-dimensional spans")
        p.add_argument("--json", action="store_true", help="stable JSON output")
        p.add_argument("--timings", action="store_true",
                       help="include elapsed time in JSON reports")

    p = sub.add_parser("classify", help="classify a state file")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("gen", help="emit a canonical state or a random orbit point")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--canonical", metavar="FAMILY[:VARIANT]")
    group.add_argument("--orbit", metavar="FAMILY[:VARIANT]",
                       help="apply a seeded random ILO triple to the canonical state")
    p.add_argument("out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cond", type=float, default=50.0,
                   help="condition bound for the random ILO factors")
    p.add_argument("--params", default=None,
                   help="JSON object with phi/varphi/chi/psi 3-vectors (P0P0P1)")
    p.add_argument("--verify", action="store_true",
                   help="re-classify the emitted file and fail on mismatch")
    common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("verify", help="compare two state files")
    p.add_argument("path1")
    p.add_argument("path2")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("count", help="number of classes for local dimension n")
    p.add_argument("n", type=int)
    common(p)
    p.set_defaults(func=_cmd_count)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
