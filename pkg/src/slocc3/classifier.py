"""Tripartite SLOCC classification and the class-counting formula.

The classifier maps a state to the family of canonical vectors whose right
singular subspace has the same rank-stratification fingerprint.  The
decision table (fingerprint -> family) is not hand-written: it is
calibrated once per tolerance policy by running every catalog canonical
vector through the span analysis and recording its signature.  A signature
claimed by two different families aborts calibration -- the fingerprints
must separate the catalog or the classifier is not trustworthy.

States whose signature matches no catalog family (generic dense states,
whose determinant curve is a smooth cubic, are the typical case) receive an
explicit unclassified verdict carrying the raw signature; the catalog of
span types is not exhaustive over all of C3 x C3 x C3.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from slocc3.bipartite import classify_bipartite
from slocc3.numerics import DEFAULT_TOL, numerical_rank, svd
from slocc3.pencil import analyze_span, right_subspace
from slocc3.states import canonical_state, catalog_ids, flatten

__all__ = [
    "SloccVerdict",
    "ClassCount",
    "CalibrationError",
    "SAME_CLASS",
    "DIFFERENT_CLASS",
    "INCONCLUSIVE",
    "DEFAULT_BUDGET",
    "classify_tripartite",
    "count_classes",
    "verify_equivalence",
    "decision_table",
    "rank_triple",
]

DEFAULT_BUDGET = 200

SAME_CLASS = "SameClass"
DIFFERENT_CLASS = "DifferentClass"
INCONCLUSIVE = "Inconclusive"

_DIM1_FAMILY = {1: "dim1-P0", 2: "dim1-P1", 3: "dim1-P2"}


class CalibrationError(RuntimeError):
    """Two catalog families produced the same fingerprint."""


@dataclass(frozen=True, eq=False)
class SloccVerdict:
    """Classification verdict for a tripartite state.

    ``family`` is ``None`` for unrecognized signatures; ``variant`` is set
    only when the fingerprint separates the variants within the family.
    ``separability`` is computed from the three flattening ranks
    independently of the decision table.
    """

    family: str | None
    variant: int | None
    dim_pi: int
    rank_triple: tuple
    separability: str
    confidence: str
    signature: object

    def to_json_dict(self):
        return {
            "family": self.family,
            "variant": self.variant,
            "dim_pi": self.dim_pi,
            "rank_triple": list(self.rank_triple),
            "separability": self.separability,
            "confidence": self.confidence,
            "signature": self.signature.to_json_dict(),
        }


@dataclass(frozen=True)
class ClassCount:
    """Number of inequivalent pure-state classes for local dimension n."""

    n: int
    total: int


def rank_triple(state, tol=DEFAULT_TOL):
    """Schmidt rank of every party-vs-rest cut."""
    ranks = []
    for party in range(1, state.parties + 1):
        s = np.linalg.svd(flatten(state, party).matrix, compute_uv=False)
        ranks.append(numerical_rank(s, tol))
    return tuple(ranks)


def _separability(triple):
    if all(r == 1 for r in triple):
        return "fully-separable"
    cuts = [p for p, r in enumerate(triple, start=1) if r == 1]
    if cuts:
        return f"biseparable(party={cuts[0]})"
    return "genuinely-tripartite"


@lru_cache(maxsize=8)
def decision_table(tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Calibrated fingerprint tables.

    Returns ``(families, variants)`` where ``families`` maps a span
    signature to its family tag and ``variants`` maps ``(signature,
    rank_triple)`` to the set of variant indices sharing that fingerprint.

    Raises
    ------
    CalibrationError
        If two families collide on a signature.
    """
    families = {}
    variants = {}
    for cid in catalog_ids(parties=3):
        state = canonical_state(cid)
        sub = right_subspace(state, tol)
        analysis = analyze_span(sub.generators, tol, budget, seed=0)
        sig = analysis.signature
        known = families.get(sig)
        if known is not None and known != cid.family:
            raise CalibrationError(
                f"fingerprint collision: {known} and {cid.family} both map to {sig}")
        families[sig] = cid.family
        variants.setdefault((sig, rank_triple(state, tol)), set()).add(cid.variant)
    return families, variants


def classify_tripartite(state, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET, seed=0):
    """Classify a three-qutrit state into a canonical span family.

    An unrecognized signature is a value (``family=None``), not an error;
    budget-limited searches are reported through ``confidence``.
    """
    if state.parties != 3:
        raise ValueError("classify_tripartite expects a 3-party state")
    triple = rank_triple(state, tol)
    sub = right_subspace(state, tol)
    analysis = analyze_span(sub.generators, tol, budget, seed)
    sig = analysis.signature

    if sig.dim == 1:
        family = _DIM1_FAMILY[sig.generic_rank]
        variant = 1
    else:
        families, variant_table = decision_table(tol, budget)
        family = families.get(sig)
        variant = None
        if family is not None:
            matching = variant_table.get((sig, triple), set())
            if len(matching) == 1:
                variant = next(iter(matching))

    return SloccVerdict(
        family=family,
        variant=variant,
        dim_pi=sig.dim,
        rank_triple=triple,
        separability=_separability(triple),
        confidence="certified" if analysis.certified else "budget-limited",
        signature=sig,
    )


def count_classes(n):
    """Number of SLOCC classes of pure states on three n-level parties,
    by the closed-form count (exact integer arithmetic).

    ``count_classes(2).total == 2`` and ``count_classes(3).total == 12``.
    """
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError("n must be an integer")
    if n < 2:
        raise ValueError("n must be at least 2")
    if n > 20:
        raise ValueError("n larger than 20 is not supported")
    total = (n - 1) ** 2
    for i in range(2, n + 1):
        total += (1 + i * (n - i)) * math.comb(n, i) - i * (n - i)
    return ClassCount(n=n, total=total)


def verify_equivalence(s1, s2, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Sound equivalence check by invariant comparison.

    ``DifferentClass`` whenever any SLOCC invariant differs (rank triples,
    span signatures); ``SameClass`` when both states carry the same
    certified family label; ``Inconclusive`` otherwise (matching invariants
    alone cannot certify equivalence outside the catalog).
    """
    if s1.parties != s2.parties:
        raise ValueError("states have different party counts")
    if s1.parties == 2:
        if s1.dims != s2.dims:
            raise ValueError("bipartite states have different local dimensions")
        r1 = classify_bipartite(s1, tol).schmidt_rank
        r2 = classify_bipartite(s2, tol).schmidt_rank
        return SAME_CLASS if r1 == r2 else DIFFERENT_CLASS

    v1 = classify_tripartite(s1, tol, budget)
    v2 = classify_tripartite(s2, tol, budget)
    if v1.rank_triple != v2.rank_triple:
        return DIFFERENT_CLASS
    if v1.signature != v2.signature:
        return DIFFERENT_CLASS
    if (v1.family is not None and v1.family == v2.family
            and v1.confidence == "certified" and v2.confidence == "certified"):
        return SAME_CLASS
    return INCONCLUSIVE
