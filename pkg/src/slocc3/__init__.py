"""slocc3: SLOCC classification of two- and three-qutrit pure states.

Pure states of two or three 3-level systems are classified up to
invertible local operations by analyzing the right singular subspace of a
party-vs-rest coefficient matrix: its dimension, the rank stratification
of its elements (viewed as 3x3 matrices), and the factorization type of
the determinant form.  The package also constructs the local operators
mapping bipartite states to their canonical representatives and ships a
randomized harness for orbit-invariance testing.
"""

__version__ = "0.1.0"

from slocc3._kernels import kernel_backend
from slocc3.bipartite import (
    BipartiteClass,
    IloPair,
    apply_ilo_bipartite,
    canonicalize_bipartite,
    classify_bipartite,
)
from slocc3.classifier import (
    DIFFERENT_CLASS,
    INCONCLUSIVE,
    SAME_CLASS,
    ClassCount,
    SloccVerdict,
    classify_tripartite,
    count_classes,
    verify_equivalence,
)
from slocc3.harness import (
    IloTriple,
    apply_ilo_tripartite,
    brute_force_rank_locus,
    random_ilo,
)
from slocc3.numerics import (
    DEFAULT_TOL,
    NumericalError,
    SvdResult,
    TolerancePolicy,
    eigenvalues_3x3,
    numerical_rank,
    svd,
)
from slocc3.pencil import (
    INFINITE,
    ProductVector,
    SingularSubspace,
    SpanAnalysis,
    SpanSignature,
    analyze_span,
    product_vectors_in_span,
    rank_profile_dim2,
    rank_profile_dim3,
    right_subspace,
)
from slocc3.states import (
    CanonicalId,
    Flattening,
    PureState,
    StateFormatError,
    canonical_state,
    catalog_ids,
    flatten,
    read_state,
    unflatten,
    write_state,
)

__all__ = [
    "__version__",
    "kernel_backend",
    "BipartiteClass", "IloPair", "apply_ilo_bipartite",
    "canonicalize_bipartite", "classify_bipartite",
    "DIFFERENT_CLASS", "INCONCLUSIVE", "SAME_CLASS", "ClassCount",
    "SloccVerdict", "classify_tripartite", "count_classes", "verify_equivalence",
    "IloTriple", "apply_ilo_tripartite", "brute_force_rank_locus", "random_ilo",
    "DEFAULT_TOL", "NumericalError", "SvdResult", "TolerancePolicy",
    "eigenvalues_3x3", "numerical_rank", "svd",
    "INFINITE", "ProductVector", "SingularSubspace", "SpanAnalysis",
    "SpanSignature", "analyze_span", "product_vectors_in_span",
    "rank_profile_dim2", "rank_profile_dim3", "right_subspace",
    "CanonicalId", "Flattening", "PureState", "StateFormatError",
    "canonical_state", "catalog_ids", "flatten", "read_state", "unflatten",
    "write_state",
]
