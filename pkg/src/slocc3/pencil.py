"""Structure analysis of subspaces of 3x3 complex matrices.

The right singular subspace of a tripartite flattening is a 1-, 2-, or
3-dimensional span of 3x3 matrices.  Its SLOCC-invariant fingerprint is the
rank stratification: the generic rank on the span, the set of projective
rays where the rank drops to 1 or 2, common row/column factors, and the
factorization type of the determinant form

    F(x, y, z) = det(x M1 + y M2 + z M3),

a homogeneous cubic whose zero locus marks the rank-deficient rays.  All of
these are invariant under invertible transformations ``M -> A M B^T`` and
under change of span basis, which is what makes them usable as
classification fingerprints.

Numerical strategy.  Multiple roots are never read off clustered companion
eigenvalues (an m-fold root computed from perturbed coefficients scatters
like ``eps**(1/m)``); they are located as simple roots of derivative forms
and refined there, which restores full precision.  Rank-1 rays are common
zeros of the nine 2x2-minor quadrics; for 3-dimensional spans two random
combinations of those quadrics are intersected exactly (via a Sylvester
resultant), candidates are polished by Gauss-Newton, and an identically
vanishing resultant signals a positive-dimensional rank-1 locus, which is
then confirmed by sampling projective lines (every line in the plane meets
a curve).
"""

import itertools
from dataclasses import dataclass

import numpy as np

from slocc3._kernels import batch_cubic_roots, batch_det3, batch_singvals3
from slocc3.numerics import (
    BINARY_CUBIC_MONOMIALS,
    TERNARY_CUBIC_MONOMIALS,
    DEFAULT_TOL,
    binary_form_roots,
    chordal_distance,
    cluster_rays,
    normalize_ray,
    numerical_rank,
    svd,
)
from slocc3.states import flatten

__all__ = [
    "INFINITE",
    "SingularSubspace",
    "SpanSignature",
    "SpanAnalysis",
    "ProductVector",
    "right_subspace",
    "analyze_span",
    "rank_profile_dim2",
    "rank_profile_dim3",
    "product_vectors_in_span",
    "dim2_pencil_roots",
]

#: Sentinel for "infinitely many rays" in ray counts.
INFINITE = float("inf")

TERNARY_QUAD_MONOMIALS = ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))

_CUBIC_EXPS = np.array(TERNARY_CUBIC_MONOMIALS)
_QUAD_EXPS = np.array(TERNARY_QUAD_MONOMIALS)

# Internal thresholds (all relative to unit-normalized inputs).
_DET_ZERO_REL = 1e-10     # determinant samples below this: identically zero pencil
_MINOR_RESID = 1e-8       # accepted residual of normalized minor quadrics
_PROMISING = 1e-6         # candidates below this residual must refine or we lose certainty
_MULT_F_TOL = 1e-10       # |f| at a derivative root: multiple root of f
_MULT_SECOND_TOL = 1e-8   # second partials below this: triple root
_KERNEL_REL = 1e-8        # translation-kernel singular-value threshold
_HESS_RANK_REL = 1e-7     # Hessian rank threshold at a singular point
_GN_TARGET = 1e-11        # Gauss-Newton residual target
_DIP = 0.05               # sigma2/sigma1 below this flags a rank-1 candidate
_INFINITE_COUNT = 13      # more distinct rank-1 rays than 12: locus is a curve
# Refined locus points are merged at this chordal radius.  It must exceed the
# Gauss-Newton stall scatter at non-transversal solutions (observed <= 2e-5:
# the polish cannot move along a direction the Jacobian does not see) while
# staying below the separation of genuinely distinct locus points.  Final
# representatives closer than _CLUSTER_MARGIN times the radius are reported
# as uncertain rather than silently counted.
_LOCUS_CLUSTER = 3e-4
_CLUSTER_MARGIN = 10.0

# Seven fixed sample rays on the projective line (more than twice the cubic
# degree, in general position).
_DIM2_SAMPLES = np.array([
    [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0],
    [1.0, 1.0j], [1.0, 0.6 - 1.3j], [1.0, -2.2 + 0.4j],
], dtype=np.complex128)
_DIM2_SAMPLES /= np.linalg.norm(_DIM2_SAMPLES, axis=1)[:, None]


@dataclass(frozen=True, eq=False)
class SingularSubspace:
    """The right singular subspace of a tripartite flattening.

    ``generators[k]`` is the right singular vector ``w_k`` (with singular
    value above threshold) reshaped to 3x3 via ``w[3j + k] -> M[j, k]``;
    the generators are orthonormal in the Frobenius inner product.
    """

    dim: int
    generators: np.ndarray   # (dim, 3, 3)
    singulars: np.ndarray    # (dim,)


@dataclass(frozen=True)
class SpanSignature:
    """Basis-independent rank stratification of a span (the fingerprint).

    ``rank1_rays`` counts distinct projective rays whose matrix has rank
    at most 1 (``INFINITE`` when they form a curve or fill the span);
    ``rank2_rays`` counts distinct rays of rank exactly 2 when that locus
    is finite and is ``INFINITE`` when it is positive-dimensional.  For
    2-dimensional spans with nonzero determinant form the root
    multiplicities always sum to 3 (checked at construction time).
    ``det_curve`` names the factorization type of the determinant form:
    root multiplicity patterns ``1+1+1 / 2+1 / 3`` for pencils, curve types
    (``triangle``, ``conic-chord``, ``triple-line``, ...) for 3-dimensional
    spans, ``zero`` for identically singular spans, ``None`` for dim 1.
    """

    dim: int
    generic_rank: int
    rank1_rays: float
    rank2_rays: float
    common_left_factor: bool
    common_right_factor: bool
    det_curve: str | None

    def to_json_dict(self):
        def count(v):
            return "infinite" if v == INFINITE else int(v)
        return {
            "dim": self.dim,
            "generic_rank": self.generic_rank,
            "rank1_rays": count(self.rank1_rays),
            "rank2_rays": count(self.rank2_rays),
            "common_left_factor": self.common_left_factor,
            "common_right_factor": self.common_right_factor,
            "det_curve": self.det_curve,
        }


@dataclass(frozen=True, eq=False)
class SpanAnalysis:
    """Signature plus the evidence behind it.

    ``rank1_points`` holds coordinate vectors (in the basis of the input
    generators) of the rank-1 rays that were located; when the locus is
    infinite these are representatives only.  ``certified`` is False when a
    budgeted search ended ambiguously (a promising candidate failed to
    refine, or an infinite-locus verdict could not be confirmed).
    """

    signature: SpanSignature
    certified: bool
    rank1_points: tuple
    rank1_infinite: bool


@dataclass(frozen=True, eq=False)
class ProductVector:
    """A rank-1 element ``left (x) right`` of a span, with its coordinates
    in the span's generator basis."""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray


# --------------------------------------------------------------------------
# polynomial toolkit
# --------------------------------------------------------------------------

def _eval_forms(coeffs, exps, points):
    """Evaluate homogeneous forms; coeffs (..., n_mono), points (..., nvars)."""
    pts = np.asarray(points, dtype=np.complex128)
    monos = np.prod(pts[..., None, :] ** exps, axis=-1)
    return monos @ np.swapaxes(np.atleast_2d(coeffs), -1, -2)


def _eval_cubic(f, points):
    """Ternary cubic at points (..., 3) -> (...)."""
    return _eval_forms(f, _CUBIC_EXPS, points)[..., 0]


def _eval_binary(coeffs, ray):
    """Binary form sum c[k] x^(d-k) y^k at a 2-point."""
    c = np.asarray(coeffs)
    d = c.size - 1
    x, y = ray
    return sum(c[k] * x ** (d - k) * y ** k for k in range(d + 1))


def _pencil_cubic(gens):
    """Coefficients of det(sum_i x_i G_i), multilinear column expansion.

    Returns a length-4 (k=2) or length-10 (k=3) coefficient array in the
    fixed monomial orders.
    """
    g = np.asarray(gens)
    k = g.shape[0]
    order = BINARY_CUBIC_MONOMIALS if k == 2 else TERNARY_CUBIC_MONOMIALS
    index = {e: i for i, e in enumerate(order)}
    mats, slots = [], []
    for assign in itertools.product(range(k), repeat=3):
        cols = np.stack([g[assign[0], :, 0], g[assign[1], :, 1], g[assign[2], :, 2]], axis=1)
        mats.append(cols)
        expo = [0] * k
        for a in assign:
            expo[a] += 1
        slots.append(index[tuple(expo)])
    dets = batch_det3(np.stack(mats))
    coeffs = np.zeros(len(order), dtype=np.complex128)
    np.add.at(coeffs, slots, dets)
    return coeffs


def _lin_times_lin(u, v):
    """Product of two linear forms in 3 variables -> quadric coefficients."""
    return np.array([
        u[0] * v[0],
        u[0] * v[1] + u[1] * v[0],
        u[0] * v[2] + u[2] * v[0],
        u[1] * v[1],
        u[1] * v[2] + u[2] * v[1],
        u[2] * v[2],
    ])


def _lin_times_lin_2(u, v):
    """Product of two linear forms in 2 variables -> (3,) quadratic."""
    return np.array([u[0] * v[0], u[0] * v[1] + u[1] * v[0], u[1] * v[1]])


def _minors_of_linear_matrix(entries):
    """2x2 minors of a 3x3 matrix whose entries are linear forms in k
    variables; ``entries`` has shape (3, 3, k).  Returns 9 quadrics."""
    k = entries.shape[2]
    comp = {0: (1, 2), 1: (0, 2), 2: (0, 1)}
    mul = _lin_times_lin if k == 3 else _lin_times_lin_2
    quads = []
    for i in range(3):
        r1, r2 = comp[i]
        for j in range(3):
            c1, c2 = comp[j]
            quads.append(mul(entries[r1, c1], entries[r2, c2])
                         - mul(entries[r1, c2], entries[r2, c1]))
    return np.stack(quads)


def _minor_quadrics(gens):
    """The nine 2x2-minor forms of the pencil, as quadrics in the span
    coordinates.  Their common zeros are exactly the rank<=1 rays."""
    g = np.asarray(gens)
    return _minors_of_linear_matrix(np.moveaxis(g, 0, 2))


def _merge_locus_points(scored, radius=_LOCUS_CLUSTER):
    """Merge refined locus points closer than ``radius``; each entry is
    (point, quality), lower quality better (the best member represents the
    cluster).  Returns (representatives, unambiguous): ``unambiguous`` is
    False when two final representatives are within ``_CLUSTER_MARGIN``
    radii of each other, i.e. the distinct/coincident decision is marginal.
    """
    clusters = []
    for point, quality in scored:
        for i, (rep, best) in enumerate(clusters):
            if chordal_distance(rep, point) <= radius:
                if quality < best:
                    clusters[i] = (point, quality)
                break
        else:
            clusters.append((point, quality))
    reps = [rep for rep, _ in clusters]
    unambiguous = True
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if chordal_distance(reps[i], reps[j]) <= _CLUSTER_MARGIN * radius:
                unambiguous = False
    return reps, unambiguous


def _quad_gradient(q):
    """Gradient of a ternary quadric: three linear forms, rows of (3, 3)."""
    return np.array([
        [2 * q[0], q[1], q[2]],
        [q[1], 2 * q[3], q[4]],
        [q[2], q[4], 2 * q[5]],
    ])


def _cubic_gradient(f):
    """Gradient of a ternary cubic: three quadrics, rows of (3, 6)."""
    fx = np.array([3 * f[0], 2 * f[1], 2 * f[2], f[3], f[4], f[5]])
    fy = np.array([f[1], 2 * f[3], f[4], 3 * f[6], 2 * f[7], f[8]])
    fz = np.array([f[2], f[4], 2 * f[5], f[7], 2 * f[8], 3 * f[9]])
    return np.stack([fx, fy, fz])


def _permute_quad(q, perm):
    """Quadric coefficients under a permutation of the three variables."""
    out = np.empty_like(q)
    for i, e in enumerate(TERNARY_QUAD_MONOMIALS):
        permuted = tuple(e[perm[a]] for a in range(3))
        out[TERNARY_QUAD_MONOMIALS.index(permuted)] = q[i]
    return out


def _poly_mul(p, q):
    if p is None or q is None:
        return None
    return np.convolve(p, q)


def _poly_add(p, q):
    if p is None:
        return q
    if q is None:
        return p
    assert p.size == q.size, "graded determinant lost homogeneity"
    return p + q


def _poly_det(m):
    """Determinant of a graded matrix of binary-form coefficient arrays
    (``None`` is the zero polynomial)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    acc = None
    for j in range(n):
        entry = m[0][j]
        if entry is None:
            continue
        minor = [[row[c] for c in range(n) if c != j] for row in m[1:]]
        term = _poly_mul(entry, _poly_det(minor))
        if term is not None and j % 2 == 1:
            term = -term
        acc = _poly_add(acc, term)
    return acc


def _resultant_z(q1, q2):
    """Sylvester resultant of two ternary quadrics with respect to the third
    variable: a binary quartic in the remaining two."""
    def parts(q):
        a = np.array([q[5]])                      # z^2 coefficient
        b = np.array([q[2], q[4]])                # z: linear in (x, y)
        c = np.array([q[0], q[1], q[3]])          # z^0: quadratic in (x, y)
        return a, b, c

    a1, b1, c1 = parts(q1)
    a2, b2, c2 = parts(q2)
    rows = [
        [a1, b1, c1, None],
        [None, a1, b1, c1],
        [a2, b2, c2, None],
        [None, a2, b2, c2],
    ]
    det = _poly_det(rows)
    if det is None:
        return np.zeros(5, dtype=np.complex128)
    assert det.size == 5
    return det


def _quad_roots_z(q, x0, y0):
    """Roots in z of a ternary quadric restricted to fixed (x0, y0)."""
    a = q[5]
    b = q[2] * x0 + q[4] * y0
    c = q[0] * x0 * x0 + q[1] * x0 * y0 + q[3] * y0 * y0
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    a, b, c = a / scale, b / scale, c / scale
    if abs(a) <= 1e-12:
        if abs(b) <= 1e-12:
            return []
        return [-c / b]
    disc = np.sqrt(np.complex128(b * b - 4 * a * c))
    big = -(b + disc) / 2 if abs(b + disc) >= abs(b - disc) else -(b - disc) / 2
    if abs(big) == 0.0:
        return [0.0 + 0.0j]
    return [big / a, c / big]


# --------------------------------------------------------------------------
# stable root structure of binary forms
# --------------------------------------------------------------------------

def _binary_partial_x(c):
    d = c.size - 1
    return np.array([c[k] * (d - k) for k in range(d)])


def _binary_partial_y(c):
    d = c.size - 1
    return np.array([c[k + 1] * (k + 1) for k in range(d)])


def _binary_quadratic_rays(q):
    """Roots of a binary quadratic with analytic double-root handling.

    Returns a list of (unit ray, multiplicity).  The double-root branch is
    decided by the discriminant so the returned ray does not suffer the
    sqrt(eps) scatter of generic root finders.
    """
    q = np.asarray(q, dtype=np.complex128)
    scale = np.abs(q).max()
    if scale == 0.0:
        return []
    q = q / scale
    disc = q[1] * q[1] - 4 * q[0] * q[2]
    if abs(disc) <= 1e-10:
        if abs(q[0]) >= abs(q[2]):
            ray = normalize_ray(np.array([-q[1], 2 * q[0]]))
        else:
            ray = normalize_ray(np.array([2 * q[2], -q[1]]))
        return [(ray, 2)]
    return binary_form_roots(q)


def _binary_multiple_roots(c):
    """Multiple roots of a binary cubic, located as simple roots of its
    partial derivatives (never from clustered companion eigenvalues).

    Returns a list of (unit ray, multiplicity) with multiplicity >= 2;
    a cubic has at most one such root.
    """
    c = np.asarray(c, dtype=np.complex128)
    c = c / np.abs(c).max()
    fx = _binary_partial_x(c)
    fy = _binary_partial_y(c)
    use_fx = np.abs(fx).max() >= np.abs(fy).max()
    q, other = (fx, fy) if use_fx else (fy, fx)
    other_scale = max(np.abs(other).max(), 1e-30)
    found = []
    for ray, _ in _binary_quadratic_rays(q):
        if abs(_eval_binary(c, ray)) > _MULT_F_TOL:
            continue
        if abs(_eval_binary(other, ray)) > _MULT_F_TOL * max(1.0, 1.0 / other_scale):
            continue
        second = [_binary_partial_x(fx), _binary_partial_y(fx), _binary_partial_y(fy)]
        second_vals = [abs(_eval_binary(s, ray)) for s in second]
        if max(second_vals) <= _MULT_SECOND_TOL:
            # triple root: the dominant second partial is a linear form with
            # the root as its exact zero
            lin = max(second, key=lambda s: np.abs(s).max())
            ray = normalize_ray(np.array([-lin[1], lin[0]]))
            found.append((ray, 3))
        else:
            found.append((ray, 2))
    if len(found) > 1:
        # only one multiple root can exist; keep the better one
        found.sort(key=lambda rm: abs(_eval_binary(c, rm[0])))
        found = found[:1]
    return found


def _cubic_root_profile(c, tol):
    """All roots of a binary cubic as (ray, mult), with multiple roots
    refined via derivative forms and simple roots from the companion path."""
    multiples = _binary_multiple_roots(c)
    raw = binary_form_roots(c, tol.root_cluster)
    out = list(multiples)
    used = sum(m for _, m in multiples)
    budget = 3 - used
    for ray, mult in sorted(raw, key=lambda rm: -rm[1]):
        if budget <= 0:
            break
        if any(chordal_distance(ray, rep) <= 1e-4 for rep, _ in multiples):
            continue
        take = min(mult, budget)
        out.append((ray, take))
        budget -= take
    return out


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------

def _orthonormalize(mats):
    """Frobenius-orthonormal basis of a span plus the change-of-basis R:
    input ray v corresponds to internal ray R @ v."""
    x = np.stack([np.asarray(m, dtype=np.complex128).reshape(9) for m in mats])
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero generator")
    q, r = np.linalg.qr(x.T)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * diag.max():
        raise ValueError("generators are linearly dependent")
    gens = q.T.reshape(-1, 3, 3)
    return gens, r


def _span_matrices(gens, rays):
    return np.einsum("nk,kij->nij", np.atleast_2d(rays), gens)


def _rank_at(gens, ray, tol):
    s = batch_singvals3(_span_matrices(gens, ray))[0]
    return numerical_rank(s, tol)


def _common_factor_flags(gens, tol):
    h = np.hstack(list(gens))
    v = np.vstack(list(gens))
    sh = np.linalg.svd(h, compute_uv=False)
    sv = np.linalg.svd(v, compute_uv=False)
    return numerical_rank(sh, tol) == 1, numerical_rank(sv, tol) == 1


def _seeded_unitary(rng, n):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _unit_points(rng, count, nvars):
    z = (rng.standard_normal((count, nvars)) + 1j * rng.standard_normal((count, nvars)))
    return z / np.linalg.norm(z, axis=1)[:, None]


# --------------------------------------------------------------------------
# Gauss-Newton refinement on quadric systems
# --------------------------------------------------------------------------

def _quad_values(quads, p):
    """Values of quadrics (m, 6) at a single 3-point, via direct monomials."""
    x, y, z = p
    monos = np.array([x * x, x * y, x * z, y * y, y * z, z * z])
    return quads @ monos


def _gauss_newton(quads, grads, p0, maxiter=40):
    """Polish a projective point against a system of unit-normalized
    quadrics.  Returns (unit point, residual).

    The step solves the 2-unknown normal equations in the affine chart of
    the largest coordinate; iteration stops at the residual target, on
    divergence, or when progress stalls (degenerate solutions cannot be
    improved along directions the Jacobian does not see).
    """
    p = np.asarray(p0, dtype=np.complex128).copy()
    nrm = np.linalg.norm(p)
    if not np.isfinite(nrm) or nrm == 0.0:
        return None, np.inf
    p /= nrm
    chart = int(np.argmax(np.abs(p)))
    free = [i for i in range(3) if i != chart]
    p = p / p[chart]
    resid = np.inf
    stalls = 0
    for _ in range(maxiter):
        scale = p.real @ p.real + p.imag @ p.imag
        vals = _quad_values(quads, p)
        new_resid = np.abs(vals).max() / scale
        if new_resid > 0.7 * resid:
            stalls += 1
            if stalls >= 3:
                resid = new_resid
                break
        resid = new_resid
        if resid <= _GN_TARGET:
            break
        jac = (grads @ p)[:, free]
        jh = jac.conj().T
        gram = jh @ jac
        rhs = -(jh @ vals)
        det = gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[1, 0]
        if abs(det) <= 1e-30:
            break
        step = np.array([
            (rhs[0] * gram[1, 1] - gram[0, 1] * rhs[1]) / det,
            (gram[0, 0] * rhs[1] - rhs[0] * gram[1, 0]) / det,
        ])
        p[free] += step
        if not np.all(np.isfinite(p)):
            return None, np.inf
    return normalize_ray(p), resid


# --------------------------------------------------------------------------
# rank-1 locus of a span
# --------------------------------------------------------------------------

def _rank1_locus(gens, tol, rng, extra_candidates=(), verify_budget=40):
    """Locate the rank<=1 rays of a 2- or 3-dimensional span of 3x3
    matrices (generators orthonormal).

    Returns (points, infinite, certified); points are unit coordinate
    vectors in the generator basis (representatives only when infinite).
    """
    quads = _minor_quadrics(gens)
    norms = np.abs(quads).max(axis=1)
    if norms.max() <= 1e-12:
        return [], True, True        # every element has rank <= 1
    active = quads[norms > 1e-6 * norms.max()]
    active = active / np.abs(active).max(axis=1)[:, None]
    grads = np.stack([_quad_gradient(q) for q in active])

    resultant = None
    for _ in range(3):
        w1 = rng.standard_normal(len(active)) + 1j * rng.standard_normal(len(active))
        w2 = rng.standard_normal(len(active)) + 1j * rng.standard_normal(len(active))
        q1 = w1 @ active
        q2 = w2 @ active
        q1 = q1 / np.abs(q1).max()
        q2 = q2 / np.abs(q2).max()
        res = _resultant_z(q1, q2)
        if np.abs(res).max() > 1e-10:
            resultant = (q1, q2, res)
            break

    if resultant is None:
        # the random combinations share a common component: the rank-1
        # locus is (almost surely) a curve; confirm by sweeping lines
        points = _verify_rank1_curve(gens, active, grads, tol, rng, verify_budget)
        if len(points) >= _INFINITE_COUNT:
            return points, True, True
        return points, False, False

    q1, q2, res = resultant
    candidates = []
    for ray_xy, _ in binary_form_roots(res, tol.root_cluster):
        x0, y0 = ray_xy
        zs = _quad_roots_z(q1, x0, y0) + _quad_roots_z(q2, x0, y0)
        candidates.extend(np.array([x0, y0, z]) for z in zs)
    candidates.append(np.array([0.0, 0.0, 1.0], dtype=np.complex128))
    candidates.extend(np.asarray(c, dtype=np.complex128) for c in extra_candidates)

    accepted = []
    certified = True
    for cand in candidates:
        point, resid = _gauss_newton(active, grads, cand)
        if point is None:
            continue
        if resid <= 10 * _GN_TARGET:
            s = batch_singvals3(_span_matrices(gens, point))[0]
            if numerical_rank(s, tol) <= 1:
                accepted.append((point, s[1] / max(s[0], 1e-300)))
        else:
            start = np.abs(_quad_values(active, cand / np.linalg.norm(cand))).max()
            if start <= _PROMISING:
                certified = False
    points, unambiguous = _merge_locus_points(accepted)
    certified &= unambiguous
    if len(points) >= _INFINITE_COUNT:
        return points, True, certified
    return points, False, certified


def _verify_rank1_curve(gens, active, grads, tol, rng, budget):
    """Sample lines through the span looking for rank-1 points; a
    positive-dimensional locus is met by (almost) every line.  Stops as
    soon as enough distinct points are confirmed."""
    found = []
    for _ in range(max(8, budget)):
        a, b = _unit_points(rng, 2, 3)
        restr = np.stack([_restrict_quad(q, a, b) for q in active])
        rnorms = np.abs(restr).max(axis=1)
        if rnorms.max() <= 1e-10:
            # all minors vanish on the whole line
            for ray2 in (np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0])):
                p = normalize_ray(ray2[0] * a + ray2[1] * b)
                if _rank_at(gens, p, tol) <= 1:
                    found.append((p, 1))
        else:
            dominant = restr[int(np.argmax(rnorms))]
            for ray2, _ in _binary_quadratic_rays(dominant):
                p0 = ray2[0] * a + ray2[1] * b
                nrm = np.linalg.norm(p0)
                if nrm == 0.0:
                    continue
                p0 /= nrm
                if np.abs(_quad_values(active, p0)).max() > _PROMISING:
                    continue
                point, resid = _gauss_newton(active, grads, p0)
                if point is not None and resid <= 10 * _GN_TARGET \
                        and _rank_at(gens, point, tol) <= 1:
                    found.append((point, 0.0))
        if len(found) >= _INFINITE_COUNT:
            points, _ = _merge_locus_points(found)
            if len(points) >= _INFINITE_COUNT:
                return points
    points, _ = _merge_locus_points(found)
    return points


def _restrict_quad(q, a, b):
    """Ternary quadric restricted to the line s*a + t*b: binary quadratic."""
    qa = _quad_values(q[None, :], a)[0]
    qb = _quad_values(q[None, :], b)[0]
    qab = _quad_values(q[None, :], a + b)[0]
    return np.array([qa, qab - qa - qb, qb])


# --------------------------------------------------------------------------
# determinant-curve factorization type (3-dimensional spans)
# --------------------------------------------------------------------------

def _translation_kernel(f):
    """Directions d with d . grad F identically zero.  Kernel dimension 2
    means F is a perfect cube of a line; dimension 1 means F is a binary
    form in disguise (all components concurrent)."""
    grads = _cubic_gradient(f)                  # (3, 6)
    mat = grads.T                               # (6, 3): columns multiply d
    u, s, vh = np.linalg.svd(mat)
    dim = int(np.sum(s <= _KERNEL_REL * s[0]))
    kernel = vh.conj()[3 - dim:] if dim else np.zeros((0, 3))
    return dim, kernel, vh.conj()


def _restrict_cubic_to_line(f, a, b):
    """Ternary cubic restricted to s*a + t*b: binary cubic coefficients."""
    fa = _eval_cubic(f, a)
    fb = _eval_cubic(f, b)
    fs = _eval_cubic(f, a + b)
    fd = _eval_cubic(f, a - b)
    c21 = (fs - fd) / 2 - fb
    c12 = (fs + fd) / 2 - fa
    return np.array([fa, c21, c12, fb])


def _singular_points(f, tol, rng):
    """Isolated singular points of the projective cubic curve F = 0,
    located as common zeros of the three gradient quadrics.

    Returns (points, certified); None for points means the elimination was
    degenerate in every variable ordering (positive-dimensional singular
    locus reaches here only defensively)."""
    grads_q = _cubic_gradient(f)
    gnorms = np.abs(grads_q).max(axis=1)
    active = grads_q / gnorms[:, None]
    grad_lin = np.stack([_quad_gradient(q) for q in active])

    for perm in ((0, 1, 2), (2, 0, 1), (1, 2, 0)):
        qa = _permute_quad(active[perm[0]], perm)
        qb = _permute_quad(active[perm[1]], perm)
        res = _resultant_z(qa, qb)
        if np.abs(res).max() > 1e-10:
            inv = list(np.argsort(perm))
            candidates = []
            for ray_xy, _ in binary_form_roots(res, tol.root_cluster):
                x0, y0 = ray_xy
                zs = _quad_roots_z(qa, x0, y0) + _quad_roots_z(qb, x0, y0)
                for z in zs:
                    p = np.array([x0, y0, z])
                    candidates.append(p[inv])
            candidates.append(np.eye(3, dtype=np.complex128)[perm[2]])
            scored = []
            certified = True
            for cand in candidates:
                point, resid = _gauss_newton(active, grad_lin, cand)
                if point is None:
                    continue
                if resid <= 10 * _GN_TARGET:
                    scored.append((point, resid))
                elif np.abs(_quad_values(active, cand / np.linalg.norm(cand))).max() <= _PROMISING:
                    certified = False
            points, unambiguous = _merge_locus_points(scored)
            return points, certified and unambiguous
    return None, False


def _hessian_at(f, p):
    grads_q = _cubic_gradient(f)
    rows = [_quad_gradient(q) @ p for q in grads_q]
    return np.stack(rows)


def _det_curve_type(f, tol, rng):
    """Factorization/singularity type of a nonzero ternary cubic.

    Returns (name, certified).  Catalog spans produce ``triangle``,
    ``conic-chord``, ``cuspidal``, ``double-line`` and ``triple-line``;
    generic spans are ``smooth``.
    """
    f = f / np.abs(f).max()
    kdim, kernel, basis = _translation_kernel(f)
    if kdim >= 2:
        return "triple-line", True
    if kdim == 1:
        # binary in the two non-kernel directions
        a, b = basis[0], basis[1]
        restricted = _restrict_cubic_to_line(f, a, b)
        multiples = _binary_multiple_roots(restricted)
        if not multiples:
            return "concurrent-lines", True
        if multiples[0][1] >= 3:
            return "triple-line", True
        return "double-line", True

    points, certified = _singular_points(f, tol, rng)
    if points is None:
        return "unknown", False
    if len(points) == 0:
        return "smooth", certified
    if len(points) in (2, 3):
        # a reduced cubic with 2 or 3 singular points is a conic plus a
        # chord, respectively a triangle; every singular point is a node
        if all(_hessian_ratio(f, p) > 1e-3 for p in points):
            return ("conic-chord" if len(points) == 2 else "triangle"), certified
        return "unknown", False
    if len(points) > 3:
        return "unknown", False
    return _classify_single_singularity(f, points[0], certified)


def _hessian_ratio(f, p):
    hs = np.linalg.svd(_hessian_at(f, p), compute_uv=False)
    return hs[1] / hs[0] if hs[0] > 0 else 0.0


def _classify_single_singularity(f, p, certified):
    """Nodal / cuspidal / conic-tangent split for a curve with exactly one
    singular point.

    A cusp (or a tangency point) makes the gradient system degenerate, so
    the located point carries an O(sqrt(residual)) error that would blur
    the Hessian rank test.  The Hessian there drops to rank 1, and its 2x2
    minors (quadrics in the position) vanish transversally at the true
    point, so one more Gauss-Newton pass on the augmented system restores
    full accuracy before the local type is read off.
    """
    ratio = _hessian_ratio(f, p)
    if ratio > 1e-3:
        return "nodal", certified
    grads_q = _cubic_gradient(f)
    grads_q = grads_q / np.abs(grads_q).max(axis=1)[:, None]
    # hess_lin[i, j] = coefficient vector of the linear form (d2 F / dx_i dx_j)
    hess_lin = np.stack([_quad_gradient(q) for q in grads_q])
    hminors = _minors_of_linear_matrix(hess_lin)
    hnorms = np.abs(hminors).max(axis=1)
    keep = hnorms > 1e-8 * max(hnorms.max(), 1e-300)
    augmented = np.concatenate([grads_q, hminors[keep] / hnorms[keep, None]])
    aug_grads = np.stack([_quad_gradient(q) for q in augmented])
    point, resid = _gauss_newton(augmented, aug_grads, p)
    if point is not None and resid <= 10 * _GN_TARGET:
        p = point
        ratio = _hessian_ratio(f, p)
    if ratio > 1e-3:
        return "nodal", certified
    if ratio > _HESS_RANK_REL:
        return "unknown", False
    # Hessian rank 1: distinguish a cusp from a tangent line component by
    # restricting F to the line through p in the flat direction
    hess = _hessian_at(f, p)
    _, _, vh = np.linalg.svd(hess)
    d = vh.conj()[2]
    d = d - np.vdot(p, d) * p
    nrm = np.linalg.norm(d)
    if nrm <= 1e-8:
        d = vh.conj()[1]
        d = d - np.vdot(p, d) * p
        nrm = np.linalg.norm(d)
        if nrm == 0.0:
            return "unknown", False
    d /= nrm
    restricted = _restrict_cubic_to_line(f, p, d)
    if np.abs(restricted).max() <= 1e-8:
        return "conic-tangent", certified
    return "cuspidal", certified


# --------------------------------------------------------------------------
# line sweep (curve sampling)
# --------------------------------------------------------------------------

def _cubic_discriminant(c):
    a, b, cc, d = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    return (18 * a * b * cc * d - 4 * b ** 3 * d + b ** 2 * cc ** 2
            - 4 * a * cc ** 3 - 27 * a ** 2 * d ** 2)


def _line_sweep(f, gens, tol, n_lines, rng):
    """Sample the determinant curve along random projective lines.

    Returns (curve_ranks, rank1_candidates): the matrix ranks found at
    (refined) curve points, and low-sigma2 points worth polishing into
    rank-1 rays.
    """
    a = _unit_points(rng, n_lines, 3)
    b = _unit_points(rng, n_lines, 3)
    fa = _eval_cubic(f, a)
    fb = _eval_cubic(f, b)
    fs = _eval_cubic(f, a + b)
    fd = _eval_cubic(f, a - b)
    coeffs = np.stack([fa, (fs - fd) / 2 - fb, (fs + fd) / 2 - fa, fb], axis=1)
    norms = np.abs(coeffs).max(axis=1)
    fscale = np.abs(f).max()

    points = []
    inside = norms <= _DET_ZERO_REL * fscale
    for i in np.nonzero(inside)[0]:
        for ray2 in (np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0])):
            points.append(normalize_ray(ray2[0] * a[i] + ray2[1] * b[i]))

    disc_rel = np.abs(_cubic_discriminant(coeffs)) / np.maximum(norms, 1e-300) ** 4
    easy = (~inside) & (np.abs(coeffs[:, 0]) > 1e-8 * norms) & (disc_rel > 1e-9)
    idx = np.nonzero(easy)[0]
    if idx.size:
        roots = batch_cubic_roots(coeffs[idx])
        # one vectorized Newton polish
        c0, c1, c2, c3 = (coeffs[idx, k][:, None] for k in range(4))
        for _ in range(2):
            val = ((c0 * roots + c1) * roots + c2) * roots + c3
            der = (3 * c0 * roots + 2 * c1) * roots + c2
            ok = np.abs(der) > 0
            roots = roots - np.where(ok, val / np.where(ok, der, 1.0), 0.0)
        pts = roots[..., None] * a[idx][:, None, :] + b[idx][:, None, :]
        pts = pts.reshape(-1, 3)
        pts = pts / np.linalg.norm(pts, axis=1)[:, None]
        points.extend(pts)

    tricky = np.nonzero((~inside) & (~easy))[0]
    for i in tricky:
        for ray2, _ in _cubic_root_profile(coeffs[i] / norms[i], tol):
            points.append(normalize_ray(ray2[0] * a[i] + ray2[1] * b[i]))

    if not points:
        return np.array([], dtype=int), []
    points = np.stack(points)
    svals = batch_singvals3(_span_matrices(gens, points))
    ranks = np.array([numerical_rank(s, tol) for s in svals])
    dips = svals[:, 1] <= _DIP * np.maximum(svals[:, 0], 1e-300)
    rank1_cands = [points[i] for i in np.nonzero(dips)[0]]
    # polishing is per-candidate, so hand over one representative per blob
    rank1_cands, _ = _merge_locus_points([(p, 0.0) for p in rank1_cands],
                                         radius=10 * _LOCUS_CLUSTER)
    return ranks, rank1_cands[:8]


# --------------------------------------------------------------------------
# span analyses
# --------------------------------------------------------------------------

def _analyze_dim1(gens, tol):
    s = batch_singvals3(gens)[0]
    rank = numerical_rank(s, tol)
    flags = _common_factor_flags(gens, tol)
    sig = SpanSignature(1, rank, 1 if rank == 1 else 0, 1 if rank == 2 else 0,
                        flags[0], flags[1], None)
    points = (np.array([1.0 + 0.0j]),) if rank == 1 else ()
    return SpanAnalysis(sig, True, points, False)


def _analyze_dim2(mats, tol):
    gens, basis = _orthonormalize(mats)
    flags = _common_factor_flags(gens, tol)
    sample_mats = _span_matrices(gens, _DIM2_SAMPLES)
    dets = batch_det3(sample_mats)

    if np.abs(dets).max() <= _DET_ZERO_REL:
        svals = batch_singvals3(sample_mats)
        ranks = [numerical_rank(s, tol) for s in svals]
        gr = max(ranks)
        if gr <= 1:
            sig = SpanSignature(2, 1, INFINITE, 0, flags[0], flags[1], "zero")
            reps = tuple(np.linalg.solve(basis, e) for e in np.eye(2, dtype=complex))
            return SpanAnalysis(sig, True, reps, True)
        points, unambiguous = _dim2_degenerate_rank1(gens, tol)
        sig = SpanSignature(2, 2, len(points), INFINITE, flags[0], flags[1], "zero")
        out = tuple(normalize_ray(np.linalg.solve(basis, p)) for p in points)
        return SpanAnalysis(sig, unambiguous, out, False)

    cubic = _pencil_cubic(gens)
    profile = _dim2_root_ranks(gens, cubic, tol)
    r1_points = [ray for ray, mult, rank in profile if rank <= 1]
    r2 = sum(1 for _, _, rank in profile if rank == 2)
    pattern = "+".join(str(m) for _, m, _ in
                       sorted(profile, key=lambda t: -t[1]))
    assert sum(m for _, m, _ in profile) == 3
    sig = SpanSignature(2, 3, len(r1_points), r2, False, False, pattern)
    out = tuple(normalize_ray(np.linalg.solve(basis, p)) for p in r1_points)
    return SpanAnalysis(sig, True, out, False)


def _dim2_root_ranks(gens, cubic, tol):
    """Root profile of a nondegenerate pencil: list of (internal ray,
    multiplicity, rank at the refined ray).  Simple roots always carry rank
    2 (a rank-1 ray is necessarily a multiple root, and a rank-3 value on
    the zero locus is impossible)."""
    profile = []
    for ray, mult in _cubic_root_profile(cubic / np.abs(cubic).max(), tol):
        if mult >= 2:
            rank = _rank_at(gens, ray, tol)
        else:
            rank = 2
        profile.append((ray, mult, min(rank, 2)))
    return profile


def _dim2_degenerate_rank1(gens, tol):
    """Distinct rank<=1 rays of a degenerate pencil with generic rank 2
    (always finitely many: at most the two roots of a nonzero minor).
    Returns (points, unambiguous)."""
    quads = _minor_quadrics(gens)     # (9, 3) binary quadratics
    norms = np.abs(quads).max(axis=1)
    if norms.max() <= 1e-12:
        return [], True
    active = quads[norms > 1e-6 * norms.max()]
    active = active / np.abs(active).max(axis=1)[:, None]
    dominant = active[int(np.argmax(np.abs(active).max(axis=1)))]
    scored = []
    for ray, _ in _binary_quadratic_rays(dominant):
        resid = max(abs(_eval_binary(q, ray)) for q in active)
        if resid <= _MINOR_RESID:
            s = batch_singvals3(_span_matrices(gens, ray))[0]
            if numerical_rank(s, tol) <= 1:
                scored.append((ray, s[1] / max(s[0], 1e-300)))
    return _merge_locus_points(scored)


def _analyze_dim3(mats, tol, budget, seed):
    gens, basis = _orthonormalize(mats)
    flags = _common_factor_flags(gens, tol)
    rng = np.random.default_rng(seed)
    rot = _seeded_unitary(rng, 3)
    work = np.einsum("ij,jkl->ikl", rot, gens)

    def to_input(p):
        return normalize_ray(np.linalg.solve(basis, rot.T @ p))

    f = _pencil_cubic(work)
    fmax = np.abs(f).max()
    samples = _unit_points(rng, 16, 3)
    sample_ranks = [numerical_rank(s, tol)
                    for s in batch_singvals3(_span_matrices(work, samples))]

    certified = True
    if fmax <= _DET_ZERO_REL:
        det_curve = "zero"
        gr = max(sample_ranks)
        if gr <= 1:
            sig = SpanSignature(3, 1, INFINITE, 0, flags[0], flags[1], det_curve)
            reps = tuple(np.linalg.solve(basis, e) for e in np.eye(3, dtype=complex))
            return SpanAnalysis(sig, True, reps, True)
        points, infinite, cert = _rank1_locus(work, tol, rng,
                                              verify_budget=min(budget, 40))
        r1 = INFINITE if infinite else len(points)
        sig = SpanSignature(3, 2, r1, INFINITE, flags[0], flags[1], det_curve)
        return SpanAnalysis(sig, cert, tuple(to_input(p) for p in points), infinite)

    det_curve, curve_cert = _det_curve_type(f, tol, rng)
    certified &= curve_cert
    curve_ranks, dip_cands = _line_sweep(f / fmax, work, tol,
                                         max(12, min(budget, 48)), rng)
    points, infinite, locus_cert = _rank1_locus(work, tol, rng,
                                                extra_candidates=dip_cands,
                                                verify_budget=min(budget, 40))
    certified &= locus_cert
    r1 = INFINITE if infinite else len(points)
    r2 = INFINITE if np.any(curve_ranks == 2) else 0
    sig = SpanSignature(3, 3, r1, r2, flags[0], flags[1], det_curve)
    return SpanAnalysis(sig, certified, tuple(to_input(p) for p in points), infinite)


def analyze_span(generators, tol=DEFAULT_TOL, budget=200, seed=0):
    """Full rank-stratification analysis of a span of 1-3 matrices.

    ``budget`` bounds the number of sampled projective lines per
    subproblem; ``seed`` fixes every random draw, so the result is a pure
    function of ``(generators, tol, budget, seed)``.
    """
    mats = [np.asarray(m, dtype=np.complex128) for m in generators]
    if not 1 <= len(mats) <= 3:
        raise ValueError("analyze_span expects 1..3 generators")
    if any(m.shape != (3, 3) for m in mats):
        raise ValueError("generators must be 3x3 matrices")
    if len(mats) == 1:
        gens, _ = _orthonormalize(mats)
        return _analyze_dim1(gens, tol)
    if len(mats) == 2:
        return _analyze_dim2(mats, tol)
    return _analyze_dim3(mats, tol, budget, seed)


def rank_profile_dim2(m1, m2, tol=DEFAULT_TOL):
    """Signature of the pencil spanned by two independent 3x3 matrices."""
    return _analyze_dim2([m1, m2], tol).signature


def rank_profile_dim3(m1, m2, m3, tol=DEFAULT_TOL, budget=200, seed=0):
    """Analysis of the span of three independent 3x3 matrices.

    Returns a :class:`SpanAnalysis`; ``certified`` is the explicit
    low-confidence flag for budget-limited searches.
    """
    return _analyze_dim3([m1, m2, m3], tol, budget, seed)


def dim2_pencil_roots(m1, m2, tol=DEFAULT_TOL):
    """Detailed root profile of det(x*m1 + y*m2): list of
    (ray in input coordinates, multiplicity, rank at the ray), or ``None``
    for an identically zero determinant."""
    gens, basis = _orthonormalize([m1, m2])
    dets = batch_det3(_span_matrices(gens, _DIM2_SAMPLES))
    if np.abs(dets).max() <= _DET_ZERO_REL:
        return None
    cubic = _pencil_cubic(gens)
    profile = _dim2_root_ranks(gens, cubic, tol)
    return [(normalize_ray(np.linalg.solve(basis, ray)), mult, rank)
            for ray, mult, rank in profile]


# --------------------------------------------------------------------------
# public subspace operations
# --------------------------------------------------------------------------

def right_subspace(state, tol=DEFAULT_TOL):
    """Right singular subspace of the party-1 flattening of a tripartite
    state, reshaped into matrices on parties 2 and 3."""
    if state.parties != 3:
        raise ValueError("right_subspace expects a 3-party state")
    res = svd(flatten(state, 1).matrix, tol)
    dim = numerical_rank(res.singulars, tol)
    gens = np.stack([res.right[:, k].reshape(3, 3) for k in range(dim)])
    return SingularSubspace(dim=dim, generators=gens, singulars=res.singulars[:dim])


def _split_rank1(element):
    res = svd(element)
    scale = np.sqrt(res.singulars[0])
    left = res.left[:, 0] * scale
    right = res.right[:, 0].conj() * scale
    return left, right


def product_vectors_in_span(subspace, tol=DEFAULT_TOL, budget=200, seed=0):
    """Product vectors (rank-1 elements) of a right singular subspace.

    Each returned element satisfies ``sum_k c_k  generators[k] ~ left (x)
    right``; the factors come from the dominant singular pair of the
    reshaped matrix.  When the rank-1 locus is infinite only located
    representatives are returned; the empty list is a valid answer.
    """
    analysis = analyze_span(subspace.generators, tol, budget, seed)
    out = []
    for coeff in analysis.rank1_points:
        coeff = np.asarray(coeff, dtype=np.complex128).reshape(-1)
        element = np.tensordot(coeff, subspace.generators, axes=(0, 0))
        left, right = _split_rank1(element)
        out.append(ProductVector(coefficients=coeff, left=left, right=right))
    return out
