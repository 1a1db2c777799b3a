"""Small dense complex-matrix kernel with a centralized tolerance policy.

Everything in this package works on tiny matrices (at most 9x9).  This
module wraps the LAPACK primitives with a fixed sign/phase convention so
that canonicalization and tests are reproducible, and provides projective
root finding for binary forms (the determinant of a matrix pencil is a
binary cubic whose roots mark rank drops).

Rays of the complex projective line/plane are represented by unit-norm
vectors whose largest-magnitude component is made real positive.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NumericalError",
    "TolerancePolicy",
    "DEFAULT_TOL",
    "SvdResult",
    "HomogeneousForm",
    "as_cmatrix",
    "svd",
    "numerical_rank",
    "eigenvalues_3x3",
    "cubic_form_roots",
    "binary_form_roots",
    "normalize_ray",
    "chordal_distance",
    "cluster_rays",
]

# Coefficient vectors this small relative to their natural scale are treated
# as exact zeros (forms, leading coefficients, determinant samples).
ZERO_REL = 1e-12

# Monomial orders for degree-3 forms: exponents of (x, y) resp. (x, y, z).
BINARY_CUBIC_MONOMIALS = ((3, 0), (2, 1), (1, 2), (0, 3))
TERNARY_CUBIC_MONOMIALS = (
    (3, 0, 0), (2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 1, 1),
    (1, 0, 2), (0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3),
)


class NumericalError(RuntimeError):
    """A numerical kernel failed to converge or produced unusable output."""


@dataclass(frozen=True)
class TolerancePolicy:
    """Thresholds shared by every operation in the package.

    Parameters
    ----------
    rank_rel : float
        A singular value counts as nonzero when it exceeds
        ``rank_rel * sigma_1``.  Relative to the largest singular value so
        that the rank (and hence the classification) is scale invariant.
    root_cluster : float
        Relative chordal radius within which polynomial roots on the
        projective line are merged (multiplicities add).
    tol_unitary, tol_recon : float
        Acceptable unitarity defect and relative reconstruction error of a
        singular value decomposition.
    """

    rank_rel: float = 1e-9
    root_cluster: float = 1e-7
    tol_unitary: float = 1e-11
    tol_recon: float = 1e-11

    def __post_init__(self):
        for name in ("rank_rel", "root_cluster", "tol_unitary", "tol_recon"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly in (0, 1), got {value!r}")


DEFAULT_TOL = TolerancePolicy()


def as_cmatrix(a, max_dim=9):
    """Validate and return ``a`` as a complex matrix with finite entries.

    Dimensions are restricted to ``1..max_dim`` (nothing in this package is
    larger than 3x9, but bipartite rank reporting accepts up to 9x9).
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    rows, cols = m.shape
    if not (1 <= rows <= max_dim and 1 <= cols <= max_dim):
        raise ValueError(f"matrix shape {m.shape} outside supported range 1..{max_dim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix entries must be finite")
    return m


@dataclass(frozen=True)
class SvdResult:
    """Full singular value decomposition ``C = left @ Sigma @ right^H``.

    ``left`` (m x m) and ``right`` (n x n) are unitary; ``singulars`` holds
    the ``min(m, n)`` singular values in descending order.  The phase of
    each left singular vector is fixed (first nonzero entry real positive)
    and the paired right vector is co-rotated, so the decomposition is a
    deterministic function of the input.
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def reconstruct(self):
        m, n = self.left.shape[0], self.right.shape[0]
        sigma = np.zeros((m, n), dtype=np.complex128)
        k = self.singulars.size
        sigma[:k, :k] = np.diag(self.singulars)
        return self.left @ sigma @ self.right.conj().T


def _fix_svd_phases(u, w):
    """Apply the phase convention in place: for each left singular vector,
    the first entry with non-negligible magnitude is made real positive."""
    for k in range(u.shape[1]):
        col = u[:, k]
        mags = np.abs(col)
        floor = 1e-12 * mags.max()
        idx = int(np.argmax(mags > floor)) if mags.max() > 0 else 0
        entry = col[idx]
        if abs(entry) == 0.0:
            continue
        phase = entry / abs(entry)
        u[:, k] *= np.conj(phase)
        if k < w.shape[1]:
            w[:, k] *= np.conj(phase)


def svd(c, tol=DEFAULT_TOL):
    """Singular value decomposition with the package phase convention.

    Parameters
    ----------
    c : array_like, shape (m, n)
    tol : TolerancePolicy

    Returns
    -------
    SvdResult

    Raises
    ------
    NumericalError
        If the iterative kernel does not converge or the result violates
        the unitarity/reconstruction tolerances.
    """
    m = as_cmatrix(c)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    u = np.ascontiguousarray(u)
    w = np.ascontiguousarray(vh.conj().T)
    _fix_svd_phases(u, w)
    result = SvdResult(left=u, singulars=s, right=w)

    eye_l = np.eye(u.shape[0])
    eye_r = np.eye(w.shape[0])
    defect = max(np.abs(u.conj().T @ u - eye_l).max(),
                 np.abs(w.conj().T @ w - eye_r).max())
    if defect > tol.tol_unitary:
        raise NumericalError(f"SVD unitarity defect {defect:.3e} exceeds {tol.tol_unitary}")
    scale = np.linalg.norm(m)
    recon = np.linalg.norm(result.reconstruct() - m)
    if scale > 0 and recon > tol.tol_recon * scale:
        raise NumericalError(f"SVD reconstruction error {recon / scale:.3e} "
                             f"exceeds {tol.tol_recon}")
    return result


def numerical_rank(singulars, tol=DEFAULT_TOL):
    """Number of singular values above ``rank_rel * sigma_1``.

    ``singulars`` must be non-negative and sorted descending; returns 0
    iff all of them vanish.
    """
    s = np.asarray(singulars, dtype=float)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel * s[0]))


def eigenvalues_3x3(m):
    """The three eigenvalues of a 3x3 complex matrix.

    The multiset is returned deterministically, sorted lexicographically
    by real then imaginary part.
    """
    a = as_cmatrix(m)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {a.shape}")
    lam = np.linalg.eigvals(a)
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]


@dataclass(frozen=True)
class HomogeneousForm:
    """A degree-3 homogeneous polynomial in 2 or 3 variables.

    Coefficients follow ``BINARY_CUBIC_MONOMIALS`` (4 entries) or
    ``TERNARY_CUBIC_MONOMIALS`` (10 entries).
    """

    num_vars: int
    coefficients: np.ndarray

    degree = 3

    def __post_init__(self):
        if self.num_vars not in (2, 3):
            raise ValueError("num_vars must be 2 or 3")
        c = np.asarray(self.coefficients, dtype=np.complex128)
        expected = 4 if self.num_vars == 2 else 10
        if c.shape != (expected,):
            raise ValueError(f"expected {expected} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c.real)) or not np.all(np.isfinite(c.imag)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    def evaluate(self, points):
        """Evaluate at one point or a stack of points (shape (..., num_vars))."""
        pts = np.asarray(points, dtype=np.complex128)
        exps = BINARY_CUBIC_MONOMIALS if self.num_vars == 2 else TERNARY_CUBIC_MONOMIALS
        monos = np.stack([np.prod(pts ** np.asarray(e), axis=-1) for e in exps], axis=-1)
        return monos @ self.coefficients


def normalize_ray(v):
    """Unit-norm projective representative with the largest-magnitude
    component made real positive."""
    v = np.asarray(v, dtype=np.complex128)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector does not represent a projective point")
    v = v / n
    pivot = v[np.argmax(np.abs(v))]
    return v * (np.conj(pivot) / abs(pivot))


def chordal_distance(p, q):
    """Chordal (Fubini-Study sine) distance between projective points given
    by unit-norm representatives.  Ranges over [0, 1].

    Computed as the norm of the component of ``p`` orthogonal to ``q``,
    which stays accurate for nearly coincident points (the equivalent
    ``sqrt(1 - |<p, q>|^2)`` loses half the digits to cancellation).
    """
    q = np.asarray(q)
    rejection = np.asarray(p) - np.vdot(q, p) * q
    return min(1.0, float(np.linalg.norm(rejection)))


def cluster_rays(rays, radius):
    """Greedily merge projective points closer than ``radius``.

    Parameters
    ----------
    rays : sequence of (vector, multiplicity)
    radius : float

    Returns
    -------
    list of (vector, multiplicity)
        One representative per cluster (the first member), multiplicities
        added.  Deterministic for a fixed input order.
    """
    clusters = []
    for ray, mult in rays:
        for i, (rep, m) in enumerate(clusters):
            if chordal_distance(rep, ray) <= radius:
                clusters[i] = (rep, m + mult)
                break
        else:
            clusters.append((ray, int(mult)))
    return clusters


def _newton_polish(coeffs, roots, steps=2):
    """A couple of guarded Newton steps on ``p(t) = c[0] t^d + ... + c[d]``."""
    c = np.asarray(coeffs)
    dc = np.polyder(c)
    t = np.array(roots, dtype=np.complex128)
    for _ in range(steps):
        p = np.polyval(c, t)
        dp = np.polyval(dc, t)
        ok = np.abs(dp) > 0
        step = np.zeros_like(t)
        step[ok] = p[ok] / dp[ok]
        t_new = t - step
        better = np.abs(np.polyval(c, t_new)) <= np.abs(p)
        t = np.where(better, t_new, t)
    return t


def binary_form_roots(coeffs, cluster_radius=DEFAULT_TOL.root_cluster):
    """Projective roots of a binary form of any degree, with multiplicity.

    The form ``f(x, y) = sum_k c[k] x^(d-k) y^k`` is dehomogenized in the
    chart ``s = x/y``; the companion matrix of the resulting polynomial
    supplies the finite roots, and each power of ``y`` missing from the
    leading coefficients contributes one root at ``(1 : 0)`` (the ``y = 0``
    ray, detected by the leading-coefficient vanishing test).  Roots within
    ``cluster_radius`` in the chordal metric are merged.

    Returns
    -------
    list of (ray, multiplicity)
        ``ray`` is a unit 2-vector; multiplicities sum to the degree.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    degree = c.size - 1
    cmax = np.abs(c).max()
    if cmax == 0.0:
        raise ValueError("identically zero form has no well-defined roots")
    stripped = c / cmax
    inf_mult = 0
    while stripped.size > 1 and abs(stripped[0]) <= ZERO_REL:
        stripped = stripped[1:]
        inf_mult += 1
    rays = [(normalize_ray(np.array([1.0, 0.0])), 1)] * inf_mult
    if stripped.size > 1:
        finite = np.roots(stripped)
        finite = _newton_polish(stripped, finite)
        rays += [(normalize_ray(np.array([s, 1.0])), 1) for s in finite]
    merged = cluster_rays(rays, cluster_radius)
    assert sum(m for _, m in merged) == degree
    return merged


def cubic_form_roots(form, tol=DEFAULT_TOL, scale=None):
    """Roots of a degree-3 binary form, or ``None`` when it vanishes.

    Parameters
    ----------
    form : HomogeneousForm or length-4 coefficient array
        Coefficients ordered per ``BINARY_CUBIC_MONOMIALS``.
    tol : TolerancePolicy
        Supplies the root clustering radius.
    scale : float, optional
        Natural magnitude of the input (e.g. for a pencil determinant, the
        cube of the generator norms).  All coefficients at or below
        ``ZERO_REL * scale`` means the form is identically zero and
        ``None`` is returned.  Defaults to the largest coefficient.

    Returns
    -------
    list of (ray, multiplicity), or None
        1-3 distinct projective roots with multiplicities summing to 3.
    """
    if isinstance(form, HomogeneousForm):
        if form.num_vars != 2:
            raise ValueError("cubic_form_roots expects a binary form")
        c = form.coefficients
    else:
        c = np.asarray(form, dtype=np.complex128)
        if c.shape != (4,):
            raise ValueError("expected 4 binary-cubic coefficients")
    cmax = np.abs(c).max()
    ref = cmax if scale is None else float(scale)
    if cmax <= ZERO_REL * ref or cmax == 0.0:
        return None
    return binary_form_roots(c, tol.root_cluster)
