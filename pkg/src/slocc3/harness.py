"""Randomized property-test infrastructure.

Seeded generation of invertible local operators (ILOs), orbit sampling,
and a brute-force rank-locus oracle used in tests to validate the span
signatures.  The oracle deliberately shares nothing with the pencil
analysis beyond the batched singular-value kernel: it samples the span
densely and polishes singular-value dips with a derivative-free optimizer,
so a bug in the polynomial machinery cannot hide from it.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from slocc3._kernels import batch_singvals3
from slocc3.numerics import DEFAULT_TOL, NumericalError, numerical_rank
from slocc3.states import CanonicalId, PureState

__all__ = [
    "IloTriple",
    "RankLocusStats",
    "random_ilo",
    "random_invertible",
    "apply_ilo_tripartite",
    "brute_force_rank_locus",
    "write_orbit_fixture",
    "load_orbit_fixture",
]

_MAX_DRAWS = 1000


@dataclass(frozen=True, eq=False)
class IloTriple:
    """Three invertible 3x3 operators with their generation record."""

    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    seed: int
    condition_bound: float

    @property
    def factors(self):
        return (self.f1, self.f2, self.f3)


def _haar_unitary(rng):
    z = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_invertible(rng, condition_bound):
    """One complex-Gaussian 3x3 matrix, rejection-resampled until its
    condition number is within bound.  ``condition_bound <= 1`` requests a
    Haar-random unitary (the only matrices of condition 1)."""
    if condition_bound < 1.0:
        raise ValueError("condition_bound must be at least 1")
    if condition_bound <= 1.0:
        return _haar_unitary(rng)
    for _ in range(_MAX_DRAWS):
        f = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / np.sqrt(2)
        s = np.linalg.svd(f, compute_uv=False)
        if s[-1] > 0.0 and s[0] / s[-1] <= condition_bound:
            return f
    raise NumericalError(
        f"no matrix with condition <= {condition_bound} in {_MAX_DRAWS} draws")


def random_ilo(seed, condition_bound=50.0):
    """Deterministic ILO triple for a seed: entries are standard complex
    normal, rejection-resampled until each factor's condition number is
    within ``condition_bound``."""
    rng = np.random.default_rng(seed)
    f1 = random_invertible(rng, condition_bound)
    f2 = random_invertible(rng, condition_bound)
    f3 = random_invertible(rng, condition_bound)
    return IloTriple(f1=f1, f2=f2, f3=f3, seed=seed, condition_bound=condition_bound)


def _check_nonsingular(f, name):
    s = np.linalg.svd(np.asarray(f, dtype=np.complex128), compute_uv=False)
    if s[0] == 0.0 or s[-1] <= 1e-12 * s[0]:
        raise NumericalError(f"{name} is numerically singular")


def apply_ilo_tripartite(state, triple):
    """Apply ``f1 (x) f2 (x) f3`` to the amplitude tensor (operators act on
    kets, consistent with the bipartite coefficient law)."""
    if state.parties != 3:
        raise ValueError("apply_ilo_tripartite expects a 3-party state")
    for name, f in zip(("f1", "f2", "f3"), triple.factors):
        _check_nonsingular(f, name)
    out = np.einsum("ia,jb,kc,abc->ijk", triple.f1, triple.f2, triple.f3,
                    state.amplitudes)
    return PureState(out)


# --------------------------------------------------------------------------
# brute-force rank-locus oracle
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RankLocusStats:
    """Sampled rank statistics of a span.

    ``histogram`` counts ranks over the raw grid; ``min_rank`` includes the
    refinement stage (a dip confirmed to ``refine_tol`` counts as an actual
    rank drop); ``drop_points`` are the refined dip locations.
    """

    min_rank: int
    histogram: dict
    drop_points: tuple
    grid_n: int
    seed: int


def _grid_points(dim, grid_n, rng):
    if dim == 1:
        return np.array([[1.0 + 0.0j]])
    if dim == 2:
        re = np.linspace(-3.0, 3.0, grid_n)
        t = (re[:, None] + 1j * re[None, :]).ravel()
        chart1 = np.stack([np.ones_like(t), t], axis=1)
        chart2 = np.stack([t, np.ones_like(t)], axis=1)
        pts = np.concatenate([chart1, chart2])
    else:
        z = rng.standard_normal((grid_n * grid_n, 3)) \
            + 1j * rng.standard_normal((grid_n * grid_n, 3))
        pts = z
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def _refine_dip(gens, start, level, refine_tol):
    """Minimize sigma_level / sigma_1 over the projective span near
    ``start`` with a derivative-free simplex search."""
    dim = gens.shape[0]
    chart = int(np.argmax(np.abs(start)))
    free = [i for i in range(dim) if i != chart]
    x0 = start / start[chart]

    def unpack(params):
        p = np.zeros(dim, dtype=np.complex128)
        p[chart] = 1.0
        p[free] = params[: len(free)] + 1j * params[len(free):]
        return p

    def objective(params):
        p = unpack(params)
        m = np.tensordot(p, gens, axes=(0, 0))
        s = np.linalg.svd(m, compute_uv=False)
        if s[0] == 0.0:
            return 1.0
        return s[level - 1] / s[0]

    params0 = np.concatenate([x0[free].real, x0[free].imag])
    # explicit simplex: the default one degenerates around zero coordinates
    n = params0.size
    simplex = np.tile(params0, (n + 1, 1))
    simplex[1:] += 0.1 * np.eye(n)
    res = minimize(objective, params0, method="Nelder-Mead",
                   options={"maxiter": 300, "xatol": 1e-12, "fatol": 1e-15,
                            "initial_simplex": simplex})
    if refine_tol < res.fun <= 1e-3:
        # promising but not converged: continue from the best simplex point
        res = minimize(objective, res.x, method="Nelder-Mead",
                       options={"maxiter": 2000, "xatol": 1e-12, "fatol": 1e-15})
    point = unpack(res.x)
    point = point / np.linalg.norm(point)
    return float(res.fun), point


def brute_force_rank_locus(generators, grid_n=100, tol=DEFAULT_TOL, seed=0,
                           refine_tol=1e-8):
    """Dense projective grid sampling of a span of 1-3 matrices.

    The projective line is covered by two square grids of chart
    coordinates; higher-dimensional spans are sampled with ``grid_n**2``
    seeded uniform rays.  The deepest dips of ``sigma_2/sigma_1`` and
    ``sigma_3/sigma_1`` are then polished with Nelder-Mead; a polished
    ratio at or below ``refine_tol`` certifies a rank drop.
    """
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")
    raw = np.stack([np.asarray(g, dtype=np.complex128) for g in generators])
    norms = np.linalg.norm(raw.reshape(len(raw), -1), axis=1)
    gens = raw / norms[:, None, None]
    dim = gens.shape[0]
    if not 1 <= dim <= 3:
        raise ValueError("expected 1..3 generators")

    rng = np.random.default_rng(seed)
    pts = _grid_points(dim, grid_n, rng)
    svals = batch_singvals3(np.einsum("nk,kij->nij", pts, gens))
    ranks = np.array([numerical_rank(s, tol) for s in svals])
    histogram = {r: int(np.sum(ranks == r)) for r in sorted(set(ranks.tolist()))}
    min_rank = int(ranks.min())

    drop_points = []
    if dim >= 2:
        safe = np.maximum(svals[:, 0], 1e-300)
        for level, drops_to in ((2, 1), (3, 2)):
            if min_rank <= drops_to:
                continue
            ratios = svals[:, level - 1] / safe
            for idx in np.argsort(ratios)[:2]:
                value, point = _refine_dip(gens, pts[idx], level, refine_tol)
                if value <= refine_tol:
                    min_rank = min(min_rank, drops_to)
                    # report in the input generator basis
                    point = point / norms
                    drop_points.append(point / np.linalg.norm(point))
                    break
    return RankLocusStats(min_rank=min_rank, histogram=histogram,
                          drop_points=tuple(drop_points), grid_n=grid_n, seed=seed)


# --------------------------------------------------------------------------
# acceptance fixtures
# --------------------------------------------------------------------------

def write_orbit_fixture(path, cases):
    """Write orbit-invariance cases as a JSON list of
    ``[canonical id, seed, expected family]`` rows."""
    rows = [[str(cid), int(seed), family] for cid, seed, family in cases]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=0)
        fh.write("\n")


def load_orbit_fixture(path):
    """Read an orbit fixture; yields (CanonicalId, seed, expected family)."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = json.load(fh)
    out = []
    for id_str, seed, family in rows:
        fam, _, variant = id_str.partition(":")
        out.append((CanonicalId(fam, int(variant or 1)), int(seed), family))
    return out
