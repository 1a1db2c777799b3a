"""Pure-state representation, flattenings, the canonical-state catalog, and
state file I/O.

Kets are 0-based: party basis vectors are written ``|0>, |1>, |2>``.  A
three-party amplitude tensor ``c[i, j, k]`` stores the coefficient of
``|ijk>`` with party 1 slowest (flat offset ``9i + 3j + k``).
"""

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PureState",
    "Flattening",
    "CanonicalId",
    "StateFormatError",
    "CATALOG_FAMILIES",
    "P0P0P1_DEFAULT_PARAMS",
    "flatten",
    "unflatten",
    "canonical_state",
    "catalog_ids",
    "variant_count",
    "read_state",
    "write_state",
]


class StateFormatError(ValueError):
    """A state file violates the documented JSON schema."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Dense complex amplitude tensor over 2 or 3 parties.

    The tensor is validated (finite, not identically zero) and frozen on
    construction.  Tripartite states are strictly qutrit (3, 3, 3);
    bipartite states may have any local dimensions up to 9 so that
    Schmidt-rank classification extends to n x n systems.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=np.complex128)
        if a.ndim not in (2, 3):
            raise ValueError(f"expected 2 or 3 parties, got tensor of ndim {a.ndim}")
        if a.ndim == 3 and a.shape != (3, 3, 3):
            raise ValueError(f"tripartite states must be qutrit, got shape {a.shape}")
        if a.ndim == 2 and not all(2 <= d <= 9 for d in a.shape):
            raise ValueError(f"bipartite local dimensions must be 2..9, got {a.shape}")
        if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
            raise ValueError("amplitudes must be finite")
        if not np.any(a):
            raise ValueError("at least one amplitude must be nonzero")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def parties(self):
        return self.amplitudes.ndim

    @property
    def dims(self):
        return self.amplitudes.shape

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        return PureState(self.amplitudes / self.norm)


@dataclass(frozen=True, eq=False)
class Flattening:
    """A party-vs-rest coefficient matrix view of a state.

    For ``pivot_party = 1`` on a tripartite state, ``matrix[i, 3j + k]``
    equals the amplitude of ``|ijk>``; pivots 2 and 3 permute the indices
    analogously (``matrix[j, 3i + k]`` and ``matrix[k, 3i + j]``).
    """

    pivot_party: int
    matrix: np.ndarray


def flatten(state, pivot_party):
    """Coefficient matrix of ``state`` separating ``pivot_party`` from the
    rest.  Pure index rearrangement, no arithmetic; see :func:`unflatten`.
    """
    if not 1 <= pivot_party <= state.parties:
        raise ValueError(f"pivot_party must be 1..{state.parties}, got {pivot_party}")
    a = state.amplitudes
    m = np.moveaxis(a, pivot_party - 1, 0).reshape(a.shape[pivot_party - 1], -1)
    return Flattening(pivot_party, np.ascontiguousarray(m))


def unflatten(flattening, dims):
    """Inverse of :func:`flatten` for the given full shape ``dims``."""
    p = flattening.pivot_party
    moved = [dims[p - 1]] + [d for i, d in enumerate(dims) if i != p - 1]
    a = flattening.matrix.reshape(moved)
    return PureState(np.moveaxis(a, 0, p - 1))


# --------------------------------------------------------------------------
# canonical catalog
# --------------------------------------------------------------------------

def _unit(v):
    v = np.asarray(v, dtype=np.complex128)
    return v / np.linalg.norm(v)


# Free pure states in the parametrized catalog rows default to the fixed
# representatives below.  They are chosen in generic position: degenerate
# choices (e.g. all four supported on the same two levels) collapse the
# span into a neighboring class and would poison the calibration table.
P0P0P1_DEFAULT_PARAMS = {
    "phi": _unit([1, 1, 1]),
    "varphi": _unit([1, -1, 2]),
    "chi": _unit([2, 1, -1]),
    "psi": _unit([1, 2, 1]),
}

# Fixed representative for the free product factor |2>|phi>|varphi> in the
# rank-(2,2,1) generator rows.
_P1P1P0_PRODUCT = (_unit([1, 1, 1]), _unit([1, 1, 1]))

_BIPARTITE_KETS = {
    "bi-P0": [[(0, 0)]],
    "bi-P1": [[(0, 0), (1, 1)]],
    "bi-P2": [[(0, 0), (1, 1), (2, 2)]],
}

_DIM1_KETS = {
    "dim1-P0": [[(0, 0, 0)]],
    "dim1-P1": [[(0, 0, 0), (0, 1, 1)]],
    "dim1-P2": [[(0, 0, 0), (0, 1, 1), (0, 2, 2)]],
}

_DIM2_KETS = {
    "P0P0": [
        [(0, 0, 0), (1, 0, 1)],
        [(0, 0, 0), (1, 1, 0)],
        [(0, 0, 0), (1, 1, 1)],
    ],
    "P1P1": [
        [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2)],
        [(0, 0, 0), (0, 1, 1), (1, 1, 2), (1, 2, 0)],
        [(0, 0, 0), (0, 1, 1), (1, 2, 0), (1, 0, 1)],
        [(0, 0, 0), (0, 1, 1), (1, 2, 0), (1, 0, 2)],
    ],
    "P0P1": [
        [(0, 0, 0), (0, 1, 1), (1, 0, 1)],
        [(0, 0, 0), (0, 1, 1), (1, 1, 2)],
        [(0, 0, 0), (0, 1, 1), (1, 2, 0)],
        [(0, 0, 0), (0, 1, 1), (1, 2, 2)],
    ],
    "P0P2": [
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1)],
    ],
    "P1P2": [
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 1, 2), (1, 2, 0)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 2, 0), (1, 0, 1)],
    ],
}

_DIM3_KETS = {
    "P0P0P0": [
        [(0, 0, 0), (1, 0, 1), (2, 0, 2)],
        [(0, 0, 0), (1, 1, 0), (2, 2, 0)],
        [(0, 0, 0), (1, 1, 1), (2, 0, 2)],
        [(0, 0, 0), (1, 1, 1), (2, 2, 0)],
        [(0, 0, 0), (1, 1, 1), (2, 0, 1)],
        [(0, 0, 0), (1, 1, 1), (2, 2, 2)],
    ],
    "P0P0P2": [
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (2, 0, 2)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 1, 0), (2, 2, 0)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (2, 1, 2)],
    ],
    "P1P1P1": [
        [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2), (2, 0, 2), (2, 2, 1)],
        [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2), (2, 1, 0), (2, 0, 2)],
        [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2), (2, 2, 1), (2, 1, 0)],
        [(0, 0, 0), (0, 1, 1), (1, 1, 2), (1, 2, 0), (2, 0, 2), (2, 2, 1)],
        [(0, 0, 0), (0, 1, 1), (1, 1, 2), (1, 2, 0), (2, 2, 1), (2, 1, 0)],
        [(0, 0, 0), (0, 1, 1), (1, 2, 0), (1, 0, 1), (2, 2, 1), (2, 1, 0)],
    ],
    "P1P1P2": [
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2), (2, 0, 2), (2, 2, 1)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2), (2, 1, 0), (2, 0, 2)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2), (2, 2, 1), (2, 1, 0)],
    ],
    "P2P1P0": [
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2), (2, 0, 2)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2), (2, 2, 0)],
        [(0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2), (2, 2, 1)],
    ],
}

# Rows whose last generator is a free product vector |2>|phi>|varphi>.
_P1P1P0_PREFIXES = [
    [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2)],
    [(0, 0, 0), (0, 1, 1), (1, 1, 2), (1, 2, 0)],
    [(0, 0, 0), (0, 1, 1), (1, 2, 0), (1, 0, 1)],
]

#: family tag -> (parties, number of listed canonical vectors)
CATALOG_FAMILIES = {
    "bi-P0": (2, 1), "bi-P1": (2, 1), "bi-P2": (2, 1),
    "dim1-P0": (3, 1), "dim1-P1": (3, 1), "dim1-P2": (3, 1),
    "P0P0": (3, 3), "P1P1": (3, 4), "P0P1": (3, 4), "P0P2": (3, 1), "P1P2": (3, 3),
    "P0P0P0": (3, 6), "P0P0P1": (3, 1), "P0P0P2": (3, 3), "P1P1P0": (3, 3),
    "P1P1P1": (3, 6), "P1P1P2": (3, 3), "P2P1P0": (3, 3),
}


@dataclass(frozen=True, eq=False)
class CanonicalId:
    """Identifier of one canonical vector: family tag, 1-based variant index
    within the family's table row, and (for the parametrized family
    ``P0P0P1`` only) the four free pure states ``phi, varphi, chi, psi``."""

    family: str
    variant: int = 1
    parameters: dict | None = field(default=None)

    def __post_init__(self):
        if self.family not in CATALOG_FAMILIES:
            raise ValueError(f"unknown canonical family {self.family!r}")
        _, count = CATALOG_FAMILIES[self.family]
        if not 1 <= self.variant <= count:
            raise ValueError(f"family {self.family} has variants 1..{count}, "
                             f"got {self.variant}")
        if self.parameters is not None and self.family != "P0P0P1":
            raise ValueError("parameters are only accepted for family P0P0P1")

    def __str__(self):
        return f"{self.family}:{self.variant}"


def variant_count(family):
    """Number of canonical vectors listed for ``family``."""
    return CATALOG_FAMILIES[family][1]


def _check_p0p0p1_params(parameters):
    params = dict(P0P0P1_DEFAULT_PARAMS)
    if parameters is not None:
        extra = set(parameters) - set(params)
        if extra:
            raise ValueError(f"unexpected parameters {sorted(extra)}")
        missing = set(params) - set(parameters)
        if missing:
            raise ValueError(f"missing parameters {sorted(missing)}")
        for key, value in parameters.items():
            v = np.asarray(value, dtype=np.complex128)
            if v.shape != (3,) or not np.linalg.norm(v) > 0:
                raise ValueError(f"parameter {key!r} must be a nonzero 3-vector")
            params[key] = _unit(v)
    return params


def canonical_state(cid):
    """The canonical vector identified by ``cid``, unit-normalized.

    Emits exactly the listed ket combination for the family/variant; the
    parametrized ``P0P0P1`` row and the free product factor in ``P1P1P0``
    use their documented default representatives when no parameters are
    given.
    """
    family, variant = cid.family, cid.variant
    if family in _BIPARTITE_KETS:
        amps = np.zeros((3, 3), dtype=np.complex128)
        for ket in _BIPARTITE_KETS[family][variant - 1]:
            amps[ket] = 1.0
        return PureState(amps / np.linalg.norm(amps))

    amps = np.zeros((3, 3, 3), dtype=np.complex128)
    if family == "P0P0P1":
        params = _check_p0p0p1_params(cid.parameters)
        amps[0, 0, 0] = 1.0
        amps[0, 1, 1] = 1.0
        amps[1] = np.outer(params["phi"], params["varphi"])
        amps[2] = np.outer(params["chi"], params["psi"])
    elif family == "P1P1P0":
        for ket in _P1P1P0_PREFIXES[variant - 1]:
            amps[ket] = 1.0
        phi, varphi = _P1P1P0_PRODUCT
        amps[2] = np.outer(phi, varphi)
    else:
        table = {**_DIM1_KETS, **_DIM2_KETS, **_DIM3_KETS}[family]
        for ket in table[variant - 1]:
            amps[ket] = 1.0
    return PureState(amps / np.linalg.norm(amps))


def catalog_ids(parties=None):
    """All catalog identifiers, optionally restricted to a party count."""
    ids = []
    for family, (nparties, count) in CATALOG_FAMILIES.items():
        if parties is not None and nparties != parties:
            continue
        ids.extend(CanonicalId(family, v) for v in range(1, count + 1))
    return ids


# --------------------------------------------------------------------------
# state file I/O
# --------------------------------------------------------------------------

def write_state(state):
    """Serialize a qutrit state to the documented JSON format (bytes).

    Zero amplitudes are omitted; entries are emitted in C index order, so
    ``read_state`` followed by ``write_state`` reproduces the bytes.
    """
    if any(d != 3 for d in state.dims):
        raise StateFormatError("the state file format covers qutrit parties only")
    entries = []
    for idx in np.ndindex(state.dims):
        a = state.amplitudes[idx]
        if a != 0:
            entries.append({"index": [int(i) for i in idx],
                            "re": float(a.real), "im": float(a.imag)})
    payload = {"parties": state.parties, "amplitudes": entries}
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


def _read_sparse(entries, parties, shape):
    amps = np.zeros(shape, dtype=np.complex128)
    seen = set()
    for entry in entries:
        if not isinstance(entry, dict) or "index" not in entry:
            raise StateFormatError("amplitude entries must be objects with an 'index'")
        idx = entry["index"]
        if not (isinstance(idx, list) and len(idx) == parties
                and all(isinstance(i, int) and 0 <= i <= 2 for i in idx)):
            raise StateFormatError(f"bad index {idx!r}: expected {parties} digits in 0..2")
        key = tuple(idx)
        if key in seen:
            raise StateFormatError(f"duplicate index {idx!r}")
        seen.add(key)
        try:
            amps[key] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise StateFormatError(f"bad amplitude at index {idx!r}: {exc}") from exc
    return amps


def _read_dense(values, parties, shape):
    flat = []
    for v in values:
        if isinstance(v, (int, float)):
            flat.append(complex(v))
        elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
            flat.append(complex(v[0], v[1]))
        else:
            raise StateFormatError(f"bad dense amplitude {v!r}")
    if len(flat) != 3 ** parties:
        raise StateFormatError(f"wrong amplitude count: expected {3 ** parties}, "
                               f"got {len(flat)}")
    return np.asarray(flat, dtype=np.complex128).reshape(shape)


def read_state(data):
    """Parse a state file.

    The documented format is ``{"parties": 2|3, "amplitudes": [{"index":
    [i, j, k], "re": x, "im": y}, ...]}`` with omitted indices treated as
    zero and duplicate indices rejected.  A dense amplitude list in C index
    order (numbers or ``[re, im]`` pairs, exactly ``3**parties`` of them)
    is also accepted.  Amplitudes may be unnormalized; the norm is kept.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise StateFormatError("top-level value must be an object")
    parties = payload.get("parties")
    if parties not in (2, 3):
        raise StateFormatError(f"parties must be 2 or 3, got {parties!r}")
    entries = payload.get("amplitudes")
    if not isinstance(entries, list) or not entries:
        raise StateFormatError("'amplitudes' must be a non-empty list")
    shape = (3,) * parties
    if all(isinstance(e, dict) for e in entries):
        amps = _read_sparse(entries, parties, shape)
    else:
        amps = _read_dense(entries, parties, shape)
    if not np.any(amps):
        raise StateFormatError("state is identically zero")
    return PureState(amps)
