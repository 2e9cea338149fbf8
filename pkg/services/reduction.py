"""
Lattice reduction and exact enumeration on top of fpylll.

fpylll works on integer matrices, so every basis is first brought to an
integer one: rational bases are multiplied by their common denominator,
float bases by 2^SCALE_BITS / max|entry| and rounded. LLL and the
Schnorr-Euchner enumeration run on that integer basis with a slightly
enlarged radius; the candidates are then re-measured against the caller's
own basis, so rounding in the integer copy can only add candidates, never
lose one. All coefficient vectors reported to callers are relative to the
basis of the lattice that was passed in.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from fpylll import GSO, LLL, Enumeration, EnumerationError, EvaluatorStrategy, IntegerMatrix

from services import settings
from services.errors import DimensionCapError, ValidationError
from services.lattice_core import (
    IntMatrix,
    Lattice,
    complete_to_unimodular,
    dot_exact,
)

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.99
TIE_TOL = 1e-9
SCALE_BITS = 40
# Relative slack on the squared fpylll radius
FLOAT_SLACK = 1e-6
RATIONAL_SLACK = 1e-9


class ShortVector(NamedTuple):
    vector: np.ndarray
    length: float
    coeffs: Tuple[int, ...]
    length_sq_exact: Optional[Fraction] = None


class ClosestVector(NamedTuple):
    vector: np.ndarray
    distance: float
    coeffs: Tuple[int, ...]


class VectorSet(NamedTuple):
    """Enumerated lattice vectors sorted by (norm, coefficients)"""

    coeffs: np.ndarray
    vectors: np.ndarray
    norms: np.ndarray


@dataclass
class KZProfile:
    coefficients: np.ndarray
    reduced_basis: Lattice
    transform: IntMatrix

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def log_coefficients(self) -> np.ndarray:
        return np.log(self.coefficients)

    def to_json(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "coefficients": [float(a) for a in self.coefficients],
            "reduced_basis": self.reduced_basis.to_json()["basis"],
        }


@dataclass(frozen=True)
class _IntegerForm:
    """LLL-reduced integer basis `rows` ≈ scale · (transform @ x.basis)"""

    transform: IntMatrix
    rows: IntMatrix
    scale: Union[int, float]
    exact: bool


def check_enum_cap(x: Lattice, operation: str):
    if x.dim > settings.GON_ENUM_DIM_CAP:
        raise DimensionCapError(operation, x.dim, settings.GON_ENUM_DIM_CAP)


# ---------------------------------------------------------------------------
# LLL
# ---------------------------------------------------------------------------

def _to_rows(m: IntegerMatrix) -> IntMatrix:
    rows = [[0] * m.ncols for _ in range(m.nrows)]
    m.to_matrix(rows)
    return [[int(v) for v in row] for row in rows]


def _integer_rows(x: Lattice) -> Tuple[IntMatrix, Union[int, float]]:
    if x.exact is not None:
        scale = math.lcm(*(v.denominator for row in x.exact for v in row))
        return [[int(v * scale) for v in row] for row in x.exact], scale
    top = float(np.max(np.abs(x.basis))) or 1.0
    scale = 2.0 ** SCALE_BITS / top
    return [[int(round(v * scale)) for v in row] for row in x.basis], scale


def _integer_form(x: Lattice, delta: float = DEFAULT_DELTA) -> _IntegerForm:
    rows, scale = _integer_rows(x)
    a = IntegerMatrix.from_matrix(rows)
    u = IntegerMatrix.identity(a.nrows)
    LLL.reduction(a, u, delta=delta)
    return _IntegerForm(transform=_to_rows(u), rows=_to_rows(a), scale=scale, exact=x.is_rational)


def _cached_form(x: Lattice) -> _IntegerForm:
    form = x.__dict__.get("_fpylll_form")
    if form is None:
        form = _integer_form(x)
        x.__dict__["_fpylll_form"] = form
    return form


def lll_reduce(x: Lattice, delta: float = DEFAULT_DELTA) -> Lattice:
    """
    LLL-reduce a basis (same lattice, unimodular change of basis)

    Args:
        x: lattice
        delta: Lovász parameter in (0.25, 1)
    """
    if not 0.25 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0.25, 1), got {delta}")
    return x.transformed(_integer_form(x, delta).transform)


def reduced_form(x: Lattice) -> Tuple[IntMatrix, np.ndarray]:
    """LLL transform and reduced float basis, cached on the lattice object"""
    form = _cached_form(x)
    return form.transform, np.asarray(form.transform, dtype=float) @ x.basis


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _candidates(form: _IntegerForm, radius: float, center: Optional[np.ndarray]) -> np.ndarray:
    """Coefficient rows (caller's basis) of every vector the integer copy finds within radius"""
    a = IntegerMatrix.from_matrix(form.rows)
    m = GSO.Mat(a)
    m.update_gso()
    n = a.nrows
    scale = float(form.scale)
    slack = RATIONAL_SLACK if form.exact else FLOAT_SLACK
    bound = (radius * scale) ** 2 * (1 + slack)
    limit = settings.GON_ENUM_MAX_VECTORS
    enum = Enumeration(m, nr_solutions=limit + 1, strategy=EvaluatorStrategy.BEST_N_SOLUTIONS)
    try:
        if center is None:
            found = enum.enumerate(0, n, bound, 0)
        else:
            target = m.from_canonical(tuple(float(v) * scale for v in center))
            found = enum.enumerate(0, n, bound, 0, target=target)
    except EnumerationError:
        return np.zeros((0, n), dtype=np.int64)
    if len(found) > limit:
        raise ValidationError(f"more than {limit} lattice vectors within radius {radius:.6g}; lower the radius")
    local = np.rint(np.array([sol for _, sol in found], dtype=float)).astype(np.int64).reshape(-1, n)
    return local @ np.asarray(form.transform, dtype=np.int64)


def _normalize_sign(c: Sequence[int]) -> Tuple[int, ...]:
    for v in c:
        if v != 0:
            return tuple(int(t) for t in c) if v > 0 else tuple(-int(t) for t in c)
    return tuple(int(t) for t in c)


def enumerate_vectors(
    x: Lattice,
    radius: float,
    center: Optional[Sequence[float]] = None,
    include_zero: bool = False,
    sign_normalized: bool = False,
) -> VectorSet:
    """
    All lattice vectors v with ||v - center|| ≤ radius

    Args:
        x: lattice
        radius: search radius
        center: optional target (default origin)
        include_zero: keep the zero vector when centered at the origin
        sign_normalized: keep one of ±v (first nonzero coefficient positive)

    Returns:
        VectorSet sorted by norm then coefficients
    """
    check_enum_cap(x, "enumerate_vectors")
    if not radius >= 0:
        raise ValidationError(f"radius must be non-negative, got {radius}")
    t = None if center is None else np.asarray(center, dtype=float)
    if t is not None and t.shape != (x.dim,):
        raise ValidationError(f"center has dimension {t.size}, lattice has {x.dim}")
    found = _candidates(_cached_form(x), radius, t)

    if t is None:
        # fpylll reports one of ±v and never the zero vector at the origin
        rows = sorted({_normalize_sign(c) for c in found if c.any()})
        if not sign_normalized:
            rows += [tuple(-v for v in c) for c in rows]
        if include_zero:
            rows.append((0,) * x.dim)
    else:
        rows = sorted({tuple(int(v) for v in c) for c in found})
    coeffs = np.array(rows, dtype=np.int64).reshape(-1, x.dim)
    vectors = coeffs.astype(float) @ x.basis
    ref = vectors if t is None else vectors - t
    norms = np.linalg.norm(ref, axis=1) if len(vectors) else np.zeros(0)
    keep = norms <= radius * (1 + 1e-12) + 1e-300
    coeffs, vectors, norms = coeffs[keep], vectors[keep], norms[keep]
    order = sorted(range(len(coeffs)), key=lambda i: (round(norms[i], 12), tuple(coeffs[i])))
    return VectorSet(coeffs[order], vectors[order], norms[order])


def _first_minimizer(vs: VectorSet, canonical) -> Optional[Tuple[int, ...]]:
    """Smallest canonical coefficient tuple among vectors within TIE_TOL of the minimum"""
    if not len(vs.norms):
        return None
    cutoff = vs.norms[0] * (1 + TIE_TOL) + 1e-300
    return min(canonical(c) for c, r in zip(vs.coeffs, vs.norms) if r <= cutoff)


def shortest_vector(x: Lattice) -> ShortVector:
    """
    Globally shortest nonzero vector by exact enumeration.

    Among several minimizers, the coefficient vector (first nonzero entry made
    positive) that is lexicographically smallest is returned.
    """
    check_enum_cap(x, "shortest_vector")
    _, red = reduced_form(x)
    radius = float(np.min(np.linalg.norm(red, axis=1))) * (1 + 1e-9)
    coeffs = _first_minimizer(enumerate_vectors(x, radius, sign_normalized=True), _normalize_sign)
    vec = np.asarray(coeffs, dtype=float) @ x.basis
    if x.is_rational:
        exact = x.vectors_exact([list(coeffs)])[0]
        sq = dot_exact(exact, exact)
        return ShortVector(vec, math.sqrt(sq), coeffs, sq)
    return ShortVector(vec, float(np.linalg.norm(vec)), coeffs)


def closest_vector(x: Lattice, target: Sequence[float]) -> ClosestVector:
    """
    Lattice vector nearest to target (exact enumeration, Babai start)

    Raises:
        ValidationError: target dimension differs from the lattice dimension
    """
    check_enum_cap(x, "closest_vector")
    t = np.asarray(target, dtype=float)
    if t.shape != (x.dim,):
        raise ValidationError(f"target has dimension {t.size}, lattice has {x.dim}")
    h, red = reduced_form(x)
    babai = np.rint(np.linalg.solve(red.T, t)).astype(np.int64)
    radius = max(float(np.linalg.norm(babai @ red - t)) * (1 + 1e-9), 1e-9)
    coeffs = _first_minimizer(enumerate_vectors(x, radius, center=t), lambda c: tuple(int(v) for v in c))
    if coeffs is None:
        coeffs = tuple(int(v) for v in babai @ np.asarray(h, dtype=np.int64))
    vec = np.asarray(coeffs, dtype=float) @ x.basis
    return ClosestVector(vec, float(np.linalg.norm(vec - t)), coeffs)


# ---------------------------------------------------------------------------
# Korkine-Zolotarev
# ---------------------------------------------------------------------------

def kz_reduce(x: Lattice) -> KZProfile:
    """
    Korkine-Zolotarev reduction

    At step i the projected lattice of rows i..n-1 is read off the triangular
    factor of the current basis, its shortest vector is lifted back through
    its coefficients and completed to a unimodular change of the remaining
    rows.

    Returns:
        KZProfile with A_1..A_n and the reduced basis of x
    """
    check_enum_cap(x, "kz_reduce")
    n = x.dim
    transform, _ = reduced_form(x)
    transform = [list(row) for row in transform]
    coeffs = np.zeros(n)
    for i in range(n):
        current = np.asarray(transform, dtype=float) @ x.basis
        _, r = np.linalg.qr(current.T)
        if i == n - 1:
            coeffs[i] = abs(r[i, i])
            break
        projected = Lattice(r[i:, i:].T)
        sv = shortest_vector(projected)
        coeffs[i] = sv.length
        m = complete_to_unimodular([list(sv.coeffs)], n - i)
        tail = transform[i:]
        transform[i:] = [[sum(m[a][b] * tail[b][col] for b in range(n - i)) for col in range(n)] for a in range(n - i)]
    reduced = x.transformed(transform)
    logger.debug("kz profile %s", coeffs)
    return KZProfile(coefficients=coeffs, reduced_basis=reduced, transform=transform)
