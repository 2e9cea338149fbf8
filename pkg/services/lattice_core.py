"""
Lattice primitives: bases, Gram-Schmidt, covolumes, saturation, projections
and block composition.

A Lattice is always full rank in its own coordinates. Subgroups of a lattice
are SublatticeWitness objects that remember their integer coefficients with
respect to the ambient basis, so sums, intersections and primitivity checks
are done on integers and never on floats.

Two arithmetic modes exist: float64 (default) and rational, where the basis is
also kept as Fractions and determinants, Gram matrices and coefficients are
computed exactly.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from services import settings
from services.errors import MembershipError, PrimitivityError, RankDeficiencyError, ValidationError

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction, str]
IntMatrix = List[List[int]]
FracMatrix = List[List[Fraction]]

RANK_TOL = 1e-10
UNIMODULAR_TOL = 1e-9


# ---------------------------------------------------------------------------
# Exact helpers
# ---------------------------------------------------------------------------

def to_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(value)


def det_exact(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination"""
    a = [[Fraction(v) for v in row] for row in matrix]
    n = len(a)
    if n == 0:
        return Fraction(1)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / p
                a[r] = [a[r][c] - f * a[col][c] for c in range(n)]
    return det


def inverse_exact(matrix: Sequence[Sequence[Fraction]]) -> FracMatrix:
    """Gauss-Jordan inverse over the rationals"""
    n = len(matrix)
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise RankDeficiencyError(col, "matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [a[r][c] - f * a[col][c] for c in range(2 * n)]
    return [row[n:] for row in a]


def matmul_exact(a: Sequence[Sequence[Any]], b: Sequence[Sequence[Any]]) -> List[List[Any]]:
    cols = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols] for row in a]


def dot_exact(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def integer_echelon(rows: Sequence[Sequence[int]]) -> Tuple[IntMatrix, IntMatrix, List[int]]:
    """
    Row echelon form over the integers with the unimodular transform.

    Args:
        rows: m x n integer matrix

    Returns:
        (H, U, pivots) with U unimodular (m x m), U @ rows == H, H in echelon
        form with positive pivots and entries above each pivot reduced into
        [0, pivot).
    """
    a = [[int(v) for v in row] for row in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    pivots: List[int] = []
    pr = 0
    for col in range(n):
        if pr >= m:
            break
        for i in range(pr + 1, m):
            if a[i][col] == 0:
                continue
            x, y = a[pr][col], a[i][col]
            g, s, t = _xgcd(x, y)
            xg, yg = x // g, y // g
            a[pr], a[i] = (
                [s * p + t * q for p, q in zip(a[pr], a[i])],
                [-yg * p + xg * q for p, q in zip(a[pr], a[i])],
            )
            u[pr], u[i] = (
                [s * p + t * q for p, q in zip(u[pr], u[i])],
                [-yg * p + xg * q for p, q in zip(u[pr], u[i])],
            )
        if a[pr][col] == 0:
            continue
        if a[pr][col] < 0:
            a[pr] = [-v for v in a[pr]]
            u[pr] = [-v for v in u[pr]]
        piv = a[pr][col]
        for i in range(pr):
            q = a[i][col] // piv
            if q:
                a[i] = [p - q * r for p, r in zip(a[i], a[pr])]
                u[i] = [p - q * r for p, r in zip(u[i], u[pr])]
        pivots.append(col)
        pr += 1
    return a, u, pivots


def integer_left_kernel(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Basis of {y in Z^m : y @ rows = 0}"""
    h, u, pivots = integer_echelon(rows)
    return [u[i] for i in range(len(pivots), len(h))]


def integer_right_kernel(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Basis of {z in Z^n : rows @ z = 0}, returned as rows"""
    if not rows:
        return []
    return integer_left_kernel([list(col) for col in zip(*rows)])


def integer_row_basis(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Echelon basis of the Z-span of the given rows"""
    if not rows:
        return []
    h, _, pivots = integer_echelon(rows)
    return [row for row in h[: len(pivots)]]


def integer_matrix_inverse(matrix: Sequence[Sequence[int]]) -> IntMatrix:
    inv = inverse_exact([[Fraction(v) for v in row] for row in matrix])
    out = []
    for row in inv:
        if any(v.denominator != 1 for v in row):
            raise ValidationError("matrix is not unimodular")
        out.append([int(v) for v in row])
    return out


def _rank_int(rows: Sequence[Sequence[int]]) -> int:
    if not rows:
        return 0
    _, _, pivots = integer_echelon(rows)
    return len(pivots)


# ---------------------------------------------------------------------------
# Gram-Schmidt and covolumes
# ---------------------------------------------------------------------------

def gram_schmidt(basis: Any) -> Tuple[np.ndarray, np.ndarray]:
    """
    Orthogonalize an ordered vector list

    Args:
        basis: r x n array-like of vectors (rows)

    Returns:
        (u, lengths): orthogonal vectors u_1..u_r and their norms

    Raises:
        RankDeficiencyError: vector i depends on vectors 0..i-1
    """
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    r = b.shape[0]
    u = np.zeros_like(b)
    lengths = np.zeros(r)
    for i in range(r):
        v = b[i].copy()
        for j in range(i):
            v -= (np.dot(b[i], u[j]) / lengths[j] ** 2) * u[j]
        # second pass keeps orthogonality at 1e-15 level
        for j in range(i):
            v -= (np.dot(v, u[j]) / lengths[j] ** 2) * u[j]
        norm = float(np.linalg.norm(v))
        if norm <= RANK_TOL * max(1.0, float(np.linalg.norm(b[i]))):
            raise RankDeficiencyError(i)
        u[i] = v
        lengths[i] = norm
    return u, lengths


def gram_schmidt_exact(basis: Sequence[Sequence[Fraction]]) -> Tuple[FracMatrix, List[Fraction]]:
    """Rational Gram-Schmidt; returns orthogonal rows and their squared lengths"""
    us: FracMatrix = []
    sq: List[Fraction] = []
    for i, row in enumerate(basis):
        v = [Fraction(x) for x in row]
        for u, s in zip(us, sq):
            mu = dot_exact(row, u) / s
            v = [a - mu * b for a, b in zip(v, u)]
        s = dot_exact(v, v)
        if s == 0:
            raise RankDeficiencyError(i)
        us.append(v)
        sq.append(s)
    return us, sq


def covolume(generators: Any) -> float:
    """
    sqrt(det Gram) of independent generators; 1.0 for the empty family

    Raises:
        RankDeficiencyError: generators are dependent
    """
    g = np.asarray(generators, dtype=float)
    if g.size == 0:
        return 1.0
    g = np.atleast_2d(g)
    _, lengths = gram_schmidt(g)
    gram = g @ g.T
    det = float(np.linalg.det(gram))
    if det <= 0.0:
        return float(np.prod(lengths))
    return math.sqrt(det)


def covolume_sq_exact(generators: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact det(Gram) of rational generators"""
    if not generators:
        return Fraction(1)
    gram = [[dot_exact(a, b) for b in generators] for a in generators]
    det = det_exact(gram)
    if det == 0:
        gram_schmidt_exact(generators)
    return det


def fraction_sqrt(value: Fraction) -> Optional[Fraction]:
    """Exact square root of a rational, or None when irrational"""
    if value < 0:
        return None
    p, q = value.numerator, value.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class Lattice:
    """
    Full-rank lattice given by an ordered basis (row i = basis vector v_i).

    In rational mode `exact` holds the basis as Fractions and `basis` is its
    float image.
    """

    def __init__(self, basis: Any, exact: Optional[Sequence[Sequence[Number]]] = None):
        if exact is not None:
            self.exact: Optional[Tuple[Tuple[Fraction, ...], ...]] = tuple(
                tuple(to_fraction(v) for v in row) for row in exact
            )
            self.basis = np.array([[float(v) for v in row] for row in self.exact], dtype=float)
        else:
            self.exact = None
            self.basis = np.atleast_2d(np.array(basis, dtype=float))
        if self.basis.ndim != 2 or self.basis.shape[0] != self.basis.shape[1]:
            raise ValidationError(f"basis must be square, got shape {self.basis.shape}")
        if not np.all(np.isfinite(self.basis)):
            raise ValidationError("basis entries must be finite")
        self.dim = self.basis.shape[0]
        if self.exact is not None:
            if det_exact(self.exact) == 0:
                gram_schmidt_exact(self.exact)
        else:
            gram_schmidt(self.basis)
        self.basis.setflags(write=False)
        self._inverse_exact: Optional[FracMatrix] = None

    # constructors ----------------------------------------------------------

    @classmethod
    def rational(cls, rows: Sequence[Sequence[Number]]) -> "Lattice":
        return cls(None, exact=rows)

    @classmethod
    def integer(cls, n: int) -> "Lattice":
        """Z^n, exact"""
        return cls.rational([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, entries: Sequence[Number]) -> "Lattice":
        n = len(entries)
        if all(isinstance(e, (int, Fraction, str)) for e in entries):
            return cls.rational([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])
        return cls(np.diag(np.asarray(entries, dtype=float)))

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Lattice":
        try:
            basis = data["basis"]
        except (KeyError, TypeError):
            raise ValidationError("lattice JSON needs a 'basis' field")
        dim = data.get("dim", len(basis))
        if len(basis) != dim or any(len(row) != dim for row in basis):
            raise ValidationError(f"basis is not {dim}x{dim}")
        if data.get("rational", False):
            try:
                return cls.rational(basis)
            except (ValueError, ZeroDivisionError) as e:
                raise ValidationError(f"bad rational entry: {e}")
        return cls(basis)

    def to_json(self) -> Dict[str, Any]:
        if self.exact is not None:
            return {"dim": self.dim, "rational": True, "basis": [[str(v) for v in row] for row in self.exact]}
        return {"dim": self.dim, "basis": self.basis.tolist()}

    # properties ------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.exact is not None

    @property
    def mode(self) -> str:
        return "rational" if self.is_rational else "float64"

    def gram(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def gram_exact(self) -> FracMatrix:
        if self.exact is None:
            raise ValidationError("lattice is not rational")
        return [[dot_exact(a, b) for b in self.exact] for a in self.exact]

    def determinant(self) -> float:
        if self.exact is not None:
            return float(det_exact(self.exact))
        return float(np.linalg.det(self.basis))

    def covolume(self) -> float:
        return abs(self.determinant())

    def is_unimodular(self) -> bool:
        if self.exact is not None:
            return abs(det_exact(self.exact)) == 1
        return abs(self.covolume() - 1.0) <= UNIMODULAR_TOL

    def inverse_exact(self) -> FracMatrix:
        if self._inverse_exact is None:
            self._inverse_exact = inverse_exact(self.exact)
        return self._inverse_exact

    # transformations -------------------------------------------------------

    def transformed(self, unimodular: Sequence[Sequence[int]]) -> "Lattice":
        """Same lattice, basis U @ B for an integer unimodular U"""
        if self.exact is not None:
            return Lattice.rational(matmul_exact(unimodular, self.exact))
        return Lattice(np.asarray(unimodular, dtype=float) @ self.basis)

    def scaled(self, factor: float) -> "Lattice":
        return Lattice(self.basis * factor)

    def vectors(self, coeffs: Sequence[Sequence[int]]) -> np.ndarray:
        c = np.asarray(coeffs, dtype=float).reshape(-1, self.dim)
        return c @ self.basis

    def vectors_exact(self, coeffs: Sequence[Sequence[int]]) -> FracMatrix:
        return matmul_exact(coeffs, self.exact)

    def __repr__(self):
        return f"Lattice(dim={self.dim}, mode={self.mode})"


@dataclass(frozen=True)
class SublatticeWitness:
    """A subgroup of an ambient lattice: integer coefficient rows plus geometry"""

    coeffs: Tuple[Tuple[int, ...], ...]
    generators: np.ndarray = field(compare=False, repr=False)
    covolume: float
    covolume_sq_exact: Optional[Fraction] = None

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def slope(self) -> float:
        """|Λ|^(1/r)"""
        return self.covolume ** (1.0 / self.rank) if self.rank else 1.0

    def to_json(self) -> Dict[str, Any]:
        return {
            "rank": self.rank,
            "covolume": self.covolume,
            "coefficients": [list(row) for row in self.coeffs],
            "generators": self.generators.tolist(),
        }


def make_witness(x: Lattice, coeffs: Sequence[Sequence[int]]) -> SublatticeWitness:
    """Build a witness from independent integer coefficient rows"""
    rows = tuple(tuple(int(v) for v in row) for row in coeffs)
    if not rows:
        return SublatticeWitness((), np.zeros((0, x.dim)), 1.0, Fraction(1) if x.is_rational else None)
    if _rank_int(rows) < len(rows):
        raise RankDeficiencyError(_first_dependent(rows))
    gens = x.vectors(rows)
    if x.is_rational:
        sq = covolume_sq_exact(x.vectors_exact(rows))
        root = fraction_sqrt(sq)
        cov = float(root) if root is not None else math.sqrt(float(sq))
        return SublatticeWitness(rows, gens, cov, sq)
    return SublatticeWitness(rows, gens, covolume(gens))


def _first_dependent(rows: Sequence[Sequence[int]]) -> int:
    for i in range(1, len(rows) + 1):
        if _rank_int(rows[:i]) < i:
            return i - 1
    return len(rows) - 1


# ---------------------------------------------------------------------------
# Membership, saturation, primitivity
# ---------------------------------------------------------------------------

def coefficients(x: Lattice, vectors: Any) -> IntMatrix:
    """
    Integer coefficients of vectors with respect to x's basis.

    Float mode accepts coefficients within MEMBERSHIP_TOL of integers; rational
    mode requires exact integrality.

    Raises:
        MembershipError: some vector is not in x
    """
    if x.is_rational and _all_rational(vectors):
        inv = x.inverse_exact()
        rows = [[to_fraction(v) for v in row] for row in vectors]
        out = []
        for i, c in enumerate(matmul_exact(rows, inv)):
            if any(v.denominator != 1 for v in c):
                raise MembershipError(f"vector {i} is not in the lattice")
            out.append([int(v) for v in c])
        return out
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    if v.shape[1] != x.dim:
        raise ValidationError(f"vectors have dimension {v.shape[1]}, lattice has {x.dim}")
    c = np.linalg.solve(x.basis.T, v.T).T
    rounded = np.rint(c)
    err = np.abs(c - rounded)
    if np.any(err > settings.MEMBERSHIP_TOL):
        bad = int(np.argmax(err.max(axis=1)))
        raise MembershipError(f"vector {bad} is not in the lattice (coefficient error {err.max():.2e})")
    return [[int(t) for t in row] for row in rounded]


def _all_rational(vectors: Any) -> bool:
    try:
        return all(isinstance(v, (int, Fraction, str)) for row in vectors for v in row)
    except TypeError:
        return False


def saturation_coeffs(coeffs: Sequence[Sequence[int]], n: int) -> IntMatrix:
    """Coefficient basis of Z^n ∩ span_Q(coeffs), in echelon form"""
    rows = [list(r) for r in coeffs]
    if not rows:
        return []
    r = _rank_int(rows)
    if r == n:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    right = integer_right_kernel(rows)
    sat = integer_left_kernel([list(col) for col in zip(*right)])
    return integer_row_basis(sat)


def saturate(x: Lattice, generators: Any) -> SublatticeWitness:
    """
    Primitive closure x ∩ span(generators)

    Raises:
        MembershipError: a generator is not in x
        RankDeficiencyError: generators are dependent
    """
    coeffs = coefficients(x, generators)
    if _rank_int(coeffs) < len(coeffs):
        raise RankDeficiencyError(_first_dependent(coeffs))
    return make_witness(x, saturation_coeffs(coeffs, x.dim))


def subgroup_index(coeffs: Sequence[Sequence[int]], n: int) -> int:
    """Index of the subgroup inside its saturation"""
    rows = [list(r) for r in coeffs]
    if not rows:
        return 1
    sat = saturation_coeffs(rows, n)
    _, _, pivots = integer_echelon(sat)
    sub_c = [[Fraction(row[p]) for p in pivots] for row in rows]
    sub_s = [[Fraction(row[p]) for p in pivots] for row in sat]
    return int(abs(det_exact(sub_c) / det_exact(sub_s)))


def is_primitive(x: Lattice, witness: SublatticeWitness) -> bool:
    return subgroup_index(witness.coeffs, x.dim) == 1


def complete_to_unimodular(coeffs: Sequence[Sequence[int]], n: int) -> IntMatrix:
    """
    Extend a primitive coefficient system C (r x n) to a unimodular n x n matrix
    whose first r rows are C.
    """
    rows = [list(r) for r in coeffs]
    r = len(rows)
    if r == 0:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    if subgroup_index(rows, n) != 1:
        raise PrimitivityError()
    _, u, _ = integer_echelon([list(col) for col in zip(*rows)])
    w = [list(col) for col in zip(*integer_matrix_inverse(u))]
    return rows + w[r:]


# ---------------------------------------------------------------------------
# Sums and intersections
# ---------------------------------------------------------------------------

def sublattice_sum(x: Lattice, a: SublatticeWitness, b: SublatticeWitness) -> SublatticeWitness:
    stacked = [list(r) for r in a.coeffs] + [list(r) for r in b.coeffs]
    return make_witness(x, integer_row_basis(stacked))


def sublattice_intersection(x: Lattice, a: SublatticeWitness, b: SublatticeWitness) -> SublatticeWitness:
    """Λ ∩ Λ′ from the integer left kernel of [C_a; -C_b]"""
    if a.rank == 0 or b.rank == 0:
        return make_witness(x, [])
    stacked = [list(r) for r in a.coeffs] + [[-v for v in r] for r in b.coeffs]
    kernel = integer_left_kernel(stacked)
    common = [[sum(y[i] * a.coeffs[i][j] for i in range(a.rank)) for j in range(x.dim)] for y in kernel]
    return make_witness(x, integer_row_basis(common) if common else [])


# ---------------------------------------------------------------------------
# Projections and restrictions
# ---------------------------------------------------------------------------

def _orthonormal_frame(rows: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of span(rows) and of its complement, via Gram-Schmidt on [rows; e_1..e_n]"""
    span: List[np.ndarray] = []
    for v in rows:
        w = v.astype(float).copy()
        for f in span:
            w -= np.dot(w, f) * f
        span.append(w / np.linalg.norm(w))
    comp: List[np.ndarray] = []
    for i in range(n):
        w = np.eye(n)[i]
        for f in span + comp:
            w = w - np.dot(w, f) * f
        norm = np.linalg.norm(w)
        if norm > 1e-8 and len(span) + len(comp) < n:
            comp.append(w / norm)
    s = np.array(span).reshape(len(span), n)
    c = np.array(comp).reshape(len(comp), n)
    return s, c


def project_complement(x: Lattice, witness: SublatticeWitness) -> Lattice:
    """
    Orthogonal projection of x onto (span Λ)^⊥, as a lattice of dimension n-r
    in coordinates of an orthonormal frame of the complement.

    Raises:
        PrimitivityError: Λ is not primitive in x
    """
    if not is_primitive(x, witness):
        raise PrimitivityError()
    r = witness.rank
    if r == x.dim:
        raise ValidationError("subgroup has full rank; the complement is trivial")
    m = complete_to_unimodular(witness.coeffs, x.dim)
    _, frame = _orthonormal_frame(witness.generators, x.dim)
    rest = x.vectors(m[r:])
    return Lattice(rest @ frame.T)


def restrict_to_span(x: Lattice, witness: SublatticeWitness) -> Lattice:
    """Λ as a full-rank lattice in orthonormal coordinates of span Λ"""
    if witness.rank == 0:
        raise ValidationError("cannot restrict to the zero subgroup")
    span, _ = _orthonormal_frame(witness.generators, x.dim)
    return Lattice(witness.generators @ span.T)


def dual_lattice(x: Lattice) -> Lattice:
    """Dual lattice with basis (B^-1)^T"""
    if x.is_rational:
        inv = x.inverse_exact()
        return Lattice.rational([list(col) for col in zip(*inv)])
    return Lattice(np.linalg.inv(x.basis).T)


# ---------------------------------------------------------------------------
# Block composition
# ---------------------------------------------------------------------------

def block_compose(blocks: Sequence[Lattice], upper_entries: Any = 0) -> Lattice:
    """
    Compose unimodular blocks into a block-triangular lattice.

    Rows of block b carry fill entries in the coordinates of blocks a < b;
    the first block's span is then a primitive subgroup and the quotient by it
    is the composition of the remaining blocks.

    Args:
        blocks: unimodular lattices of dims n_1..n_k
        upper_entries: scalar applied to every fill slot, or an n x n matrix
            whose below-block-diagonal entries are used

    Raises:
        ValidationError: a block is not unimodular or the fill has a bad shape
    """
    if not blocks:
        raise ValidationError("no blocks given")
    for i, blk in enumerate(blocks):
        if not isinstance(blk, Lattice):
            raise ValidationError(f"block {i} is not a lattice")
        if not blk.is_unimodular():
            raise ValidationError(f"block {i} is not unimodular (|det| = {blk.covolume():.6g})")
    dims = [b.dim for b in blocks]
    n = sum(dims)
    offsets = np.cumsum([0] + dims)

    if np.isscalar(upper_entries) or isinstance(upper_entries, (Fraction, str)):
        fill = [[upper_entries] * n for _ in range(n)]
    else:
        fill = [list(row) for row in upper_entries]
        if len(fill) != n or any(len(row) != n for row in fill):
            raise ValidationError(f"fill must be a scalar or a {n}x{n} matrix")

    exact = all(b.is_rational for b in blocks) and all(
        isinstance(v, (int, Fraction, str)) for row in fill for v in row
    )
    zero = Fraction(0) if exact else 0.0
    rows: List[List[Any]] = [[zero] * n for _ in range(n)]
    for bi, blk in enumerate(blocks):
        lo, hi = offsets[bi], offsets[bi + 1]
        src = blk.exact if exact else blk.basis
        for i in range(blk.dim):
            for j in range(blk.dim):
                rows[lo + i][lo + j] = src[i][j]
            for j in range(lo):
                rows[lo + i][j] = to_fraction(fill[lo + i][j]) if exact else float(to_fraction(fill[lo + i][j]))
    if exact:
        return Lattice.rational(rows)
    return Lattice(np.array(rows, dtype=float))


def random_unimodular(n: int, rng: np.random.Generator) -> Lattice:
    """Gaussian basis rescaled to covolume 1"""
    while True:
        b = rng.standard_normal((n, n))
        det = abs(np.linalg.det(b))
        if det > 1e-6:
            return Lattice(b / det ** (1.0 / n))
