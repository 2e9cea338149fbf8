"""
Stability invariants: α_k, α, the stability verdict, Min_δ / dim_δ and the
canonical (Harder-Narasimhan) filtration.

Search bound for α_k
--------------------
Let β^k be the covolume of the best rank-k subgroup found so far (initially
the span of the first k Korkine-Zolotarev vectors, covolume A_1···A_k). If a
primitive Λ of rank k has |Λ| ≤ β^k, Minkowski's second theorem gives

    λ_1(Λ)···λ_k(Λ) ≤ γ_k^{k/2} |Λ| ≤ sqrt(H_k) β^k,      H_k = γ_k^k,

and every λ_i(Λ) ≥ λ_1(x). Hence Λ contains k independent vectors of norm at
most R = sqrt(H_k) β^k / λ_1(x)^{k-1} whose saturation is Λ. Enumerating all
vectors of norm ≤ R and all k-tuples with norm product ≤ sqrt(H_k) β^k is
therefore complete. Tuples are built in increasing norm order and pruned by
P_j · r_j^{k-j}, the partial product times the smallest possible remaining
norms.

Ranks k > n/2 go through the dual lattice: Λ ↦ Λ^⊥ ∩ x* is a bijection of
primitive subgroups with |Λ^⊥ ∩ x*| = |Λ| / |x|.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from services import settings
from services.errors import DimensionCapError, ValidationError
from services.lattice_core import (
    Lattice,
    SublatticeWitness,
    det_exact,
    dual_lattice,
    integer_right_kernel,
    integer_row_basis,
    make_witness,
    project_complement,
    restrict_to_span,
    saturation_coeffs,
    complete_to_unimodular,
)
from services.reduction import enumerate_vectors, kz_reduce, shortest_vector

logger = logging.getLogger(__name__)

# Classical Hermite constants raised to their dimension, γ_k^k, k = 1..8
HERMITE_POWER = {
    1: Fraction(1),
    2: Fraction(4, 3),
    3: Fraction(2),
    4: Fraction(4),
    5: Fraction(8),
    6: Fraction(64, 3),
    7: Fraction(64),
    8: Fraction(256),
}

SEARCH_SLACK = 1e-9
TIE_REL = 1e-12


@dataclass
class StabilityReport:
    alpha: float
    alpha_by_rank: List[float]
    witness: SublatticeWitness
    stable: bool
    mode: str

    def to_json(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "alpha_by_rank": list(self.alpha_by_rank),
            "stable": self.stable,
            "mode": self.mode,
            "witness": {"rank": self.witness.rank, "generators": self.witness.generators.tolist()},
        }


@dataclass
class DeltaSpan:
    delta: float
    dimension: int
    span_basis: np.ndarray
    members: List[SublatticeWitness] = field(default_factory=list)
    truncated: bool = False

    def to_json(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "dimension": self.dimension,
            "span_basis": self.span_basis.tolist(),
            "members": [{"rank": m.rank, "covolume": m.covolume, "generators": m.generators.tolist()} for m in self.members],
            "truncated": self.truncated,
        }


def check_alpha_cap(x: Lattice, operation: str):
    if x.dim > settings.GON_ALPHA_DIM_CAP:
        raise DimensionCapError(operation, x.dim, settings.GON_ALPHA_DIM_CAP)


def _require_unimodular(x: Lattice):
    if not x.is_unimodular():
        raise ValidationError(f"lattice is not unimodular (covolume {x.covolume():.12g})")


def _less(a: SublatticeWitness, b: SublatticeWitness) -> bool:
    """Strict covolume comparison, exact when both sides carry rationals"""
    if a.covolume_sq_exact is not None and b.covolume_sq_exact is not None:
        return a.covolume_sq_exact < b.covolume_sq_exact
    return a.covolume < b.covolume * (1 - TIE_REL)


def _integral_unimodular_gram(x: Lattice) -> bool:
    if not x.is_rational:
        return False
    gram = x.gram_exact()
    return all(v.denominator == 1 for row in gram for v in row) and abs(det_exact(gram)) == 1


def _unit_basis_subset(x: Lattice, k: int) -> Optional[SublatticeWitness]:
    """For integral Gram matrices: a coordinate subgroup of covolume exactly 1"""
    gram = x.gram_exact()
    for idx in combinations(range(x.dim), k):
        sub = [[gram[i][j] for j in idx] for i in idx]
        if det_exact(sub) == 1:
            return make_witness(x, [[int(j == i) for j in range(x.dim)] for i in idx])
    return None


# ---------------------------------------------------------------------------
# Rank-k subgroup search
# ---------------------------------------------------------------------------

class _RankSearch:
    """
    Enumerates primitive rank-k subgroups below a covolume bound.

    bound_cov is the covolume target; it shrinks whenever a better incumbent
    is found unless collect mode is on.
    """

    def __init__(self, x: Lattice, k: int, bound_cov: float):
        self.x = x
        self.k = k
        self.sqrt_h = math.sqrt(float(HERMITE_POWER[k]))
        self.bound_cov = bound_cov
        self.lam1 = shortest_vector(x).length
        radius = self.sqrt_h * bound_cov / self.lam1 ** (k - 1)
        vs = enumerate_vectors(x, radius * (1 + SEARCH_SLACK), sign_normalized=True)
        self.coeffs = vs.coeffs
        self.vectors = vs.vectors
        self.norms = vs.norms
        self._seen: Dict[Tuple[Tuple[int, ...], ...], SublatticeWitness] = {}

    def witnesses(self):
        """Yield the distinct saturated subgroups spanned by admissible tuples"""
        k = self.k
        n_vec = len(self.norms)
        chosen: List[int] = []
        frame: List[np.ndarray] = []

        def rec(start: int, product: float):
            j = len(chosen)
            for idx in range(start, n_vec):
                r = self.norms[idx]
                limit = self.sqrt_h * self.bound_cov * (1 + SEARCH_SLACK)
                if product * r ** (k - j) > limit:
                    break
                v = self.vectors[idx].copy()
                for f in frame:
                    v -= np.dot(v, f) * f
                res = np.linalg.norm(v)
                if res <= 1e-9 * max(r, 1.0):
                    continue
                chosen.append(idx)
                frame.append(v / res)
                if j + 1 == k:
                    yield self._witness([self.coeffs[i] for i in chosen])
                else:
                    yield from rec(idx + 1, product * r)
                chosen.pop()
                frame.pop()

        yield from rec(0, 1.0)

    def _witness(self, rows) -> SublatticeWitness:
        sat = saturation_coeffs([[int(v) for v in r] for r in rows], self.x.dim)
        key = tuple(tuple(r) for r in sat)
        w = self._seen.get(key)
        if w is None:
            w = make_witness(self.x, sat)
            self._seen[key] = w
        return w


def _minimize_rank(x: Lattice, k: int, incumbent: SublatticeWitness, stop_below: Optional[float] = None) -> SublatticeWitness:
    search = _RankSearch(x, k, incumbent.covolume)
    for cand in search.witnesses():
        if _less(cand, incumbent):
            incumbent = cand
            search.bound_cov = incumbent.covolume
            if stop_below is not None and incumbent.covolume < stop_below:
                break
    return incumbent


def _kz_incumbent(x: Lattice, k: int) -> SublatticeWitness:
    profile = x.__dict__.get("_kz_cache")
    if profile is None:
        profile = kz_reduce(x)
        x.__dict__["_kz_cache"] = profile
    return make_witness(x, profile.transform[:k])


def _from_dual(x: Lattice, dual_witness: SublatticeWitness) -> SublatticeWitness:
    """Primal subgroup Λ with Λ^⊥ ∩ x* equal to the given dual subgroup"""
    kernel = integer_right_kernel([list(r) for r in dual_witness.coeffs])
    return make_witness(x, integer_row_basis(kernel))


def _alpha_k_witness(x: Lattice, k: int) -> SublatticeWitness:
    n = x.dim
    if k == n:
        return make_witness(x, [[int(i == j) for j in range(n)] for i in range(n)])
    if k == 1:
        return make_witness(x, [list(shortest_vector(x).coeffs)])
    if _integral_unimodular_gram(x):
        unit = _unit_basis_subset(x, k)
        if unit is not None:
            return unit
    if 2 * k > n:
        dual = dual_lattice(x)
        return _from_dual(x, _alpha_k_witness(dual, n - k))
    return _minimize_rank(x, k, _kz_incumbent(x, k))


def alpha_k(x: Lattice, k: int) -> Tuple[float, SublatticeWitness]:
    """
    Minimum of |Λ|^(1/k) over rank-k subgroups Λ of x

    Args:
        x: lattice (any covolume)
        k: rank, 1..n

    Returns:
        (value, witness) with witness primitive and attaining the minimum

    Raises:
        DimensionCapError: x.dim above the exactness cap
    """
    check_alpha_cap(x, "alpha_k")
    if not 1 <= k <= x.dim:
        raise ValidationError(f"rank k must lie in 1..{x.dim}, got {k}")
    w = _alpha_k_witness(x, k)
    return w.slope(), w


def _verdict(witnesses: List[SublatticeWitness], alpha_value: float, rational: bool) -> bool:
    if rational and all(w.covolume_sq_exact is not None for w in witnesses):
        if abs(alpha_value - 1.0) < settings.RATIONAL_RETRY_BAND:
            logger.info("🔄 alpha within %.0e of 1, deciding the verdict exactly", settings.RATIONAL_RETRY_BAND)
        return all(w.covolume_sq_exact >= 1 for w in witnesses)
    return alpha_value >= 1.0 - settings.STABILITY_TOL


def alpha(x: Lattice) -> StabilityReport:
    """
    Full stability report: α_1..α_n, α = min, witness and verdict

    Raises:
        ValidationError: x is not unimodular
        DimensionCapError: x.dim above the exactness cap
    """
    check_alpha_cap(x, "alpha")
    _require_unimodular(x)
    witnesses = [_alpha_k_witness(x, k) for k in range(1, x.dim + 1)]
    values = [w.slope() for w in witnesses]
    best = min(range(len(values)), key=lambda i: (values[i], i))
    alpha_value = values[best]
    stable = _verdict(witnesses, alpha_value, x.is_rational)
    if x.is_rational and stable:
        alpha_value = min(alpha_value, 1.0)
    return StabilityReport(
        alpha=alpha_value,
        alpha_by_rank=values,
        witness=witnesses[best],
        stable=stable,
        mode="exact" if x.is_rational else "float",
    )


def is_stable(x: Lattice) -> bool:
    """
    Stability verdict with early exit on the first subgroup of covolume < 1.

    Only ranks up to n/2 are searched, on x and on its dual.
    """
    check_alpha_cap(x, "is_stable")
    _require_unimodular(x)
    if _integral_unimodular_gram(x):
        return True
    n = x.dim
    cutoff = 1.0 - settings.STABILITY_TOL
    for lattice in (x, dual_lattice(x)):
        for k in range(1, n // 2 + 1):
            if k == 1:
                sv = shortest_vector(lattice)
                if sv.length_sq_exact is not None:
                    if sv.length_sq_exact < 1:
                        return False
                elif sv.length < cutoff:
                    return False
                continue
            search = _RankSearch(lattice, k, 1.0)
            for cand in search.witnesses():
                if cand.covolume_sq_exact is not None:
                    if cand.covolume_sq_exact < 1:
                        return False
                elif cand.covolume < cutoff ** k:
                    return False
    return True


# ---------------------------------------------------------------------------
# Min_δ and the canonical filtration
# ---------------------------------------------------------------------------

def _primitive_below(x: Lattice, k: int, cov_bound: float) -> Iterator[SublatticeWitness]:
    """Distinct primitive rank-k subgroups with covolume < cov_bound, in search order"""
    n = x.dim
    if k == n:
        full = make_witness(x, [[int(i == j) for j in range(n)] for i in range(n)])
        if full.covolume < cov_bound:
            yield full
        return
    if 2 * k > n:
        dual = dual_lattice(x)
        for w in _primitive_below(dual, n - k, cov_bound / x.covolume()):
            yield _from_dual(x, w)
        return
    search = _RankSearch(x, k, cov_bound)
    seen = set()
    for cand in search.witnesses():
        if cand.covolume < cov_bound * (1 - TIE_REL) and cand.coeffs not in seen:
            seen.add(cand.coeffs)
            yield cand


def _span_rank(rows: List[List[int]]) -> int:
    return int(np.linalg.matrix_rank(np.asarray(rows, dtype=float))) if rows else 0


def min_delta(x: Lattice, delta: float, list_members: bool = True) -> DeltaSpan:
    """
    Min_δ(x): primitive subgroups with |Λ|^(1/r) < (1+δ)·α(x), and their joint span

    With list_members off only the span is computed: subgroups inside the
    span found so far are skipped and the search stops once it is all of R^n.
    The listing itself stops after GON_DELTA_MEMBER_LIMIT entries (truncated
    is then set); the span is always complete.

    Args:
        x: unimodular lattice
        delta: positive real, at most n+1
        list_members: also return the members themselves
    """
    check_alpha_cap(x, "min_delta")
    _require_unimodular(x)
    if not 0 < delta <= x.dim + 1:
        raise ValidationError(f"delta must lie in (0, {x.dim + 1}], got {delta}")
    n = x.dim
    threshold = (1 + delta) * alpha(x).alpha
    members: List[SublatticeWitness] = []
    truncated = False
    rows: List[List[int]] = []
    rank = 0
    for k in range(1, n + 1):
        if rank == n and not list_members:
            break
        for w in _primitive_below(x, k, threshold ** k):
            if list_members:
                if len(members) < settings.GON_DELTA_MEMBER_LIMIT:
                    members.append(w)
                else:
                    truncated = True
            if rank < n:
                extended = rows + [list(r) for r in w.coeffs]
                grown = _span_rank(extended)
                if grown > rank:
                    rows, rank = extended, grown
            elif not list_members:
                break
    if truncated:
        logger.warning("⚠️ Min_delta listing truncated at %d members", settings.GON_DELTA_MEMBER_LIMIT)
    basis = integer_row_basis(rows) if rows else []
    span = x.vectors(basis) if basis else np.zeros((0, n))
    return DeltaSpan(delta=delta, dimension=len(basis), span_basis=span, members=members, truncated=truncated)


def delta_dimension(x: Lattice, delta: float) -> int:
    """dim_δ(x), the dimension of the span of Min_δ(x)"""
    return min_delta(x, delta, list_members=False).dimension


def _destabilizing(x: Lattice) -> SublatticeWitness:
    """Maximal-rank minimizer of |Λ|^(1/r), for lattices of any covolume"""
    witnesses = [_alpha_k_witness(x, k) for k in range(1, x.dim + 1)]
    slopes = [w.slope() for w in witnesses]
    low = min(slopes)
    rank = max(k for k, s in enumerate(slopes) if s <= low * (1 + 1e-9))
    return witnesses[rank]


def canonical_filtration(x: Lattice) -> List[SublatticeWitness]:
    """
    Harder-Narasimhan flag 0 = Λ_0 ⊂ Λ_1 ⊂ ... ⊂ Λ_m = x

    Each step takes the maximal-rank minimizer of the slope |Λ|^(1/r), then
    recurses on the projection of x orthogonal to it and pulls the result
    back. A stable lattice gives the flag [0, x].
    """
    check_alpha_cap(x, "canonical_filtration")
    _require_unimodular(x)
    zero = make_witness(x, [])
    return [zero] + _flag(x)


def _flag(x: Lattice) -> List[SublatticeWitness]:
    n = x.dim
    first = _destabilizing(x)
    if first.rank == n:
        return [first]
    quotient = project_complement(x, first)
    completion = complete_to_unimodular(first.coeffs, n)
    lifts = completion[first.rank:]
    flag = [first]
    for w in _flag(quotient):
        lifted = [[sum(c[i] * lifts[i][j] for i in range(len(lifts))) for j in range(n)] for c in w.coeffs]
        flag.append(make_witness(x, [list(r) for r in first.coeffs] + lifted))
    return flag


def complement_is_stable(x: Lattice, witness: SublatticeWitness) -> Dict[str, Any]:
    """
    Stability of a primitive covolume-1 subgroup Λ (as a lattice in its span)
    and of the projection of x orthogonal to Λ
    """
    inner = restrict_to_span(x, witness)
    outer = project_complement(x, witness)
    return {
        "subgroup_covolume": witness.covolume,
        "subgroup_stable": alpha(inner).stable if inner.dim > 0 else True,
        "projection_stable": alpha(outer).stable,
    }
