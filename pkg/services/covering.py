"""
Covering radius and the Korkine-Zolotarev covering bounds.

covering_radius is a certified branch-and-bound over the fundamental
parallelepiped of an LLL-reduced basis. woods_bound / composition_bound
evaluate the per-block estimate and its sum over a composition of n, and
product_form_bound turns a covering radius into a bound on the inhomogeneous
product minimum through the arithmetic-geometric mean inequality.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError as SchemaError
from scipy.special import gammaln

from models.gamma import GammaTableFile
from services import settings
from services.errors import DimensionCapError, ValidationError
from services.lattice_core import Lattice, SublatticeWitness, project_complement, restrict_to_span
from services.reduction import KZProfile, enumerate_vectors, reduced_form
from services.tasks import task_pool

logger = logging.getLogger(__name__)

INAPPLICABLE = "inapplicable"
VARIANTS = ("lemma52", "literal")
MIN_TOL = 1e-6
MAX_ROUNDS = 80
CHUNK = 2048


# ---------------------------------------------------------------------------
# GammaTable
# ---------------------------------------------------------------------------

def minkowski_gamma(d: int) -> float:
    """2·V_d^(-1/d), Minkowski's convex-body bound on sup α_1"""
    log_vd = 0.5 * d * math.log(math.pi) - float(gammaln(0.5 * d + 1))
    return 2.0 * math.exp(-log_vd / d)


@dataclass
class GammaTable:
    dim_max: int
    values: Dict[int, float]
    provenance: Dict[int, str]
    hermite: Dict[int, Fraction] = field(default_factory=dict)
    path: Optional[str] = None

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> "GammaTable":
        """
        Load a GammaTable config file

        Entries with a rational γ_d^(2d) use it as the authoritative value;
        missing dimensions up to dim_max use the Minkowski fallback.
        """
        path = Path(path or settings.GON_GAMMA_TABLE)
        try:
            raw = GammaTableFile.model_validate_json(path.read_text())
        except FileNotFoundError:
            raise ValidationError(f"gamma table not found: {path}")
        except SchemaError as e:
            raise ValidationError(f"bad gamma table {path}: {e.errors()[0]['msg']}")
        hermite = {int(d): Fraction(s) for d, s in raw.hermite_power.items()}
        values: Dict[int, float] = {}
        provenance: Dict[int, str] = {}
        for d in range(1, raw.dim_max + 1):
            if d in hermite:
                values[d] = float(hermite[d]) ** (1.0 / (2 * d))
                provenance[d] = f"known_exact ({raw.provenance.get(d, 'hermite_power')})"
            elif d in raw.exact:
                values[d] = raw.exact[d]
                provenance[d] = f"known_exact ({raw.provenance.get(d, 'exact')})"
            else:
                values[d] = minkowski_gamma(d)
                provenance[d] = "minkowski_fallback"
        for d, v in values.items():
            if v > minkowski_gamma(d) * (1 + 1e-12):
                logger.warning("⚠️ gamma_%d = %.6g exceeds the Minkowski fallback; using the fallback", d, v)
                values[d] = minkowski_gamma(d)
                provenance[d] = "minkowski_fallback"
                hermite.pop(d, None)
        fallback_count = sum(1 for p in provenance.values() if p == "minkowski_fallback")
        if fallback_count:
            logger.info("🔄 gamma table %s: %d entries use the Minkowski fallback", path.name, fallback_count)
        return cls(dim_max=raw.dim_max, values=values, provenance=provenance, hermite=hermite, path=str(path))

    @classmethod
    def fallback_only(cls, dim_max: int = 12) -> "GammaTable":
        return cls(
            dim_max=dim_max,
            values={d: minkowski_gamma(d) for d in range(1, dim_max + 1)},
            provenance={d: "minkowski_fallback" for d in range(1, dim_max + 1)},
        )

    def gamma(self, d: int) -> float:
        if d in self.values:
            return self.values[d]
        return minkowski_gamma(d)

    def hermite_power(self, d: int) -> Union[Fraction, float]:
        """γ_d^(2d), exact when the table knows it"""
        if d in self.hermite:
            return self.hermite[d]
        return self.gamma(d) ** (2 * d)

    def to_json(self) -> Dict[str, Any]:
        return {
            "path": self.path,
            "values": {str(d): v for d, v in sorted(self.values.items())},
            "provenance": {str(d): p for d, p in sorted(self.provenance.items())},
        }


_default_table: Optional[GammaTable] = None


def default_gamma_table() -> GammaTable:
    global _default_table
    if _default_table is None:
        _default_table = GammaTable.load()
    return _default_table


# ---------------------------------------------------------------------------
# Covering radius
# ---------------------------------------------------------------------------

class CoveringResult(NamedTuple):
    value: float
    deep_hole: np.ndarray
    value_sq: float
    upper: float


def _box_stats(lo: np.ndarray, hi: np.ndarray, basis: np.ndarray, cands: np.ndarray, signs: np.ndarray):
    centers = ((lo + hi) / 2.0) @ basis
    half = (hi - lo) / 2.0
    # squared distances to every candidate lattice point
    diff = centers[:, None, :] - cands[None, :, :]
    d2 = np.einsum("mkn,mkn->mk", diff, diff)
    nearest = d2.min(axis=1)
    corners = (signs[None, :, :] * half[:, None, :]) @ basis
    circ = np.sqrt(np.einsum("msn,msn->ms", corners, corners).max(axis=1))
    return centers, nearest, circ


def covering_radius(x: Lattice, tol: float = 1e-6) -> CoveringResult:
    """
    Certified covering radius

    Every sub-box of the coefficient cube gets the lower bound dist(center, x)
    and the upper bound dist(center, x) + circumradius. Boxes whose upper
    bound cannot beat the best lower bound by more than tol are dropped.

    Args:
        x: lattice, dim ≤ GON_COVRAD_DIM_CAP
        tol: absolute accuracy, at least 1e-6

    Returns:
        CoveringResult(value, deep_hole, value_sq, upper) with
        value ≤ covrad(x) ≤ upper ≤ value + tol
    """
    if x.dim > settings.GON_COVRAD_DIM_CAP:
        raise DimensionCapError("covering_radius", x.dim, settings.GON_COVRAD_DIM_CAP)
    if tol < MIN_TOL:
        raise ValidationError(f"tol must be at least {MIN_TOL}, got {tol}")
    n = x.dim
    _, basis = reduced_form(x)
    _, gs = np.linalg.qr(basis.T)
    rho = 0.5 * math.sqrt(float(np.sum(np.diag(gs) ** 2)))
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    cell_center = 0.5 * basis.sum(axis=0)
    cell_circ = float(np.sqrt(((signs * 0.5 @ basis) ** 2).sum(axis=1)).max())
    cands = enumerate_vectors(x, rho + cell_circ + 1e-9, center=cell_center).vectors
    lo = np.zeros((1, n))
    hi = np.ones((1, n))
    best_sq = -1.0
    hole = cell_center
    col_norms = np.linalg.norm(basis, axis=1)
    upper = math.inf
    converged = False
    for rnd in range(MAX_ROUNDS):
        chunks = [(lo[i:i + CHUNK], hi[i:i + CHUNK]) for i in range(0, len(lo), CHUNK)]
        stats = task_pool.map(lambda c: _box_stats(c[0], c[1], basis, cands, signs), chunks)
        centers = np.concatenate([s[0] for s in stats])
        nearest = np.concatenate([s[1] for s in stats])
        circ = np.concatenate([s[2] for s in stats])
        i_best = int(np.argmax(nearest))
        if nearest[i_best] > best_sq:
            best_sq = float(nearest[i_best])
            hole = centers[i_best]
        best = math.sqrt(best_sq)
        ub = np.sqrt(nearest) + circ
        upper = max(best, float(ub.max()))
        keep = ub > best + tol
        if not keep.any():
            converged = True
            break
        lo, hi = lo[keep], hi[keep]
        axis = np.argmax((hi - lo) * col_norms[None, :], axis=1)
        mid = (lo[np.arange(len(lo)), axis] + hi[np.arange(len(lo)), axis]) / 2.0
        lo2, hi2 = lo.copy(), hi.copy()
        hi[np.arange(len(lo)), axis] = mid
        lo2[np.arange(len(lo)), axis] = mid
        lo = np.concatenate([lo, lo2])
        hi = np.concatenate([hi, hi2])
        logger.debug("covrad round %d: %d boxes, gap %.3g", rnd, len(lo), upper - best)
    else:
        logger.warning("⚠️ covering_radius stopped after %d rounds with gap %.3g", MAX_ROUNDS, upper - best)
    best = math.sqrt(best_sq)
    certified = best + tol if converged else max(best + tol, upper)
    return CoveringResult(value=best, deep_hole=np.asarray(hole), value_sq=best_sq, upper=certified)


# ---------------------------------------------------------------------------
# Woods bound and compositions
# ---------------------------------------------------------------------------

def check_variant(variant: Optional[str]) -> str:
    variant = variant or settings.GON_WOODS_VARIANT
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return variant


def _woods(a1: float, d: float, n: int, hermite: Union[Fraction, float], variant: str) -> Optional[float]:
    """Per-block bound from A_1, covolume d and H = γ_{n+1}^{2n+2}"""
    h = float(hermite)
    if variant == "lemma52":
        # 2 A^n ≥ d γ^(n+1)  ⟺  4 A^(2n) ≥ d² H
        if 4.0 * a1 ** (2 * n) < d * d * h:
            return None
        return a1 * a1 - a1 ** (2 * n + 2) / (d * d * h)
    root = math.sqrt(h)
    if 2.0 * a1 < d * root:
        return None
    return a1 * a1 - a1 ** (2 * n + 2) / (d * d * root)


def woods_formula(a1: float, d: float, n: int, gamma_np1: float) -> float:
    """A_1² - A_1^(2n+2) / (d² γ_{n+1}^(2n+2)) without checking the hypothesis"""
    return a1 * a1 - a1 ** (2 * n + 2) / (d * d * gamma_np1 ** (2 * n + 2))


def woods_bound(a1: float, d: float, n: int, gamma_np1: float, variant: Optional[str] = None) -> Union[float, str]:
    """
    Bound on covrad² of an n-dimensional lattice of covolume d with first
    Korkine-Zolotarev coefficient A_1

    Args:
        a1: A_1 (shortest vector length)
        d: covolume
        n: dimension
        gamma_np1: an upper bound for γ_{n+1}
        variant: "lemma52" (exponents n on A and 2n+2 on γ) or "literal"

    Returns:
        the bound, or "inapplicable" when the hypothesis fails
    """
    if a1 <= 0 or d <= 0 or gamma_np1 <= 0 or n < 1:
        raise ValidationError("woods_bound needs positive A1, d, gamma and n ≥ 1")
    variant = check_variant(variant)
    value = _woods(a1, d, n, gamma_np1 ** (2 * n + 2), variant)
    return INAPPLICABLE if value is None else value


def _check_composition(parts: Sequence[int], n: int):
    if not parts or any(int(p) < 1 for p in parts) or sum(parts) != n:
        raise ValidationError(f"{tuple(parts)} is not a composition of {n}")


def composition_bound(
    profile: Union[KZProfile, Sequence[float]],
    parts: Sequence[int],
    gammas: Optional[GammaTable] = None,
    variant: Optional[str] = None,
) -> Union[float, str]:
    """
    Sum of per-block Woods bounds over a composition (n_1..n_k) of n

    Block i starts at m_{i-1}+1, has A = A_{m_{i-1}+1}, covolume
    d_i = A_{m_{i-1}+1}···A_{m_i} and uses γ_{n_i+1}.
    """
    coeffs = np.asarray(profile.coefficients if isinstance(profile, KZProfile) else profile, dtype=float)
    n = len(coeffs)
    _check_composition(parts, n)
    gammas = gammas or default_gamma_table()
    variant = check_variant(variant)
    total = 0.0
    start = 0
    for ni in parts:
        block = coeffs[start:start + ni]
        d = float(np.prod(block))
        term = _woods(float(block[0]), d, ni, gammas.hermite_power(ni + 1), variant)
        if term is None:
            return INAPPLICABLE
        total += term
        start += ni
    return total


@dataclass
class DecompositionCheck:
    lhs: float
    rhs: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 2 * self.tol

    def to_json(self) -> Dict[str, Any]:
        return {"lhs": self.lhs, "rhs": self.rhs, "tol": self.tol, "holds": self.holds}


def decomposition_check(x: Lattice, witness: SublatticeWitness, tol: float = 1e-6) -> DecompositionCheck:
    """covrad²(x) against covrad²(Λ) + covrad²(Λ′) for a primitive Λ"""
    inner = restrict_to_span(x, witness)
    outer = project_complement(x, witness)
    lhs = covering_radius(x, tol).value_sq
    rhs = covering_radius(inner, tol).value_sq + covering_radius(outer, tol).value_sq
    return DecompositionCheck(lhs=lhs, rhs=rhs, tol=tol)


def product_form_bound(x: Lattice, tol: float = 1e-6) -> Dict[str, Any]:
    """(covrad²/n)^(n/2), an upper bound on the inhomogeneous product minimum"""
    cov = covering_radius(x, tol)
    n = x.dim
    bound = (cov.value_sq / n) ** (n / 2.0)
    certified = (cov.upper ** 2 / n) ** (n / 2.0)
    threshold = 2.0 ** (-n)
    return {
        "covrad": cov.value,
        "bound": bound,
        "certified_upper": certified,
        "threshold": threshold,
        "below_threshold": bound <= threshold * (1 + 1e-12),
    }


def minkowski_covrad_check(x: Lattice, tol: float = 1e-6) -> Dict[str, Any]:
    """Whether covrad(x) ≤ sqrt(n)/2, with the product-form consequence"""
    cov = covering_radius(x, tol)
    target = math.sqrt(x.dim) / 2.0
    if cov.upper <= target:
        verdict = "holds"
    elif cov.value_sq <= x.dim / 4.0 * (1 + 1e-12):
        verdict = "holds_within_tol"
    else:
        verdict = "violated"
    return {
        "covrad": cov.value,
        "covrad_upper": cov.upper,
        "target": target,
        "verdict": verdict,
        "deep_hole": cov.deep_hole.tolist(),
        "product_bound": (cov.value_sq / x.dim) ** (x.dim / 2.0),
    }
