"""
Admissible symmetric boxes and Mordell constants.

kappa_lower_estimate never claims more than it can certify: every value it
returns is 2^-n times the volume of a box that is_admissible has accepted.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from services import rng
from services.errors import ValidationError
from services.lattice_core import Lattice, block_compose, to_fraction
from services.reduction import enumerate_vectors, shortest_vector
from services.tasks import task_pool

logger = logging.getLogger(__name__)

MOVES_PER_START = 40
WARM_MOVES = 40
LOG_SHAPE_SIGMA = 0.35
IMPROVE_REL = 1e-12


@dataclass(frozen=True)
class SymmetricBox:
    half_widths: Tuple[float, ...]

    def __post_init__(self):
        if not self.half_widths or any(not (a > 0) or not math.isfinite(a) for a in self.half_widths):
            raise ValidationError("box half-widths must be positive and finite")

    @property
    def dim(self) -> int:
        return len(self.half_widths)

    @property
    def volume(self) -> float:
        return 2.0 ** self.dim * float(np.prod(self.half_widths))

    @property
    def normalized_volume(self) -> float:
        """Vol / 2^n"""
        return float(np.prod(self.half_widths))

    def scaled(self, factors: Sequence[float]) -> "SymmetricBox":
        return SymmetricBox(tuple(float(a * f) for a, f in zip(self.half_widths, factors)))


@dataclass
class KappaEstimate:
    value: float
    box: SymmetricBox
    budget_used: int
    exceeds_general_bound: bool
    starts: int = 0

    def to_json(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "box": {"half_widths": list(self.box.half_widths)},
            "budget_used": self.budget_used,
            "starts": self.starts,
            "exceeds_general_bound": self.exceeds_general_bound,
        }


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------

def is_admissible(x: Lattice, box: SymmetricBox) -> bool:
    """
    True iff no nonzero lattice point lies in the open box ∏ (-a_i, a_i)

    Points of the open box have Euclidean norm below sqrt(Σ a_i²), so the
    decision is an exact enumeration of that ball.
    """
    if box.dim != x.dim:
        raise ValidationError(f"box has dimension {box.dim}, lattice has {x.dim}")
    a = np.asarray(box.half_widths, dtype=float)
    vs = enumerate_vectors(x, float(np.linalg.norm(a)), sign_normalized=True)
    if not len(vs.coeffs):
        return True
    inside = np.all(np.abs(vs.vectors) < a[None, :], axis=1)
    if not inside.any():
        return True
    if x.is_rational:
        exact_a = [to_fraction(v) for v in box.half_widths]
        for c in vs.coeffs[inside]:
            v = x.vectors_exact([list(int(t) for t in c)])[0]
            if all(abs(vi) < ai for vi, ai in zip(v, exact_a)):
                return False
        return True
    return False


def _blocking_value(x: Lattice, a: np.ndarray, i: int) -> float:
    """
    Largest a_i keeping the box admissible: min |v_i| over nonzero v with
    |v_j| < a_j for j ≠ i.

    Minkowski's convex body theorem bounds it by covol / ∏_{j≠i} a_j.
    """
    others = np.delete(a, i)
    cap = x.covolume() / float(np.prod(others)) * (1 + 1e-9)
    radius = math.sqrt(float(np.sum(others ** 2)) + cap * cap)
    vs = enumerate_vectors(x, radius, sign_normalized=True)
    if not len(vs.coeffs):
        return cap
    mask = np.all(np.abs(np.delete(vs.vectors, i, axis=1)) < others[None, :], axis=1)
    if not mask.any():
        return cap
    return float(np.min(np.abs(vs.vectors[mask, i])))


def _expand(x: Lattice, a: np.ndarray) -> np.ndarray:
    """Round-robin maximal expansion until no coordinate can grow"""
    a = a.copy()
    for _ in range(3 * x.dim):
        grown = False
        for i in range(x.dim):
            b = _blocking_value(x, a, i)
            if b > a[i] * (1 + IMPROVE_REL):
                a[i] = b
                grown = True
        if not grown:
            break
    return a


def _sup_norm_minimum(x: Lattice, shape: np.ndarray) -> float:
    """min over nonzero v of max_i |v_i| / shape_i"""
    scaled = Lattice(x.basis / shape[None, :])
    sv = shortest_vector(scaled)
    upper = float(np.max(np.abs(sv.vector)))
    vs = enumerate_vectors(scaled, math.sqrt(scaled.dim) * upper * (1 + 1e-12), sign_normalized=True)
    return float(np.min(np.max(np.abs(vs.vectors), axis=1)))


def _local_search(x: Lattice, start: np.ndarray, moves: int, gen: np.random.Generator) -> np.ndarray:
    """Greedy expansion followed by shrink-one / regrow exchange moves"""
    best = _expand(x, start)
    n = x.dim
    if n == 1:
        return best
    for _ in range(moves):
        i, j = gen.choice(n, size=2, replace=False)
        factor = gen.uniform(0.5, 0.95)
        trial = best.copy()
        trial[i] *= factor
        trial[j] = _blocking_value(x, trial, j)
        trial = _expand(x, trial)
        if np.prod(trial) > np.prod(best) * (1 + IMPROVE_REL):
            best = trial
    return best


def _start_box(x: Lattice, index: int, seed: int) -> Tuple[np.ndarray, np.random.Generator]:
    gen = rng.stream(seed, "mordell.start", index)
    n = x.dim
    if index == 0:
        lam1 = shortest_vector(x).length
        return np.full(n, lam1 / math.sqrt(n)), gen
    ell = gen.normal(0.0, LOG_SHAPE_SIGMA, size=n)
    ell -= ell.mean()
    shape = np.exp(ell)
    t = _sup_norm_minimum(x, shape)
    return t * shape, gen


def _block_partition(x: Lattice) -> List[int]:
    """Block sizes of a lower block-triangular row basis (rows of block b vanish on later coordinates)"""
    n = x.dim
    b = x.basis
    cuts = [p for p in range(1, n) if not np.any(b[:p, p:])]
    sizes, prev = [], 0
    for p in cuts + [n]:
        sizes.append(p - prev)
        prev = p
    return sizes


def _block_warm_start(x: Lattice, sizes: List[int], seed: int) -> Optional[np.ndarray]:
    if len(sizes) < 2:
        return None
    widths: List[float] = []
    offset = 0
    for bi, size in enumerate(sizes):
        block = Lattice(x.basis[offset:offset + size, offset:offset + size])
        gen = rng.stream(seed, "mordell.block", bi)
        lam1 = shortest_vector(block).length
        widths.extend(_local_search(block, np.full(size, lam1 / math.sqrt(size)), WARM_MOVES, gen))
        offset += size
    return np.asarray(widths)


def _better(a: np.ndarray, b: Optional[np.ndarray]) -> bool:
    if b is None:
        return True
    va, vb = float(np.prod(a)), float(np.prod(b))
    if va > vb * (1 + IMPROVE_REL):
        return True
    if va < vb * (1 - IMPROVE_REL):
        return False
    return tuple(a) > tuple(b)


def kappa_lower_estimate(
    x: Lattice,
    budget: int = 200,
    seed: int = 0,
    warm_start: Optional[SymmetricBox] = None,
) -> KappaEstimate:
    """
    Certified lower bound on κ(x) from an admissible box found by search

    Start 0 is the cube of half-width λ_1/sqrt(n); later starts follow random
    log-shapes scaled to their weighted sup-norm minimum. Each start owns a
    fixed quota of exchange moves and its own random stream, so raising the
    budget only appends work and never lowers the estimate.

    Args:
        x: unimodular lattice
        budget: total number of exchange moves
        seed: master seed
        warm_start: optional admissible box to polish as an extra start
    """
    if budget < 0:
        raise ValidationError("budget must be non-negative")
    n = x.dim
    quota = MOVES_PER_START
    starts = max(1, math.ceil(budget / quota))
    jobs = [(i, min(quota, budget - i * quota)) for i in range(starts)]

    def run(job: Tuple[int, int]) -> np.ndarray:
        index, moves = job
        start, gen = _start_box(x, index, seed)
        return _local_search(x, start, max(moves, 0), gen)

    results = task_pool.map(run, jobs)

    extra: List[np.ndarray] = []
    block = _block_warm_start(x, _block_partition(x), seed)
    if block is not None:
        logger.info("🔄 block-triangular basis detected, using the product box as a warm start")
        extra.append(block)
    if warm_start is not None:
        if warm_start.dim != n:
            raise ValidationError("warm start box has the wrong dimension")
        extra.append(np.asarray(warm_start.half_widths, dtype=float))
    for k, start in enumerate(extra):
        if is_admissible(x, SymmetricBox(tuple(start))):
            results.append(_local_search(x, start, WARM_MOVES, rng.stream(seed, "mordell.warm", k)))
        else:
            logger.warning("⚠️ warm start box is not admissible, skipped")

    best: Optional[np.ndarray] = None
    for r in results:
        if _better(r, best):
            best = r
    box = SymmetricBox(tuple(float(v) for v in best))
    if not is_admissible(x, box):
        # float slack on the blocking values; shrink until certified
        logger.warning("⚠️ best box failed the admissibility check, shrinking")
        factor = 1 - 1e-12
        while not is_admissible(x, box):
            box = box.scaled([factor] * n)
            factor *= factor
    value = box.normalized_volume
    return KappaEstimate(
        value=value,
        box=box,
        budget_used=sum(max(m, 0) for _, m in jobs),
        exceeds_general_bound=value > n ** (-n / 2.0),
        starts=starts + len(extra),
    )


def block_kappa_estimate(blocks: Sequence[Lattice], fill: Any = 0, budget: int = 200, seed: int = 0) -> Dict[str, Any]:
    """
    Product of per-block admissible boxes on a block-triangular composition,
    used as a warm start for the composed lattice
    """
    x = block_compose(blocks, fill)
    per_block = [kappa_lower_estimate(b, budget, seed) for b in blocks]
    product_box = SymmetricBox(tuple(v for est in per_block for v in est.box.half_widths))
    if not is_admissible(x, product_box):
        raise ValidationError("product box is not admissible for the composed lattice")
    estimate = kappa_lower_estimate(x, budget, seed, warm_start=product_box)
    product = float(np.prod([e.value for e in per_block]))
    return {
        "lattice": x,
        "block_values": [e.value for e in per_block],
        "product": product,
        "estimate": estimate,
    }


# ---------------------------------------------------------------------------
# Closed-form bounds
# ---------------------------------------------------------------------------

def barba_bound(n: int) -> float:
    return math.sqrt(2 * n - 1) * (n - 1) ** ((n - 1) / 2.0)


def ehlich_wojtas_bound(n: int) -> float:
    return 2.0 * (n - 1) * (n - 2) ** ((n - 2) / 2.0)


def kappa_n_bounds(n: int) -> Dict[str, Any]:
    """
    Lower bounds on κ_n and upper bounds on Hadamard's determinant h_n

    Returns:
        dict with general, unbounded_orbit, mod4_1 (None unless n ≡ 1 mod 4,
        n ≥ 5), mod4_2 (None unless n ≡ 2 mod 4, n ≥ 6), hadamard,
        hadamard_refined and best
    """
    if n < 2:
        raise ValidationError(f"n must be at least 2, got {n}")
    general = n ** (-n / 2.0)
    unbounded = (n - 1) ** (-(n - 1) / 2.0)
    hadamard = n ** (n / 2.0)
    refined = hadamard
    mod4_1 = None
    mod4_2 = None
    if n % 4 == 1 and n >= 5:
        barba = barba_bound(n)
        hadamard = min(hadamard, barba)
        refined = hadamard
        mod4_1 = 1.0 / barba
    if n % 4 == 2 and n >= 6:
        ew = ehlich_wojtas_bound(n)
        refined = min(refined, ew)
        mod4_2 = min(unbounded, 1.0 / ew)
    best = max(v for v in (general, mod4_1, mod4_2) if v is not None)
    return {
        "n": n,
        "general": general,
        "unbounded_orbit": unbounded,
        "mod4_1": mod4_1,
        "mod4_2": mod4_2,
        "hadamard": hadamard,
        "hadamard_refined": refined,
        "best": best,
    }


def block_form_bound(parts: Sequence[int]) -> Dict[str, Any]:
    """∏ n_i^(-n_i/2) for a block-triangular shape and its comparison with (n-1)^(-(n-1)/2)"""
    if not parts or any(p < 1 for p in parts):
        raise ValidationError(f"bad block sizes {tuple(parts)}")
    n = sum(parts)
    product = math.prod(p ** (-p / 2.0) for p in parts)
    reference = (n - 1) ** (-(n - 1) / 2.0) if n > 1 else 1.0
    return {
        "parts": list(parts),
        "product": product,
        "unbounded_orbit": reference,
        "dominates": len(parts) < 2 or product >= reference * (1 - 1e-12),
    }
