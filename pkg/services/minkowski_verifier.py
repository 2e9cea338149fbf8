"""
Branch-and-bound check of the Korkine-Zolotarev covering condition.

A KZ profile (A_1..A_n) of a stable unimodular lattice satisfies the linear
constraints below once written in ℓ_i = ln A_i with ℓ_n = -(ℓ_1+...+ℓ_{n-1}):

    ℓ_1 + ... + ℓ_i ≥ 0                      (i < n)
    2ℓ_{i+1} - 2ℓ_i ≥ ln(3/4)
    2ℓ_{i+2} - 2ℓ_i ≥ ln(2/3)

The set of such profiles (KZS) is covered when every point lies in the region
W(I) of some composition I of n: each block hypothesis holds and the sum of
per-block covering bounds is at most n/4. verify_cover splits a bounding box
of KZS until every leaf is either outside KZS or proven inside one region
with outward-rounded interval arithmetic, and records the leaves as a
certificate that check_certificate can re-validate independently.
"""
import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError as SchemaError

from models.certificate import CertificateFile, LeafModel
from services import rng, settings
from services.covering import GammaTable, check_variant, default_gamma_table
from services.errors import DeadlineExceeded, DimensionCapError, ValidationError
from services.intervals import Interval, log_of
from services.tasks import task_pool

logger = logging.getLogger(__name__)

INSIDE, OUTSIDE, STRADDLES = "inside", "outside", "straddles"
OUTSIDE_KZS, COVERED, UNRESOLVED = "outside_kzs", "covered", "unresolved"
CONDITION = "KZS ⊂ ∪_I W(I) over compositions I of n implies covrad² ≤ n/4 for stable lattices"
SAMPLE_TOL = 1e-12
CONTRACT_PASSES = 3
DECIMAL_DIGITS = 40

Coeffs = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Compositions and boxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Composition:
    parts: Tuple[int, ...]

    def __post_init__(self):
        if not self.parts or any(int(p) < 1 for p in self.parts):
            raise ValidationError(f"malformed composition {self.parts}")

    @property
    def n(self) -> int:
        return sum(self.parts)

    def blocks(self):
        """(start, size) per block, 0-based"""
        start = 0
        for size in self.parts:
            yield start, size
            start += size

    def to_json(self) -> List[int]:
        return list(self.parts)


def compositions(n: int) -> List[Composition]:
    """All 2^(n-1) compositions of n in lexicographic order"""
    if n < 1:
        raise ValidationError("compositions need n ≥ 1")
    result = []
    for cuts in itertools.product((False, True), repeat=n - 1):
        parts, size = [], 1
        for cut in cuts:
            if cut:
                parts.append(size)
                size = 1
            else:
                size += 1
        parts.append(size)
        result.append(tuple(parts))
    return [Composition(p) for p in sorted(result)]


@dataclass(frozen=True)
class LogBox:
    """Closed box for ℓ_1..ℓ_{n-1}"""

    intervals: Tuple[Interval, ...]

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[float]]) -> "LogBox":
        return cls(tuple(Interval(float(lo), float(hi)) for lo, hi in bounds))

    @property
    def dim(self) -> int:
        return len(self.intervals) + 1

    @property
    def widest(self) -> int:
        widths = [iv.width for iv in self.intervals]
        return int(np.argmax(widths)) if widths else -1

    @property
    def max_width(self) -> float:
        return max((iv.width for iv in self.intervals), default=0.0)

    @property
    def volume(self) -> float:
        return math.prod(iv.width for iv in self.intervals)

    def key(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((iv.lo, iv.hi) for iv in self.intervals)

    def replace(self, j: int, interval: Interval) -> "LogBox":
        ivs = list(self.intervals)
        ivs[j] = interval
        return LogBox(tuple(ivs))

    def split(self) -> Tuple["LogBox", "LogBox"]:
        """Bisect the widest interval, lowest index on ties"""
        j = self.widest
        iv = self.intervals[j]
        mid = iv.mid
        return self.replace(j, Interval(iv.lo, mid)), self.replace(j, Interval(mid, iv.hi))

    def peel(self, inner: "LogBox") -> List["LogBox"]:
        """Boxes tiling self minus inner (inner ⊂ self), one slab per trimmed side"""
        pieces = []
        current = self
        for j, (outer, core) in enumerate(zip(self.intervals, inner.intervals)):
            if outer.lo < core.lo:
                pieces.append(current.replace(j, Interval(outer.lo, core.lo)))
            if core.hi < outer.hi:
                pieces.append(current.replace(j, Interval(core.hi, outer.hi)))
            current = current.replace(j, core)
        return pieces

    def contains_box(self, other: "LogBox") -> bool:
        return all(a.lo <= b.lo and b.hi <= a.hi for a, b in zip(self.intervals, other.intervals))

    def corners(self) -> List[Tuple[float, ...]]:
        return list(itertools.product(*[sorted({iv.lo, iv.hi}) for iv in self.intervals]))

    def sample(self, gen: np.random.Generator, count: int) -> np.ndarray:
        lo = np.array([iv.lo for iv in self.intervals])
        hi = np.array([iv.hi for iv in self.intervals])
        return lo + (hi - lo) * gen.random((count, len(lo)))

    def to_json(self) -> List[List[float]]:
        return [[iv.lo, iv.hi] for iv in self.intervals]


# ---------------------------------------------------------------------------
# Linear forms in the free coordinates
# ---------------------------------------------------------------------------

def _ell(n: int, j: int) -> np.ndarray:
    """Coefficients of ℓ_{j+1} over ℓ_1..ℓ_{n-1}"""
    m = n - 1
    if j < m:
        v = np.zeros(m, dtype=np.int64)
        v[j] = 1
        return v
    return -np.ones(m, dtype=np.int64)


def _over(coeffs: Coeffs, const: Interval, box: LogBox) -> Interval:
    total = const
    for c, iv in zip(coeffs, box.intervals):
        if c:
            total = total + iv.scale(c)
    return total


@dataclass(frozen=True)
class _Constraint:
    coeffs: Coeffs
    const: Interval
    label: str


@lru_cache(maxsize=None)
def _kzs_constraints(n: int) -> Tuple[_Constraint, ...]:
    ln34 = log_of(Fraction(3, 4))
    ln23 = log_of(Fraction(2, 3))
    out = []
    partial = np.zeros(n - 1, dtype=np.int64)
    for i in range(n - 1):
        partial = partial + _ell(n, i)
        out.append(_Constraint(tuple(int(c) for c in partial), Interval(0.0), f"A_1···A_{i + 1} ≥ 1"))
    for i in range(n - 1):
        coeffs = 2 * _ell(n, i + 1) - 2 * _ell(n, i)
        out.append(_Constraint(tuple(int(c) for c in coeffs), -ln34, f"A_{i + 2}² ≥ (3/4)A_{i + 1}²"))
    for i in range(n - 2):
        coeffs = 2 * _ell(n, i + 2) - 2 * _ell(n, i)
        out.append(_Constraint(tuple(int(c) for c in coeffs), -ln23, f"A_{i + 3}² ≥ (2/3)A_{i + 1}²"))
    return tuple(out)


def kzs_classify(box: LogBox) -> str:
    """
    Position of a box relative to KZS

    Returns:
        "inside" when every constraint holds on the whole box, "outside" when
        some constraint fails on the whole box, otherwise "straddles"
    """
    inside = True
    for con in _kzs_constraints(box.dim):
        value = _over(con.coeffs, con.const, box)
        if value.hi < 0:
            return OUTSIDE
        if value.lo < 0:
            inside = False
    return INSIDE if inside else STRADDLES


def contract(box: LogBox) -> Optional[LogBox]:
    """
    Shrink a box to an enclosure of box ∩ KZS by propagating each linear
    constraint onto every coordinate; None when the intersection is empty
    """
    ivs = list(box.intervals)
    constraints = _kzs_constraints(box.dim)
    for _ in range(CONTRACT_PASSES):
        changed = False
        for con in constraints:
            for j, c in enumerate(con.coeffs):
                if c == 0:
                    continue
                rest = con.const
                for i, (ci, iv) in enumerate(zip(con.coeffs, ivs)):
                    if i != j and ci:
                        rest = rest + iv.scale(ci)
                # c·ℓ_j ≥ -rest
                q = Interval(-rest.hi) * Fraction(1, c)
                lo, hi = ivs[j].lo, ivs[j].hi
                if c > 0 and q.lo > lo:
                    lo = q.lo
                elif c < 0 and q.hi < hi:
                    hi = q.hi
                else:
                    continue
                if lo > hi:
                    return None
                ivs[j] = Interval(lo, hi)
                changed = True
        if not changed:
            break
    return LogBox(tuple(ivs))


# ---------------------------------------------------------------------------
# Region test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Block:
    x: Coeffs  # X = 2ℓ_a
    y: Coeffs  # Y = 2·n_i·ℓ_a - 2·Σ_block ℓ
    h: Coeffs  # hypothesis ≥ 0 is h·ℓ + h_const
    h_const: Interval
    k: Interval  # term = e^X (1 - k e^Y)
    hermite: Fraction
    size: int
    variant: str


def _hermite(gammas: GammaTable, d: int) -> Fraction:
    value = gammas.hermite_power(d)
    return value if isinstance(value, Fraction) else Fraction(value)


@lru_cache(maxsize=4096)
def _blocks_cached(parts: Tuple[int, ...], hermites: Tuple[Fraction, ...], variant: str) -> Tuple[_Block, ...]:
    n = sum(parts)
    blocks = []
    for (start, size), hermite in zip(Composition(parts).blocks(), hermites):
        a = _ell(n, start)
        block_sum = sum(_ell(n, j) for j in range(start, start + size))
        y = 2 * size * a - 2 * block_sum
        ln_h = log_of(hermite)
        if variant == "lemma52":
            # 4 A^(2n) ≥ d² H
            h, h_const = y, log_of(4 / hermite)
            k = Interval.point(1 / hermite)
        else:
            # 2A ≥ d √H
            h, h_const = a - block_sum, log_of(Fraction(2)) - ln_h * Fraction(1, 2)
            k = (ln_h * Fraction(-1, 2)).exp()
        blocks.append(
            _Block(
                x=tuple(int(c) for c in 2 * a),
                y=tuple(int(c) for c in y),
                h=tuple(int(c) for c in h),
                h_const=h_const,
                k=k,
                hermite=hermite,
                size=size,
                variant=variant,
            )
        )
    return tuple(blocks)


def _blocks(comp: Composition, gammas: GammaTable, variant: str) -> Tuple[_Block, ...]:
    hermites = tuple(_hermite(gammas, size + 1) for size in comp.parts)
    return _blocks_cached(comp.parts, hermites, variant)


_ZERO = Interval(0.0)


def _total(blocks: Sequence[_Block], box: LogBox, n: int) -> Interval:
    total = Interval.point(Fraction(-n, 4))
    for b in blocks:
        ex = _over(b.x, _ZERO, box).exp()
        key = b.k * _over(b.y, _ZERO, box).exp()
        total = total + ex * (1 - key)
    return total


def _gradient(blocks: Sequence[_Block], box: LogBox, j: int) -> Interval:
    total = _ZERO
    for b in blocks:
        xj, yj = b.x[j], b.y[j]
        if xj == 0 and yj == 0:
            continue
        ex = _over(b.x, _ZERO, box).exp()
        key = b.k * _over(b.y, _ZERO, box).exp()
        total = total + ex * (Interval(float(xj)) - key.scale(xj + yj))
    return total


def _sum_upper(blocks: Sequence[_Block], box: LogBox, n: int) -> float:
    """Upper bound of Σ terms - n/4 over the box"""
    ivs = list(box.intervals)
    open_coords = []
    for j in range(len(ivs)):
        g = _gradient(blocks, box, j)
        if g.hi <= 0:
            ivs[j] = Interval(ivs[j].lo)
        elif g.lo >= 0:
            ivs[j] = Interval(ivs[j].hi)
        else:
            open_coords.append(j)
    reduced = LogBox(tuple(ivs))
    naive = _total(blocks, reduced, n).hi
    if not open_coords:
        return naive
    center = reduced
    for j in open_coords:
        center = center.replace(j, Interval(ivs[j].mid))
    mean_value = _total(blocks, center, n)
    for j in open_coords:
        mean_value = mean_value + _gradient(blocks, reduced, j) * (ivs[j] - ivs[j].mid)
    return min(naive, mean_value.hi)


def _covers(blocks: Sequence[_Block], box: LogBox, n: int) -> bool:
    for b in blocks:
        if _over(b.h, b.h_const, box).lo < 0:
            return False
    return _sum_upper(blocks, box, n) <= 0


def region_covers(
    comp: Union[Composition, Sequence[int]],
    box: LogBox,
    gammas: Optional[GammaTable] = None,
    variant: Optional[str] = None,
) -> bool:
    """
    True only when every point of the box satisfies all block hypotheses of
    the composition and the sum of block bounds is at most n/4

    Monotone coordinates are pinned to the maximizing corner; the rest are
    bounded by the better of the direct enclosure and the mean-value form.
    """
    comp = comp if isinstance(comp, Composition) else Composition(tuple(int(p) for p in comp))
    if comp.n != box.dim:
        raise ValidationError(f"composition of {comp.n} does not match box dimension {box.dim}")
    blocks = _blocks(comp, gammas or default_gamma_table(), check_variant(variant))
    return _covers(blocks, box, box.dim)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def initial_bounds(n: int) -> Tuple[LogBox, List[str]]:
    """
    Box enclosing KZS plus the derivation of each bound

    Upper: the tail A_i..A_n has product ≤ 1 and A_j² ≥ (3/4)^(j-i) A_i², so
    ℓ_i ≤ (n-i)/4·ln(4/3). Lower: ℓ_1 ≥ 0 and the two ratio constraints chain
    to D_t = max(D_{t-1} + ½ln(3/4), D_{t-2} + ½ln(2/3)).
    """
    if n < 1:
        raise ValidationError("initial_bounds needs n ≥ 1")
    derivation = [
        "ℓ_n = -(ℓ_1 + ... + ℓ_(n-1)) from A_1···A_n = 1",
        "ℓ_i ≤ (n-i)/4·ln(4/3): A_1···A_(i-1) ≥ 1 and A_j² ≥ (3/4)^(j-i)·A_i² for j ≥ i",
        "ℓ_1 ≥ 0: A_1 ≥ 1",
        "ℓ_t ≥ D_t, D_1 = 0, D_2 = ½ln(3/4), D_t = max(D_(t-1) + ½ln(3/4), D_(t-2) + ½ln(2/3))",
    ]
    if n == 1:
        return LogBox(()), ["n = 1: A_1 = 1"]
    ln43 = log_of(Fraction(4, 3))
    step_a = log_of(Fraction(3, 4)) * Fraction(1, 2)
    step_b = log_of(Fraction(2, 3)) * Fraction(1, 2)
    lower: List[Interval] = [Interval(0.0)]
    for t in range(1, n - 1):
        via_a = lower[t - 1] + step_a
        via_b = lower[t - 2] + step_b if t >= 2 else via_a
        lower.append(via_a if via_a.lo >= via_b.lo else via_b)
    intervals = []
    for i in range(1, n):
        upper = (ln43 * Fraction(n - i, 4)).hi
        intervals.append(Interval(lower[i - 1].lo, upper))
    return LogBox(tuple(intervals)), derivation


@dataclass
class Leaf:
    box: LogBox
    verdict: str
    composition: Optional[Composition] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "box": self.box.to_json(),
            "verdict": self.verdict,
            "composition": self.composition.to_json() if self.composition else None,
        }


@dataclass
class CoverCertificate:
    dim: int
    variant: str
    tolerance: float
    initial_box: LogBox
    leaves: List[Leaf]
    derivation: List[str] = field(default_factory=list)
    gamma_provenance: Dict[str, str] = field(default_factory=dict)
    complete: bool = True
    rounds: int = 0

    def __post_init__(self):
        self.leaves.sort(key=lambda leaf: leaf.box.key())

    def count(self, verdict: str) -> int:
        return sum(1 for leaf in self.leaves if leaf.verdict == verdict)

    @property
    def covered(self) -> bool:
        return self.complete and self.count(UNRESOLVED) == 0

    def to_json(self) -> Dict[str, Any]:
        model = CertificateFile(
            dim=self.dim,
            variant=self.variant,
            tolerance=self.tolerance,
            gamma_provenance=self.gamma_provenance,
            initial_box=self.initial_box.to_json(),
            derivation=self.derivation,
            complete=self.complete,
            covered=self.covered,
            leaves=[LeafModel(**leaf.to_json()) for leaf in self.leaves],
            stats={
                "leaves": len(self.leaves),
                "covered": self.count(COVERED),
                "outside_kzs": self.count(OUTSIDE_KZS),
                "unresolved": self.count(UNRESOLVED),
                "rounds": self.rounds,
            },
            tool_version=settings.TOOL_VERSION,
            theorem=CONDITION,
        )
        return model.model_dump(mode="json")

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "CoverCertificate":
        try:
            model = CertificateFile.model_validate(data)
        except SchemaError as e:
            raise ValidationError(f"bad certificate: {e.errors()[0]['msg']}")
        leaves = [
            Leaf(
                box=LogBox.from_bounds(leaf.box),
                verdict=leaf.verdict,
                composition=Composition(tuple(leaf.composition)) if leaf.composition else None,
            )
            for leaf in model.leaves
        ]
        return cls(
            dim=model.dim,
            variant=model.variant,
            tolerance=model.tolerance,
            initial_box=LogBox.from_bounds(model.initial_box),
            leaves=leaves,
            derivation=model.derivation,
            gamma_provenance=model.gamma_provenance,
            complete=model.complete,
            rounds=model.stats.get("rounds", 0),
        )


def write_certificate(cert: CoverCertificate, path: Union[str, Path]):
    Path(path).write_text(json.dumps(cert.to_json(), sort_keys=True, indent=1))


def read_certificate(path: Union[str, Path]) -> CoverCertificate:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"certificate not found: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"certificate {path} is not JSON: {e}")
    return CoverCertificate.from_json(data)


def _resolve(box: LogBox, candidates: Sequence[Tuple[Composition, Tuple[_Block, ...]]], n: int):
    position = kzs_classify(box)
    if position == OUTSIDE:
        return OUTSIDE_KZS, None, None
    evaluated = box if position == INSIDE else contract(box)
    if evaluated is None:
        return OUTSIDE_KZS, None, None
    for comp, blocks in candidates:
        if _covers(blocks, evaluated, n):
            return COVERED, comp, evaluated
    return None, None, evaluated


def verify_cover(
    n: int,
    min_width: float = 1e-3,
    gammas: Optional[GammaTable] = None,
    deadline: Optional[float] = None,
    variant: Optional[str] = None,
) -> CoverCertificate:
    """
    Certify KZS ⊂ ∪_I W(I) in dimension n

    Args:
        n: dimension, at most GON_VERIFY_DIM_CAP
        min_width: boxes this narrow that are still undecided become unresolved leaves
        gammas: GammaTable supplying γ_{n_i+1}^(2n_i+2)
        deadline: wall-clock budget in seconds
        variant: block hypothesis variant, "lemma52" or "literal"

    Returns:
        CoverCertificate; covered is True iff no leaf is unresolved

    Raises:
        DeadlineExceeded: carrying the partial certificate
    """
    if n < 1:
        raise ValidationError("verify_cover needs n ≥ 1")
    if n > settings.GON_VERIFY_DIM_CAP:
        raise DimensionCapError("verify_cover", n, settings.GON_VERIFY_DIM_CAP)
    if not min_width > 0:
        raise ValidationError("min_width must be positive")
    gammas = gammas or default_gamma_table()
    variant = check_variant(variant)
    candidates = [(comp, _blocks(comp, gammas, variant)) for comp in compositions(n)]
    box0, derivation = initial_bounds(n)
    provenance = {str(d): gammas.provenance.get(d, "minkowski_fallback") for d in range(2, n + 2)}

    def certificate(leaves: List[Leaf], complete: bool, rounds: int) -> CoverCertificate:
        return CoverCertificate(
            dim=n,
            variant=variant,
            tolerance=min_width,
            initial_box=box0,
            leaves=leaves,
            derivation=derivation,
            gamma_provenance=provenance,
            complete=complete,
            rounds=rounds,
        )

    started = time.monotonic()
    frontier = [box0]
    leaves: List[Leaf] = []
    rounds = 0
    while frontier:
        if deadline is not None and time.monotonic() - started > deadline:
            leaves.extend(Leaf(box, UNRESOLVED) for box in frontier)
            partial = certificate(leaves, complete=False, rounds=rounds)
            logger.warning("⚠️ verify_cover n=%d hit its deadline with %d open boxes", n, len(frontier))
            raise DeadlineExceeded(f"verify_cover n={n} exceeded {deadline}s", partial=partial)
        results = task_pool.map(lambda box: _resolve(box, candidates, n), frontier)
        next_frontier: List[LogBox] = []
        for box, (verdict, comp, evaluated) in zip(frontier, results):
            if evaluated is not None and evaluated is not box:
                # the trimmed slabs hold no KZS point
                leaves.extend(Leaf(piece, OUTSIDE_KZS) for piece in box.peel(evaluated))
                box = evaluated
            if verdict is not None:
                leaves.append(Leaf(box, verdict, comp))
            elif box.max_width <= min_width:
                leaves.append(Leaf(box, UNRESOLVED))
            else:
                next_frontier.extend(box.split())
        rounds += 1
        logger.info("🔄 verify_cover n=%d round %d: %d leaves, %d open", n, rounds, len(leaves), len(next_frontier))
        frontier = next_frontier

    cert = certificate(leaves, complete=True, rounds=rounds)
    if cert.covered:
        logger.info("✓ verify_cover n=%d covered with %d leaves", n, len(leaves))
    else:
        logger.warning("⚠️ verify_cover n=%d left %d unresolved leaves", n, cert.count(UNRESOLVED))
    return cert


# ---------------------------------------------------------------------------
# Independent re-validation
# ---------------------------------------------------------------------------

def _kzs_margin(points: np.ndarray, n: int) -> np.ndarray:
    """Smallest constraint value per point; ≥ 0 means the point is in KZS"""
    constraints = _kzs_constraints(n)
    if not constraints:
        return np.full(len(points), np.inf)
    coeffs = np.array([c.coeffs for c in constraints], dtype=float)
    consts = np.array([c.const.mid for c in constraints])
    return np.min(points @ coeffs.T + consts, axis=1)


def _pointwise(blocks: Sequence[_Block], points: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """(smallest hypothesis value, Σ terms - n/4) per point"""
    hyp = np.full(len(points), np.inf)
    total = np.full(len(points), -n / 4.0)
    for b in blocks:
        hyp = np.minimum(hyp, points @ np.array(b.h, dtype=float) + b.h_const.mid)
        ex = np.exp(points @ np.array(b.x, dtype=float))
        total += ex * (1.0 - b.k.mid * np.exp(points @ np.array(b.y, dtype=float)))
    return hyp, total


def _decimal_check(blocks: Sequence[_Block], point: Sequence[float], n: int) -> bool:
    tiny = Decimal("1e-30")
    with localcontext() as ctx:
        ctx.prec = DECIMAL_DIGITS
        ell = [Decimal(v) for v in point]

        def dot(coeffs: Coeffs) -> Decimal:
            return sum((Decimal(c) * v for c, v in zip(coeffs, ell)), Decimal(0))

        total = -Decimal(n) / Decimal(4)
        for b in blocks:
            hermite = Decimal(b.hermite.numerator) / Decimal(b.hermite.denominator)
            if b.variant == "lemma52":
                hyp = dot(b.h) + (Decimal(4) / hermite).ln()
                k = Decimal(1) / hermite
            else:
                hyp = dot(b.h) + Decimal(2).ln() - hermite.ln() / 2
                k = Decimal(1) / hermite.sqrt()
            if hyp < -tiny:
                return False
            total += dot(b.x).exp() * (1 - k * dot(b.y).exp())
        return total <= tiny


def check_certificate(
    cert: CoverCertificate,
    samples_per_leaf: int = 10_000,
    seed: int = 0,
    gammas: Optional[GammaTable] = None,
    recheck_fraction: float = 0.01,
) -> Dict[str, Any]:
    """
    Re-validate a certificate without trusting the interval evaluation

    Checks that the leaves tile the initial box (containment and total
    volume), samples points in every leaf (a covered leaf must satisfy its
    region everywhere, KZS or not), and re-evaluates the corners and
    centre of a sample of covered leaves in 40-digit decimal arithmetic.
    """
    n = cert.dim
    gammas = gammas or default_gamma_table()
    box0, _ = initial_bounds(n)
    contained = all(box0.contains_box(leaf.box) for leaf in cert.leaves)
    total_volume = math.fsum(leaf.box.volume for leaf in cert.leaves)
    rel_error = abs(total_volume - box0.volume) / box0.volume if box0.volume > 0 else abs(total_volume - 1.0)
    partition_ok = contained and rel_error <= 1e-12

    violations = 0
    samples = 0
    covered_indices = []
    for idx, leaf in enumerate(cert.leaves):
        if leaf.verdict == UNRESOLVED or n == 1:
            if leaf.verdict == COVERED:
                covered_indices.append(idx)
            continue
        gen = rng.stream(seed, "verifier.check", idx)
        points = leaf.box.sample(gen, samples_per_leaf)
        samples += len(points)
        if leaf.verdict == OUTSIDE_KZS:
            violations += int(np.count_nonzero(_kzs_margin(points, n) > SAMPLE_TOL))
            continue
        covered_indices.append(idx)
        blocks = _blocks(leaf.composition, gammas, cert.variant)
        hyp, total = _pointwise(blocks, points, n)
        violations += int(np.count_nonzero((hyp < -SAMPLE_TOL) | (total > SAMPLE_TOL)))

    recheck_failures = 0
    rechecked: List[int] = []
    if covered_indices:
        count = max(1, int(math.ceil(recheck_fraction * len(covered_indices))))
        gen = rng.stream(seed, "verifier.recheck")
        rechecked = sorted(int(i) for i in gen.choice(covered_indices, size=count, replace=False))
        for idx in rechecked:
            leaf = cert.leaves[idx]
            blocks = _blocks(leaf.composition, gammas, cert.variant)
            points = leaf.box.corners() + [tuple(iv.mid for iv in leaf.box.intervals)]
            recheck_failures += sum(1 for p in points if not _decimal_check(blocks, p, n))

    valid = partition_ok and violations == 0 and recheck_failures == 0
    report = {
        "dim": n,
        "variant": cert.variant,
        "leaves": len(cert.leaves),
        "covered_leaves": cert.count(COVERED),
        "unresolved_leaves": cert.count(UNRESOLVED),
        "partition_ok": partition_ok,
        "volume_rel_error": rel_error,
        "samples": samples,
        "violations": violations,
        "rechecked_leaves": len(rechecked),
        "recheck_failures": recheck_failures,
        "valid": valid,
        "covered": valid and cert.covered,
    }
    if valid:
        logger.info("✓ certificate for n=%d re-validated (%d samples)", n, samples)
    else:
        logger.warning("⚠️ certificate for n=%d failed re-validation: %s", n, report)
    return report
