"""
Search along diagonal orbits for nearly stable lattices.

A point of the positive diagonal group is stored by its log coordinates ℓ
with Σℓ_i = 0; it acts on a lattice by scaling basis coordinate i by e^(ℓ_i).
search_max_alpha runs a few annealing chains over the trace-zero hyperplane.
Half of the proposals follow the destabilizing witness: moving along
g = diag(P_Λ) - (r/n)·1 stretches the span of the witness and shrinks its
complement, which raises |Λ| fastest.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from services import rng
from services.errors import ValidationError
from services.lattice_core import Lattice, SublatticeWitness
from services.stability import StabilityReport, alpha, check_alpha_cap, delta_dimension
from services.tasks import task_pool

logger = logging.getLogger(__name__)

DIVERGENCE_ALPHA1 = 1e-3
DEFAULT_CHAINS = 4
LINE_EVALS = 6
STEP_SIGMA = 0.25
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
UK_OFFSETS = (Fraction(7, 8), Fraction(1), Fraction(9, 8))


@dataclass(frozen=True)
class DiagonalPoint:
    """exp(diag(ℓ)) with Σℓ = 0; `factors` keeps exact rational e^(ℓ_i) when known"""

    log_coords: Tuple[float, ...]
    factors: Optional[Tuple[Fraction, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        ell = np.asarray(self.log_coords, dtype=float)
        if ell.ndim != 1 or not np.all(np.isfinite(ell)):
            raise ValidationError("log coordinates must be a finite vector")
        object.__setattr__(self, "log_coords", tuple(float(v) for v in ell - ell.mean()))

    @classmethod
    def identity(cls, n: int) -> "DiagonalPoint":
        return cls((0.0,) * n, (Fraction(1),) * n)

    @classmethod
    def from_factors(cls, factors: Sequence[Any]) -> "DiagonalPoint":
        """Exact diagonal entries with product 1"""
        fr = tuple(Fraction(f) for f in factors)
        if any(f <= 0 for f in fr) or math.prod(fr) != 1:
            raise ValidationError("diagonal factors must be positive with product 1")
        return cls(tuple(math.log(f) for f in fr), fr)

    @property
    def dim(self) -> int:
        return len(self.log_coords)

    def moved(self, direction: np.ndarray, step: float) -> "DiagonalPoint":
        return DiagonalPoint(tuple(np.asarray(self.log_coords) + step * np.asarray(direction)))

    def compose(self, other: "DiagonalPoint") -> "DiagonalPoint":
        factors = None
        if self.factors is not None and other.factors is not None:
            factors = tuple(a * b for a, b in zip(self.factors, other.factors))
        return DiagonalPoint(tuple(a + b for a, b in zip(self.log_coords, other.log_coords)), factors)

    def to_json(self) -> List[float]:
        return list(self.log_coords)


def apply_diagonal(x: Lattice, a: DiagonalPoint) -> Lattice:
    """Scale coordinate i of every basis vector by e^(ℓ_i)"""
    if a.dim != x.dim:
        raise ValidationError(f"diagonal point has dimension {a.dim}, lattice has {x.dim}")
    if x.is_rational and a.factors is not None:
        return Lattice.rational([[v * f for v, f in zip(row, a.factors)] for row in x.exact])
    return Lattice(x.basis * np.exp(np.asarray(a.log_coords))[None, :])


@dataclass
class GeometricSchedule:
    """Temperature t0·ratio^i, floored at t_min"""

    t0: float = 0.05
    ratio: float = 0.995
    t_min: float = 1e-4

    def __call__(self, i: int) -> float:
        return max(self.t_min, self.t0 * self.ratio ** i)


@dataclass
class OrbitTrace:
    steps: List[Tuple[DiagonalPoint, float]]
    best: Tuple[DiagonalPoint, float]
    budget_used: int
    witness_rank: int
    divergence_warnings: List[Dict[str, Any]] = field(default_factory=list)
    chains: int = 1

    def to_json(self) -> Dict[str, Any]:
        point, value = self.best
        return {
            "best": {"log_coords": point.to_json(), "alpha": value},
            "budget_used": self.budget_used,
            "witness_rank": self.witness_rank,
            "divergence_warnings": self.divergence_warnings,
            "chains": self.chains,
            "steps": [{"log_coords": p.to_json(), "alpha": v} for p, v in self.steps],
        }


def _witness_direction(witness: SublatticeWitness, n: int) -> Optional[np.ndarray]:
    """diag(P_Λ) - (r/n)·1, or None when it vanishes"""
    r = witness.rank
    if r == 0 or r == n:
        return None
    q, _ = np.linalg.qr(np.asarray(witness.generators, dtype=float).T)
    g = np.sum(q * q, axis=1) - r / n
    return None if np.linalg.norm(g) < 1e-12 else g


class _Chain:
    """One annealing chain with its own stream and evaluation quota"""

    def __init__(self, x: Lattice, start: DiagonalPoint, quota: int, gen: np.random.Generator, schedule: Callable[[int], float]):
        self.x = x
        self.quota = quota
        self.gen = gen
        self.schedule = schedule
        self.used = 0
        self.steps: List[Tuple[DiagonalPoint, float]] = []
        self.warnings: List[Dict[str, Any]] = []
        self.current = start
        self.report: Optional[StabilityReport] = None
        self.best: Optional[Tuple[DiagonalPoint, float, int]] = None
        self.best_report: Optional[StabilityReport] = None

    def evaluate(self, point: DiagonalPoint) -> Optional[StabilityReport]:
        if self.used >= self.quota:
            return None
        self.used += 1
        report = alpha(apply_diagonal(self.x, point))
        self.steps.append((point, report.alpha))
        if self.best is None or report.alpha > self.best[1]:
            self.best = (point, report.alpha, report.witness.rank)
            self.best_report = report
        if report.alpha_by_rank[0] < DIVERGENCE_ALPHA1:
            self.warnings.append({"log_coords": point.to_json(), "alpha1": report.alpha_by_rank[0]})
        return report

    def _accept(self, point: DiagonalPoint, report: StabilityReport, i: int) -> bool:
        delta = report.alpha - self.report.alpha
        if delta >= 0 or self.gen.random() < math.exp(delta / self.schedule(i)):
            self.current, self.report = point, report
            return True
        return False

    def _line_search(self, direction: np.ndarray) -> Optional[Tuple[DiagonalPoint, StabilityReport]]:
        """Balancing step |Λ| → 1 along g, then golden-section refinement on [0, 1.5·step]"""
        witness = self.report.witness
        rate = float(np.dot(direction, np.sum(np.linalg.qr(witness.generators.T)[0] ** 2, axis=1)))
        if rate <= 0:
            return None
        step = -math.log(witness.covolume) / rate if witness.covolume < 1 else 0.5 / rate
        tried: List[Tuple[float, DiagonalPoint, StabilityReport]] = []

        def probe(s: float) -> float:
            point = self.current.moved(direction, s)
            report = self.evaluate(point)
            if report is None:
                return -math.inf
            tried.append((report.alpha, point, report))
            return report.alpha

        probe(step)
        lo, hi = 0.0, 1.5 * step
        c, d = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
        fc, fd = probe(c), probe(d)
        for _ in range(LINE_EVALS - 3):
            if fc >= fd:
                hi, d, fd = d, c, fc
                c = hi - GOLDEN * (hi - lo)
                fc = probe(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + GOLDEN * (hi - lo)
                fd = probe(d)
        if not tried:
            return None
        _, point, report = max(tried, key=lambda t: t[0])
        return point, report

    def run(self):
        self.report = self.evaluate(self.current)
        if self.report is None:
            return self
        n = self.x.dim
        i = 0
        while self.used < self.quota:
            direction = _witness_direction(self.report.witness, n)
            if direction is not None and self.gen.random() < 0.5:
                found = self._line_search(direction)
                if found is not None:
                    self._accept(found[0], found[1], i)
            else:
                noise = self.gen.normal(0.0, STEP_SIGMA, size=n)
                point = self.current.moved(noise - noise.mean(), 1.0)
                report = self.evaluate(point)
                if report is None:
                    break
                self._accept(point, report, i)
            if self.report.alpha_by_rank[0] < DIVERGENCE_ALPHA1 and self.best is not None:
                self.current = self.best[0]
                self.report = self.best_report
            i += 1
        return self


def search_max_alpha(
    x: Lattice,
    budget: int = 2000,
    seed: int = 0,
    schedule: Optional[Callable[[int], float]] = None,
    chains: int = DEFAULT_CHAINS,
    warm_start: Optional[DiagonalPoint] = None,
) -> OrbitTrace:
    """
    Maximize α(a·x) over the diagonal group

    Args:
        x: unimodular lattice
        budget: total number of α evaluations over all chains
        seed: master seed; chain j uses stream (seed, j)
        schedule: temperature as a function of the step index
        chains: number of independent chains
        warm_start: starting point of chain 0 (e.g. the best point of an earlier trace)

    Returns:
        OrbitTrace whose best value is a certified α of the best lattice found
    """
    check_alpha_cap(x, "search_max_alpha")
    if budget < 1 or chains < 1:
        raise ValidationError("budget and chains must be positive")
    if warm_start is not None and warm_start.dim != x.dim:
        raise ValidationError("warm start has the wrong dimension")
    schedule = schedule or GeometricSchedule()
    n = x.dim
    quotas = [budget // chains + (1 if j < budget % chains else 0) for j in range(chains)]

    def run(j: int) -> _Chain:
        start = warm_start if (j == 0 and warm_start is not None) else DiagonalPoint.identity(n)
        return _Chain(x, start, quotas[j], rng.stream(seed, "orbit.chain", j), schedule).run()

    done = [c for c in task_pool.map(run, range(chains)) if c.best is not None]
    winner = max(done, key=lambda c: (c.best[1], c.best[0].log_coords))
    steps = [s for c in done for s in c.steps]
    warnings = [w for c in done for w in c.warnings]
    if warnings:
        logger.warning("⚠️ alpha_1 fell below %.0e %d times; the orbit may be unbounded", DIVERGENCE_ALPHA1, len(warnings))
    point, value, rank = winner.best
    logger.info("✓ orbit search best alpha %.6f after %d evaluations", value, sum(c.used for c in done))
    return OrbitTrace(
        steps=steps,
        best=(point, value),
        budget_used=sum(c.used for c in done),
        witness_rank=rank,
        divergence_warnings=warnings,
        chains=chains,
    )


def uk_diagnostic(x: Lattice, epsilon: float, a: Optional[DiagonalPoint] = None) -> Dict[str, Any]:
    """
    Smallest k with dim_δ(a·x) = k for every δ in kε·{7/8, 1, 9/8}

    The three-point grid stands in for an open neighbourhood of kε, so the
    answer is flagged approximate.
    """
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    check_alpha_cap(x, "uk_diagnostic")
    y = apply_diagonal(x, a) if a is not None else x
    dims: Dict[str, List[int]] = {}
    found = None
    for k in range(1, y.dim + 1):
        deltas = [float(k * epsilon * f) for f in UK_OFFSETS]
        if deltas[-1] > y.dim + 1:
            break
        values = [delta_dimension(y, d) for d in deltas]
        dims[str(k)] = values
        if all(v == k for v in values):
            found = (k, deltas[0], deltas[-1])
            break
    return {
        "k": found[0] if found else None,
        "epsilon": epsilon,
        "delta_interval": [found[1], found[2]] if found else None,
        "dims": dims,
        "log_coords": a.to_json() if a is not None else [0.0] * x.dim,
        "approximate": True,
    }
