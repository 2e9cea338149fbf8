"""
Invariant-measure formulas and Monte Carlo over random unimodular lattices.

Conventions: ζ(1) = 1, V_j = π^(j/2)/Γ(j/2+1), R(j) = j²V_j/ζ(j) and
B(n,k) = ∏_{j≤n} R(j) / (∏_{j≤k} R(j) ∏_{j≤n-k} R(j)), all in log space.

Two samplers exist. In dimension 2 the fundamental domain of SL_2(Z) is
sampled exactly from the hyperbolic measure. In higher dimensions a random
index-p sublattice of Z^n is rescaled to covolume 1 (p ≥ 10^7 prime), which
equidistributes as p grows but is only approximate; every report says which
sampler produced it.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln
from scipy.special import zeta as hurwitz_zeta
from scipy.stats import ks_2samp, special_ortho_group

from services import rng, settings
from services.errors import DimensionCapError, ValidationError
from services.lattice_core import Lattice
from services.reduction import enumerate_vectors, lll_reduce, shortest_vector
from services.stability import alpha_k, is_stable
from services.tasks import task_pool

logger = logging.getLogger(__name__)

EXACT_2D = "exact2d"
APPROX_ND = "approx_nd"
MIN_PRIME = 10**7
BATCH_SIZE = 128
Z95 = 1.959963984540054
GROWTH_RANGE = (10, 60)
EMPIRICAL_RANGE = (2, 60)
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


# ---------------------------------------------------------------------------
# Formula kernel
# ---------------------------------------------------------------------------

def zeta(s: float) -> float:
    """Riemann ζ(s) for s > 1, and 1 at s = 1"""
    if s < 1:
        raise ValidationError(f"zeta is only defined here for s ≥ 1, got {s}")
    if s == 1:
        return 1.0
    return float(hurwitz_zeta(s, 1))


def log_ball_volume(j: int) -> float:
    if j < 1:
        raise ValidationError(f"ball dimension must be ≥ 1, got {j}")
    return 0.5 * j * math.log(math.pi) - float(gammaln(0.5 * j + 1))


def ball_volume(j: int) -> float:
    """Volume of the unit ball in R^j"""
    return math.exp(log_ball_volume(j))


def log_R(j: int) -> float:
    return 2.0 * math.log(j) + log_ball_volume(j) - math.log(zeta(j))


@lru_cache(maxsize=256)
def _log_R_prefix(n: int) -> Tuple[float, ...]:
    """P[m] = Σ_{j≤m} ln R(j) for m = 0..n"""
    terms = [log_R(j) for j in range(1, n + 1)]
    return tuple(math.fsum(terms[:m]) for m in range(n + 1))


def log_rankin_B(n: int, k: int) -> float:
    if not 1 <= k <= n - 1:
        raise ValidationError(f"rankin_B needs 1 ≤ k ≤ n-1, got n={n}, k={k}")
    prefix = _log_R_prefix(n)
    small, large = sorted((k, n - k))
    return prefix[n] - (prefix[small] + prefix[large])


def rankin_B(n: int, k: int) -> float:
    """B(n,k); exactly symmetric under k ↔ n-k"""
    return math.exp(log_rankin_B(n, k))


def thunder_value(n: int, k: int, t: float) -> float:
    """B(n,k)·t^n/n"""
    if t <= 0:
        raise ValidationError(f"t must be positive, got {t}")
    return math.exp(log_rankin_B(n, k) + n * math.log(t) - math.log(n))


def t_threshold(n: int, k: int, c1: float) -> float:
    """(n/C1)^(k(n-k)/(2n))"""
    if c1 <= 0:
        raise ValidationError(f"C1 must be positive, got {c1}")
    return (n / c1) ** (k * (n - k) / (2.0 * n))


def _rankin_growth_value(n: int, k: int) -> float:
    """B(n,k)^(2/(k(n-k)))·n"""
    return math.exp(2.0 * log_rankin_B(n, k) / (k * (n - k))) * n


def rankin_growth_check(n_range: Sequence[int] = GROWTH_RANGE, c: float = 60.0, k_all: bool = True) -> Dict[str, Any]:
    """
    Check B(n,k) ≤ (C/n)^(k(n-k)/2) over a range of n

    Args:
        n_range: inclusive (n_min, n_max)
        c: the constant C
        k_all: scan every k (only k ≤ n/2 is evaluated; the rest follows by symmetry);
            otherwise k = 1 only

    Returns:
        report with max of B^(2/(k(n-k)))·n/C, its argmax and per-n maxima;
        the inequality holds on the range iff max ≤ 1
    """
    n_min, n_max = int(n_range[0]), int(n_range[1])
    if n_min < 2 or n_max < n_min:
        raise ValidationError(f"bad range {n_range}; need 2 ≤ n_min ≤ n_max")
    if c <= 0:
        raise ValidationError("C must be positive")
    best, argmax = -math.inf, None
    by_n: List[float] = []
    k_one: List[float] = []
    for n in range(n_min, n_max + 1):
        ks = range(1, n // 2 + 1) if k_all else [1]
        values = [(_rankin_growth_value(n, k) / c, k) for k in ks]
        top, k_top = max(values)
        by_n.append(top)
        k_one.append(values[0][0])
        if top > best:
            best, argmax = top, {"n": n, "k": k_top}
    return {
        "c": c,
        "n_range": [n_min, n_max],
        "max": best,
        "argmax": argmax,
        "holds": best <= 1.0,
        "by_n": by_n,
        "k1_slice": k_one,
    }


@lru_cache(maxsize=8)
def empirical_c(n_range: Tuple[int, int] = EMPIRICAL_RANGE) -> float:
    """Smallest C with B(n,k) ≤ (C/n)^(k(n-k)/2) on the whole range"""
    return rankin_growth_check(n_range, c=1.0)["max"]


def default_c1() -> Tuple[float, bool]:
    """(C1, empirical?) from GON_C1 or 10·C_empirical"""
    if settings.GON_C1 is not None:
        return float(settings.GON_C1), False
    return 10.0 * empirical_c(), True


def threshold_report(n: int, c1: Optional[float] = None) -> Dict[str, Any]:
    """
    Per-k thresholds t(n,k) and n·thunder_value(n,k,t_k), whose smallness
    bounds the measure of unstable lattices
    """
    if n < 2:
        raise ValidationError("need n ≥ 2")
    empirical = False
    if c1 is None:
        c1, empirical = default_c1()
    rows = []
    for k in range(1, n):
        t_k = t_threshold(n, k, c1)
        rows.append({"k": k, "t": t_k, "n_thunder": n * thunder_value(n, k, t_k)})
    return {
        "dim": n,
        "c1": c1,
        "c1_empirical": empirical,
        "rows": rows,
        "total": math.fsum(r["n_thunder"] for r in rows),
    }


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def _is_probable_prime(m: int) -> bool:
    if m < 2:
        return False
    for p in _MR_BASES:
        if m % p == 0:
            return m == p
    d, r = m - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        y = pow(a, d, m)
        if y in (1, m - 1):
            continue
        for _ in range(r - 1):
            y = y * y % m
            if y == m - 1:
                break
        else:
            return False
    return True


def next_prime(m: int) -> int:
    """Smallest prime ≥ m (deterministic Miller-Rabin, exact below 3·10^24)"""
    m = max(int(m), 2)
    while not _is_probable_prime(m):
        m += 1
    return m


def _random_rotation(n: int, gen: np.random.Generator) -> np.ndarray:
    return special_ortho_group.rvs(n, random_state=gen)


def _draw_2d(gen: np.random.Generator) -> Lattice:
    """Point of the fundamental domain under dx dy / y², as a unimodular basis"""
    while True:
        u = 1.0 - gen.random()
        y = (math.sqrt(3.0) / 2.0) / u
        x = gen.random() - 0.5
        if x * x + y * y >= 1.0:
            break
    s = 1.0 / math.sqrt(y)
    basis = np.array([[s, 0.0], [x * s, y * s]])
    return Lattice(basis @ _random_rotation(2, gen).T)


def _draw_prime(n: int, gen: np.random.Generator, prime_floor: int = MIN_PRIME) -> Lattice:
    """Random index-p sublattice {v ≡ c·(1, a) mod p} of Z^n rescaled to covolume 1"""
    p = next_prime(prime_floor + int(gen.integers(0, prime_floor)))
    a = gen.integers(0, p, size=n - 1)
    rows = [[1] + [int(v) for v in a]]
    for i in range(1, n):
        rows.append([p if j == i else 0 for j in range(n)])
    reduced = lll_reduce(Lattice.rational(rows))
    scale = float(p) ** (-(n - 1) / n)
    return Lattice(reduced.basis * scale @ _random_rotation(n, gen).T)


def _draw(n: int, gen: np.random.Generator, sampler: str, prime_floor: int = MIN_PRIME) -> Lattice:
    if sampler == EXACT_2D:
        return _draw_2d(gen)
    return _draw_prime(n, gen, prime_floor)


def sampler_for(n: int, sampler: Optional[str] = None) -> str:
    if sampler is None:
        return EXACT_2D if n == 2 else APPROX_ND
    if sampler not in (EXACT_2D, APPROX_ND):
        raise ValidationError(f"unknown sampler {sampler!r}")
    if sampler == EXACT_2D and n != 2:
        raise ValidationError("the exact sampler exists only in dimension 2")
    return sampler


def sample_lattice(n: int, seed: int = 0, index: int = 0, sampler: Optional[str] = None) -> Lattice:
    """
    Random unimodular lattice

    Args:
        n: dimension ≥ 2
        seed: master seed
        index: sample number within the seed's stream family
        sampler: "exact2d" (n = 2 only) or "approx_nd"; defaults by dimension
    """
    if n < 2:
        raise ValidationError("sample_lattice needs n ≥ 2")
    sampler = sampler_for(n, sampler)
    return _draw(n, rng.stream(seed, "measure.sample", n, index), sampler)


def _batches(samples: int) -> List[Tuple[int, int]]:
    return [(b, min(BATCH_SIZE, samples - b * BATCH_SIZE)) for b in range(math.ceil(samples / BATCH_SIZE))]


def _check_samples(samples: int):
    if samples <= 0:
        raise ValidationError("samples must be positive")


def _check_cap(n: int, operation: str):
    if n > settings.GON_ALPHA_DIM_CAP:
        raise DimensionCapError(operation, n, settings.GON_ALPHA_DIM_CAP)


# ---------------------------------------------------------------------------
# Monte Carlo estimates
# ---------------------------------------------------------------------------

@dataclass
class StableFractionReport:
    dim: int
    samples: int
    stable_count: int
    sampler: str
    seed: int

    @property
    def fraction(self) -> float:
        return self.stable_count / self.samples

    @property
    def standard_error(self) -> float:
        f = self.fraction
        return math.sqrt(f * (1.0 - f) / self.samples)

    @property
    def ci95(self) -> Tuple[float, float]:
        half = Z95 * self.standard_error
        return max(0.0, self.fraction - half), min(1.0, self.fraction + half)

    def to_json(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "samples": self.samples,
            "stable_count": self.stable_count,
            "fraction": self.fraction,
            "ci95": list(self.ci95),
            "sampler": self.sampler,
            "seed": self.seed,
        }


def estimate_stable_fraction(n: int, samples: int, seed: int = 0, sampler: Optional[str] = None) -> StableFractionReport:
    """
    Fraction of random unimodular lattices that are stable

    Batches are seeded by (seed, batch index) and run on the shared pool;
    the count is an order-independent sum, so the report is reproducible.
    """
    _check_samples(samples)
    sampler = sampler_for(n, sampler)
    _check_cap(n, "estimate_stable_fraction")

    def run(batch: Tuple[int, int]) -> int:
        index, count = batch
        gen = rng.stream(seed, "measure.stable", n, index)
        return sum(1 for _ in range(count) if is_stable(_draw(n, gen, sampler)))

    stable = sum(task_pool.map(run, _batches(samples)))
    report = StableFractionReport(dim=n, samples=samples, stable_count=stable, sampler=sampler, seed=seed)
    logger.info("✓ stable fraction n=%d: %d/%d (%s)", n, stable, samples, sampler)
    return report


def threshold_fraction(n: int, k: int, t: float, samples: int, seed: int = 0, sampler: Optional[str] = None) -> Dict[str, Any]:
    """
    Fraction of random lattices with α_k ≥ t, checked against the upper
    bound thunder_value(n,k,t) on the complement (3 standard errors slack)
    """
    _check_samples(samples)
    if not 1 <= k <= n - 1:
        raise ValidationError(f"k must lie in 1..{n - 1}")
    if t <= 0:
        raise ValidationError("t must be positive")
    sampler = sampler_for(n, sampler)
    _check_cap(n, "threshold_fraction")

    def run(batch: Tuple[int, int]) -> int:
        index, count = batch
        gen = rng.stream(seed, "measure.threshold", n, k, index)
        return sum(1 for _ in range(count) if alpha_k(_draw(n, gen, sampler), k)[0] >= t)

    hits = sum(task_pool.map(run, _batches(samples)))
    fraction = hits / samples
    se = math.sqrt(fraction * (1.0 - fraction) / samples)
    bound = thunder_value(n, k, t)
    complement = 1.0 - fraction
    holds = complement <= bound + 3.0 * se
    if not holds:
        logger.warning("⚠️ complement %.4g exceeds thunder bound %.4g + 3SE at n=%d k=%d t=%g", complement, bound, n, k, t)
    return {
        "dim": n,
        "k": k,
        "t": t,
        "samples": samples,
        "count": hits,
        "fraction": fraction,
        "complement": complement,
        "standard_error": se,
        "thunder_bound": bound,
        "bound_holds": holds,
        "sampler": sampler,
        "seed": seed,
    }


def primitive_count(x: Lattice, t: float) -> int:
    """Number of primitive vectors (both signs) of norm < t"""
    found = enumerate_vectors(x, t)
    if not len(found.coeffs):
        return 0
    mask = (found.norms < t) & (np.gcd.reduce(np.abs(found.coeffs), axis=1) == 1)
    return int(np.count_nonzero(mask))


def siegel_check(n: int, t: float, samples: int, seed: int = 0, sampler: Optional[str] = None) -> Dict[str, Any]:
    """
    Monte Carlo mean of the primitive-vector count below t

    The raw count includes both v and -v; its mean should equal Siegel's
    V_n t^n / ζ(n). In dimension 2 that is exactly thunder_value(2, 1, t).
    """
    _check_samples(samples)
    if t <= 0:
        raise ValidationError("t must be positive")
    sampler = sampler_for(n, sampler)

    def run(batch: Tuple[int, int]) -> int:
        index, count = batch
        gen = rng.stream(seed, "measure.siegel", n, index)
        return sum(primitive_count(_draw(n, gen, sampler), t) for _ in range(count))

    total = sum(task_pool.map(run, _batches(samples)))
    mean = total / samples
    expected = math.exp(log_ball_volume(n) + n * math.log(t)) / zeta(n)
    rel_error = abs(mean - expected) / expected
    return {
        "dim": n,
        "t": t,
        "samples": samples,
        "mean_count": mean,
        "mean_sign_pairs": mean / 2.0,
        "siegel_mean": expected,
        "thunder_value": thunder_value(n, 1, t),
        "rel_error": rel_error,
        "within_5pct": rel_error <= 0.05,
        "sampler": sampler,
        "seed": seed,
    }


def stable_fraction_quadrature_2d() -> Dict[str, Any]:
    """
    Stable fraction in dimension 2 by integrating dx dy / y² over the
    fundamental domain; stability there means y ≤ 1
    """
    stable, stable_err = integrate.dblquad(
        lambda y, x: 1.0 / (y * y), -0.5, 0.5, lambda x: math.sqrt(1.0 - x * x), lambda x: 1.0
    )
    total, total_err = integrate.dblquad(
        lambda y, x: 1.0 / (y * y), -0.5, 0.5, lambda x: math.sqrt(1.0 - x * x), lambda x: np.inf
    )
    return {
        "stable_measure": stable,
        "total_measure": total,
        "fraction": stable / total,
        "closed_form": 1.0 - 3.0 / math.pi,
        "abs_error": stable_err + total_err,
    }


def sampler_ks_diagnostic(n: int, samples: int, seed: int = 0) -> Dict[str, Any]:
    """Two-sample K-S distance between shortest-vector lengths under two prime ranges"""
    _check_samples(samples)
    if n < 2:
        raise ValidationError("need n ≥ 2")
    floors = (MIN_PRIME, 10 * MIN_PRIME)

    def lengths(floor: int) -> np.ndarray:
        def run(batch: Tuple[int, int]) -> List[float]:
            index, count = batch
            gen = rng.stream(seed, "measure.ks", n, floor, index)
            return [shortest_vector(_draw_prime(n, gen, floor)).length for _ in range(count)]

        return np.concatenate([np.asarray(v) for v in task_pool.map(run, _batches(samples))])

    first, second = lengths(floors[0]), lengths(floors[1])
    result = ks_2samp(first, second)
    return {
        "dim": n,
        "samples": samples,
        "prime_floors": list(floors),
        "statistic": float(result.statistic),
        "pvalue": float(result.pvalue),
        "passes": float(result.statistic) < 0.05,
        "seed": seed,
    }
