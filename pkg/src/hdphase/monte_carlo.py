"""Monte Carlo estimates of P(max_j S_nj > t) under heavy-tailed or Gaussian data.

Two estimators:

* ``direct`` draws the whole n x d array per replication and takes the max of
  the d normalized column sums.
* ``column-power`` uses independence of the coordinates: with p1 the
  probability that a single column stays at or below t,
  ``P(max_j S_nj <= t) = p1^d``, so only single columns are simulated.

Replications are grouped in fixed blocks of ``REPS_PER_BLOCK``; block ``b``
draws from a PCG64 stream seeded by ``derive_replication_seed(master_seed, b)``.
Blocks reduce by summing integer exceedance counts, so estimates do not depend
on the number of workers.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BudgetExceededError, DomainError
from .gaussian_extremes import Statistic, gaussian_max_exceed, max_critical_exact, normal_isf
from .heavy_tail import HeavyTailDistribution, check_tail_index, sample

REPS_PER_BLOCK = 4096
CHUNK_DRAWS = 1 << 20
DEFAULT_DRAW_BUDGET = 2_000_000_000
BUDGET_ENV = "HDPHASE_DRAW_BUDGET"
DEFAULT_CONFIDENCE = 0.99

_MASK64 = (1 << 64) - 1


class DataLaw(str, enum.Enum):
    HEAVY = "heavy-tail"
    GAUSSIAN = "standard-gaussian"


class Estimator(str, enum.Enum):
    DIRECT = "direct"
    COLUMN_POWER = "column-power"


def _positive_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise DomainError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """One size experiment. ``threshold=None`` means the exact critical value."""

    m: float
    n: int
    d: int
    alpha: float = 0.05
    statistic: Statistic = Statistic.ONE_SIDED
    threshold: float | None = None
    data_law: DataLaw = DataLaw.HEAVY
    estimator: Estimator = Estimator.COLUMN_POWER
    reps: int = 10_000
    master_seed: int = 0
    confidence: float = DEFAULT_CONFIDENCE

    def __post_init__(self):
        set_ = functools.partial(object.__setattr__, self)
        set_("m", check_tail_index(self.m))
        for name in ("n", "d", "reps"):
            set_(name, _positive_int(name, getattr(self, name)))
        if not 0.0 < float(self.alpha) < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        set_("alpha", float(self.alpha))
        if not 0.0 < float(self.confidence) < 1.0:
            raise DomainError(f"confidence must lie in (0, 1), got {self.confidence!r}")
        set_("statistic", Statistic(self.statistic))
        set_("data_law", DataLaw(self.data_law))
        set_("estimator", Estimator(self.estimator))
        if self.threshold is not None:
            if math.isnan(float(self.threshold)):
                raise DomainError("threshold must not be NaN")
            set_("threshold", float(self.threshold))
        if isinstance(self.master_seed, bool) or int(self.master_seed) != self.master_seed \
                or not 0 <= self.master_seed <= _MASK64:
            raise DomainError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed!r}")
        set_("master_seed", int(self.master_seed))

    def resolved_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return max_critical_exact(self.d, self.alpha, self.statistic).value

    def distribution(self) -> HeavyTailDistribution:
        return heavy_tail_distribution(self.m)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("statistic", "data_law", "estimator"):
            out[key] = out[key].value
        return out

    def digest(self) -> str:
        """SHA-256 over the canonical JSON of every field."""
        blob = json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)
        return hashlib.sha256(blob.encode()).hexdigest()


@functools.lru_cache(maxsize=None)
def heavy_tail_distribution(m: float) -> HeavyTailDistribution:
    """Process-wide cached instance so a run uses a single sigma per m."""
    return HeavyTailDistribution(m)


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    ci_low: float
    ci_high: float
    reps: int
    master_seed: int
    elapsed: float
    threshold: float
    estimator: Estimator
    exceed_count: int
    # column-power diagnostics: estimated single-column exceedance probability
    p_col: float | None = None
    degenerate: bool = False

    @property
    def p_one(self) -> float | None:
        """Estimated probability that one column stays at or below the threshold."""
        return None if self.p_col is None else 1.0 - self.p_col


def wilson_interval(successes: float, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    z = float(normal_isf((1.0 - confidence) / 2.0))
    p = successes / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (p + z2n / 2.0) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / denom
    return max(0.0, min(p, center - half)), min(1.0, max(p, center + half))


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fmix64(z: int) -> int:
    z ^= z >> 33
    z = (z * 0xFF51AFD7ED558CCD) & _MASK64
    z ^= z >> 33
    z = (z * 0xC4CEB9FE1A85EC53) & _MASK64
    return z ^ (z >> 33)


def derive_replication_seed(master_seed: int, replication_index: int) -> int:
    """Stateless 64-bit mix of (master seed, index) into a stream seed."""
    return _splitmix64(_splitmix64(master_seed & _MASK64) ^ _fmix64(replication_index & _MASK64))


def draw_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(float(raw)) if raw else DEFAULT_DRAW_BUDGET


def _check_budget(draws: int, budget: int | None, hint: str) -> None:
    budget = draw_budget() if budget is None else budget
    if draws > budget:
        raise BudgetExceededError(
            f"{draws:.3g} coordinate draws exceed the budget of {budget:.3g}; {hint}"
        )


def _draw(law: DataLaw, dist, rng: np.random.Generator, shape) -> np.ndarray:
    if law is DataLaw.GAUSSIAN:
        return rng.standard_normal(shape)
    return sample(dist, rng, shape)


def _reduce(sums: np.ndarray, statistic: Statistic) -> np.ndarray:
    if statistic is Statistic.TWO_SIDED:
        return np.abs(sums).max(axis=-1)
    return sums.max(axis=-1)


def max_statistics(law: DataLaw, dist, statistic: Statistic, n: int, d: int,
                   rng: np.random.Generator, reps: int) -> np.ndarray:
    """``reps`` draws of max_j S_nj (or max_j |S_nj|) with S_n = n^{-1/2} sum_i X_i.

    Memory stays within ~``CHUNK_DRAWS`` coordinates: small problems are
    batched across replications, large ones accumulate the d column sums over
    row chunks.
    """
    out = np.empty(reps)
    per_rep = n * d
    if per_rep <= CHUNK_DRAWS:
        batch = max(1, CHUNK_DRAWS // per_rep)
        for start in range(0, reps, batch):
            b = min(batch, reps - start)
            sums = _draw(law, dist, rng, (b, n, d)).sum(axis=1)
            out[start:start + b] = _reduce(sums, statistic)
    else:
        rows = max(1, CHUNK_DRAWS // d)
        for r in range(reps):
            acc = np.zeros(d)
            for i0 in range(0, n, rows):
                acc += _draw(law, dist, rng, (min(rows, n - i0), d)).sum(axis=0)
            out[r] = _reduce(acc, statistic)
    return out / math.sqrt(n)


def _block_counts(config: ExperimentConfig, d: int, thresholds: np.ndarray, block: int) -> np.ndarray:
    start = block * REPS_PER_BLOCK
    reps = min(REPS_PER_BLOCK, config.reps - start)
    rng = np.random.Generator(np.random.PCG64(derive_replication_seed(config.master_seed, block)))
    dist = config.distribution() if config.data_law is DataLaw.HEAVY else None
    stats = np.sort(max_statistics(config.data_law, dist, config.statistic, config.n, d, rng, reps))
    return reps - np.searchsorted(stats, thresholds, side="right")


def _exceed_counts(config: ExperimentConfig, d: int, thresholds: np.ndarray, workers: int) -> np.ndarray:
    blocks = range(math.ceil(config.reps / REPS_PER_BLOCK))
    job = functools.partial(_block_counts, config, d, thresholds)
    if workers <= 1:
        parts = list(map(job, blocks))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, blocks))
    return np.sum(parts, axis=0, dtype=np.int64)


def _direct_estimate(config, threshold, count, elapsed) -> McEstimate:
    reps = config.reps
    p_hat = count / reps
    lo, hi = wilson_interval(count, reps, config.confidence)
    return McEstimate(
        p_hat=p_hat, std_err=math.sqrt(p_hat * (1.0 - p_hat) / reps), ci_low=lo, ci_high=hi,
        reps=reps, master_seed=config.master_seed, elapsed=elapsed, threshold=threshold,
        estimator=Estimator.DIRECT, exceed_count=int(count),
    )


def _size_from_column(p_col: float, d: int) -> float:
    return -math.expm1(d * math.log1p(-p_col)) if p_col < 1.0 else 1.0


def _column_estimate(config, threshold, count, elapsed) -> McEstimate:
    reps, d = config.reps, config.d
    p_col = count / reps
    p_one = 1.0 - p_col
    degenerate = count in (0, reps)
    if count == 0:
        # rule of three: p_col <= 3 / reps at ~95% confidence
        lo, hi = 0.0, _size_from_column(min(1.0, 3.0 / reps), d)
        std_err = 0.0
    elif count == reps:
        lo, hi, std_err = 1.0, 1.0, 0.0
    else:
        se_one = math.sqrt(p_col * p_one / reps)
        std_err = d * math.exp((d - 1) * math.log(p_one)) * se_one
        c_lo, c_hi = wilson_interval(count, reps, config.confidence)
        lo, hi = _size_from_column(c_lo, d), _size_from_column(c_hi, d)
    p_hat = _size_from_column(p_col, d)
    return McEstimate(
        p_hat=p_hat, std_err=std_err, ci_low=min(lo, p_hat), ci_high=max(hi, p_hat),
        reps=reps, master_seed=config.master_seed, elapsed=elapsed, threshold=threshold,
        estimator=Estimator.COLUMN_POWER, exceed_count=int(count), p_col=p_col,
        degenerate=degenerate,
    )


def simulate_thresholds(config: ExperimentConfig, thresholds, workers: int = 1,
                        budget: int | None = None) -> list[McEstimate]:
    """Estimates for several thresholds evaluated on one shared set of draws."""
    thresholds = np.asarray(thresholds, dtype=float).reshape(-1)
    if np.any(np.isnan(thresholds)):
        raise DomainError("thresholds must not be NaN")
    if config.estimator is Estimator.DIRECT:
        _check_budget(config.n * config.d * config.reps, budget,
                      "use the column-power estimator instead")
        d_sim, build = config.d, _direct_estimate
    else:
        _check_budget(config.n * config.reps, budget, "reduce reps or n")
        d_sim, build = 1, _column_estimate
    t0 = time.perf_counter()
    counts = _exceed_counts(config, d_sim, thresholds, workers)
    elapsed = time.perf_counter() - t0
    return [build(config, float(t), int(c), elapsed) for t, c in zip(thresholds, counts)]


def simulate_direct(config: ExperimentConfig, workers: int = 1, budget: int | None = None) -> McEstimate:
    if config.estimator is not Estimator.DIRECT:
        raise DomainError("simulate_direct needs estimator='direct'")
    return simulate_thresholds(config, [config.resolved_threshold()], workers, budget)[0]


def simulate_column_power(config: ExperimentConfig, workers: int = 1, budget: int | None = None) -> McEstimate:
    if config.estimator is not Estimator.COLUMN_POWER:
        raise DomainError("simulate_column_power needs estimator='column-power'")
    return simulate_thresholds(config, [config.resolved_threshold()], workers, budget)[0]


def simulate(config: ExperimentConfig, workers: int = 1, budget: int | None = None) -> McEstimate:
    """Dispatch on ``config.estimator``."""
    return simulate_thresholds(config, [config.resolved_threshold()], workers, budget)[0]


@dataclass(frozen=True)
class GaeEstimate:
    """Estimated size minus the exact Gaussian exceedance at the same threshold."""

    gae: float
    std_err: float
    gaussian_term: float
    estimate: McEstimate = field(repr=False)


def gaussian_term(config: ExperimentConfig, threshold: float | None = None) -> float:
    t = config.resolved_threshold() if threshold is None else threshold
    if config.statistic is Statistic.TWO_SIDED and t < 0:
        return 1.0
    return gaussian_max_exceed(config.d, t, config.statistic)


def gae_at_threshold(config: ExperimentConfig, workers: int = 1, budget: int | None = None) -> GaeEstimate:
    est = simulate(config, workers, budget)
    g = gaussian_term(config, est.threshold)
    return GaeEstimate(gae=est.p_hat - g, std_err=est.std_err, gaussian_term=g, estimate=est)
