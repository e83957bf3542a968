"""Closed-form quantities around the dimension threshold d = n^{m/2 - 1}."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .heavy_tail import HeavyTailDistribution, check_tail_index


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    NEAR_CRITICAL = "near-critical"
    SUPERCRITICAL = "supercritical"


def phase_threshold(n: int, m: float) -> float:
    """The critical dimension ``n^{m/2 - 1}``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    m = check_tail_index(m)
    return float(n) ** (m / 2.0 - 1.0)


@dataclass(frozen=True)
class RegimeReport:
    n: int
    d: int
    m: float
    threshold_dim: float
    log_ratio: float
    regime: Regime
    epsilon_equivalent: float
    band: float


def classify_regime(n: int, d: int, m: float, band: float | None = None) -> RegimeReport:
    """Place (n, d) relative to the threshold on the log scale.

    ``log_ratio = ln d - (m/2 - 1) ln n``; the near-critical band defaults to
    ``0.5 ln n`` on either side.
    """
    if n < 2:
        raise DomainError(f"classify_regime needs n >= 2, got {n!r}")
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d!r}")
    m = check_tail_index(m)
    log_n = math.log(n)
    log_ratio = math.log(d) - (m / 2.0 - 1.0) * log_n
    band = 0.5 * log_n if band is None else float(band)
    if log_ratio > band:
        regime = Regime.SUPERCRITICAL
    elif log_ratio < -band:
        regime = Regime.SUBCRITICAL
    else:
        regime = Regime.NEAR_CRITICAL
    return RegimeReport(
        n=n, d=d, m=m, threshold_dim=phase_threshold(n, m), log_ratio=log_ratio,
        regime=regime, epsilon_equivalent=log_ratio / log_n, band=band,
    )


@dataclass(frozen=True)
class NagaevBound:
    """Lower bound on P(max_j S_nj > threshold) from the one-big-jump inequality.

    The inequality behind it only holds for n large enough (unquantified), so
    every value is an asymptotic statement; ``clamped`` records that the
    per-column term exceeded 1 and was cut back.
    """

    bound: float
    per_column_term: float
    clamped: bool
    asymptotic_only: bool = True


def _tail_scale(dist: HeavyTailDistribution, n: int, threshold: float) -> float:
    x = dist.sigma * threshold * math.sqrt(n)
    if not x >= 1.0:
        raise DomainError(
            f"sigma * threshold * sqrt(n) = {x:.6g} < 1: outside the tail region "
            "where the large-deviation bound applies"
        )
    return x


def nagaev_column_term(dist: HeavyTailDistribution, n: int, threshold: float) -> float:
    """``0.5 n (1 - F_m(threshold sqrt(n)))`` using the cdf of the law."""
    _tail_scale(dist, n, threshold)
    return 0.5 * n * dist.sf(threshold * math.sqrt(n))


def nagaev_column_term_explicit(dist: HeavyTailDistribution, n: int, threshold: float) -> float:
    """Same term from the closed form
    ``1 / (4 (sigma c)^m n^{m/2-1} [ln(sigma c sqrt n) v 1]^2)``."""
    x = _tail_scale(dist, n, threshold)
    m = dist.m
    return 1.0 / (
        4.0 * (dist.sigma * threshold) ** m * n ** (m / 2.0 - 1.0) * max(math.log(x), 1.0) ** 2
    )


def nagaev_size_lower_bound(dist: HeavyTailDistribution, n: int, d: int, threshold: float,
                            two_sided: bool = False) -> NagaevBound:
    """``1 - [max(0, 1 - 0.5 n (1 - F_m(t sqrt n)))]^d``.

    Each column sum satisfies ``F_{n,m}(t sqrt n) <= 1 - 0.5 n (1 - F_m(t sqrt n))``
    far enough in the tail, and the d columns are independent. For the
    max-abs statistic both tails contribute, doubling the per-column term.
    """
    if n < 1 or d < 1:
        raise DomainError("n and d must be positive integers")
    term = nagaev_column_term(dist, n, threshold) * (2.0 if two_sided else 1.0)
    clamped = term >= 1.0
    bound = 1.0 if clamped else -math.expm1(d * math.log1p(-term))
    return NagaevBound(bound=bound, per_column_term=term, clamped=clamped)


def e_minus_M_envelope(d: int, M: float) -> tuple[float, float]:
    """``((1 - M/d)^d, e^{-M})``."""
    if not 0 < M < d:
        raise DomainError(f"need 0 < M < d, got M={M!r}, d={d!r}")
    return math.exp(d * math.log1p(-M / d)), math.exp(-M)
