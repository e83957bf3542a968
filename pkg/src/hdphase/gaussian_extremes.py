"""Standard normal helpers and critical values for the max of d i.i.d. N(0, 1).

All tail powers ``Phi(t)^d`` are evaluated as ``exp(d * log Phi(t))`` with the
log taken from the complementary tail, so nothing underflows or cancels for
d up to ~1e15.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError


class Statistic(str, enum.Enum):
    ONE_SIDED = "one-sided-max"
    TWO_SIDED = "two-sided-max"


class Method(str, enum.Enum):
    EXACT = "exact"
    ASYMPTOTIC = "asymptotic"


def normal_cdf(x):
    return special.ndtr(x)


def normal_sf(x):
    """``1 - Phi(x)`` without cancellation for large x."""
    return special.ndtr(-np.asarray(x)) if np.ndim(x) else special.ndtr(-x)


def normal_logcdf(x):
    return special.log_ndtr(x)


def normal_logsf(x):
    """``log(1 - Phi(x))``; finite even where the tail itself underflows (x > ~38.5)."""
    return special.log_ndtr(-np.asarray(x)) if np.ndim(x) else special.log_ndtr(-x)


def normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise DomainError("normal_quantile needs p in the open interval (0, 1)")
    return special.ndtri(p)


def normal_isf(q):
    """Upper quantile: the x with ``1 - Phi(x) = q``."""
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0.0) & (q_arr < 1.0))):
        raise DomainError("normal_isf needs q in the open interval (0, 1)")
    return -special.ndtri(q)


def _check_d(d) -> int:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"dimension d must be a positive integer, got {d!r}")
    return int(d)


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class CriticalValue:
    d: int
    alpha: float
    value: float
    statistic: Statistic = Statistic.ONE_SIDED
    method: Method = Method.EXACT
    # asymptotic only: value = scale * sqrt(1 - a)
    scale: float | None = None
    a: float | None = None

    def __float__(self) -> float:
        return self.value


def per_column_level(d: int, alpha: float) -> float:
    """``1 - (1 - alpha)^{1/d}``, the non-exceedance complement each column needs."""
    return -math.expm1(math.log1p(-alpha) / d)


def max_critical_exact(d: int, alpha: float, statistic=Statistic.ONE_SIDED) -> CriticalValue:
    """Threshold whose exceedance by the Gaussian max is exactly ``alpha``.

    One-sided solves ``Phi(c)^d = 1 - alpha``; two-sided solves
    ``(2 Phi(c) - 1)^d = 1 - alpha``.
    """
    d = _check_d(d)
    alpha = _check_alpha(alpha)
    statistic = Statistic(statistic)
    q = per_column_level(d, alpha)
    if statistic is Statistic.ONE_SIDED:
        value = float(normal_isf(q))
    else:
        value = float(normal_isf(q / 2.0))
    return CriticalValue(d, alpha, value, statistic, Method.EXACT)


def max_critical_asymptotic(d: int, alpha: float, statistic=Statistic.ONE_SIDED) -> CriticalValue:
    """Gumbel-expansion critical value with the o(1) correction set to zero.

        c = b - ln(-ln(1 - alpha)) / b - (ln ln d + ln 4 pi) / (2 b),   b = sqrt(2 ln d)

    The two-sided variant substitutes 2d for d (max |Z_j| over d coordinates
    behaves like the max of 2d one-sided tails).
    """
    d = _check_d(d)
    alpha = _check_alpha(alpha)
    statistic = Statistic(statistic)
    if d < 3:
        raise DomainError(f"asymptotic critical value needs d >= 3, got {d}")
    eff = 2 * d if statistic is Statistic.TWO_SIDED else d
    log_d = math.log(eff)
    b = math.sqrt(2.0 * log_d)
    value = (
        b
        - math.log(-math.log1p(-alpha)) / b
        - (math.log(log_d) + math.log(4.0 * math.pi)) / (2.0 * b)
    )
    a = 1.0 - (value / b) ** 2
    return CriticalValue(d, alpha, value, statistic, Method.ASYMPTOTIC, scale=b, a=a)


def log_d_nonnegative_a(alpha: float) -> float:
    """``ln d0`` beyond which the implied ``a(d)`` of the expansion is >= 0.

    ``a(d) >= 0`` iff ``ln(-ln(1-alpha)) + (ln ln d + ln 4 pi) / 2 >= 0``, i.e.
    ``ln d >= 1 / (4 pi ln(1 - alpha)^2)``. Returned on the log scale since d0
    is astronomically large for the usual alphas.
    """
    alpha = _check_alpha(alpha)
    return 1.0 / (4.0 * math.pi * math.log1p(-alpha) ** 2)


def gaussian_max_exceed(d: int, t: float, statistic=Statistic.ONE_SIDED) -> float:
    """``P(max_j Z_j > t)`` (or ``P(max_j |Z_j| > t)``) for d i.i.d. standard normals."""
    d = _check_d(d)
    statistic = Statistic(statistic)
    t = float(t)
    if statistic is Statistic.ONE_SIDED:
        log_inside = float(special.log_ndtr(t))
    else:
        if t < 0:
            raise DomainError(f"two-sided exceedance needs t >= 0, got {t!r}")
        log_inside = math.log1p(-2.0 * float(special.ndtr(-t))) if t > 0 else -math.inf
    return -math.expm1(d * log_inside)
