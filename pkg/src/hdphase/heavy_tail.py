"""Symmetric heavy-tailed law with exactly ``m`` finite absolute moments.

The base law has cdf

    G_m(x) = 1/2 |x|^{-m} (ln|x| v 1)^{-2}        x <= -1
           = 1/2                                  -1 < x < 1
           = 1 - 1/2 x^{-m} (ln x v 1)^{-2}       x >= 1

and ``HeavyTailDistribution`` is its rescaling to unit variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

QUAD_TOL = 1e-10
ROOT_TOL = 1e-12
_NEWTON_MAX_ITER = 60


def check_tail_index(m: float) -> float:
    m = float(m)
    if not math.isfinite(m) or m <= 2.0:
        raise DomainError(f"tail index m must be a finite real > 2, got {m!r}")
    return m


def _as_output(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def tail_G(m: float, x):
    """Upper tail ``1 - G_m(x)``, computed as ``G_m(-x)`` to avoid cancellation."""
    if np.ndim(x) == 0:
        return cdf_G(m, -float(x))
    return cdf_G(m, -np.asarray(x, dtype=float))


def cdf_G(m: float, x):
    """The cdf ``G_m``; accepts scalars or arrays."""
    m = check_tail_index(m)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, 0.5)
    ax = np.abs(x)
    big = ax >= 1.0
    with np.errstate(divide="ignore", over="ignore"):
        ab = ax[big]
        t = 0.5 * ab ** (-m) / np.maximum(np.log(ab), 1.0) ** 2
    lo = x[big] <= -1.0
    out[big] = np.where(lo, t, 1.0 - t)
    return _as_output(out, scalar)


def tail_inverse(m: float, q, tol: float = ROOT_TOL) -> np.ndarray:
    """Solve ``1/2 x^{-m} (ln x v 1)^{-2} = q`` for ``x >= 1``, ``q`` in (0, 1/2].

    Closed form while the clamp binds (x <= e); beyond e, Newton on
    ``t = ln x`` for ``m t + 2 ln t = ln(1/(2q))``.
    """
    q = np.asarray(q, dtype=float)
    x = np.atleast_1d((2.0 * q) ** (-1.0 / m))
    qf = np.atleast_1d(q)
    far = qf < 0.5 * math.exp(-m)
    if np.any(far):
        x[far] = np.exp(_solve_log_root(m, -np.log(2.0 * qf[far]), tol))
    return x.reshape(q.shape)


def _solve_log_root(m: float, rhs: np.ndarray, tol: float) -> np.ndarray:
    # f(t) = m t + 2 ln t - rhs is increasing and concave with rhs >= m here.
    # t0 = rhs/m has f(t0) >= 0 and the fixed-point step t1 = (rhs - 2 ln t0)/m
    # has f(t1) <= 0 with t1 >= 1, so [t1, t0] brackets the root; Newton from
    # the left end of a concave increasing f climbs monotonically onto it.
    t = (rhs - 2.0 * np.log(rhs / m)) / m
    for _ in range(_NEWTON_MAX_ITER):
        step = (m * t + 2.0 * np.log(t) - rhs) / (m + 2.0 / t)
        t -= step
        if np.max(np.abs(step), initial=0.0) <= tol:
            break
    return t


def quantile_G(m: float, p, tol: float = ROOT_TOL):
    """Generalized inverse ``inf{x : G_m(x) >= p}`` for ``p`` in (0, 1).

    On the flat stretch the left endpoint is returned, so ``p = 0.5`` maps to -1.
    """
    m = check_tail_index(m)
    scalar = np.ndim(p) == 0
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DomainError("quantile_G needs p in the open interval (0, 1)")
    lower = p <= 0.5
    q = np.where(lower, p, 1.0 - p)
    x = tail_inverse(m, q, tol)
    x = np.where(lower, -x, x)
    return _as_output(x, scalar)


def sigma_squared(m: float, tol: float = QUAD_TOL) -> float:
    """Second moment of the base law, ``1 + 2 int_1^inf u^{1-m} (ln u v 1)^{-2} du``.

    The [1, e] piece is closed form; beyond e the substitution t = ln u leaves
    ``int_1^inf exp((2-m) t) t^{-2} dt``, integrated adaptively to ``tol``.
    """
    m = check_tail_index(m)
    if not tol > 0:
        raise DomainError(f"quadrature tolerance must be positive, got {tol!r}")
    near = math.expm1(2.0 - m) / (2.0 - m)
    far, _ = integrate.quad(
        lambda t: math.exp((2.0 - m) * t) / (t * t),
        1.0, math.inf, epsabs=tol / 4.0, epsrel=0.0, limit=500,
    )
    return 1.0 + 2.0 * (near + far)


def absolute_moment_check(m: float, tol: float = QUAD_TOL) -> float:
    """Quadrature of ``int |x|^m dG_m`` in layer-cake form; should equal 1 + 2m.

    Integrates ``1 + int_1^inf u^{-1} (ln(u)/m v 1)^{-2} du`` after s = ln u,
    split at the kink s = m.
    """
    m = check_tail_index(m)
    flat, _ = integrate.quad(lambda s: 1.0, 0.0, m, epsabs=tol, epsrel=0.0)
    decay, _ = integrate.quad(
        lambda s: (m / s) ** 2, m, math.inf, epsabs=tol, epsrel=0.0, limit=500
    )
    return 1.0 + flat + decay


def truncated_moment(m: float, power: float, cutoff: float) -> float:
    """``int_0^cutoff power u^{power-1} P(|X| > u) du`` for X ~ G_m.

    Diverges as cutoff grows whenever power > m.
    """
    m = check_tail_index(m)
    if cutoff <= 1.0:
        return cutoff**power
    total = 1.0

    def integrand(t):
        # u = e^t
        return power * math.exp((power - m) * t) / max(t, 1.0) ** 2

    log_cut = math.log(cutoff)
    for a, b in ((0.0, min(1.0, log_cut)), (1.0, log_cut)):
        if b > a:
            total += integrate.quad(integrand, a, b, limit=500)[0]
    return total


@dataclass(frozen=True)
class HeavyTailDistribution:
    """Unit-variance version ``P_m`` of the base law: X = Y / sigma, Y ~ G_m.

    ``sigma`` is computed once from quadrature when not given; passing it
    explicitly is only meant for fault-injection tests.
    """

    m: float
    sigma: float | None = None
    quadrature_tolerance: float = QUAD_TOL

    def __post_init__(self):
        object.__setattr__(self, "m", check_tail_index(self.m))
        if not self.quadrature_tolerance > 0:
            raise DomainError("quadrature_tolerance must be positive")
        if self.sigma is None:
            s2 = sigma_squared(self.m, self.quadrature_tolerance)
            object.__setattr__(self, "sigma", math.sqrt(s2))
        elif not self.sigma > 0:
            raise DomainError("sigma must be positive")

    @property
    def variance_base(self) -> float:
        return self.sigma**2

    @property
    def support_edge(self) -> float:
        """Smallest attainable |X|."""
        return 1.0 / self.sigma

    def cdf(self, x):
        return cdf_P(self, x)

    def sf(self, x):
        """``1 - F_m(x)`` without cancellation."""
        return cdf_P(self, -np.asarray(x, dtype=float)) if np.ndim(x) else cdf_P(self, -x)

    def quantile(self, p):
        return quantile_G(self.m, p) / self.sigma

    def mth_moment(self) -> float:
        """Closed form ``(1 + 2m) / sigma^m`` of ``E|X|^m``."""
        return (1.0 + 2.0 * self.m) / self.sigma**self.m

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return sample(self, rng, count)


def cdf_P(dist: HeavyTailDistribution, x):
    """cdf of the unit-variance law: ``G_m(sigma x)``."""
    if np.ndim(x) == 0:
        return cdf_G(dist.m, dist.sigma * float(x))
    return cdf_G(dist.m, dist.sigma * np.asarray(x, dtype=float))


def sample(dist: HeavyTailDistribution, rng: np.random.Generator, count) -> np.ndarray:
    """Inverse-transform draws ``quantile_G(m, U) / sigma``.

    ``count`` may be an int or a shape tuple.
    """
    u = rng.random(count)
    lower = u <= 0.5
    q = np.where(lower, u, 1.0 - u)
    # rng.random() is on [0, 1); map the u == 0 atom inside the open interval
    np.maximum(q, 2.0**-54, out=q)
    x = tail_inverse(dist.m, q)
    x /= dist.sigma
    np.negative(x, where=lower, out=x)
    return x


def unit_variance_quadrature(dist: HeavyTailDistribution, tol: float = QUAD_TOL) -> float:
    """``E X^2`` under ``dist`` via ``int_0^inf 2u P(|X| > u) du`` using ``cdf_P``.

    Independent of ``sigma_squared``; breakpoints at the support edge and at
    the kink ``e / sigma``.
    """
    return layer_cake_moment(dist, 2.0, tol)


def layer_cake_moment(dist: HeavyTailDistribution, power: float, tol: float = QUAD_TOL) -> float:
    """``E|X|^power`` under ``dist`` from its cdf, by quadrature in x-space.

    Only for ``0 < power < m``; at ``power >= m`` the moment is infinite or
    (at equality) the integrand decays too slowly for a truncated quadrature.
    """
    if not 0.0 < power < dist.m:
        raise DomainError(f"layer_cake_moment needs 0 < power < m, got {power!r}")
    s = dist.sigma

    def two_sided_tail(u):
        # P(|X| > u) = 2 F(-u) off the flat stretch, by symmetry
        return 2.0 * cdf_P(dist, -u) if u * s >= 1.0 else 1.0

    edge = 1.0 / s
    total = edge**power  # P(|X| > u) = 1 below the edge
    total += integrate.quad(
        lambda u: power * u ** (power - 1.0) * two_sided_tail(u),
        edge, math.e / s, epsabs=tol / 4, epsrel=1e-13, limit=500,
    )[0]
    # beyond the kink use u = e^t / s so the integrand decays like
    # exp(-(m - power) t); truncate once that factor is below 1e-18 or e^t
    # would overflow
    t_max = min(700.0 / max(power, 1.0), 1.0 + 41.5 / (dist.m - power))
    total += integrate.quad(
        lambda t: power * (math.exp(t) / s) ** power * two_sided_tail(math.exp(t) / s),
        1.0, t_max, epsabs=tol / 4, epsrel=1e-13, limit=1000,
    )[0]
    return total
