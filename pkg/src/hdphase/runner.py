"""Experiment orchestration: single runs, growth-rate sweeps, persistence, self-test."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from . import gaussian_extremes as gx
from .errors import DomainError
from .gaussian_extremes import Statistic
from .heavy_tail import HeavyTailDistribution, absolute_moment_check, layer_cake_moment, sigma_squared
from .monte_carlo import (
    DataLaw,
    Estimator,
    ExperimentConfig,
    McEstimate,
    derive_replication_seed,
    gaussian_term,
    simulate,
)
from .theory_bounds import (
    Regime,
    RegimeReport,
    classify_regime,
    e_minus_M_envelope,
    nagaev_column_term,
    nagaev_column_term_explicit,
    nagaev_size_lower_bound,
)

SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "m", "n", "d", "exponent", "alpha", "statistic", "estimator", "reps", "master_seed",
    "p_hat", "std_err", "ci_low", "ci_high", "gaussian_term", "gae", "nagaev_bound",
    "regime", "epsilon_equivalent", "elapsed_ms",
    "threshold", "data_law", "coefficient", "config_hash", "error",
]


@dataclass(frozen=True)
class ResultRow:
    config: ExperimentConfig
    estimate: McEstimate | None
    gaussian_term: float | None
    gae: float | None
    regime: RegimeReport | None
    nagaev_bound: float | None
    config_hash: str
    exponent: float | None = None
    coefficient: float | None = None
    error: str | None = None

    def fingerprint(self) -> tuple:
        """Everything except wall-clock time; equal for bit-identical reruns."""
        est = None if self.estimate is None else replace(self.estimate, elapsed=0.0)
        return (self.config, est, self.gaussian_term, self.gae, self.regime,
                self.nagaev_bound, self.config_hash, self.exponent, self.coefficient, self.error)

    def to_csv_row(self) -> dict:
        c, e, r = self.config, self.estimate, self.regime
        return {
            "m": c.m, "n": c.n, "d": c.d, "exponent": self.exponent, "alpha": c.alpha,
            "statistic": c.statistic.value, "estimator": c.estimator.value, "reps": c.reps,
            "master_seed": c.master_seed,
            "p_hat": e and e.p_hat, "std_err": e and e.std_err,
            "ci_low": e and e.ci_low, "ci_high": e and e.ci_high,
            "gaussian_term": self.gaussian_term, "gae": self.gae, "nagaev_bound": self.nagaev_bound,
            "regime": r and r.regime.value, "epsilon_equivalent": r and r.epsilon_equivalent,
            "elapsed_ms": e and e.elapsed * 1000.0,
            "threshold": e and e.threshold, "data_law": c.data_law.value,
            "coefficient": self.coefficient, "config_hash": self.config_hash, "error": self.error,
        }


def _nagaev_for(config: ExperimentConfig, threshold: float) -> float | None:
    if config.data_law is not DataLaw.HEAVY or not math.isfinite(threshold):
        return None
    dist = config.distribution()
    if dist.sigma * threshold * math.sqrt(config.n) < 1.0:
        return None
    two_sided = config.statistic is Statistic.TWO_SIDED
    return nagaev_size_lower_bound(dist, config.n, config.d, threshold, two_sided).bound


def run_experiment(config: ExperimentConfig, workers: int = 1, budget: int | None = None,
                   exponent: float | None = None, coefficient: float | None = None) -> ResultRow:
    """Estimate the size and attach the Gaussian term, GAE, regime and Nagaev bound."""
    try:
        est = simulate(config, workers=workers, budget=budget)
    except Exception as exc:
        raise type(exc)(f"[m={config.m} n={config.n} d={config.d} "
                        f"estimator={config.estimator.value}] {exc}") from exc
    g = gaussian_term(config, est.threshold)
    return ResultRow(
        config=config,
        estimate=est,
        gaussian_term=g,
        gae=est.p_hat - g,
        regime=classify_regime(config.n, config.d, config.m) if config.n >= 2 else None,
        nagaev_bound=_nagaev_for(config, est.threshold),
        config_hash=config.digest(),
        exponent=exponent,
        coefficient=coefficient,
    )


@dataclass(frozen=True)
class SweepSpec:
    """Grid of sample sizes times growth rules ``d = ceil(coefficient * n^exponent)``."""

    m: float
    alpha: float
    n_grid: tuple[int, ...]
    growth_rules: tuple[tuple[float, float], ...]
    estimator: Estimator = Estimator.COLUMN_POWER
    statistic: Statistic = Statistic.ONE_SIDED
    reps: int = 10_000
    master_seed: int = 0
    data_law: DataLaw = DataLaw.HEAVY

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("n_grid", tuple(int(n) for n in self.n_grid))
        set_("growth_rules", tuple((float(c), float(e)) for c, e in self.growth_rules))
        if not self.n_grid or not self.growth_rules:
            raise DomainError("n_grid and growth_rules must be nonempty")
        if any(n < 1 for n in self.n_grid):
            raise DomainError("n_grid entries must be positive")
        if any(c <= 0 or e <= 0 for c, e in self.growth_rules):
            raise DomainError("growth rule coefficients and exponents must be positive")
        set_("estimator", Estimator(self.estimator))
        set_("statistic", Statistic(self.statistic))
        set_("data_law", DataLaw(self.data_law))

    @classmethod
    def from_mapping(cls, raw: dict) -> "SweepSpec":
        raw = dict(raw)
        rules = raw.pop("growth_rules")
        rules = [(r["coefficient"], r["exponent"]) if isinstance(r, dict) else tuple(r) for r in rules]
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise DomainError(f"unknown sweep keys: {sorted(unknown)}")
        return cls(growth_rules=rules, **raw)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_grid"] = list(self.n_grid)
        out["growth_rules"] = [{"coefficient": c, "exponent": e} for c, e in self.growth_rules]
        for key in ("estimator", "statistic", "data_law"):
            out[key] = getattr(self, key).value
        return out


def load_sweep_spec(path, overrides: dict | None = None) -> SweepSpec:
    """Read a YAML sweep file; non-None ``overrides`` win over file values."""
    raw = yaml.safe_load(Path(path).read_text()) or {}
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return SweepSpec.from_mapping(raw)


def growth_dimension(n: int, coefficient: float, exponent: float) -> int:
    """``ceil(coefficient * n^exponent)``, ignoring float noise at exact integers."""
    x = coefficient * float(n) ** exponent
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * max(1.0, x):
        return max(1, int(nearest))
    return max(1, math.ceil(x))


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[ResultRow, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(r.error is None for r in self.rows)

    def fingerprint(self) -> tuple:
        return (self.spec, tuple(r.fingerprint() for r in self.rows))


def sweep_configs(spec: SweepSpec) -> list[tuple[ExperimentConfig, float, float]]:
    cells = []
    for n in spec.n_grid:
        for coefficient, exponent in spec.growth_rules:
            index = len(cells)
            cfg = ExperimentConfig(
                m=spec.m, n=n, d=growth_dimension(n, coefficient, exponent), alpha=spec.alpha,
                statistic=spec.statistic, data_law=spec.data_law, estimator=spec.estimator,
                reps=spec.reps, master_seed=derive_replication_seed(spec.master_seed, index),
            )
            cells.append((cfg, exponent, coefficient))
    return cells


def _run_cell(cell, budget):
    cfg, exponent, coefficient = cell
    try:
        return run_experiment(cfg, workers=1, budget=budget, exponent=exponent, coefficient=coefficient)
    except Exception as exc:  # recorded in-row; the sweep carries on
        return ResultRow(cfg, None, None, None, None, None, cfg.digest(),
                         exponent, coefficient, error=f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, workers: int = 1, budget: int | None = None) -> SweepResult:
    cells = sweep_configs(spec)
    if workers <= 1:
        rows = [_run_cell(c, budget) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda c: _run_cell(c, budget), cells))
    return SweepResult(spec, tuple(rows))


# -- persistence ---------------------------------------------------------------

def write_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in result.rows:
            writer.writerow(row.to_csv_row())


_CSV_INT = {"n", "d", "reps", "master_seed"}
_CSV_STR = {"statistic", "estimator", "regime", "data_law", "config_hash", "error"}


def read_csv(path) -> list[dict]:
    """Rows of a sweep CSV with numeric columns parsed; empty cells become None."""
    out = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for key, val in raw.items():
                if val == "":
                    row[key] = None
                elif key in _CSV_INT:
                    row[key] = int(val)
                elif key in _CSV_STR:
                    row[key] = val
                else:
                    row[key] = float(val)
            out.append(row)
    return out


def _row_to_json(row: ResultRow) -> dict:
    est = None
    if row.estimate is not None:
        est = asdict(row.estimate)
        est["estimator"] = row.estimate.estimator.value
    reg = None
    if row.regime is not None:
        reg = asdict(row.regime)
        reg["regime"] = row.regime.regime.value
    return {
        "config": row.config.to_dict(), "estimate": est, "gaussian_term": row.gaussian_term,
        "gae": row.gae, "regime": reg, "nagaev_bound": row.nagaev_bound,
        "config_hash": row.config_hash, "exponent": row.exponent,
        "coefficient": row.coefficient, "error": row.error,
    }


def _row_from_json(raw: dict) -> ResultRow:
    est = raw["estimate"]
    if est is not None:
        est = McEstimate(**{**est, "estimator": Estimator(est["estimator"])})
    reg = raw["regime"]
    if reg is not None:
        reg = RegimeReport(**{**reg, "regime": Regime(reg["regime"])})
    return ResultRow(
        config=ExperimentConfig(**raw["config"]), estimate=est,
        gaussian_term=raw["gaussian_term"], gae=raw["gae"], regime=reg,
        nagaev_bound=raw["nagaev_bound"], config_hash=raw["config_hash"],
        exponent=raw["exponent"], coefficient=raw["coefficient"], error=raw["error"],
    )


def sweep_to_json(result: SweepResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": result.spec.to_dict(),
        "rows": [_row_to_json(r) for r in result.rows],
    }


def write_json(result: SweepResult, path) -> None:
    Path(path).write_text(json.dumps(sweep_to_json(result), indent=2))


def read_json(path) -> SweepResult:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DomainError(f"unsupported schema_version {doc.get('schema_version')!r}")
    return SweepResult(
        SweepSpec.from_mapping(doc["spec"]),
        tuple(_row_from_json(r) for r in doc["rows"]),
    )


# -- self-test -----------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    deviation: float
    tolerance: float


@dataclass(frozen=True)
class SelfTestReport:
    m: float
    sigma: float
    mth_moment_P: float
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "m": self.m, "sigma": self.sigma, "mth_moment_P": self.mth_moment_P,
            "passed": self.passed, "checks": [asdict(c) for c in self.checks],
        }


def _check(name, deviation, tolerance) -> Check:
    return Check(name, bool(deviation <= tolerance), float(deviation), tolerance)


def self_test(m: float = 2.5, *, mc_reps: int = 4000, seed: int = 20240601,
              _sigma_override: float | None = None) -> SelfTestReport:
    """Run the identity checks. ``_sigma_override`` is a fault-injection hook for tests."""
    dist = HeavyTailDistribution(m, sigma=_sigma_override)
    sigma_ref = math.sqrt(sigma_squared(m))
    checks = []

    grid = (2.5, 3.0, 4.0, 6.0, 8.0)
    checks.append(_check("moment_identity_G",
                         max(abs(absolute_moment_check(k) - (1 + 2 * k)) for k in grid), 1e-6))
    checks.append(_check("unit_variance_P", abs(layer_cake_moment(dist, 2.0) - 1.0), 1e-8))
    moment_P = absolute_moment_check(m) / dist.sigma**m
    checks.append(_check("mth_moment_P", abs(moment_P / ((1 + 2 * m) / sigma_ref**m) - 1.0), 1e-8))

    worst = 0.0
    for d in (1, 10**2, 10**4, 10**6):
        for alpha in (0.01, 0.05, 0.1):
            for stat in Statistic:
                c = gx.max_critical_exact(d, alpha, stat).value
                worst = max(worst, abs(1.0 - gx.gaussian_max_exceed(d, c, stat) - (1.0 - alpha)))
    checks.append(_check("critical_value_forward", worst, 1e-12))

    checks.append(_check(
        "envelope_e_minus_M",
        max(abs(a / b - 1.0) for a, b in (e_minus_M_envelope(10**6, M) for M in (1, 5, 10))),
        1e-4,
    ))

    t = gx.max_critical_exact(10**5, 0.05).value
    checks.append(_check(
        "nagaev_two_paths",
        abs(nagaev_column_term(dist, 100, t) - nagaev_column_term_explicit(dist, 100, t)),
        1e-12,
    ))

    base = ExperimentConfig(m=m, n=20, d=50, reps=mc_reps, master_seed=seed)
    a = simulate(replace(base, estimator=Estimator.DIRECT))
    b = simulate(base)
    combined = math.hypot(a.std_err, b.std_err)
    checks.append(_check("estimator_agreement_in_se",
                         abs(a.p_hat - b.p_hat) / combined if combined > 0 else 0.0, 3.0))

    return SelfTestReport(m=m, sigma=dist.sigma, mth_moment_P=(1 + 2 * m) / dist.sigma**m,
                          checks=tuple(checks))
