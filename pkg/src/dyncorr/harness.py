"""Seeded Monte Carlo experiment harness.

Each experiment sweeps a list of grid lengths, collects per-replication
estimates, and compares sample means against the deterministic expectation
formulas using a four-standard-error rule (false-failure probability about
6e-5 per check).  Consistency is asserted as a trend over the sweep, not as
absolute closeness at a single T, because the expectation ratio approaches
its target only logarithmically.

Replications are independent: replication ``i`` always uses the stream
``SeedSequence(master_seed, spawn_key=(i,))``, and aggregation runs in
replication order, so reports are byte-identical (runtime aside) for any
chunk size or worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bm, gbm
from .errors import DegenerateVariance, DomainError
from .profiles import CorrelationProfile, TimeGrid, build_profile
from .simulate import replication_rng, simulate_bm_batch

EXPERIMENTS = (
    "bm_consistency",
    "bm_variance_decay",
    "bm_bias_pq0",
    "gbm_consistency_v1",
    "gbm_consistency_v2",
    "gbm_variance_decay",
    "moment_checks",
    "exp_abs_bound",
)

_SE_RULE = 4.0


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run: sweep definition, estimator, seed.

    ``T_list`` must be nonempty and strictly ascending with ``t_eval`` no
    larger than its smallest entry.  ``profile`` and ``params`` may be None
    for the experiments that do not need them (exp_abs_bound needs neither;
    moment_checks needs only the profile).  ``chunk_size`` and ``n_jobs``
    control replication batching and never affect the statistics.
    """

    experiment: str
    profile: CorrelationProfile | None
    T_list: tuple
    t_eval: int
    reps: int
    params: object = None
    master_seed: int = 0
    chunk_size: int = 256
    n_jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}"
            )
        t_list = tuple(int(T) for T in self.T_list)
        if not t_list or any(a >= c for a, c in zip(t_list, t_list[1:])):
            raise DomainError("T_list must be nonempty and strictly ascending")
        object.__setattr__(self, "T_list", t_list)
        if not 1 <= self.t_eval <= t_list[0]:
            raise DomainError(
                f"t_eval={self.t_eval} must lie in 1..min(T_list)={t_list[0]}"
            )
        if self.reps < 2:
            raise DomainError("reps must be >= 2")
        if self.chunk_size < 1 or self.n_jobs < 1:
            raise DomainError("chunk_size and n_jobs must be >= 1")
        if self.profile is not None:
            object.__setattr__(
                self, "profile", build_profile(self.profile, TimeGrid(t_list[-1]))
            )

    def needs_bm_params(self) -> bool:
        return self.experiment in ("bm_consistency", "bm_variance_decay", "bm_bias_pq0")

    def needs_gbm_params(self) -> bool:
        return self.experiment in (
            "gbm_consistency_v1", "gbm_consistency_v2", "gbm_variance_decay",
        )


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one assertion with its observed/target numbers."""

    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class McReport:
    """Per-cell statistics, oracle values and assertion outcomes.

    ``cells`` is a tuple of plain dicts (one per (T, t) or parameter pair)
    with ``mean``/``var``/``se`` triples per statistic and any available
    oracle values; ``se = sqrt(var / n)``.  Everything except ``runtime_s``
    is deterministic in the config.
    """

    experiment: str
    master_seed: int
    cells: tuple
    checks: tuple
    runtime_s: float
    consistency_range: bool | None = None

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "master_seed": self.master_seed,
            "consistency_range": self.consistency_range,
            "cells": list(self.cells),
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
            "all_passed": self.all_passed,
            "runtime_s": self.runtime_s,
        }


def _stats(values: np.ndarray) -> dict:
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = float(values.mean())
    var = float(values.var(ddof=1)) if n > 1 else 0.0
    return {"mean": mean, "var": var, "se": math.sqrt(var / n), "n": n}


def _chunks(reps: int, chunk_size: int):
    return [(off, min(chunk_size, reps - off)) for off in range(0, reps, chunk_size)]


def _map_chunks(fn, chunks, n_jobs):
    """Apply fn over chunks, preserving order regardless of worker count."""
    if n_jobs == 1:
        return [fn(off, n) for off, n in chunks]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def _bm_replicates(config: ExperimentConfig, T: int):
    """Per-replication (gamma, sigma_x_sq, sigma_y_sq) arrays at t_eval."""
    grid = TimeGrid(T)
    t, params = config.t_eval, config.params

    def one(off, n):
        x, y = simulate_bm_batch(config.profile, grid, config.master_seed, n, off)
        return (
            bm.gamma_hat_bm(x, y, u=t, params=params),
            bm.sigma_sq_hat_bm(x, u=t, params=params),
            bm.sigma_sq_hat_bm(y, u=t, params=params),
        )

    parts = _map_chunks(one, _chunks(config.reps, config.chunk_size), config.n_jobs)
    g, sx, sy = (np.concatenate([p[i] for p in parts]) for i in range(3))
    return g, sx, sy


def _gbm_replicates(config: ExperimentConfig, T: int):
    """Per-replication (gamma, sigma_w_sq, sigma_u_sq) arrays at t_eval."""
    grid = TimeGrid(T)
    t, params = config.t_eval, config.params
    gamma_fn = gbm.gamma_hat_gbm_v1 if params.variant == "v1" else gbm.gamma_hat_gbm_v2

    def one(off, n):
        w, u = simulate_bm_batch(config.profile, grid, config.master_seed, n, off)
        return (
            gamma_fn(w, u, t=t, params=params),
            gbm.sigma_sq_hat_gbm(w, t=t, params=params),
            gbm.sigma_sq_hat_gbm(u, t=t, params=params),
        )

    parts = _map_chunks(one, _chunks(config.reps, config.chunk_size), config.n_jobs)
    g, sw, su = (np.concatenate([p[i] for p in parts]) for i in range(3))
    return g, sw, su


def _se_check(name: str, mc: dict, oracle: float, rule: float = _SE_RULE) -> CheckResult:
    oracle = float(oracle)
    gap = abs(mc["mean"] - oracle)
    tol = rule * mc["se"]
    return CheckResult(
        name, bool(gap <= tol),
        {"mc_mean": mc["mean"], "oracle": oracle, "gap": gap, "tol": tol},
    )


def _monotone_check(name: str, values, decreasing: bool = True) -> CheckResult:
    values = [float(v) for v in values]
    pairs = list(zip(values, values[1:]))
    ok = all(a > c for a, c in pairs) if decreasing else all(a < c for a, c in pairs)
    return CheckResult(name, ok or len(values) < 2, {"values": values})


def run_experiment(config: ExperimentConfig) -> McReport:
    """Run the configured experiment and return its report.

    Deterministic given the config (runtime field aside); simulation or
    estimation errors propagate annotated with the offending T.
    """
    start = time.perf_counter()
    if config.experiment == "exp_abs_bound":
        report = check_exp_abs_bound(
            (0.5, 1.0), config.T_list, config.reps, config.master_seed
        )
    elif config.experiment == "moment_checks":
        report = check_product_moments(
            config.profile, config.T_list, config.reps, config.master_seed
        )
    elif config.experiment.startswith("bm_"):
        report = _run_bm(config)
    else:
        report = _run_gbm(config)
    return McReport(
        experiment=config.experiment,
        master_seed=config.master_seed,
        cells=report.cells,
        checks=report.checks,
        runtime_s=time.perf_counter() - start,
        consistency_range=report.consistency_range,
    )


def _run_bm(config: ExperimentConfig) -> McReport:
    if not isinstance(config.params, bm.BmEstimatorParams):
        raise DomainError(f"{config.experiment} needs BmEstimatorParams")
    params, t = config.params, config.t_eval
    in_range = params.in_consistency_range()
    cells, checks = [], []
    for T in config.T_list:
        try:
            g, sx, sy = _bm_replicates(config, T)
        except Exception as exc:
            exc.args = (f"T={T}: {exc}",)
            raise
        rho = g / np.sqrt(sx * sy)
        oracle_g = bm.expected_gamma_bm(config.profile, t, params, T)
        oracle_s = bm.expected_sigma_sq_bm(t, params, T)
        cell = {
            "T": T, "t": t,
            "gamma_hat": _stats(g),
            "sigma_x_sq_hat": _stats(sx),
            "sigma_y_sq_hat": _stats(sy),
            "rho_hat": _stats(rho),
            "rho_hat_iqr": float(np.subtract(*np.percentile(rho, [75, 25]))),
            "oracle": {
                "expected_gamma": oracle_g,
                "expected_sigma_sq": oracle_s,
                "expected_ratio_q": oracle_g / oracle_s,
            },
        }
        cells.append(cell)
        if config.experiment != "bm_variance_decay":
            checks.append(_se_check(f"gamma_mean_vs_oracle_T{T}", cell["gamma_hat"], oracle_g))
            checks.append(
                _se_check(f"sigma_x_sq_mean_vs_oracle_T{T}", cell["sigma_x_sq_hat"], oracle_s)
            )
    rho_target = float(config.profile.rho(config.T_list[-1])[t - 1])
    if config.experiment == "bm_consistency":
        gaps = [abs(c["oracle"]["expected_ratio_q"] - rho_target) for c in cells]
        checks.append(_monotone_check("ratio_gap_decreasing", gaps))
        checks.append(
            _monotone_check("rho_hat_var_decreasing", [c["rho_hat"]["var"] for c in cells])
        )
    elif config.experiment == "bm_variance_decay":
        variances = [c["gamma_hat"]["var"] for c in cells]
        checks.append(_monotone_check("gamma_var_decreasing", variances))
        checks.append(CheckResult(
            "gamma_var_halved_endpoints",
            variances[-1] <= 0.5 * variances[0],
            {"first": variances[0], "last": variances[-1]},
        ))
    elif config.experiment == "bm_bias_pq0":
        last = cells[-1]
        delta = abs(last["oracle"]["expected_ratio_q"] - rho_target)
        checks.append(CheckResult(
            "oracle_gap_positive", delta > 0.0, {"delta": delta, "target": rho_target}
        ))
        mc = last["rho_hat"]
        gap = abs(mc["mean"] - rho_target)
        checks.append(CheckResult(
            "mc_mean_biased_beyond_3se",
            gap > 3.0 * mc["se"],
            {"mc_mean": mc["mean"], "target": rho_target, "gap": gap,
             "three_se": 3.0 * mc["se"]},
        ))
    return McReport(config.experiment, config.master_seed, tuple(cells),
                    tuple(checks), 0.0, in_range)


def _run_gbm(config: ExperimentConfig) -> McReport:
    if not isinstance(config.params, gbm.GbmEstimatorParams):
        raise DomainError(f"{config.experiment} needs GbmEstimatorParams")
    params, t = config.params, config.t_eval
    expected_variant = {"gbm_consistency_v1": "v1", "gbm_consistency_v2": "v2"}.get(
        config.experiment
    )
    if expected_variant and params.variant != expected_variant:
        raise DomainError(
            f"{config.experiment} requires variant {expected_variant!r}"
        )
    oracle_gamma = (
        gbm.expected_gamma_gbm_v1 if params.variant == "v1" else gbm.expected_gamma_gbm_v2
    )
    oracle_sigma = (
        gbm.expected_sigma_sq_gbm_v1 if params.variant == "v1"
        else gbm.expected_sigma_sq_gbm_v2
    )
    cells, checks = [], []
    for T in config.T_list:
        try:
            g, sw, su = _gbm_replicates(config, T)
        except Exception as exc:
            exc.args = (f"T={T}: {exc}",)
            raise
        valid = (sw > 0) & (su > 0)
        rho = g[valid] / np.sqrt(sw[valid] * su[valid])
        o_g = oracle_gamma(config.profile, t, params, T)
        o_s = oracle_sigma(t, params, T)
        try:
            o_ratio = gbm.expected_ratio_gbm(config.profile, t, params, T)
        except DegenerateVariance:
            # the second variant's expected variance can be negative at small T
            o_ratio = float("nan")
        cell = {
            "T": T, "t": t,
            "gamma_hat": _stats(g),
            "sigma_w_sq_hat": _stats(sw),
            "sigma_u_sq_hat": _stats(su),
            "rho_hat": _stats(rho) if rho.size > 1 else {"mean": float("nan"),
                                                         "var": 0.0, "se": 0.0,
                                                         "n": int(rho.size)},
            "rho_hat_iqr": (float(np.subtract(*np.percentile(rho, [75, 25])))
                            if rho.size > 1 else float("nan")),
            "n_invalid_variance": int(np.sum(~valid)),
            "oracle": {
                "expected_gamma": o_g,
                "expected_sigma_sq": o_s,
                "expected_ratio": o_ratio,
            },
        }
        cells.append(cell)
        if config.experiment != "gbm_variance_decay":
            checks.append(_se_check(f"gamma_mean_vs_oracle_T{T}", cell["gamma_hat"], o_g))
            checks.append(
                _se_check(f"sigma_w_sq_mean_vs_oracle_T{T}", cell["sigma_w_sq_hat"], o_s)
            )
    if config.experiment in ("gbm_consistency_v1", "gbm_consistency_v2",
                             "gbm_variance_decay"):
        checks.append(
            _monotone_check("rho_hat_iqr_decreasing", [c["rho_hat_iqr"] for c in cells])
        )
    return McReport(config.experiment, config.master_seed, tuple(cells),
                    tuple(checks), 0.0, params.in_consistency_range())


def _phi(x: float) -> float:
    """Standard normal CDF via the error function."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def check_exp_abs_bound(sigma_list, t_list, reps: int, seed: int) -> McReport:
    """Verify E(e^{sigma |W_t|}) against its bound and closed form.

    For every (sigma, t): the Monte Carlo mean must stay below the bound
    2 e^{sigma^2 t / 2} (1 + 3 relSE), and must match the exact value
    2 e^{sigma^2 t / 2} (1 - Phi(-sigma sqrt(t))) within four SE.
    """
    if reps < 2:
        raise DomainError("reps must be >= 2")
    cells, checks = [], []
    rng = replication_rng(seed, 0)
    for sigma in sigma_list:
        if sigma <= 0:
            raise DomainError(f"sigma must be positive, got {sigma!r}")
        for t in t_list:
            if t < 1:
                raise DomainError(f"t must be >= 1, got {t!r}")
            w = math.sqrt(t) * rng.standard_normal(reps)
            sample = np.exp(sigma * np.abs(w))
            mc = _stats(sample)
            bound = 2.0 * math.exp(0.5 * sigma * sigma * t)
            exact = bound * (1.0 - _phi(-sigma * math.sqrt(t)))
            rel_se = mc["se"] / mc["mean"]
            cells.append({
                "sigma": float(sigma), "t": int(t), "mc": mc,
                "oracle": {"bound": bound, "exact": exact},
            })
            checks.append(CheckResult(
                f"bound_holds_sigma{sigma}_t{t}",
                mc["mean"] <= bound * (1.0 + 3.0 * rel_se),
                {"mc_mean": mc["mean"], "bound": bound, "rel_se": rel_se},
            ))
            checks.append(_se_check(f"exact_value_sigma{sigma}_t{t}", mc, exact))
    return McReport("exp_abs_bound", seed, tuple(cells), tuple(checks), 0.0, None)


def check_product_moments(profile, t_list, reps: int, seed: int) -> McReport:
    """Verify the product-moment identities of a correlated pair.

    At each time t: E(X_t Y_t) = t rho_t and Var(X_t Y_t / t^2) =
    (1 + rho_t^2) / t^2, both within four standard errors (the variance SE
    uses the fourth-moment formula sqrt((m4 - var^2) / n)).
    """
    if reps < 2:
        raise DomainError("reps must be >= 2")
    t_list = tuple(int(t) for t in t_list)
    if not t_list or min(t_list) < 1:
        raise DomainError("t_list must be nonempty with entries >= 1")
    T = max(t_list)
    profile = build_profile(profile, TimeGrid(max(T, 2)))
    rho = profile.rho(max(T, 2))
    x, y = simulate_bm_batch(profile, TimeGrid(max(T, 2)), seed, reps)
    cells, checks = [], []
    for t in t_list:
        z = x[:, t - 1] * y[:, t - 1]
        mc = _stats(z)
        target_mean = float(t * rho[t - 1])
        scaled = z / (t * t)
        v = float(scaled.var(ddof=1))
        m4 = float(np.mean((scaled - scaled.mean()) ** 4))
        se_var = math.sqrt(max(m4 - v * v, 0.0) / reps)
        target_var = float(1.0 + rho[t - 1] ** 2) / (t * t)
        cells.append({
            "t": t, "product_mean": mc,
            "scaled_var": {"value": v, "se": se_var},
            "oracle": {"mean": target_mean, "scaled_var": target_var},
        })
        checks.append(_se_check(f"product_mean_t{t}", mc, target_mean))
        checks.append(CheckResult(
            f"scaled_var_t{t}",
            abs(v - target_var) <= _SE_RULE * se_var,
            {"mc_var": v, "oracle": target_var, "tol": _SE_RULE * se_var},
        ))
    return McReport("moment_checks", seed, tuple(cells), tuple(checks), 0.0, None)
