"""Bayesian optimization of the two DBSCAN epsilons.

The objective is the number of good client clusters plus the number of
domain clusters (the latter discourages the trivial everything-in-one-
cluster solution).  A small deterministic loop drives it: seeded random
initial probes, then expected-improvement steps under a Gaussian-process
surrogate whose acquisition is maximized over seeded random candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .analysis import AnalysisContext, analyze
from .errors import ConfigError
from .mapping import GoodnessParams


@dataclass(frozen=True)
class ObjectivePoint:
    eps_clients: float
    eps_domains: float
    n_good: int
    n_domain_clusters: int

    @property
    def score(self) -> float:
        return float(self.n_good + self.n_domain_clusters)


@dataclass(frozen=True)
class OptimizerConfig:
    n_init: int = 5
    n_iter: int = 10
    bounds: tuple[float, float] = (0.01, 0.99)
    seed: int = 0
    n_candidates: int = 1000

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        if not (0.0 < lo < hi < 1.0):
            raise ConfigError(f"bounds must satisfy 0 < lo < hi < 1, got {self.bounds}")
        if self.n_init < 2:
            raise ConfigError("need at least 2 initial probes")
        if self.n_iter < 0:
            raise ConfigError("n_iter must be >= 0")


def objective(
    ctx: AnalysisContext,
    eps_clients: float,
    eps_domains: float,
    params: GoodnessParams = GoodnessParams(),
) -> ObjectivePoint:
    """Evaluate one epsilon pair; deterministic for fixed inputs."""
    result = analyze(ctx, eps_clients, eps_domains, params)
    return ObjectivePoint(
        eps_clients=eps_clients,
        eps_domains=eps_domains,
        n_good=result.n_good,
        n_domain_clusters=result.domain_clusters_unique.num_clusters,
    )


# Squared-exponential kernel; length scale chosen for a (0,1)^2 box.
_LENGTH_SCALE = 0.2
_NOISE = 1e-6


def gp_posterior(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_query: np.ndarray,
    length_scale: float = _LENGTH_SCALE,
    noise: float = _NOISE,
) -> tuple[np.ndarray, np.ndarray]:
    """Zero-mean GP posterior mean and variance at the query points.

    Signal variance is taken from the sample variance of y_train (floored
    so a constant objective still yields a well-posed system).
    """
    signal = max(float(np.var(y_train)), 1e-12)

    def kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        sq = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        return signal * np.exp(-sq / (2.0 * length_scale**2))

    k_tt = kernel(x_train, x_train) + noise * np.eye(len(x_train))
    k_qt = kernel(x_query, x_train)
    chol = np.linalg.cholesky(k_tt)
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y_train))
    mean = k_qt @ alpha
    v = np.linalg.solve(chol, k_qt.T)
    var = np.maximum(signal - (v**2).sum(axis=0), 0.0)
    return mean, var


def _norm_cdf(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(z / np.sqrt(2.0)))


def _norm_pdf(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)


def expected_improvement(mean: np.ndarray, var: np.ndarray, best: float) -> np.ndarray:
    std = np.sqrt(np.maximum(var, 1e-18))
    z = (mean - best) / std
    return (mean - best) * _norm_cdf(z) + std * _norm_pdf(z)


def optimize(
    ctx: AnalysisContext,
    cfg: OptimizerConfig = OptimizerConfig(),
    params: GoodnessParams = GoodnessParams(),
) -> tuple[ObjectivePoint, list[ObjectivePoint]]:
    """Run the BO loop; returns the best point (ties to the earliest) and the log."""
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.bounds

    log: list[ObjectivePoint] = []
    probes = rng.uniform(lo, hi, size=(cfg.n_init, 2))
    for eps_c, eps_d in probes:
        log.append(objective(ctx, float(eps_c), float(eps_d), params))

    for _ in range(cfg.n_iter):
        x = np.array([[p.eps_clients, p.eps_domains] for p in log])
        y = np.array([p.score for p in log])
        spread = float(y.std())
        y_std = (y - y.mean()) / spread if spread > 0 else np.zeros_like(y)
        candidates = rng.uniform(lo, hi, size=(cfg.n_candidates, 2))
        mean, var = gp_posterior(x, y_std, candidates)
        ei = expected_improvement(mean, var, float(y_std.max()))
        pick = candidates[int(np.argmax(ei))]
        log.append(objective(ctx, float(pick[0]), float(pick[1]), params))

    best = log[0]
    for p in log[1:]:
        if p.score > best.score:
            best = p
    return best, log
