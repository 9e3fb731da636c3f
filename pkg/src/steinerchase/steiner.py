"""Steiner point estimators driven by support-function oracles.

The Steiner point of a convex body equals dimension times the average over
unit directions of direction * support(direction). The Monte-Carlo estimator
draws enough directions that, with support queries answered to accuracy
eps / dimension, the estimate lands within eps of the true point in
expectation (up to the 1 + sqrt(delta) factor) and within 2 eps with
probability at least 1 - delta.

``support`` may be any callable direction -> value; objects exposing a
``support_batch(thetas)`` method (such as ``SupportCache``) are queried in
vectorized chunks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Ball, sample_unit_sphere_batch

DEFAULT_SAMPLE_CAP = 10_000_000
_CHUNK = 65536


class OracleBudgetExceeded(RuntimeError):
    """The estimator would need more support queries than the cap allows."""

    def __init__(self, message: str, required: int = 0, cap: int = 0):
        super().__init__(message)
        self.required = required
        self.cap = cap


@dataclass
class SteinerQuery:
    """One Monte-Carlo Steiner point estimation task.

    ``bounding_radius`` must bound the body's extent around the origin of the
    support evaluations; ``eps``/``delta`` set the accuracy/confidence target;
    ``sample_cap`` (None disables) guards the query budget.
    """

    support: object
    dimension: int
    bounding_radius: float
    eps: float
    delta: float
    rng: np.random.Generator
    sample_cap: int | None = DEFAULT_SAMPLE_CAP

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if not self.bounding_radius > 0.0:
            raise ValueError("bounding_radius must be positive")


def required_samples(query: SteinerQuery) -> int:
    """Number of direction samples the accuracy/confidence target demands."""
    d = query.dimension
    num = (d + 1) ** 2 * query.bounding_radius ** 2
    return int(math.ceil(num / (query.eps ** 2 * query.delta)))


def estimate_steiner(query: SteinerQuery) -> np.ndarray:
    """Monte-Carlo Steiner point estimate; raises OracleBudgetExceeded when
    the required sample count passes the cap."""
    n = required_samples(query)
    cap = query.sample_cap
    if cap is not None and n > cap:
        raise OracleBudgetExceeded(
            f"estimator needs {n} support queries, cap is {cap}",
            required=n, cap=cap)
    d = query.dimension
    batch = getattr(query.support, "support_batch", None)
    acc = np.zeros(d)
    done = 0
    while done < n:
        take = min(_CHUNK, n - done)
        thetas = sample_unit_sphere_batch(d, take, query.rng)
        if batch is not None:
            vals = np.asarray(batch(thetas), dtype=np.float64)
        else:
            vals = np.empty(take)
            for i in range(take):
                vals[i] = query.support(thetas[i])
        acc += thetas.T @ vals
        done += take
    return (d / n) * acc


def quadrature_steiner_2d(support, resolution: int = 20000) -> np.ndarray:
    """Deterministic planar Steiner point via midpoint quadrature in angle.

    ``resolution`` is the number of angular nodes (at least 10000 for the
    high-accuracy regime the ideal chaser variant relies on).
    """
    m = int(resolution)
    if m < 4:
        raise ValueError("resolution too small")
    ang = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
    thetas = np.ascontiguousarray(np.stack([np.cos(ang), np.sin(ang)], axis=1))
    batch = getattr(support, "support_batch", None)
    if batch is not None:
        vals = np.asarray(batch(thetas), dtype=np.float64)
    else:
        vals = np.array([support(thetas[i]) for i in range(m)])
    return (2.0 / m) * (thetas.T @ vals)


def exact_steiner_ball(ball: Ball) -> np.ndarray:
    """Steiner point of a ball is its center."""
    return ball.center.copy()
