"""Work-function oracles over a prefix of half-space requests.

The work function after t requests maps a point x to the cheapest total
movement of any trajectory that starts at the configured start point, serves
requests 1..t in order, and ends at x. This module wraps the certified
solvers into three queries:

* ``value(x)``      evaluate the work function at a point,
* ``minimum()``     its global minimum (no terminal pin),
* ``support(...)``  support value of a sublevel set {w <= budget} in a
                    direction, computed over budget-constrained trajectories.

``SupportCache`` amortizes support queries for one fixed budget: a batch of
anchor directions is solved exactly once, every solved trajectory yields an
inner ball of the sublevel set (endpoint of the served chain, radius = budget
minus chain cost), and point queries reduce to a max over balls (or angular
interpolation of anchor values in dimension two). Cached values never stray
far from the truth: they are exact at anchor directions up to the recorded
solver gaps, inner everywhere in ball mode, and auditable against the exact
solver via ``audit``.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .geometry import HalfSpace, as_vector, sample_unit_sphere_batch
from .solver import (ACCURACY_NOT_REACHED, INFEASIBLE, OPTIMAL, SolveResult,
                     SupportProblem, TrajectoryProblem, solve_min_movement,
                     solve_support)

_DEFAULT_CACHE_SEED = 271828182845


class AccuracyNotReached(RuntimeError):
    """A certified solve could not close its duality gap to the tolerance."""

    def __init__(self, message: str, value: float = np.nan, gap: float = np.nan):
        super().__init__(message)
        self.value = value
        self.gap = gap


class BudgetInfeasible(RuntimeError):
    """The requested sublevel set is certifiably empty (min value > budget)."""

    def __init__(self, message: str, lower_bound: float = np.nan, budget: float = np.nan):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.budget = budget


class WorkFunctionOracle:
    """Immutable view of the work function after a prefix of requests.

    ``extend`` returns a new oracle with one more request; existing oracles
    stay valid. Tolerances default to 1e-6 on the natural scale of the query.
    """

    def __init__(self, requests=(), start=None, dimension: int | None = None):
        reqs = tuple(requests)
        if reqs:
            d = reqs[0].dimension
            for h in reqs:
                if not isinstance(h, HalfSpace):
                    raise TypeError("requests must be HalfSpace instances")
                if h.dimension != d:
                    raise ValueError("mixed-dimension requests")
        elif start is not None:
            d = np.asarray(start).shape[0]
        elif dimension is not None:
            d = int(dimension)
        else:
            raise ValueError("empty oracle needs start or dimension")
        self._requests = reqs
        self._start = np.zeros(d) if start is None else as_vector(start, dim=d)
        self._dim = d

    @property
    def requests(self) -> tuple[HalfSpace, ...]:
        return self._requests

    @property
    def start(self) -> np.ndarray:
        return self._start.copy()

    @property
    def dimension(self) -> int:
        return self._dim

    @property
    def length(self) -> int:
        return len(self._requests)

    def extend(self, request: HalfSpace) -> "WorkFunctionOracle":
        if request.dimension != self._dim:
            raise ValueError("request dimension mismatch")
        return WorkFunctionOracle(self._requests + (request,), start=self._start)

    def _default_eps(self, scale: float) -> float:
        return 1e-6 * max(1.0, scale)

    def value(self, x, eps: float | None = None, max_iter: int = 1_000_000) -> float:
        """Work-function value at x, certified to eps (raises if not)."""
        x = as_vector(x, dim=self._dim)
        if not self._requests:
            return float(np.linalg.norm(x - self._start))
        if eps is None:
            eps = self._default_eps(float(np.linalg.norm(x - self._start)))
        prob = TrajectoryProblem(self._requests, self._start, terminal=x)
        res = solve_min_movement(prob, eps, max_iter=max_iter)
        if res.status != OPTIMAL:
            raise AccuracyNotReached(
                f"work-function value gap {res.achieved_gap:.3e} > eps {eps:.3e}",
                value=res.value, gap=res.achieved_gap)
        return res.value

    def minimum(self, eps: float | None = None,
                warm: tuple[np.ndarray, np.ndarray] | None = None,
                max_iter: int = 1_000_000) -> SolveResult:
        """Global minimum of the work function; result carries its own gap."""
        if not self._requests:
            return SolveResult(status=OPTIMAL, value=0.0,
                               trajectory=np.empty((0, self._dim)),
                               achieved_gap=0.0, iterations=0)
        if eps is None:
            scale = float(np.max(np.abs([h.offset for h in self._requests])))
            eps = self._default_eps(scale)
        prob = TrajectoryProblem(self._requests, self._start)
        return solve_min_movement(prob, eps, warm=warm, max_iter=max_iter)

    def support(self, direction, budget: float, eps: float | None = None,
                anchor: SolveResult | None = None,
                warm: tuple[np.ndarray, np.ndarray] | None = None,
                max_iter: int = 400_000) -> SolveResult:
        """Support value of {w <= budget} in a direction (certified)."""
        theta = as_vector(direction, dim=self._dim)
        if eps is None:
            eps = self._default_eps(float(budget))
        if not self._requests:
            nrm = float(np.linalg.norm(theta))
            if nrm <= 1e-14:
                raise ValueError("direction must be nonzero")
            endpoint = self._start + budget * (theta / nrm)
            return SolveResult(status=OPTIMAL,
                               value=float((theta / nrm) @ endpoint),
                               trajectory=endpoint[None, :],
                               achieved_gap=0.0, iterations=0)
        prob = SupportProblem(self._requests, self._start, theta, budget)
        return solve_support(prob, eps, anchor=anchor, warm=warm, max_iter=max_iter)

    def contains(self, x, budget: float, eps: float | None = None) -> bool:
        """Whether x lies in {w <= budget}, up to the evaluation tolerance."""
        if eps is None:
            eps = self._default_eps(float(budget))
        w = self.value(x, eps=eps)
        return w <= budget + eps

    def support_cache(self, budget: float, anchors: int | None = None,
                      directions: np.ndarray | None = None,
                      eps: float | None = None, max_iter: int = 3000,
                      anchor: SolveResult | None = None,
                      warm: "SupportCacheWarm | None" = None,
                      rng: np.random.Generator | None = None) -> "SupportCache":
        """Solve a batch of anchor directions and return a fast evaluator.

        Raises BudgetInfeasible when the minimum certifiably exceeds the
        budget. ``warm`` is a caller-owned state that makes per-step rebuilds
        cheap when the request prefix grows one request at a time.
        """
        budget = float(budget)
        if not budget > 0.0:
            raise ValueError("budget must be positive")
        d = self._dim
        t = self.length
        if t == 0:
            center = self._start.copy()
            return SupportCache(dimension=d, budget=budget, mode="balls",
                                centers=center[None, :], radii=np.array([budget]),
                                oracle=self, max_anchor_gap=0.0)
        if anchor is None:
            anchor = self.minimum(eps=min(1e-3 * max(1.0, budget),
                                          eps if eps is not None else np.inf),
                                  max_iter=max_iter * 40)
        anchor_lb = anchor.value - anchor.achieved_gap
        if anchor_lb > budget:
            raise BudgetInfeasible(
                f"sublevel set empty: min > {anchor_lb:.6g} > budget {budget:.6g}",
                lower_bound=anchor_lb, budget=budget)
        if eps is None:
            eps = 1e-4 * max(1.0, budget)
        anchor_cost = float(_kernels.chain_cost(
            np.ascontiguousarray(anchor.trajectory), self._start, self._start, False))
        anchorV = np.vstack([anchor.trajectory, anchor.trajectory[-1:]])
        if anchor_cost >= budget:
            # razor-thin sublevel set: fall back to the single anchor ball
            return SupportCache(dimension=d, budget=budget, mode="balls",
                                centers=anchorV[t - 1][None, :],
                                radii=np.array([max(budget - anchor_cost, 0.0)]),
                                oracle=self, max_anchor_gap=anchor.achieved_gap)
        builder_grid = directions is None
        if directions is None:
            directions = _anchor_directions(d, anchors, rng)
        else:
            directions = np.ascontiguousarray(directions, dtype=np.float64)
        M = directions.shape[0]
        Vs = Ys = None
        if warm is not None and warm.matches(t, M, d):
            Vs, Ys = warm.grow(self._requests[-1], t)
        if Vs is None:
            Vs = np.broadcast_to(anchorV, (M, t + 1, d)).copy()
            Ys = np.zeros((M, t + 1, d))
        A = np.stack([h.normal for h in self._requests])
        b = np.array([h.offset for h in self._requests])
        vals = np.empty(M)
        ends = np.empty((M, d))
        costs = np.empty(M)
        gaps = np.empty(M)
        _kernels.support_batch(A, b, self._start, directions, budget, anchorV,
                               anchor_cost, Vs, Ys, float(eps), int(max_iter),
                               64, 1.7, vals, ends, costs, gaps)
        if warm is not None:
            warm.store(t, M, directions, Vs, Ys)
        radii = np.maximum(budget - costs, 0.0)
        max_gap = float(gaps.max())
        if d == 2 and builder_grid:
            # anchor directions are the even angle grid: interpolate in angle
            return SupportCache(dimension=d, budget=budget, mode="circle",
                                centers=ends, radii=radii, hvals=vals,
                                oracle=self, max_anchor_gap=max_gap,
                                anchor_result=anchor)
        centers = np.vstack([ends, anchorV[t - 1][None, :]])
        radii = np.concatenate([radii, [budget - anchor_cost]])
        return SupportCache(dimension=d, budget=budget, mode="balls",
                            centers=centers, radii=radii, oracle=self,
                            max_anchor_gap=max_gap, anchor_result=anchor)


def _anchor_directions(d: int, anchors: int | None,
                       rng: np.random.Generator | None) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        m = 256 if anchors is None else int(anchors)
        ang = np.arange(m) * (2.0 * np.pi / m)
        return np.ascontiguousarray(np.stack([np.cos(ang), np.sin(ang)], axis=1))
    m = 256 if anchors is None else int(anchors)
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(_DEFAULT_CACHE_SEED))
    return np.ascontiguousarray(sample_unit_sphere_batch(d, m, rng))


class SupportCacheWarm:
    """Caller-owned warm state for per-step support cache rebuilds."""

    def __init__(self):
        self.t = -1
        self.m = -1
        self.directions = None
        self.Vs = None
        self.Ys = None

    def matches(self, t: int, m: int, d: int) -> bool:
        return (self.Vs is not None and self.m == m and self.t == t - 1
                and self.Vs.shape == (m, t, d))

    def grow(self, new_request: HalfSpace, t: int):
        """Carry trajectories over one request extension.

        The old free endpoint becomes the new chain row (projected onto the
        incoming half-space) and also seeds the new free endpoint.
        """
        m, t_old1, d = self.Vs.shape
        Vs = np.empty((m, t + 1, d))
        Ys = np.zeros((m, t + 1, d))
        Vs[:, : t - 1] = self.Vs[:, : t - 1]
        free = self.Vs[:, t - 1]
        gap = new_request.offset - free @ new_request.normal
        push = np.maximum(gap, 0.0)
        Vs[:, t - 1] = free + push[:, None] * new_request.normal[None, :]
        Vs[:, t] = free
        Ys[:, :t] = self.Ys
        Ys[:, t] = self.Ys[:, t_old1 - 1]
        return Vs, Ys

    def store(self, t: int, m: int, directions, Vs, Ys):
        self.t = t
        self.m = m
        self.directions = directions
        self.Vs = Vs
        self.Ys = Ys


class SupportCache:
    """Fast inner evaluator of one sublevel set's support function.

    Calling the cache (or ``support_batch``) answers from precomputed anchor
    solves; ``exact`` runs a fresh certified solve for auditing. Ball mode is
    a lower approximation everywhere; circle mode (dimension two) linearly
    interpolates anchor values in angle and is exact at anchors up to the
    recorded solver gap.
    """

    def __init__(self, dimension: int, budget: float, mode: str,
                 centers: np.ndarray, radii: np.ndarray,
                 oracle: WorkFunctionOracle | None = None,
                 hvals: np.ndarray | None = None,
                 max_anchor_gap: float = 0.0,
                 anchor_result: SolveResult | None = None):
        self.dimension = dimension
        self.budget = budget
        self.mode = mode
        self.centers = np.ascontiguousarray(centers, dtype=np.float64)
        self.radii = np.ascontiguousarray(radii, dtype=np.float64)
        self.hvals = None if hvals is None else np.ascontiguousarray(hvals, dtype=np.float64)
        self.max_anchor_gap = float(max_anchor_gap)
        self.anchor_result = anchor_result
        self._oracle = oracle

    def support_batch(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.ascontiguousarray(thetas, dtype=np.float64)
        out = np.empty(thetas.shape[0])
        if self.mode == "circle":
            _kernels.interp_circle(thetas, self.hvals, out)
        else:
            _kernels.balls_max(thetas, self.centers, self.radii, out)
        return out

    def __call__(self, theta, eps: float | None = None) -> float:
        theta = as_vector(theta, dim=self.dimension)
        return float(self.support_batch(theta[None, :])[0])

    def exact(self, theta, eps: float | None = None) -> float:
        """Certified support solve for auditing the cached approximation."""
        if self._oracle is None:
            raise RuntimeError("cache has no oracle attached")
        res = self._oracle.support(theta, self.budget, eps=eps)
        if res.status == ACCURACY_NOT_REACHED and res.achieved_gap > 1e-2 * max(1.0, self.budget):
            raise AccuracyNotReached("audit solve did not certify",
                                     value=res.value, gap=res.achieved_gap)
        return res.value

    def audit(self, n: int = 8, rng: np.random.Generator | None = None,
              eps: float | None = None) -> dict:
        """Compare the cache against exact solves at n random directions."""
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(_DEFAULT_CACHE_SEED + 1))
        thetas = sample_unit_sphere_batch(self.dimension, n, rng)
        fast = self.support_batch(thetas)
        errs = np.empty(n)
        for i in range(n):
            errs[i] = fast[i] - self.exact(thetas[i], eps=eps)
        return {"n": n, "mean_abs": float(np.abs(errs).mean()),
                "max_abs": float(np.abs(errs).max()),
                "max_over": float(errs.max()), "max_under": float(-errs.min())}
