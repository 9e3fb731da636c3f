"""Certified solvers for trajectory cone programs over half-space requests.

Two problem families share one splitting engine (see ``_kernels``):

* min-movement: cheapest trajectory ``x_1..x_t`` from a start point with
  ``x_i`` in the i-th half-space, optionally pinned to a terminal point;
* sublevel support: largest ``<theta, x>`` over endpoints of trajectories
  whose total movement stays within a budget.

Every solve returns a ``SolveResult`` whose ``achieved_gap`` is a certified
bound on the distance to the true optimum (primal feasible value vs a dual
bound assembled from repaired multipliers). ``status`` is "optimal" once the
gap closes to the requested tolerance, "accuracy_not_reached" when the
iteration cap hits first, and "infeasible" only with a certificate that the
sublevel set is empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import HalfSpace, as_vector

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ACCURACY_NOT_REACHED = "accuracy_not_reached"

_DEFAULT_RELAX = 1.7
_DEFAULT_CHECK = 64
_COLD_MARGIN = 0.1


def _pack(requests: tuple[HalfSpace, ...]) -> tuple[np.ndarray, np.ndarray]:
    A = np.stack([h.normal for h in requests])
    b = np.array([h.offset for h in requests])
    return A, b


@dataclass(frozen=True)
class TrajectoryProblem:
    """Min-movement instance: serve each request in order, cheapest total move.

    ``terminal`` pins the trajectory to end at a given point (used to evaluate
    work-function values); ``None`` leaves the endpoint free.
    """

    requests: tuple[HalfSpace, ...]
    start: np.ndarray
    terminal: np.ndarray | None = None

    def __post_init__(self):
        reqs = tuple(self.requests)
        if not reqs:
            raise ValueError("need at least one request")
        d = reqs[0].dimension
        for h in reqs:
            if h.dimension != d:
                raise ValueError("mixed-dimension requests")
        start = as_vector(self.start, dim=d)
        term = None if self.terminal is None else as_vector(self.terminal, dim=d)
        object.__setattr__(self, "requests", reqs)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "terminal", term)

    @property
    def dimension(self) -> int:
        return self.requests[0].dimension

    @property
    def length(self) -> int:
        return len(self.requests)


@dataclass(frozen=True)
class SupportProblem:
    """Sublevel support instance: max <direction, x> over endpoints of
    trajectories serving every request with total movement <= budget.

    ``direction`` is normalized on construction (support scales linearly, so
    callers wanting a non-unit functional can rescale the value).
    """

    requests: tuple[HalfSpace, ...]
    start: np.ndarray
    direction: np.ndarray
    budget: float

    def __post_init__(self):
        base = TrajectoryProblem(self.requests, self.start)
        theta = as_vector(self.direction, dim=base.dimension)
        nrm = float(np.linalg.norm(theta))
        if nrm <= 1e-14:
            raise ValueError("direction must be nonzero")
        budget = float(self.budget)
        if not budget > 0.0 or not np.isfinite(budget):
            raise ValueError("budget must be positive and finite")
        object.__setattr__(self, "requests", base.requests)
        object.__setattr__(self, "start", base.start)
        object.__setattr__(self, "direction", theta / nrm)
        object.__setattr__(self, "budget", budget)

    @property
    def dimension(self) -> int:
        return self.requests[0].dimension

    @property
    def length(self) -> int:
        return len(self.requests)


@dataclass
class SolveResult:
    """Outcome of a certified solve.

    ``value`` is always attained by ``trajectory`` (primal feasible);
    ``achieved_gap`` bounds ``|value - optimum|``. For support solves the
    last trajectory row is the endpoint attaining ``value`` and ``anchor_gap``
    records the tolerance of the feasibility anchor that repairs relied on.
    """

    status: str
    value: float
    trajectory: np.ndarray
    achieved_gap: float
    iterations: int
    anchor_gap: float = 0.0


def trajectory_cost(problem: TrajectoryProblem, X: np.ndarray) -> float:
    """Total movement of trajectory X for the given problem (with pin)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    term = problem.terminal if problem.terminal is not None else problem.start
    return float(_kernels.chain_cost(X, problem.start, term, problem.terminal is not None))


def _cold_chain(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    # strictly interior witness rows: (b_i + margin) a_i
    delta = _COLD_MARGIN * np.maximum(1.0, np.abs(b))
    return (b + delta)[:, None] * A


def solve_min_movement(problem: TrajectoryProblem, eps: float,
                       max_iter: int = 1_000_000,
                       warm: tuple[np.ndarray, np.ndarray] | None = None,
                       check_every: int = _DEFAULT_CHECK,
                       relax: float = _DEFAULT_RELAX,
                       polish: bool = True) -> SolveResult:
    """Solve a min-movement instance to certified gap <= eps (else report).

    ``warm`` is a caller-owned ``(X, Y)`` state pair which is mutated in
    place and can be handed back on the next related solve; shapes that do
    not match the problem are ignored.
    """
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    A, b = _pack(problem.requests)
    t, d = A.shape
    has_term = problem.terminal is not None
    m = t + 1 if has_term else t
    term = problem.terminal if has_term else problem.start
    X = Y = None
    if warm is not None:
        Xw, Yw = warm
        if Xw.shape == (t, d) and Yw.shape == (m, d):
            X, Y = Xw, Yw
    if X is None:
        X = _cold_chain(A, b)
        Y = np.zeros((m, d))
    status_code, value, lb, iters = _kernels.minmv_pdhg(
        A, b, problem.start, term, has_term, X, Y,
        float(eps), int(max_iter), int(check_every), float(relax))
    if polish:
        polished = float(_kernels.bcd_polish(A, b, problem.start, term, has_term, X, 8))
        if polished < value:
            value = polished
        lb = max(lb, float(_kernels.minmv_cert(Y, A, b, problem.start, term, has_term, value)))
    gap = max(value - lb, 0.0)
    status = OPTIMAL if gap <= eps else ACCURACY_NOT_REACHED
    return SolveResult(status=status, value=float(value), trajectory=X.copy(),
                       achieved_gap=float(gap), iterations=int(iters))


def solve_support(problem: SupportProblem, eps: float,
                  anchor: SolveResult | None = None,
                  max_iter: int = 400_000,
                  warm: tuple[np.ndarray, np.ndarray] | None = None,
                  check_every: int = _DEFAULT_CHECK,
                  relax: float = _DEFAULT_RELAX) -> SolveResult:
    """Solve a sublevel support instance to certified gap <= eps (else report).

    ``anchor`` must be a min-movement result for the same requests and start
    (it both tests emptiness and anchors budget repair); omitted, one is
    solved internally. Infeasibility is reported only when the anchor's own
    certified lower bound exceeds the budget.
    """
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    base = TrajectoryProblem(problem.requests, problem.start)
    if anchor is None:
        anchor_eps = min(eps, 1e-3 * max(1.0, problem.budget))
        anchor = solve_min_movement(base, anchor_eps, max_iter=max_iter)
    anchor_lb = anchor.value - anchor.achieved_gap
    if anchor_lb > problem.budget:
        empty = np.empty((0, problem.dimension))
        return SolveResult(status=INFEASIBLE, value=-np.inf, trajectory=empty,
                           achieved_gap=0.0, iterations=anchor.iterations,
                           anchor_gap=anchor.achieved_gap)
    A, b = _pack(problem.requests)
    t, d = A.shape
    anchor_cost = float(_kernels.chain_cost(
        np.ascontiguousarray(anchor.trajectory), problem.start, problem.start, False))
    anchorV = np.vstack([anchor.trajectory, anchor.trajectory[-1:]])
    if anchor_cost >= problem.budget:
        # sublevel set too thin to move off the anchor; report it as is
        traj = anchorV.copy()
        value = float(problem.direction @ traj[t - 1]) + max(problem.budget - anchor_cost, 0.0)
        gap = anchor.achieved_gap + max(problem.budget - anchor_lb, 0.0)
        return SolveResult(status=ACCURACY_NOT_REACHED, value=value, trajectory=traj,
                           achieved_gap=float(gap), iterations=anchor.iterations,
                           anchor_gap=anchor.achieved_gap)
    V = Y = None
    if warm is not None:
        Vw, Yw = warm
        if Vw.shape == (t + 1, d) and Yw.shape == (t + 1, d):
            V, Y = Vw, Yw
    if V is None:
        V = anchorV.copy()
        Y = np.zeros((t + 1, d))
    status_code, value, ub, iters, chain = _kernels.support_pdhg(
        A, b, problem.start, problem.direction, problem.budget, anchorV,
        anchor_cost, V, Y, float(eps), int(max_iter), int(check_every), float(relax))
    traj = V.copy()
    traj[t] = traj[t - 1] + max(problem.budget - chain, 0.0) * problem.direction
    gap = max(ub - value, 0.0)
    status = OPTIMAL if status_code == _kernels.STATUS_CERTIFIED else ACCURACY_NOT_REACHED
    return SolveResult(status=status, value=float(value), trajectory=traj,
                       achieved_gap=float(gap), iterations=int(iters),
                       anchor_gap=anchor.achieved_gap)
