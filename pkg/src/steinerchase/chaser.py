"""Online chasers for streams of half-space requests.

Three per-step policies share one state type:

* ``step``          the budgeted chaser: track the Steiner point of the
                    work-function sublevel set {w <= 2r} with Monte-Carlo
                    support sampling, then project onto the active request;
* ``ideal_step_2d`` the high-accuracy planar variant: deterministic angular
                    quadrature of the same Steiner point, no projection;
* ``greedy_step``   baseline: project the current position onto the request.

The scale r is unset until the first violated request (it becomes the
distance from the start to that request) and afterwards follows the phase
rule: when the work-function minimum, solved to r/100, exceeds
3r/2 - r/100, r resets to that minimum and a new phase begins. Sublevel
budgets are always 2r.

States form a single linear history: ``step`` returns a fresh state but warm
solver caches and the sampling stream are carried along mutably, so replaying
an older state object is not supported.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import HalfSpace, as_vector, project_halfspace
from .solver import OPTIMAL, SolveResult
from .steiner import (DEFAULT_SAMPLE_CAP, OracleBudgetExceeded, SteinerQuery,
                      estimate_steiner, quadrature_steiner_2d, required_samples)
from .work_function import (AccuracyNotReached, SupportCacheWarm,
                            WorkFunctionOracle)

INVERSE_SQUARE = "inverse_square"
FLAT = "flat"


def default_anchors(dimension: int) -> int:
    """Support-cache anchor count giving audit errors well under the
    per-query accuracy the estimator budgets (eps / dimension)."""
    if dimension == 1:
        return 2
    if dimension == 2:
        return 256
    return 192


@dataclass
class ChaserOptions:
    """Tuning knobs for the budgeted chaser.

    ``eps_schedule`` picks the estimator accuracy per step: "inverse_square"
    spends eps_scale * r / t**2 (the schedule whose total drift stays O(r)
    per phase with a shrinking per-step term), "flat" spends
    flat_fraction * r every step (same O(r) total per phase in the regime
    where phases end after O(1/flat_fraction) steps; far cheaper in samples).
    """

    eps_schedule: str = INVERSE_SQUARE
    eps_scale: float = 1.0
    flat_fraction: float = 0.08
    delta: float = 1.0
    sample_cap: int | None = DEFAULT_SAMPLE_CAP
    anchors: int | None = None
    anchor_eps_fraction: float = 5e-3
    anchor_max_iter: int = 3000
    minwf_eps_fraction: float = 0.01
    minwf_max_iter: int = 400_000
    quadrature_resolution: int = 20000
    ideal_r_rule: str = "reset"  # "reset" matches step(); "double" doubles r
    membership_frac: float = 1e-3

    def __post_init__(self):
        if self.eps_schedule not in (INVERSE_SQUARE, FLAT):
            raise ValueError(f"unknown eps schedule {self.eps_schedule!r}")
        if self.ideal_r_rule not in ("reset", "double"):
            raise ValueError(f"unknown ideal r rule {self.ideal_r_rule!r}")


@dataclass
class StepInfo:
    """Per-step record emitted alongside the new position."""

    t: int
    algorithm: str
    moved: float
    r: float | None
    phase_index: int
    flagged: bool = False
    eps: float = 0.0
    samples: int = 0
    minwf_value: float = 0.0
    minwf_gap: float = 0.0
    cache_gap: float = 0.0


class _MinWarm:
    """Mutable holder for the work-function minimum warm start."""

    def __init__(self):
        self.X = None
        self.Y = None

    def grow(self, request: HalfSpace, start: np.ndarray):
        if self.X is None:
            x1 = project_halfspace(start, request)
            self.X = x1[None, :].copy()
            self.Y = np.zeros((1, start.shape[0]))
        else:
            nxt = project_halfspace(self.X[-1], request)
            self.X = np.vstack([self.X, nxt[None, :]])
            self.Y = np.vstack([self.Y, np.zeros((1, self.Y.shape[1]))])
        return self.X, self.Y


@dataclass
class ChaserState:
    """Full chaser state after t requests (start state has t = 0)."""

    dimension: int
    options: ChaserOptions
    position: np.ndarray
    rng: np.random.Generator
    oracle: WorkFunctionOracle
    t: int = 0
    r: float | None = None
    phase_index: int = 0
    cumulative_cost: float = 0.0
    last_info: StepInfo | None = None
    _min_warm: _MinWarm = field(default_factory=_MinWarm, repr=False)
    _cache_warm: SupportCacheWarm = field(default_factory=SupportCacheWarm, repr=False)


def make_chaser(dimension: int, seed: int = 0, start=None,
                options: ChaserOptions | None = None) -> ChaserState:
    start = np.zeros(dimension) if start is None else as_vector(start, dim=dimension)
    return ChaserState(dimension=dimension,
                       options=options or ChaserOptions(),
                       position=start.copy(),
                       rng=np.random.Generator(np.random.PCG64(seed)),
                       oracle=WorkFunctionOracle(start=start))


class _ShiftedSupport:
    """Support of the body translated by -shift (keeps sampling radii tight)."""

    def __init__(self, base, shift: np.ndarray):
        self._base = base
        self._shift = shift

    def support_batch(self, thetas: np.ndarray) -> np.ndarray:
        return self._base.support_batch(thetas) - thetas @ self._shift


def _advance(state: ChaserState, request: HalfSpace, x: np.ndarray,
             info: StepInfo) -> tuple[ChaserState, np.ndarray]:
    moved = float(np.linalg.norm(x - state.position))
    info.moved = moved
    new = replace(state,
                  position=x.copy(),
                  oracle=state.oracle.extend(request),
                  t=state.t + 1,
                  r=info.r,
                  phase_index=info.phase_index,
                  cumulative_cost=state.cumulative_cost + moved,
                  last_info=info)
    return new, x.copy()


def _init_scale(state: ChaserState, request: HalfSpace):
    """Handle the pre-phase regime: r stays unset until a request is missed."""
    gap = request.signed_gap(state.position)
    if state.r is None and gap >= 0.0:
        return None
    if state.r is None:
        return -gap
    return state.r


def _solve_min(state: ChaserState, oracle: WorkFunctionOracle, request: HalfSpace,
               r: float) -> SolveResult:
    opt = state.options
    warm = state._min_warm.grow(request, oracle.start)
    eps = opt.minwf_eps_fraction * r
    res = oracle.minimum(eps=eps, warm=warm, max_iter=opt.minwf_max_iter)
    if res.status != OPTIMAL:
        raise AccuracyNotReached(
            f"work-function minimum gap {res.achieved_gap:.3e} > eps {eps:.3e} "
            f"at step {state.t + 1}", value=res.value, gap=res.achieved_gap)
    return res


def _phase_update(opt: ChaserOptions, r: float, minres: SolveResult,
                  phase: int) -> tuple[float, int]:
    if minres.value > 1.5 * r - opt.minwf_eps_fraction * r:
        return float(minres.value), phase + 1
    return r, phase


def step(state: ChaserState, request: HalfSpace) -> tuple[ChaserState, np.ndarray]:
    """Budgeted chaser step: returns (new_state, position after serving)."""
    if request.dimension != state.dimension:
        raise ValueError("request dimension mismatch")
    opt = state.options
    t = state.t + 1
    r = _init_scale(state, request)
    if r is None:
        info = StepInfo(t=t, algorithm="steiner", moved=0.0, r=None, phase_index=0)
        return _advance(state, request, state.position, info)
    oracle = state.oracle.extend(request)
    minres = _solve_min(state, oracle, request, r)
    r, phase = _phase_update(opt, r, minres, state.phase_index)
    budget = 2.0 * r
    if opt.eps_schedule == INVERSE_SQUARE:
        eps = opt.eps_scale * r / float(t * t)
    else:
        eps = opt.flat_fraction * r
    info = StepInfo(t=t, algorithm="steiner", moved=0.0, r=r, phase_index=phase,
                    eps=eps, minwf_value=minres.value, minwf_gap=minres.achieved_gap)
    anchors = opt.anchors if opt.anchors is not None else default_anchors(state.dimension)
    cache = oracle.support_cache(budget, anchors=anchors,
                                 eps=opt.anchor_eps_fraction * r,
                                 max_iter=opt.anchor_max_iter,
                                 anchor=minres, warm=state._cache_warm)
    info.cache_gap = cache.max_anchor_gap
    # {w <= 2r} sits inside a 2r-ball around the start: sample it recentered
    query = SteinerQuery(support=_ShiftedSupport(cache, oracle.start),
                         dimension=state.dimension, bounding_radius=budget,
                         eps=eps, delta=opt.delta, rng=state.rng,
                         sample_cap=opt.sample_cap)
    try:
        info.samples = required_samples(query)
        est = oracle.start + estimate_steiner(query)
        x = project_halfspace(est, request)
    except OracleBudgetExceeded:
        info.flagged = True
        info.samples = 0
        x = project_halfspace(state.position, request)
    return _advance(state, request, x, info)


def greedy_step(state: ChaserState, request: HalfSpace) -> tuple[ChaserState, np.ndarray]:
    """Baseline step: project the current position onto the request."""
    if request.dimension != state.dimension:
        raise ValueError("request dimension mismatch")
    x = project_halfspace(state.position, request)
    info = StepInfo(t=state.t + 1, algorithm="greedy", moved=0.0,
                    r=state.r, phase_index=state.phase_index)
    return _advance(state, request, x, info)


def ideal_step_2d(state: ChaserState, request: HalfSpace) -> tuple[ChaserState, np.ndarray]:
    """High-accuracy planar step: quadrature Steiner point, no projection.

    The sublevel set mirrors into the request across its boundary wherever it
    pokes out, so its Steiner point lands on the feasible side up to cache
    and quadrature error; the step records a flag when the emitted point
    misses the request by more than membership_frac * r instead of
    projecting.
    """
    if state.dimension != 2:
        raise ValueError("ideal variant is planar only")
    if request.dimension != 2:
        raise ValueError("request dimension mismatch")
    opt = state.options
    t = state.t + 1
    r = _init_scale(state, request)
    if r is None:
        info = StepInfo(t=t, algorithm="ideal2d", moved=0.0, r=None, phase_index=0)
        return _advance(state, request, state.position, info)
    oracle = state.oracle.extend(request)
    minres = _solve_min(state, oracle, request, r)
    phase = state.phase_index
    if opt.ideal_r_rule == "reset":
        r, phase = _phase_update(opt, r, minres, phase)
    else:
        while minres.value > 2.0 * r:
            r *= 2.0
            phase += 1
    budget = 2.0 * r
    info = StepInfo(t=t, algorithm="ideal2d", moved=0.0, r=r, phase_index=phase,
                    minwf_value=minres.value, minwf_gap=minres.achieved_gap)
    anchors = opt.anchors if opt.anchors is not None else default_anchors(2)
    cache = oracle.support_cache(budget, anchors=anchors,
                                 eps=opt.anchor_eps_fraction * r,
                                 max_iter=opt.anchor_max_iter,
                                 anchor=minres, warm=state._cache_warm)
    info.cache_gap = cache.max_anchor_gap
    x = quadrature_steiner_2d(cache, resolution=opt.quadrature_resolution)
    info.flagged = bool(request.signed_gap(x) < -opt.membership_frac * r)
    return _advance(state, request, x, info)
