"""Online chasing of half-space requests via work-function Steiner points.

The package tracks, per request, the Steiner point of a sublevel set of the
work function, estimated from support-function queries answered by certified
first-order cone-program solves. See the per-module docstrings for the
layering: geometry primitives, splitting solvers, work-function oracles,
Steiner estimators, the online chasers, and the benchmark harness.
"""

from ._backend import BACKEND, HAS_NUMBA, USE_NUMBA
from .bench import (Instance, InstanceParseError, RunReport, compute_opt,
                    competitive_normalizer, emit_report, gen_nested,
                    gen_random, gen_rotating, load_instance, report_csv, run,
                    run_suite, save_instance)
from .chaser import (ChaserOptions, ChaserState, StepInfo, default_anchors,
                     greedy_step, ideal_step_2d, make_chaser, step)
from .geometry import (Ball, HalfSpace, ZeroNormalError, membership_tol,
                       normalize_halfspace, project_halfspace, reflect,
                       sample_unit_sphere, sample_unit_sphere_batch,
                       worker_stream)
from .solver import (ACCURACY_NOT_REACHED, INFEASIBLE, OPTIMAL, SolveResult,
                     SupportProblem, TrajectoryProblem, solve_min_movement,
                     solve_support, trajectory_cost)
from .steiner import (DEFAULT_SAMPLE_CAP, OracleBudgetExceeded, SteinerQuery,
                      estimate_steiner, exact_steiner_ball,
                      quadrature_steiner_2d, required_samples)
from .work_function import (AccuracyNotReached, BudgetInfeasible,
                            SupportCache, SupportCacheWarm, WorkFunctionOracle)

__version__ = "0.1.0"

__all__ = [
    "ACCURACY_NOT_REACHED",
    "AccuracyNotReached",
    "BACKEND",
    "Ball",
    "BudgetInfeasible",
    "ChaserOptions",
    "ChaserState",
    "DEFAULT_SAMPLE_CAP",
    "HAS_NUMBA",
    "HalfSpace",
    "INFEASIBLE",
    "Instance",
    "InstanceParseError",
    "OPTIMAL",
    "OracleBudgetExceeded",
    "RunReport",
    "SolveResult",
    "SteinerQuery",
    "StepInfo",
    "SupportCache",
    "SupportCacheWarm",
    "SupportProblem",
    "TrajectoryProblem",
    "USE_NUMBA",
    "WorkFunctionOracle",
    "ZeroNormalError",
    "competitive_normalizer",
    "compute_opt",
    "default_anchors",
    "emit_report",
    "estimate_steiner",
    "exact_steiner_ball",
    "gen_nested",
    "gen_random",
    "gen_rotating",
    "greedy_step",
    "ideal_step_2d",
    "load_instance",
    "make_chaser",
    "membership_tol",
    "normalize_halfspace",
    "project_halfspace",
    "quadrature_steiner_2d",
    "reflect",
    "required_samples",
    "report_csv",
    "run",
    "run_suite",
    "sample_unit_sphere",
    "sample_unit_sphere_batch",
    "save_instance",
    "solve_min_movement",
    "solve_support",
    "step",
    "trajectory_cost",
    "worker_stream",
    "__version__",
]
