"""Instances, offline optima, instrumented runs, and reports.

An ``Instance`` is a finite request stream with a label. Generators cover
three families: seeded random streams whose violation rate is controlled,
a rotating planar adversary that defeats greedy projection, and nested
streams that tighten toward a known target so the offline optimum has an
independent geometric description.

``run`` plays an instance against one of the chaser policies behind a
causality guard (the runner hands out request t+1 only after position t is
committed), computes the certified offline optimum, and returns a
``RunReport``; ``emit_report`` writes the deterministic per-step CSV.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import chaser as _chaser
from ._backend import BACKEND
from .geometry import HalfSpace, normalize_halfspace, sample_unit_sphere
from .solver import SolveResult, TrajectoryProblem, solve_min_movement
from .steiner import OracleBudgetExceeded
from .work_function import AccuracyNotReached, BudgetInfeasible

ALGORITHMS = ("steiner", "greedy", "ideal2d")


class InstanceParseError(ValueError):
    """Malformed instance file; carries the offending line number."""

    def __init__(self, message: str, lineno: int = 0):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


@dataclass(frozen=True)
class Instance:
    """A finite half-space request stream."""

    requests: tuple[HalfSpace, ...]
    label: str = ""
    seed: int | None = None

    def __post_init__(self):
        reqs = tuple(self.requests)
        if not reqs:
            raise ValueError("instance needs at least one request")
        d = reqs[0].dimension
        for h in reqs:
            if h.dimension != d:
                raise ValueError("mixed-dimension requests")
        object.__setattr__(self, "requests", reqs)

    @property
    def dimension(self) -> int:
        return self.requests[0].dimension

    @property
    def length(self) -> int:
        return len(self.requests)


def gen_random(dimension: int, length: int, seed: int,
               violation_prob: float = 0.7) -> Instance:
    """Random stream calibrated against a greedy follower: each request
    violates the follower's position with the given probability."""
    rng = np.random.Generator(np.random.PCG64(seed))
    x = np.zeros(dimension)
    reqs = []
    for _ in range(length):
        a = sample_unit_sphere(dimension, rng)
        base = float(a @ x)
        if rng.uniform() < violation_prob:
            b = base + float(rng.uniform(0.1, 1.0))
        else:
            b = base - float(rng.uniform(0.0, 1.0))
        h = HalfSpace(a, b)
        reqs.append(h)
        gap = h.signed_gap(x)
        if gap < 0.0:
            x = x - gap * h.normal
    return Instance(tuple(reqs), label=f"random-d{dimension}-T{length}-s{seed}",
                    seed=seed)


def gen_rotating(length: int, step_angle: float, offset: float = 1.0,
                 start_angle: float = 0.0) -> Instance:
    """Planar adversary: a half-space at constant offset whose normal rotates
    by a fixed angle each step. Greedy projection pays every step; the
    intersection is empty once the normals span more than a half-turn."""
    reqs = []
    for t in range(length):
        ang = start_angle + t * step_angle
        a = np.array([math.cos(ang), math.sin(ang)])
        reqs.append(HalfSpace(a, float(offset)))
    return Instance(tuple(reqs),
                    label=f"rotating-T{length}-a{step_angle:.4g}-o{offset:.4g}")


def gen_nested(dimension: int, length: int, seed: int) -> Instance:
    """Tightening stream around a strictly feasible target point.

    All normals stay in a narrow cone around the target direction and the
    slack margins shrink monotonically, so the cheapest service is to walk
    straight toward the final intersection: the offline optimum matches the
    distance from the origin to it (validated against an independent
    alternating-projection oracle in the tests).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = sample_unit_sphere(dimension, rng)
    rho = float(rng.uniform(1.0, 3.0))
    target = rho * n
    margins = rho * (0.75 * np.exp(-2.5 * np.arange(length) / max(length - 1, 1)) + 0.04)
    reqs = []
    for t in range(length):
        if dimension > 1:
            p = rng.normal(size=dimension)
            p -= (p @ n) * n
            pn = float(np.linalg.norm(p))
            kappa = 0.2 if pn > 1e-12 else 0.0
            w = n + kappa * (p / pn if pn > 1e-12 else 0.0)
            w /= np.linalg.norm(w)
        else:
            w = n.copy()
        b = float(w @ target) - float(margins[t])
        reqs.append(HalfSpace(w, b))
    return Instance(tuple(reqs), label=f"nested-d{dimension}-T{length}-s{seed}",
                    seed=seed)


def save_instance(instance: Instance, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("# steinerchase instance v1\n")
        if instance.label:
            fh.write(f"# label: {instance.label}\n")
        if instance.seed is not None:
            fh.write(f"# seed: {instance.seed}\n")
        fh.write(f"{instance.dimension} {instance.length}\n")
        for h in instance.requests:
            parts = [repr(float(v)) for v in h.normal] + [repr(float(h.offset))]
            fh.write(" ".join(parts) + "\n")


def load_instance(path: str) -> Instance:
    label = ""
    seed = None
    header = None
    reqs: list[HalfSpace] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("label:"):
                    label = body[len("label:"):].strip()
                elif body.startswith("seed:"):
                    try:
                        seed = int(body[len("seed:"):].strip())
                    except ValueError as exc:
                        raise InstanceParseError(f"bad seed: {exc}", lineno)
                continue
            if header is None:
                parts = line.split()
                if len(parts) != 2:
                    raise InstanceParseError("header must be 'dimension length'", lineno)
                try:
                    header = (int(parts[0]), int(parts[1]))
                except ValueError as exc:
                    raise InstanceParseError(f"bad header: {exc}", lineno)
                if header[0] < 1 or header[1] < 1:
                    raise InstanceParseError("dimension and length must be positive", lineno)
                continue
            parts = line.split()
            if len(parts) != header[0] + 1:
                raise InstanceParseError(
                    f"expected {header[0] + 1} numbers, got {len(parts)}", lineno)
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise InstanceParseError(f"bad number: {exc}", lineno)
            try:
                normal = np.array(vals[:-1])
                if abs(np.linalg.norm(normal) - 1.0) <= 1e-12:
                    # already unit: keep the stored bits so save/load round-trips
                    reqs.append(HalfSpace(normal, vals[-1]))
                else:
                    reqs.append(normalize_halfspace(normal, vals[-1]))
            except ValueError as exc:
                raise InstanceParseError(str(exc), lineno)
    if header is None:
        raise InstanceParseError("missing header line")
    if len(reqs) != header[1]:
        raise InstanceParseError(
            f"expected {header[1]} requests, found {len(reqs)}")
    return Instance(tuple(reqs), label=label, seed=seed)


def compute_opt(instance: Instance, eps: float | None = None,
                warm: tuple[np.ndarray, np.ndarray] | None = None,
                max_iter: int = 2_000_000) -> SolveResult:
    """Certified offline optimum of an instance (cheapest serving trajectory).

    Solved in two stages when cold: a coarse pass sets the scale, then the
    warm refine closes the gap to eps (default 1e-6 on the optimum's scale).
    """
    prob = TrajectoryProblem(instance.requests, np.zeros(instance.dimension))
    t, d = instance.length, instance.dimension
    if warm is None:
        X = np.zeros((t, d))
        Y = np.zeros((t, d))
        scale = max(1.0, float(np.max(np.abs([h.offset for h in instance.requests]))))
        coarse = solve_min_movement(prob, 1e-2 * scale, max_iter=max_iter // 4,
                                    warm=(X, Y))
        warm = (X, Y)
        value_scale = max(1.0, coarse.value)
    else:
        value_scale = max(1.0, float(np.max(np.abs([h.offset for h in instance.requests]))))
    if eps is None:
        eps = 1e-6 * value_scale
    return solve_min_movement(prob, eps, max_iter=max_iter, warm=warm)


class _RequestStream:
    """Causality guard: request t+1 is only handed out once position t is
    committed, so no policy can peek ahead."""

    def __init__(self, requests: tuple[HalfSpace, ...]):
        self._requests = requests
        self._next = 0
        self._pending = False

    def __len__(self) -> int:
        return len(self._requests)

    @property
    def exhausted(self) -> bool:
        return self._next >= len(self._requests)

    def take(self) -> HalfSpace:
        if self._pending:
            raise RuntimeError("previous position not committed yet")
        if self.exhausted:
            raise RuntimeError("stream exhausted")
        self._pending = True
        req = self._requests[self._next]
        self._next += 1
        return req

    def commit(self, position: np.ndarray) -> None:
        if not self._pending:
            raise RuntimeError("nothing to commit")
        self._pending = False


@dataclass
class RunReport:
    """Everything one instrumented run produced."""

    algorithm: str
    instance_label: str
    dimension: int
    length: int
    seed: int
    backend: str
    eps_schedule: str
    positions: np.ndarray
    move_costs: np.ndarray
    r_values: np.ndarray
    phases: np.ndarray
    flagged: np.ndarray
    total_cost: float
    opt_value: float
    opt_gap: float
    ratio: float
    aborted: bool = False
    abort_reason: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def steps_completed(self) -> int:
        return int(self.move_costs.shape[0])

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "instance": self.instance_label,
            "dimension": self.dimension,
            "length": self.length,
            "seed": self.seed,
            "backend": self.backend,
            "eps_schedule": self.eps_schedule,
            "steps_completed": self.steps_completed,
            "total_cost": self.total_cost,
            "opt_value": self.opt_value,
            "opt_gap": self.opt_gap,
            "ratio": self.ratio,
            "flagged_steps": int(self.flagged.sum()),
            "phases": int(self.phases[-1]) if self.phases.size else 0,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
        }


def _ratio(total: float, opt_value: float, opt_gap: float) -> float:
    lb = opt_value - opt_gap
    if lb > 1e-9 * max(1.0, total):
        return total / lb
    return 1.0 if total <= 1e-9 else math.inf


_STEPS = {
    "steiner": _chaser.step,
    "greedy": _chaser.greedy_step,
    "ideal2d": _chaser.ideal_step_2d,
}


def run(instance: Instance, algorithm: str = "steiner", seed: int = 0,
        options: _chaser.ChaserOptions | None = None,
        opt_eps: float | None = None,
        compute_optimum: bool = True) -> RunReport:
    """Play an instance with one policy and report costs and the ratio."""
    if algorithm not in _STEPS:
        raise ValueError(f"unknown algorithm {algorithm!r}; pick from {ALGORITHMS}")
    stepper = _STEPS[algorithm]
    state = _chaser.make_chaser(instance.dimension, seed=seed, options=options)
    stream = _RequestStream(instance.requests)
    positions = []
    moves = []
    rvals = []
    phases = []
    flags = []
    aborted = False
    reason = ""
    while not stream.exhausted:
        req = stream.take()
        try:
            state, x = stepper(state, req)
        except (AccuracyNotReached, BudgetInfeasible, OracleBudgetExceeded) as exc:
            aborted = True
            reason = f"{type(exc).__name__}: {exc}"
            break
        stream.commit(x)
        info = state.last_info
        positions.append(x)
        moves.append(info.moved)
        rvals.append(0.0 if info.r is None else info.r)
        phases.append(info.phase_index)
        flags.append(info.flagged)
    opt_value = math.nan
    opt_gap = math.nan
    ratio = math.nan
    if compute_optimum and not aborted:
        warm = None
        if state._min_warm.X is not None and state._min_warm.X.shape[0] == instance.length:
            warm = (state._min_warm.X, state._min_warm.Y)
        opt = compute_opt(instance, eps=opt_eps, warm=warm)
        opt_value = opt.value
        opt_gap = opt.achieved_gap
        ratio = _ratio(state.cumulative_cost, opt_value, opt_gap)
    d = instance.dimension
    return RunReport(
        algorithm=algorithm,
        instance_label=instance.label,
        dimension=d,
        length=instance.length,
        seed=seed,
        backend=BACKEND,
        eps_schedule=(options.eps_schedule if options is not None
                      else _chaser.ChaserOptions().eps_schedule),
        positions=np.array(positions).reshape(len(positions), d),
        move_costs=np.array(moves),
        r_values=np.array(rvals),
        phases=np.array(phases, dtype=np.int64),
        flagged=np.array(flags, dtype=bool),
        total_cost=float(state.cumulative_cost),
        opt_value=opt_value,
        opt_gap=opt_gap,
        ratio=ratio,
        aborted=aborted,
        abort_reason=reason,
    )


def report_csv(report: RunReport) -> str:
    """Deterministic CSV text for a report (identical runs give identical
    bytes: metadata comments, then one row per completed step)."""
    buf = io.StringIO()
    buf.write(f"# algorithm: {report.algorithm}\n")
    buf.write(f"# instance: {report.instance_label}\n")
    buf.write(f"# seed: {report.seed}\n")
    buf.write(f"# backend: {report.backend}\n")
    buf.write(f"# eps_schedule: {report.eps_schedule}\n")
    buf.write(f"# total_cost: {report.total_cost!r}\n")
    buf.write(f"# opt_value: {report.opt_value!r}\n")
    buf.write(f"# opt_gap: {report.opt_gap!r}\n")
    buf.write(f"# ratio: {report.ratio!r}\n")
    buf.write(f"# aborted: {int(report.aborted)}\n")
    if report.aborted:
        buf.write(f"# abort_reason: {report.abort_reason}\n")
    writer = csv.writer(buf, lineterminator="\n")
    d = report.dimension
    writer.writerow(["t"] + [f"x{k}" for k in range(d)]
                    + ["move_cost", "cum_cost", "r", "phase", "flagged"])
    cum = 0.0
    for i in range(report.steps_completed):
        cum += float(report.move_costs[i])
        row = [str(i + 1)]
        row += [repr(float(v)) for v in report.positions[i]]
        row += [repr(float(report.move_costs[i])), repr(cum),
                repr(float(report.r_values[i])), str(int(report.phases[i])),
                str(int(report.flagged[i]))]
        writer.writerow(row)
    return buf.getvalue()


def emit_report(report: RunReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(report_csv(report))


def competitive_normalizer(dimension: int, length: int) -> float:
    """min(d, sqrt(d ln T)): the guarantee shape ratios are measured against."""
    if length <= 1:
        return float(dimension)
    return min(float(dimension), math.sqrt(dimension * math.log(length)))


def run_suite(config: dict, report_dir: str | None = None,
              progress=None) -> list[dict]:
    """Run every (entry, algorithm) pair in a config; returns summary dicts.

    Config schema: {"runs": [ {either "instance": path or "kind"/"d"/"T"/
    "gen_seed" (+ generator kwargs), "algorithms": [...], "seed": int,
    "options": {ChaserOptions fields} } ]}.
    """
    import os

    summaries = []
    for entry in config.get("runs", []):
        if "instance" in entry:
            inst = load_instance(entry["instance"])
        else:
            kind = entry.get("kind", "random")
            if kind == "random":
                inst = gen_random(int(entry["d"]), int(entry["T"]),
                                  int(entry.get("gen_seed", 0)),
                                  violation_prob=float(entry.get("violation_prob", 0.7)))
            elif kind == "rotating":
                inst = gen_rotating(int(entry["T"]),
                                    float(entry.get("step_angle", 0.2)),
                                    offset=float(entry.get("offset", 1.0)))
            elif kind == "nested":
                inst = gen_nested(int(entry["d"]), int(entry["T"]),
                                  int(entry.get("gen_seed", 0)))
            else:
                raise ValueError(f"unknown generator kind {kind!r}")
        opts = _chaser.ChaserOptions(**entry.get("options", {}))
        seed = int(entry.get("seed", 0))
        for algo in entry.get("algorithms", ["steiner"]):
            rep = run(inst, algorithm=algo, seed=seed, options=opts)
            summary = rep.to_dict()
            summary["normalizer"] = competitive_normalizer(inst.dimension, inst.length)
            if report_dir is not None:
                os.makedirs(report_dir, exist_ok=True)
                name = f"{inst.label}-{algo}-run{seed}.csv"
                emit_report(rep, os.path.join(report_dir, name))
                summary["report"] = name
            summaries.append(summary)
            if progress is not None:
                progress(summary)
    return summaries
