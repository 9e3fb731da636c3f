"""Acceptance gate: nine criteria, one printed PASS/FAIL line each.

Each criterion prints a verdict line to the real stdout (so it shows even
under pytest capture) and then asserts. Tolerances and runtime limits are
pinned in the constants below; benchmark-scale fixtures are module-scoped so
later criteria reuse the same runs.
"""

import math
import sys
import time

import numpy as np
import pytest

from steinerchase import (
    ChaserOptions,
    HalfSpace,
    SteinerQuery,
    TrajectoryProblem,
    WorkFunctionOracle,
    estimate_steiner,
    gen_random,
    gen_rotating,
    reflect,
    report_csv,
    run,
    solve_min_movement,
)
from steinerchase.bench import competitive_normalizer

from oracles import grid_min_movement

# criterion 6 grid: 30 seeds per (dimension, length) cell
SUITE_GRID = [(d, T) for d in (1, 2, 3, 5) for T in (20, 50, 100)]
SUITE_SEEDS = tuple(range(30))
SUITE_RATIO_CONST = 20.0
SUITE_TIME_LIMIT = 1800.0

ORACLE_TOL = 1e-2
ORACLE_TIME_LIMIT = 60.0

PROBES_PER_PROPERTY = 200
PROBE_EPS = 1e-6
PROBE_SLACK = 3 * PROBE_EPS
PROBE_TIME_LIMIT = 300.0

ESTIMATOR_TRIALS = 200
ESTIMATOR_EPS = 0.1
ESTIMATOR_DELTA = 0.25
ESTIMATOR_FAIL_LIMIT = 0.5          # twice delta
ESTIMATOR_MEAN_LIMIT = 1.5 * ESTIMATOR_EPS * (1 + math.sqrt(ESTIMATOR_DELTA))
ESTIMATOR_TIME_LIMIT = 600.0

FEASIBILITY_TOL = 1e-9
PHASE_GROWTH_BASE = 1.48

ROTATING_ANGLE = 0.15
ROTATING_LENGTH = 200
ROTATING_SEPARATION = 2.0
ROTATING_TIME_LIMIT = 300.0

GAP_SEEDS = 50
GAP_LENGTH = 20


def _verdict(capsys, num: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"ACCEPTANCE CRITERION {num} ({name}): {status} - {detail}",
              flush=True)


def _progress(msg: str) -> None:
    print(f"  [acceptance] {msg}", file=sys.__stdout__, flush=True)


def _random_requests(rng, d, t, scale=1.5):
    reqs = []
    for _ in range(t):
        a = rng.standard_normal(d)
        a /= np.linalg.norm(a)
        reqs.append(HalfSpace(a, float(rng.uniform(-scale, scale))))
    return tuple(reqs)


class _BatchBall:
    """Closed-form vectorized ball support (unit query directions)."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)

    def support_batch(self, thetas):
        return thetas @ self.center + self.radius


class _BatchBox:
    """Closed-form vectorized axis-aligned box support."""

    def __init__(self, center, halfwidth):
        self.center = np.asarray(center, dtype=np.float64)
        self.halfwidth = np.asarray(halfwidth, dtype=np.float64)

    def support_batch(self, thetas):
        return thetas @ self.center + np.abs(thetas) @ self.halfwidth


# --------------------------------------------------------------------- fixtures


def _suite_options(d: int) -> ChaserOptions:
    anchors = {1: 2, 2: 64, 3: 48}.get(d, 32)
    return ChaserOptions(eps_schedule="flat", flat_fraction=0.08,
                         anchors=anchors, anchor_max_iter=2000)


@pytest.fixture(scope="module")
def suite_runs():
    """Criterion 6 grid: (instance, report) pairs plus the elapsed time."""
    t0 = time.perf_counter()
    runs = []
    for d, T in SUITE_GRID:
        opts = _suite_options(d)
        cell0 = time.perf_counter()
        for s in SUITE_SEEDS:
            inst = gen_random(d, T, seed=s)
            rep = run(inst, algorithm="steiner", seed=s, options=opts)
            runs.append((inst, rep))
        _progress(f"suite cell d={d} T={T}: {len(SUITE_SEEDS)} runs "
                  f"in {time.perf_counter() - cell0:.1f}s")
    return {"runs": runs, "elapsed": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def rotating_runs():
    """Criterion 7 pair: greedy and Steiner on the rotating adversary."""
    t0 = time.perf_counter()
    inst = gen_rotating(ROTATING_LENGTH, step_angle=ROTATING_ANGLE)
    greedy = run(inst, algorithm="greedy")
    steiner = run(inst, algorithm="steiner", seed=0, options=_suite_options(2))
    return {"instance": inst, "greedy": greedy, "steiner": steiner,
            "elapsed": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def gap_runs():
    """Criterion 8 pairs: literal inverse-square chaser vs planar ideal."""
    mc_opts = ChaserOptions(eps_schedule="inverse_square", eps_scale=1.0,
                            delta=1.0, sample_cap=None, anchors=256,
                            anchor_eps_fraction=1e-3, anchor_max_iter=4000)
    ideal_opts = ChaserOptions(anchors=256, anchor_eps_fraction=1e-3,
                               anchor_max_iter=4000,
                               quadrature_resolution=20000,
                               ideal_r_rule="reset")
    t0 = time.perf_counter()
    pairs = []
    for s in range(GAP_SEEDS):
        inst = gen_random(2, GAP_LENGTH, seed=1000 + s)
        mc = run(inst, algorithm="steiner", seed=s, options=mc_opts)
        ideal = run(inst, algorithm="ideal2d", seed=s, options=ideal_opts)
        pairs.append((inst, mc, ideal))
        if (s + 1) % 10 == 0:
            _progress(f"gap pairs {s + 1}/{GAP_SEEDS} "
                      f"in {time.perf_counter() - t0:.1f}s")
    return {"pairs": pairs, "elapsed": time.perf_counter() - t0}


# -------------------------------------------------------------------- criteria


def test_criterion_1_solver_matches_grid_oracle(capsys):
    rng = np.random.default_rng(501)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 3))
        t = int(rng.integers(1, 4))
        normals = rng.standard_normal((t, d))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = rng.uniform(-1.5, 1.5, size=t)
        reqs = tuple(HalfSpace(normals[i], float(offsets[i])) for i in range(t))
        res = solve_min_movement(TrajectoryProblem(reqs, np.zeros(d)), 1e-4)
        ref, _ = grid_min_movement(normals, offsets, np.zeros(d),
                                   init_halfwidth=5.0)
        worst = max(worst, abs(res.value - ref))
    elapsed = time.perf_counter() - t0
    ok = worst <= ORACLE_TOL and elapsed <= ORACLE_TIME_LIMIT
    _verdict(capsys, 1, "solver vs grid oracle", ok,
             f"max |value diff| {worst:.2e} over 50 instances "
             f"(tol {ORACLE_TOL}), {elapsed:.1f}s (limit {ORACLE_TIME_LIMIT:.0f}s)")
    assert worst <= ORACLE_TOL
    assert elapsed <= ORACLE_TIME_LIMIT


def test_criterion_2_work_function_invariants(capsys):
    rng = np.random.default_rng(502)
    t0 = time.perf_counter()
    worst = {"convexity": -np.inf, "lipschitz": -np.inf,
             "monotonicity": -np.inf, "reflection": -np.inf}

    def random_oracle():
        d = int(rng.integers(1, 4))
        t = int(rng.integers(1, 6))
        return WorkFunctionOracle(_random_requests(rng, d, t)), d

    for _ in range(PROBES_PER_PROPERTY):
        # convexity: w(lam x + (1-lam) y) <= lam w(x) + (1-lam) w(y)
        oracle, d = random_oracle()
        x = rng.standard_normal(d) * 2.0
        y = rng.standard_normal(d) * 2.0
        lam = float(rng.uniform())
        wx = oracle.value(x, eps=PROBE_EPS)
        wy = oracle.value(y, eps=PROBE_EPS)
        wm = oracle.value(lam * x + (1 - lam) * y, eps=PROBE_EPS)
        worst["convexity"] = max(worst["convexity"],
                                 wm - (lam * wx + (1 - lam) * wy))
        # 1-Lipschitz: |w(x) - w(y)| <= |x - y|
        worst["lipschitz"] = max(worst["lipschitz"],
                                 abs(wx - wy) - float(np.linalg.norm(x - y)))

    for _ in range(PROBES_PER_PROPERTY):
        # monotonicity: adding a request never lowers the work function
        oracle, d = random_oracle()
        grown = oracle.extend(_random_requests(rng, d, 1)[0])
        x = rng.standard_normal(d) * 2.0
        worst["monotonicity"] = max(
            worst["monotonicity"],
            oracle.value(x, eps=PROBE_EPS) - grown.value(x, eps=PROBE_EPS))

    done = 0
    while done < PROBES_PER_PROPERTY:
        # reflection: folding a point that violates the last request across
        # its boundary never raises the work function
        oracle, d = random_oracle()
        last = oracle.requests[-1]
        x = rng.standard_normal(d) * 2.0
        if last.signed_gap(x) >= -1e-6:
            continue
        done += 1
        wx = oracle.value(x, eps=PROBE_EPS)
        wr = oracle.value(reflect(x, last), eps=PROBE_EPS)
        worst["reflection"] = max(worst["reflection"], wr - wx)

    elapsed = time.perf_counter() - t0
    bad = max(worst.values())
    ok = bad <= PROBE_SLACK and elapsed <= PROBE_TIME_LIMIT
    detail = ", ".join(f"{k} {v:+.2e}" for k, v in worst.items())
    _verdict(capsys, 2, "work-function invariants", ok,
             f"worst violations [{detail}] (slack {PROBE_SLACK:.0e}), "
             f"{elapsed:.1f}s (limit {PROBE_TIME_LIMIT:.0f}s)")
    for name, v in worst.items():
        assert v <= PROBE_SLACK, name
    assert elapsed <= PROBE_TIME_LIMIT


def test_criterion_3_steiner_estimator_contract(capsys):
    t0 = time.perf_counter()
    results = []
    combos = []
    for d in (2, 3):
        ball_center = np.full(d, 0.1)
        combos.append((f"ball-d{d}", _BatchBall(ball_center, 1.0),
                       ball_center, float(np.linalg.norm(ball_center)) + 1.0))
        box_center = np.full(d, -0.2)
        halfwidth = np.full(d, 0.5)
        combos.append((f"box-d{d}", _BatchBox(box_center, halfwidth),
                       box_center,
                       float(np.linalg.norm(box_center) + np.linalg.norm(halfwidth))))
    for name, body, true_pt, radius in combos:
        d = true_pt.shape[0]
        errs = np.empty(ESTIMATOR_TRIALS)
        for trial in range(ESTIMATOR_TRIALS):
            query = SteinerQuery(support=body, dimension=d,
                                 bounding_radius=radius, eps=ESTIMATOR_EPS,
                                 delta=ESTIMATOR_DELTA,
                                 rng=np.random.default_rng(90_000 + trial))
            errs[trial] = np.linalg.norm(estimate_steiner(query) - true_pt)
        fail_rate = float(np.mean(errs > 2 * ESTIMATOR_EPS))
        results.append((name, fail_rate, float(errs.mean())))
    elapsed = time.perf_counter() - t0
    worst_fail = max(r[1] for r in results)
    worst_mean = max(r[2] for r in results)
    ok = (worst_fail <= ESTIMATOR_FAIL_LIMIT
          and worst_mean <= ESTIMATOR_MEAN_LIMIT
          and elapsed <= ESTIMATOR_TIME_LIMIT)
    detail = ", ".join(f"{n} fail {f:.3f} mean {m:.4f}" for n, f, m in results)
    _verdict(capsys, 3, "estimator statistical contract", ok,
             f"[{detail}] (fail limit {ESTIMATOR_FAIL_LIMIT}, "
             f"mean limit {ESTIMATOR_MEAN_LIMIT:.4f}), {elapsed:.1f}s "
             f"(limit {ESTIMATOR_TIME_LIMIT:.0f}s)")
    assert worst_fail <= ESTIMATOR_FAIL_LIMIT
    assert worst_mean <= ESTIMATOR_MEAN_LIMIT
    assert elapsed <= ESTIMATOR_TIME_LIMIT


def test_criterion_4_feasibility(capsys, suite_runs, rotating_runs, gap_runs):
    # projection-bearing policies: exact service of every request
    worst = 0.0
    checked = 0
    projecting = [(inst, rep) for inst, rep in suite_runs["runs"]]
    projecting.append((rotating_runs["instance"], rotating_runs["greedy"]))
    projecting.append((rotating_runs["instance"], rotating_runs["steiner"]))
    projecting.extend((inst, mc) for inst, mc, _ in gap_runs["pairs"])
    for inst, rep in projecting:
        for i in range(rep.steps_completed):
            gap = inst.requests[i].signed_gap(rep.positions[i])
            worst = max(worst, -gap)
            checked += 1
    # the planar ideal variant does not project; its own contract is the
    # membership flag at 1e-3 * r, so it must simply never flag here
    ideal_flagged = sum(int(ideal.flagged.sum()) for _, _, ideal in gap_runs["pairs"])
    ok = worst <= FEASIBILITY_TOL and ideal_flagged == 0
    _verdict(capsys, 4, "feasibility of emitted points", ok,
             f"worst violation {worst:.2e} over {checked} projected steps "
             f"(tol {FEASIBILITY_TOL:.0e}); ideal-variant flags {ideal_flagged}")
    assert worst <= FEASIBILITY_TOL
    assert ideal_flagged == 0


def test_criterion_5_phase_structure(capsys, suite_runs, rotating_runs, gap_runs):
    # r never decreases, and the final phase count is covered by the
    # guess-and-double budget relative to the offline optimum
    reports = [rep for _, rep in suite_runs["runs"]]
    reports.append(rotating_runs["steiner"])
    reports.extend(mc for _, mc, _ in gap_runs["pairs"])
    reports.extend(ideal for _, _, ideal in gap_runs["pairs"])
    worst_slack = -(10 ** 9)
    monotone_ok = True
    for rep in reports:
        rset = rep.r_values[rep.r_values > 0.0]
        if rset.size == 0:
            continue
        if np.any(np.diff(rset) < -1e-12):
            monotone_ok = False
        if not np.isfinite(rep.opt_value):
            continue
        r0 = float(rset[0])
        budget = math.ceil(math.log(max(rep.opt_value / r0, 1.0))
                           / math.log(PHASE_GROWTH_BASE)) + 1
        final_phase = int(rep.phases[-1])
        worst_slack = max(worst_slack, final_phase - budget)
    ok = monotone_ok and worst_slack <= 0
    _verdict(capsys, 5, "phase structure", ok,
             f"r nondecreasing on all {len(reports)} runs: {monotone_ok}; "
             f"max(phases - budget) {worst_slack:+d}")
    assert monotone_ok
    assert worst_slack <= 0


def test_criterion_6_competitive_ratio(capsys, suite_runs):
    elapsed = suite_runs["elapsed"]
    aborted = [rep for _, rep in suite_runs["runs"] if rep.aborted]
    worst_c = 0.0
    worst_label = ""
    for _, rep in suite_runs["runs"]:
        c = rep.ratio / competitive_normalizer(rep.dimension, rep.length)
        if c > worst_c:
            worst_c = c
            worst_label = rep.instance_label
    ok = (not aborted and np.isfinite(worst_c)
          and worst_c <= SUITE_RATIO_CONST and elapsed <= SUITE_TIME_LIMIT)
    _verdict(capsys, 6, "competitive ratio", ok,
             f"{len(suite_runs['runs'])} runs, measured constant "
             f"C = {worst_c:.3f} at {worst_label} (limit {SUITE_RATIO_CONST}), "
             f"{len(aborted)} aborted, {elapsed:.0f}s "
             f"(limit {SUITE_TIME_LIMIT:.0f}s)")
    assert not aborted
    assert worst_c <= SUITE_RATIO_CONST
    assert elapsed <= SUITE_TIME_LIMIT


def test_criterion_7_baseline_separation(capsys, rotating_runs):
    greedy = rotating_runs["greedy"]
    steiner = rotating_runs["steiner"]
    elapsed = rotating_runs["elapsed"]
    sep = greedy.ratio / steiner.ratio
    ok = (not greedy.aborted and not steiner.aborted
          and sep >= ROTATING_SEPARATION and elapsed <= ROTATING_TIME_LIMIT)
    _verdict(capsys, 7, "baseline separation", ok,
             f"rotating d=2 T={ROTATING_LENGTH} angle {ROTATING_ANGLE}: "
             f"greedy ratio {greedy.ratio:.3f} vs steiner {steiner.ratio:.3f} "
             f"(x{sep:.2f}, need x{ROTATING_SEPARATION}), {elapsed:.0f}s "
             f"(limit {ROTATING_TIME_LIMIT:.0f}s)")
    assert not greedy.aborted and not steiner.aborted
    assert sep >= ROTATING_SEPARATION
    assert elapsed <= ROTATING_TIME_LIMIT


def test_criterion_8_ideal_vs_efficient_gap(capsys, gap_runs):
    diffs = []
    bounds = []
    for _, mc, ideal in gap_runs["pairs"]:
        assert not mc.aborted and not ideal.aborted
        diffs.append(abs(mc.total_cost - ideal.total_cost))
        ts = np.arange(1, mc.steps_completed + 1, dtype=np.float64)
        bounds.append(4.0 * float(np.sum(mc.r_values / ts ** 2)))
    mean_diff = float(np.mean(diffs))
    mean_bound = float(np.mean(bounds))
    ok = mean_diff <= mean_bound
    _verdict(capsys, 8, "ideal vs efficient gap", ok,
             f"mean |cost diff| {mean_diff:.4f} <= mean 4*sum(r_t/t^2) "
             f"{mean_bound:.4f} over {GAP_SEEDS} seeds (d=2, T={GAP_LENGTH}), "
             f"{gap_runs['elapsed']:.0f}s")
    assert mean_diff <= mean_bound


def test_criterion_9_bit_identical_reports(capsys):
    t0 = time.perf_counter()
    inst = gen_random(2, 10, seed=31)
    opts = _suite_options(2)
    ideal_opts = ChaserOptions(anchors=64, quadrature_resolution=4096)
    texts = {}
    for algo, options in [("steiner", opts), ("greedy", None),
                          ("ideal2d", ideal_opts)]:
        a = report_csv(run(inst, algorithm=algo, seed=13, options=options))
        b = report_csv(run(inst, algorithm=algo, seed=13, options=options))
        texts[algo] = (a == b)
    elapsed = time.perf_counter() - t0
    ok = all(texts.values())
    _verdict(capsys, 9, "bit-identical reports", ok,
             f"repeated runs byte-equal per algorithm: {texts}, {elapsed:.1f}s")
    assert all(texts.values())
