"""Acceptance gate: one test per primary shipping criterion.

Each test asserts its criterion at the stated tolerance and runtime budget
and reports every sub-check in the failure message, so the verbose pytest
line for each test is the criterion's pass/fail verdict.
"""
import csv
import io
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mobandit.analysis import default_validation_queries, mc_validate_bound, thm1_bound
from mobandit.environments import NoiseStream
from mobandit.geometry import Action, ActionSet, ObjectiveVector, pareto_front
from mobandit.harness import (
    MVN_TS,
    SCALARIZED_BASELINE,
    ExperimentConfig,
    export,
    pareto_regret,
    run_experiment,
)
from mobandit.policies import (
    PosteriorState,
    initial_state,
    mvn_ts_select,
    posterior_params,
    sample_posterior_matrix,
    update,
)
from mobandit.preferences import (
    ChebyshevPreference,
    LinearPreference,
    RadiusAssignment,
    RadiusEntry,
    certify_radii,
    gap_table,
)
from mobandit.presets import (
    demo_action_set,
    demo_constraint_preference,
    demo_environment,
    demo_linear_preference,
)
from mobandit.service import build_app


def check(lines: list, failures: list, ok: bool, label: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}: {label}"
    lines.append(line)
    if not ok:
        failures.append(line)


def finish(lines: list, failures: list) -> None:
    assert not failures, "\n" + "\n".join(lines)


# Two-decimal reference rows the demo gap tables must reproduce:
# (mean, linear value, constraint value, linear gap, constraint gap).
REFERENCE_TABLE = (
    ((0.56, 0.46), 0.50, 0.46, 0.17, 0.26),
    ((0.75, 0.26), 0.46, 0.26, 0.21, 0.46),
    ((0.34, 0.79), 0.61, 0.00, 0.06, 0.72),
    ((0.67, 0.50), 0.56, 0.50, 0.11, 0.22),
    ((0.70, 0.42), 0.54, 0.42, 0.13, 0.29),
    ((0.54, 0.72), 0.65, 0.72, 0.02, 0.00),
    ((0.49, 0.62), 0.57, 0.00, 0.10, 0.72),
    ((0.13, 0.84), 0.56, 0.00, 0.11, 0.72),
    ((0.78, 0.60), 0.67, 0.60, 0.00, 0.12),
    ((0.63, 0.44), 0.51, 0.44, 0.16, 0.28),
)


def run_table1(pref_flag: str) -> tuple[list, float]:
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "mobandit", "table1", "--pref", pref_flag],
        capture_output=True,
        text=True,
        check=True,
    )
    elapsed = time.perf_counter() - start
    return list(csv.DictReader(io.StringIO(proc.stdout))), elapsed


def test_criterion_1_table1_reproduction():
    lines, failures = [], []
    linear_rows, linear_time = run_table1("linear")
    econ_rows, econ_time = run_table1("econstraint")
    check(lines, failures, linear_time < 1.0, f"linear table runtime {linear_time:.2f}s < 1s")
    check(lines, failures, econ_time < 1.0, f"constraint table runtime {econ_time:.2f}s < 1s")
    for i, (mean, f_lin, f_eps, gap_lin, gap_eps) in enumerate(REFERENCE_TABLE):
        got = (
            float(linear_rows[i]["value"]),
            float(econ_rows[i]["value"]),
            float(linear_rows[i]["gap"]),
            float(econ_rows[i]["gap"]),
        )
        for label, recomputed, reference in zip(
            ("linear value", "constraint value", "linear gap", "constraint gap"),
            got,
            (f_lin, f_eps, gap_lin, gap_eps),
        ):
            diff = abs(recomputed - reference)
            check(
                lines,
                failures,
                diff <= 0.005,
                f"{mean} {label}: recomputed {recomputed:.4f} vs table {reference:.2f} "
                f"(|diff| {diff:.4f} <= 0.005)",
            )
    finish(lines, failures)


def test_criterion_2_wrong_optimum_demonstration():
    lines, failures = [], []
    start = time.perf_counter()
    config = ExperimentConfig(
        environment=demo_environment("multi_bernoulli"),
        preference=demo_constraint_preference(),
        policies=(MVN_TS, SCALARIZED_BASELINE),
        horizon=10_000,
        repetitions=20,
        seed=7,
    )
    result = run_experiment(config)
    elapsed = time.perf_counter() - start
    window = 2_000
    baseline = result.curve_for(SCALARIZED_BASELINE).mean_curve()
    sampler = result.curve_for(MVN_TS).mean_curve()
    baseline_slope = (baseline[-1] - baseline[-window - 1]) / window
    sampler_slope = (sampler[-1] - sampler[-window - 1]) / window
    played = total = 0
    for record in result.records:
        if record.policy == SCALARIZED_BASELINE and record.episode > config.horizon - window:
            total += 1
            played += record.action == 8
    frequency = played / total
    ratio = sampler[-1] / baseline[-1]
    check(
        lines,
        failures,
        abs(baseline_slope - 0.12) <= 0.02,
        f"baseline last-{window} slope {baseline_slope:.4f} = 0.12 +/- 0.02",
    )
    check(
        lines,
        failures,
        frequency > 0.9,
        f"baseline frequency of (0.78, 0.60) in last {window}: {frequency:.4f} > 0.9",
    )
    check(
        lines,
        failures,
        sampler_slope < 0.01,
        f"vector sampler last-{window} slope {sampler_slope:.4f} < 0.01",
    )
    check(
        lines,
        failures,
        ratio < 0.20,
        f"vector sampler final regret {sampler[-1]:.1f} vs baseline {baseline[-1]:.1f}: "
        f"ratio {ratio:.3f} < 0.20",
    )
    check(lines, failures, elapsed < 120.0, f"runtime {elapsed:.1f}s < 120s")
    finish(lines, failures)


def test_criterion_3_sublinear_regret():
    lines, failures = [], []
    start = time.perf_counter()
    config = ExperimentConfig(
        environment=demo_environment("mvn"),
        preference=demo_linear_preference(),
        policies=(MVN_TS,),
        horizon=10_000,
        repetitions=20,
        seed=7,
    )
    result = run_experiment(config)
    elapsed = time.perf_counter() - start
    mean = result.curve_for(MVN_TS).mean_curve()
    at_1k, at_10k = mean[999], mean[9999]
    extrapolated = 10.0 * at_1k
    check(
        lines,
        failures,
        at_10k < 0.6 * extrapolated,
        f"final regret {at_10k:.1f} < 0.6 x linear extrapolation {extrapolated:.1f}",
    )
    table = gap_table(config.preference, config.environment.actions)
    # Reference noise scale at the precondition boundary: 0.35^2 <= 1/(4*2).
    reference = thm1_bound(table, 0.35, 2, config.horizon)
    experiment = thm1_bound(
        table, config.environment.sub_gaussian_scale(), 2, config.horizon
    )
    check(
        lines,
        failures,
        reference.precondition_satisfied,
        "reference-scale bound satisfies its variance precondition",
    )
    check(
        lines,
        failures,
        not experiment.precondition_satisfied,
        f"experiment scale {config.environment.sub_gaussian_scale():.4f} reports the "
        "violated precondition flag",
    )
    check(
        lines,
        failures,
        at_10k < reference.value,
        f"final regret {at_10k:.1f} below bound {reference.value:.3e}",
    )
    check(lines, failures, elapsed < 120.0, f"runtime {elapsed:.1f}s < 120s")
    finish(lines, failures)


def test_criterion_4_posterior_correctness():
    lines, failures = [], []
    rng = np.random.default_rng(1234)
    worst_mean = worst_cov = 0.0
    for _ in range(1_000):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        steps = int(rng.integers(0, 26))
        state = initial_state(n, d)
        sums = np.zeros((n, d))
        counts = np.zeros(n)
        for _ in range(steps):
            action = int(rng.integers(n))
            observation = rng.random(d)
            state = update(state, action, observation)
            sums[action] += observation
            counts[action] += 1
        for action in range(n):
            mean, cov = posterior_params(state, action)
            expected_mean = sums[action] / (counts[action] + 1.0)
            expected_cov = np.eye(d) / (counts[action] + 1.0)
            worst_mean = max(worst_mean, float(np.abs(mean.as_array() - expected_mean).max()))
            worst_cov = max(worst_cov, float(np.abs(cov - expected_cov).max()))
    check(
        lines,
        failures,
        worst_mean <= 1e-12,
        f"posterior means match the closed form over 1000 sequences (worst {worst_mean:.2e})",
    )
    check(
        lines,
        failures,
        worst_cov <= 1e-12,
        f"posterior covariances match the closed form (worst {worst_cov:.2e})",
    )

    counts = np.array([3.0, 8.0, 15.0])
    sums = np.array([[2.0, 1.2], [3.6, 4.05], [7.2, 6.4]])
    state = PosteriorState(counts=counts, sums=sums, outers=np.zeros((3, 2, 2)))
    m = 100_000
    draw_rng = np.random.default_rng(55)
    draws = np.empty((m, 3, 2))
    for i in range(m):
        draws[i] = sample_posterior_matrix(state, draw_rng)
    for action in range(3):
        scale = counts[action] + 1.0
        true_mean = sums[action] / scale
        true_var = 1.0 / scale
        block = draws[:, action, :]
        mean_error = np.abs(block.mean(axis=0) - true_mean).max()
        mean_budget = 4.0 * math.sqrt(true_var / m)
        empirical_cov = np.cov(block.T)
        var_error = np.abs(np.diag(empirical_cov) - true_var).max()
        cross_error = abs(empirical_cov[0, 1])
        check(
            lines,
            failures,
            mean_error <= mean_budget,
            f"action {action}: sample mean error {mean_error:.2e} within 4 SE {mean_budget:.2e}",
        )
        check(
            lines,
            failures,
            var_error <= 0.05 * true_var,
            f"action {action}: sample variance error {var_error:.2e} within 5% of {true_var:.4f}",
        )
        check(
            lines,
            failures,
            cross_error <= 0.05 * true_var,
            f"action {action}: cross-covariance {cross_error:.2e} within 5% of the variance",
        )
    finish(lines, failures)


SELECTION_FIXTURES = (
    (
        np.array([3.0, 8.0, 15.0]),
        np.array([[2.0, 1.2], [3.6, 4.05], [7.2, 6.4]]),
        LinearPreference((0.4, 0.6)),
    ),
    (
        np.array([0.0, 2.0, 6.0]),
        np.array([[0.0, 0.0], [1.3, 0.9], [2.9, 4.1]]),
        ChebyshevPreference((0.5, 0.5)),
    ),
)


def test_criterion_5_selection_probability_oracle():
    lines, failures = [], []
    trials = 1_000_000
    for fixture_id, (counts, sums, pref) in enumerate(SELECTION_FIXTURES):
        state = PosteriorState(counts=counts, sums=sums, outers=np.zeros((3, 2, 2)))
        scale = counts + 1.0
        means = sums / scale[:, None]
        stds = 1.0 / np.sqrt(scale)
        oracle_rng = np.random.default_rng(1000 + fixture_id)
        thetas = means[None, :, :] + stds[None, :, None] * oracle_rng.standard_normal(
            (trials, 3, 2)
        )
        scores = pref.values(thetas.reshape(-1, 2)).reshape(trials, 3)
        oracle = np.bincount(scores.argmax(axis=1), minlength=3) / trials
        select_rng = np.random.default_rng(2000 + fixture_id)
        chosen = np.zeros(3)
        for _ in range(trials):
            action, _ = mvn_ts_select(state, pref, select_rng)
            chosen[action] += 1
        frequencies = chosen / trials
        worst = float(np.abs(frequencies - oracle).max())
        check(
            lines,
            failures,
            worst <= 0.01,
            f"fixture {fixture_id}: frequencies {np.round(frequencies, 4).tolist()} vs "
            f"oracle {np.round(oracle, 4).tolist()} (max |diff| {worst:.4f} <= 0.01)",
        )
    finish(lines, failures)


def test_criterion_6_concentration_fact_validation():
    lines, failures = [], []
    start = time.perf_counter()
    rng = np.random.default_rng(2718)
    violations = []
    queries = default_validation_queries()
    for query in queries:
        verdict = mc_validate_bound(query, 100_000, rng)
        if not verdict.holds:
            violations.append(f"{query}: empirical {verdict.empirical} vs bound {verdict.bound}")
    elapsed = time.perf_counter() - start
    check(
        lines,
        failures,
        not violations,
        f"all {len(queries)} grid cells hold at 1e5 trials" + "".join(f"; {v}" for v in violations),
    )
    check(lines, failures, elapsed < 60.0, f"runtime {elapsed:.1f}s < 60s")
    finish(lines, failures)


def test_criterion_7_dimensional_constant_verification():
    lines, failures = [], []
    for d, log_constant in ((1, 14.0), (2, 24.0), (3, 35.0)):
        worst = math.inf
        for log_i in np.geomspace(log_constant, 3.0 * log_constant, 11):
            gap = (
                0.5 * log_i
                - 0.5 * d * math.log(18.0 * math.pi * d * log_i)
                - math.log(2.0 * log_i - math.log(d))
            )
            worst = min(worst, gap)
        check(
            lines,
            failures,
            worst >= 0.0,
            f"d={d}: log-space defining gap >= 0 at e^{log_constant:.0f} and 10 "
            f"log-spaced probes (worst {worst:.3f})",
        )
    finish(lines, failures)


def random_linear_instance(rng):
    n = int(rng.integers(2, 9))
    means = rng.random((n, 2))
    raw = rng.random(2) + 1e-3
    weights = raw / raw.sum()
    pref = LinearPreference((float(weights[0]), float(weights[1])))
    actions = ActionSet(
        tuple(
            Action(f"a{i}", ObjectiveVector((float(m[0]), float(m[1]))))
            for i, m in enumerate(means)
        )
    )
    return pref, actions


def test_criterion_8_radius_algebra():
    lines, failures = [], []
    rng = np.random.default_rng(99)
    tested = mismatches = 0
    while tested < 200:
        pref, actions = random_linear_instance(rng)
        table = gap_table(pref, actions)
        suboptimal = table.suboptimal()
        if not suboptimal:
            continue
        entries = {}
        knife_edge = False
        separable = True
        for a in suboptimal:
            rho_star = float(rng.uniform(0.005, 0.35))
            rho = float(rng.uniform(0.005, 0.35))
            entries[a] = RadiusEntry(rho_star, rho, rho * 0.5)
            margin = table.gaps[a] - (rho_star + rho)
            if abs(margin) < 1e-9:
                knife_edge = True
            if margin <= 0.0:
                separable = False
        if knife_edge:
            continue
        tested += 1
        assignment = RadiusAssignment(star=table.star, entries=entries)
        if certify_radii(pref, actions, assignment) != separable:
            mismatches += 1
    check(
        lines,
        failures,
        mismatches == 0,
        f"certificate equals the gap comparison on 200 random linear instances "
        f"({mismatches} mismatches)",
    )

    front = pareto_front(demo_action_set())
    check(lines, failures, front == {2, 5, 7, 8}, f"demo Pareto front {sorted(front)} == [2, 5, 7, 8]")

    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        means = rng.random((n, 2))
        actions = ActionSet(
            tuple(
                Action(f"a{i}", ObjectiveVector((float(m[0]), float(m[1]))))
                for i, m in enumerate(means)
            )
        )
        for index in range(n):
            closed = pareto_regret(actions, index)
            if not _dominated(means, index, 0.0):
                oracle = 0.0
            else:
                lo, hi = 0.0, 3.0
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if _dominated(means, index, mid):
                        lo = mid
                    else:
                        hi = mid
                oracle = hi
            worst = max(worst, abs(closed - oracle))
    check(
        lines,
        failures,
        worst <= 1e-9,
        f"pareto regret matches the bisection oracle on 100 instances (worst {worst:.2e})",
    )
    finish(lines, failures)


def _dominated(means: np.ndarray, index: int, eps: float) -> bool:
    x = means[index] + eps
    for b in range(len(means)):
        if b != index and np.all(means[b] >= x) and np.any(means[b] > x):
            return True
    return False


def test_criterion_9_determinism(tmp_path):
    lines, failures = [], []
    config = ExperimentConfig(
        environment=demo_environment("mvn"),
        preference=demo_linear_preference(),
        policies=(MVN_TS, SCALARIZED_BASELINE),
        horizon=150,
        repetitions=3,
        seed=5,
    )
    first = export(run_experiment(config), tmp_path / "one")
    second = export(run_experiment(config), tmp_path / "two")
    csv_equal = first["regret"].read_bytes() == second["regret"].read_bytes()
    summary_equal = first["summary"].read_bytes() == second["summary"].read_bytes()
    check(lines, failures, csv_equal, "re-run with equal config yields byte-identical CSV")
    check(lines, failures, summary_equal, "re-run yields byte-identical JSON summary")

    seed, horizon = 2024, 40
    with TestClient(build_app()) as client:
        created = client.post(
            "/sessions",
            json={
                "env": demo_environment("mvn").to_dict(),
                "mode": "scripted",
                "horizon": horizon,
                "seed": seed,
                "preference": demo_linear_preference().to_dict(),
            },
        ).json()
        client.post(f"/sessions/{created['id']}/run")
        history = client.get(f"/sessions/{created['id']}/history").json()["history"]
    reference = run_experiment(
        ExperimentConfig(
            environment=demo_environment("mvn"),
            preference=demo_linear_preference(),
            policies=(MVN_TS,),
            horizon=horizon,
            repetitions=1,
            seed=seed,
        )
    ).records
    actions_equal = [h["chosen_index"] for h in history] == [r.action for r in reference]
    observations_equal = [tuple(h["observation"]) for h in history] == [
        r.observation for r in reference
    ]
    check(
        lines,
        failures,
        actions_equal and len(history) == horizon,
        f"scripted elicitation replays the harness action sequence over {horizon} episodes",
    )
    check(
        lines,
        failures,
        observations_equal,
        "scripted elicitation observations are identical to the harness run",
    )
    finish(lines, failures)
