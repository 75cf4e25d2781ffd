"""Episodic experiment harness: the play/observe/update loop, paired
repetition runs, regret accounting, Pareto-regret, and delimited export.

Policies are named by string and dispatched on their state type: the
multivariate Thompson sampler keeps a vector posterior and consumes the raw
observation, while the scalarized baseline keeps a scalar posterior and
consumes the preference value of the same paired observation.  Both consume
identical primitive noise on a given (seed, repetition) stream, so their
trajectories differ only through their choices.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .environments import (
    EnvironmentSpec,
    NoiseStream,
    environment_from_dict,
    sample_outcome,
)
from .geometry import ActionSet
from .policies import (
    PosteriorState,
    ScalarPosteriorState,
    gaussian_ts_select,
    initial_scalar_state,
    initial_state,
    mvn_ts_select,
    scalar_update,
    update,
)
from .preferences import GapTable, Preference, gap_table, preference_from_dict

__all__ = [
    "MVN_TS",
    "SCALARIZED_BASELINE",
    "POLICY_NAMES",
    "ExperimentConfig",
    "experiment_config_from_dict",
    "RunRecord",
    "RegretCurve",
    "ExperimentResult",
    "run_episode",
    "run_experiment",
    "pareto_regret",
    "export",
]

MVN_TS = "mvn_ts"
SCALARIZED_BASELINE = "scalarized_gaussian_ts"
POLICY_NAMES = (MVN_TS, SCALARIZED_BASELINE)

CSV_HEADER = ("policy", "repetition", "episode", "action", "gap", "cum_regret")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one batch experiment.

    All policies run against identical (seed, repetition) noise streams, so
    per-repetition comparisons between policies are paired.
    """

    environment: EnvironmentSpec
    preference: Preference
    policies: tuple[str, ...]
    horizon: int
    repetitions: int
    seed: int
    output_dir: str | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        policies = tuple(self.policies)
        if len(policies) == 0:
            raise ValueError("at least one policy is required")
        if len(set(policies)) != len(policies):
            raise ValueError(f"duplicate policy names in {policies}")
        for name in policies:
            if name not in POLICY_NAMES:
                raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
        if self.preference.dimension != self.environment.dimension:
            raise ValueError(
                f"preference dimension {self.preference.dimension} does not match "
                f"environment dimension {self.environment.dimension}"
            )
        object.__setattr__(self, "policies", policies)

    def to_dict(self) -> dict:
        data = {
            "environment": self.environment.to_dict(),
            "preference": self.preference.to_dict(),
            "policies": list(self.policies),
            "horizon": self.horizon,
            "repetitions": self.repetitions,
            "seed": self.seed,
        }
        if self.output_dir is not None:
            data["output_dir"] = self.output_dir
        return data


def experiment_config_from_dict(data: Mapping) -> ExperimentConfig:
    """Build an experiment config from its wire-format mapping."""
    try:
        environment = environment_from_dict(data["environment"])
        preference = preference_from_dict(data["preference"])
        policies = tuple(data["policies"])
        horizon = int(data["horizon"])
        repetitions = int(data["repetitions"])
        seed = int(data["seed"])
    except KeyError as exc:
        raise ValueError(f"experiment config is missing field {exc.args[0]!r}") from exc
    output_dir = data.get("output_dir")
    return ExperimentConfig(
        environment=environment,
        preference=preference,
        policies=policies,
        horizon=horizon,
        repetitions=repetitions,
        seed=seed,
        output_dir=None if output_dir is None else str(output_dir),
    )


@dataclass(frozen=True, slots=True)
class RunRecord:
    """One episode of one repetition of one policy."""

    policy: str
    repetition: int
    episode: int
    action: int
    observation: tuple[float, ...]
    gap: float


@dataclass(frozen=True, eq=False)
class RegretCurve:
    """Cumulative pseudo-regret trajectories for one policy.

    ``per_repetition`` has shape (repetitions, horizon); row ``r`` is the
    running sum of instantaneous gaps for repetition ``r``.
    """

    policy: str
    per_repetition: np.ndarray

    def __post_init__(self) -> None:
        curves = np.asarray(self.per_repetition, dtype=float)
        if curves.ndim != 2 or curves.size == 0:
            raise ValueError(f"expected a (repetitions, horizon) array, got {curves.shape}")
        if np.any(np.diff(curves, axis=1) < 0.0):
            raise ValueError("cumulative regret must be nondecreasing in the episode")
        if np.any(curves[:, 0] < 0.0):
            raise ValueError("cumulative regret must be nonnegative")
        curves = curves.copy()
        curves.setflags(write=False)
        object.__setattr__(self, "per_repetition", curves)

    @property
    def repetitions(self) -> int:
        return int(self.per_repetition.shape[0])

    @property
    def horizon(self) -> int:
        return int(self.per_repetition.shape[1])

    def mean_curve(self) -> np.ndarray:
        """Pointwise mean over repetitions, shape (horizon,)."""
        return self.per_repetition.mean(axis=0)

    def final_regrets(self) -> np.ndarray:
        """Final cumulative regret of each repetition, shape (repetitions,)."""
        return self.per_repetition[:, -1].copy()

    def mean_final_regret(self) -> float:
        return float(self.per_repetition[:, -1].mean())


@dataclass(frozen=True)
class ExperimentResult:
    """Everything produced by one experiment run.

    Records are ordered by (policy position in the config, repetition,
    episode); curves follow the config's policy order.
    """

    config: ExperimentConfig
    records: tuple[RunRecord, ...]
    curves: tuple[RegretCurve, ...]

    def curve_for(self, policy: str) -> RegretCurve:
        for curve in self.curves:
            if curve.policy == policy:
                return curve
        raise KeyError(f"no curve for policy {policy!r}")


def _initial_policy_state(
    policy: str, n_actions: int, dimension: int
) -> PosteriorState | ScalarPosteriorState:
    if policy == MVN_TS:
        return initial_state(n_actions, dimension)
    if policy == SCALARIZED_BASELINE:
        return initial_scalar_state(n_actions)
    raise ValueError(f"unknown policy {policy!r}; expected one of {POLICY_NAMES}")


def run_episode(
    state: PosteriorState | ScalarPosteriorState,
    env: EnvironmentSpec,
    pref: Preference,
    stream: NoiseStream,
    episode: int,
    *,
    gaps: GapTable | None = None,
    policy: str | None = None,
) -> tuple[PosteriorState | ScalarPosteriorState, RunRecord]:
    """Play one episode: select, observe, update, and record the true gap.

    The state type picks the policy: a vector posterior selects by sampling
    the whole estimate matrix and maximizing the preference; a scalar
    posterior selects by sampling per-action scores directly and is fed the
    scalarized value of the paired observation.
    """
    if episode < 1:
        raise ValueError(f"episode must be >= 1, got {episode}")
    if gaps is None:
        gaps = gap_table(pref, env.actions)
    rng = stream.policy_rng(episode)
    if isinstance(state, PosteriorState):
        action, _ = mvn_ts_select(state, pref, rng)
        name = MVN_TS
    elif isinstance(state, ScalarPosteriorState):
        action = gaussian_ts_select(state, rng)
        name = SCALARIZED_BASELINE
    else:
        raise TypeError(f"unsupported policy state {type(state).__name__}")
    observation = sample_outcome(env, action, stream, episode)
    if isinstance(state, PosteriorState):
        new_state: PosteriorState | ScalarPosteriorState = update(state, action, observation)
    else:
        new_state = scalar_update(state, action, pref.value(observation.values))
    record = RunRecord(
        policy=policy if policy is not None else name,
        repetition=stream.repetition,
        episode=episode,
        action=action,
        observation=observation.values,
        gap=gaps.gaps[action],
    )
    return new_state, record


def _run_cell(
    config: ExperimentConfig, policy: str, repetition: int, gaps: GapTable
) -> tuple[list[RunRecord], np.ndarray]:
    """One policy on one repetition: T episodes against that cell's stream."""
    env = config.environment
    stream = NoiseStream(config.seed, repetition)
    state = _initial_policy_state(policy, len(env.actions), env.dimension)
    records: list[RunRecord] = []
    cumulative = np.empty(config.horizon, dtype=float)
    total = 0.0
    for episode in range(1, config.horizon + 1):
        state, record = run_episode(
            state, env, config.preference, stream, episode, gaps=gaps, policy=policy
        )
        total += record.gap
        cumulative[episode - 1] = total
        records.append(record)
    return records, cumulative


def _max_workers() -> int:
    raw = os.environ.get("MOBANDIT_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"MOBANDIT_THREADS must be a positive integer, got {raw!r}") from None
    if workers < 1:
        raise ValueError(f"MOBANDIT_THREADS must be a positive integer, got {raw!r}")
    return workers


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every configured policy over every repetition.

    Cells (one policy on one repetition) are independent and execute on a
    thread pool sized by MOBANDIT_THREADS (default: CPU count); results are
    reduced in (policy, repetition) order, so the output is deterministic
    regardless of scheduling.
    """
    gaps = gap_table(config.preference, config.environment.actions)
    cells = [
        (policy, repetition)
        for policy in config.policies
        for repetition in range(config.repetitions)
    ]
    outputs: dict[tuple[str, int], tuple[list[RunRecord], np.ndarray]] = {}
    workers = min(_max_workers(), len(cells))
    if workers <= 1:
        for policy, repetition in cells:
            outputs[(policy, repetition)] = _run_cell(config, policy, repetition, gaps)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                cell: pool.submit(_run_cell, config, cell[0], cell[1], gaps)
                for cell in cells
            }
        outputs = {cell: future.result() for cell, future in futures.items()}
    records: list[RunRecord] = []
    curves: list[RegretCurve] = []
    for policy in config.policies:
        rows = []
        for repetition in range(config.repetitions):
            cell_records, cumulative = outputs[(policy, repetition)]
            records.extend(cell_records)
            rows.append(cumulative)
        curves.append(RegretCurve(policy=policy, per_repetition=np.stack(rows)))
    return ExperimentResult(config=config, records=tuple(records), curves=tuple(curves))


def pareto_regret(actions: ActionSet, index: int) -> float:
    """Smallest uniform boost after which no other action dominates this one.

    Adding epsilon to every coordinate of the chosen mean escapes domination
    by action b exactly when epsilon reaches min_i (mu_b_i - mu_a_i), so the
    answer is the largest such minimum over competitors, clamped at zero.
    """
    means = actions.means()
    if not 0 <= index < len(means):
        raise ValueError(f"action index {index} out of range for {len(means)} actions")
    gaps = means - means[index]
    best = 0.0
    for b in range(len(means)):
        if b == index:
            continue
        best = max(best, float(gaps[b].min()))
    return max(0.0, best)


def _format_float(value: float) -> str:
    return repr(float(value))


def export(result: ExperimentResult, path: str | Path) -> dict[str, Path]:
    """Write regret.csv and summary.json under ``path``.

    The CSV carries one row per record with a running per-cell cumulative
    regret column; floats are serialized by repr so re-running an identical
    config reproduces the files byte for byte.  Returns the written paths.
    """
    out_dir = Path(path)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    csv_path = out_dir / "regret.csv"
    summary_path = out_dir / "summary.json"
    totals: dict[tuple[str, int], float] = {}
    try:
        with open(csv_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for record in result.records:
                key = (record.policy, record.repetition)
                total = totals.get(key, 0.0) + record.gap
                totals[key] = total
                writer.writerow(
                    (
                        record.policy,
                        record.repetition,
                        record.episode,
                        record.action,
                        _format_float(record.gap),
                        _format_float(total),
                    )
                )
        summary = {
            "config": result.config.to_dict(),
            "policies": {
                curve.policy: {
                    "mean_final_regret": curve.mean_final_regret(),
                    "final_regret_per_repetition": [
                        float(v) for v in curve.final_regrets()
                    ],
                }
                for curve in result.curves
            },
        }
        with open(summary_path, "w", encoding="utf-8") as handle:
            json.dump(summary, handle, indent=2, sort_keys=True)
            handle.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write experiment outputs under {out_dir}: {exc}") from exc
    return {"regret": csv_path, "summary": summary_path}
