"""Thompson sampling from multivariate-normal posteriors plus the
scalarized single-objective baseline.

Both policies keep per-action sufficient statistics and are purely
functional: update returns a new state, and every random primitive comes
from the generator handed in, so a run is fully determined by its stream.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from numpy.random import Generator

from .environments import Observation
from .geometry import ObjectiveVector
from .preferences import Preference

__all__ = [
    "PosteriorState",
    "ScalarPosteriorState",
    "SampledEstimate",
    "initial_state",
    "initial_scalar_state",
    "update",
    "scalar_update",
    "posterior_params",
    "posterior_matrix",
    "empirical_covariance",
    "sample_posterior_matrix",
    "argmax_ties",
    "mvn_ts_select",
    "gaussian_ts_select",
]


@dataclass(frozen=True)
class PosteriorState:
    """Per-action counts, observation sums, and outer-product sums."""

    counts: np.ndarray
    sums: np.ndarray
    outers: np.ndarray

    def __post_init__(self) -> None:
        n, d = self.sums.shape
        if self.counts.shape != (n,):
            raise ValueError("counts and sums disagree on the number of actions")
        if self.outers.shape != (n, d, d):
            raise ValueError("outer-product sums must be one d x d matrix per action")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def n_actions(self) -> int:
        return self.sums.shape[0]

    @property
    def dimension(self) -> int:
        return self.sums.shape[1]


@dataclass(frozen=True)
class ScalarPosteriorState:
    """Per-action counts and scalar-reward sums for the baseline."""

    counts: np.ndarray
    sums: np.ndarray

    def __post_init__(self) -> None:
        if self.counts.shape != self.sums.shape or self.counts.ndim != 1:
            raise ValueError("scalar state needs one count and one sum per action")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def n_actions(self) -> int:
        return self.sums.shape[0]


@dataclass(frozen=True)
class SampledEstimate:
    """One sampling round: the drawn parameter vectors and the tied-argmax
    option set they induce."""

    thetas: tuple[ObjectiveVector, ...]
    option_set: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.option_set:
            raise ValueError("the option set cannot be empty")


def initial_state(n_actions: int, dimension: int) -> PosteriorState:
    if n_actions < 1 or dimension < 1:
        raise ValueError("need at least one action and one objective")
    return PosteriorState(
        counts=np.zeros(n_actions, dtype=np.int64),
        sums=np.zeros((n_actions, dimension)),
        outers=np.zeros((n_actions, dimension, dimension)),
    )


def initial_scalar_state(n_actions: int) -> ScalarPosteriorState:
    if n_actions < 1:
        raise ValueError("need at least one action")
    return ScalarPosteriorState(
        counts=np.zeros(n_actions, dtype=np.int64), sums=np.zeros(n_actions)
    )


def update(
    state: PosteriorState, action: int, z: Union[Observation, Sequence[float]]
) -> PosteriorState:
    """New state with one more observation credited to action."""
    values = z.as_array() if isinstance(z, Observation) else np.asarray(z, dtype=float)
    if values.shape != (state.dimension,):
        raise ValueError(
            f"observation of shape {values.shape} does not fit dimension {state.dimension}"
        )
    if not 0 <= action < state.n_actions:
        raise ValueError(f"action index {action} out of range")
    counts = state.counts.copy()
    sums = state.sums.copy()
    outers = state.outers.copy()
    counts[action] += 1
    sums[action] += values
    outers[action] += np.outer(values, values)
    return PosteriorState(counts=counts, sums=sums, outers=outers)


def scalar_update(
    state: ScalarPosteriorState, action: int, reward: float
) -> ScalarPosteriorState:
    """New scalar state with one more reward credited to action."""
    if not 0 <= action < state.n_actions:
        raise ValueError(f"action index {action} out of range")
    counts = state.counts.copy()
    sums = state.sums.copy()
    counts[action] += 1
    sums[action] += float(reward)
    return ScalarPosteriorState(counts=counts, sums=sums)


def posterior_params(
    state: PosteriorState,
    action: int,
    prior_mean: Optional[Sequence[float]] = None,
    prior_cov: Optional[Sequence[Sequence[float]]] = None,
    outcome_cov: Optional[Sequence[Sequence[float]]] = None,
) -> tuple[ObjectiveVector, np.ndarray]:
    """Posterior mean and covariance for one action.

    The default non-informative setting (zero prior mean, identity prior and
    outcome covariances) reduces to mean = sum/(N+1) and covariance
    I/(N+1). Passing explicit parameters evaluates the general conjugate
    update instead.
    """
    if not 0 <= action < state.n_actions:
        raise ValueError(f"action index {action} out of range")
    d = state.dimension
    n = int(state.counts[action])
    if prior_mean is None and prior_cov is None and outcome_cov is None:
        mean = state.sums[action] / (n + 1)
        cov = np.eye(d) / (n + 1)
        return ObjectiveVector(tuple(float(v) for v in mean)), cov
    mu0 = np.zeros(d) if prior_mean is None else np.asarray(prior_mean, dtype=float)
    s0_inv = np.linalg.inv(
        np.eye(d) if prior_cov is None else np.asarray(prior_cov, dtype=float)
    )
    sa_inv = np.linalg.inv(
        np.eye(d) if outcome_cov is None else np.asarray(outcome_cov, dtype=float)
    )
    cov = np.linalg.inv(s0_inv + n * sa_inv)
    mean = cov @ (s0_inv @ mu0 + sa_inv @ state.sums[action])
    return ObjectiveVector(tuple(float(v) for v in mean)), cov


def posterior_matrix(state: PosteriorState) -> tuple[np.ndarray, np.ndarray]:
    """Default-posterior means (one row per action) and the per-action
    standard deviation of each coordinate."""
    scale = state.counts + 1.0
    return state.sums / scale[:, None], 1.0 / np.sqrt(scale)


def empirical_covariance(state: PosteriorState, action: int) -> np.ndarray:
    """Unbiased sample covariance of the action's observations. Needs at
    least two of them; diagnostic only, the sampler never consumes it."""
    if not 0 <= action < state.n_actions:
        raise ValueError(f"action index {action} out of range")
    n = int(state.counts[action])
    if n < 2:
        raise ValueError(f"sample covariance needs at least 2 observations, have {n}")
    mean = state.sums[action] / n
    return (state.outers[action] - n * np.outer(mean, mean)) / (n - 1)


def sample_posterior_matrix(state: PosteriorState, rng: Generator) -> np.ndarray:
    """One posterior draw per action, as an (actions, d) matrix.

    Posterior covariances are diagonal, so each draw is d independent
    normals; the draws fill one (actions, d) block in action order.
    """
    means, stds = posterior_matrix(state)
    return means + stds[:, None] * rng.standard_normal(means.shape)


def argmax_ties(scores: Sequence[float]) -> tuple[int, ...]:
    """Indices attaining the exact maximum (floating-point equality)."""
    arr = np.asarray(scores, dtype=float)
    return tuple(int(i) for i in np.flatnonzero(arr == arr.max()))


def mvn_ts_select(
    state: PosteriorState, pref: Preference, rng: Generator
) -> tuple[int, SampledEstimate]:
    """One Thompson-sampling round: draw, score, pick among tied maxima.

    The tie-break draw happens on every call, even for a singleton option
    set, so paired runs consume identical primitive counts.
    """
    if pref.dimension != state.dimension:
        raise ValueError(
            f"preference dimension {pref.dimension} does not match "
            f"state dimension {state.dimension}"
        )
    thetas = sample_posterior_matrix(state, rng)
    options = argmax_ties(pref.values(thetas))
    chosen = options[int(rng.integers(len(options)))]
    estimate = SampledEstimate(
        thetas=tuple(ObjectiveVector(tuple(float(v) for v in row)) for row in thetas),
        option_set=options,
    )
    return chosen, estimate


def gaussian_ts_select(state: ScalarPosteriorState, rng: Generator) -> int:
    """Single-objective Thompson round over scalar-reward posteriors.

    Draws one normal per action plus the tie-break, mirroring the
    multivariate path exactly when d = 1.
    """
    scale = state.counts + 1.0
    thetas = state.sums / scale + rng.standard_normal(state.n_actions) / np.sqrt(scale)
    options = argmax_ties(thetas)
    return options[int(rng.integers(len(options)))]
