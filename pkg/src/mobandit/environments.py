"""Outcome models and the deterministic sample streams that drive them.

An environment pairs an action set (means in the unit box) with a noise
model. Every random primitive comes from a counter-based stream keyed by
(seed, repetition, episode, purpose), so any draw can be regenerated in
isolation and outcome noise never depends on which action was played: two
policies fed the same stream see identical noise at equal episodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np
from numpy.random import Generator, Philox

from .geometry import ActionSet
from .preferences import EpsilonConstraintPreference, LinearPreference, Preference

__all__ = [
    "MvnNoise",
    "MultiBernoulliNoise",
    "NoiseModel",
    "EnvironmentSpec",
    "NoiseStream",
    "Observation",
    "ExpectedValue",
    "sample_outcome",
    "expected_scalarized",
    "environment_from_dict",
]

# Eigenvalues of a covariance matrix may dip this far below zero before the
# matrix is rejected as not positive semi-definite.
_PSD_TOL = -1e-10

_MAX_UINT64 = 2**64

# Counter words reserved per draw purpose, so outcome noise and policy
# sampling consume disjoint streams at equal (seed, repetition, episode).
OUTCOME_DOMAIN = 0
POLICY_DOMAIN = 1


def _factor(cov: np.ndarray) -> np.ndarray:
    """A matrix L with L @ L.T equal to cov.

    Cholesky when the matrix is positive definite, otherwise an eigenvalue
    factorization with slightly negative eigenvalues clamped to zero.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(cov)
        if np.min(eigvals) < _PSD_TOL:
            raise ValueError(
                f"covariance is not positive semi-definite, eigenvalues {eigvals}"
            ) from None
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


@dataclass(frozen=True)
class MvnNoise:
    """Additive multivariate normal noise.

    covariances holds either one matrix shared by all actions or one matrix
    per action, as nested tuples.
    """

    covariances: tuple[tuple[tuple[float, ...], ...], ...]

    def __post_init__(self) -> None:
        mats = []
        transforms = []
        for raw in self.covariances:
            cov = np.asarray(raw, dtype=float)
            if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
                raise ValueError(f"covariance must be square, got shape {cov.shape}")
            if not np.all(np.isfinite(cov)):
                raise ValueError("covariance entries must be finite")
            if not np.allclose(cov, cov.T, atol=1e-12, rtol=0.0):
                raise ValueError("covariance must be symmetric")
            transforms.append(_factor(cov))
            mats.append(tuple(tuple(float(v) for v in row) for row in cov))
        if not mats:
            raise ValueError("at least one covariance matrix is required")
        if len({m.shape[0] for m in transforms}) != 1:
            raise ValueError("covariance matrices disagree on dimension")
        object.__setattr__(self, "covariances", tuple(mats))
        object.__setattr__(self, "_transforms", tuple(transforms))

    @property
    def dimension(self) -> int:
        return len(self.covariances[0])

    def transform(self, action: int) -> np.ndarray:
        factors = self._transforms  # type: ignore[attr-defined]
        return factors[0] if len(factors) == 1 else factors[action]

    def max_variance_scale(self) -> float:
        """sqrt of the largest covariance eigenvalue over all actions."""
        top = 0.0
        for raw in self.covariances:
            eig = np.linalg.eigvalsh(np.asarray(raw, dtype=float))
            top = max(top, float(eig[-1]))
        return math.sqrt(max(top, 0.0))


@dataclass(frozen=True)
class MultiBernoulliNoise:
    """Independent per-coordinate Bernoulli outcomes with the mean as the
    success probability."""


NoiseModel = Union[MvnNoise, MultiBernoulliNoise]


@dataclass(frozen=True)
class EnvironmentSpec:
    """An action set with means in [0, 1] plus a noise model."""

    actions: ActionSet
    noise: NoiseModel

    def __post_init__(self) -> None:
        means = self.actions.means()
        if np.any(means < 0.0) or np.any(means > 1.0):
            raise ValueError("environment means must lie in [0, 1]")
        if isinstance(self.noise, MvnNoise):
            if self.noise.dimension != self.actions.dimension:
                raise ValueError(
                    f"noise dimension {self.noise.dimension} does not match "
                    f"action dimension {self.actions.dimension}"
                )
            if len(self.noise.covariances) not in (1, len(self.actions)):
                raise ValueError(
                    "covariances must be shared (one matrix) or given per action"
                )
        object.__setattr__(self, "_means", means)

    @property
    def dimension(self) -> int:
        return self.actions.dimension

    def means(self) -> np.ndarray:
        return self._means.copy()  # type: ignore[attr-defined]

    def sub_gaussian_scale(self) -> float:
        """Scale proxy used by the bound preconditions: the largest noise
        eigenvalue's square root, or 1/2 for bounded 0/1 outcomes."""
        if isinstance(self.noise, MvnNoise):
            return self.noise.max_variance_scale()
        return 0.5

    def to_dict(self) -> dict:
        if isinstance(self.noise, MvnNoise):
            covs = [[list(row) for row in m] for m in self.noise.covariances]
            noise: dict = {
                "type": "mvn",
                "covariance": covs[0] if len(covs) == 1 else covs,
            }
        else:
            noise = {"type": "multi_bernoulli"}
        out = self.actions.to_dict()
        out["noise"] = noise
        return out


def environment_from_dict(data: Mapping) -> EnvironmentSpec:
    """Build an environment from its wire-format mapping."""
    actions = ActionSet.from_dict(data)
    raw_noise = data.get("noise")
    if not isinstance(raw_noise, Mapping) or "type" not in raw_noise:
        raise ValueError("environment mapping needs a noise object with a type")
    kind = raw_noise["type"]
    if kind == "mvn":
        cov = np.asarray(raw_noise.get("covariance"), dtype=float)
        if cov.ndim == 2:
            covs = (tuple(tuple(row) for row in cov.tolist()),)
        elif cov.ndim == 3:
            covs = tuple(tuple(tuple(row) for row in m) for m in cov.tolist())
        else:
            raise ValueError(
                "mvn covariance must be one matrix or a list of matrices"
            )
        noise: NoiseModel = MvnNoise(covs)
    elif kind == "multi_bernoulli":
        noise = MultiBernoulliNoise()
    else:
        raise ValueError(f"unknown noise type {kind!r}")
    return EnvironmentSpec(actions=actions, noise=noise)


class NoiseStream:
    """Deterministic source of per-episode random primitives.

    (seed, repetition, episode) fully determines every draw: each episode
    owns a fresh counter block, so draws can be regenerated in any order and
    never depend on which actions were queried.
    """

    __slots__ = ("_seed", "_repetition")

    def __init__(self, seed: int, repetition: int = 0) -> None:
        seed = int(seed)
        repetition = int(repetition)
        if not 0 <= seed < _MAX_UINT64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if not 0 <= repetition < _MAX_UINT64:
            raise ValueError(f"repetition must be in [0, 2**64), got {repetition}")
        self._seed = seed
        self._repetition = repetition

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def repetition(self) -> int:
        return self._repetition

    def with_repetition(self, repetition: int) -> "NoiseStream":
        return NoiseStream(self._seed, repetition)

    def _rng(self, domain: int, episode: int) -> Generator:
        episode = int(episode)
        if not 1 <= episode < _MAX_UINT64:
            raise ValueError(f"episode must be >= 1, got {episode}")
        counter = (domain << 192) | (self._repetition << 128) | (episode << 64)
        return Generator(Philox(key=self._seed, counter=counter))

    def outcome_rng(self, episode: int) -> Generator:
        """Generator for the episode's outcome-noise primitives."""
        return self._rng(OUTCOME_DOMAIN, episode)

    def policy_rng(self, episode: int) -> Generator:
        """Generator for the episode's policy-side sampling primitives."""
        return self._rng(POLICY_DOMAIN, episode)

    def __repr__(self) -> str:
        return f"NoiseStream(seed={self._seed}, repetition={self._repetition})"


@dataclass(frozen=True)
class Observation:
    """One observed outcome vector for a played action."""

    episode: int
    action: int
    values: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def sample_outcome(
    env: EnvironmentSpec, action: int, stream: NoiseStream, episode: int
) -> Observation:
    """Draw the episode's outcome for one action.

    The underlying primitives (normal or uniform coordinates) are drawn
    before the action is applied, so outcomes for different actions at equal
    (seed, repetition, episode) share their noise.
    """
    if not 0 <= action < len(env.actions):
        raise ValueError(f"action index {action} out of range")
    rng = stream.outcome_rng(episode)
    mu = env._means[action]  # type: ignore[attr-defined]
    if isinstance(env.noise, MvnNoise):
        eta = rng.standard_normal(env.dimension)
        z = mu + env.noise.transform(action) @ eta
    else:
        u = rng.random(env.dimension)
        z = (u < mu).astype(float)
    return Observation(episode=episode, action=action, values=tuple(float(v) for v in z))


@dataclass(frozen=True)
class ExpectedValue:
    """A scalarized-outcome expectation with its estimation error."""

    value: float
    std_error: float
    method: str

    def __float__(self) -> float:
        return self.value


def expected_scalarized(
    env: EnvironmentSpec,
    pref: Preference,
    action: int,
    n_samples: int = 100_000,
    rng: Optional[Generator] = None,
) -> ExpectedValue:
    """Expectation of the preference score of the noisy outcome.

    Closed forms exist for linear scores under both noise models and for
    constraint scores under 0/1 outcomes; anything else is a Monte-Carlo
    average over n_samples draws (rng defaults to a fixed-seed generator so
    repeated calls agree).
    """
    if not 0 <= action < len(env.actions):
        raise ValueError(f"action index {action} out of range")
    mu = env._means[action]  # type: ignore[attr-defined]
    if isinstance(pref, LinearPreference):
        return ExpectedValue(value=pref.value(mu), std_error=0.0, method="closed_form")
    bernoulli = isinstance(env.noise, MultiBernoulliNoise)
    if bernoulli and isinstance(pref, EpsilonConstraintPreference):
        # A 0/1 coordinate passes a threshold in (0, 1] only when it is 1.
        value = mu[pref.target - 1]
        for i, eps in pref.epsilons.items():
            if eps > 0.0:
                value *= mu[i - 1]
        return ExpectedValue(value=float(value), std_error=0.0, method="closed_form")
    if n_samples < 1:
        raise ValueError("the Monte-Carlo path needs n_samples >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    if bernoulli:
        z = (rng.random((n_samples, env.dimension)) < mu).astype(float)
    else:
        eta = rng.standard_normal((n_samples, env.dimension))
        z = mu + eta @ env.noise.transform(action).T
    scores = pref.values(z)
    se = float(np.std(scores, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return ExpectedValue(value=float(np.mean(scores)), std_error=se, method="monte_carlo")
