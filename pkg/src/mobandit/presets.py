"""Bundled demo setting: ten 2-d actions plus the noise models used in the
stock experiments and the `table1` command."""
from __future__ import annotations

from .environments import EnvironmentSpec, MultiBernoulliNoise, MvnNoise
from .geometry import Action, ActionSet, ObjectiveVector
from .preferences import (
    ChebyshevPreference,
    EpsilonConstraintPreference,
    LinearPreference,
)

__all__ = [
    "DEMO_MEANS",
    "DEMO_COVARIANCE",
    "demo_action_set",
    "demo_environment",
    "demo_linear_preference",
    "demo_constraint_preference",
    "demo_chebyshev_preference",
    "demo_preference",
]

DEMO_MEANS: tuple[tuple[float, float], ...] = (
    (0.56, 0.46),
    (0.75, 0.26),
    (0.34, 0.79),
    (0.67, 0.50),
    (0.70, 0.42),
    (0.54, 0.72),
    (0.49, 0.62),
    (0.13, 0.84),
    (0.78, 0.60),
    (0.63, 0.44),
)

DEMO_COVARIANCE: tuple[tuple[float, float], ...] = (
    (0.10, 0.05),
    (0.05, 0.10),
)


def demo_action_set() -> ActionSet:
    return ActionSet(
        tuple(
            Action(f"a{i}", ObjectiveVector(mean))
            for i, mean in enumerate(DEMO_MEANS)
        )
    )


def demo_environment(noise: str = "mvn") -> EnvironmentSpec:
    """The demo actions under either stock noise model ('mvn' or
    'multi_bernoulli')."""
    if noise == "mvn":
        model = MvnNoise((DEMO_COVARIANCE,))
    elif noise == "multi_bernoulli":
        model = MultiBernoulliNoise()
    else:
        raise ValueError(f"unknown noise model {noise!r}")
    return EnvironmentSpec(actions=demo_action_set(), noise=model)


def demo_linear_preference() -> LinearPreference:
    return LinearPreference((0.4, 0.6))


def demo_constraint_preference() -> EpsilonConstraintPreference:
    return EpsilonConstraintPreference(target=2, epsilons={1: 0.5})


def demo_chebyshev_preference() -> ChebyshevPreference:
    return ChebyshevPreference((0.4, 0.6))


def demo_preference(kind: str):
    """Preference picker used by the command line: linear, econstraint, or
    chebyshev."""
    if kind == "linear":
        return demo_linear_preference()
    if kind == "econstraint":
        return demo_constraint_preference()
    if kind == "chebyshev":
        return demo_chebyshev_preference()
    raise ValueError(f"unknown preference kind {kind!r}")
