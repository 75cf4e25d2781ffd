"""Objective-space geometry: vectors, dominance comparisons, Pareto fronts, boxes.

Coordinates are plain finite floats. Vectors may lie anywhere in R^d; range
restrictions such as [0, 1] belong to the environment layer, not here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "ObjectiveVector",
    "DominanceRelation",
    "Action",
    "ActionSet",
    "Ball",
    "compare",
    "dominates",
    "strictly_dominates",
    "pareto_front",
]


@dataclass(frozen=True)
class ObjectiveVector:
    """An ordered tuple of d >= 1 finite real coordinates."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if len(vals) == 0:
            raise ValueError("objective vector needs at least one coordinate")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"objective vector coordinates must be finite, got {vals}")
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]


class DominanceRelation(Enum):
    """Outcome of comparing two vectors coordinate-wise.

    The strongest applicable label is reported: all-coordinates-strict beats
    weak dominance, which requires every coordinate >= and at least one >.
    """

    STRICTLY_DOMINATES = "strictly_dominates"
    DOMINATES = "dominates"
    EQUAL = "equal"
    DOMINATED_BY = "dominated_by"
    STRICTLY_DOMINATED_BY = "strictly_dominated_by"
    INCOMPARABLE = "incomparable"


def _check_same_dimension(x: ObjectiveVector, y: ObjectiveVector) -> None:
    if x.dimension != y.dimension:
        raise ValueError(
            f"dimension mismatch: {x.dimension} vs {y.dimension}"
        )


def compare(x: ObjectiveVector, y: ObjectiveVector) -> DominanceRelation:
    """Classify the dominance relation between x and y."""
    _check_same_dimension(x, y)
    ge = all(a >= b for a, b in zip(x.values, y.values))
    le = all(a <= b for a, b in zip(x.values, y.values))
    if ge and le:
        return DominanceRelation.EQUAL
    if ge:
        if all(a > b for a, b in zip(x.values, y.values)):
            return DominanceRelation.STRICTLY_DOMINATES
        return DominanceRelation.DOMINATES
    if le:
        if all(a < b for a, b in zip(x.values, y.values)):
            return DominanceRelation.STRICTLY_DOMINATED_BY
        return DominanceRelation.DOMINATED_BY
    return DominanceRelation.INCOMPARABLE


def dominates(x: ObjectiveVector, y: ObjectiveVector) -> bool:
    """Weak dominance: every coordinate >= with at least one strict."""
    return compare(x, y) in (
        DominanceRelation.DOMINATES,
        DominanceRelation.STRICTLY_DOMINATES,
    )


def strictly_dominates(x: ObjectiveVector, y: ObjectiveVector) -> bool:
    """Strict dominance: every coordinate strictly greater."""
    return compare(x, y) is DominanceRelation.STRICTLY_DOMINATES


@dataclass(frozen=True)
class Action:
    """A named action with a fixed mean vector in objective space."""

    name: str
    mean: ObjectiveVector

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("action name must be non-empty")


@dataclass(frozen=True)
class ActionSet:
    """A finite, ordered collection of actions sharing one dimension."""

    actions: tuple[Action, ...]

    def __post_init__(self) -> None:
        acts = tuple(self.actions)
        if len(acts) == 0:
            raise ValueError("action set must contain at least one action")
        dims = {a.mean.dimension for a in acts}
        if len(dims) != 1:
            raise ValueError(f"actions disagree on dimension: {sorted(dims)}")
        names = [a.name for a in acts]
        if len(set(names)) != len(names):
            raise ValueError("action names must be unique")
        object.__setattr__(self, "actions", acts)

    @property
    def dimension(self) -> int:
        return self.actions[0].mean.dimension

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self) -> Iterator[Action]:
        return iter(self.actions)

    def __getitem__(self, i: int) -> Action:
        return self.actions[i]

    def means(self) -> np.ndarray:
        """Stacked mean vectors, shape (n_actions, dimension)."""
        return np.array([a.mean.values for a in self.actions], dtype=float)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "actions": [
                {"name": a.name, "mean": list(a.mean.values)} for a in self.actions
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ActionSet":
        try:
            raw = data["actions"]
        except KeyError:
            raise ValueError("action set mapping needs an 'actions' list") from None
        actions = []
        for i, entry in enumerate(raw):
            name = entry.get("name", f"a{i}")
            mean = entry.get("mean")
            if mean is None:
                raise ValueError(f"action {name!r} is missing its mean")
            actions.append(Action(str(name), ObjectiveVector(tuple(mean))))
        out = cls(tuple(actions))
        declared = data.get("dimension")
        if declared is not None and int(declared) != out.dimension:
            raise ValueError(
                f"declared dimension {declared} does not match means of "
                f"dimension {out.dimension}"
            )
        return out


@dataclass(frozen=True)
class Ball(object):
    """Open axis-aligned box: points with every |x_i - center_i| < radius."""

    center: ObjectiveVector
    radius: float

    def __post_init__(self) -> None:
        r = float(self.radius)
        if not math.isfinite(r) or r < 0.0:
            raise ValueError(f"radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "radius", r)

    def contains(self, x: ObjectiveVector) -> bool:
        _check_same_dimension(self.center, x)
        return all(
            abs(a - c) < self.radius for a, c in zip(x.values, self.center.values)
        )


def pareto_front(actions: ActionSet) -> set[int]:
    """Indices of actions whose mean no other action's mean weakly dominates.

    Straightforward O(n^2) pairwise scan.
    """
    front: set[int] = set()
    for i, a in enumerate(actions):
        if not any(
            j != i and dominates(b.mean, a.mean) for j, b in enumerate(actions)
        ):
            front.add(i)
    return front
