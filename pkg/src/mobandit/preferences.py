"""Scalarization families and the gap/radius algebra built on them.

Each preference maps objective vectors to a single score, is weakly monotone
under coordinate-wise dominance, and knows how to evaluate whole batches of
points at once. On top of evaluation sit gap tables (score differences to the
best action), radius assignments around action means, and a conservative
certificate that separates the best action's score band from every other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .geometry import ActionSet, ObjectiveVector

__all__ = [
    "LinearPreference",
    "ChebyshevPreference",
    "WeightedLpPreference",
    "EpsilonConstraintPreference",
    "Preference",
    "preference_from_dict",
    "GapTable",
    "RadiusEntry",
    "RadiusAssignment",
    "EpsilonRadiusDecomposition",
    "gap_table",
    "theorem_radii",
    "certify_radii",
    "chebyshev_thresholds",
    "epsilon_decomposition",
]

_WEIGHT_SUM_TOL = 1e-9

ArrayLike = Union[ObjectiveVector, Sequence[float], np.ndarray]


def _as_point(x: ArrayLike, dimension: int) -> np.ndarray:
    arr = x.as_array() if isinstance(x, ObjectiveVector) else np.asarray(x, dtype=float)
    if arr.shape != (dimension,):
        raise ValueError(f"expected a point of dimension {dimension}, got shape {arr.shape}")
    return arr


def _validated_weights(weights: Sequence[float]) -> tuple[float, ...]:
    w = tuple(float(v) for v in weights)
    if len(w) == 0:
        raise ValueError("weights must be non-empty")
    if any(not math.isfinite(v) or v < 0.0 or v > 1.0 for v in w):
        raise ValueError(f"weights must lie in [0, 1], got {w}")
    if abs(sum(w) - 1.0) > _WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1 within {_WEIGHT_SUM_TOL}, got sum {sum(w)}")
    return w


@dataclass(frozen=True)
class LinearPreference:
    """Weighted sum of coordinates: sum_i w_i * x_i."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _validated_weights(self.weights))

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def value(self, x: ArrayLike) -> float:
        return float(_as_point(x, self.dimension) @ np.asarray(self.weights))

    def values(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ np.asarray(self.weights)

    def to_dict(self) -> dict:
        return {"type": "linear", "weights": list(self.weights)}


@dataclass(frozen=True)
class ChebyshevPreference:
    """Weighted max of coordinates: max_i w_i * x_i."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _validated_weights(self.weights))

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def value(self, x: ArrayLike) -> float:
        return float(np.max(_as_point(x, self.dimension) * np.asarray(self.weights)))

    def values(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) * np.asarray(self.weights)).max(axis=1)

    def to_dict(self) -> dict:
        return {"type": "chebyshev", "weights": list(self.weights)}


@dataclass(frozen=True)
class WeightedLpPreference:
    """Weighted p-norm-style score: (sum_i w_i * x_i^p)^(1/p), p >= 1.

    Defined for non-negative coordinates only.
    """

    weights: tuple[float, ...]
    p: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _validated_weights(self.weights))
        p = float(self.p)
        if not math.isfinite(p) or p < 1.0:
            raise ValueError(f"p must be finite and >= 1, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def value(self, x: ArrayLike) -> float:
        arr = _as_point(x, self.dimension)
        if np.any(arr < 0.0):
            raise ValueError("weighted-Lp scores require non-negative coordinates")
        return float((arr**self.p @ np.asarray(self.weights)) ** (1.0 / self.p))

    def values(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if np.any(pts < 0.0):
            raise ValueError("weighted-Lp scores require non-negative coordinates")
        return (pts**self.p @ np.asarray(self.weights)) ** (1.0 / self.p)

    def to_dict(self) -> dict:
        return {"type": "weighted_lp", "weights": list(self.weights), "p": self.p}


@dataclass(frozen=True)
class EpsilonConstraintPreference:
    """Target coordinate subject to thresholds on the others.

    Scores x_target when x_i >= epsilons[i] for every other coordinate
    (non-strict), and 0 otherwise. Objective indices are 1-based, matching
    the wire format: target in {1..d}, epsilons keyed by the remaining
    indices.
    """

    target: int
    epsilons: Mapping[int, float]

    def __post_init__(self) -> None:
        target = int(self.target)
        eps = {int(k): float(v) for k, v in self.epsilons.items()}
        if target < 1:
            raise ValueError(f"target objective index must be >= 1, got {self.target}")
        d = max([target, *eps.keys()]) if eps else target
        expected = set(range(1, d + 1)) - {target}
        if set(eps.keys()) != expected:
            raise ValueError(
                f"epsilons must cover exactly the non-target indices {sorted(expected)}, "
                f"got {sorted(eps.keys())}"
            )
        if any(not math.isfinite(v) or v < 0.0 or v > 1.0 for v in eps.values()):
            raise ValueError(f"epsilon thresholds must lie in [0, 1], got {eps}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "epsilons", dict(sorted(eps.items())))
        object.__setattr__(self, "_dimension", d)

    @property
    def dimension(self) -> int:
        return self._dimension  # type: ignore[attr-defined]

    def value(self, x: ArrayLike) -> float:
        arr = _as_point(x, self.dimension)
        for i, eps in self.epsilons.items():
            if arr[i - 1] < eps:
                return 0.0
        return float(arr[self.target - 1])

    def values(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        feasible = np.ones(pts.shape[0], dtype=bool)
        for i, eps in self.epsilons.items():
            feasible &= pts[:, i - 1] >= eps
        return np.where(feasible, pts[:, self.target - 1], 0.0)

    def to_dict(self) -> dict:
        return {
            "type": "epsilon_constraint",
            "target": self.target,
            "epsilons": {str(k): v for k, v in self.epsilons.items()},
        }


Preference = Union[
    LinearPreference,
    ChebyshevPreference,
    WeightedLpPreference,
    EpsilonConstraintPreference,
]


def preference_from_dict(data: Mapping) -> Preference:
    """Build a preference from its wire-format mapping."""
    kind = data.get("type")
    if kind == "linear":
        return LinearPreference(tuple(data["weights"]))
    if kind == "chebyshev":
        return ChebyshevPreference(tuple(data["weights"]))
    if kind == "weighted_lp":
        return WeightedLpPreference(tuple(data["weights"]), float(data["p"]))
    if kind == "epsilon_constraint":
        eps = {int(k): float(v) for k, v in dict(data.get("epsilons", {})).items()}
        return EpsilonConstraintPreference(int(data["target"]), eps)
    raise ValueError(f"unknown preference type {kind!r}")


@dataclass(frozen=True)
class GapTable:
    """Per-action scores and score gaps to the best action.

    optimal holds every argmax index; star is the lowest of them. Gaps of
    optimal actions are exactly 0.
    """

    values: tuple[float, ...]
    gaps: tuple[float, ...]
    optimal: tuple[int, ...]
    star: int

    @property
    def best_value(self) -> float:
        return self.values[self.star]

    def suboptimal(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.gaps) if g > 0.0)


def gap_table(pref: Preference, actions: ActionSet) -> GapTable:
    """Score every action mean and record gaps to the maximum score."""
    if pref.dimension != actions.dimension:
        raise ValueError(
            f"preference dimension {pref.dimension} does not match "
            f"action dimension {actions.dimension}"
        )
    vals = pref.values(actions.means())
    best = float(np.max(vals))
    optimal = tuple(int(i) for i in np.flatnonzero(vals == best))
    gaps = tuple(best - float(v) for v in vals)
    return GapTable(
        values=tuple(float(v) for v in vals),
        gaps=gaps,
        optimal=optimal,
        star=optimal[0],
    )


@dataclass(frozen=True)
class RadiusEntry:
    """Radii tied to one suboptimal action: the pair's best-action radius
    rho_star, the action's own radius rho, and the inner radius r < rho."""

    rho_star: float
    rho: float
    r: float

    def __post_init__(self) -> None:
        for label, v in (("rho_star", self.rho_star), ("rho", self.rho), ("r", self.r)):
            if not math.isfinite(float(v)) or float(v) < 0.0:
                raise ValueError(f"{label} must be finite and >= 0, got {v}")
        if self.r >= self.rho > 0.0 or (self.rho == 0.0 and self.r > 0.0):
            raise ValueError(f"need r < rho, got r={self.r}, rho={self.rho}")


@dataclass(frozen=True)
class RadiusAssignment:
    """Radius entries for every suboptimal action, keyed by action index."""

    star: int
    entries: Mapping[int, RadiusEntry]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", dict(self.entries))
        if self.star in self.entries:
            raise ValueError("the best action cannot carry a suboptimal radius entry")

    def scaled(self, factor: float) -> "RadiusAssignment":
        """Same assignment with every radius multiplied by factor > 0."""
        if factor <= 0.0:
            raise ValueError("scale factor must be positive")
        return RadiusAssignment(
            star=self.star,
            entries={
                a: RadiusEntry(e.rho_star * factor, e.rho * factor, e.r * factor)
                for a, e in self.entries.items()
            },
        )


def theorem_radii(gaps: GapTable) -> RadiusAssignment:
    """Canonical substitution: rho_star = rho = gap/2 and r = gap/6 per pair.

    Requires at least one suboptimal action.
    """
    subs = gaps.suboptimal()
    if not subs:
        raise ValueError("every action is optimal, no radii to assign")
    entries = {
        a: RadiusEntry(gaps.gaps[a] / 2.0, gaps.gaps[a] / 2.0, gaps.gaps[a] / 6.0)
        for a in subs
    }
    return RadiusAssignment(star=gaps.star, entries=entries)


def certify_radii(pref: Preference, actions: ActionSet, radii: RadiusAssignment) -> bool:
    """Corner-evaluation certificate that the best action's score band clears
    every suboptimal action's band.

    For each suboptimal action a, the open box around the best mean with the
    pair's rho_star is summarized by its lower corner (mean - rho_star on all
    coordinates) and the box around a's mean by its upper corner. Since every
    preference here is weakly monotone, a strictly larger lower-corner score
    guarantees strict separation of the whole bands. Corners are evaluated
    as-is, without clipping to the unit box.
    """
    table = gap_table(pref, actions)
    if radii.star not in table.optimal:
        raise ValueError(
            f"assignment names action {radii.star} as best, but the gap table "
            f"has optimal set {table.optimal}"
        )
    missing = [a for a in table.suboptimal() if a not in radii.entries]
    if missing:
        raise ValueError(f"radius entries missing for suboptimal actions {missing}")
    star_mean = actions[radii.star].mean.as_array()
    for a in table.suboptimal():
        entry = radii.entries[a]
        lo = star_mean - entry.rho_star
        hi = actions[a].mean.as_array() + entry.rho
        if not pref.value(lo) > pref.value(hi):
            return False
    return True


def chebyshev_thresholds(
    pref: ChebyshevPreference, actions: ActionSet, star: int, other: int
) -> tuple[float, float]:
    """Two-dimensional indifference thresholds for a weighted-max score.

    tau_star is the first-coordinate level at which the best action's score
    switches which coordinate attains the max; tau_other plays the same role
    for the other action. Requires d = 2 and distinct weights.
    """
    if not isinstance(pref, ChebyshevPreference):
        raise ValueError("thresholds are defined for the weighted-max family")
    if pref.dimension != 2 or actions.dimension != 2:
        raise ValueError("thresholds are only defined in dimension 2")
    a1, a2 = pref.weights
    if a1 == a2:
        raise ValueError("thresholds need distinct weights")
    mu_star = actions[star].mean.values
    mu_other = actions[other].mean.values
    tau_star = (a2 * mu_star[1] - a1 * mu_star[0]) / (a2 - a1)
    tau_other = (a1 * mu_other[0] - a2 * mu_other[1]) / (a2 - a1)
    return float(tau_star), float(tau_other)


@dataclass(frozen=True)
class EpsilonRadiusDecomposition:
    """Split of a radius into the slack eaten by constraint thresholds
    (lower) and the remainder (upper)."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.lower < 0.0 or self.upper < 0.0:
            raise ValueError("decomposition parts must be >= 0")

    @property
    def total(self) -> float:
        return self.lower + self.upper


def epsilon_decomposition(
    pref: EpsilonConstraintPreference, mean: ObjectiveVector, rho: float
) -> EpsilonRadiusDecomposition:
    """Split rho around a mean into constraint slack and score slack.

    The lower part is max(0, max_i (epsilon_i - mean_i)) over non-target
    coordinates, clamped at rho; the upper part is the remainder.
    """
    if rho < 0.0 or not math.isfinite(rho):
        raise ValueError(f"rho must be finite and >= 0, got {rho}")
    arr = _as_point(mean, pref.dimension)
    shortfall = 0.0
    for i, eps in pref.epsilons.items():
        shortfall = max(shortfall, eps - arr[i - 1])
    lower = min(rho, max(0.0, shortfall))
    return EpsilonRadiusDecomposition(lower=lower, upper=rho - lower)
