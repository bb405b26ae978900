"""Normalized frequency tables over categorical features."""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field

from .errors import EmptyDistribution

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CategoricalDistribution:
    """A probability distribution over a finite set of category keys.

    Keys are opaque hashables (token strings, POS tags, span labels, or
    integer span lengths). Probabilities are non-negative and sum to 1
    within 1e-12.
    """

    prob: Mapping[Hashable, float] = field()

    def __post_init__(self):
        total = math.fsum(self.prob.values())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        for key, p in self.prob.items():
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability of {key!r} is {p!r}, outside [0, 1]")

    @classmethod
    def from_counts(cls, counts: Mapping[Hashable, int | float]) -> "CategoricalDistribution":
        total = math.fsum(counts.values())
        if total <= 0:
            raise EmptyDistribution("no observations to normalize")
        return cls({key: count / total for key, count in counts.items()})

    @classmethod
    def from_observations(cls, observations: Iterable[Hashable]) -> "CategoricalDistribution":
        counts: dict[Hashable, int] = {}
        for obs in observations:
            counts[obs] = counts.get(obs, 0) + 1
        return cls.from_counts(counts)

    @property
    def support(self) -> set[Hashable]:
        return set(self.prob)

    def __getitem__(self, key: Hashable) -> float:
        """Probability of key; 0.0 for keys outside the support."""
        return self.prob.get(key, 0.0)

    def __len__(self) -> int:
        return len(self.prob)
