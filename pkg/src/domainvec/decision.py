"""Decision support over a Domain Space.

The workflow: a condition narrows the store to a group of comparable
cases; the dimensions most often filled within that group suggest what to
look at next; chosen values get intervals ``[x - r*s, x + r*s]`` sized by
the group's spread; those intervals both filter the next group and supply
inverse-width weights for similarity ranking; and candidate decisions are
compared by the outcome statistics of their matching groups.

Every call is stateless and read-only. The iteration lives in the client,
which re-enters with full parameters each round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import codec
from .codec import Scalar, UlRef
from .errors import InvalidQuery
from .search import Constraint, GroupStatistics, SearchQuery, group_stats, search
from .store import DvStore, Registry

ROLE_PRECONDITION = "precondition"
ROLE_DECISION = "decision"
ROLE_RESULT = "result"
ROLE_UNTAGGED = "untagged"
ROLES = (ROLE_PRECONDITION, ROLE_DECISION, ROLE_RESULT, ROLE_UNTAGGED)


@dataclass(frozen=True)
class RoleTagging:
    """Assigns each flattened dimension a role in the decision workflow."""

    roles: Mapping[int, str]

    def __post_init__(self):
        object.__setattr__(self, "roles", dict(self.roles))
        for j, role in self.roles.items():
            if role not in ROLES:
                raise InvalidQuery(f"unknown role {role!r} for dimension {j}")

    def dims_with(self, role: str) -> list[int]:
        return sorted(j for j, r in self.roles.items() if r == role)


@dataclass(frozen=True)
class Interval:
    """A search window around a chosen value.

    Width is spread * factor on each side; zero width degenerates to an
    exact-equality filter.
    """

    center: float
    spread: float = 0.0
    factor: float = 1.0

    def __post_init__(self):
        if self.spread < 0:
            raise InvalidQuery("interval spread must be non-negative")
        if self.factor < 0:
            raise InvalidQuery("interval factor must be non-negative")

    @property
    def lower(self) -> float:
        return self.center - self.factor * self.spread

    @property
    def upper(self) -> float:
        return self.center + self.factor * self.spread

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def exact(self) -> bool:
        return self.width == 0.0

    def constraint(self) -> Constraint:
        return Constraint(min=self.lower, max=self.upper)


IntervalSpec = dict[int, Interval]


def intervals_to_constraints(spec: Mapping[int, Interval]) -> dict[int, Constraint]:
    return {j: interval.constraint() for j, interval in spec.items()}


def suggest_dimensions(
    condition: SearchQuery,
    store: DvStore,
    registry: Registry,
) -> list[tuple[int, int]]:
    """Dimensions ranked by how often the condition group fills them.

    Returns (flattened index, present count) pairs, most frequent first,
    ties by index; empty when nothing matches the condition.
    """
    key = codec.canonical_ul_text(condition.space)
    flat = registry.flattened(key)
    if any(c.sim is not None for c in condition.constraints.values()):
        raise InvalidQuery("dimension suggestion takes a range-only condition")
    matches = search(
        SearchQuery(condition.space, condition.constraints, k=max(store.count(key), 1)),
        store, registry,
    ).hits
    if not matches:
        return []
    counts = [0] * len(flat)
    for hit in matches:
        for j, value in enumerate(hit.dv.values):
            if value is not None:
                counts[j] += 1
    return sorted(((j, c) for j, c in enumerate(counts)), key=lambda t: (-t[1], t[0]))


def suggest_intervals(
    centers: Mapping[int, Scalar],
    group: Sequence[Sequence[Optional[Scalar]]],
    factors: Optional[Mapping[int, float]] = None,
) -> IntervalSpec:
    """Size a search window around each chosen value by the group's spread.

    The spread is the population standard deviation of the dimension over
    the group's present values; factors default to 1.
    """
    factors = factors or {}
    spec: IntervalSpec = {}
    for j, center in centers.items():
        present = [float(v[j]) for v in group if j < len(v) and v[j] is not None]
        if present:
            mean = math.fsum(present) / len(present)
            spread = math.sqrt(math.fsum((x - mean) ** 2 for x in present) / len(present))
        else:
            spread = 0.0
        spec[j] = Interval(float(center), spread, float(factors.get(j, 1.0)))
    return spec


def weights_from_intervals(spec: Mapping[int, Interval]) -> dict[int, float]:
    """Inverse interval widths, for use as similarity weights.

    Zero-width intervals carry no weight; they act as exact range filters
    instead.
    """
    return {j: 1.0 / interval.width for j, interval in spec.items() if not interval.exact}


def evaluate_variants(
    space: UlRef,
    preconditions: Mapping[int, Interval],
    variants: Sequence[Mapping[int, Interval]],
    result_dims: Sequence[int],
    store: DvStore,
    registry: Registry,
) -> list[GroupStatistics]:
    """Outcome statistics per decision variant.

    Each variant's group is the set of vectors inside all precondition
    intervals and that variant's decision intervals; statistics cover the
    requested result dimensions. Output order follows the variant order.
    """
    if not result_dims:
        raise InvalidQuery("at least one result dimension is required")
    out = []
    for variant in variants:
        constraints = intervals_to_constraints(preconditions)
        constraints.update(intervals_to_constraints(variant))
        if not constraints:
            raise InvalidQuery("variant evaluation needs at least one interval")
        out.append(
            group_stats(SearchQuery(space, constraints), result_dims, store, registry)
        )
    return out
