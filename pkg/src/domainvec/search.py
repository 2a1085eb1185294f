"""Similarity and range search over a Domain Space, plus group statistics.

A query carries, per flattened dimension, an optional similarity target
(``sim``) and optional inclusive range bounds (``min``/``max``). Range
bounds filter; similarity targets rank. Distances over the queried
dimension set S:

    manhattan   sum_j  w_j * |q_j - v_j|
    euclidean   sqrt( sum_j  w_j * (q_j - v_j)^2 )

Weights default to the dimension's declared weight and act inside the
Euclidean square, i.e. as inverse variances. A vector absent on a range
dimension fails the filter; absent on a similarity dimension it is
incomparable and dropped from ranking. No value is ever imputed.

The engine is an exact linear scan over a store snapshot: at the intended
scale correctness against a brute-force oracle beats index cleverness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Mapping, Optional, Sequence

from . import codec, model
from .codec import DomainVector, Scalar, UlRef
from .errors import InvalidQuery, NonPositiveWeight
from .model import FlattenedDimension, GlobalDimensionId
from .store import DvStore, Registry, StoredDv

MANHATTAN = "manhattan"
EUCLIDEAN = "euclidean"
METRICS = (MANHATTAN, EUCLIDEAN)


@dataclass(frozen=True)
class Constraint:
    sim: Optional[Scalar] = None
    min: Optional[Scalar] = None
    max: Optional[Scalar] = None

    def empty(self) -> bool:
        return self.sim is None and self.min is None and self.max is None


@dataclass(frozen=True)
class SearchQuery:
    space: UlRef
    constraints: Mapping[int, Constraint]
    k: int = 1000
    metric: str = EUCLIDEAN
    weight_overrides: Mapping[int, Decimal] = field(default_factory=dict)
    max_distance: Optional[float] = None  # optional "similar enough" cutoff

    def __post_init__(self):
        object.__setattr__(self, "constraints",
                           {j: c for j, c in self.constraints.items() if not c.empty()})
        object.__setattr__(self, "weight_overrides", dict(self.weight_overrides))


@dataclass(frozen=True)
class Hit:
    record_id: int
    distance: float
    dv: DomainVector


@dataclass(frozen=True)
class SearchResult:
    hits: list[Hit]


@dataclass(frozen=True)
class DimStats:
    present_count: int
    mean: Optional[float]
    std: Optional[float]


@dataclass(frozen=True)
class GroupStatistics:
    group_size: int
    dims: Mapping[int, DimStats]


INCOMPARABLE = None  # distance() outcome when a sim dimension is absent


def distance(
    sim: Mapping[int, Scalar],
    values: Sequence[Scalar | None],
    metric: str,
    weights: Mapping[int, float],
) -> Optional[float]:
    """Weighted distance between a sim assignment and one vector.

    Returns None (incomparable) when the vector is absent on any queried
    dimension.
    """
    for j, w in weights.items():
        if w <= 0:
            raise NonPositiveWeight(f"weight for dimension {j} must be positive")
    terms = []
    for j, target in sim.items():
        value = values[j] if j < len(values) else None
        if value is None:
            return INCOMPARABLE
        delta = float(target) - float(value)
        w = weights.get(j, 1.0)
        terms.append(w * abs(delta) if metric == MANHATTAN else w * delta * delta)
    total = math.fsum(terms)
    return total if metric == MANHATTAN else math.sqrt(total)


def _passes_ranges(
    values: Sequence[Scalar | None], ranges: Mapping[int, Constraint]
) -> bool:
    for j, constraint in ranges.items():
        value = values[j] if j < len(values) else None
        if value is None:
            return False
        if constraint.min is not None and value < constraint.min:
            return False
        if constraint.max is not None and value > constraint.max:
            return False
    return True


def validate_query(query: SearchQuery, flat: Sequence[FlattenedDimension]) -> None:
    if query.k < 1:
        raise InvalidQuery("k must be at least 1")
    if query.metric not in METRICS:
        raise InvalidQuery(f"unknown metric {query.metric!r}")
    if not query.constraints:
        raise InvalidQuery("query needs at least one sim or range constraint")
    for j, constraint in query.constraints.items():
        if not 0 <= j < len(flat):
            raise InvalidQuery(f"no dimension {j} in this space")
        dim = flat[j].dim
        if not dim.comparable and constraint.sim is not None:
            raise InvalidQuery(f"dimension {j} ({dim.keyword}) is text; sim not allowed")
        if not dim.comparable and (constraint.min is not None or constraint.max is not None):
            raise InvalidQuery(f"dimension {j} ({dim.keyword}) is text; ranges not allowed")
    for j, w in query.weight_overrides.items():
        if w <= 0:
            raise NonPositiveWeight(f"weight override for dimension {j} must be positive")


def effective_weights(
    query: SearchQuery, flat: Sequence[FlattenedDimension]
) -> dict[int, float]:
    weights = {}
    for j, constraint in query.constraints.items():
        if constraint.sim is not None:
            override = query.weight_overrides.get(j)
            weights[j] = float(override if override is not None else flat[j].dim.weight)
    return weights


def search(query: SearchQuery, store: DvStore, registry: Registry) -> SearchResult:
    """Rank the space's vectors against the query; exact, deterministic."""
    key = codec.canonical_ul_text(query.space)
    flat = registry.flattened(key)
    validate_query(query, flat)
    sim = {j: c.sim for j, c in query.constraints.items() if c.sim is not None}
    ranges = {j: c for j, c in query.constraints.items()
              if c.min is not None or c.max is not None}
    weights = effective_weights(query, flat)

    scored: list[tuple[float, int, DomainVector]] = []
    for record in store.scan(key, pad_to=len(flat)):
        values = record.dv.values
        if not _passes_ranges(values, ranges):
            continue
        if sim:
            d = distance(sim, values, query.metric, weights)
            if d is INCOMPARABLE:
                continue
            if query.max_distance is not None and d > query.max_distance:
                continue
        else:
            d = 0.0
        scored.append((d, record.record_id, record.dv))
    scored.sort(key=lambda t: (t[0], t[1]))
    return SearchResult([Hit(rid, d, dv) for d, rid, dv in scored[: query.k]])


def group_stats(
    filter_query: SearchQuery,
    stat_dims: Sequence[int],
    store: DvStore,
    registry: Registry,
) -> GroupStatistics:
    """Population mean and std per requested dimension over the range group."""
    key = codec.canonical_ul_text(filter_query.space)
    flat = registry.flattened(key)
    if any(c.sim is not None for c in filter_query.constraints.values()):
        raise InvalidQuery("group statistics take a range-only filter")
    validate_query(filter_query, flat)
    for j in stat_dims:
        if not 0 <= j < len(flat):
            raise InvalidQuery(f"no dimension {j} in this space")
        if not flat[j].dim.comparable:
            raise InvalidQuery(f"dimension {j} is text; no statistics")
    ranges = dict(filter_query.constraints)
    group = [
        record.dv.values
        for record in store.scan(key, pad_to=len(flat))
        if _passes_ranges(record.dv.values, ranges)
    ]
    if not group:
        return GroupStatistics(0, {})
    dims: dict[int, DimStats] = {}
    for j in stat_dims:
        present = [float(values[j]) for values in group if values[j] is not None]
        if not present:
            dims[j] = DimStats(0, None, None)
            continue
        n = len(present)
        mean = math.fsum(present) / n
        var = math.fsum((x - mean) ** 2 for x in present) / n
        dims[j] = DimStats(n, mean, math.sqrt(var))
    return GroupStatistics(len(group), dims)


# ---------------------------------------------------------------------------
# Cross-space search by dimension identity
# ---------------------------------------------------------------------------


def dimension_usages(
    gid: GlobalDimensionId, registry: Registry
) -> list[tuple[str, int]]:
    """Every (space, flattened index) where this dimension is searchable."""
    usages = []
    for ul_text in registry.spaces():
        flat = registry.flattened(ul_text)
        for j, fd in enumerate(flat):
            if fd.gid == gid:
                usages.append((ul_text, j))
    return usages


@dataclass(frozen=True)
class CrossSpaceHit:
    space: str
    record_id: int
    distance: float
    dv: DomainVector


def cross_space_search(
    constraints: Mapping[GlobalDimensionId, Constraint],
    k: int,
    metric: str,
    store: DvStore,
    registry: Registry,
    weight_overrides: Optional[Mapping[GlobalDimensionId, Decimal]] = None,
) -> list[CrossSpaceHit]:
    """Search every space containing all constrained dimensions; merge hits.

    Where a space flattens the same dimension into several slots (diamond
    nesting), its first slot stands for the space.
    """
    if not constraints:
        raise InvalidQuery("cross-space search needs at least one constraint")
    weight_overrides = weight_overrides or {}
    per_space: dict[str, dict[GlobalDimensionId, int]] = {}
    for gid in constraints:
        for ul_text, j in dimension_usages(gid, registry):
            slots = per_space.setdefault(ul_text, {})
            if gid not in slots:
                slots[gid] = j
    merged: list[CrossSpaceHit] = []
    for ul_text, slots in sorted(per_space.items()):
        if len(slots) < len(constraints):
            continue  # space lacks one of the constrained dimensions
        query = SearchQuery(
            space=codec.ul_from_text(ul_text),
            constraints={slots[gid]: c for gid, c in constraints.items()},
            k=k,
            metric=metric,
            weight_overrides={
                slots[gid]: w for gid, w in weight_overrides.items() if gid in slots
            },
        )
        result = search(query, store, registry)
        merged.extend(
            CrossSpaceHit(ul_text, h.record_id, h.distance, h.dv) for h in result.hits
        )
    merged.sort(key=lambda h: (h.distance, h.space, h.record_id))
    return merged[:k]
