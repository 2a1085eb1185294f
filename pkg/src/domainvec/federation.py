"""Federated anonymized statistics.

A coordinator broadcasts one statistics request to peers; each peer runs
the group query against its own store and answers with nothing but
aggregate numbers. Two privacy rules hold on every wire message:

* The request type has no field through which raw vectors or record ids
  could be returned, so leaking them is structurally impossible.
* A peer whose group is smaller than the anonymity floor answers
  ``suppressed``, carrying no counts at all; below-floor per-dimension
  counts are likewise withheld from otherwise reportable answers.

The coordinator pools the arriving group statistics weighted by group
size. Population moments make this exact: with per-dimension counts n_i,
means m_i, and standard deviations d_i,

    M  = sum(n_i * m_i) / N                    with N = sum(n_i)
    D^2 = sum(n_i * (d_i^2 + m_i^2)) / N - M^2

reconstructs the moments of the concatenated data. Sums use exact
accumulation, so pooling is independent of response order. Numbers travel
as decimal strings to keep float round-trips exact.
"""

from __future__ import annotations

import math
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import httpx

from . import codec
from .errors import DomainVecError, NoContributingPeers
from .search import Constraint, GroupStatistics, SearchQuery, group_stats, search
from .store import DvStore, Registry

SUPPRESSED = "suppressed"
STATS = "stats"
ERROR = "error"

ANSWER_PATH = "/federated/answer"


@dataclass(frozen=True)
class FederatedRequest:
    """A statistics-only query; answers can never carry raw records."""

    space: str  # canonical UL text
    constraints: Mapping[int, Constraint]
    stat_dims: tuple[int, ...]
    k_min: int = 5
    request_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    # Optional similarity refinement of the group: vectors further than
    # max_distance from the sim point (inverse-width weighted) drop out.
    sim: Mapping[int, float] = field(default_factory=dict)
    weights: Mapping[int, float] = field(default_factory=dict)
    max_distance: Optional[float] = None

    def __post_init__(self):
        if self.k_min < 1:
            raise ValueError("anonymity floor must be at least 1")
        if self.sim and self.max_distance is None:
            raise ValueError("similarity refinement needs a max_distance")
        object.__setattr__(self, "constraints", dict(self.constraints))
        object.__setattr__(self, "stat_dims", tuple(self.stat_dims))
        object.__setattr__(self, "sim", dict(self.sim))
        object.__setattr__(self, "weights", dict(self.weights))


@dataclass(frozen=True)
class PeerResponse:
    request_id: str
    outcome: str  # stats | suppressed | error
    stats: Optional[GroupStatistics] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class PooledDimStats:
    count: int
    mean: float
    std: float


@dataclass(frozen=True)
class PooledStatistics:
    total_n: int
    dims: Mapping[int, PooledDimStats]
    contributing_peers: int
    suppressed_peers: int = 0
    error_peers: int = 0
    unreachable_peers: int = 0


def peer_answer(
    request: FederatedRequest,
    store: DvStore,
    registry: Registry,
) -> PeerResponse:
    """Answer one request from local data, under the anonymity floor."""
    try:
        space = codec.ul_from_text(request.space)
        if request.sim:
            constraints = dict(request.constraints)
            for j, target in request.sim.items():
                base = constraints.get(j, Constraint())
                constraints[j] = Constraint(sim=target, min=base.min, max=base.max)
            key = codec.canonical_ul_text(space)
            query = SearchQuery(
                space, constraints, k=max(store.count(key), 1), metric="euclidean",
                weight_overrides={j: w for j, w in request.weights.items()},
                max_distance=request.max_distance,
            )
            hits = search(query, store, registry).hits
            stats = _stats_over_rows([h.dv.values for h in hits], request.stat_dims)
        else:
            stats = group_stats(
                SearchQuery(space, request.constraints),
                list(request.stat_dims), store, registry,
            )
    except DomainVecError as exc:
        return PeerResponse(request.request_id, ERROR, error=str(exc))
    if stats.group_size < request.k_min:
        return PeerResponse(request.request_id, SUPPRESSED)
    visible = {
        j: s for j, s in stats.dims.items()
        if s.present_count >= request.k_min and s.mean is not None
    }
    return PeerResponse(
        request.request_id, STATS,
        stats=GroupStatistics(stats.group_size, visible),
    )


def _stats_over_rows(rows, stat_dims) -> GroupStatistics:
    from .search import DimStats

    dims = {}
    for j in stat_dims:
        present = [float(v[j]) for v in rows if j < len(v) and v[j] is not None]
        if not present:
            dims[j] = DimStats(0, None, None)
            continue
        n = len(present)
        mean = math.fsum(present) / n
        var = math.fsum((x - mean) ** 2 for x in present) / n
        dims[j] = DimStats(n, mean, math.sqrt(var))
    return GroupStatistics(len(rows), dims)


def pool(responses: Sequence[PeerResponse], unreachable: int = 0) -> PooledStatistics:
    """Combine peer statistics weighted by group size; order-independent."""
    contributing = [r for r in responses if r.outcome == STATS and r.stats is not None]
    suppressed = sum(1 for r in responses if r.outcome == SUPPRESSED)
    errors = sum(1 for r in responses if r.outcome == ERROR)
    if not contributing:
        raise NoContributingPeers(
            f"{len(responses)} responses, none with statistics "
            f"({suppressed} suppressed, {errors} errors)"
        )
    total_n = sum(r.stats.group_size for r in contributing)
    dim_ids = sorted({j for r in contributing for j in r.stats.dims})
    dims: dict[int, PooledDimStats] = {}
    for j in dim_ids:
        parts = [
            r.stats.dims[j] for r in contributing
            if j in r.stats.dims and r.stats.dims[j].mean is not None
        ]
        count = sum(p.present_count for p in parts)
        if count == 0:
            continue
        mean = math.fsum(p.present_count * p.mean for p in parts) / count
        second_moment = math.fsum(
            p.present_count * (p.std * p.std + p.mean * p.mean) for p in parts
        ) / count
        variance = max(second_moment - mean * mean, 0.0)
        dims[j] = PooledDimStats(count, mean, math.sqrt(variance))
    return PooledStatistics(
        total_n=total_n,
        dims=dims,
        contributing_peers=len(contributing),
        suppressed_peers=suppressed,
        error_peers=errors,
        unreachable_peers=unreachable,
    )


# ---------------------------------------------------------------------------
# JSON wire forms (decimal strings for every non-integral number)
# ---------------------------------------------------------------------------


def request_to_json(request: FederatedRequest) -> dict:
    constraints = {}
    for j, c in request.constraints.items():
        entry = {}
        if c.min is not None:
            entry["min"] = str(c.min)
        if c.max is not None:
            entry["max"] = str(c.max)
        constraints[str(j)] = entry
    out: dict[str, Any] = {
        "request_id": request.request_id,
        "space": request.space,
        "constraints": constraints,
        "stat_dims": list(request.stat_dims),
        "k_min": request.k_min,
    }
    if request.sim:
        out["sim"] = {str(j): str(v) for j, v in request.sim.items()}
        out["weights"] = {str(j): str(w) for j, w in request.weights.items()}
        out["max_distance"] = str(request.max_distance)
    return out


def _parse_bound(text: Optional[str]):
    if text is None:
        return None
    from decimal import Decimal

    return Decimal(text)


def request_from_json(obj: Mapping[str, Any]) -> FederatedRequest:
    constraints = {
        int(j): Constraint(min=_parse_bound(c.get("min")), max=_parse_bound(c.get("max")))
        for j, c in obj.get("constraints", {}).items()
    }
    return FederatedRequest(
        space=obj["space"],
        constraints=constraints,
        stat_dims=tuple(int(j) for j in obj.get("stat_dims", [])),
        k_min=int(obj.get("k_min", 5)),
        request_id=obj.get("request_id", uuid.uuid4().hex),
        sim={int(j): float(v) for j, v in obj.get("sim", {}).items()},
        weights={int(j): float(w) for j, w in obj.get("weights", {}).items()},
        max_distance=float(obj["max_distance"]) if "max_distance" in obj else None,
    )


def response_to_json(response: PeerResponse) -> dict:
    out: dict[str, Any] = {"request_id": response.request_id, "outcome": response.outcome}
    if response.outcome == STATS and response.stats is not None:
        out["stats"] = {
            "n": response.stats.group_size,
            "dims": {
                str(j): {
                    "count": s.present_count,
                    "mean": repr(s.mean),
                    "std": repr(s.std),
                }
                for j, s in response.stats.dims.items()
            },
        }
    elif response.outcome == ERROR:
        out["error"] = response.error or "unspecified"
    return out


def response_from_json(obj: Mapping[str, Any]) -> PeerResponse:
    from .search import DimStats

    outcome = obj.get("outcome")
    if outcome == STATS:
        raw = obj.get("stats", {})
        dims = {
            int(j): DimStats(int(s["count"]), float(s["mean"]), float(s["std"]))
            for j, s in raw.get("dims", {}).items()
        }
        return PeerResponse(
            obj.get("request_id", ""), STATS,
            stats=GroupStatistics(int(raw.get("n", 0)), dims),
        )
    if outcome == SUPPRESSED:
        return PeerResponse(obj.get("request_id", ""), SUPPRESSED)
    return PeerResponse(obj.get("request_id", ""), ERROR, error=obj.get("error"))


def pooled_to_json(pooled: PooledStatistics) -> dict:
    return {
        "total_n": pooled.total_n,
        "dims": {
            str(j): {"count": s.count, "mean": repr(s.mean), "std": repr(s.std)}
            for j, s in pooled.dims.items()
        },
        "contributing_peers": pooled.contributing_peers,
        "suppressed_peers": pooled.suppressed_peers,
        "error_peers": pooled.error_peers,
        "unreachable_peers": pooled.unreachable_peers,
    }


# ---------------------------------------------------------------------------
# Coordinator
# ---------------------------------------------------------------------------


def _ask_peer(url: str, body: dict, timeout: float) -> PeerResponse:
    response = httpx.post(url.rstrip("/") + ANSWER_PATH, json=body, timeout=timeout)
    response.raise_for_status()
    return response_from_json(response.json())


def coordinate(
    request: FederatedRequest,
    peer_urls: Sequence[str],
    timeout: float = 5.0,
) -> PooledStatistics:
    """Fan a request out to all peers concurrently and pool what arrives.

    Peers that time out, refuse the connection, or answer with garbage are
    counted as unreachable; a mismatched request id is treated the same.
    """
    if not peer_urls:
        raise NoContributingPeers("no peers configured")
    body = request_to_json(request)
    responses: list[PeerResponse] = []
    unreachable = 0
    with ThreadPoolExecutor(max_workers=len(peer_urls)) as executor:
        futures = [executor.submit(_ask_peer, url, body, timeout) for url in peer_urls]
        for future in futures:
            try:
                answer = future.result(timeout=timeout * 2)
            except Exception:
                unreachable += 1
                continue
            if answer.request_id != request.request_id:
                unreachable += 1
                continue
            responses.append(answer)
    return pool(responses, unreachable=unreachable)
