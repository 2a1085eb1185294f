from __future__ import annotations

import json
import random
import socket
import time

import httpx
import pytest

from domainvec import federation
from domainvec.codec import DomainVector, FullUrl
from domainvec.errors import NoContributingPeers
from domainvec.federation import (
    FederatedRequest,
    PeerResponse,
    coordinate,
    peer_answer,
    pool,
    request_from_json,
    request_to_json,
    response_from_json,
    response_to_json,
)
from domainvec.model import DimensionDefinition, DomainDefinition
from domainvec.search import Constraint, DimStats, GroupStatistics
from domainvec.service import Node, Server, ServiceConfig

from oracles import brute_moments

UL = "http://e.org/panel"


def definition():
    return DomainDefinition(
        FullUrl(UL), 1, {"en": "panel"},
        (DimensionDefinition("x", min=0, max=1000),
         DimensionDefinition("y", min=0, max=1000)),
    )


def make_node(tmp_path, name, values):
    node = Node(ServiceConfig(data_dir=str(tmp_path / name)))
    node.registry.publish(definition())
    if values:
        node.store.insert_many([DomainVector(FullUrl(UL), (v, v % 7)) for v in values])
    return node


def stats_response(n, mean, std, dim=0, count=None, request_id="r"):
    return PeerResponse(
        request_id, "stats",
        stats=GroupStatistics(n, {dim: DimStats(count if count is not None else n, mean, std)}),
    )


class TestPeerAnswer:
    def test_floor_suppresses_small_group(self, tmp_path):
        node = make_node(tmp_path, "a", [1, 2, 3, 4])
        request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0,), k_min=5)
        answer = peer_answer(request, node.store, node.registry)
        assert answer.outcome == "suppressed"
        assert answer.stats is None
        node.close()

    def test_floor_boundary_reports(self, tmp_path):
        node = make_node(tmp_path, "a", [1, 2, 3, 4, 5])
        request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0,), k_min=5)
        answer = peer_answer(request, node.store, node.registry)
        assert answer.outcome == "stats"
        assert answer.stats.group_size == 5
        node.close()

    def test_malformed_space_is_error(self, tmp_path):
        node = make_node(tmp_path, "a", [1, 2, 3, 4, 5])
        request = FederatedRequest("http://nowhere.org/x",
                                   {0: Constraint(min=0, max=1)}, (0,))
        answer = peer_answer(request, node.store, node.registry)
        assert answer.outcome == "error"
        node.close()

    def test_per_dimension_floor(self, tmp_path):
        # Group of 6 but dimension 1 present only 3 times: the group is
        # reportable, the sparse dimension is not.
        node = Node(ServiceConfig(data_dir=str(tmp_path / "a")))
        node.registry.publish(definition())
        node.store.insert_many([
            DomainVector(FullUrl(UL), (v, v if v < 3 else None)) for v in range(6)
        ])
        request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0, 1), k_min=5)
        answer = peer_answer(request, node.store, node.registry)
        assert answer.outcome == "stats"
        assert 0 in answer.stats.dims and 1 not in answer.stats.dims
        node.close()


class TestPool:
    def test_weighted_mean(self):
        pooled = pool([stats_response(2, 1.0, 0.0), stats_response(3, 2.0, 0.0)])
        assert pooled.total_n == 5
        assert pooled.dims[0].mean == pytest.approx(1.6)

    def test_single_peer_identity(self):
        pooled = pool([stats_response(4, 2.5, 1.25)])
        assert pooled.total_n == 4
        assert pooled.dims[0].mean == 2.5
        assert pooled.dims[0].std == 1.25

    def test_split_reconstructs_global_moments(self):
        chunks = ([1, 2, 3], [4, 5, 6])
        responses = []
        for chunk in chunks:
            n, mean, std = brute_moments([float(v) for v in chunk])
            responses.append(stats_response(n, mean, std))
        pooled = pool(responses)
        n, mean, std = brute_moments([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        assert pooled.dims[0].count == n
        assert pooled.dims[0].mean == pytest.approx(mean, abs=1e-12)
        assert pooled.dims[0].std == pytest.approx(std, abs=1e-12)

    def test_partition_invariance(self):
        rng = random.Random(5)
        data = [rng.uniform(0, 100) for _ in range(2000)]
        _, global_mean, global_std = brute_moments(data)
        results = []
        for trial in range(5):
            rng.shuffle(data)
            cut_count = rng.randint(1, 9)
            cuts = sorted(rng.sample(range(1, len(data)), cut_count))
            chunks = [data[a:b] for a, b in zip([0] + cuts, cuts + [len(data)])]
            responses = []
            for chunk in chunks:
                n, mean, std = brute_moments(chunk)
                responses.append(stats_response(n, mean, std))
            pooled = pool(responses)
            assert pooled.dims[0].mean == pytest.approx(global_mean, abs=1e-9)
            assert pooled.dims[0].std == pytest.approx(global_std, abs=1e-9)
            results.append((pooled.dims[0].mean, pooled.dims[0].std))
        for mean, std in results[1:]:
            assert mean == pytest.approx(results[0][0], abs=1e-9)
            assert std == pytest.approx(results[0][1], abs=1e-9)

    def test_order_independent(self):
        responses = [stats_response(2, 1.0, 0.5), stats_response(7, 3.0, 1.0),
                     stats_response(11, -2.0, 2.0)]
        baseline = pool(responses)
        for _ in range(10):
            random.shuffle(responses)
            assert pool(responses) == baseline

    def test_suppressed_and_errors_counted_not_pooled(self):
        responses = [
            stats_response(4, 2.0, 1.0),
            PeerResponse("r", "suppressed"),
            PeerResponse("r", "error", error="boom"),
        ]
        pooled = pool(responses)
        assert pooled.total_n == 4
        assert pooled.suppressed_peers == 1
        assert pooled.error_peers == 1

    def test_nothing_usable(self):
        with pytest.raises(NoContributingPeers):
            pool([PeerResponse("r", "suppressed")])
        with pytest.raises(NoContributingPeers):
            pool([])


class TestWireForms:
    def test_request_round_trip(self):
        request = FederatedRequest(
            UL, {0: Constraint(min=1, max=9), 1: Constraint(max=4)}, (0, 1),
            k_min=7, sim={0: 5.0}, weights={0: 2.0}, max_distance=3.5,
        )
        again = request_from_json(json.loads(json.dumps(request_to_json(request))))
        assert again.request_id == request.request_id
        assert again.stat_dims == request.stat_dims
        assert again.k_min == 7
        assert float(again.constraints[0].min) == 1.0
        assert again.sim == {0: 5.0} and again.max_distance == 3.5

    def test_response_round_trip_exact_floats(self):
        response = stats_response(3, 1 / 3, 0.1 + 0.2)
        again = response_from_json(json.loads(json.dumps(response_to_json(response))))
        assert again.stats.dims[0].mean == 1 / 3  # repr round-trip is exact
        assert again.stats.dims[0].std == 0.1 + 0.2

    def test_suppressed_carries_nothing(self):
        body = response_to_json(PeerResponse("rid", "suppressed"))
        assert set(body) == {"request_id", "outcome"}


@pytest.fixture
def peer_servers(tmp_path):
    values = list(range(100))
    random.Random(8).shuffle(values)
    chunks = [values[:20], values[20:50], values[50:]]
    nodes = [make_node(tmp_path, f"peer{i}", chunk) for i, chunk in enumerate(chunks)]
    servers = [Server(node, host="127.0.0.1", port=0).start() for node in nodes]
    yield servers, chunks
    for server in servers:
        server.stop()
    for node in nodes:
        node.close()


class TestCoordinate:
    def test_live_pooling_matches_in_process(self, peer_servers):
        servers, chunks = peer_servers
        request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0,), k_min=5)
        pooled = coordinate(request, [s.url for s in servers], timeout=5.0)
        in_process = pool([
            stats_response(*brute_moments([float(v) for v in chunk]))
            for chunk in chunks
        ])
        assert pooled.total_n == in_process.total_n == 100
        assert pooled.contributing_peers == 3
        assert pooled.dims[0].mean == pytest.approx(in_process.dims[0].mean, abs=1e-12)
        assert pooled.dims[0].std == pytest.approx(in_process.dims[0].std, abs=1e-12)

    def test_dead_peer_counted_unreachable(self, peer_servers):
        servers, _ = peer_servers
        # A listener that accepts and never answers, to force a timeout.
        sink = socket.socket()
        sink.bind(("127.0.0.1", 0))
        sink.listen(1)
        sink_url = f"http://127.0.0.1:{sink.getsockname()[1]}"
        try:
            request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0,), k_min=5)
            start = time.monotonic()
            pooled = coordinate(request, [s.url for s in servers] + [sink_url], timeout=1.0)
            elapsed = time.monotonic() - start
            assert pooled.contributing_peers == 3
            assert pooled.unreachable_peers == 1
            assert elapsed < 5.0
        finally:
            sink.close()

    def test_all_suppressed_raises(self, peer_servers):
        servers, _ = peer_servers
        request = FederatedRequest(UL, {0: Constraint(min=0, max=2)}, (0,), k_min=5)
        with pytest.raises(NoContributingPeers):
            coordinate(request, [s.url for s in servers], timeout=5.0)


class TestAnonymityOnTheWire:
    def test_suppressed_wire_body_reveals_nothing(self, tmp_path):
        node = make_node(tmp_path, "solo", [1, 2, 3, 4])  # below the floor of 5
        with Server(node, host="127.0.0.1", port=0) as server:
            request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0,), k_min=5)
            raw = httpx.post(server.url + "/federated/answer",
                             json=request_to_json(request), timeout=5.0)
            body = raw.json()
            assert body == {"request_id": request.request_id, "outcome": "suppressed"}
            # No counts, no record ids, no values anywhere in the bytes.
            for token in (b'"n"', b'"count"', b'record', b'values', b'stats'):
                assert token not in raw.content
        node.close()

    def test_peer_enforces_own_floor(self, tmp_path):
        node = make_node(tmp_path, "solo", [1, 2, 3, 4])
        node.config.k_min = 5
        with Server(node, host="127.0.0.1", port=0) as server:
            request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0,), k_min=1)
            body = httpx.post(server.url + "/federated/answer",
                              json=request_to_json(request), timeout=5.0).json()
            assert body["outcome"] == "suppressed"
        node.close()

    def test_reportable_answer_has_no_raw_records(self, tmp_path):
        node = make_node(tmp_path, "solo", list(range(20)))
        with Server(node, host="127.0.0.1", port=0) as server:
            request = FederatedRequest(UL, {0: Constraint(min=0, max=1000)}, (0,), k_min=5)
            raw = httpx.post(server.url + "/federated/answer",
                             json=request_to_json(request), timeout=5.0)
            body = raw.json()
            assert body["outcome"] == "stats"
            assert body["stats"]["n"] >= 5
            assert all(d["count"] >= 5 for d in body["stats"]["dims"].values())
            for token in (b"record_id", b"values", b'"dv"'):
                assert token not in raw.content
        node.close()
