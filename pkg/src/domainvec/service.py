"""HTTP service tying the engine together, consumed by the CLI and web UI.

Every endpoint is a thin validated wrapper over exactly one engine
operation; the service itself computes nothing. Spaces are addressed by
local-table index, content hash, or percent-encoded UL text, all
interchangeably. Configuration comes from a plain ``key = value`` file
(see ``ServiceConfig.from_file``).
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from decimal import Decimal
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable, Mapping, Optional
from urllib.parse import parse_qs, unquote, urlparse

from . import codec, federation, jsonio, model
from .codec import DomainVector
from .decision import Interval, evaluate_variants, suggest_dimensions, suggest_intervals, weights_from_intervals
from .errors import (
    AppendOnlyViolation,
    Conflict,
    DomainVecError,
    InvalidQuery,
    NoContributingPeers,
    NonPositiveWeight,
    NotFound,
    SchemaMismatch,
    Truncated,
    ValidationFailed,
)
from .search import Constraint, GroupStatistics, SearchQuery, dimension_usages, group_stats, search
from .store import DvStore, Registry

BINARY_CONTENT_TYPE = "application/octet-stream"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8080"
    data_dir: str = "./data"
    peers: list[tuple[str, str]] = field(default_factory=list)  # (name, url)
    k_min: int = 5
    timeout_s: float = 5.0
    max_k: int = 100_000
    ui_dir: Optional[str] = None

    def __post_init__(self):
        if self.k_min < 1:
            raise ValueError("k_min must be at least 1")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        """Parse ``key = value`` lines; '#' starts a comment.

        ``peer`` lines repeat, each as ``peer = <name> <url>``.
        """
        config = cls()
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = key.strip(), value.strip()
            if key == "listen":
                config.listen = value
            elif key == "data_dir":
                config.data_dir = value
            elif key == "k_min":
                config.k_min = int(value)
            elif key == "timeout_s":
                config.timeout_s = float(value)
            elif key == "max_k":
                config.max_k = int(value)
            elif key == "ui_dir":
                config.ui_dir = value
            elif key == "peer":
                name, _, url = value.partition(" ")
                if not url:
                    raise ValueError(f"{path}:{lineno}: peer needs '<name> <url>'")
                config.peers.append((name, url.strip()))
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        config.__post_init__()
        return config

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


class Node:
    """One service instance: registry plus vector store plus config."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.registry = Registry(config.data_dir)
        self.store = DvStore(config.data_dir, self.registry)

    def close(self) -> None:
        self.store.close()
        self.registry.close()

    # -- space addressing ---------------------------------------------------

    def space_key(self, space_id: str) -> str:
        """Resolve a URL path segment to a canonical UL text."""
        if space_id.isdigit():
            definition = self.registry.resolve(codec.LocalTableIndex(int(space_id)))
            return codec.canonical_ul_text(definition.ul)
        if re.fullmatch(r"[0-9a-fA-F]{64}", space_id):
            definition = self.registry.by_hash(bytes.fromhex(space_id))
            return codec.canonical_ul_text(definition.ul)
        return codec.canonical_ul_text(codec.ul_from_text(unquote(space_id)))


# ---------------------------------------------------------------------------
# Request/response plumbing
# ---------------------------------------------------------------------------


class HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


_ERROR_STATUS = [
    ((NotFound,), 404),
    ((AppendOnlyViolation, Conflict), 409),
    ((NoContributingPeers,), 503),
    ((ValidationFailed, InvalidQuery, SchemaMismatch, NonPositiveWeight,
      Truncated, DomainVecError, ValueError, KeyError), 400),
]


def _to_http_error(exc: Exception) -> HttpError:
    for types, status in _ERROR_STATUS:
        if isinstance(exc, types):
            return HttpError(status, str(exc) or type(exc).__name__)
    raise exc


def _scalar_for(flat, j: int, value: Any):
    fd = flat[j]
    return jsonio.scalar_from_json(value, fd.wire_kind, fd.effective_scale)


def parse_query(obj: Mapping[str, Any], space_key: str, node: Node) -> SearchQuery:
    flat = node.registry.flattened(space_key)
    constraints: dict[int, Constraint] = {}
    for j_text, c in obj.get("constraints", {}).items():
        j = int(j_text)
        if not 0 <= j < len(flat):
            raise InvalidQuery(f"no dimension {j} in this space")
        constraints[j] = Constraint(
            sim=_scalar_for(flat, j, c.get("sim")),
            min=_scalar_for(flat, j, c.get("min")),
            max=_scalar_for(flat, j, c.get("max")),
        )
    k = int(obj.get("k", 1000))
    if k > node.config.max_k:
        raise InvalidQuery(f"k exceeds the configured maximum of {node.config.max_k}")
    weights = {int(j): Decimal(str(w)) for j, w in obj.get("weights", {}).items()}
    max_distance = obj.get("max_distance")
    return SearchQuery(
        space=codec.ul_from_text(space_key),
        constraints=constraints,
        k=k,
        metric=obj.get("metric", "euclidean"),
        weight_overrides=weights,
        max_distance=float(max_distance) if max_distance is not None else None,
    )


def parse_intervals(obj: Mapping[str, Any]) -> dict[int, Interval]:
    spec: dict[int, Interval] = {}
    for j_text, raw in obj.items():
        j = int(j_text)
        if "lower" in raw or "upper" in raw:
            lower = float(raw["lower"])
            upper = float(raw["upper"])
            if lower > upper:
                raise InvalidQuery(f"interval for dimension {j} has lower > upper")
            spec[j] = Interval((lower + upper) / 2, (upper - lower) / 2, 1.0)
        else:
            spec[j] = Interval(
                float(raw["center"]),
                float(raw.get("spread", 0.0)),
                float(raw.get("factor", 1.0)),
            )
    return spec


def interval_to_json(interval: Interval) -> dict:
    return {
        "center": interval.center,
        "spread": interval.spread,
        "factor": interval.factor,
        "lower": interval.lower,
        "upper": interval.upper,
        "exact": interval.exact,
    }


def stats_to_json(stats: GroupStatistics) -> dict:
    return {
        "n": stats.group_size,
        "dims": {
            str(j): {
                "count": s.present_count,
                "mean": repr(s.mean) if s.mean is not None else None,
                "std": repr(s.std) if s.std is not None else None,
            }
            for j, s in stats.dims.items()
        },
    }


# ---------------------------------------------------------------------------
# Endpoints
# ---------------------------------------------------------------------------


def list_spaces(node: Node) -> list[dict]:
    out = []
    for ul_text in node.registry.spaces():
        definition = node.registry.resolve(codec.ul_from_text(ul_text))
        out.append({
            "index": node.registry.local_index_of(ul_text),
            "ul": ul_text,
            "name": dict(definition.name),
            "versions": definition.version,
            "dims": len(node.registry.flattened(ul_text)),
            "dvs": node.store.count(ul_text),
            "hash": model.content_hash(definition).hex(),
        })
    out.sort(key=lambda entry: (entry["index"] is None, entry["index"]))
    return out


def publish_space(node: Node, space_id: str, body: Mapping[str, Any]) -> dict:
    definition = jsonio.definition_from_json(body)
    addressed = unquote(space_id)
    if addressed and addressed != codec.canonical_ul_text(definition.ul):
        raise InvalidQuery(
            f"URL addresses {addressed!r} but the body defines "
            f"{codec.canonical_ul_text(definition.ul)!r}"
        )
    ul, version, digest = node.registry.publish(definition)
    return {
        "ul": codec.canonical_ul_text(ul),
        "version": version,
        "hash": digest.hex(),
        "index": node.registry.local_index_of(codec.canonical_ul_text(ul)),
    }


def get_space(node: Node, space_id: str, version: Optional[int]) -> dict:
    key = node.space_key(space_id)
    definition = node.registry.resolve(codec.ul_from_text(key), version)
    out = jsonio.definition_to_json(definition)
    out["hash"] = model.content_hash(definition).hex()
    out["dvs"] = node.store.count(key)
    out["flattened"] = [
        {
            "index": j,
            "path": list(fd.path),
            "gid": fd.gid.text(),
            **jsonio.dimension_to_json(fd.dim),
        }
        for j, fd in enumerate(node.registry.flattened(key, definition.version))
    ]
    bits = model.information_content(definition, node.registry.resolver())
    out["information_bits"] = None if bits == model.UNBOUNDED else bits
    return out


def ingest_json(node: Node, space_key: str, body: Any) -> dict:
    if not isinstance(body, list):
        raise InvalidQuery("vector ingestion expects a JSON array")
    flat = node.registry.flattened(space_key)
    dvs = []
    for entry in body:
        if "space" not in entry:
            entry = dict(entry, space=space_key)
        dvs.append(jsonio.dv_from_json(entry, flat))
    ids = node.store.insert_many(dvs)
    return {"inserted": len(ids), "record_ids": ids}


def ingest_binary(node: Node, space_key: str, raw: bytes) -> dict:
    context = codec.UlContext()
    count, pos = codec.decode_uint(raw, 0)
    ids = []
    for _ in range(count):
        version, n = codec.decode_uint(raw, pos)
        pos += n
        flat = node.registry.flattened(space_key, version)
        dv, n = codec.decode_dv(raw, flat, context, offset=pos)
        pos += n
        if codec.canonical_ul_text(dv.space) != space_key:
            raise SchemaMismatch("stream vector targets a different space")
        ids.append(node.store.insert(dv, version))
    if pos != len(raw):
        raise SchemaMismatch(f"{len(raw) - pos} trailing bytes in vector stream")
    return {"inserted": len(ids), "record_ids": ids}


def encode_dv_stream(node: Node, space_key: str, dvs: list[tuple[int, DomainVector]]) -> bytes:
    """Binary ingestion stream: count, then (version, vector) records."""
    context = codec.UlContext()
    out = bytearray(codec.encode_uint(len(dvs)))
    for version, dv in dvs:
        flat = node.registry.flattened(space_key, version)
        out += codec.encode_uint(version)
        if context.last_ul == dv.space:
            dv = DomainVector(codec.SameAsBefore(), dv.values)
        out += codec.encode_dv(dv, flat, context)
    return bytes(out)


def run_search(node: Node, space_key: str, body: Mapping[str, Any]) -> dict:
    query = parse_query(body, space_key, node)
    result = search(query, node.store, node.registry)
    return {
        "hits": [
            {
                "record_id": h.record_id,
                "distance": h.distance,
                "values": [jsonio.scalar_to_json(v) for v in h.dv.values],
            }
            for h in result.hits
        ],
        "total": len(result.hits),
    }


def run_stats(node: Node, space_key: str, body: Mapping[str, Any]) -> dict:
    query = parse_query(body, space_key, node)
    stats = group_stats(query, [int(j) for j in body.get("stat_dims", [])],
                        node.store, node.registry)
    return stats_to_json(stats)


def run_suggest_dimensions(node: Node, space_key: str, body: Mapping[str, Any]) -> dict:
    query = parse_query(body, space_key, node)
    ranking = suggest_dimensions(query, node.store, node.registry)
    return {"ranking": [{"dim": j, "present_count": c} for j, c in ranking]}


def run_suggest_intervals(node: Node, space_key: str, body: Mapping[str, Any]) -> dict:
    query = parse_query(body, space_key, node)
    flat = node.registry.flattened(space_key)
    hits = search(
        SearchQuery(query.space, query.constraints, k=max(node.store.count(space_key), 1)),
        node.store, node.registry,
    ).hits
    group = [h.dv.values for h in hits]
    centers = {
        int(j): _scalar_for(flat, int(j), v) for j, v in body.get("centers", {}).items()
    }
    factors = {int(j): float(r) for j, r in body.get("factors", {}).items()}
    spec = suggest_intervals(centers, group, factors)
    return {
        "group_size": len(group),
        "intervals": {str(j): interval_to_json(i) for j, i in spec.items()},
        "weights": {str(j): w for j, w in weights_from_intervals(spec).items()},
    }


def run_evaluate_variants(node: Node, space_key: str, body: Mapping[str, Any]) -> dict:
    preconditions = parse_intervals(body.get("preconditions", {}))
    variants = [parse_intervals(v) for v in body.get("variants", [])]
    result_dims = [int(j) for j in body.get("result_dims", [])]
    stats = evaluate_variants(
        codec.ul_from_text(space_key), preconditions, variants, result_dims,
        node.store, node.registry,
    )
    return {"variants": [stats_to_json(s) for s in stats]}


def run_usages(node: Node, gid_text: str) -> dict:
    gid = model.GlobalDimensionId.from_text(unquote(gid_text))
    usages = dimension_usages(gid, node.registry)
    return {
        "gid": gid.text(),
        "usages": [
            {"space": ul_text, "dim": j, "index": node.registry.local_index_of(ul_text)}
            for ul_text, j in usages
        ],
    }


def run_federated_answer(node: Node, body: Mapping[str, Any]) -> dict:
    request = federation.request_from_json(body)
    if request.k_min < node.config.k_min:
        request = federation.FederatedRequest(
            space=request.space, constraints=request.constraints,
            stat_dims=request.stat_dims, k_min=node.config.k_min,
            request_id=request.request_id, sim=request.sim,
            weights=request.weights, max_distance=request.max_distance,
        )
    response = federation.peer_answer(request, node.store, node.registry)
    return federation.response_to_json(response)


def run_federated_search(node: Node, body: Mapping[str, Any]) -> dict:
    payload = dict(body)
    payload.setdefault("k_min", node.config.k_min)
    request = federation.request_from_json(payload)
    peer_urls = [url for _, url in node.config.peers]
    if "peers" in body:
        peer_urls = list(body["peers"])
    pooled = federation.coordinate(request, peer_urls, timeout=node.config.timeout_s)
    return federation.pooled_to_json(pooled)


# ---------------------------------------------------------------------------
# HTTP server
# ---------------------------------------------------------------------------

_ROUTES: list[tuple[str, re.Pattern, Callable]] = []


def route(method: str, pattern: str):
    compiled = re.compile("^" + pattern + "$")

    def registrar(fn):
        _ROUTES.append((method, compiled, fn))
        return fn

    return registrar


@route("GET", r"/spaces")
def _(node, match, body, raw, query):
    return list_spaces(node)


@route("PUT", r"/spaces/(?P<sid>[^/]*)")
def _(node, match, body, raw, query):
    return publish_space(node, match["sid"], body)


@route("GET", r"/spaces/(?P<sid>[^/]+)")
def _(node, match, body, raw, query):
    version = int(query["version"][0]) if "version" in query else None
    return get_space(node, match["sid"], version)


@route("POST", r"/spaces/(?P<sid>[^/]+)/dvs")
def _(node, match, body, raw, query):
    key = node.space_key(match["sid"])
    if raw is not None:
        return ingest_binary(node, key, raw)
    return ingest_json(node, key, body)


@route("POST", r"/spaces/(?P<sid>[^/]+)/search")
def _(node, match, body, raw, query):
    return run_search(node, node.space_key(match["sid"]), body)


@route("POST", r"/spaces/(?P<sid>[^/]+)/stats")
def _(node, match, body, raw, query):
    return run_stats(node, node.space_key(match["sid"]), body)


@route("POST", r"/spaces/(?P<sid>[^/]+)/suggest-dimensions")
def _(node, match, body, raw, query):
    return run_suggest_dimensions(node, node.space_key(match["sid"]), body)


@route("POST", r"/spaces/(?P<sid>[^/]+)/suggest-intervals")
def _(node, match, body, raw, query):
    return run_suggest_intervals(node, node.space_key(match["sid"]), body)


@route("POST", r"/spaces/(?P<sid>[^/]+)/evaluate-variants")
def _(node, match, body, raw, query):
    return run_evaluate_variants(node, node.space_key(match["sid"]), body)


@route("GET", r"/dimensions/(?P<gid>[^/]+)/usages")
def _(node, match, body, raw, query):
    return run_usages(node, match["gid"])


@route("POST", r"/federated/answer")
def _(node, match, body, raw, query):
    return run_federated_answer(node, body)


@route("POST", r"/federated/search")
def _(node, match, body, raw, query):
    return run_federated_search(node, body)


_UI_TYPES = {".html": "text/html", ".js": "text/javascript",
             ".css": "text/css", ".svg": "image/svg+xml", ".map": "application/json"}


class _Handler(BaseHTTPRequestHandler):
    node: Node  # set by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # quiet by default
        pass

    def _send(self, status: int, payload: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, obj: Any) -> None:
        self._send(status, json.dumps(obj).encode("utf-8"))

    def _serve_ui(self, path: str) -> bool:
        ui_dir = self.node.config.ui_dir
        if ui_dir is None:
            return False
        relative = path.lstrip("/") or "index.html"
        target = (Path(ui_dir) / relative).resolve()
        if not str(target).startswith(str(Path(ui_dir).resolve())) or not target.is_file():
            return False
        self._send(200, target.read_bytes(),
                   _UI_TYPES.get(target.suffix, "application/octet-stream"))
        return True

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        path = parsed.path.rstrip("/") or "/"
        query = parse_qs(parsed.query)
        body = None
        raw = None
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            data = self.rfile.read(length)
            if self.headers.get("Content-Type", "").startswith(BINARY_CONTENT_TYPE):
                raw = data
            else:
                try:
                    body = json.loads(data)
                except json.JSONDecodeError as exc:
                    self._send_json(400, {"error": f"malformed JSON body: {exc}"})
                    return
        for route_method, pattern, handler in _ROUTES:
            if route_method != method:
                continue
            match = pattern.match(path)
            if not match:
                continue
            try:
                result = handler(self.node, match.groupdict(), body, raw, query)
            except HttpError as exc:
                self._send_json(exc.status, {"error": exc.message})
            except Exception as exc:  # noqa: BLE001 - mapped to status codes
                try:
                    http_exc = _to_http_error(exc)
                except Exception:
                    self._send_json(500, {"error": f"{type(exc).__name__}: {exc}"})
                else:
                    self._send_json(http_exc.status, {"error": http_exc.message})
            else:
                self._send_json(200, result)
            return
        if method == "GET" and self._serve_ui(path):
            return
        self._send_json(404, {"error": f"no route for {method} {path}"})

    def do_GET(self):
        self._dispatch("GET")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_POST(self):
        self._dispatch("POST")


class Server:
    """A running HTTP server bound to a node; usable as a context manager."""

    def __init__(self, node: Node, host: Optional[str] = None, port: Optional[int] = None):
        self.node = node
        handler = type("BoundHandler", (_Handler,), {"node": node})
        self.httpd = ThreadingHTTPServer(
            (host if host is not None else node.config.host,
             port if port is not None else node.config.port),
            handler,
        )
        self._thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    @property
    def url(self) -> str:
        host = self.httpd.server_address[0]
        return f"http://{host}:{self.port}"

    def start(self) -> "Server":
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "Server":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
