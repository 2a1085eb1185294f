"""Persistence: a local definition registry and per-space vector logs.

Everything durable is an append-only log with one shared frame layout:
magic bytes ``DVS1``, then frames of ``[u32 length LE][u32 crc32 LE]
[payload]`` where the payload's first byte is a record type (0 definition,
1 domain vector, 2 local-table entry). On open, frames are replayed into
memory; a torn frame at the tail (crash artifact) is dropped, a bad frame
elsewhere is corruption. Writes are flushed and fsynced before the call
returns, so an acknowledged record survives a process kill.

The registry stands in for the internet hosting of definitions: spaces are
addressed by their identity UL, by content hash, or by a short index into
the local UL table. A fetch hook can be installed to pull unknown full-URL
definitions from elsewhere; failures surface as NotFound.
"""

from __future__ import annotations

import os
import struct
import threading
import zlib
from dataclasses import dataclass
from hashlib import sha256
from pathlib import Path
from typing import Callable, Iterable, Optional

from . import codec, model
from .codec import DomainVector, UlContext, UlRef
from .errors import (
    AppendOnlyViolation,
    Conflict,
    ContextMissing,
    CorruptLog,
    NotFound,
    SchemaMismatch,
    Truncated,
    ValidationFailed,
)
from .model import DomainDefinition, FlattenedDimension

MAGIC = b"DVS1"
EXPORT_MAGIC = b"DVX1"

RT_DEFINITION = 0
RT_DV = 1
RT_LOCAL_UL = 2

_FRAME_HEADER = struct.Struct("<II")

# A full-URL definition fetcher: canonical UL text -> canonical bytes.
FetchHook = Callable[[str], bytes]


def _append_frame(fh, payload: bytes) -> None:
    fh.write(_FRAME_HEADER.pack(len(payload), zlib.crc32(payload)))
    fh.write(payload)


def _read_frames(path: Path) -> tuple[list[bytes], bool]:
    """Replay a log; returns (payloads, tail_was_torn)."""
    data = path.read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise CorruptLog(f"{path}: bad magic")
    payloads: list[bytes] = []
    pos = len(MAGIC)
    while pos < len(data):
        if pos + _FRAME_HEADER.size > len(data):
            return payloads, True
        length, crc = _FRAME_HEADER.unpack_from(data, pos)
        start = pos + _FRAME_HEADER.size
        end = start + length
        if end > len(data):
            return payloads, True
        payload = data[start:end]
        if zlib.crc32(payload) != crc:
            if end == len(data):
                return payloads, True
            raise CorruptLog(f"{path}: checksum failure at offset {pos}")
        payloads.append(payload)
        pos = end
    return payloads, False


class _Log:
    """One append-only log file kept open for writing."""

    def __init__(self, path: Path):
        self.path = path
        fresh = not path.exists()
        if fresh:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "wb") as fh:
                fh.write(MAGIC)
                fh.flush()
                os.fsync(fh.fileno())
        self.payloads, torn = _read_frames(path)
        if torn:
            # Drop the unacknowledged tail so future appends start clean.
            valid = len(MAGIC) + sum(_FRAME_HEADER.size + len(p) for p in self.payloads)
            with open(path, "rb+") as fh:
                fh.truncate(valid)
        self._fh = open(path, "ab")

    def append(self, payload: bytes, sync: bool = True) -> None:
        _append_frame(self._fh, payload)
        if sync:
            self.sync()
        self.payloads.append(payload)

    def sync(self) -> None:
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()


def _space_log_name(ul_text: str) -> str:
    return sha256(ul_text.encode("utf-8")).hexdigest()[:16] + ".log"


class Registry:
    """All known Domain Space definitions plus the local UL table."""

    def __init__(self, data_dir: str | Path, fetch_hook: Optional[FetchHook] = None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.fetch_hook = fetch_hook
        self._lock = threading.RLock()
        self._definitions: dict[str, list[DomainDefinition]] = {}
        self._local_table: list[UlRef] = []
        self._local_index: dict[str, int] = {}
        self._hash_index: dict[bytes, tuple[str, int]] = {}
        self._flat_cache: dict[tuple[str, int], list[FlattenedDimension]] = {}
        self._log = _Log(self.data_dir / "registry.log")
        for payload in self._log.payloads:
            self._replay(payload)

    # -- replay ------------------------------------------------------------

    def _replay(self, payload: bytes) -> None:
        rtype = payload[0]
        if rtype == RT_DEFINITION:
            ul, n = codec.decode_ul(payload, 1)
            definition = model.definition_from_bytes(payload[1 + n :], ul)
            self._index_definition(definition)
        elif rtype == RT_LOCAL_UL:
            ul, _ = codec.decode_ul(payload, 1)
            self._index_local(ul)
        else:
            raise CorruptLog(f"registry log holds record type {rtype}")

    def _index_definition(self, definition: DomainDefinition) -> None:
        key = codec.canonical_ul_text(definition.ul)
        versions = self._definitions.setdefault(key, [])
        versions.append(definition)
        self._hash_index[model.content_hash(definition)] = (key, definition.version)

    def _index_local(self, ul: UlRef) -> None:
        self._local_table.append(ul)
        self._local_index[codec.canonical_ul_text(ul)] = len(self._local_table) - 1

    # -- lookups -----------------------------------------------------------

    def spaces(self) -> list[str]:
        with self._lock:
            return sorted(self._definitions)

    def versions(self, ul_text: str) -> list[int]:
        with self._lock:
            return [d.version for d in self._definitions.get(ul_text, [])]

    def local_index_of(self, ul_text: str) -> Optional[int]:
        with self._lock:
            return self._local_index.get(ul_text)

    def local_table(self) -> list[UlRef]:
        with self._lock:
            return list(self._local_table)

    def by_hash(self, digest: bytes) -> DomainDefinition:
        with self._lock:
            if digest not in self._hash_index:
                raise NotFound(f"no definition with hash {digest.hex()}")
            key, version = self._hash_index[digest]
        return self.resolve(codec.ul_from_text(key), version)

    def resolve(
        self,
        ul: UlRef,
        version: Optional[int] = None,
        context: Optional[UlContext] = None,
    ) -> DomainDefinition:
        """Latest (or pinned) definition the UL points at."""
        if isinstance(ul, codec.SameAsBefore):
            if context is None or context.last_ul is None:
                raise ContextMissing("same-as-before UL with no previous UL")
            ul = context.last_ul
        if isinstance(ul, codec.LocalTableIndex):
            with self._lock:
                if not 0 <= ul.index < len(self._local_table):
                    raise NotFound(f"local table has no entry {ul.index}")
                ul = self._local_table[ul.index]
        key = codec.canonical_ul_text(ul)
        with self._lock:
            versions = self._definitions.get(key)
        if not versions:
            versions = self._try_fetch(ul, key)
        if version is None:
            return versions[-1]
        for definition in versions:
            if definition.version == version:
                return definition
        raise NotFound(f"{key} has no version {version}")

    def _try_fetch(self, ul: UlRef, key: str) -> list[DomainDefinition]:
        if self.fetch_hook is None or not isinstance(ul, codec.FullUrl):
            raise NotFound(f"unknown space {key}")
        try:
            raw = self.fetch_hook(key)
            fetched = model.definition_from_bytes(raw, ul)
        except Exception as exc:
            raise NotFound(f"unknown space {key} (fetch failed: {exc})") from exc
        self.publish(fetched, _allow_any_version=True)
        with self._lock:
            return self._definitions[key]

    def resolver(self) -> model.Resolver:
        return lambda ul, pin: self.resolve(ul, pin)

    def flattened(self, ul_text: str, version: Optional[int] = None) -> list[FlattenedDimension]:
        definition = self.resolve(codec.ul_from_text(ul_text), version)
        cache_key = (ul_text, definition.version)
        with self._lock:
            if cache_key not in self._flat_cache:
                self._flat_cache[cache_key] = model.flatten(definition, self.resolver())
            return self._flat_cache[cache_key]

    # -- writes ------------------------------------------------------------

    def intern_ul(self, ul: UlRef) -> int:
        """Assign (or return) the stable local-table index for a global UL."""
        key = codec.canonical_ul_text(ul)
        with self._lock:
            if key in self._local_index:
                return self._local_index[key]
            self._log.append(bytes([RT_LOCAL_UL]) + codec.encode_ul(ul))
            self._index_local(ul)
            return self._local_index[key]

    def publish(
        self,
        definition: DomainDefinition,
        _allow_any_version: bool = False,
    ) -> tuple[UlRef, int, bytes]:
        """Register a definition version; returns (ul, version, content hash).

        Unpinned nested references are pinned to the latest version known
        at publish time, so the flattened layout of the published version
        can never shift afterwards.
        """
        with self._lock:
            definition = self._pin_nested(definition)
            key = codec.canonical_ul_text(definition.ul)
            existing = self._definitions.get(key, [])
            if existing and not _allow_any_version:
                # Identical content resubmitted at the latest version number
                # is a no-op, not a new version.
                latest = existing[-1]
                as_latest = DomainDefinition(
                    definition.ul, latest.version, definition.name,
                    definition.components, definition.created,
                )
                digest = model.content_hash(as_latest)
                if digest == model.content_hash(latest):
                    return definition.ul, latest.version, digest
            if not _allow_any_version:
                definition = DomainDefinition(
                    definition.ul,
                    existing[-1].version + 1 if existing else 1,
                    definition.name,
                    definition.components,
                    definition.created,
                )
            violations = model.validate_definition(definition, self.resolver())
            if violations:
                raise ValidationFailed(violations)
            digest = model.content_hash(definition)
            if existing:
                latest = existing[-1]
                if digest == model.content_hash(latest):
                    return definition.ul, latest.version, digest
                problems = model.check_append_only(latest, definition)
                if problems:
                    raise AppendOnlyViolation("; ".join(problems))
            payload = (
                bytes([RT_DEFINITION])
                + codec.encode_ul(definition.ul)
                + model.canonical_bytes(definition)
            )
            self._log.append(payload)
            self._index_definition(definition)
            self.intern_ul(definition.ul)
            return definition.ul, definition.version, digest

    def _pin_nested(self, definition: DomainDefinition) -> DomainDefinition:
        components = []
        changed = False
        for component in definition.components:
            if isinstance(component, model.NestedSpace) and component.version_pin is None:
                target = self.resolve(component.space)
                components.append(
                    model.NestedSpace(component.space, target.version, component.label)
                )
                changed = True
            else:
                components.append(component)
        if not changed:
            return definition
        return DomainDefinition(
            definition.ul, definition.version, definition.name,
            tuple(components), definition.created,
        )

    def close(self) -> None:
        self._log.close()


@dataclass(frozen=True)
class StoredDv:
    record_id: int
    version: int
    dv: DomainVector


class DvStore:
    """Append-only Domain Vector storage, one log per space."""

    def __init__(self, data_dir: str | Path, registry: Registry):
        self.data_dir = Path(data_dir) / "spaces"
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.registry = registry
        self._lock = threading.RLock()
        self._logs: dict[str, _Log] = {}
        self._records: dict[str, list[StoredDv]] = {}
        for path in sorted(self.data_dir.glob("*.log")):
            self._open_log(path)

    def _open_log(self, path: Path) -> None:
        log = _Log(path)
        records: list[StoredDv] = []
        key: Optional[str] = None
        for payload in log.payloads:
            if payload[0] != RT_DV:
                raise CorruptLog(f"{path}: unexpected record type {payload[0]}")
            version, n = codec.decode_uint(payload, 1)
            ul, m = codec.decode_ul(payload, 1 + n)
            key = key or codec.canonical_ul_text(ul)
            flat = self.registry.flattened(key, version)
            dv, _ = codec.decode_dv(payload, flat, offset=1 + n)
            records.append(StoredDv(len(records), version, dv))
        if key is not None:
            self._logs[key] = log
            self._records[key] = records
        elif not log.payloads:
            # Empty space log: recover its key lazily on first insert.
            log.close()

    def _log_for(self, key: str) -> _Log:
        if key not in self._logs:
            self._logs[key] = _Log(self.data_dir / _space_log_name(key))
            self._records.setdefault(key, [])
        return self._logs[key]

    def count(self, ul_text: str) -> int:
        with self._lock:
            return len(self._records.get(ul_text, []))

    def insert(self, dv: DomainVector, version: Optional[int] = None) -> int:
        """Validate and append one vector; durable before returning."""
        return self.insert_many([dv], version)[0]

    def insert_many(self, dvs: Iterable[DomainVector], version: Optional[int] = None) -> list[int]:
        """Append a batch under one fsync; all-or-nothing validation."""
        dvs = list(dvs)
        if not dvs:
            return []
        with self._lock:
            prepared = [self._prepare(dv, version) for dv in dvs]
            key = prepared[0][0]
            if any(k != key for k, _, _ in prepared):
                raise SchemaMismatch("one batch may only target one space")
            log = self._log_for(key)
            ids = []
            for _, ver, dv in prepared:
                flat = self.registry.flattened(key, ver)
                payload = (
                    bytes([RT_DV]) + codec.encode_uint(ver) + codec.encode_dv(dv, flat)
                )
                log.append(payload, sync=False)
                records = self._records[key]
                records.append(StoredDv(len(records), ver, dv))
                ids.append(len(records) - 1)
            log.sync()
            return ids

    def _prepare(self, dv: DomainVector, version: Optional[int]) -> tuple[str, int, DomainVector]:
        definition = self.registry.resolve(dv.space, version)
        key = codec.canonical_ul_text(definition.ul)
        if version is None:
            version = self._matching_version(key, definition.version, len(dv.values))
        flat = self.registry.flattened(key, version)
        normalized = DomainVector(definition.ul, dv.values)
        violations = model.validate_dv(normalized, flat)
        if violations:
            raise ValidationFailed(violations)
        return key, version, normalized

    def _matching_version(self, key: str, latest: int, slots: int) -> int:
        for version in range(latest, 0, -1):
            if len(self.registry.flattened(key, version)) == slots:
                return version
        return latest  # let validation report the slot mismatch

    def scan(self, ul_text: str, pad_to: Optional[int] = None) -> list[StoredDv]:
        """Snapshot of all records; optionally padded to a newer slot count."""
        with self._lock:
            records = list(self._records.get(ul_text, []))
        if pad_to is None:
            return records
        out = []
        for record in records:
            values = record.dv.values
            if len(values) < pad_to:
                values = values + (None,) * (pad_to - len(values))
            out.append(StoredDv(record.record_id, record.version,
                                DomainVector(record.dv.space, values)))
        return out

    def close(self) -> None:
        with self._lock:
            for log in self._logs.values():
                log.close()


# ---------------------------------------------------------------------------
# Space export / import
# ---------------------------------------------------------------------------


def export_space(ul_text: str, registry: Registry, store: DvStore) -> bytes:
    """Serialize a space (all definition versions plus vectors) to one stream.

    The space UL is written once; every vector after the first rides on a
    same-as-before tag. Re-exporting an imported stream is byte-identical.
    """
    versions = registry.versions(ul_text)
    if not versions:
        raise NotFound(f"unknown space {ul_text}")
    ul = codec.ul_from_text(ul_text)
    out = bytearray(EXPORT_MAGIC)
    context = UlContext()
    out += codec.encode_ul(ul, context)
    out += codec.encode_uint(len(versions))
    for version in versions:
        blob = model.canonical_bytes(registry.resolve(ul, version))
        out += codec.encode_uint(len(blob)) + blob
    records = store.scan(ul_text)
    out += codec.encode_uint(len(records))
    for record in records:
        out += codec.encode_uint(record.version)
        dv = record.dv
        if context.last_ul == dv.space:
            dv = DomainVector(codec.SameAsBefore(), dv.values)
        flat = registry.flattened(ul_text, record.version)
        out += codec.encode_dv(dv, flat, context)
    return bytes(out)


def import_space(stream: bytes, registry: Registry, store: DvStore) -> int:
    """Load an exported space into this node; returns the vector count.

    The target space must be absent here (no versions, no vectors);
    partial merges are refused.
    """
    if stream[: len(EXPORT_MAGIC)] != EXPORT_MAGIC:
        raise SchemaMismatch("not a space export stream")
    context = UlContext()
    ul, n = codec.decode_ul(stream, len(EXPORT_MAGIC), context)
    pos = len(EXPORT_MAGIC) + n
    key = codec.canonical_ul_text(ul)
    if registry.versions(key) or store.count(key):
        raise Conflict(f"space {key} already present")
    version_count, n = codec.decode_uint(stream, pos)
    pos += n
    for expected in range(1, version_count + 1):
        length, n = codec.decode_uint(stream, pos)
        pos += n
        definition = model.definition_from_bytes(stream[pos : pos + length], ul)
        pos += length
        if definition.version != expected:
            raise SchemaMismatch(
                f"export stream speaks version {definition.version}, expected {expected}"
            )
        registry.publish(definition, _allow_any_version=True)
    dv_count, n = codec.decode_uint(stream, pos)
    pos += n
    by_version: list[tuple[int, DomainVector]] = []
    for _ in range(dv_count):
        version, n = codec.decode_uint(stream, pos)
        pos += n
        flat = registry.flattened(key, version)
        dv, n = codec.decode_dv(stream, flat, context, offset=pos)
        pos += n
        by_version.append((version, dv))
    if pos != len(stream):
        raise SchemaMismatch(f"{len(stream) - pos} trailing bytes in export stream")
    for version, dv in by_version:
        store.insert(dv, version)
    return dv_count
