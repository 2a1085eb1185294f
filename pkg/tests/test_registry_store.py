from __future__ import annotations

import os
import subprocess
import sys
import textwrap
from decimal import Decimal
from pathlib import Path

import pytest

from domainvec import model
from domainvec.codec import DomainVector, FullUrl, LocalTableIndex, SameAsBefore, UlContext
from domainvec.errors import (
    AppendOnlyViolation,
    Conflict,
    NotFound,
    ValidationFailed,
)
from domainvec.model import DimensionDefinition, DomainDefinition, NestedSpace
from domainvec.store import DvStore, Registry, export_space, import_space

UL = "http://e.org/things"


def definition(*extra_dims, version=1):
    dims = (
        DimensionDefinition("size", min=0, max=10),
        DimensionDefinition("grade", min=0, max=10),
    ) + extra_dims
    return DomainDefinition(FullUrl(UL), version, {"en": "things"}, dims, created=1_700_000_000)


@pytest.fixture
def node(tmp_path):
    registry = Registry(tmp_path)
    store = DvStore(tmp_path, registry)
    yield registry, store
    store.close()
    registry.close()


class TestPublish:
    def test_versions_accumulate(self, node):
        registry, _ = node
        _, v1, _ = registry.publish(definition())
        _, v2, _ = registry.publish(definition(DimensionDefinition("extra")))
        assert (v1, v2) == (1, 2)
        assert registry.versions(UL) == [1, 2]

    def test_reorder_rejected(self, node):
        registry, _ = node
        registry.publish(definition())
        reordered = DomainDefinition(
            FullUrl(UL), 2, {"en": "things"},
            (DimensionDefinition("grade", min=0, max=10),
             DimensionDefinition("size", min=0, max=10)),
            created=1_700_000_000,
        )
        with pytest.raises(AppendOnlyViolation):
            registry.publish(reordered)

    def test_identical_republish_dedups(self, node):
        registry, _ = node
        _, v1, h1 = registry.publish(definition())
        _, v2, h2 = registry.publish(definition())
        assert (v1, h1) == (v2, h2)
        assert registry.versions(UL) == [1]

    def test_validation_gate(self, node):
        registry, _ = node
        bad = DomainDefinition(FullUrl(UL), 1, {"en": "x"},
                               (DimensionDefinition("w", weight=Decimal(0)),))
        with pytest.raises(ValidationFailed):
            registry.publish(bad)

    def test_retrievable_by_hash_and_index(self, node):
        registry, _ = node
        ul, version, digest = registry.publish(definition())
        assert registry.by_hash(digest).version == version
        index = registry.local_index_of(UL)
        assert index is not None
        assert registry.resolve(LocalTableIndex(index)).ul == ul

    def test_unpinned_nested_gets_pinned(self, node):
        registry, _ = node
        registry.publish(definition())
        outer = DomainDefinition(
            FullUrl("http://e.org/outer"), 1, {"en": "outer"},
            (NestedSpace(FullUrl(UL), None, "block"),),
        )
        registry.publish(outer)
        stored = registry.resolve(FullUrl("http://e.org/outer"))
        assert stored.components[0].version_pin == 1
        # The nested space growing afterwards must not change the layout.
        registry.publish(definition(DimensionDefinition("extra")))
        assert len(registry.flattened("http://e.org/outer")) == 2


class TestResolve:
    def test_not_found(self, node):
        registry, _ = node
        with pytest.raises(NotFound):
            registry.resolve(FullUrl("http://nowhere.org/x"))

    def test_same_as_before_context(self, node):
        registry, _ = node
        registry.publish(definition())
        ctx = UlContext(last_ul=FullUrl(UL))
        assert registry.resolve(SameAsBefore(), context=ctx).version == 1

    def test_fetch_hook(self, tmp_path):
        remote = definition()
        hook_calls = []

        def hook(url):
            hook_calls.append(url)
            return model.canonical_bytes(remote)

        registry = Registry(tmp_path, fetch_hook=hook)
        resolved = registry.resolve(FullUrl(UL))
        assert resolved.components == remote.components
        assert hook_calls == [UL]
        # Now cached locally.
        registry.resolve(FullUrl(UL))
        assert len(hook_calls) == 1
        registry.close()

    def test_fetch_failure_is_not_found(self, tmp_path):
        def hook(url):
            raise IOError("connection refused")

        registry = Registry(tmp_path, fetch_hook=hook)
        with pytest.raises(NotFound, match="fetch failed"):
            registry.resolve(FullUrl("http://far.org/x"))
        registry.close()


class TestInsert:
    def test_first_record_id_zero(self, node):
        registry, store = node
        registry.publish(definition())
        assert store.insert(DomainVector(FullUrl(UL), (3, 4))) == 0
        assert store.insert(DomainVector(FullUrl(UL), (5, None))) == 1

    def test_unknown_space(self, node):
        _, store = node
        with pytest.raises(NotFound):
            store.insert(DomainVector(FullUrl("http://nowhere.org/x"), (1,)))

    def test_validation_gate(self, node):
        registry, store = node
        registry.publish(definition())
        with pytest.raises(ValidationFailed):
            store.insert(DomainVector(FullUrl(UL), (99, 0)))

    def test_bulk_count(self, node):
        registry, store = node
        registry.publish(definition())
        import random

        rng = random.Random(1005)
        dvs = [
            DomainVector(FullUrl(UL), (rng.randint(0, 10), rng.randint(0, 10)))
            for _ in range(10001)
        ]
        ids = store.insert_many(dvs)
        assert len(ids) == 10001 and ids[0] == 0 and ids[-1] == 10000
        assert store.count(UL) == 10001

    def test_old_version_vectors_coexist(self, node):
        registry, store = node
        registry.publish(definition())
        store.insert(DomainVector(FullUrl(UL), (1, 2)))
        registry.publish(definition(DimensionDefinition("extra")))
        store.insert(DomainVector(FullUrl(UL), (1, 2, None)))
        padded = store.scan(UL, pad_to=3)
        assert padded[0].dv.values == (1, 2, None)
        assert padded[1].dv.values == (1, 2, None)

    def test_read_your_writes(self, node):
        registry, store = node
        registry.publish(definition())
        rid = store.insert(DomainVector(FullUrl(UL), (7, 7)))
        assert any(r.record_id == rid for r in store.scan(UL))


class TestReopen:
    def test_round_trip_through_files(self, tmp_path):
        registry = Registry(tmp_path)
        store = DvStore(tmp_path, registry)
        registry.publish(definition())
        store.insert(DomainVector(FullUrl(UL), (3, 4)))
        store.insert(DomainVector(FullUrl(UL), (5, 6)))
        store.close()
        registry.close()

        registry2 = Registry(tmp_path)
        store2 = DvStore(tmp_path, registry2)
        assert registry2.versions(UL) == [1]
        assert [r.dv.values for r in store2.scan(UL)] == [(3, 4), (5, 6)]
        store2.close()
        registry2.close()

    def test_torn_tail_dropped(self, tmp_path):
        registry = Registry(tmp_path)
        store = DvStore(tmp_path, registry)
        registry.publish(definition())
        store.insert(DomainVector(FullUrl(UL), (3, 4)))
        store.close()
        registry.close()

        log = next((tmp_path / "spaces").glob("*.log"))
        with open(log, "ab") as fh:
            fh.write(b"\x55\x00\x00\x00garbage")

        registry2 = Registry(tmp_path)
        store2 = DvStore(tmp_path, registry2)
        assert [r.dv.values for r in store2.scan(UL)] == [(3, 4)]
        # The torn tail was truncated, so appends work again.
        store2.insert(DomainVector(FullUrl(UL), (9, 9)))
        assert store2.count(UL) == 2
        store2.close()
        registry2.close()


CRASH_SCRIPT = textwrap.dedent(
    """
    import sys
    from domainvec.codec import DomainVector, FullUrl
    from domainvec.model import DimensionDefinition, DomainDefinition
    from domainvec.store import DvStore, Registry

    data_dir = sys.argv[1]
    registry = Registry(data_dir)
    store = DvStore(data_dir, registry)
    ul = FullUrl("http://e.org/crash")
    if not registry.versions("http://e.org/crash"):
        registry.publish(DomainDefinition(ul, 1, {"en": "crash"},
                         (DimensionDefinition("n"),)))
    for i in range(10000):
        store.insert(DomainVector(ul, (i,)))
        print(i, flush=True)
    """
)


class TestCrashRecovery:
    def test_kill_mid_insert_loses_no_acknowledged_record(self, tmp_path):
        script = tmp_path / "writer.py"
        script.write_text(CRASH_SCRIPT)
        env = dict(os.environ)
        env["PYTHONPATH"] = str(Path(__file__).resolve().parents[1] / "src")
        proc = subprocess.Popen(
            [sys.executable, str(script), str(tmp_path / "data")],
            stdout=subprocess.PIPE, env=env,
        )
        acknowledged = []
        assert proc.stdout is not None
        for _ in range(50):  # let some inserts land, then kill hard
            line = proc.stdout.readline()
            if not line:
                break
            acknowledged.append(int(line))
        proc.kill()
        proc.wait()

        registry = Registry(tmp_path / "data")
        store = DvStore(tmp_path / "data", registry)
        recovered = store.scan("http://e.org/crash")
        assert len(recovered) >= len(acknowledged)
        for record in recovered:  # order and content intact
            assert record.dv.values == (record.record_id,)
        store.close()
        registry.close()


class TestConcurrency:
    def test_parallel_writers_and_readers(self, node):
        import threading

        registry, store = node
        registry.publish(definition())
        errors = []

        def write(offset):
            try:
                for i in range(50):
                    store.insert(DomainVector(FullUrl(UL), ((offset + i) % 11, 0)))
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)

        def read():
            try:
                for _ in range(100):
                    snapshot = store.scan(UL)
                    # Snapshot isolation: ids are a gapless prefix.
                    assert [r.record_id for r in snapshot] == list(range(len(snapshot)))
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)

        threads = [threading.Thread(target=write, args=(k,)) for k in range(4)]
        threads += [threading.Thread(target=read) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        assert store.count(UL) == 200


class TestExportImport:
    def seed(self, tmp_path):
        registry = Registry(tmp_path / "a")
        store = DvStore(tmp_path / "a", registry)
        registry.publish(definition())
        registry.publish(definition(DimensionDefinition("extra")))
        store.insert(DomainVector(FullUrl(UL), (1, 2)), version=1)
        store.insert(DomainVector(FullUrl(UL), (3, 4, None)), version=2)
        store.insert(DomainVector(FullUrl(UL), (5, 6, None)), version=2)
        return registry, store

    def test_import_reproduces_byte_identical_export(self, tmp_path):
        registry, store = self.seed(tmp_path)
        stream = export_space(UL, registry, store)

        registry2 = Registry(tmp_path / "b")
        store2 = DvStore(tmp_path / "b", registry2)
        assert import_space(stream, registry2, store2) == 3
        assert export_space(UL, registry2, store2) == stream
        assert registry2.versions(UL) == [1, 2]
        for a, b in zip(store.scan(UL), store2.scan(UL)):
            assert (a.record_id, a.version, a.dv) == (b.record_id, b.version, b.dv)

    def test_ul_sent_once(self, tmp_path):
        registry, store = self.seed(tmp_path)
        stream = export_space(UL, registry, store)
        # One full-URL UL for the stream header; every vector after the
        # first repeats via the 1-byte same-as-before tag.
        assert stream.count(UL.encode()) == 1

    def test_import_into_populated_space_conflicts(self, tmp_path):
        registry, store = self.seed(tmp_path)
        stream = export_space(UL, registry, store)
        with pytest.raises(Conflict):
            import_space(stream, registry, store)
