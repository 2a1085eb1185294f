from __future__ import annotations

import math
import random

import pytest

from domainvec.codec import DomainVector, FullUrl
from domainvec.errors import InvalidQuery
from domainvec.model import DimensionDefinition, DomainDefinition
from domainvec.decision import (
    Interval,
    RoleTagging,
    evaluate_variants,
    suggest_dimensions,
    suggest_intervals,
    weights_from_intervals,
)
from domainvec.search import Constraint, SearchQuery, search
from domainvec.store import DvStore, Registry

from oracles import brute_moments, brute_range_ok

UL = "http://e.org/cases"


@pytest.fixture
def node(tmp_path):
    registry = Registry(tmp_path)
    store = DvStore(tmp_path, registry)
    d = DomainDefinition(
        FullUrl(UL), 1, {"en": "cases"},
        (DimensionDefinition("age", min=0, max=100),        # precondition
         DimensionDefinition("marker", min=0, max=50),      # precondition
         DimensionDefinition("treatment", min=1, max=3),    # decision
         DimensionDefinition("outcome", min=0, max=100)),   # result
    )
    registry.publish(d)
    yield registry, store
    store.close()
    registry.close()


class TestRoleTagging:
    def test_partition(self):
        tags = RoleTagging({0: "precondition", 1: "precondition",
                            2: "decision", 3: "result"})
        assert tags.dims_with("precondition") == [0, 1]
        assert tags.dims_with("result") == [3]

    def test_unknown_role_rejected(self):
        with pytest.raises(InvalidQuery):
            RoleTagging({0: "outcome"})


class TestSuggestDimensions:
    def test_fill_frequency_ranking(self, node):
        registry, store = node
        dvs = []
        for i in range(10):
            # All fill age; half fill marker; treatment never.
            dvs.append(DomainVector(FullUrl(UL),
                                    (30, 7 if i % 2 == 0 else None, None, None)))
        store.insert_many(dvs)
        ranking = suggest_dimensions(
            SearchQuery(FullUrl(UL), {0: Constraint(min=0, max=100)}),
            store, registry,
        )
        assert ranking == [(0, 10), (1, 5), (2, 0), (3, 0)]

    def test_empty_group_empty_ranking(self, node):
        registry, store = node
        store.insert(DomainVector(FullUrl(UL), (30, None, None, None)))
        ranking = suggest_dimensions(
            SearchQuery(FullUrl(UL), {0: Constraint(min=90, max=100)}),
            store, registry,
        )
        assert ranking == []

    def test_matches_counting_oracle(self, node):
        registry, store = node
        rng = random.Random(12)
        bounds = ((0, 100), (0, 50), (1, 3), (0, 100))
        dvs = [
            DomainVector(FullUrl(UL), tuple(
                rng.randint(lo, hi) if rng.random() < p else None
                for p, (lo, hi) in zip((0.9, 0.5, 0.7, 0.3), bounds)
            ))
            for _ in range(400)
        ]
        store.insert_many(dvs)
        ranking = suggest_dimensions(
            SearchQuery(FullUrl(UL), {0: Constraint(min=10, max=30)}),
            store, registry,
        )
        members = [dv.values for dv in dvs if brute_range_ok(dv.values, {0: (10, 30)})]
        expected = sorted(
            ((j, sum(1 for v in members if v[j] is not None)) for j in range(4)),
            key=lambda t: (-t[1], t[0]),
        )
        assert ranking == expected


class TestSuggestIntervals:
    def test_direct_formula(self):
        group = [(10,), (14,)]  # std = 2
        spec = suggest_intervals({0: 10}, group, {0: 1.5})
        assert spec[0].spread == 2.0
        assert (spec[0].lower, spec[0].upper) == (7.0, 13.0)

    def test_zero_spread_is_exact(self):
        spec = suggest_intervals({0: 5}, [(5,), (5,)])
        assert spec[0].exact
        assert (spec[0].lower, spec[0].upper) == (5.0, 5.0)

    def test_zero_factor_is_exact(self):
        spec = suggest_intervals({0: 5}, [(1,), (9,)], {0: 0.0})
        assert spec[0].exact
        assert (spec[0].lower, spec[0].upper) == (5.0, 5.0)

    def test_interval_always_contains_center(self):
        rng = random.Random(3)
        for _ in range(200):
            center = rng.uniform(-50, 50)
            group = [(rng.uniform(-50, 50),) for _ in range(rng.randint(1, 20))]
            factor = rng.uniform(0, 3)
            spec = suggest_intervals({0: center}, group, {0: factor})
            assert spec[0].lower <= center <= spec[0].upper

    def test_empty_group_gives_exact_interval(self):
        spec = suggest_intervals({0: 4}, [])
        assert spec[0].exact


class TestWeightsFromIntervals:
    def test_inverse_width(self):
        spec = {0: Interval(10, 2, 1.5)}  # width 6
        assert weights_from_intervals(spec) == {0: pytest.approx(1 / 6)}

    def test_mixed_widths_rank_like_oracle(self, node):
        registry, store = node
        rng = random.Random(77)
        dvs = [DomainVector(FullUrl(UL),
                            (rng.randint(0, 100), rng.randint(0, 50), None, None))
               for _ in range(500)]
        store.insert_many(dvs)
        spec = {0: Interval(50, 1, 1), 1: Interval(25, 2, 1)}  # widths 2 and 4
        weights = weights_from_intervals(spec)
        assert weights == {0: 0.5, 1: 0.25}
        query = SearchQuery(
            FullUrl(UL), {0: Constraint(sim=50), 1: Constraint(sim=25)},
            k=50, metric="euclidean",
            weight_overrides={j: __import__("decimal").Decimal(str(w))
                              for j, w in weights.items()},
        )
        hits = search(query, store, registry).hits
        scored = sorted(
            (math.sqrt(0.5 * (dv.values[0] - 50) ** 2 + 0.25 * (dv.values[1] - 25) ** 2), i)
            for i, dv in enumerate(dvs)
        )
        assert [h.record_id for h in hits] == [i for _, i in scored[:50]]

    def test_all_exact_gives_empty_map(self):
        assert weights_from_intervals({0: Interval(5), 1: Interval(7)}) == {}


class TestEvaluateVariants:
    def seed(self, store, rng_seed=42):
        # Within the precondition window (age 40..60), treatment 1 has
        # outcomes near 80, treatment 2 near 30.
        rng = random.Random(rng_seed)
        dvs = []
        for _ in range(300):
            age = rng.randint(0, 100)
            treatment = rng.choice([1, 2])
            base = 80 if treatment == 1 else 30
            outcome = max(0, min(100, base + rng.randint(-10, 10)))
            dvs.append(DomainVector(FullUrl(UL), (age, None, treatment, outcome)))
        store.insert_many(dvs)
        return dvs

    def test_matches_filtered_moment_oracle(self, node):
        registry, store = node
        dvs = self.seed(store)
        pre = {0: Interval(50, 10, 1.0)}  # ages 40..60
        variants = [{2: Interval(1)}, {2: Interval(2)}]
        stats = evaluate_variants(FullUrl(UL), pre, variants, [3], store, registry)

        for variant_value, got in zip((1, 2), stats):
            members = [
                dv.values for dv in dvs
                if brute_range_ok(dv.values, {0: (40, 60), 2: (variant_value, variant_value)})
            ]
            n, mean, std = brute_moments([float(v[3]) for v in members])
            assert got.group_size == len(members)
            assert got.dims[3].present_count == n
            assert got.dims[3].mean == pytest.approx(mean, abs=1e-9)
            assert got.dims[3].std == pytest.approx(std, abs=1e-9)
        assert stats[0].dims[3].mean > stats[1].dims[3].mean

    def test_variant_matching_nothing(self, node):
        registry, store = node
        self.seed(store)
        stats = evaluate_variants(
            FullUrl(UL), {0: Interval(50, 10, 1.0)}, [{2: Interval(3)}], [3],
            store, registry,
        )
        assert stats[0].group_size == 0

    def test_identical_variants_identical_statistics(self, node):
        registry, store = node
        self.seed(store)
        variants = [{2: Interval(1)}, {2: Interval(1)}]
        a, b = evaluate_variants(FullUrl(UL), {0: Interval(50, 10, 1.0)},
                                 variants, [3], store, registry)
        assert a == b

    def test_result_dims_required(self, node):
        registry, store = node
        with pytest.raises(InvalidQuery):
            evaluate_variants(FullUrl(UL), {0: Interval(50)}, [{2: Interval(1)}],
                              [], store, registry)

    def test_narrowing_preconditions_shrinks_groups(self, node):
        registry, store = node
        self.seed(store)
        sizes = []
        for spread in (30, 20, 10, 5, 0):
            stats = evaluate_variants(
                FullUrl(UL), {0: Interval(50, spread, 1.0)},
                [{2: Interval(1)}], [3], store, registry,
            )
            sizes.append(stats[0].group_size)
        assert sizes == sorted(sizes, reverse=True)
