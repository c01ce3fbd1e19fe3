import dataclasses
from collections import Counter

import pytest

from sniclust.errors import InvalidScenarioError
from sniclust.synth import (
    DeviceProfile,
    Scenario,
    ablation_contrast_dataset,
    build_target_dataset,
    default_association_scenario,
    generate,
    meaningful_fraction_sweep,
    random_scenario,
    varying_connection_datasets,
)


def small_scenario(**overrides):
    base = random_scenario(seed=1, n_profiles=3, clients_per_profile=2, connections_per_client=8)
    return dataclasses.replace(base, **overrides)


class TestGenerate:
    def test_deterministic(self):
        sc = small_scenario()
        assert generate(sc) == generate(sc)

    def test_seed_changes_traffic(self):
        ds_a, _ = generate(small_scenario(seed=1))
        ds_b, _ = generate(small_scenario(seed=2))
        assert [r.sni for r in ds_a.records] != [r.sni for r in ds_b.records]

    def test_record_count(self):
        sc = small_scenario()
        ds, truth = generate(sc)
        expected = len(sc.profiles) * sc.clients_per_profile * sc.connections_per_client
        assert len(ds) == len(truth) == expected

    def test_truth_partitions_by_profile(self):
        sc = small_scenario()
        ds, truth = generate(sc)
        assert set(truth) == {r.conn_id for r in ds.records}
        for rec in ds.records:
            assert rec.conn_id.startswith(truth[rec.conn_id] + "-")

    def test_weight_zero_stays_meaningful(self):
        sc = small_scenario()
        profiles = tuple(
            dataclasses.replace(p, generic_pool_weight=0.0) for p in sc.profiles
        )
        ds, truth = generate(dataclasses.replace(sc, profiles=profiles))
        by_name = {p.name: p for p in profiles}
        for rec in ds.records:
            assert rec.sni in by_name[truth[rec.conn_id]].meaningful_domains

    def test_weight_one_stays_generic(self):
        sc = small_scenario()
        profiles = tuple(
            dataclasses.replace(p, generic_pool_weight=1.0) for p in sc.profiles
        )
        ds, _ = generate(dataclasses.replace(sc, profiles=profiles))
        assert all(r.sni in sc.generic_pool for r in ds.records)

    def test_round_trip_through_jsonl(self, tmp_path):
        ds, _ = generate(small_scenario())
        out = tmp_path / "synth.jsonl"
        ds.to_jsonl(out)
        from sniclust.ingest import parse_dataset

        assert parse_dataset(out) == ds


class TestValidation:
    def test_profile_needs_meaningful_domains(self):
        with pytest.raises(InvalidScenarioError):
            DeviceProfile(name="x", fingerprint={}, meaningful_domains=())

    def test_profile_rejects_bad_weight(self):
        with pytest.raises(InvalidScenarioError):
            DeviceProfile(
                name="x", fingerprint={}, meaningful_domains=("a.com",), generic_pool_weight=1.5
            )

    def test_profile_rejects_unknown_field(self):
        with pytest.raises(InvalidScenarioError):
            DeviceProfile(name="x", fingerprint={"nope": 1}, meaningful_domains=("a.com",))

    def test_scenario_needs_profiles(self):
        with pytest.raises(InvalidScenarioError):
            dataclasses.replace(small_scenario(), profiles=())

    def test_scenario_rejects_duplicate_names(self):
        sc = small_scenario()
        with pytest.raises(InvalidScenarioError):
            dataclasses.replace(sc, profiles=(sc.profiles[0], sc.profiles[0]))

    def test_target_meaningful_count_bounds(self):
        with pytest.raises(InvalidScenarioError):
            build_target_dataset(default_association_scenario(), 300, 301)

    def test_target_total_too_small(self):
        sc = dataclasses.replace(default_association_scenario(), total_connections=100)
        with pytest.raises(InvalidScenarioError):
            build_target_dataset(sc, 300, 50)

    def test_fraction_out_of_range(self):
        with pytest.raises(InvalidScenarioError):
            meaningful_fraction_sweep(default_association_scenario(), [1.2])

    def test_varying_count_positive(self):
        with pytest.raises(InvalidScenarioError):
            varying_connection_datasets(default_association_scenario(), [0])


class TestTargetDataset:
    SC = default_association_scenario()

    def test_exact_connection_mix(self):
        ds, _ = build_target_dataset(self.SC, 300, 60)
        target = self.SC.profiles[0]
        favorite = self.SC.generic_pool[0]
        snis = Counter(
            r.sni for r in ds.records if r.conn_id.startswith(target.name + "-")
        )
        assert sum(snis.values()) == 300
        assert snis[target.meaningful_domains[0]] == 60
        assert snis[favorite] == 240

    def test_total_padding_and_favorite_overlap(self):
        ds, truth = build_target_dataset(self.SC, 300, 60)
        assert len(ds) == self.SC.total_connections
        target = self.SC.profiles[0].name
        background_on_favorite = sum(
            1
            for r in ds.records
            if r.sni == self.SC.generic_pool[0] and truth[r.conn_id] != target
        )
        assert background_on_favorite == 4

    def test_vendor_domain_exclusive_to_target(self):
        ds, truth = build_target_dataset(self.SC, 300, 60)
        vendor = self.SC.profiles[0].meaningful_domains[0]
        owners = {truth[r.conn_id] for r in ds.records if r.sni == vendor}
        assert owners == {self.SC.profiles[0].name}

    def test_sweep_counts_are_rounded_fractions(self):
        fractions = [0.0, 0.1, 0.25, 0.5, 1.0]
        vendor = self.SC.profiles[0].meaningful_domains[0]
        for frac, ds in meaningful_fraction_sweep(self.SC, fractions):
            k = sum(1 for r in ds.records if r.sni == vendor)
            assert k == round(frac * self.SC.connections_per_client)

    def test_varying_counts(self):
        target = self.SC.profiles[0].name
        for count, ds in varying_connection_datasets(self.SC, [20, 100, 300]):
            n = sum(1 for r in ds.records if r.conn_id.startswith(target + "-"))
            assert n == count
            assert len(ds) == self.SC.total_connections


class TestAblationFixture:
    def test_structure(self):
        ds, meta = ablation_contrast_dataset()
        assert len(ds) == 4 + 315
        target_recs = [r for r in ds.records if r.conn_id.startswith("target-")]
        assert len(target_recs) == 4
        assert sum(r.sni in meta["vendor_domains"] for r in target_recs) == 3
        assert sum(r.sni == meta["oneoff_domain"] for r in target_recs) == 1

    def test_oneoff_is_exclusive(self):
        ds, meta = ablation_contrast_dataset()
        touchers = {r.conn_id for r in ds.records if r.sni == meta["oneoff_domain"]}
        assert all(c.startswith("target-") for c in touchers)

    def test_two_fingerprint_groups(self):
        ds, _ = ablation_contrast_dataset()
        assert len({fp.canonical for fp in ds.clients}) == 2
