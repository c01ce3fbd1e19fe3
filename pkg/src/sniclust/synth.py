"""Synthetic TLS-connection datasets with planted ground truth.

Scenarios plant device profiles (a fingerprint template plus the vendor
domains that would give the device away) against a shared pool of generic
domains.  The experiment builders construct connection counts exactly
rather than sampling them, so small-scale replications of the controlled
experiments are noise-free.  All names are fictitious lookalikes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvalidScenarioError
from .ingest import FINGERPRINT_FIELDS, ConnectionRecord, Dataset, fingerprint


@dataclass(frozen=True)
class DeviceProfile:
    """One planted device type."""

    name: str
    fingerprint: dict  # template values for the 7 fingerprint fields
    meaningful_domains: tuple[str, ...]
    generic_pool_weight: float = 0.5

    def __post_init__(self) -> None:
        if not self.meaningful_domains:
            raise InvalidScenarioError(f"profile {self.name!r} has no meaningful domains")
        if not 0.0 <= self.generic_pool_weight <= 1.0:
            raise InvalidScenarioError("generic_pool_weight must be in [0, 1]")
        unknown = set(self.fingerprint) - set(FINGERPRINT_FIELDS)
        if unknown:
            raise InvalidScenarioError(f"unknown fingerprint fields: {sorted(unknown)}")


@dataclass(frozen=True)
class Scenario:
    profiles: tuple[DeviceProfile, ...]
    clients_per_profile: int
    connections_per_client: int
    generic_pool: tuple[str, ...]
    seed: int = 0
    # When set, experiment builders pad background traffic to this total.
    total_connections: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.profiles:
            raise InvalidScenarioError("scenario needs at least one profile")
        if self.clients_per_profile < 1 or self.connections_per_client < 1:
            raise InvalidScenarioError("client and connection counts must be >= 1")
        names = [p.name for p in self.profiles]
        if len(set(names)) != len(names):
            raise InvalidScenarioError("profile names must be distinct")


def _client_record_fields(profile: DeviceProfile, client_index: int) -> dict:
    """Fingerprint template for one client; window size is nudged per client
    so clients of a profile stay distinct but nearly identical."""
    values = dict(profile.fingerprint)
    if client_index > 0:
        base = values.get("tcp_window_size")
        if base is None:
            raise InvalidScenarioError(
                f"profile {profile.name!r} needs tcp_window_size to host multiple clients"
            )
        values["tcp_window_size"] = int(base) + client_index
    return values


def _check_distinct_fingerprints(records_by_client: Sequence[ConnectionRecord]) -> None:
    canon = [fingerprint(r).canonical for r in records_by_client]
    if len(set(canon)) != len(canon):
        raise InvalidScenarioError("client fingerprints collide across profiles")


def generate(sc: Scenario) -> tuple[Dataset, dict[str, str]]:
    """Sampled dataset plus ground truth (conn_id -> profile name)."""
    rng = random.Random(sc.seed)
    records: list[ConnectionRecord] = []
    truth: dict[str, str] = {}
    client_reps: list[ConnectionRecord] = []
    for profile in sc.profiles:
        if profile.generic_pool_weight > 0 and not sc.generic_pool:
            raise InvalidScenarioError("generic pool is empty but a profile draws from it")
        for ci in range(sc.clients_per_profile):
            fields = _client_record_fields(profile, ci)
            for k in range(sc.connections_per_client):
                if rng.random() < profile.generic_pool_weight:
                    sni = rng.choice(sc.generic_pool)
                else:
                    sni = rng.choice(profile.meaningful_domains)
                rec = ConnectionRecord(conn_id=f"{profile.name}-{ci}-{k}", sni=sni, **fields)
                records.append(rec)
                truth[rec.conn_id] = profile.name
                if k == 0:
                    client_reps.append(rec)
    _check_distinct_fingerprints(client_reps)
    return Dataset.from_records(records), truth


def build_target_dataset(
    base: Scenario,
    target_connections: int,
    meaningful_count: int,
    favorite_overlap: int = 4,
) -> tuple[Dataset, dict[str, str]]:
    """Dataset with an exactly-constructed target client.

    The target is the sole client of base.profiles[0]: meaningful_count of
    its connections cycle over the profile's vendor domains, the rest all
    go to its favorite generic domain (generic_pool[0]).  Background
    clients (the remaining profiles) spread over generic_pool[1:], except
    for favorite_overlap connections redirected onto the favorite domain
    so it is not fully exclusive to the target.
    """
    if not 0 <= meaningful_count <= target_connections:
        raise InvalidScenarioError("meaningful_count must be within the target's connections")
    if len(base.profiles) < 2:
        raise InvalidScenarioError("need background profiles besides the target")
    if len(base.generic_pool) < 2:
        raise InvalidScenarioError("generic pool needs a favorite plus background domains")

    target = base.profiles[0]
    favorite = base.generic_pool[0]
    rng = random.Random(base.seed)

    records: list[ConnectionRecord] = []
    truth: dict[str, str] = {}
    client_reps: list[ConnectionRecord] = []

    fields = _client_record_fields(target, 0)
    for k in range(target_connections):
        if k < meaningful_count:
            sni = target.meaningful_domains[k % len(target.meaningful_domains)]
        else:
            sni = favorite
        rec = ConnectionRecord(conn_id=f"{target.name}-0-{k}", sni=sni, **fields)
        records.append(rec)
        truth[rec.conn_id] = target.name
        if k == 0:
            client_reps.append(rec)

    bg_clients = [
        (profile, ci) for profile in base.profiles[1:] for ci in range(base.clients_per_profile)
    ]
    total = base.total_connections
    if total is None:
        background_total = len(bg_clients) * base.connections_per_client
    else:
        background_total = total - target_connections
        if background_total < 0:
            raise InvalidScenarioError("total_connections smaller than the target's share")
    if background_total > 0 and not bg_clients:
        raise InvalidScenarioError("background traffic requested but no background clients")
    if background_total < favorite_overlap:
        raise InvalidScenarioError("not enough background traffic for the favorite overlap")

    emitted = 0
    n_bg = len(bg_clients)
    for bi, (profile, ci) in enumerate(bg_clients):
        share = background_total // n_bg + (1 if bi < background_total % n_bg else 0)
        fields = _client_record_fields(profile, ci)
        for k in range(share):
            if emitted < favorite_overlap:
                sni = favorite
            else:
                sni = rng.choice(base.generic_pool[1:])
            rec = ConnectionRecord(conn_id=f"{profile.name}-{ci}-{k}", sni=sni, **fields)
            records.append(rec)
            truth[rec.conn_id] = profile.name
            emitted += 1
            if k == 0:
                client_reps.append(rec)

    _check_distinct_fingerprints(client_reps)
    return Dataset.from_records(records), truth


def meaningful_fraction_sweep(
    base: Scenario, fractions: Sequence[float]
) -> list[tuple[float, Dataset]]:
    """One exactly-constructed dataset per requested meaningful fraction."""
    out = []
    for frac in fractions:
        if not 0.0 <= frac <= 1.0:
            raise InvalidScenarioError(f"fraction {frac} outside [0, 1]")
        k = int(round(frac * base.connections_per_client))
        ds, _ = build_target_dataset(base, base.connections_per_client, k)
        out.append((frac, ds))
    return out


def varying_connection_datasets(
    base: Scenario, counts: Sequence[int], meaningful_fraction: float = 0.25
) -> list[tuple[int, Dataset]]:
    """One dataset per target connection count, fixed meaningful mix."""
    out = []
    for count in counts:
        if count < 1:
            raise InvalidScenarioError(f"connection count {count} must be >= 1")
        k = int(round(meaningful_fraction * count))
        ds, _ = build_target_dataset(base, count, k)
        out.append((count, ds))
    return out


def ablation_contrast_dataset() -> tuple[Dataset, dict]:
    """Fixture separating the frequency and non-exclusivity factors.

    One target client makes 3 connections into a vendor domain cluster
    (160 near-identical CDN paths carrying 315 background connections)
    and 1 connection to a one-off domain nobody else touches.  With the
    full weight the repeated vendor traffic wins (f=3 against a smoothed
    e just under 2); dropping the frequency factor flips the mapping to
    the zero-external one-off.
    """
    vendor_paths = [f"cdn-node-{i:03d}.vendorco.com" for i in range(160)]
    oneoff = "choices.privacyshield.org"

    records: list[ConnectionRecord] = []
    target_fields = {
        "tcp_header_length": 44,
        "ip_ttl": 64,
        "tcp_window_size": 65535,
        "tcp_flags": "S",
        "tcp_mss": 1460,
        "tcp_options": "MSS,SACK,TS",
        "tcp_window_scaling": 7,
    }
    for k, sni in enumerate(vendor_paths[:3] + [oneoff]):
        records.append(ConnectionRecord(conn_id=f"target-0-{k}", sni=sni, **target_fields))
    other_fields = dict(target_fields, ip_ttl=128, tcp_options="MSS,WS")
    for k in range(315):
        records.append(
            ConnectionRecord(
                conn_id=f"other-0-{k}", sni=vendor_paths[k % len(vendor_paths)], **other_fields
            )
        )
    meta = {
        "target_conn_id": "target-0-0",
        "vendor_domains": tuple(vendor_paths),
        "oneoff_domain": oneoff,
    }
    return Dataset.from_records(records), meta


_GENERIC_POOL = (
    "files.boxdrop.com",
    "edge.cdnstatic.net",
    "img.socialgram.com",
    "api.chatterbox.io",
    "play.musicstream.net",
    "static.adserve.org",
    "tiles.mapview.com",
    "mail.webpost.net",
    "video.streamhub.tv",
    "news.dailyfeed.org",
    "shop.cartplace.com",
    "cast.showbinge.net",
)

_TTL_CHOICES = (64, 128, 255, 32)
_OPTS_CHOICES = ("MSS,SACK,TS,NOP,WS", "MSS,NOP,WS,NOP,NOP,TS", "MSS,NOP,NOP,SACK", "MSS,WS")


def _background_profile(index: int) -> DeviceProfile:
    return DeviceProfile(
        name=f"bgdev{index}",
        fingerprint={
            "tcp_header_length": 20 + 12 * (index % 2),
            "ip_ttl": _TTL_CHOICES[index % len(_TTL_CHOICES)],
            "tcp_window_size": 8192 + 6000 * index,
            "tcp_flags": "S",
            "tcp_mss": 1400 + 20 * index,
            "tcp_options": _OPTS_CHOICES[index % len(_OPTS_CHOICES)],
            "tcp_window_scaling": index % 8,
        },
        meaningful_domains=(f"push.maker{index}.com", f"telemetry.maker{index}.net"),
        generic_pool_weight=0.8,
    )


def default_association_scenario(seed: int = 7) -> Scenario:
    """2,000-connection fixture: one planted target among generic traffic.

    The target's vendor domain is fully exclusive while its favorite
    generic domain carries 4 background connections, which puts the
    frequency/non-exclusivity crossover near a 1/6 meaningful share.
    """
    target = DeviceProfile(
        name="fruitpad",
        fingerprint={
            "tcp_header_length": 44,
            "ip_ttl": 64,
            "tcp_window_size": 65535,
            "tcp_flags": "S",
            "tcp_mss": 1460,
            "tcp_options": "MSS,NOP,WS,NOP,NOP,TS,SACK,EOL",
            "tcp_window_scaling": 6,
        },
        meaningful_domains=("sync.fruitdev.com",),
        generic_pool_weight=0.8,
    )
    profiles = (target,) + tuple(_background_profile(i) for i in range(5))
    return Scenario(
        profiles=profiles,
        clients_per_profile=2,
        connections_per_client=300,
        generic_pool=_GENERIC_POOL,
        seed=seed,
        total_connections=2000,
    )


def random_scenario(
    seed: int,
    n_profiles: int = 10,
    clients_per_profile: int = 5,
    connections_per_client: int = 5,
) -> Scenario:
    """Mixed-traffic scenario used for randomized property runs."""
    profiles = []
    for i in range(n_profiles):
        base = _background_profile(i)
        profiles.append(
            DeviceProfile(
                name=f"dev{i}",
                fingerprint=dict(base.fingerprint, tcp_window_size=8192 + 7000 * i),
                meaningful_domains=(f"api.vendor{i}.com", f"update.vendor{i}.com"),
                generic_pool_weight=0.5,
            )
        )
    return Scenario(
        profiles=tuple(profiles),
        clients_per_profile=clients_per_profile,
        connections_per_client=connections_per_client,
        generic_pool=_GENERIC_POOL,
        seed=seed,
    )
