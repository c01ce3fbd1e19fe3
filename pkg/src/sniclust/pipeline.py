"""Pipeline orchestration: ingest -> optimize -> cluster -> map -> report.

Also hosts the experiment harnesses (Z/H sweep, meaningful-fraction and
varying-connection-count runs) and all artifact writing.  Artifacts are
deterministic byte-for-byte given the same config and seed.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import AnalysisContext, AnalysisResult, analyze
from .errors import ConfigError, SniclustError
from .ingest import Dataset, parse_dataset, unique_by_first_seen
from .mapping import GoodnessParams, evaluate_goodness
from .optimize import ObjectivePoint, OptimizerConfig, objective, optimize
from .synth import Scenario, meaningful_fraction_sweep, varying_connection_datasets

EXPERIMENT_EPS_CLIENTS = 0.1
EXPERIMENT_EPS_DOMAINS = 0.1


@dataclass
class RunConfig:
    input: Path
    out_dir: Path
    format: str = "jsonl"
    z: float = 1.0
    h: int = 1
    ablation: str = "full"
    eps_clients: Optional[float] = None
    eps_domains: Optional[float] = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    strict: bool = False
    max_connections: Optional[int] = None
    dump_clusters: bool = False

    def goodness(self) -> GoodnessParams:
        try:
            return GoodnessParams(z=self.z, h=self.h, ablation=self.ablation)  # type: ignore[arg-type]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def fixed_epsilons(self) -> Optional[tuple[float, float]]:
        if (self.eps_clients is None) != (self.eps_domains is None):
            raise ConfigError("set both --eps-clients and --eps-domains or neither")
        if self.eps_clients is None:
            return None
        return (self.eps_clients, self.eps_domains)


def _load_dataset(cfg: RunConfig) -> Dataset:
    ds = parse_dataset(cfg.input, format=cfg.format, strict=cfg.strict)
    if cfg.max_connections is not None and len(ds) > cfg.max_connections:
        raise SniclustError(
            f"input has {len(ds)} connections, above the --max-connections cap of "
            f"{cfg.max_connections}; split it into batches, keeping all connections "
            "of the same TCP fingerprint in the same batch"
        )
    return ds


def _resolve_epsilons(
    ctx: AnalysisContext, cfg: RunConfig, params: GoodnessParams
) -> tuple[float, float, list[ObjectivePoint]]:
    fixed = cfg.fixed_epsilons()
    if fixed is not None:
        point = objective(ctx, fixed[0], fixed[1], params)
        return fixed[0], fixed[1], [point]
    best, log = optimize(ctx, cfg.optimizer, params)
    return best.eps_clients, best.eps_domains, log


def _cluster_member_names(labels_unique: np.ndarray, items: Sequence[str]) -> dict[int, list[str]]:
    firsts, _ = unique_by_first_seen(list(items))
    members: dict[int, list[str]] = {}
    for u, pos in enumerate(firsts):
        members.setdefault(int(labels_unique[u]), []).append(items[pos])
    return members


def build_report_payload(
    ctx: AnalysisContext,
    result: AnalysisResult,
    eps_clients: float,
    eps_domains: float,
    params: GoodnessParams,
) -> dict:
    """JSON-ready mapping report."""
    ds = ctx.dataset
    client_members = _cluster_member_names(
        result.client_clusters_unique.labels, [fp.canonical for fp in ds.clients]
    )
    domain_members = _cluster_member_names(result.domain_clusters_unique.labels, list(ds.domains))
    weights = result.weights
    clusters = []
    for entry in result.report.entries:
        c = entry.client_cluster
        row = weights.weights[c]
        mu = float(row.mean())
        sigma = float(row.std())
        mapped = []
        for d in entry.mapped_domain_clusters:
            mapped.append(
                {
                    "domain_cluster": d,
                    "domains": domain_members[d],
                    "weight": float(weights.weights[c, d]),
                    "frequency": float(weights.frequency[c, d]),
                    "nonexclusivity": float(weights.nonexclusivity[c, d]),
                    "z": None if entry.z_of_top is None else float((row[d] - mu) / sigma),
                }
            )
        clusters.append(
            {
                "client_cluster": c,
                "members": client_members[c],
                "is_good": entry.is_good,
                "top_weight": entry.top_weight,
                "z_of_top": entry.z_of_top,
                "mapped": mapped,
            }
        )
    return {
        "epsilon_clients": eps_clients,
        "epsilon_domains": eps_domains,
        "z": params.z,
        "h": params.h,
        "ablation": params.ablation,
        "n_records": len(ds),
        "skipped_rows": ds.skipped_rows,
        "n_distinct_clients": result.client_clusters_unique.labels.shape[0],
        "n_client_clusters": result.client_clusters_unique.num_clusters,
        "n_domain_clusters": result.domain_clusters_unique.num_clusters,
        "good_fraction": result.report.good_fraction,
        "client_clusters": clusters,
    }


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_optimizer_log(path: Path, log: Sequence[ObjectivePoint]) -> None:
    _write_csv(
        path,
        ["iteration", "eps_clients", "eps_domains", "n_good", "n_domain_clusters", "score"],
        [
            [i, repr(p.eps_clients), repr(p.eps_domains), p.n_good, p.n_domain_clusters, p.score]
            for i, p in enumerate(log)
        ],
    )


def _dump_clusters(out_dir: Path, ctx: AnalysisContext, result: AnalysisResult) -> None:
    np.savetxt(out_dir / "client_distances.csv", ctx.client_dist.values, delimiter=",")
    np.savetxt(out_dir / "domain_distances.csv", ctx.domain_dist.values, delimiter=",")
    _write_csv(
        out_dir / "labels.csv",
        ["conn_id", "client_cluster", "domain_cluster"],
        [
            [r.conn_id, int(result.client_clusters.labels[i]), int(result.domain_clusters.labels[i])]
            for i, r in enumerate(ctx.dataset.records)
        ],
    )


def run_analyze(cfg: RunConfig) -> dict:
    """Full pipeline run; writes report.json, optlog.csv, and summary.txt."""
    started = time.perf_counter()
    params = cfg.goodness()
    ds = _load_dataset(cfg)
    ctx = AnalysisContext.from_dataset(ds)
    eps_c, eps_d, log = _resolve_epsilons(ctx, cfg, params)
    result = analyze(ctx, eps_c, eps_d, params)
    payload = build_report_payload(ctx, result, eps_c, eps_d, params)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(cfg.out_dir / "report.json", payload)
    write_optimizer_log(cfg.out_dir / "optlog.csv", log)
    if cfg.dump_clusters:
        _dump_clusters(cfg.out_dir, ctx, result)

    elapsed = time.perf_counter() - started
    matrix_bytes = ctx.matrix_cells * 8
    summary = (
        f"records={len(ds)} skipped={ds.skipped_rows} "
        f"distinct_clients={ctx.client_dist.n} client_clusters={payload['n_client_clusters']} "
        f"domain_clusters={payload['n_domain_clusters']} "
        f"good_fraction={payload['good_fraction']:.4f} "
        f"eps_clients={eps_c:.6f} eps_domains={eps_d:.6f} "
        f"wall_seconds={elapsed:.3f} distance_matrix_bytes={matrix_bytes}"
    )
    (cfg.out_dir / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    return payload


def run_sweep_zh(
    cfg: RunConfig, z_values: Sequence[float], h_values: Sequence[int]
) -> list[tuple[float, int, float]]:
    """Good-fraction grid over (Z, H); clustering is resolved once.

    Epsilons come from the config or, failing that, one optimizer run under
    the config's base Z/H; the weight matrix is then reused for every cell.
    """
    params = cfg.goodness()
    ds = _load_dataset(cfg)
    ctx = AnalysisContext.from_dataset(ds)
    eps_c, eps_d, _ = _resolve_epsilons(ctx, cfg, params)
    result = analyze(ctx, eps_c, eps_d, params)
    rows: list[tuple[float, int, float]] = []
    for h in h_values:
        for z in z_values:
            cell = GoodnessParams(z=z, h=h, ablation=params.ablation)
            report = evaluate_goodness(result.weights, cell)
            rows.append((z, h, report.good_fraction))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        cfg.out_dir / "sweep.csv",
        ["z", "h", "good_fraction"],
        [[repr(float(z)), h, repr(gf)] for z, h, gf in rows],
    )
    return rows


@dataclass(frozen=True)
class TargetOutcome:
    key: float | int           # fraction or connection count
    target_good: bool
    mapped_meaningful: bool
    mapped_domains: tuple[str, ...]


def _target_outcome(
    base: Scenario,
    ds: Dataset,
    key: float | int,
    eps_clients: float,
    eps_domains: float,
    params: GoodnessParams,
) -> TargetOutcome:
    ctx = AnalysisContext.from_dataset(ds)
    result = analyze(ctx, eps_clients, eps_domains, params)
    target = base.profiles[0]
    idx = ds.client_of[f"{target.name}-0-0"]
    label = int(result.client_clusters.labels[idx])
    entry = result.report.entries[label]
    domain_members = _cluster_member_names(result.domain_clusters_unique.labels, list(ds.domains))
    mapped_domains = tuple(
        name for d in entry.mapped_domain_clusters for name in domain_members[d]
    )
    meaningful = set(target.meaningful_domains)
    return TargetOutcome(
        key=key,
        target_good=entry.is_good,
        mapped_meaningful=bool(meaningful.intersection(mapped_domains)),
        mapped_domains=mapped_domains,
    )


def run_meaningful_experiment(
    base: Scenario,
    fractions: Sequence[float],
    out_dir: Optional[Path] = None,
    eps_clients: float = EXPERIMENT_EPS_CLIENTS,
    eps_domains: float = EXPERIMENT_EPS_DOMAINS,
    params: GoodnessParams = GoodnessParams(),
) -> tuple[list[TargetOutcome], Optional[float]]:
    """Meaningful-fraction sweep; returns per-fraction outcomes and the
    first fraction at which the target maps to a planted vendor domain."""
    outcomes = []
    for frac, ds in meaningful_fraction_sweep(base, fractions):
        outcomes.append(_target_outcome(base, ds, frac, eps_clients, eps_domains, params))
    threshold = next((o.key for o in outcomes if o.mapped_meaningful), None)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_csv(
            out_dir / "meaningful.csv",
            ["fraction", "target_good", "mapped_meaningful", "mapped_domains"],
            [
                [repr(float(o.key)), o.target_good, o.mapped_meaningful, ";".join(o.mapped_domains)]
                for o in outcomes
            ],
        )
    return outcomes, threshold


def run_varying_connections(
    base: Scenario,
    counts: Sequence[int],
    out_dir: Optional[Path] = None,
    eps_clients: float = EXPERIMENT_EPS_CLIENTS,
    eps_domains: float = EXPERIMENT_EPS_DOMAINS,
    params: GoodnessParams = GoodnessParams(),
) -> list[TargetOutcome]:
    """Varying-connection-count experiment for the planted target client."""
    outcomes = []
    for count, ds in varying_connection_datasets(base, counts):
        outcomes.append(_target_outcome(base, ds, count, eps_clients, eps_domains, params))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_csv(
            out_dir / "varying.csv",
            ["connections", "target_good", "mapped_meaningful", "mapped_domains"],
            [
                [o.key, o.target_good, o.mapped_meaningful, ";".join(o.mapped_domains)]
                for o in outcomes
            ],
        )
    return outcomes
