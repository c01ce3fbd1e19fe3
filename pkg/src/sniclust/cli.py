"""Command-line interface.

Subcommands: analyze, sweep-zh, meaningful, varying, synth,
distance-debug, dump-clusters.  Exit codes: 0 success, 1 pipeline error,
2 configuration error.  Option precedence: flags > --config JSON > defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .domains import DistanceParams, _level_contributions, parse_domain, raw_distance
from .errors import ConfigError, SniclustError
from .optimize import OptimizerConfig
from .pipeline import (
    RunConfig,
    run_analyze,
    run_meaningful_experiment,
    run_sweep_zh,
    run_varying_connections,
)
from .synth import default_association_scenario, generate, random_scenario

_DEFAULTS = {
    "format": "jsonl",
    "z": 1.0,
    "h": 1,
    "ablation": "full",
    "eps_clients": None,
    "eps_domains": None,
    "seed": 0,
    "n_init": 5,
    "n_iter": 10,
    "strict": False,
    "max_connections": None,
    "dump_clusters": False,
}


def _merged(args: argparse.Namespace) -> dict:
    """Apply flag > config-file > default precedence."""
    values = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(values)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _run_config(args: argparse.Namespace, dump_clusters: bool = False) -> RunConfig:
    v = _merged(args)
    return RunConfig(
        input=Path(args.input),
        out_dir=Path(args.out),
        format=v["format"],
        z=float(v["z"]),
        h=int(v["h"]),
        ablation=v["ablation"],
        eps_clients=v["eps_clients"],
        eps_domains=v["eps_domains"],
        optimizer=OptimizerConfig(
            n_init=int(v["n_init"]), n_iter=int(v["n_iter"]), seed=int(v["seed"])
        ),
        strict=bool(v["strict"]),
        max_connections=v["max_connections"],
        dump_clusters=dump_clusters or bool(v["dump_clusters"]),
    )


def _add_pipeline_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="JSONL or CSV connection file")
    p.add_argument("--out", required=True, help="output run directory")
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--z", type=float, help="minimum weight z-score (default 1)")
    p.add_argument("--h", type=int, help="max mapped domain clusters (default 1)")
    p.add_argument("--ablation", choices=["full", "no_frequency", "no_exclusivity"])
    p.add_argument("--eps-clients", dest="eps_clients", type=float)
    p.add_argument("--eps-domains", dest="eps_domains", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-init", dest="n_init", type=int)
    p.add_argument("--n-iter", dest="n_iter", type=int)
    p.add_argument("--strict", action="store_const", const=True, default=None)
    p.add_argument("--max-connections", dest="max_connections", type=int)
    p.add_argument("--dump-clusters", dest="dump_clusters", action="store_const", const=True, default=None)
    p.add_argument("--config", help="JSON config file (flags win over it)")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sniclust")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="cluster, map, and report one dataset")
    _add_pipeline_options(p)

    p = sub.add_parser("sweep-zh", help="good-fraction grid over Z and H")
    _add_pipeline_options(p)
    p.add_argument("--z-values", default="0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5")
    p.add_argument("--h-values", default="1,2,3,4")

    p = sub.add_parser("meaningful", help="meaningful-fraction experiment on the planted fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--fractions", default="0,0.1,0.2,0.25,0.3,0.4,0.5")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--h", type=int, default=1)

    p = sub.add_parser("varying", help="varying-connection-count experiment")
    p.add_argument("--out", required=True)
    p.add_argument("--counts", default="1,50,100,150,200,250,300")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--h", type=int, default=1)

    p = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profiles", type=int, default=10)
    p.add_argument("--clients-per-profile", dest="clients_per_profile", type=int, default=5)
    p.add_argument("--connections-per-client", dest="connections_per_client", type=int, default=5)

    p = sub.add_parser("distance-debug", help="per-level domain distance breakdown as JSON")
    p.add_argument("domain_a")
    p.add_argument("domain_b")

    p = sub.add_parser("dump-clusters", help="analyze and dump distance matrices and labels")
    _add_pipeline_options(p)

    return parser


def _cmd_distance_debug(args: argparse.Namespace) -> None:
    params = DistanceParams()
    a = parse_domain(args.domain_a)
    b = parse_domain(args.domain_b)
    payload = {
        "domain_a": args.domain_a,
        "domain_b": args.domain_b,
        "contributions": _level_contributions(a, b, params),
        "raw_distance": raw_distance(a, b, params),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))


def _cmd_synth(args: argparse.Namespace) -> None:
    scenario = random_scenario(
        seed=args.seed,
        n_profiles=args.profiles,
        clients_per_profile=args.clients_per_profile,
        connections_per_client=args.connections_per_client,
    )
    ds, truth = generate(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds.to_jsonl(out / "dataset.jsonl")
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(ds)} records to {out / 'dataset.jsonl'}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("analyze", "dump-clusters"):
            cfg = _run_config(args, dump_clusters=args.command == "dump-clusters")
            payload = run_analyze(cfg)
            print((cfg.out_dir / "summary.txt").read_text(encoding="utf-8").strip())
        elif args.command == "sweep-zh":
            cfg = _run_config(args)
            run_sweep_zh(cfg, _floats(args.z_values), _ints(args.h_values))
            print(f"wrote {cfg.out_dir / 'sweep.csv'}")
        elif args.command == "meaningful":
            base = default_association_scenario(seed=args.seed)
            from .mapping import GoodnessParams

            _, threshold = run_meaningful_experiment(
                base,
                _floats(args.fractions),
                out_dir=Path(args.out),
                params=GoodnessParams(z=args.z, h=args.h),
            )
            print(f"flip threshold: {threshold}")
        elif args.command == "varying":
            base = default_association_scenario(seed=args.seed)
            from .mapping import GoodnessParams

            outcomes = run_varying_connections(
                base,
                _ints(args.counts),
                out_dir=Path(args.out),
                params=GoodnessParams(z=args.z, h=args.h),
            )
            good = sum(o.target_good for o in outcomes)
            print(f"target good for {good}/{len(outcomes)} connection counts")
        elif args.command == "synth":
            _cmd_synth(args)
        elif args.command == "distance-debug":
            _cmd_distance_debug(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SniclustError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
