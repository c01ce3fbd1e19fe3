import csv
import json
from pathlib import Path

import pytest

from sniclust.cli import main
from sniclust.errors import ConfigError, SniclustError
from sniclust.pipeline import (
    RunConfig,
    run_analyze,
    run_meaningful_experiment,
    run_sweep_zh,
    run_varying_connections,
)
from sniclust.synth import default_association_scenario, generate, random_scenario


@pytest.fixture(scope="module")
def data_path(tmp_path_factory):
    ds, _ = generate(
        random_scenario(seed=1, n_profiles=3, clients_per_profile=2, connections_per_client=8)
    )
    path = tmp_path_factory.mktemp("data") / "conns.jsonl"
    ds.to_jsonl(path)
    return path


def fixed_cfg(data_path, out_dir, **kw):
    return RunConfig(
        input=data_path, out_dir=out_dir, eps_clients=0.1, eps_domains=0.1, **kw
    )


class TestRunAnalyze:
    def test_writes_artifacts(self, data_path, tmp_path):
        payload = run_analyze(fixed_cfg(data_path, tmp_path / "run"))
        for name in ("report.json", "optlog.csv", "summary.txt"):
            assert (tmp_path / "run" / name).exists()
        on_disk = json.loads((tmp_path / "run" / "report.json").read_text())
        assert on_disk == payload
        assert payload["n_records"] == 48
        assert len(payload["client_clusters"]) == payload["n_client_clusters"]

    def test_fixed_epsilons_log_single_point(self, data_path, tmp_path):
        run_analyze(fixed_cfg(data_path, tmp_path / "run"))
        with open(tmp_path / "run" / "optlog.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert float(rows[0]["eps_clients"]) == 0.1

    def test_z_zero_marks_everything_good(self, data_path, tmp_path):
        payload = run_analyze(fixed_cfg(data_path, tmp_path / "run", z=0.0))
        assert payload["good_fraction"] == 1.0
        assert all(c["is_good"] for c in payload["client_clusters"])

    def test_mismatched_epsilon_pair_is_config_error(self, data_path, tmp_path):
        cfg = RunConfig(input=data_path, out_dir=tmp_path / "run", eps_clients=0.1)
        with pytest.raises(ConfigError):
            run_analyze(cfg)

    def test_max_connections_guard_suggests_batching(self, data_path, tmp_path):
        cfg = fixed_cfg(data_path, tmp_path / "run", max_connections=10)
        with pytest.raises(SniclustError, match="batches"):
            run_analyze(cfg)
        assert not (tmp_path / "run").exists()

    def test_dump_clusters_artifacts(self, data_path, tmp_path):
        run_analyze(fixed_cfg(data_path, tmp_path / "run", dump_clusters=True))
        for name in ("client_distances.csv", "domain_distances.csv", "labels.csv"):
            assert (tmp_path / "run" / name).exists()
        with open(tmp_path / "run" / "labels.csv") as fh:
            assert len(list(csv.DictReader(fh))) == 48


class TestSweep:
    def test_good_fraction_monotone_in_z(self, data_path, tmp_path):
        z_values = [0.0, 0.5, 1.0, 1.5, 2.0]
        rows = run_sweep_zh(fixed_cfg(data_path, tmp_path / "run"), z_values, [1, 2])
        assert (tmp_path / "run" / "sweep.csv").exists()
        for h in (1, 2):
            fracs = [gf for z, hh, gf in rows if hh == h]
            assert fracs[0] == 1.0
            assert all(a >= b for a, b in zip(fracs, fracs[1:]))


class TestExperiments:
    def test_meaningful_flip_threshold(self, tmp_path):
        base = default_association_scenario()
        outcomes, threshold = run_meaningful_experiment(
            base, [0.0, 0.1, 0.2, 0.3], out_dir=tmp_path
        )
        assert threshold == 0.2
        assert [o.mapped_meaningful for o in outcomes] == [False, False, True, True]
        assert (tmp_path / "meaningful.csv").exists()

    def test_varying_counts_all_good(self, tmp_path):
        base = default_association_scenario()
        outcomes = run_varying_connections(base, [50, 300], out_dir=tmp_path)
        assert all(o.target_good for o in outcomes)
        assert (tmp_path / "varying.csv").exists()


def cli(*argv):
    return main([str(a) for a in argv])


class TestCli:
    def test_analyze_deterministic_bytes(self, data_path, tmp_path):
        args = ["--input", data_path, "--eps-clients", 0.1, "--eps-domains", 0.1]
        assert cli("analyze", *args, "--out", tmp_path / "a") == 0
        assert cli("analyze", *args, "--out", tmp_path / "b") == 0
        assert (tmp_path / "a" / "report.json").read_bytes() == (
            tmp_path / "b" / "report.json"
        ).read_bytes()

    def test_missing_input_exits_1_without_artifacts(self, tmp_path):
        out = tmp_path / "run"
        code = cli("analyze", "--input", tmp_path / "nope.jsonl", "--out", out)
        assert code == 1
        assert not out.exists()

    def test_config_file_precedence(self, data_path, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"z": 0.0, "eps_clients": 0.1, "eps_domains": 0.1}))
        out = tmp_path / "run"
        code = cli("analyze", "--input", data_path, "--out", out, "--config", config, "--z", 5.0)
        assert code == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["z"] == 5.0  # flag beats config file
        assert payload["epsilon_clients"] == 0.1  # config beats default

    def test_unknown_config_key_exits_2(self, data_path, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"zz_top": 1}))
        code = cli("analyze", "--input", data_path, "--out", tmp_path / "run", "--config", config)
        assert code == 2

    def test_bad_ablation_from_config_exits_2(self, data_path, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"ablation": "bogus"}))
        code = cli("analyze", "--input", data_path, "--out", tmp_path / "run", "--config", config)
        assert code == 2

    def test_strict_flag_exits_1_on_bad_row(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"conn_id": "a", "sni": "x.com"}\n{"conn_id": "b"}\n')
        code = cli(
            "analyze", "--input", path, "--out", tmp_path / "run",
            "--eps-clients", 0.1, "--eps-domains", 0.1, "--strict",
        )
        assert code == 1

    def test_optimizer_path(self, data_path, tmp_path):
        out = tmp_path / "run"
        code = cli(
            "analyze", "--input", data_path, "--out", out,
            "--n-init", 2, "--n-iter", 1, "--seed", 3,
        )
        assert code == 0
        with open(out / "optlog.csv") as fh:
            assert len(list(csv.DictReader(fh))) == 3

    def test_sweep_command(self, data_path, tmp_path):
        out = tmp_path / "run"
        code = cli(
            "sweep-zh", "--input", data_path, "--out", out,
            "--eps-clients", 0.1, "--eps-domains", 0.1,
            "--z-values", "0,1,2", "--h-values", "1",
        )
        assert code == 0
        with open(out / "sweep.csv") as fh:
            assert len(list(csv.DictReader(fh))) == 3

    def test_synth_command(self, tmp_path):
        out = tmp_path / "synth"
        code = cli(
            "synth", "--out", out, "--seed", 5,
            "--profiles", 2, "--clients-per-profile", 1, "--connections-per-client", 3,
        )
        assert code == 0
        lines = (out / "dataset.jsonl").read_text().splitlines()
        truth = json.loads((out / "truth.json").read_text())
        assert len(lines) == len(truth) == 6

    def test_distance_debug_output(self, capsys):
        assert cli("distance-debug", "mail.google.com", "maps.google.com") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["raw_distance"] == pytest.approx(1 / 6, abs=1e-6)
        assert payload["contributions"]

    def test_dump_clusters_command(self, data_path, tmp_path):
        out = tmp_path / "run"
        code = cli(
            "dump-clusters", "--input", data_path, "--out", out,
            "--eps-clients", 0.1, "--eps-domains", 0.1,
        )
        assert code == 0
        assert (out / "client_distances.csv").exists()
