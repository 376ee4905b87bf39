"""End-to-end runs of the command-line interface."""

import json

import numpy as np
import pytest

from graphdis.cli import main, parse_grid, parse_range, parse_widths
from graphdis.errors import ValidationError


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One tiny dataset and two trained checkpoints shared by the tests."""
    root = tmp_path_factory.mktemp("cli")
    assert run(["gen", "--family", "ER", "--n", "2:6", "--p", "0.2:0.8",
                "--count", 24, "--seed", 5, "--out", root / "plain.jsonl"]) == 0
    assert run(["gen", "--family", "ER", "--n", "2:6", "--p", "0.2:0.8",
                "--count", 16, "--seed", 6, "--attributes",
                "--out", root / "attr.jsonl"]) == 0
    common = ["--epochs", 2, "--batch-size", 8, "--n-max", 6, "--latent", 3,
              "--gcn", "3", "--enc-dense", "6", "--dec-dense", "6", "--seed", 1]
    assert run(["train", "--data", root / "plain.jsonl",
                "--out", root / "run"] + common) == 0
    assert run(["train", "--data", root / "attr.jsonl",
                "--out", root / "attr_run"] + common) == 0
    return root


class TestParsers:
    def test_parse_range(self):
        assert parse_range("1:24", integer=True) == (1, 24)
        assert parse_range("7", integer=True) == (7, 7)
        assert parse_range("0.2:0.8") == (0.2, 0.8)
        assert parse_range("0.5") == (0.5, 0.5)
        for bad in ("a:b", "1:2:3", ""):
            with pytest.raises(ValidationError):
                parse_range(bad)

    def test_parse_grid(self):
        assert parse_grid("0,0.5,1") == [0.0, 0.5, 1.0]
        assert np.allclose(parse_grid("0:1:11"), np.linspace(0, 1, 11))
        assert parse_grid("0.3") == [0.3]
        with pytest.raises(ValidationError):
            parse_grid("0:1:x")

    def test_parse_widths(self):
        assert parse_widths("16,16") == (16, 16)
        assert parse_widths("64") == (64,)
        with pytest.raises(ValidationError):
            parse_widths("16,a")


class TestGen:
    def test_dataset_and_manifest(self, workspace):
        data = workspace / "plain.jsonl"
        assert len(data.read_text().splitlines()) == 24
        manifest = json.loads((workspace / "plain.jsonl.manifest.json").read_text())
        assert manifest["command"] == "gen"
        assert manifest["seeds"] == {"seed": 5}
        assert manifest["outputs"] == [str(data)]

    def test_byte_identical_rerun(self, workspace, tmp_path):
        args = ["gen", "--family", "ER", "--n", "2:6", "--p", "0.2:0.8",
                "--count", 24, "--seed", 5]
        assert run(args + ["--out", tmp_path / "again.jsonl"]) == 0
        assert (tmp_path / "again.jsonl").read_bytes() == \
            (workspace / "plain.jsonl").read_bytes()

    def test_seed_changes_output(self, workspace, tmp_path):
        assert run(["gen", "--family", "ER", "--n", "2:6", "--p", "0.2:0.8",
                    "--count", 24, "--seed", 99, "--out", tmp_path / "o.jsonl"]) == 0
        assert (tmp_path / "o.jsonl").read_bytes() != \
            (workspace / "plain.jsonl").read_bytes()

    def test_gd_seed_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GD_SEED", "5")
        assert run(["gen", "--family", "ER", "--n", "2:4", "--count", 6,
                    "--out", tmp_path / "env.jsonl"]) == 0
        monkeypatch.delenv("GD_SEED")
        assert run(["gen", "--family", "ER", "--n", "2:4", "--count", 6,
                    "--seed", 5, "--out", tmp_path / "flag.jsonl"]) == 0
        assert (tmp_path / "env.jsonl").read_bytes() == \
            (tmp_path / "flag.jsonl").read_bytes()

    def test_unknown_family_exits_1(self, tmp_path, capsys):
        assert run(["gen", "--family", "XX", "--out", tmp_path / "x.jsonl"]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValidationError"

    def test_missing_required_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run(["gen", "--family", "ER"])
        assert exc.value.code == 2


class TestTrain:
    def test_outputs(self, workspace):
        out = workspace / "run"
        assert (out / "checkpoint").exists()
        history = (out / "history.csv").read_text().splitlines()
        assert history[0] == "epoch,recon,kl,kl_dim_0,kl_dim_1,kl_dim_2,param_loss,total"
        assert len(history) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "train"
        assert manifest["config"]["epochs"] == 2

    def test_deterministic_rerun(self, workspace, tmp_path):
        assert run(["train", "--data", workspace / "plain.jsonl",
                    "--epochs", 2, "--batch-size", 8, "--n-max", 6,
                    "--latent", 3, "--gcn", "3", "--enc-dense", "6",
                    "--dec-dense", "6", "--seed", 1,
                    "--out", tmp_path / "rerun"]) == 0
        assert (tmp_path / "rerun" / "checkpoint").read_bytes() == \
            (workspace / "run" / "checkpoint").read_bytes()
        assert (tmp_path / "rerun" / "history.csv").read_bytes() == \
            (workspace / "run" / "history.csv").read_bytes()

    def test_log_every_prints(self, workspace, tmp_path, capsys):
        assert run(["train", "--data", workspace / "plain.jsonl",
                    "--epochs", 2, "--batch-size", 8, "--n-max", 6,
                    "--latent", 3, "--gcn", "3", "--enc-dense", "6",
                    "--dec-dense", "6", "--log-every", 1,
                    "--out", tmp_path / "loud"]) == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if "epoch" in l]
        assert len(lines) == 2 and "recon" in lines[0]

    def test_attribute_mismatch_exits_1(self, workspace, tmp_path, capsys):
        assert run(["train", "--data", workspace / "plain.jsonl",
                    "--use-attributes", "on", "--epochs", 1, "--n-max", 6,
                    "--out", tmp_path / "x"]) == 1
        assert "lack attrs" in json.loads(capsys.readouterr().err)["message"]


class TestTraverse:
    def test_single_axis_layout(self, workspace, tmp_path):
        out = tmp_path / "trav"
        assert run(["traverse", "--ckpt", workspace / "run", "--axis", 1,
                    "--range=-1:1", "--steps", 4, "--out", out]) == 0
        cells = sorted(p.name for p in out.glob("cell_*.json"))
        assert cells == [f"cell_{i:03d}.json" for i in range(4)]
        assert (out / "sheet.svg").exists()
        doc = json.loads((out / "cell_000.json").read_text())
        assert doc["z"][1] == -1.0

    def test_grid_layout(self, workspace, tmp_path):
        out = tmp_path / "grid"
        assert run(["traverse", "--ckpt", workspace / "run", "--axis", 0,
                    "--steps", 2, "--axis2", 2, "--steps2", 3,
                    "--out", out]) == 0
        assert len(list(out.glob("cell_r*_c*.json"))) == 6

    def test_bad_axis_exits_1(self, workspace, tmp_path, capsys):
        assert run(["traverse", "--ckpt", workspace / "run", "--axis", 9,
                    "--out", tmp_path / "x"]) == 1
        assert "axis" in json.loads(capsys.readouterr().err)["message"]

    def test_missing_checkpoint_exits_1(self, tmp_path, capsys):
        assert run(["traverse", "--ckpt", tmp_path / "nope",
                    "--out", tmp_path / "x"]) == 1
        capsys.readouterr()


class TestEncodeAndMig:
    def test_encode_outputs(self, workspace, tmp_path):
        out = tmp_path / "enc"
        assert run(["encode", "--ckpt", workspace / "run",
                    "--data", workspace / "plain.jsonl", "--out", out]) == 0
        doc = json.loads((out / "mig.json").read_text())
        assert set(doc) >= {"score", "j_max", "mi", "kl_per_dim", "n_samples"}
        assert doc["n_samples"] == 24
        assert len(doc["kl_per_dim"]) == 3
        sweep = (out / "sweep.csv").read_text().splitlines()
        assert sweep[0] == "z_0,z_1,z_2,n,p"
        assert len(sweep) == 25
        mi = (out / "mi_matrix.csv").read_text().splitlines()
        assert mi[0] == "factor,z_0,z_1,z_2"

    def test_mig_writes_single_json(self, workspace, tmp_path):
        out = tmp_path / "score.json"
        assert run(["mig", "--ckpt", workspace / "run",
                    "--data", workspace / "plain.jsonl", "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert 0.0 <= doc["score"] <= 1.0
        assert (tmp_path / "score.json.manifest.json").exists()

    def test_encode_deterministic(self, workspace, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run(["encode", "--ckpt", workspace / "run",
                        "--data", workspace / "plain.jsonl", "--out", out]) == 0
        assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
        assert (a / "mig.json").read_bytes() == (b / "mig.json").read_bytes()


class TestRandomize:
    def test_outputs(self, workspace, tmp_path):
        out = tmp_path / "rand"
        assert run(["randomize", "--ckpt", workspace / "attr_run",
                    "--data", workspace / "attr.jsonl", "--grid", "0,0.5,1",
                    "--repeats", 2, "--seed", 3, "--out", out]) == 0
        doc = json.loads((out / "result.json").read_text())
        assert set(doc) >= {"score", "j_max", "mi_per_latent", "rows"}
        rows = (out / "rows.csv").read_text().splitlines()
        assert rows[0] == "delta_omega,dz_0,dz_1,dz_2"
        assert len(rows) == 1 + 16 * 3 * 2

    def test_plain_data_exits_1(self, workspace, tmp_path, capsys):
        assert run(["randomize", "--ckpt", workspace / "attr_run",
                    "--data", workspace / "plain.jsonl",
                    "--out", tmp_path / "x"]) == 1
        capsys.readouterr()


class TestSampleAndStats:
    @pytest.fixture()
    def edge_list(self, tmp_path):
        path = tmp_path / "host.txt"
        path.write_text("0 1\n1 2\n2 3\n3 0\n0 2\n4 0\n4 1\n")
        return path

    def test_sample_outputs(self, edge_list, tmp_path):
        out = tmp_path / "samples.jsonl"
        assert run(["sample", "--edge-list", edge_list, "--count", 5,
                    "--max-nodes", 4, "--seed", 2, "--out", out]) == 0
        assert len(out.read_text().splitlines()) == 5
        manifest = json.loads((tmp_path / "samples.jsonl.manifest.json").read_text())
        assert manifest["config"]["walk_length"] == 40

    def test_sample_deterministic(self, edge_list, tmp_path):
        for name in ("a.jsonl", "b.jsonl"):
            assert run(["sample", "--edge-list", edge_list, "--count", 5,
                        "--seed", 2, "--out", tmp_path / name]) == 0
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_stats_of_dataset(self, workspace, tmp_path):
        out = tmp_path / "st"
        assert run(["stats", "--data", workspace / "plain.jsonl",
                    "--out", out]) == 0
        lines = (out / "stats.csv").read_text().splitlines()
        assert lines[0] == "n,edge_count,avg_degree,clustering,assortativity"
        assert len(lines) == 25
        summary = json.loads((out / "summary.json").read_text())
        assert summary["count"] == 24

    def test_stats_of_host(self, edge_list, tmp_path):
        out = tmp_path / "st"
        assert run(["stats", "--edge-list", edge_list, "--out", out]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["n"] == 5 and summary["edge_count"] == 7

    def test_stats_comparison(self, edge_list, tmp_path):
        samples = tmp_path / "s.jsonl"
        assert run(["sample", "--edge-list", edge_list, "--count", 4,
                    "--out", samples]) == 0
        out = tmp_path / "cmp"
        assert run(["stats", "--edge-list", edge_list, "--samples", samples,
                    "--out", out]) == 0
        doc = json.loads((out / "comparison.json").read_text())
        assert doc["n_samples"] == 4
        assert "population" in doc

    def test_stats_requires_one_source(self, workspace, edge_list, tmp_path, capsys):
        assert run(["stats", "--out", tmp_path / "x"]) == 1
        assert run(["stats", "--data", workspace / "plain.jsonl",
                    "--edge-list", edge_list, "--out", tmp_path / "y"]) == 1
        assert run(["stats", "--data", workspace / "plain.jsonl",
                    "--samples", "s.jsonl", "--out", tmp_path / "z"]) == 1
        capsys.readouterr()


class TestTopLevel:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.strip()

    def test_no_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run([])
        assert exc.value.code == 2

    def test_help_lists_subcommands(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for cmd in ("gen", "train", "traverse", "encode", "mig",
                    "randomize", "sample", "stats"):
            assert cmd in out
