import json

import numpy as np
import pytest

from mgm.cli import main
from mgm.experiment import load_distance_matrix

from conftest import make_blobs


@pytest.fixture
def workspace(tmp_path):
    """Blob data as CSV, truth labels, and a config file with fast settings."""
    x, truth = make_blobs(m=36, d=12, sep=8.0, seed=2)
    data = tmp_path / "data.csv"
    with open(data, "w") as handle:
        handle.write(",".join(f"f{j}" for j in range(12)) + "\n")
        for i in range(36):
            handle.write(f"s{i}," + ",".join(f"{v:.17g}" for v in x[i]) + "\n")
    labels = tmp_path / "labels.txt"
    labels.write_text("\n".join(f"type{t}" for t in truth) + "\n")
    config = tmp_path / "run.cfg"
    config.write_text(
        "embedding.dim = 10\n"
        "scales.min = 3\n"
        "scales.max = 8\n"
        "scales.count = 4\n"
        "scales.power = 1.0\n"
        "clustering.k = 3\n"
        "seeds = 1\n"
        "preprocess.normalize = false\n"
        "preprocess.log1p = false\n"
    )
    return tmp_path, data, labels, config, truth


def same_partition(a, b) -> bool:
    mapping = {}
    for x, y in zip(a, b):
        if mapping.setdefault(x, y) != y:
            return False
    return len(set(mapping.values())) == len(mapping)


class TestSampleScales:
    def test_stdout_json(self, capsys):
        code = main(
            [
                "sample-scales",
                "--scale-min", "2",
                "--scale-max", "10",
                "--scale-count", "5",
                "--scale-power", "1.0",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["scales"] == [2, 4, 6, 8, 10]
        assert payload["count"] == 5
        assert payload["gaps"]["min"] == 2

    def test_out_file(self, tmp_path):
        out = tmp_path / "scales.json"
        code = main(
            [
                "sample-scales",
                "--scale-min", "5",
                "--scale-max", "100",
                "--scale-count", "25",
                "--scale-power", "2.0",
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["scales"]) == 23
        assert payload["requested"] == 25

    def test_invalid_spec_exits_2(self, capsys):
        code = main(
            [
                "sample-scales",
                "--scale-min", "10",
                "--scale-max", "5",
                "--scale-count", "4",
                "--scale-power", "1.0",
            ]
        )
        assert code == 2
        assert "config error" in capsys.readouterr().err


class TestEmbed:
    def test_writes_one_file_per_scale(self, workspace):
        tmp_path, data, _, config, _ = workspace
        out_dir = tmp_path / "emb"
        code = main(
            [
                "embed",
                "--config", str(config),
                "--data", str(data),
                "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        meta = json.loads((out_dir / "stack.json").read_text())
        assert meta["scales"] == [3, 5, 6, 8]
        assert meta["embedding_dim"] == 10
        assert meta["sample_count"] == 36
        assert meta["method"] == "laplacian"
        for scale in meta["scales"]:
            emb = np.loadtxt(out_dir / f"embedding_scale_{scale}.csv", delimiter=",")
            assert emb.shape == (36, 10)


class TestMgmCommand:
    def test_distance_matrix_outputs(self, workspace):
        tmp_path, data, _, config, _ = workspace
        out_dir = tmp_path / "dist"
        code = main(
            [
                "mgm",
                "--config", str(config),
                "--data", str(data),
                "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        dmat, meta = load_distance_matrix(out_dir / "distance_matrix.csv")
        assert dmat.values.shape == (36, 36)
        assert meta["metric"] == "chordal"
        report = json.loads((out_dir / "run_report.json").read_text())
        assert report["scales"] == [3, 5, 6, 8]
        assert report["sample_count"] == 36
        assert set(report["stage_seconds"]) == {
            "scales", "pca", "embed", "subspaces", "distances",
        }

    def test_metric_override(self, workspace):
        tmp_path, data, _, config, _ = workspace
        out_dir = tmp_path / "dist_geo"
        code = main(
            [
                "mgm",
                "--config", str(config),
                "--metric", "geodesic",
                "--data", str(data),
                "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        _, meta = load_distance_matrix(out_dir / "distance_matrix.csv")
        assert meta["metric"] == "geodesic"


class TestClusterCommand:
    def make_distances(self, workspace):
        tmp_path, data, _, config, _ = workspace
        out_dir = tmp_path / "dist"
        main(["mgm", "--config", str(config), "--data", str(data), "--out-dir", str(out_dir)])
        return out_dir / "distance_matrix.csv"

    def test_labels_to_stdout(self, workspace, capsys):
        dpath = self.make_distances(workspace)
        truth = workspace[4]
        code = main(["cluster", "--distances", str(dpath), "--k", "3"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 36
        assert same_partition([int(v) for v in lines], truth)

    def test_labels_to_file_with_mds_method(self, workspace, tmp_path):
        dpath = self.make_distances(workspace)
        out = tmp_path / "pred.txt"
        code = main(
            [
                "cluster",
                "--distances", str(dpath),
                "--method", "kmeans-mds",
                "--k", "3",
                "--seed", "1",
                "--out", str(out),
            ]
        )
        assert code == 0
        pred = [int(v) for v in out.read_text().splitlines()]
        assert same_partition(pred, workspace[4])

    def test_unknown_method_exits_2(self, workspace, capsys):
        dpath = self.make_distances(workspace)
        code = main(["cluster", "--distances", str(dpath), "--method", "dbscan", "--k", "3"])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_degenerate_matrix_exits_4(self, tmp_path, capsys):
        dpath = tmp_path / "zeros.csv"
        np.savetxt(dpath, np.zeros((5, 5)), delimiter=",")
        code = main(["cluster", "--distances", str(dpath), "--k", "2"])
        assert code == 4
        assert "numerical error" in capsys.readouterr().err


class TestEvaluateCommand:
    def test_perfect_prediction(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        pred.write_text("0\n0\n1\n1\n")
        truth.write_text("b\nb\na\na\n")
        code = main(["evaluate", "--pred", str(pred), "--truth", str(truth)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["acc"] == 1.0
        assert payload["ari"] == 1.0
        assert payload["k"] == 2

    def test_length_mismatch_exits_3(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        pred.write_text("0\n1\n")
        truth.write_text("0\n1\n1\n")
        code = main(["evaluate", "--pred", str(pred), "--truth", str(truth)])
        assert code == 3
        assert "data error" in capsys.readouterr().err


class TestPipelineCommand:
    def test_end_to_end(self, workspace, capsys):
        tmp_path, data, labels, config, _ = workspace
        out_dir = tmp_path / "exp"
        code = main(
            [
                "pipeline",
                "--config", str(config),
                "--seeds", "1,2",
                "--data", str(data),
                "--labels", str(labels),
                "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["mgm_mean"]["ari"] > 0.9
        assert set(payload["baselines_mean"]) == {
            "baseline_pca",
            "baseline_avg_embedding",
        }
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["checksum"] == payload["checksum"]
        assert (out_dir / "mgm" / "seed_1" / "labels.csv").is_file()
        assert (out_dir / "mgm" / "seed_2" / "labels.csv").is_file()

    def test_no_baselines(self, workspace, capsys):
        _, data, labels, config, _ = workspace
        code = main(
            [
                "pipeline",
                "--config", str(config),
                "--data", str(data),
                "--labels", str(labels),
                "--no-baselines",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["baselines_mean"] == {}
        assert payload["out_dir"] is None

    def test_seed_and_seeds_conflict(self, workspace):
        _, data, labels, config, _ = workspace
        with pytest.raises(SystemExit) as exc:
            main(
                [
                    "pipeline",
                    "--config", str(config),
                    "--seed", "1",
                    "--seeds", "1,2",
                    "--data", str(data),
                    "--labels", str(labels),
                ]
            )
        assert exc.value.code == 2

    def test_missing_data_file_exits_3(self, workspace, capsys):
        tmp_path, _, labels, config, _ = workspace
        code = main(
            [
                "pipeline",
                "--config", str(config),
                "--data", str(tmp_path / "absent.csv"),
                "--labels", str(labels),
            ]
        )
        assert code == 3
        assert "data error" in capsys.readouterr().err

    def test_bad_config_file_exits_2(self, workspace, capsys):
        tmp_path, data, labels, _, _ = workspace
        bad = tmp_path / "bad.cfg"
        bad.write_text("not.a.key = 1\n")
        code = main(
            [
                "pipeline",
                "--config", str(bad),
                "--data", str(data),
                "--labels", str(labels),
            ]
        )
        assert code == 2


class TestScatterCommand:
    def test_writes_coordinates(self, workspace, tmp_path):
        _, data, labels, config, _ = workspace
        dist_dir = tmp_path / "dist"
        main(["mgm", "--config", str(config), "--data", str(data), "--out-dir", str(dist_dir)])
        out = tmp_path / "scatter.csv"
        code = main(
            [
                "scatter",
                "--distances", str(dist_dir / "distance_matrix.csv"),
                "--labels", str(labels),
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,y,label"
        assert len(lines) == 37
        assert lines[1].split(",")[2].startswith("type")


class TestPresetFlag:
    def test_preset_resolves(self, capsys):
        code = main(["sample-scales", "--preset", "setup2-small"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["scales"][0] == 5
        assert payload["scales"][-1] == 20
        assert payload["count"] == 10

    def test_unknown_preset_rejected_by_parser(self):
        with pytest.raises(SystemExit) as exc:
            main(["sample-scales", "--preset", "setup9"])
        assert exc.value.code == 2
