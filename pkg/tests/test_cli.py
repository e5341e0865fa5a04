import json

import numpy as np
import pytest

from conftest import save_png, two_half_image, write_dataset
from lapseg.cli import main
from lapseg.resample import decode_labelmap


@pytest.fixture
def synthetic_files(tmp_path):
    img = two_half_image(48)
    save_png(tmp_path / "input.png", img.to_uint8())

    scrib = np.full((48, 48, 3), 255, dtype=np.uint8)
    scrib[22:26, 10:14] = [0, 0, 255]    # class 1 (blue), left half
    scrib[22:26, 34:38] = [255, 0, 0]    # class 2 (red), right half
    save_png(tmp_path / "scribbles.png", scrib)

    tri = np.full((48, 48), 128, dtype=np.uint8)
    tri[:, :8] = 64
    tri[:, -8:] = 255
    save_png(tmp_path / "trimap.png", tri, mode="L")
    return tmp_path


class TestSegmentCommand:
    def test_trimap_run(self, synthetic_files, capsys):
        out = synthetic_files / "out.png"
        code = main([
            "segment", "-i", str(synthetic_files / "input.png"),
            "-t", str(synthetic_files / "trimap.png"), "-o", str(out),
        ])
        assert code == 0
        telemetry = json.loads(capsys.readouterr().out)
        assert telemetry["num_classes"] == 2
        labels = decode_labelmap(out.read_bytes())
        assert (labels.labels[:, :8] == 1).all()
        assert (labels.labels[:, -8:] == 2).all()

    def test_scribble_run_deterministic(self, synthetic_files, capsys):
        out1 = synthetic_files / "a.png"
        out2 = synthetic_files / "b.png"
        for out in (out1, out2):
            code = main([
                "segment", "-i", str(synthetic_files / "input.png"),
                "-s", str(synthetic_files / "scribbles.png"), "-o", str(out),
            ])
            assert code == 0
        capsys.readouterr()
        assert out1.read_bytes() == out2.read_bytes()

    def test_report_file(self, synthetic_files, capsys):
        report = synthetic_files / "report.json"
        code = main([
            "segment", "-i", str(synthetic_files / "input.png"),
            "-t", str(synthetic_files / "trimap.png"),
            "-o", str(synthetic_files / "out.png"), "--report", str(report),
        ])
        assert code == 0
        stdout_payload = json.loads(capsys.readouterr().out)
        assert json.loads(report.read_text()) == stdout_payload

    def test_custom_lambda(self, synthetic_files, capsys):
        code = main([
            "segment", "-i", str(synthetic_files / "input.png"),
            "-t", str(synthetic_files / "trimap.png"),
            "-o", str(synthetic_files / "out.png"),
            "--lambda", "1,1,1,1,1,1,1,1,1", "--k", "6",
        ])
        capsys.readouterr()
        assert code == 0


class TestUsageErrors:
    def test_missing_image_flag(self, synthetic_files, capsys):
        code = main(["segment", "-t", str(synthetic_files / "trimap.png"), "-o", "x.png"])
        assert code == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["segment", "--bogus"]) == 1
        assert "error" in capsys.readouterr().err

    def test_no_subcommand(self, capsys):
        assert main([]) == 1
        capsys.readouterr()

    def test_both_seed_sources(self, synthetic_files, capsys):
        code = main([
            "segment", "-i", str(synthetic_files / "input.png"),
            "-s", "a.png", "-t", "b.png", "-o", "out.png",
        ])
        assert code == 1
        capsys.readouterr()


class TestRuntimeErrors:
    def test_missing_file(self, tmp_path, capsys):
        code = main([
            "segment", "-i", str(tmp_path / "absent.png"),
            "-t", str(tmp_path / "nope.png"), "-o", str(tmp_path / "out.png"),
        ])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_corrupt_image(self, tmp_path, capsys):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"\x89PNG\r\n\x1a\nnot really")
        code = main([
            "segment", "-i", str(bad), "-t", str(bad), "-o", str(tmp_path / "out.png"),
        ])
        assert code == 2
        capsys.readouterr()


class TestBenchmarkCommands:
    def test_benchmark(self, tmp_path, capsys):
        images, trimaps, truth = write_dataset(tmp_path)
        csv_path = tmp_path / "rows.csv"
        code = main([
            "benchmark", "--images", str(images), "--trimaps", str(trimaps),
            "--truth", str(truth), "--csv", str(csv_path), "--k", "6",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "mean_error=0.0000" in out
        assert csv_path.exists()

    def test_benchmark_scribble_set(self, tmp_path, capsys):
        from conftest import write_scribble_dataset

        images, scribbles, truth = write_scribble_dataset(tmp_path)
        code = main([
            "benchmark", "--images", str(images), "--scribbles", str(scribbles),
            "--truth", str(truth), "--k", "6",
        ])
        assert code == 0
        assert "mean_error=0.0000" in capsys.readouterr().out

    def test_benchmark_rejects_both_seed_dirs(self, tmp_path, capsys):
        code = main([
            "benchmark", "--images", "a", "--trimaps", "b", "--scribbles", "c",
            "--truth", "d",
        ])
        assert code == 1
        capsys.readouterr()

    def test_sweep_single_point(self, tmp_path, capsys):
        images, trimaps, truth = write_dataset(tmp_path)
        code = main([
            "sweep", "--images", str(images), "--trimaps", str(trimaps),
            "--truth", str(truth), "--param", "k", "--grid", "6",
        ])
        assert code == 0
        assert "k=6" in capsys.readouterr().out

    def test_erode_seeds_grid(self, tmp_path, capsys):
        images, trimaps, truth = write_dataset(tmp_path)
        code = main([
            "erode-seeds", "--images", str(images), "--trimaps", str(trimaps),
            "--truth", str(truth), "--p-grid", "0.0:0.5:0.5", "--trials", "1",
            "--seed", "3", "--k", "6",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "p=0.00" in out and "p=0.50" in out


class TestNetstats:
    def test_reports_small_world_stats(self, synthetic_files, capsys):
        code = main([
            "netstats", "-i", str(synthetic_files / "input.png"),
            "-s", str(synthetic_files / "scribbles.png"),
            "--samples", "3", "--seed", "1",
        ])
        assert code == 0
        stats = json.loads(capsys.readouterr().out)
        assert {"clustering", "efficiency", "c_rand", "e_rand", "swn"} <= set(stats)
