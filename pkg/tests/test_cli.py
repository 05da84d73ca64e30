import json

from dmnrlab.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, cli_main
from dmnrlab.io.exporter import read_ply
from dmnrlab.io.maskfile import read_mask
from dmnrlab.io.pointfile import load_points


def synth(tmp_path, stem="f", seed=0, n=2000, folder=None, label_folder=None):
    folder = folder or tmp_path
    label_folder = label_folder or folder
    folder.mkdir(parents=True, exist_ok=True)
    label_folder.mkdir(parents=True, exist_ok=True)
    pts, lab = folder / f"{stem}.bin", label_folder / f"{stem}.label"
    code = cli_main([
        "synth", "--n-points", str(n), "--seed", str(seed),
        "--out-points", str(pts), "--out-labels", str(lab),
    ])
    assert code == EXIT_OK
    return pts, lab


def dataset(tmp_path, n_frames=3):
    pts_dir, lab_dir = tmp_path / "velodyne", tmp_path / "labels"
    for k in range(n_frames):
        synth(tmp_path, f"{k:06d}", seed=k, folder=pts_dir, label_folder=lab_dir)
    return pts_dir, lab_dir


def test_synth_then_filter(tmp_path, capsys):
    pts, _ = synth(tmp_path)
    mask = tmp_path / "f.mask"
    assert cli_main(["filter", "--algo", "dmnr", "--input", str(pts), "--out-mask", str(mask)]) == EXIT_OK
    assert len(read_mask(mask)) == len(load_points(pts))
    assert "f.bin: algo=dmnr N=2000" in capsys.readouterr().out


def test_filter_flags_override_config(tmp_path):
    pts, _ = synth(tmp_path)
    cfg = tmp_path / "p.cfg"
    cfg.write_text("k1 = 0.5\nk3 = 1000\n")
    loose, strict = tmp_path / "loose.mask", tmp_path / "strict.mask"
    assert cli_main(["filter", "--input", str(pts), "--config", str(cfg), "--out-mask", str(loose)]) == EXIT_OK
    assert cli_main([
        "filter", "--input", str(pts), "--config", str(cfg), "--k1", "0.001", "--k3", "0",
        "--out-mask", str(strict),
    ]) == EXIT_OK
    assert read_mask(loose).n_kept > read_mask(strict).n_kept


def test_filter_directory_and_ply(tmp_path):
    pts_dir = tmp_path / "in"
    synth(tmp_path, "a", folder=pts_dir, n=600)
    synth(tmp_path, "b", seed=1, folder=pts_dir, n=600)
    out = tmp_path / "masks"
    assert cli_main(["filter", "--input", str(pts_dir), "--algo", "sor", "--out-dir", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["a.mask", "b.mask"]
    assert cli_main(["filter", "--input", str(pts_dir), "--out-mask", str(tmp_path / "x.mask")]) == EXIT_USAGE

    ply = tmp_path / "a.ply"
    assert cli_main([
        "filter", "--input", str(pts_dir / "a.bin"), "--algo", "dmnr-h", "--min-cluster-size", "20",
        "--out-ply", str(ply), "--ply-format", "ascii",
    ]) == EXIT_OK
    assert read_ply(ply).shape == (600,)


def test_unknown_algorithm_is_usage_error(tmp_path, capsys):
    pts, _ = synth(tmp_path)
    assert cli_main(["filter", "--algo", "magic", "--input", str(pts)]) == EXIT_USAGE
    assert "usage:" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert cli_main([]) == EXIT_USAGE
    assert cli_main(["filter"]) == EXIT_USAGE
    assert cli_main(["filter", "--input", "x.bin", "--K", "ten"]) == EXIT_USAGE
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("speed = 3\n")
    pts, _ = synth(tmp_path)
    assert cli_main(["filter", "--input", str(pts), "--config", str(cfg)]) == EXIT_USAGE
    assert cli_main(["filter", "--input", str(pts), "--algo", "sor", "--sor-alpha", "-1"]) == EXIT_USAGE
    assert cli_main(["filter", "--input", str(pts), "--algo", "ror", "--ror-radius", "0"]) == EXIT_USAGE


def test_data_errors(tmp_path, capsys):
    assert cli_main(["filter", "--input", str(tmp_path / "missing.bin")]) == EXIT_DATA
    bad = tmp_path / "bad.bin"
    bad.write_bytes(bytes(17))
    assert cli_main(["filter", "--input", str(bad)]) == EXIT_DATA
    assert "MalformedFileError" in capsys.readouterr().err


def test_evaluate_report(tmp_path, capsys):
    pts_dir, lab_dir = dataset(tmp_path)
    report, table = tmp_path / "r.json", tmp_path / "r.csv"
    code = cli_main([
        "evaluate", "--points-dir", str(pts_dir), "--labels-dir", str(lab_dir),
        "--noise-ids", "110", "--report", str(report), "--csv", str(table),
    ])
    assert code == EXIT_OK
    doc = json.loads(report.read_text())
    assert [f["frame"] for f in doc["frames"]] == ["000000", "000001", "000002"]
    assert doc["metadata"]["algorithm"] == "dmnr"
    assert doc["params"]["K"] == 10
    assert doc["aggregate"]["recall"] >= 0.9
    assert table.read_text().splitlines()[-1].startswith("ALL,")
    assert "F1=" in capsys.readouterr().out


def test_evaluate_is_deterministic(tmp_path):
    pts_dir, lab_dir = dataset(tmp_path, 2)
    outputs = []
    for k, workers in enumerate(("1", "2")):
        path = tmp_path / f"r{k}.json"
        assert cli_main([
            "evaluate", "--points-dir", str(pts_dir), "--labels-dir", str(lab_dir),
            "--noise-ids", "110", "--report", str(path), "--workers", workers,
        ]) == EXIT_OK
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_evaluate_short_label_file(tmp_path, capsys):
    pts_dir, lab_dir = dataset(tmp_path, 2)
    short = lab_dir / "000001.label"
    short.write_bytes(short.read_bytes()[:-4])
    code = cli_main([
        "evaluate", "--points-dir", str(pts_dir), "--labels-dir", str(lab_dir),
        "--noise-ids", "110", "--report", str(tmp_path / "r.json"),
    ])
    assert code == EXIT_DATA
    assert "000001" in capsys.readouterr().err


def test_evaluate_needs_noise_ids(tmp_path):
    pts_dir, lab_dir = dataset(tmp_path, 1)
    assert cli_main([
        "evaluate", "--points-dir", str(pts_dir), "--labels-dir", str(lab_dir),
        "--report", str(tmp_path / "r.json"),
    ]) == EXIT_USAGE


def test_export_and_plot(tmp_path):
    pts, lab = synth(tmp_path, n=800)
    mask = tmp_path / "f.mask"
    assert cli_main(["filter", "--input", str(pts), "--out-mask", str(mask)]) == EXIT_OK
    ply = tmp_path / "f.ply"
    assert cli_main(["export", "--input", str(pts), "--mask", str(mask), "--out", str(ply), "--palette", "stage"]) == EXIT_OK
    assert read_ply(ply).shape == (800,)

    png = tmp_path / "f.png"
    assert cli_main(["plot", "--input", str(pts), "--labels", str(lab), "--noise-ids", "110", "--out", str(png)]) == EXIT_OK
    assert png.read_bytes()[:4] == b"\x89PNG"
    assert cli_main(["plot", "--input", str(pts), "--labels", str(lab), "--out", str(png)]) == EXIT_USAGE


def test_synth_flags(tmp_path, capsys):
    pts = tmp_path / "s.bin"
    assert cli_main([
        "synth", "--n-points", "1000", "--clutter-fraction", "0.1", "--no-walls", "--out-points", str(pts),
    ]) == EXIT_OK
    assert "noise=100" in capsys.readouterr().out
    assert len(load_points(pts)) == 1000
    assert cli_main(["synth", "--clutter-fraction", "2", "--out-points", str(pts)]) == EXIT_DATA


def test_version(capsys):
    assert cli_main(["--version"]) == EXIT_OK
    assert "dmnrlab" in capsys.readouterr().out
