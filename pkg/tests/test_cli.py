import numpy as np
import pytest
from PIL import Image

from sparsecrf import imageio
from sparsecrf.cli import main
from sparsecrf.field import (BACKGROUND, FOREGROUND, ScribbleMask,
                             SegmentationMask)
from sparsecrf.pipeline import (ConfigError, RunConfig, config_from_mapping,
                                load_config_file)


@pytest.fixture
def fixture_paths(tmp_path):
    rng = np.random.default_rng(0)
    arr = (rng.random((24, 24)) * 120).astype(np.uint8)
    arr[8:16, 8:16] = 220
    img_path = tmp_path / "img.png"
    Image.fromarray(arr, mode="L").save(img_path)

    labels = np.zeros((24, 24), dtype=np.uint8)
    labels[11:13, 11:13] = FOREGROUND
    labels[2:4, 2:4] = BACKGROUND
    scr_path = tmp_path / "scr.png"
    imageio.save_scribbles_png(ScribbleMask(24, 24, labels), scr_path)
    return img_path, scr_path


FAST = ["--q", "16", "--degree", "6", "--bins", "8", "--window", "3"]


# ---- config machinery

def test_runconfig_validation():
    with pytest.raises(ConfigError):
        RunConfig(divergence="cosine")
    with pytest.raises(ConfigError):
        RunConfig(window=4)
    with pytest.raises(ConfigError):
        RunConfig(epsilon=0.0)
    with pytest.raises(ConfigError):
        RunConfig(tau=-1)


def test_config_mapping_and_types():
    cfg = config_from_mapping({"degree": "12", "tau": "0.5",
                               "divergence": "hellinger"})
    assert cfg.degree == 12.0 and cfg.tau == 0.5
    assert cfg.divergence == "hellinger"
    with pytest.raises(ConfigError):
        config_from_mapping({"unknown_key": "1"})
    with pytest.raises(ConfigError):
        config_from_mapping({"degree": "abc"})


def test_config_file_roundtrip(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(
        "# run parameters\n"
        "divergence = hellinger\n"
        "degree = 12  # light sampling\n"
        "tau = 0.5\n")
    cfg = load_config_file(cfg_path)
    assert cfg.divergence == "hellinger"
    assert cfg.degree == 12.0
    assert cfg.tau == 0.5


# ---- bounds

def test_bounds_prints_reference_numbers(capsys):
    assert main(["bounds", "120000"]) == 0
    out = dict(line.split(" = ") for line in
               capsys.readouterr().out.strip().splitlines())
    assert out["p_lower"] == "9.7460e-05"
    assert round(float(out["degree_lower"])) == 12

    assert main(["bounds", "120000", "--epsilon", "0.1"]) == 0
    out = dict(line.split(" = ") for line in
               capsys.readouterr().out.strip().splitlines())
    assert float(out["p_upper"]) <= 0.0097
    assert abs(float(out["max_edges"]) - 1.4034e8) <= 0.01e8


def test_bounds_epsilon_one(capsys):
    assert main(["bounds", "5000"]) == 0  # epsilon defaults to 1
    out = dict(line.split(" = ") for line in
               capsys.readouterr().out.strip().splitlines())
    # formulas coincide at epsilon = 1 (up to the printed precision)
    assert float(out["p_lower"]) == pytest.approx(float(out["p_upper"]),
                                                  rel=1e-2)


def test_bounds_bad_args_exit_4(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "notanumber"])
    assert exc.value.code == 4


# ---- segment

def test_segment_writes_mask_and_report(tmp_path, fixture_paths):
    img_path, scr_path = fixture_paths
    out = tmp_path / "mask.png"
    rc = main(["segment", str(img_path), str(scr_path), "--out", str(out),
               "--seed", "3"] + FAST)
    assert rc == 0
    assert out.is_file()
    mask = imageio.load_mask(out)
    assert mask.shape == (24, 24)
    report = (tmp_path / "mask.png.report.json").read_text()
    for key in ("energy", "edges", "timings_ms", "lower_ok"):
        assert key in report


def test_segment_missing_image_exit_2(tmp_path, fixture_paths):
    _, scr_path = fixture_paths
    with pytest.raises(SystemExit) as exc:
        main(["segment", str(tmp_path / "nope.png"), str(scr_path),
              "--out", str(tmp_path / "m.png")])
    assert exc.value.code == 2


def test_segment_missing_class_exit_3(tmp_path, fixture_paths):
    img_path, _ = fixture_paths
    labels = np.zeros((24, 24), dtype=np.uint8)
    labels[0, 0] = FOREGROUND  # foreground only
    scr_path = tmp_path / "fg_only.png"
    imageio.save_scribbles_png(ScribbleMask(24, 24, labels), scr_path)
    with pytest.raises(SystemExit) as exc:
        main(["segment", str(img_path), str(scr_path),
              "--out", str(tmp_path / "m.png")] + FAST)
    assert exc.value.code == 3


def test_segment_invalid_config_exit_4(tmp_path, fixture_paths):
    img_path, scr_path = fixture_paths
    rc = main(["segment", str(img_path), str(scr_path),
               "--out", str(tmp_path / "m.png"), "--window", "4"])
    assert rc == 4


def test_segment_deterministic_bytes(tmp_path, fixture_paths):
    img_path, scr_path = fixture_paths
    out1 = tmp_path / "m1.png"
    out2 = tmp_path / "m2.png"
    args = ["segment", str(img_path), str(scr_path), "--seed", "9"] + FAST
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


# ---- eval

def test_eval_perfect_and_fixture_rows(tmp_path):
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()

    gt = np.zeros((4, 4), dtype=np.uint8)
    gt[0:2, :] = 1
    gt[2, 0:2] = 1
    pred = np.zeros((4, 4), dtype=np.uint8)
    pred[0:2, :] = 1
    pred[3, 0:2] = 1

    def save(mask, path):
        imageio.save_mask_png(
            SegmentationMask(4, 4, mask), path)

    save(gt, gt_dir / "a.png")
    save(gt, pred_dir / "a.png")
    save(gt, gt_dir / "b.png")
    save(pred, pred_dir / "b.png")

    out = tmp_path / "metrics.csv"
    assert main(["eval", str(pred_dir), str(gt_dir), "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "name,region_f1,boundary_f1,iou,runtime_ms"
    row_a = lines[1].split(",")
    assert row_a[0] == "a.png" and float(row_a[1]) == 1.0
    row_b = lines[2].split(",")
    assert float(row_b[1]) == pytest.approx(0.8)
    assert float(row_b[3]) == pytest.approx(0.66667, abs=1e-5)
    assert lines[3].startswith("Average,")


def test_eval_empty_gt_exit_2(tmp_path):
    (tmp_path / "pred").mkdir()
    (tmp_path / "gt").mkdir()
    assert main(["eval", str(tmp_path / "pred"), str(tmp_path / "gt")]) == 2


def test_eval_unmatched_skipped_with_warning(tmp_path, capsys):
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    m = np.ones((3, 3), dtype=np.uint8)
    imageio.save_mask_png(SegmentationMask(3, 3, m), gt_dir / "x.png")
    imageio.save_mask_png(SegmentationMask(3, 3, m), gt_dir / "y.png")
    imageio.save_mask_png(SegmentationMask(3, 3, m), pred_dir / "x.png")
    assert main(["eval", str(pred_dir), str(gt_dir)]) == 0
    assert "y.png" in capsys.readouterr().err


# ---- sweep

def test_sweep_grid_edges_increase_with_degree(tmp_path, fixture_paths):
    img_path, scr_path = fixture_paths
    out = tmp_path / "sweep.csv"
    rc = main(["sweep", str(img_path), str(scr_path),
               "--grid", "degree=2,8,16", "--out", str(out),
               "--seed", "1"] + FAST[:-2] + ["--window", "3"])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("degree,edges,")
    edges = [int(line.split(",")[1]) for line in lines[1:]]
    assert edges == sorted(edges) and len(set(edges)) == 3


def test_sweep_duplicate_point_warns(tmp_path, fixture_paths, capsys):
    img_path, scr_path = fixture_paths
    rc = main(["sweep", str(img_path), str(scr_path),
               "--grid", "degree=4,4", "--out",
               str(tmp_path / "s.csv"), "--seed", "1"] + FAST)
    assert rc == 0
    assert "duplicate" in capsys.readouterr().err
    lines = (tmp_path / "s.csv").read_text().strip().splitlines()
    assert len(lines) == 2  # header + one deduplicated row


# ---- graphlab

def test_graphlab_csv(capsys):
    assert main(["graphlab", "100", "--p", "0.005", "--p", "0.1",
                 "--trials", "5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,p,trials,fraction_connected,mean_largest_component"
    assert len(lines) == 3
    sparse = lines[1].split(",")
    dense = lines[2].split(",")
    assert float(sparse[3]) <= float(dense[3])
