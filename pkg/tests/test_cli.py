import json
import subprocess
import sys

import pytest

from qjulia.cli import main
from qjulia.field import load_raw


def write_cfg(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def tiny_newton(tmp_path, **overrides):
    data = {
        "map": {"kind": "newton", "polynomial": [-1, 0, 0, 1]},
        "method": "cutoff",
        "region": {"min": [-2, -2, -2], "max": [2, 2, 2], "resolution": [9, 9, 9]},
        "camera": {"viewAxis": "+z", "imageSize": [24, 24]},
        "outputPath": str(tmp_path / "out.ppm"),
    }
    data.update(overrides)
    return write_cfg(tmp_path, "job.json", data)


def test_render_writes_ppm(tmp_path, capsys):
    cfg = tiny_newton(tmp_path)
    assert main(["render", cfg, "--workers", "1"]) == 0
    out = tmp_path / "out.ppm"
    data = out.read_bytes()
    assert data.startswith(b"P6\n24 24\n255\n")
    assert len(data) == len(b"P6\n24 24\n255\n") + 24 * 24 * 3
    assert str(out) in capsys.readouterr().out


def test_render_out_override_and_field_dump(tmp_path):
    cfg = tiny_newton(tmp_path)
    img = tmp_path / "elsewhere.ppm"
    raw = tmp_path / "field.qjf"
    assert main(["render", cfg, "--workers", "2", "--out", str(img),
                 "--dump-field", str(raw)]) == 0
    assert img.exists()
    assert not (tmp_path / "out.ppm").exists()
    tags, steps, resolution = load_raw(raw)
    assert resolution == (9, 9, 9)
    assert tags.shape == (9, 9, 9)


def test_render_field_dump_csv(tmp_path):
    cfg = tiny_newton(tmp_path)
    dump = tmp_path / "field.csv"
    assert main(["render", cfg, "--dump-field", str(dump), "--workers", "1"]) == 0
    lines = dump.read_text().splitlines()
    assert lines[0] == "ix,iy,iz,outcome,steps"
    assert len(lines) == 1 + 9 * 9 * 9


def test_render_deterministic_across_workers(tmp_path):
    cfg = tiny_newton(tmp_path)
    a = tmp_path / "a.ppm"
    b = tmp_path / "b.ppm"
    assert main(["render", cfg, "--workers", "1", "--out", str(a)]) == 0
    assert main(["render", cfg, "--workers", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_slice_unit_disc(tmp_path):
    cfg = write_cfg(
        tmp_path,
        "disc.json",
        {
            "map": {"kind": "quadratic", "p": 1, "q": 0},
            "method": "escape",
            "radius": 2.0,
            "maxIter": 24,
            "region": {"min": [-2, -2, -2], "max": [2, 2, 2], "resolution": [33, 33, 33]},
            "outputPath": str(tmp_path / "disc.ppm"),
        },
    )
    assert main(["slice", cfg]) == 0
    data = (tmp_path / "disc.pgm").read_bytes()
    assert data.startswith(b"P5\n33 33\n255\n")
    pixels = data[len(b"P5\n33 33\n255\n"):]
    assert len(pixels) == 33 * 33
    # origin plotted, far corner escaped
    assert pixels[16 * 33 + 16] == 255
    assert pixels[0] == 0


def test_slice_window_override(tmp_path):
    cfg = tiny_newton(
        tmp_path,
        slice={"window": [-1, 1, -1, 1], "resolution": [17, 13]},
    )
    out = tmp_path / "sl.pgm"
    assert main(["slice", cfg, "--out", str(out)]) == 0
    assert out.read_bytes().startswith(b"P5\n17 13\n255\n")


def test_slice_rejects_nonreal_map(tmp_path, capsys):
    cfg = tiny_newton(
        tmp_path, map={"kind": "quadratic", "p": 1, "q": [0, 1, 0, 0]}
    )
    assert main(["slice", cfg]) == 1
    assert "real" in capsys.readouterr().err


def test_sweep_csv_and_images(tmp_path):
    base = {
        "map": {"kind": "newton", "polynomial": [-1, 0, 0, 1]},
        "method": "escape",
        "region": {"min": [-2, -2, -2], "max": [2, 2, 2], "resolution": [9, 9, 9]},
        "camera": {"viewAxis": "+z", "imageSize": [16, 16]},
        "outputPath": str(tmp_path / "sweep.csv"),
    }
    cfg = write_cfg(
        tmp_path,
        "sweep.json",
        {"radii": [2.0, 4.0], "iterationCounts": [5, 12], "base": base},
    )
    assert main(["sweep", cfg, "--workers", "1"]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "radius,maxIter,fracPlotted,fracEscaped,fracConverged,meanSteps"
    assert len(lines) == 5
    starts = [",".join(l.split(",")[:2]) for l in lines[1:]]
    assert starts == ["2,5", "2,12", "4,5", "4,12"]
    for l in lines[1:]:
        parts = l.split(",")
        assert len(parts) == 6
        for frac in parts[2:5]:
            assert 0.0 <= float(frac) <= 1.0
    for name in ("sweep_r2_it5.ppm", "sweep_r2_it12.ppm", "sweep_r4_it5.ppm", "sweep_r4_it12.ppm"):
        assert (tmp_path / name).exists()


def test_sweep_no_images(tmp_path):
    base = {
        "map": {"kind": "newton", "polynomial": [-1, 0, 0, 1]},
        "method": "escape",
        "region": {"min": [-2, -2, -2], "max": [2, 2, 2], "resolution": [9, 9, 9]},
        "outputPath": str(tmp_path / "sweep.csv"),
    }
    cfg = write_cfg(
        tmp_path, "sweep.json", {"radii": [4.0], "iterationCounts": [5], "base": base}
    )
    assert main(["sweep", cfg, "--no-images"]) == 0
    assert (tmp_path / "sweep.csv").exists()
    assert not list(tmp_path.glob("*.ppm"))


def test_missing_config_file_fails(tmp_path, capsys):
    assert main(["render", str(tmp_path / "nope.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_bad_json_fails_with_diagnostic(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{broken")
    assert main(["render", str(path)]) == 1
    err = capsys.readouterr().err
    assert "error:" in err and "JSON" in err


def test_bad_key_names_key(tmp_path, capsys):
    cfg = tiny_newton(tmp_path, radius=-2.0)
    assert main(["render", cfg]) == 1
    assert "radius" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    cfg = tiny_newton(tmp_path)
    proc = subprocess.run(
        [sys.executable, "-m", "qjulia", "render", cfg, "--workers", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "out.ppm").exists()


@pytest.mark.parametrize("name", [
    "quadratic_basilica.json",
    "newton_cubic_escape.json",
    "newton_cubic_cutoff.json",
    "interweaving_basins.json",
])
def test_bundled_configs_parse(name):
    from pathlib import Path

    from qjulia.config import parse_config

    root = Path(__file__).resolve().parent.parent / "configs"
    parse_config((root / name).read_text())


def test_bundled_sweep_parses():
    from pathlib import Path

    from qjulia.config import parse_sweep

    root = Path(__file__).resolve().parent.parent / "configs"
    spec = parse_sweep((root / "sweep_newton.json").read_text())
    assert len(spec.cells()) == 12
