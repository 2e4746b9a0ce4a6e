import math
import subprocess
import sys

import numpy as np
import pytest

from mirrorcoh.cli import EXIT_ERROR, EXIT_OK, main
from mirrorcoh.config import parse_config
from mirrorcoh.detector_state import Contour, DetectorPairConfig, Method
from mirrorcoh.errors import ConfigError, UsageError
from mirrorcoh.output import csv_lines, fmt, read_csv, read_ppm, write_csv, write_heatmap
from mirrorcoh.scan import FIELD_NAMES, Axis, FieldMap, GridSpec, scan_plane, sweep_omega
from mirrorcoh.trajectory import MirrorTrajectory, TrajectoryKind

MINIMAL = "kappa=1 omega=1 sigma=1 lambda=2 t0=5 xA=4 d=1"
ACC = MirrorTrajectory.accelerating(1.0)
TEMPLATE = DetectorPairConfig(1.0, 1.0, 2.0, 5.0, 4.0, 1.0)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.trajectory.kappa == 1.0
    assert cfg.detector == TEMPLATE
    assert cfg.quadrature.eps.epsilon == 0.01
    assert cfg.quadrature.nodes == 160
    assert cfg.quadrature.box == 6.0
    assert cfg.quadrature.contour is Contour.SHIFTED
    assert cfg.method is Method.SADDLE
    assert cfg.warnings == ()


def test_config_line_format_and_comments():
    text = """
    # benchmark point
    kappa = 1.0
    omega = 1.0   # gap
    sigma=1 lambda=2
    t0 = 5
    xA = 4
    d = 1
    method = quadrature
    nodes = 96
    """
    cfg = parse_config(text)
    assert cfg.method is Method.QUADRATURE and cfg.quadrature.nodes == 96


def test_config_static_needs_no_kappa():
    cfg = parse_config("trajectory=static omega=1 sigma=1 lambda=2 t0=5 xA=4 d=1")
    assert cfg.trajectory.kind is TrajectoryKind.STATIC


def test_negative_omega_cites_precondition():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("omega=1", "omega=-1"))
    assert info.value.key == "omega" and info.value.line == 1
    assert "Omega > 0" in str(info.value)


def test_saddle_validity_warning_in_config():
    cfg = parse_config(MINIMAL.replace("omega=1", "omega=4"))
    assert len(cfg.warnings) == 1 and "4" in cfg.warnings[0]


@pytest.mark.parametrize(
    "text, key, line",
    [
        (MINIMAL + "\nfoo = 3", "foo", 2),
        (MINIMAL + "\nomega = 2", "omega", 2),
        (MINIMAL.replace("d=1", "d=abc"), "d", 1),
        (MINIMAL.replace("d=1", "d=nan"), "d", 1),
        (MINIMAL + "\nnodes = 12", "nodes", 2),
        (MINIMAL + "\nnodes = 1.5", "nodes", 2),
        (MINIMAL + "\nmethod = magic", "method", 2),
        (MINIMAL.replace("xA=4", "xA=0"), "xA", 1),
    ],
)
def test_config_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key and info.value.line == line
    assert f"'{key}'" in str(info.value) and f"line {line}" in str(info.value)


def test_config_missing_and_garbage():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("d=1", ""))
    assert info.value.key == "d"
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "\njust words")
    assert info.value.line == 2


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def small_plane():
    grid = GridSpec(Axis("t0", -5, 5, 2), Axis("xA", 1, 3, 2))
    return scan_plane(TEMPLATE, grid, ACC)


def test_csv_round_trip(tmp_path):
    fm = small_plane()
    path = tmp_path / "plane.csv"
    write_csv(fm, path)
    back = read_csv(path)
    assert back.grid == fm.grid
    for name in FIELD_NAMES:
        want = np.array([float(fmt(v)) for v in fm.fields[name].ravel()]).reshape(2, 2)
        np.testing.assert_array_equal(back.fields[name], want)
    np.testing.assert_allclose(back.worldline, fm.worldline, rtol=1e-11, atol=1e-12)
    for key in ("omega", "method", "warnings", "missing", "trajectory", "kappa"):
        assert back.metadata[key] == fm.metadata[key]
    # row order is axis1-major
    rows = [l.split(",")[:2] for l in path.read_text().splitlines()
            if l and l[0] in "-0123456789"]
    assert rows == [["-5", "1"], ["-5", "3"], ["5", "1"], ["5", "3"]]
    # and writing the parsed map again gives the same bytes
    path2 = tmp_path / "again.csv"
    write_csv(back, path2)
    lines1 = path.read_text().splitlines()
    lines2 = path2.read_text().splitlines()
    assert lines1 == lines2


def test_csv_layout(tmp_path):
    fm = small_plane()
    lines = csv_lines(fm)
    meta = [l for l in lines if l.startswith("# ")]
    assert "# kappa_sigma_interpretation=kappa*sigma" in meta
    for key in ("kappa", "omega", "sigma", "lambda", "t0", "xA", "d", "method", "warnings"):
        assert any(l.startswith(f"# {key}=") for l in meta)
    body = lines[len(meta):]
    assert body[0] == "axis1,axis2,eAeB,ntilde,g1_abs,g2,noise,first_order,quantum"
    assert len(body) == 5


def test_sweep_csv_line_count_and_missing(tmp_path):
    grid = GridSpec(Axis("omega", 0.5, 2.5, 7))
    fm = sweep_omega(TEMPLATE, grid, ACC, "late_time")
    fm.fields["g2"][3] = np.nan
    path = tmp_path / "sweep.csv"
    write_csv(fm, path)
    lines = path.read_text().splitlines()
    n_meta = sum(l.startswith("# ") for l in lines)
    assert len(lines) == 7 + 1 + n_meta
    header = lines[n_meta].split(",")
    assert header[0] == "axis1" and "axis2" not in header
    row = lines[n_meta + 4].split(",")
    assert row[header.index("g2")] == ""
    assert np.isnan(read_csv(path).fields["g2"][3])


def test_fmt_twelve_digits():
    assert fmt(math.pi) == "3.14159265359"
    assert fmt(float("nan")) == ""
    assert fmt(1e-300) == "1e-300"


# ---------------------------------------------------------------------------
# heatmap
# ---------------------------------------------------------------------------

def constant_map(nt=3, nx=2, worldline=None):
    grid = GridSpec(Axis("t0", 0, 1, nt), Axis("xA", 1, 2, nx))
    fields = {n: np.full(grid.shape, 2.0) for n in FIELD_NAMES}
    md = {} if worldline is None else {"worldline": worldline}
    return FieldMap(grid, fields, md)


def test_heatmap_dimensions_and_constant_field(tmp_path):
    path = tmp_path / "c.ppm"
    write_heatmap(constant_map(), "g2", path)
    comments, (w, h), px = read_ppm(path)
    assert (w, h) == (3, 2)
    assert np.all(px == px[0, 0])
    assert any("min=2" in c and "max=2" in c for c in comments)


def test_heatmap_worldline_and_missing(tmp_path):
    wl = np.array([[0.0, 1.0], [0.5, 5.0], [1.0, 2.0]])
    fm = constant_map(worldline=wl)
    fm.fields["g2"][1, 0] = np.nan
    path = tmp_path / "w.ppm"
    write_heatmap(fm, "g2", path)
    _, _, px = read_ppm(path)
    # bottom row is xA = 1, top row xA = 2
    assert tuple(px[1, 0]) == (0, 255, 0)
    assert tuple(px[0, 2]) == (0, 255, 0)
    assert tuple(px[1, 1]) == (0, 0, 0)
    others = [tuple(px[r, c]) for r in range(2) for c in range(3)
              if (r, c) not in {(1, 0), (0, 2), (1, 1)}]
    assert len(set(others)) == 1 and others[0] not in {(0, 255, 0), (0, 0, 0)}


def test_heatmap_extrema_match_csv(tmp_path):
    grid = GridSpec(Axis("t0", -10, 10, 6), Axis("xA", 0.01, 10, 5))
    fm = scan_plane(TEMPLATE.replace(omega=3.0), grid, ACC)
    write_csv(fm, tmp_path / "p.csv")
    write_heatmap(fm, "ntilde", tmp_path / "p.ppm")
    vals = read_csv(tmp_path / "p.csv").fields["ntilde"]
    comments, _, _ = read_ppm(tmp_path / "p.ppm")
    c = next(c for c in comments if c.startswith("field=ntilde"))
    lo = float(c.split("min=")[1].split()[0])
    hi = float(c.split("max=")[1].split()[0])
    assert lo == np.nanmin(vals) and hi == np.nanmax(vals)


def test_heatmap_errors(tmp_path):
    fm = sweep_omega(TEMPLATE, GridSpec(Axis("omega", 1, 2, 3)), ACC, "late_time")
    with pytest.raises(UsageError):
        write_heatmap(fm, "g2", tmp_path / "x.ppm")
    with pytest.raises(UsageError):
        write_heatmap(constant_map(), "nope", tmp_path / "x.ppm")


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(MINIMAL + "\n")
    return p


def test_cli_components(cfg_file, capsys):
    assert main(["components", "--config", str(cfg_file)]) == EXIT_OK
    out = dict(l.split("=", 1) for l in capsys.readouterr().out.splitlines())
    assert set(out) == {"E_A", "E_B", "E_AB_re", "E_AB_im", "X_re", "X_im", "X4", "valid_saddle"}
    assert out["valid_saddle"] == "true"
    assert float(out["E_A"]) > 0


def test_cli_report(cfg_file, capsys):
    assert main(["report", "--config", str(cfg_file), "--method", "late_time"]) == EXIT_OK
    out = dict(l.split(" = ", 1) for l in capsys.readouterr().out.splitlines())
    assert out["band"] in {"SeparableCertified", "Indeterminate", "EntangledCertified"}
    assert {"g2", "ntilde", "negativity", "bell_sufficient"} <= set(out)


def test_cli_flux(capsys):
    assert main(["flux", "--kappa", "1", "--u-min", "-40", "--u-max", "40", "--points", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "u,flux"
    assert float(lines[-1].split(",")[1]) == pytest.approx(1 / (48 * math.pi), rel=1e-10)


def test_cli_scan_and_sweep(cfg_file, tmp_path):
    out, ppm = tmp_path / "s.csv", tmp_path / "s.ppm"
    rc = main(["scan", "--config", str(cfg_file), "--t0=-5:5:3", "--xA", "0.5:3:2",
               "--out", str(out), "--heatmap", "ntilde", "--ppm", str(ppm)])
    assert rc == EXIT_OK
    assert read_csv(out).grid.shape == (3, 2)
    assert read_ppm(ppm)[1] == (3, 2)
    rc = main(["sweep", "--config", str(cfg_file), "--axis", "omega", "--min", "0.5",
               "--max", "2", "--points", "4", "--method", "late_time", "--out",
               str(tmp_path / "w.csv")])
    assert rc == EXIT_OK


def test_cli_errors_are_one_line(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(MINIMAL.replace("omega=1", "omega=-1"))
    assert main(["report", "--config", str(bad)]) == EXIT_ERROR
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: ConfigError: ")
    assert main(["report", "--config", str(tmp_path / "missing.cfg")]) == EXIT_ERROR
    assert capsys.readouterr().err.startswith("error: ConfigError")


def test_cli_warning_keeps_exit_zero(tmp_path, capsys):
    p = tmp_path / "w.cfg"
    p.write_text(MINIMAL.replace("omega=1", "omega=4"))
    assert main(["report", "--config", str(p), "--method", "late_time"]) == EXIT_OK
    assert "warning:" in capsys.readouterr().err


def test_cli_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "mirrorcoh.cli", "flux"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
