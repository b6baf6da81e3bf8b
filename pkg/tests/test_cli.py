"""Command-line interface: bundle workflow and exit codes."""

import json

import numpy as np
import pytest

import freqpde as fp
from freqpde.cli import run


@pytest.fixture
def heat_bundle(tmp_path):
    """A small closed-form heat-equation field written as a bundle."""
    n, m = 96, 33
    x = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    t = np.linspace(0.0, 2.0, m)
    u0 = np.exp(np.sin(x)) + 0.5 * np.cos(2 * x + 0.7)
    k = 2 * np.pi * np.fft.fftfreq(n, d=x[1])
    uhat0 = np.fft.fft(u0)
    u = np.stack(
        [np.fft.ifft(uhat0 * np.exp(-0.1 * k * k * tj)).real for tj in t],
        axis=-1)
    f = fp.Field(u, (x[1], t[1]), ("x", "t"))
    p = tmp_path / "heat.fpb"
    fp.write_field(f, p, metadata={"noise": {"alpha": 0.0}})
    return p


def test_synth_writes_bundle(tmp_path, capsys):
    out = tmp_path / "b.fpb"
    code = run(["synth", "--equation", "burgers1d", "--out", str(out),
                "--points", "64,16", "--extents", "16,0.5", "--substeps", "20"])
    assert code == 0
    f = fp.read_field(out)
    assert f.dims == (64, 16)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["equation"] == "burgers1d"
    assert meta["noise"]["alpha"] == 0.0


def test_noise_roundtrip(tmp_path, heat_bundle):
    out = tmp_path / "noisy.fpb"
    code = run(["noise", "--in", str(heat_bundle), "--out", str(out),
                "--alpha", "0.2", "--seed", "5"])
    assert code == 0
    clean = fp.read_field(heat_bundle)
    noisy = fp.read_field(out)
    want = fp.inject_noise(clean, fp.NoiseSpec(alpha=0.2, seed=5))
    assert np.array_equal(noisy.data, want.data)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["noise"] == {"alpha": 0.2, "seed": 5}


def test_identify_selects_heat_term(tmp_path, heat_bundle, capsys):
    result_path = tmp_path / "result.json"
    code = run(["identify", "--in", str(heat_bundle),
                "--out", str(result_path),
                "--diff", "fd", "--fd-order", "4", "--cutoff", "10,5"])
    assert code == 0
    blob = json.loads(result_path.read_text())
    terms = {e["term"]: e["coefficient"] for e in blob["selected"]}
    assert set(terms) == {"u_xx"}
    assert abs(terms["u_xx"] - 0.1) < 1e-3
    assert "u_xx" in capsys.readouterr().out


def test_identify_stlm_method(tmp_path, heat_bundle):
    result_path = tmp_path / "r.json"
    code = run(["identify", "--in", str(heat_bundle), "--out", str(result_path),
                "--diff", "fd", "--fd-order", "4", "--cutoff", "10,5",
                "--method", "stlm", "--k", "1"])
    assert code == 0
    blob = json.loads(result_path.read_text())
    assert blob["method"] == "stlm"
    assert [e["term"] for e in blob["selected"]] == ["u_xx"]


def test_config_file_provides_defaults(tmp_path, heat_bundle):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"cutoff": "10,5", "diff": "fd"}))
    code = run(["--config", str(cfg), "identify", "--in", str(heat_bundle),
                "--fd-order", "4"])
    assert code == 0


def test_usage_error_exits_1(capsys):
    assert run(["synth", "--equation", "nosuch", "--out", "x.fpb"]) == 1
    assert run(["identify"]) == 1  # missing required --in
    assert "usage error" in capsys.readouterr().err


def test_pipeline_error_exits_2(tmp_path, heat_bundle, capsys):
    missing = tmp_path / "missing.fpb"
    assert run(["identify", "--in", str(missing)]) == 2
    # cutoff too large for the 33-frame time axis
    assert run(["identify", "--in", str(heat_bundle), "--diff", "fd",
                "--cutoff", "10,40"]) == 2
    assert "error" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert run(["--help"]) == 0
    assert "freqpde" in capsys.readouterr().out
