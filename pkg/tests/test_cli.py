import json
import math
import subprocess
import sys

import pytest

from lengthspec import cli, spectrum
from lengthspec.config import RunConfig, apply_override
from lengthspec.errors import ConfigurationError


def write_config(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def cylinder_cfg(tmp_path):
    return write_config(tmp_path / "cyl.json", {
        "model": {"kind": "cylinder", "core_length": 2.0}, "max_word_length": 3,
        "analysis": {"s": [1.0], "trace": {"center": 2.0, "width": 1.0}}})


@pytest.fixture
def schottky_cfg(tmp_path, pair):
    return write_config(tmp_path / "sch.json", {
        "model": {"kind": "schottky", "generators": [m.tolist() for m in pair]},
        "max_word_length": 2})


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def records(path):
    lines = path.read_text().splitlines()
    assert "created" in json.loads(lines[0])
    return [json.loads(l) for l in lines[1:]]


# --- configuration ---------------------------------------------------------

def test_defaults_and_hash_stability():
    a = RunConfig.from_dict({"model": {"kind": "cylinder", "core_length": 2}, "max_word_length": 3})
    b = RunConfig.from_dict({"max_word_length": 3, "model": {"core_length": 2, "kind": "cylinder"}})
    assert a.hash == b.hash
    assert a.tolerances["newton"] == 1e-10
    c = RunConfig.from_dict({"model": {"kind": "cylinder", "core_length": 2},
                             "max_word_length": 3, "output_dir": "elsewhere", "workers": 3})
    assert c.hash == a.hash
    d = RunConfig.from_dict({"model": {"kind": "cylinder", "core_length": 2},
                             "max_word_length": 3, "seed": 1})
    assert d.hash != a.hash


@pytest.mark.parametrize("data", [
    {"model": {"kind": "cylinder"}, "max_word_length": 3},
    {"model": {"kind": "torus"}, "max_word_length": 3},
    {"model": {"kind": "halfplane"}, "max_word_length": 0},
    {"model": {"kind": "halfplane"}, "max_word_length": 2, "tolerances": {"newton": -1}},
    {"model": {"kind": "halfplane"}, "max_word_length": 2, "bogus": 1},
    {"model": {"kind": "halfplane"}, "max_word_length": 2, "counting_convention": "all"},
])
def test_invalid_configs(data):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(data)


def test_overrides():
    data = {"model": {"kind": "cylinder", "core_length": 2}}
    apply_override(data, "model.core_length=3.5")
    apply_override(data, "analysis.trace={\"center\": 1, \"width\": 2}")
    apply_override(data, "output_dir=run1")
    assert data["model"]["core_length"] == 3.5
    assert data["analysis"]["trace"]["width"] == 2
    assert data["output_dir"] == "run1"
    with pytest.raises(ConfigurationError):
        apply_override(data, "novalue")


# --- enumerate -------------------------------------------------------------

def test_enumerate_cylinder(tmp_path, cylinder_cfg, capsys):
    code, out, _ = run(["enumerate", "--config", cylinder_cfg, "--out", str(tmp_path / "o")],
                       capsys)
    assert code == 0
    n, T = out.strip().split()
    assert n == "orbits=1"
    assert float(T.split("=")[1]) >= 6
    spec = spectrum.load(tmp_path / "o" / "spectrum.csv")
    assert len(spec.primitives) == 1
    assert spec.metadata["seed"] == "0"
    assert (tmp_path / "o" / "orbits.npz").exists()


def test_enumerate_schottky_length_two(tmp_path, schottky_cfg, capsys):
    code, out, _ = run(["enumerate", "--config", schottky_cfg, "--out", str(tmp_path / "o"),
                        "--workers", "1"], capsys)
    assert code == 0
    assert out.startswith("orbits=4 ")
    orbits = cli.load_orbits(tmp_path / "o" / "orbits.npz")
    assert [o.word for o in orbits] == ["a", "b", "ab", "aB"]


def test_enumerate_exact_method_matches_orbits(tmp_path, schottky_cfg, capsys):
    run(["enumerate", "--config", schottky_cfg, "--out", str(tmp_path / "o")], capsys)
    run(["enumerate", "--config", schottky_cfg, "--out", str(tmp_path / "e"),
         "--set", "method=exact"], capsys)
    a = spectrum.load(tmp_path / "o" / "spectrum.csv")
    b = spectrum.load(tmp_path / "e" / "spectrum.csv")
    for x, y in zip(a.entries, b.entries):
        assert x.word == y.word
        assert x.total_length == pytest.approx(y.total_length, rel=1e-9)


def test_enumerate_rejects_non_schottky(tmp_path, capsys):
    cfg = write_config(tmp_path / "bad.json", {
        "model": {"kind": "schottky",
                  "generators": [[[2, 0], [0, 0.5]], [[1.5, 0.5], [0.5, 0.8333333333333334]]]},
        "max_word_length": 2})
    code, _, err = run(["enumerate", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 1
    assert "Schottky validation failed" in err


def test_enumerate_nonconvergence_exit_code(tmp_path, cylinder_cfg, capsys):
    code, _, err = run(["enumerate", "--config", cylinder_cfg, "--out", str(tmp_path / "o"),
                        "--set", "tolerances.newton=1e-18"], capsys)
    assert code == 2
    assert "a:" in err


def test_halfplane_has_nothing_to_enumerate(tmp_path, capsys):
    cfg = write_config(tmp_path / "hp.json", {"model": {"kind": "halfplane"},
                                              "max_word_length": 2})
    code, _, _ = run(["enumerate", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 1


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run(["validate-model", "--config", str(tmp_path / "nope.json")], capsys)
    assert code == 1 and "cannot read" in err


# --- analyze ---------------------------------------------------------------

@pytest.fixture
def cylinder_run(tmp_path, cylinder_cfg, capsys):
    out = tmp_path / "o"
    run(["enumerate", "--config", cylinder_cfg, "--out", str(out)], capsys)
    return out


def test_analyze_zeta_and_trace(cylinder_run, cylinder_cfg, capsys):
    code, _, _ = run(["analyze", "--config", cylinder_cfg, "--out", str(cylinder_run),
                      "--spectrum", str(cylinder_run / "spectrum.csv"),
                      "--task", "zeta", "--task", "trace"], capsys)
    assert code == 0
    recs = records(cylinder_run / "results.jsonl")
    plain = [r for r in recs if r["task"] == "zeta" and r["kind"] == "plain"][0]
    assert abs(plain["value"][0] - 1.1565176) < 1e-7
    trace = [r for r in recs if r["task"] == "trace"][0]
    assert abs(trace["value"] - 0.850918) < 1e-6
    assert all(r["config_hash"] == RunConfig.load(cylinder_cfg).hash for r in recs)


def test_analyze_entropy_on_synthetic(tmp_path, cylinder_cfg, synthetic, capsys):
    path = tmp_path / "syn.csv"
    spectrum.save(synthetic, path)
    code, _, _ = run(["analyze", "--config", cylinder_cfg, "--out", str(tmp_path / "a"),
                      "--spectrum", str(path), "--task", "entropy", "--task", "pot"], capsys)
    assert code == 0
    recs = records(tmp_path / "a" / "results.jsonl")
    assert abs(recs[0]["h"] - 0.5) <= 0.05
    lines = (tmp_path / "a" / "pot_ratio.csv").read_text().splitlines()
    assert lines[0].startswith("# created:") and lines[1] == "T,ratio"


def test_analyze_horizon_exit_code(cylinder_run, cylinder_cfg, capsys):
    code, _, err = run(["analyze", "--config", cylinder_cfg, "--out", str(cylinder_run),
                        "--spectrum", str(cylinder_run / "spectrum.csv"), "--task", "trace",
                        "--set", 'analysis.trace={"center": 8, "width": 2}'], capsys)
    assert code == 3 and "horizon" in err


def test_analyze_separation_needs_states(tmp_path, schottky_cfg, capsys):
    out = tmp_path / "e"
    run(["enumerate", "--config", schottky_cfg, "--out", str(out), "--set", "method=exact"],
        capsys)
    code, _, err = run(["analyze", "--config", schottky_cfg, "--out", str(out),
                        "--spectrum", str(out / "spectrum.csv"), "--task", "separation"], capsys)
    assert code == 1 and "phase states" in err


def test_analyze_corollary_uses_curvature(tmp_path, schottky_cfg, capsys):
    out = tmp_path / "o"
    run(["enumerate", "--config", schottky_cfg, "--out", str(out)], capsys)
    code, _, _ = run(["analyze", "--config", schottky_cfg, "--out", str(out),
                      "--spectrum", str(out / "spectrum.csv"), "--task", "corollary",
                      "--set", "analysis.corollary.h=0.7"], capsys)
    assert code == 0
    rec = records(out / "results.jsonl")[0]
    assert rec["summary"] == "implies point spectrum, s0 >= 0.7"


def test_validate_model(tmp_path, capsys):
    cfg = write_config(tmp_path / "p.json", {
        "model": {"kind": "perturbed", "base": {"kind": "cylinder", "core_length": 2.0},
                  "center": [0.3, 3.0], "radius": 0.9, "amplitude": 0.05},
        "max_word_length": 1})
    code, out, _ = run(["validate-model", "--config", cfg], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["k2"] <= 1.0 <= rep["k1"] and rep["perturbed"]


def test_validate_model_rejects_positive_curvature(tmp_path, capsys):
    cfg = write_config(tmp_path / "p.json", {
        "model": {"kind": "perturbed", "base": {"kind": "halfplane"},
                  "center": [1.0, 0.0], "radius": 0.3, "amplitude": 0.19},
        "max_word_length": 1})
    code, _, err = run(["validate-model", "--config", cfg], capsys)
    assert code == 1 and "not negatively curved" in err


def test_determinism_across_runs_and_workers(tmp_path, schottky_cfg, capsys):
    bodies = []
    for name, workers in (("r1", "1"), ("r2", "2")):
        out = tmp_path / name
        run(["enumerate", "--config", schottky_cfg, "--out", str(out), "--workers", workers,
             "--set", "max_word_length=6"], capsys)
        run(["analyze", "--config", schottky_cfg, "--out", str(out), "--set", "max_word_length=6",
             "--spectrum", str(out / "spectrum.csv"), "--task", "all",
             "--set", 'analysis.trace={"center": 4, "width": 3}'], capsys)
        bodies.append([(out / f).read_text().splitlines()[1:]
                       for f in ("spectrum.csv", "results.jsonl", "pot_ratio.csv")])
    assert bodies[0] == bodies[1]


def test_console_script(tmp_path, cylinder_cfg):
    proc = subprocess.run([sys.executable, "-m", "lengthspec.cli", "enumerate", "--config",
                           cylinder_cfg, "--out", str(tmp_path / "o")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("orbits=1 horizon=")
