import filecmp
import json
import os
import shutil

import pytest

from conftest import golden_dir
from semdiff.cli import main


def _tree(root):
    out = {}
    for d, _, files in os.walk(root):
        for f in files:
            p = os.path.join(d, f)
            out[os.path.relpath(p, root)] = p
    return out


def _assert_same_tree(a, b):
    ta, tb = _tree(a), _tree(b)
    assert sorted(ta) == sorted(tb)
    diff = [k for k in ta if not filecmp.cmp(ta[k], tb[k], shallow=False)]
    assert diff == []


@pytest.fixture(scope="module")
def pipeline_out(tmp_path_factory, sample_dir):
    out = tmp_path_factory.mktemp("run") / "out"
    assert main(["pipeline", "--config", f"{sample_dir}/run.toml", "-o", str(out)]) == 0
    return out


def test_pipeline_matches_golden(pipeline_out):
    _assert_same_tree(golden_dir(), pipeline_out)


def test_every_output_has_a_manifest(pipeline_out):
    for layer in ("aps", "dblp"):
        for name in ("records.jsonl", "indexed.jsonl", "trend.csv", "fits.csv"):
            m = json.loads((pipeline_out / layer / f"{name}.manifest.json").read_text())
            assert m["config_hash"] and name in m["outputs"]
        for d in ("graph", "profiles"):
            assert (pipeline_out / layer / d / "manifest.json").exists()
    assert json.loads((pipeline_out / "report" / "manifest.json").read_text())["stage"] == "report"


def test_stagewise_run_equals_pipeline(tmp_path, sample_dir, pipeline_out):
    d = tmp_path
    cfg = f"{sample_dir}/run.toml"
    steps = [
        ["ingest", f"{sample_dir}/dblp.xml", "--format", "xml", "--years", "2000:2004", "--layer", "dblp", "-o", f"{d}/records.jsonl"],
        ["index", "--layer", "dblp", "--records", f"{d}/records.jsonl", "-o", f"{d}/indexed.jsonl"],
        ["trend", "--indexed", f"{d}/indexed.jsonl", "-o", f"{d}/trend.csv"],
        ["graph", "--records", f"{d}/records.jsonl", "--layer", "dblp", "-o", f"{d}/graph"],
        ["profile", "--indexed", f"{d}/indexed.jsonl", "--graph", f"{d}/graph", "-o", f"{d}/profiles"],
        ["fit", "--profiles", f"{d}/profiles", "--graph", f"{d}/graph", "--trend", f"{d}/trend.csv", "-o", f"{d}/fits.csv"],
    ]
    for argv in steps:
        assert main(argv + ["--config", cfg]) == 0, argv
    for name in ("records.jsonl", "indexed.jsonl", "trend.csv", "fits.csv"):
        assert (d / name).read_bytes() == (pipeline_out / "dblp" / name).read_bytes(), name


def test_fit_before_profile(tmp_path, capsys, pipeline_out):
    shutil.copytree(pipeline_out / "dblp" / "graph", tmp_path / "graph")
    code = main(["fit", "--profiles", str(tmp_path / "profiles"), "--graph", str(tmp_path / "graph"),
                 "--trend", str(pipeline_out / "dblp" / "trend.csv"), "-o", str(tmp_path / "fits.csv")])
    assert code != 0
    assert "semdiff profile" in capsys.readouterr().err


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('seed = 1\n[fit]\ntop_k = -1.5\n')
    assert main(["pipeline", "--config", str(bad)]) == 2
    assert f"{bad}:3:" in capsys.readouterr().err


def test_missing_source(tmp_path, capsys):
    assert main(["ingest", str(tmp_path / "none.jsonl"), "-o", str(tmp_path / "r.jsonl")]) == 1


def test_report_single_layer(tmp_path, pipeline_out):
    assert main(["report", "--fits", str(pipeline_out / "aps" / "fits.csv"), "--layer-a", "aps", "--top-n", "2", "-o", str(tmp_path)]) == 0
    top = (tmp_path / "aps_top_members.csv").read_text().splitlines()
    assert len(top) == 3
    assert not (tmp_path / "comparison.csv").exists()
    marks = (tmp_path / "aps_coauthors_authority.csv").read_text()
    assert "Wei Wang" in marks and ",cross" in marks


def test_parallel_workers_same_output(tmp_path, sample_dir, monkeypatch):
    monkeypatch.setenv("SEMDIFF_WORKERS", "2")
    assert main(["pipeline", "--config", f"{sample_dir}/run.toml", "-o", str(tmp_path / "out")]) == 0
    _assert_same_tree(golden_dir(), tmp_path / "out")


def test_simulate(tmp_path, sample_dir):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", f"{sample_dir}/sim.toml", "-o", str(out)]) == 0
    assert (out / "ground_truth.csv").read_text().count("\n") == 101
    first = (out / "trajectory.csv").read_bytes()
    assert main(["simulate", "--config", f"{sample_dir}/sim.toml", "-o", str(out)]) == 0
    assert (out / "trajectory.csv").read_bytes() == first
    assert json.loads((out / "manifest.json").read_text())["parameters"]["seed"] == 7


def test_simulate_without_block(tmp_path, sample_dir):
    assert main(["simulate", "--config", f"{sample_dir}/run.toml", "-o", str(tmp_path)]) == 2
