import json
import math

import numpy as np
import pytest

from conftest import make_model
from maxstable.angular import uniform_model
from maxstable.cli import main


def _run(*argv):
    return main([str(a) for a in argv])


def _write_model(path, model, margins=None):
    doc = model.to_dict() if margins is None else {
        "angular": model.to_dict(),
        "margins": margins,
    }
    path.write_text(json.dumps(doc))
    return str(path)


def _simulate(tmp_path, name="data.csv", n=400, seed=3, model=None):
    out = tmp_path / name
    if model is None:
        model_path = _write_model(tmp_path / "model.json", uniform_model())
    else:
        model_path = _write_model(tmp_path / "model.json", model)
    assert _run("simulate", "--model", model_path, "--n", n, "--seed", seed,
                "--out", out) == 0
    return out


class TestSimulate:
    def test_example_writes_expected_shape(self, tmp_path):
        out = tmp_path / "data.csv"
        assert _run("simulate", "--example", "biv-exponential", "--n", 1000,
                    "--seed", 7, "--out", out) == 0
        rows = np.loadtxt(out, delimiter=",")
        assert rows.shape == (1000, 2)
        manifest = json.loads((tmp_path / "data.csv.manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["options"]["seed"] == 7

    def test_same_seed_is_bitwise_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert _run("simulate", "--example", "exp-pareto", "--n", 200,
                        "--seed", 5, "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_model_file_draws(self, tmp_path):
        out = _simulate(tmp_path, model=make_model(2, 4, seed=1))
        rows = np.loadtxt(out, delimiter=",")
        assert rows.shape == (400, 2)
        assert np.all(rows > 0.0)

    def test_invalid_model_names_violated_constraint(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "d": 2, "k": 3, "vertex_mass": [0.45, 0.35],
            "interior": [{"alpha": [1, 2], "w": 0.1}, {"alpha": [2, 1], "w": 0.1}],
        }))
        code = _run("simulate", "--model", bad, "--n", 10, "--seed", 0,
                    "--out", tmp_path / "x.csv")
        assert code == 2
        assert "R2" in capsys.readouterr().err

    def test_block_maxima_option(self, tmp_path):
        out = tmp_path / "blocks.csv"
        assert _run("simulate", "--example", "exp-pareto", "--n", 200, "--seed", 1,
                    "--block", 20, "--out", out) == 0
        assert np.loadtxt(out, delimiter=",", ndmin=2).shape == (10, 2)


class TestFit:
    def test_record_count_matches_run_length(self, tmp_path):
        data = _simulate(tmp_path)
        chain = tmp_path / "chain.jsonl"
        assert _run("fit", "--data", data, "--family", "simple",
                    "--iterations", 200, "--burnin", 40, "--thin", 2,
                    "--seed", 5, "--out", chain) == 0
        lines = chain.read_text().splitlines()
        meta = json.loads(lines[0])
        assert meta["format"] == "maxstable-chain"
        assert len(lines) - 1 == (200 - 40) // 2
        summary = json.loads((tmp_path / "chain.jsonl.summary.json").read_text())
        assert summary["family"] == "simple"
        assert "degree_pmf" in summary["chains"][0]

    def test_out_of_support_row_exits_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n-3.0,4.0\n")
        code = _run("fit", "--data", bad, "--family", "simple",
                    "--iterations", 10, "--out", tmp_path / "c.jsonl")
        assert code == 3
        assert "row 1" in capsys.readouterr().err

    def test_weibull_without_shape_bounds_exits_2(self, tmp_path):
        data = _simulate(tmp_path)
        code = _run("fit", "--data", data, "--family", "weibull",
                    "--eb", 10, "--eb-estimator", "weibull",
                    "--iterations", 10, "--out", tmp_path / "c.jsonl")
        assert code == 2

    def test_resume_is_bitwise_equal_to_uninterrupted(self, tmp_path):
        raw = tmp_path / "raw.csv"
        assert _run("simulate", "--example", "exp-pareto", "--n", 2000,
                    "--seed", 3, "--out", raw) == 0
        full = tmp_path / "full.jsonl"
        part = tmp_path / "part.jsonl"
        fit_args = ("fit", "--data", raw, "--family", "frechet",
                    "--eb", 20, "--eb-estimator", "frechet-scale",
                    "--burnin", 40, "--thin", 2, "--seed", 5)
        assert _run(*fit_args, "--iterations", 200, "--out", full) == 0
        assert _run(*fit_args, "--iterations", 120, "--out", part) == 0
        assert _run(*fit_args, "--iterations", 200, "--out", part, "--resume") == 0
        assert part.read_bytes() == full.read_bytes()

    def test_resume_with_mismatched_seed_exits_2(self, tmp_path):
        data = _simulate(tmp_path)
        chain = tmp_path / "chain.jsonl"
        assert _run("fit", "--data", data, "--family", "simple",
                    "--iterations", 60, "--seed", 1, "--out", chain) == 0
        code = _run("fit", "--data", data, "--family", "simple",
                    "--iterations", 100, "--seed", 2, "--out", chain, "--resume")
        assert code == 2

    def test_multichain_writes_distinct_files(self, tmp_path):
        data = _simulate(tmp_path)
        out = tmp_path / "multi.jsonl"
        assert _run("fit", "--data", data, "--family", "simple",
                    "--iterations", 80, "--burnin", 20, "--seed", 4,
                    "--chains", 2, "--out", out) == 0
        c0 = (tmp_path / "multi.c0.jsonl").read_text().splitlines()
        c1 = (tmp_path / "multi.c1.jsonl").read_text().splitlines()
        assert len(c0) == len(c1)
        assert c0[1:] != c1[1:]

    def test_threaded_chains_match_serial(self, tmp_path, monkeypatch):
        data = _simulate(tmp_path)
        args = ("fit", "--data", data, "--family", "simple",
                "--iterations", 60, "--seed", 4, "--chains", 2)
        assert _run(*args, "--out", tmp_path / "serial.jsonl") == 0
        monkeypatch.setenv("MAXSTABLE_THREADS", "2")
        assert _run(*args, "--out", tmp_path / "threaded.jsonl") == 0
        for index in range(2):
            serial = (tmp_path / f"serial.c{index}.jsonl").read_bytes()
            threaded = (tmp_path / f"threaded.c{index}.jsonl").read_bytes()
            assert serial == threaded


class TestDiagnose:
    def _fitted_chain(self, tmp_path, model, n=300, iterations=400):
        data = _simulate(tmp_path, model=model, n=n)
        chain = tmp_path / "chain.jsonl"
        assert _run("fit", "--data", data, "--family", "simple",
                    "--iterations", iterations, "--burnin", 100, "--thin", 2,
                    "--seed", 6, "--out", chain) == 0
        return chain

    def test_summary_only_without_truth(self, tmp_path):
        chain = self._fitted_chain(tmp_path, make_model(2, 4, seed=2))
        out = tmp_path / "metrics.json"
        assert _run("diagnose", "--chain", chain, "--out", out) == 0
        doc = json.loads(out.read_text())
        assert "summary" in doc
        assert "metrics" not in doc

    def test_identical_truth_chain_gives_near_zero_metrics(self, tmp_path):
        # a chain whose only state is exactly the truth model
        truth = make_model(2, 4, seed=8)
        chain = tmp_path / "exact.jsonl"
        meta = {"format": "maxstable-chain", "d": 2, "family": "simple",
                "chain": 0, "seed": 0, "burnin": 0, "thinning": 1, "iterations": 1}
        record = {"iter": 1, "k": 4, "phi": list(map(float, truth.interior_weight)),
                  "theta": None, "logpost": 0.0}
        chain.write_text(json.dumps(meta) + "\n" + json.dumps(record) + "\n")
        truth_path = _write_model(tmp_path / "truth.json", truth)
        out = tmp_path / "metrics.json"
        assert _run("diagnose", "--chain", chain, "--truth", truth_path,
                    "--hellinger-samples", 500, "--out", out) == 0
        metrics = json.loads(out.read_text())["metrics"]
        assert metrics["ks_angular2"] == pytest.approx(0.0, abs=1e-12)
        assert metrics["l1_angular"] == pytest.approx(0.0, abs=1e-9)
        hel = metrics["hellinger"]
        assert abs(hel["squared"]) <= 3 * hel["se"] + 1e-12
        assert not hel["support_flag"]

    def test_fitted_chain_close_to_truth(self, tmp_path):
        truth = make_model(2, 4, seed=2)
        chain = self._fitted_chain(tmp_path, truth)
        truth_path = _write_model(tmp_path / "truth.json", truth)
        out = tmp_path / "metrics.json"
        assert _run("diagnose", "--chain", chain, "--truth", truth_path,
                    "--hellinger-samples", 500, "--seed", 11, "--out", out) == 0
        metrics = json.loads(out.read_text())["metrics"]
        assert 0.0 <= metrics["ks_angular2"] < 0.3
        assert 0.0 <= metrics["hellinger"]["value"] < 0.5

    def test_missing_chain_exits_2(self, tmp_path):
        assert _run("diagnose", "--chain", tmp_path / "missing.jsonl",
                    "--out", tmp_path / "m.json") == 2

    def test_malformed_line_exits_4_with_line_number(self, tmp_path, capsys):
        chain = self._fitted_chain(tmp_path, make_model(2, 4, seed=2),
                                   n=100, iterations=200)
        text = chain.read_text().splitlines()
        text[3] = "{broken"
        chain.write_text("\n".join(text) + "\n")
        code = _run("diagnose", "--chain", chain, "--out", tmp_path / "m.json")
        assert code == 4
        assert "line 4" in capsys.readouterr().err

    def test_svg_traces_written(self, tmp_path):
        chain = self._fitted_chain(tmp_path, make_model(2, 4, seed=2),
                                   n=100, iterations=200)
        svg_dir = tmp_path / "charts"
        assert _run("diagnose", "--chain", chain, "--out", tmp_path / "m.json",
                    "--svg-dir", svg_dir) == 0
        for name in ("logpost-trace.svg", "degree-trace.svg"):
            text = (svg_dir / name).read_text()
            assert text.startswith("<svg ")
            assert "polyline" in text


class TestExperiment:
    def _config(self, tmp_path, **overrides):
        doc = {
            "generator": {"kind": "within-model",
                          "model": make_model(2, 4, seed=9).to_dict()},
            "n_grid": [30, 60],
            "seeds": [0, 1],
            "sampler": {"iterations": 200, "burnin": 50, "thinning": 2},
            "priors": {"degree": {"q": 0.5}},
            "metrics": ["ks_angular2"],
        }
        doc.update(overrides)
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(doc))
        return path

    def test_end_to_end_artifacts(self, tmp_path):
        config = self._config(tmp_path)
        out_dir = tmp_path / "out"
        assert _run("experiment", "--config", config, "--out-dir", out_dir) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["axis_name"] == "n"
        assert set(report["medians"]["ks_angular2"]) == {"30", "60"}
        csv_lines = (out_dir / "report.csv").read_text().splitlines()
        assert len(csv_lines) == 2
        assert csv_lines[0].startswith("ks_angular2,30,")
        assert (out_dir / "trajectory-ks_angular2.svg").read_text().startswith("<svg ")
        assert (out_dir / "manifest.json").exists()

    def test_empty_seeds_gives_empty_report(self, tmp_path):
        config = self._config(tmp_path, seeds=[])
        out_dir = tmp_path / "out"
        assert _run("experiment", "--config", config, "--out-dir", out_dir) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["cells"] == []

    def test_unknown_generator_exits_2(self, tmp_path, capsys):
        config = self._config(tmp_path, generator={"kind": "example", "name": "mystery"})
        assert _run("experiment", "--config", config, "--out-dir", tmp_path / "o") == 2
        assert "mystery" in capsys.readouterr().err

    def test_missing_required_key_exits_2(self, tmp_path):
        config = tmp_path / "exp.json"
        config.write_text(json.dumps({"n_grid": [10]}))
        assert _run("experiment", "--config", config, "--out-dir", tmp_path / "o") == 2


class TestRerun:
    def test_simulate_rerun_is_bitwise(self, tmp_path):
        out = tmp_path / "data.csv"
        assert _run("simulate", "--example", "exp-pareto", "--n", 300,
                    "--seed", 12, "--out", out) == 0
        first = out.read_bytes()
        assert _run("rerun", tmp_path / "data.csv.manifest.json") == 0
        assert out.read_bytes() == first

    def test_fit_rerun_is_bitwise(self, tmp_path):
        data = _simulate(tmp_path)
        chain = tmp_path / "chain.jsonl"
        args = ("fit", "--data", data, "--family", "simple",
                "--iterations", 100, "--burnin", 20, "--seed", 5, "--out", chain)
        assert _run(*args) == 0
        first = chain.read_bytes()
        summary_first = (tmp_path / "chain.jsonl.summary.json").read_bytes()
        assert _run("rerun", tmp_path / "chain.jsonl.manifest.json") == 0
        assert chain.read_bytes() == first
        assert (tmp_path / "chain.jsonl.summary.json").read_bytes() == summary_first

    def test_changed_input_exits_4(self, tmp_path, capsys):
        data = _simulate(tmp_path)
        chain = tmp_path / "chain.jsonl"
        assert _run("fit", "--data", data, "--family", "simple",
                    "--iterations", 40, "--seed", 5, "--out", chain) == 0
        data.write_text("1.0,1.0\n")
        code = _run("rerun", tmp_path / "chain.jsonl.manifest.json")
        assert code == 4
        assert "changed" in capsys.readouterr().err

    def test_malformed_manifest_exits_4(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"command": "fit"}))
        assert _run("rerun", path) == 4
