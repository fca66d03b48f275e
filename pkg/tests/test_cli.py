from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from lifesat.cli import main
from lifesat.data import write_csv

from .conftest import lifewell_synthetic


@pytest.fixture
def config_path(tmp_path):
    config = {
        "synthetic": {"n_rows": 300, "n_informative": 2, "n_noise": 3,
                      "seed": 5},
        "n_seeds": 1,
        "seeds": [21],
        "selection_mode": "rfecv",
        "rfecv_estimator": {"n_estimators": 10, "max_depth": 4},
        "roster": [
            {"name": "RF", "kind": "random_forest",
             "params": {"n_estimators": 10, "max_depth": 5}},
            {"name": "GB", "kind": "gradient_boosting",
             "params": {"n_estimators": 20, "learning_rate": 0.3,
                        "max_depth": 1}},
            {"name": "LGB", "kind": "gradient_boosting",
             "params": {"n_estimators": 15, "growth_mode": "leafwise",
                        "num_leaves": 6}},
        ],
        "output_dir": str(tmp_path / "out"),
        "figures": True,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


class TestTrainCommand:
    def test_writes_artifact_and_reports(self, config_path, tmp_path, capsys):
        exit_code = main(["train", "--config", str(config_path)])
        assert exit_code == 0
        out = tmp_path / "out"
        assert (out / "artifact.json").exists()
        assert (out / "report.csv").exists()
        assert (out / "report.json").exists()
        assert (out / "error_analysis.csv").exists()
        assert (out / "audit_log.json").exists()
        # figures rendered alongside the delimited output
        assert (out / "metrics.png").exists()
        assert (out / "roc_curves.png").exists()
        assert (out / "rfecv_curve.png").exists()
        assert (out / "error_analysis.png").exists()
        captured = capsys.readouterr().out
        assert "Ensemble" in captured

    def test_missing_config_fails_cleanly(self, capsys):
        exit_code = main(["train", "--config", "/nonexistent.json"])
        assert exit_code == 1
        assert "error" in capsys.readouterr().err


class TestExplainCommand:
    def test_prints_rules_and_probabilities(self, lifewell_artifact,
                                            tmp_path, capsys):
        artifact = lifewell_artifact["artifact"]
        answers = {}
        for code in artifact.input_codes:
            col = artifact.schema.column(code)
            answers[code] = 2.0 if col.kind == "ordinal" else 40.0
            if col.kind == "ordinal":
                answers[code] = min(answers[code],
                                    len(col.categories) - 1.0)
        row_path = tmp_path / "row.json"
        row_path.write_text(json.dumps(answers))
        exit_code = main([
            "explain", "--artifact", str(lifewell_artifact["path"]),
            "--row", str(row_path), "--n-samples", "400", "--seed", "3",
        ])
        assert exit_code == 0
        out = capsys.readouterr().out
        p0 = float(out.split("P(Discontent) = ")[1].split()[0])
        p1 = float(out.split("P(Content)    = ")[1].split()[0])
        assert p0 + p1 == pytest.approx(1.0, abs=1e-6)
        assert "<=" in out or ">" in out


class TestEvaluateCommand:
    def test_scores_printed_for_each_model(self, lifewell_artifact, tmp_path,
                                           capsys):
        eval_csv = tmp_path / "eval.csv"
        write_csv(lifewell_synthetic(n=80, seed=23), eval_csv)
        exit_code = main([
            "evaluate", "--artifact", str(lifewell_artifact["path"]),
            "--data", str(eval_csv),
        ])
        assert exit_code == 0
        out = capsys.readouterr().out
        for name in ("RF", "GB", "LGB", "Ensemble"):
            assert name in out
        assert "accuracy" in out


class TestTextgenCommand:
    def test_exports_records(self, tmp_path, capsys):
        data_csv = tmp_path / "data.csv"
        write_csv(lifewell_synthetic(n=12, seed=2), data_csv)
        out_path = tmp_path / "sentences.jsonl"
        exit_code = main([
            "textgen", "--data", str(data_csv), "--output", str(out_path),
        ])
        assert exit_code == 0
        lines = out_path.read_text().strip().splitlines()
        assert len(lines) == 12
        record = json.loads(lines[0])
        assert set(record) == {"row_id", "sentence", "label"}


class TestAblateAndCohort:
    def test_ablate_writes_tables(self, config_path, tmp_path):
        exit_code = main([
            "ablate", "--config", str(config_path), "--which", "resampling",
            "--output", str(tmp_path / "ablate"),
        ])
        assert exit_code == 0
        csv_path = tmp_path / "ablate" / "ablation_resampling.csv"
        assert csv_path.exists()
        header = csv_path.read_text().splitlines()[0]
        for mode in ("none", "over_only", "under_only", "dual"):
            assert mode in header

    def test_cohort_writes_radar_data(self, tmp_path):
        from .test_pipeline import bracket_dataset

        data_csv = tmp_path / "cohort.csv"
        ds = bracket_dataset(n=500, seed=1)
        write_csv(ds, data_csv)
        schema_path = tmp_path / "schema.json"
        ds.schema.to_file(schema_path)
        config = {
            "data_path": str(data_csv),
            "schema_path": str(schema_path),
            "n_seeds": 1,
            "seeds": [21],
            "rfecv_estimator": {"n_estimators": 10, "max_depth": 4},
            "output_dir": str(tmp_path / "cohort_out"),
            "figures": True,
        }
        config_path = tmp_path / "cohort_config.json"
        config_path.write_text(json.dumps(config))
        exit_code = main(["cohort", "--config", str(config_path),
                          "--top-k", "2"])
        assert exit_code == 0
        data = json.loads((tmp_path / "cohort_out" / "cohorts.json")
                          .read_text())
        assert set(data) == {"young age", "early adulthood", "middle age",
                             "old age"}
        assert (tmp_path / "cohort_out" / "cohorts.png").exists()


class TestUsage:
    def test_unknown_subcommand_exits_nonzero_with_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_serve_without_artifact_fails_cleanly(self, capsys, monkeypatch):
        monkeypatch.delenv("LIFESAT_ARTIFACT", raising=False)
        exit_code = main(["serve", "--artifact", ""])
        assert exit_code == 1
        assert "artifact" in capsys.readouterr().err

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
