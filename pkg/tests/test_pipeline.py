import json
import math
from dataclasses import replace

import numpy as np
import pytest

from amrp.errors import ConfigError
from amrp.pipeline import (
    PipelineConfig,
    StageError,
    SyntheticConfig,
    build_epochs,
    dumps,
    load_sessions,
    run_pipeline,
    split_rows,
)
from amrp.planner import DayBudget, validate_plan

FAST_MODELS = {"forest": {"n_trees": 15}, "adaptive-boost": {"n_rounds": 15},
               "gradient-boost": {"n_rounds": 15}}
OUTPUTS = ("affectivity.json", "recommendation.json", "menu_plan.json", "metrics.json",
           "menu_plan.txt", "ensemble.amrp-model")


def small_config(out, **kw):
    return PipelineConfig(output_dir=str(out), synthetic=SyntheticConfig(subjects=2),
                          classifiers=FAST_MODELS, **kw)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    return run_pipeline(small_config(out)), out


class TestConfig:
    def test_defaults_round_trip(self):
        cfg = PipelineConfig()
        assert PipelineConfig.from_dict(cfg.to_dict(), env={}) == cfg

    def test_missing_food_db_names_field(self, tmp_path):
        cfg = PipelineConfig(food_db=str(tmp_path / "absent.json"))
        with pytest.raises(ConfigError) as exc:
            cfg.validate()
        assert exc.value.field == "food_db"

    def test_missing_session_file(self, tmp_path):
        cfg = PipelineConfig(sessions=({"recording": str(tmp_path / "r.csv"),
                                        "labels": str(tmp_path / "l.csv")},))
        with pytest.raises(ConfigError) as exc:
            cfg.validate()
        assert exc.value.field == "sessions[0].recording"

    def test_env_override(self, tmp_path):
        db = tmp_path / "db.json"
        db.write_text("[]")
        cfg = PipelineConfig.from_dict({"output_dir": "x"},
                                       env={"AMRP_FOOD_DB": str(db), "AMRP_OUTPUT_DIR": "y"})
        assert cfg.food_db == str(db) and cfg.output_dir == "y"

    def test_nested_keys(self):
        cfg = PipelineConfig.from_dict({
            "split": {"train_fraction": 0.8, "by_subject": True},
            "recommend": {"weights": [0.5, 0.25, 0.25], "top": 3},
            "preprocess": {"band": [1, 40]},
            "budget": DayBudget().to_dict(),
        }, env={})
        assert cfg.train_fraction == 0.8 and cfg.split_by_subject
        assert cfg.weights == (0.5, 0.25, 0.25) and cfg.top == 3
        assert cfg.cleaning.band == (1, 40)

    @pytest.mark.parametrize("doc,field", [
        ({"bogus": 1}, "bogus"),
        ({"schema_version": 2}, "schema_version"),
        ({"split": {"ratio": 0.5}}, "split"),
        ({"recommend": {"k": 3}}, "recommend"),
    ])
    def test_rejects(self, doc, field):
        with pytest.raises(ConfigError) as exc:
            PipelineConfig.from_dict(doc, env={})
        assert exc.value.field == field

    @pytest.mark.parametrize("kw,field", [
        ({"channels": "occipital"}, "channels"),
        ({"train_fraction": 1.0}, "split.train_fraction"),
        ({"weights": (0.5, 0.5)}, "recommend.weights"),
        ({"top": 0}, "recommend.top"),
        ({"synthetic": SyntheticConfig(profile="beta")}, "synthetic.profile"),
    ])
    def test_validate(self, kw, field):
        with pytest.raises(ConfigError) as exc:
            replace(PipelineConfig(), **kw).validate()
        assert exc.value.field == field

    def test_load(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"seed": 9}))
        assert PipelineConfig.load(p, env={}).seed == 9
        with pytest.raises(ConfigError):
            PipelineConfig.load(tmp_path / "missing.json")

    def test_seeds_independent(self):
        a, b = PipelineConfig(seed=1).seeds(), PipelineConfig(seed=2).seeds()
        assert len(set(a)) == 3 and a != b
        assert PipelineConfig(seed=1).seeds() == a


class TestJson:
    def test_rounding_and_nan(self):
        text = dumps({"a": 1 / 3, "b": float("nan"), "c": np.int64(4), "d": (1.0, True)})
        assert json.loads(text) == {"a": 0.333333333, "b": None, "c": 4, "d": [1.0, True]}
        assert text.endswith("}\n")

    def test_rejects_objects(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})


class TestStages:
    def test_epochs_and_split(self):
        cfg = replace(PipelineConfig(synthetic=SyntheticConfig(subjects=1, foods=4)),
                      channels="frontal")
        ep = build_epochs(load_sessions(cfg), cfg)
        assert ep.data.shape == (40, 8, 128)
        assert list(np.bincount(ep.food)) == [10] * 4
        tr, te = split_rows(ep, cfg)
        assert tr.size == 28 and te.size == 12

    def test_split_by_subject(self):
        cfg = PipelineConfig(synthetic=SyntheticConfig(subjects=4, foods=4), split_by_subject=True,
                             train_fraction=0.5)
        ep = build_epochs(load_sessions(cfg), cfg)
        tr, te = split_rows(ep, cfg)
        assert not set(ep.subject[tr]) & set(ep.subject[te])

    def test_stage_error_names_stage(self, tmp_path):
        cfg = small_config(tmp_path, subject=7)
        cfg = replace(cfg, synthetic=SyntheticConfig(subjects=1, foods=4))
        with pytest.raises(StageError) as exc:
            run_pipeline(cfg)
        assert exc.value.stage == "affectivity"


@pytest.mark.slow
class TestRun:
    def test_outputs(self, small_run):
        res, out = small_run
        assert all((out / name).is_file() for name in OUTPUTS)
        assert len(res.recommendation) == 5
        assert validate_plan(res.plan) == []
        plan = json.loads((out / "menu_plan.json").read_text())
        assert plan["violations"] == [] and 1500 <= plan["total"] <= 2000

    def test_metrics(self, small_run):
        res, out = small_run
        doc = json.loads((out / "metrics.json").read_text())
        assert doc["train_rows"] + doc["test_rows"] == 800
        for t, rep in res.metrics.items():
            assert rep.accuracy >= 0.9 and rep.auc >= 0.9, t
            assert math.isclose(doc["targets"][t]["accuracy"], rep.accuracy, rel_tol=1e-8)

    def test_affectivity_doc(self, small_run):
        res, _ = small_run
        foods = res.affectivity["foods"]
        assert len(foods) == 40
        assert {f["like"] for f in foods} <= {0, 1}
        ranked = [r["score"] for r in res.recommendation]
        assert ranked == sorted(ranked, reverse=True)

    def test_deterministic(self, small_run, tmp_path):
        _, first = small_run
        run_pipeline(small_config(tmp_path))
        for name in OUTPUTS:
            if name == "ensemble.amrp-model":
                continue  # embeds the output directory through the config
            assert (first / name).read_bytes() == (tmp_path / name).read_bytes(), name
