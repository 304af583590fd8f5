"""End-to-end orchestration: recordings to affectivity, ranking and menu."""

import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data_io import (
    PROFILES,
    SLOTS,
    TARGETS,
    ChannelLayout,
    StimulusProtocol,
    food_to_dict,
    load_food_db,
    load_labels,
    load_recording,
    segment_trials,
    synthesize_session,
)
from .errors import AmrpError, ConfigError, InfeasiblePlanError
from .features import METHODS, FeatureConfig, extract_batch
from .learn import (
    evaluate_ensemble,
    majority_vote_rows,
    save_bundle,
    train_ensemble,
    train_test_split,
)
from .planner import DayBudget, plan_menu, validate_plan
from .preprocess import CleaningConfig, clean_recording, select_channels, window_epochs
from .recommend import DEFAULT_WEIGHTS, rank_foods

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ENV_PATHS = {"AMRP_FOOD_DB": "food_db", "AMRP_OUTPUT_DIR": "output_dir"}


class StageError(AmrpError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")


@dataclass(frozen=True)
class SyntheticConfig:
    subjects: int = 25
    foods: int = 40
    profile: str = "alpha"


@dataclass(frozen=True)
class PipelineConfig:
    output_dir: str = "amrp-out"
    sessions: tuple = ()  # ({"recording": path, "labels": path}, ...); empty -> synthetic
    food_db: str = None  # None -> bundled database
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    channels: str = "all"
    cleaning: CleaningConfig = field(default_factory=CleaningConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    epoch_seconds: float = 1.0
    classifiers: dict = field(default_factory=dict)
    train_fraction: float = 0.7
    split_by_subject: bool = False
    seed: int = 0
    weights: tuple = DEFAULT_WEIGHTS
    top: int = 5
    subject: int = 0  # whose affectivity drives the recommendation
    budget: DayBudget = field(default_factory=DayBudget)

    def seeds(self):
        """Independent child seeds (synthesis, split, models) from the master seed."""
        kids = np.random.SeedSequence(self.seed).spawn(3)
        return tuple(int(k.generate_state(1)[0]) for k in kids)

    def validate(self):
        if self.channels not in ("all", "frontal"):
            raise ConfigError("channels", f"expected 'all' or 'frontal', got {self.channels!r}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("split.train_fraction", "must lie in (0, 1)")
        if self.food_db is not None and not Path(self.food_db).is_file():
            raise ConfigError("food_db", f"file not found: {self.food_db}")
        for i, s in enumerate(self.sessions):
            for key in ("recording", "labels"):
                if key not in s:
                    raise ConfigError(f"sessions[{i}].{key}", "missing")
                if not Path(s[key]).is_file():
                    raise ConfigError(f"sessions[{i}].{key}", f"file not found: {s[key]}")
        if not self.sessions:
            if self.synthetic.profile not in PROFILES:
                raise ConfigError("synthetic.profile", f"unknown profile {self.synthetic.profile!r}")
            if self.synthetic.subjects < 1 or self.synthetic.foods < 2:
                raise ConfigError("synthetic", "need >= 1 subject and >= 2 foods")
        if len(self.weights) != len(TARGETS) or any(w <= 0 for w in self.weights):
            raise ConfigError("recommend.weights", "need three positive weights")
        if self.top < 1:
            raise ConfigError("recommend.top", "must be >= 1")
        return self

    @classmethod
    def from_dict(cls, d, env=None):
        env = os.environ if env is None else env
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {version}")
        for var, key in ENV_PATHS.items():
            if env.get(var):
                d[key] = env[var]
        kw = {}
        for key in ("output_dir", "food_db", "channels", "seed", "subject", "epoch_seconds"):
            if key in d:
                kw[key] = d.pop(key)
        if "sessions" in d:
            kw["sessions"] = tuple(dict(s) for s in d.pop("sessions"))
        if "synthetic" in d:
            kw["synthetic"] = SyntheticConfig(**d.pop("synthetic"))
        if "preprocess" in d:
            p = dict(d.pop("preprocess"))
            if "band" in p:
                p["band"] = tuple(p["band"])
            kw["cleaning"] = CleaningConfig(**p)
        if "features" in d:
            kw["features"] = FeatureConfig(**d.pop("features"))
        if "classifiers" in d:
            kw["classifiers"] = dict(d.pop("classifiers"))
        if "split" in d:
            s = dict(d.pop("split"))
            kw["train_fraction"] = s.pop("train_fraction", 0.7)
            kw["split_by_subject"] = s.pop("by_subject", False)
            if s:
                raise ConfigError("split", f"unknown keys {sorted(s)}")
        if "recommend" in d:
            r = dict(d.pop("recommend"))
            kw["weights"] = tuple(r.pop("weights", DEFAULT_WEIGHTS))
            kw["top"] = r.pop("top", 5)
            if r:
                raise ConfigError("recommend", f"unknown keys {sorted(r)}")
        if "budget" in d:
            kw["budget"] = DayBudget.from_dict(d.pop("budget"))
        if d:
            raise ConfigError(sorted(d)[0], "unknown config key")
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("config", str(exc)) from None

    @classmethod
    def load(cls, path, env=None):
        p = Path(path)
        if not p.is_file():
            raise ConfigError("config", f"file not found: {path}")
        return cls.from_dict(json.loads(p.read_text(encoding="utf-8")), env)

    def to_dict(self):
        c, f = self.cleaning, self.features
        return {
            "schema_version": SCHEMA_VERSION,
            "output_dir": self.output_dir,
            "sessions": [dict(s) for s in self.sessions],
            "food_db": self.food_db,
            "synthetic": {"subjects": self.synthetic.subjects, "foods": self.synthetic.foods,
                          "profile": self.synthetic.profile},
            "channels": self.channels,
            "preprocess": {"band": list(c.band), "order": c.order, "wavelet": c.wavelet,
                           "levels": c.levels, "rule": c.rule, "factor": c.factor,
                           "denoise": c.denoise},
            "features": {"fs": f.fs, "window_len": f.window_len, "hop": f.hop,
                         "window_fn": f.window_fn, "wavelet": f.wavelet,
                         "dwt_levels": f.dwt_levels, "n_imfs": f.n_imfs},
            "epoch_seconds": self.epoch_seconds,
            "classifiers": self.classifiers,
            "split": {"train_fraction": self.train_fraction, "by_subject": self.split_by_subject},
            "seed": self.seed,
            "recommend": {"weights": list(self.weights), "top": self.top},
            "subject": self.subject,
            "budget": self.budget.to_dict(),
        }

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


# --------------------------------------------------------------------------
# deterministic JSON

def _round(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.9g}")
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj):
    """JSON with insertion key order and floats rounded to 9 significant digits."""
    return json.dumps(_round(obj), indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")
    return Path(path)


# --------------------------------------------------------------------------
# stages

@dataclass(frozen=True)
class Session:
    subject: int
    recording: object
    labels: object


def load_sessions(cfg):
    if cfg.sessions:
        out = []
        for i, s in enumerate(cfg.sessions):
            rec = load_recording(s["recording"], ChannelLayout(),
                                 cfg.features.fs)
            out.append(Session(i, rec, load_labels(s["labels"])))
        return out
    synth_seed = cfg.seeds()[0]
    kids = np.random.SeedSequence(synth_seed).spawn(cfg.synthetic.subjects)
    protocol = StimulusProtocol(food_count=cfg.synthetic.foods,
                                sample_rate_hz=cfg.features.fs)
    profile = PROFILES[cfg.synthetic.profile]
    out = []
    for i, k in enumerate(kids):
        rec, lab = synthesize_session(protocol, ChannelLayout(), profile,
                                      int(k.generate_state(1)[0]))
        out.append(Session(i, rec, lab))
    return out


@dataclass(frozen=True)
class EpochTable:
    """Epochs stacked across sessions with their bookkeeping columns."""

    data: np.ndarray  # (E, C, N)
    subject: np.ndarray
    food: np.ndarray
    window: np.ndarray
    labels: dict  # target -> (E,) int
    channels: tuple


def build_epochs(sessions, cfg):
    blocks, subj, food, win = [], [], [], []
    labels = {t: [] for t in TARGETS}
    channels = None
    for s in sessions:
        rec = clean_recording(s.recording, cfg.cleaning)
        rec = select_channels(rec, cfg.channels)
        channels = rec.layout.names
        protocol = s.recording.protocol or StimulusProtocol(
            food_count=len(s.labels.foods), sample_rate_hz=rec.sample_rate_hz)
        lookup = {f: i for i, f in enumerate(s.labels.foods)}
        for trial in segment_trials(rec, protocol):
            row = lookup.get(trial.food_index)
            if row is None:
                continue
            for ep in window_epochs(trial, cfg.epoch_seconds, rec.sample_rate_hz):
                blocks.append(ep.samples)
                subj.append(s.subject)
                food.append(trial.food_index)
                win.append(ep.window_index)
                for t in TARGETS:
                    labels[t].append(int(getattr(s.labels, t)[row]))
    if not blocks:
        raise ValueError("no epochs could be cut from the sessions")
    return EpochTable(np.stack(blocks), np.array(subj), np.array(food), np.array(win),
                      {t: np.array(v, dtype=np.int64) for t, v in labels.items()}, channels)


def extract_all(epochs, cfg):
    out = {}
    for m in METHODS:
        log.info("extracting %s features for %d epochs", m, epochs.data.shape[0])
        out[m] = extract_batch(epochs.data, m, cfg.features)
    return out


def split_rows(epochs, cfg):
    split_seed = cfg.seeds()[1]
    y = np.stack([epochs.labels[t] for t in TARGETS], axis=1)
    strata = y @ np.array([4, 2, 1])
    groups = epochs.subject if cfg.split_by_subject else None
    return train_test_split(strata, cfg.train_fraction, split_seed, groups=groups, labels=y)


def train_all(features, epochs, train_idx, cfg):
    model_seed = cfg.seeds()[2]
    kids = np.random.SeedSequence(model_seed).spawn(len(TARGETS))
    ensembles = {}
    for t, k in zip(TARGETS, kids):
        log.info("training the %s ensemble on %d rows", t, train_idx.size)
        sets = {m: (features[m][train_idx], epochs.labels[t][train_idx]) for m in METHODS}
        ensembles[t] = train_ensemble(sets, t, cfg.classifiers, int(k.generate_state(1)[0]))
    return ensembles


def evaluate_all(ensembles, features, epochs, test_idx):
    reports = {}
    for t, ens in ensembles.items():
        sets = {m: (features[m][test_idx], epochs.labels[t][test_idx], test_idx)
                for m in METHODS}
        reports[t] = evaluate_ensemble(ens, sets, positive_class=0)
    return reports


def affectivity_table(ensembles, features, epochs, subject):
    """Per-food predicted labels for one subject, voting over the food's epochs."""
    rows = np.flatnonzero(epochs.subject == subject)
    if rows.size == 0:
        raise ValueError(f"subject {subject} has no epochs")
    foods = np.unique(epochs.food[rows])
    table = {}
    for t, ens in ensembles.items():
        final, score, _ = ens.predict_rows({m: features[m][rows] for m in METHODS})
        per_food = []
        for f in foods:
            sel = epochs.food[rows] == f
            per_food.append((majority_vote_rows(final[sel][None, :], score[sel][None, :])[0],
                             float(score[sel].mean())))
        table[t] = per_food
    return [(int(f), {t: table[t][i] for t in TARGETS}) for i, f in enumerate(foods)]


def recommend_and_plan(affectivity, food_db, cfg):
    """TOPSIS ranking over the predicted criterion values, then the menu."""
    if len(affectivity) > len(food_db):
        raise ConfigError("food_db", f"{len(affectivity)} foods recorded but the database "
                                     f"holds {len(food_db)}")
    foods = [food_db[f] for f, _ in affectivity]
    values = np.array([[1.0 + row[t][0] for t in TARGETS] for _, row in affectivity])
    ranked, res = rank_foods(values, cfg.weights, k=len(foods), names=range(len(foods)))
    top = [(foods[i], c) for i, c in ranked[: cfg.top]]
    # widen the candidate pool down the ranking until a feasible menu exists
    plan = None
    for k in range(cfg.top, len(ranked) + 1):
        pool = [(foods[i], c) for i, c in ranked[:k]]
        try:
            plan = plan_menu(pool, cfg.budget)
            break
        except InfeasiblePlanError:
            continue
    if plan is None:
        plan = plan_menu([(foods[i], c) for i, c in ranked], cfg.budget)
    if plan is not None and k > cfg.top:
        log.info("menu needed the top %d foods to meet the calorie windows", k)
    return top, res, plan, k


@dataclass
class PipelineResult:
    affectivity: list
    recommendation: list
    plan: object
    metrics: dict
    ensembles: dict
    paths: dict


def _stage(name, fn, *args):
    log.info("stage %s", name)
    try:
        return fn(*args)
    except ConfigError:
        raise
    except Exception as exc:  # surfaced with the stage name
        raise StageError(name, exc) from exc


def run_pipeline(cfg):
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    food_db = load_food_db(cfg.food_db)

    sessions = _stage("load", load_sessions, cfg)
    epochs = _stage("preprocess", build_epochs, sessions, cfg)
    features = _stage("features", extract_all, epochs, cfg)
    train_idx, test_idx = _stage("split", split_rows, epochs, cfg)
    ensembles = _stage("train", train_all, features, epochs, train_idx, cfg)
    reports = _stage("evaluate", evaluate_all, ensembles, features, epochs, test_idx)
    aff = _stage("affectivity", affectivity_table, ensembles, features, epochs, cfg.subject)
    top, res, plan, pool = _stage("recommend", recommend_and_plan, aff, food_db, cfg)
    problems = validate_plan(plan, cfg.budget)

    foods = {f: food_db[f] for f, _ in aff}
    aff_doc = {"subject": cfg.subject, "foods": [
        {"food_index": f, "id": foods[f].id, "name": foods[f].name,
         **{t: int(row[t][0]) for t in TARGETS},
         "scores": {t: row[t][1] for t in TARGETS}} for f, row in aff]}
    rec_doc = {"weights": list(cfg.weights), "top": [
        {"food": f.name, "id": f.id, "score": c} for f, c in top]}
    plan_doc = {**plan.to_dict(), "candidate_pool": pool, "violations": problems,
                "budget": cfg.budget.to_dict()}
    metrics_doc = {"train_rows": int(train_idx.size), "test_rows": int(test_idx.size),
                   "channels": list(epochs.channels),
                   "targets": {t: reports[t].to_dict() for t in TARGETS}}
    paths = {
        "affectivity": write_json(out / "affectivity.json", aff_doc),
        "recommendation": write_json(out / "recommendation.json", rec_doc),
        "menu_plan": write_json(out / "menu_plan.json", plan_doc),
        "metrics": write_json(out / "metrics.json", metrics_doc),
    }
    (out / "menu_plan.txt").write_text(plan.table(), encoding="utf-8")
    paths["menu_table"] = out / "menu_plan.txt"
    paths["model"] = save_bundle(out / "ensemble.amrp-model", ensembles,
                                 {"config": _round(cfg.to_dict())})
    for t in TARGETS:
        r = reports[t]
        log.info("%s: accuracy %.4f auc %.4f f1 %.4f", t, r.accuracy, r.auc, r.f1)
    return PipelineResult(aff_doc, rec_doc["top"], plan, reports, ensembles, paths)


__all__ = ["PipelineConfig", "SyntheticConfig", "PipelineResult", "StageError", "run_pipeline",
           "dumps", "write_json", "load_sessions", "build_epochs", "extract_all",
           "split_rows", "train_all", "evaluate_all", "affectivity_table",
           "recommend_and_plan", "EpochTable", "Session", "SLOTS", "food_to_dict"]
