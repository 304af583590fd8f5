"""Command-line entry point: ``amrp <subcommand>``."""

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .data_io import (
    PROFILES,
    TARGETS,
    ChannelLayout,
    StimulusProtocol,
    load_food_db,
    load_recording,
    segment_trials,
    synthesize_session,
    write_labels,
    write_recording,
)
from .errors import AmrpError, ConfigError
from .features import METHODS, stft
from .learn import evaluate_ensemble, load_bundle, save_bundle
from .pipeline import (
    EpochTable,
    PipelineConfig,
    build_epochs,
    dumps,
    extract_all,
    load_sessions,
    run_pipeline,
    split_rows,
    train_all,
)
from .planner import DayBudget, plan_menu, validate_plan
from .preprocess import WIDEBAND, clean_recording, parse_band, parse_denoise, select_channels
from .recommend import rank_foods

log = logging.getLogger("amrp")


def _out(text, path=None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_input(path):
    if path in (None, "-"):
        return sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise ConfigError("input", f"file not found: {path}")
    return p.read_text(encoding="utf-8")


def _cleaning(args, base):
    cfg = base
    if getattr(args, "wideband", False):
        cfg = replace(cfg, band=WIDEBAND)
    if getattr(args, "band", None):
        cfg = replace(cfg, band=parse_band(args.band))
    if getattr(args, "denoise", None):
        if args.denoise == "off":
            cfg = replace(cfg, denoise=False)
        else:
            w, lv, rule = parse_denoise(args.denoise)
            cfg = replace(cfg, wavelet=w, levels=lv, rule=rule, denoise=True)
    return cfg


def _config(args):
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "channels", None):
        cfg = replace(cfg, channels=args.channels)
    if getattr(args, "split_by_subject", False):
        cfg = replace(cfg, split_by_subject=True)
    if getattr(args, "train_fraction", None) is not None:
        cfg = replace(cfg, train_fraction=args.train_fraction)
    if getattr(args, "output_dir", None):
        cfg = replace(cfg, output_dir=args.output_dir)
    if getattr(args, "food_db", None):
        cfg = replace(cfg, food_db=args.food_db)
    sessions = getattr(args, "session", None)
    if sessions:
        pairs = []
        for s in sessions:
            if ":" not in s:
                raise ConfigError("--session", f"expected recording.csv:labels.csv, got {s!r}")
            rec, lab = s.rsplit(":", 1)
            pairs.append({"recording": rec, "labels": lab})
        cfg = replace(cfg, sessions=tuple(pairs))
    if getattr(args, "subjects", None):
        cfg = replace(cfg, synthetic=replace(cfg.synthetic, subjects=args.subjects))
    return replace(cfg, cleaning=_cleaning(args, cfg.cleaning))


def _add_cleaning(p):
    p.add_argument("--band", metavar="LO:HI", help="band-pass edges in Hz (default 0.5:30)")
    p.add_argument("--wideband", action="store_true", help="use 0.3:45 Hz so Gamma survives")
    p.add_argument("--denoise", metavar="WAVELET:LEVELS:RULE",
                   help="wavelet denoising, e.g. db4:4:soft, or 'off'")


def _add_session(p):
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--session", action="append", metavar="REC.csv:LABELS.csv",
                   help="recorded session (repeatable); omit for synthetic data")
    p.add_argument("--subjects", type=int, help="synthetic subject count")
    p.add_argument("--channels", choices=("all", "frontal"))
    p.add_argument("--seed", type=int, help="master seed; overrides every derived seed")
    _add_cleaning(p)


# --------------------------------------------------------------------------
# subcommands

def cmd_synth(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.profile not in PROFILES:
        raise ConfigError("--profile", f"unknown profile {args.profile!r}")
    protocol = StimulusProtocol(food_count=args.foods)
    kids = np.random.SeedSequence(args.seed).spawn(args.subjects)
    sessions = []
    for i, k in enumerate(kids):
        rec, lab = synthesize_session(protocol, ChannelLayout(), PROFILES[args.profile],
                                      int(k.generate_state(1)[0]))
        rp, lp = out / f"subject{i:02d}_eeg.csv", out / f"subject{i:02d}_labels.csv"
        write_recording(rp, rec)
        write_labels(lp, lab)
        sessions.append({"recording": str(rp), "labels": str(lp)})
    _out(dumps({"sessions": sessions}))
    return 0


def cmd_preprocess(args):
    cfg = _cleaning(args, PipelineConfig().cleaning)
    rec = load_recording(args.recording)
    rec = select_channels(clean_recording(rec, cfg), args.channels or "all")
    if args.out in (None, "-"):
        buf = io.StringIO()
        _write_recording_stream(buf, rec)
        sys.stdout.write(buf.getvalue())
    else:
        write_recording(args.out, rec)
    return 0


def _write_recording_stream(fh, rec):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", *rec.layout.names])
    for i in range(rec.n_samples):
        w.writerow([repr(i / rec.sample_rate_hz), *(repr(float(v)) for v in rec.samples[:, i])])


def cmd_features(args):
    cfg = _config(args)
    cfg.validate()
    epochs = build_epochs(load_sessions(cfg), cfg)
    feats = extract_all(epochs, cfg)
    arrays = {f"X_{m}": feats[m] for m in METHODS}
    arrays.update({f"y_{t}": epochs.labels[t] for t in TARGETS})
    np.savez(args.out, subject=epochs.subject, food=epochs.food, window=epochs.window,
             channels=np.array(epochs.channels), config=np.array(json.dumps(cfg.to_dict())),
             **arrays)
    log.info("wrote %d epochs to %s", epochs.data.shape[0], args.out)
    return 0


def _load_features(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError("features", f"file not found: {path}")
    z = np.load(p, allow_pickle=False)
    feats = {m: z[f"X_{m}"] for m in METHODS}
    table = EpochTable(None, z["subject"], z["food"], z["window"],
                       {t: z[f"y_{t}"] for t in TARGETS}, tuple(z["channels"].tolist()))
    return feats, table


def cmd_train(args):
    feats, table = _load_features(args.features)
    cfg = _config(args)
    tr, te = split_rows(table, cfg)
    ens = train_all(feats, table, tr, cfg)
    save_bundle(args.out, ens, {"seed": cfg.seed, "train_fraction": cfg.train_fraction,
                                "split_by_subject": cfg.split_by_subject,
                                "test_rows": te.tolist()})
    return 0


def cmd_eval(args):
    feats, table = _load_features(args.features)
    ens, meta = load_bundle(args.model)
    rows = np.arange(table.subject.size) if args.all_rows else np.asarray(meta["test_rows"])
    doc = {}
    for t, e in ens.items():
        sets = {m: (feats[m][rows], table.labels[t][rows], rows) for m in METHODS}
        doc[t] = evaluate_ensemble(e, sets, positive_class=0).to_dict()
    _out(dumps({"rows": int(rows.size), "targets": doc}), args.out)
    return 0


def _affectivity_rows(text):
    """Rows of (food, like, excitement, feelings) from JSON or CSV text."""
    text = text.strip()
    if text.startswith("[") or text.startswith("{"):
        doc = json.loads(text)
        if isinstance(doc, dict):
            doc = doc.get("foods", doc)
        return [(str(r.get("id", r.get("food_id", r.get("name")))),
                 *(float(r[t]) for t in TARGETS)) for r in doc]
    reader = csv.DictReader(io.StringIO(text))
    key = "food_id" if "food_id" in reader.fieldnames else reader.fieldnames[0]
    return [(r[key], *(float(r[t]) for t in TARGETS)) for r in reader]


def _parse_weights(text):
    try:
        w = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError("--weights", f"expected comma-separated numbers, got {text!r}") from None
    return w


def cmd_recommend(args):
    rows = _affectivity_rows(_read_input(args.table))
    names = [r[0] for r in rows]
    values = np.array([r[1:] for r in rows])
    if args.labels:
        values = values + 1.0
    top, _ = rank_foods(values, _parse_weights(args.weights), args.top, names)
    _out(dumps([{"food": n, "score": c} for n, c in top]), args.out)
    return 0


def cmd_plan(args):
    db = load_food_db(args.food_db)
    by_key = {}
    for f in db:
        by_key[f.id] = f
        by_key[f.name] = f
    picks = []
    if args.input:
        text = _read_input(args.input).strip()
        if text.startswith("["):
            for r in json.loads(text):
                picks.append((r.get("id", r.get("food")), float(r.get("score", 1.0))))
        else:
            for r in csv.DictReader(io.StringIO(text)):
                picks.append((r["food"], float(r.get("score") or 1.0)))
    for name in args.food or ():
        picks.append((name, 1.0))
    if not picks:
        raise ConfigError("--food", "no foods given")
    items = []
    for key, score in picks:
        if key not in by_key:
            raise ConfigError("--food", f"unknown food {key!r}")
        items.append((by_key[key], score))
    budget = DayBudget.from_dict(json.loads(_read_input(args.budget))) if args.budget \
        else DayBudget()
    plan = plan_menu(items, budget)
    if args.json:
        _out(dumps({**plan.to_dict(), "violations": validate_plan(plan, budget)}), args.out)
    else:
        _out(plan.table(), args.out)
    return 0


def cmd_export_spectrogram(args):
    rec = load_recording(args.recording)
    if args.channel not in rec.layout.names:
        raise ConfigError("--channel", f"unknown channel {args.channel!r}")
    x = rec.samples[rec.layout.index(args.channel)]
    if args.trial is not None:
        trials = segment_trials(rec, StimulusProtocol(food_count=args.foods,
                                                      sample_rate_hz=rec.sample_rate_hz))
        if not 0 <= args.trial < len(trials):
            raise ConfigError("--trial", f"trial {args.trial} out of range")
        x = trials[args.trial].samples[rec.layout.index(args.channel)]
    spec = stft(x, args.window, args.hop, args.window_fn, rec.sample_rate_hz)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "freq", "magnitude"])
    for i, t in enumerate(spec.times):
        for j, f in enumerate(spec.freqs):
            w.writerow([f"{t:.9g}", f"{f:.9g}", f"{spec.magnitude[i, j]:.9g}"])
    _out(buf.getvalue(), args.out)
    return 0


def cmd_fixtures(args):
    from .reference import run_all

    results = run_all()
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} fixtures passed")
    return 1 if failed else 0


def cmd_run(args):
    cfg = _config(args)
    res = run_pipeline(cfg)
    _out(dumps({k: str(v) for k, v in res.paths.items()}))
    return 0


# --------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="amrp", description="Affective meal recommendation from EEG.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write seeded synthetic sessions as CSV")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--subjects", type=int, default=1)
    p.add_argument("--foods", type=int, default=40)
    p.add_argument("--profile", default="alpha")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="band-pass and denoise a recording")
    p.add_argument("recording")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.add_argument("--channels", choices=("all", "frontal"))
    _add_cleaning(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("features", help="epoch sessions and extract STFT/DWT/HHT features")
    _add_session(p)
    p.add_argument("--out", required=True, help="output .npz")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the three hierarchical ensembles")
    p.add_argument("features")
    p.add_argument("--out", required=True, help="output .amrp-model")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--split-by-subject", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="metrics of a model bundle on its held-out rows")
    p.add_argument("model")
    p.add_argument("features")
    p.add_argument("--all-rows", action="store_true", help="score every row, not just the test rows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("recommend", help="TOPSIS top-k from an affectivity table")
    p.add_argument("table", nargs="?", default="-", help="JSON or CSV table (default stdin)")
    p.add_argument("--weights", default="0.4,0.3,0.3")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--labels", action="store_true",
                   help="table holds 0/1 labels; criterion value is 1 + label")
    p.add_argument("--out")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("plan", help="pack foods into a full-day menu")
    p.add_argument("input", nargs="?", help="CSV (food,score) or JSON list")
    p.add_argument("--food", action="append", help="food name or id (repeatable)")
    p.add_argument("--food-db")
    p.add_argument("--budget", help="day budget JSON")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("export-spectrogram", help="STFT magnitude as time,freq,magnitude CSV")
    p.add_argument("recording")
    p.add_argument("--channel", default="AF3")
    p.add_argument("--trial", type=int, help="restrict to one stimulus trial")
    p.add_argument("--foods", type=int, default=40)
    p.add_argument("--window", type=int, default=64)
    p.add_argument("--hop", type=int, default=32)
    p.add_argument("--window-fn", default="hann")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_spectrogram)

    p = sub.add_parser("fixtures", help="check the published reference numbers")
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("run", help="full pipeline from sessions to menu")
    _add_session(p)
    p.add_argument("--output-dir")
    p.add_argument("--food-db")
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--split-by-subject", action="store_true")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except AmrpError as exc:
        print(f"amrp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        sys.stderr.close()
        return 0


if __name__ == "__main__":
    sys.exit(main())
