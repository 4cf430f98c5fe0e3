"""Manifest-driven batch pipeline with content-hash idempotence.

Stages run in dependency order: segment -> extract -> pair -> train ->
explain -> speed -> report.  Each stage records a content hash of its inputs
and configuration in the run ledger; a stage re-runs only when either hash
changed or its outputs are missing.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import shutil
from dataclasses import dataclass, field

import numpy as np

from .audio import CANONICAL_RATE, load_audio, resample
from .classify import FAMILIES, accuracy_grid, train, write_grid_csv
from .explain import (
    correlate_pairs,
    mean_abs_shap,
    write_attribution_csv,
    write_correlation_csv,
)
from .features import (
    FEATURE_SET_DIMS,
    gemaps_lite,
    mel_filterbank,
    mfcc,
    plp,
    read_feature_csv,
    write_feature_csv,
)
from .audio import power_spectrogram
from .manifest import Manifest, corpus_stats, load_manifest
from .pairing import ClipPair, PairClass, build_pairs, pair_dataset
from .segmentation import DetectorSource, SegmentationConfig, extract_words
from .syllables import (
    OscillatorConfig,
    detect_syllables,
    speed_report,
    write_nuclei_jsonl,
    write_speed_csv,
)

STAGES = ("segment", "extract", "pair", "train", "explain", "speed", "report")

STAGE_DEPS = {
    "segment": (),
    "extract": (),
    "pair": ("extract",),
    "train": ("extract", "pair"),
    "explain": ("extract",),
    "speed": (),
    "report": (),
}

LEDGER_NAME = "ledger.json"


class StageError(Exception):
    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"stage {stage}: {message}")


@dataclass
class RunConfig:
    manifest_path: str
    out_dir: str
    seed: int = 0
    feature_sets: tuple = ("filterbank24", "mfcc13", "plp13", "gemaps_lite")
    families: tuple = FAMILIES
    cos_threshold: float = 0.95
    prominence_cutoff: float = 0.04
    folds: int = 5
    per_class_quota: int = 500
    jobs: int = 1

    def stage_seed(self, stage: str) -> int:
        digest = hashlib.sha256(f"{self.seed}:{stage}".encode()).digest()
        return int.from_bytes(digest[:8], "little") % (2 ** 31)


def _hash_files(paths) -> str:
    h = hashlib.sha256()
    for p in sorted(str(p) for p in paths):
        h.update(p.encode())
        if os.path.isfile(p):
            with open(p, "rb") as fh:
                for chunk in iter(lambda: fh.read(1 << 20), b""):
                    h.update(chunk)
    return h.hexdigest()


def _config_hash(cfg: RunConfig, stage: str) -> str:
    relevant = {
        "seed": cfg.seed,
        "feature_sets": list(cfg.feature_sets),
        "families": list(cfg.families),
        "cos_threshold": cfg.cos_threshold,
        "prominence_cutoff": cfg.prominence_cutoff,
        "folds": cfg.folds,
        "per_class_quota": cfg.per_class_quota,
        "stage": stage,
    }
    return hashlib.sha256(json.dumps(relevant, sort_keys=True).encode()).hexdigest()


def _load_ledger(out_dir) -> dict:
    path = os.path.join(out_dir, LEDGER_NAME)
    if os.path.isfile(path):
        with open(path) as fh:
            return json.load(fh)
    return {}


def _save_ledger(out_dir, ledger: dict) -> None:
    with open(os.path.join(out_dir, LEDGER_NAME), "w") as fh:
        json.dump(ledger, fh, indent=1, sort_keys=True)


def _stage_inputs(cfg: RunConfig, manifest: Manifest, stage: str):
    audio = [c.audio_path for c in manifest.clips]
    out = cfg.out_dir
    feature_csvs = [
        os.path.join(out, f"features_{s}.csv") for s in cfg.feature_sets
    ]
    table = {
        "segment": [cfg.manifest_path, *audio],
        "extract": [cfg.manifest_path, *audio],
        "pair": [cfg.manifest_path, *feature_csvs],
        "train": [os.path.join(out, "pairs.csv"), *feature_csvs],
        "explain": [cfg.manifest_path, *feature_csvs],
        "speed": [cfg.manifest_path, *audio],
        "report": [
            os.path.join(out, n)
            for n in ("grid.csv", "attribution.csv", "correlation.csv", "speed.csv")
        ],
    }
    return table[stage]


def _stage_outputs(cfg: RunConfig, stage: str):
    out = cfg.out_dir
    table = {
        "segment": [os.path.join(out, "segments.jsonl")],
        "extract": [
            os.path.join(out, f"features_{s}.csv") for s in cfg.feature_sets
        ],
        "pair": [os.path.join(out, "pairs.csv")],
        "train": [os.path.join(out, "grid.csv"), os.path.join(out, "cv_reports.json")],
        "explain": [
            os.path.join(out, "attribution.csv"),
            os.path.join(out, "correlation.csv"),
        ],
        "speed": [os.path.join(out, "speed.csv"), os.path.join(out, "nuclei.jsonl")],
        "report": [os.path.join(out, "report", "index.json")],
    }
    return table[stage]


def _clip_audio(record, rate: int = CANONICAL_RATE):
    clip = load_audio(record.audio_path, id=record.id)
    if record.start_s > 0 or record.end_s < clip.duration_s - 1e-6:
        clip = clip.slice_s(record.start_s, min(record.end_s, clip.duration_s), id=record.id)
    return resample(clip, rate)


def run_segment(cfg: RunConfig, manifest: Manifest) -> None:
    seg_cfg = SegmentationConfig(**manifest.defaults.get("segmentation", {}))
    out_path = os.path.join(cfg.out_dir, "segments.jsonl")
    with open(out_path, "w") as fh:
        for rec in sorted(manifest.clips, key=lambda r: r.id):
            clip = _clip_audio(rec)
            ann = rec.audio_path + ".events.json"
            if os.path.isfile(ann):
                source = DetectorSource("external_annotations", {"annotation_path": ann})
            else:
                source = DetectorSource("energy_baseline")
            try:
                words = extract_words(clip, source, seg_cfg)
            except Exception as exc:
                raise StageError("segment", f"clip {rec.id}: {exc}")
            fh.write(
                json.dumps(
                    {
                        "clip_id": rec.id,
                        "words": [
                            [round(w.start_s, 4), round(w.end_s, 4)] for w in words
                        ],
                    }
                )
                + "\n"
            )


def extract_features_for_clip(clip, clip_id: str, set_id: str):
    if set_id == "gemaps_lite":
        return gemaps_lite(clip, clip_id)
    spec = power_spectrogram(clip)
    if set_id == "filterbank24":
        return mel_filterbank(spec, clip_id)
    if set_id == "mfcc13":
        return mfcc(spec, clip_id)
    if set_id == "plp13":
        return plp(spec, clip_id=clip_id)
    raise ValueError(f"unknown feature set {set_id!r}")


def run_extract(cfg: RunConfig, manifest: Manifest) -> None:
    vectors = {s: [] for s in cfg.feature_sets}
    for rec in sorted(manifest.clips, key=lambda r: r.id):
        clip = _clip_audio(rec)
        for set_id in cfg.feature_sets:
            try:
                vectors[set_id].append(extract_features_for_clip(clip, rec.id, set_id))
            except Exception as exc:
                raise StageError("extract", f"clip {rec.id} ({set_id}): {exc}")
    for set_id, vecs in vectors.items():
        write_feature_csv(os.path.join(cfg.out_dir, f"features_{set_id}.csv"), vecs)


def run_pair(cfg: RunConfig, manifest: Manifest) -> None:
    dogs = manifest.by_kind("dog_vocal")
    pairs = build_pairs(
        dogs, cfg.per_class_quota, cfg.stage_seed("pair"), cfg.cos_threshold
    )
    with open(os.path.join(cfg.out_dir, "pairs.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["left", "right", "label"])
        for p in pairs:
            writer.writerow([p.left, p.right, p.label.name])


def _read_pairs(path) -> list:
    pairs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for left, right, label in reader:
            pairs.append(ClipPair(left, right, PairClass[label]))
    return pairs


def run_train(cfg: RunConfig, manifest: Manifest) -> None:
    pairs = _read_pairs(os.path.join(cfg.out_dir, "pairs.csv"))
    datasets = {}
    for set_id in cfg.feature_sets:
        features = read_feature_csv(
            os.path.join(cfg.out_dir, f"features_{set_id}.csv"), set_id
        )
        X, y, _, _ = pair_dataset(pairs, features, set_id)
        datasets[set_id] = (X, y)
    grid = accuracy_grid(
        datasets, list(cfg.families), folds=cfg.folds, seed=cfg.stage_seed("train")
    )
    write_grid_csv(
        os.path.join(cfg.out_dir, "grid.csv"), grid, list(cfg.feature_sets),
        list(cfg.families),
    )
    reports = {}
    for (set_id, family), rep in grid.items():
        reports[f"{set_id}/{family}"] = {
            "fold_accuracies": [round(a, 6) for a in rep.fold_accuracies],
            "mean_accuracy": None if np.isnan(rep.mean_accuracy) else round(rep.mean_accuracy, 6),
            "confusion": rep.confusion.tolist(),
            "stratified": rep.stratified,
            "error": rep.error,
        }
    with open(os.path.join(cfg.out_dir, "cv_reports.json"), "w") as fh:
        json.dump(reports, fh, indent=1, sort_keys=True)


def run_explain(cfg: RunConfig, manifest: Manifest) -> None:
    if "gemaps_lite" not in cfg.feature_sets:
        raise StageError("explain", "explain requires the gemaps_lite feature set")
    features = read_feature_csv(
        os.path.join(cfg.out_dir, "features_gemaps_lite.csv"), "gemaps_lite"
    )
    dogs = [r for r in manifest.by_kind("dog_vocal") if r.id in features]
    if not dogs:
        raise StageError("explain", "no dog clips with extracted features")
    dogs = sorted(dogs, key=lambda r: r.id)
    X = np.stack([features[r.id].values for r in dogs])
    y = np.array([0 if r.lang_env == "En" else 1 for r in dogs])
    names = features[dogs[0].id].names
    seed = cfg.stage_seed("explain")
    model = train("gradient_boosted_trees", X, y, seed=seed)
    rows = mean_abs_shap(
        model, X, names,
        sample_size=min(100, len(X)),
        seed=seed,
        cutoff=cfg.prominence_cutoff,
    )
    write_attribution_csv(os.path.join(cfg.out_dir, "attribution.csv"), rows)
    host_features = {
        cid: fv for cid, fv in features.items()
        if any(r.id == cid for r in manifest.by_kind("host_speech"))
    }
    dog_features = {r.id: features[r.id] for r in dogs}
    try:
        corr = correlate_pairs(
            manifest.clips, dog_features, host_features, list(names), seed=seed
        )
        write_correlation_csv(os.path.join(cfg.out_dir, "correlation.csv"), corr)
    except Exception as exc:
        raise StageError("explain", str(exc))


def run_speed(cfg: RunConfig, manifest: Manifest) -> None:
    osc_cfg = OscillatorConfig(**manifest.defaults.get("oscillator", {}))
    rates = {}
    units_by_clip = {}
    for rec in sorted(manifest.clips, key=lambda r: r.id):
        group = f"{rec.kind}/{rec.lang_env}"
        if rec.syllable_count is not None:
            # externally supplied (text-derived) syllable count overrides audio
            rate = rec.syllable_count / rec.duration_s
            rates.setdefault(group, []).append(rate)
            continue
        clip = _clip_audio(rec)
        units = detect_syllables(clip, osc_cfg)
        units_by_clip[rec.id] = units
        rates.setdefault(group, []).append(units.rate_per_s)
    rows = speed_report(rates)
    write_speed_csv(os.path.join(cfg.out_dir, "speed.csv"), rows)
    write_nuclei_jsonl(os.path.join(cfg.out_dir, "nuclei.jsonl"), units_by_clip)


def run_report(cfg: RunConfig, manifest: Manifest) -> None:
    report_dir = os.path.join(cfg.out_dir, "report")
    os.makedirs(report_dir, exist_ok=True)
    sections = {
        "accuracy_grid": "grid.csv",
        "attribution": "attribution.csv",
        "correlation": "correlation.csv",
        "speed": "speed.csv",
    }
    index = {"sections": {}}
    for section, name in sections.items():
        src = os.path.join(cfg.out_dir, name)
        if os.path.isfile(src):
            shutil.copyfile(src, os.path.join(report_dir, name))
            index["sections"][section] = {"file": name, "present": True}
        else:
            index["sections"][section] = {"file": name, "present": False}
    with open(os.path.join(report_dir, "index.json"), "w") as fh:
        json.dump(index, fh, indent=1, sort_keys=True)


_RUNNERS = {
    "segment": run_segment,
    "extract": run_extract,
    "pair": run_pair,
    "train": run_train,
    "explain": run_explain,
    "speed": run_speed,
    "report": run_report,
}


def run_stages(cfg: RunConfig, stages=None) -> dict:
    """Run the requested stages (defaults to all) with ledger-based skipping.

    Returns the updated ledger.  Raises StageError when a stage's upstream
    artifacts are missing or a stage fails.
    """
    manifest = load_manifest(cfg.manifest_path)
    os.makedirs(cfg.out_dir, exist_ok=True)
    ledger = _load_ledger(cfg.out_dir)
    requested = list(stages) if stages else list(STAGES)
    for stage in requested:
        if stage not in STAGES:
            raise StageError(stage, "unknown stage")
    for stage in STAGES:
        if stage not in requested:
            continue
        for dep in STAGE_DEPS[stage]:
            if dep in requested and STAGES.index(dep) < STAGES.index(stage):
                continue
            if not all(os.path.isfile(p) for p in _stage_outputs(cfg, dep)):
                raise StageError(stage, f"missing dependency artifacts from stage {dep!r}")
        input_hash = _hash_files(_stage_inputs(cfg, manifest, stage))
        config_hash = _config_hash(cfg, stage)
        entry = ledger.get(stage)
        outputs = _stage_outputs(cfg, stage)
        if (
            entry
            and entry.get("input_hash") == input_hash
            and entry.get("config_hash") == config_hash
            and all(os.path.isfile(p) for p in outputs)
        ):
            continue  # ledger hit
        _RUNNERS[stage](cfg, manifest)
        ledger[stage] = {
            "input_hash": _hash_files(_stage_inputs(cfg, manifest, stage)),
            "config_hash": config_hash,
            "outputs": [os.path.relpath(p, cfg.out_dir) for p in outputs],
        }
        _save_ledger(cfg.out_dir, ledger)
    return ledger


def stats_report(manifest_path) -> dict:
    return corpus_stats(load_manifest(manifest_path))
