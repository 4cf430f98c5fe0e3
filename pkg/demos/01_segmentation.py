"""Walk through the three-step segmentation on a synthetic clip.

Generates a tiny corpus with known burst boundaries, then shows each stage:
raw event detection, sentence-level merging with noise-overlap filtering,
and word-level splitting at short silences.
"""

import json
import tempfile
from pathlib import Path

from vocalkit.audio import load_audio
from vocalkit.manifest import load_manifest
from vocalkit.segmentation import (
    DetectorSource,
    SegmentationConfig,
    detect_events,
    filter_noisy,
    sentence_segments,
    word_segments,
)
from vocalkit.synth import SynthGroup, SynthSpec, generate


def main():
    root = Path(tempfile.mkdtemp(prefix="vocalkit_demo_"))
    spec = SynthSpec(
        n_clips_per_group=1,
        groups=(SynthGroup("En", planted_f0_hz=450.0, planted_am_rate_hz=4.0),),
        seed=0,
        noise_snr_db=25.0,
        n_scenes=1,
        hosts_per_dog=0,
    )
    manifest_path, sidecar_path = generate(spec, root)
    manifest = load_manifest(manifest_path)
    rec = manifest.by_kind("dog_vocal")[0]
    clip = load_audio(rec.audio_path, id=rec.id)
    truth = json.loads(open(sidecar_path).read())[rec.id]["word_boundaries_s"]

    cfg = SegmentationConfig(silence_floor_db=-18.0)

    print(f"clip {rec.id}: {clip.duration_s:.2f} s at {clip.sample_rate} Hz")
    print(f"planted bursts: {[(round(a, 3), round(b, 3)) for a, b in truth]}\n")

    events = detect_events(clip, DetectorSource("energy_baseline"), cfg)
    print("step 1 - raw energy events:")
    for e in events:
        print(f"  [{e.start_s:6.3f}, {e.end_s:6.3f}]  {e.label}")

    sentences = filter_noisy(sentence_segments(events, cfg), events)
    print("\nstep 2 - merged sentences (noise-overlapping ones dropped):")
    for s in sentences:
        print(f"  [{s.start_s:6.3f}, {s.end_s:6.3f}]")

    print("\nstep 3 - words split at short silences:")
    for s in sentences:
        for w in word_segments(clip, s, cfg):
            print(f"  [{w.start_s:6.3f}, {w.end_s:6.3f}]")
    print(f"\n(compare against the {len(truth)} planted bursts above)")


if __name__ == "__main__":
    main()
