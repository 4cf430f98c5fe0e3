import csv
import json

import numpy as np
import pytest

from vocalkit.audio import AudioClip, EnvelopeSeq
from vocalkit.syllables import (
    OscillatorConfig,
    SyllableError,
    SyllableUnits,
    detect_syllables,
    oscillate,
    oscillate_raw,
    pick_nuclei,
    speed_report,
    write_nuclei_jsonl,
    write_speed_csv,
)

from conftest import SR, silence


def am_tone(rate_hz, duration_s=2.0, carrier_hz=600.0, sr=SR):
    """Tone whose amplitude is gated at rate_hz by a raised cosine."""
    t = np.arange(int(duration_s * sr)) / sr
    gate = 0.5 * (1.0 - np.cos(2 * np.pi * rate_hz * t))
    return AudioClip(0.5 * gate * np.sin(2 * np.pi * carrier_hz * t), sr)


class TestOscillator:
    def test_step_response_closed_form(self):
        # oracle: analytic step response of the underdamped second-order system
        cfg = OscillatorConfig()
        rate = 100.0
        n = 300
        drive = np.ones(n)
        got = oscillate_raw(drive, rate, cfg)
        omega = 2 * np.pi * cfg.natural_freq_hz
        zeta = cfg.damping_ratio
        wd = omega * np.sqrt(1 - zeta ** 2)
        t = np.arange(n) / rate
        want = (1.0 / omega ** 2) * (
            1.0
            - np.exp(-zeta * omega * t)
            * (np.cos(wd * t) + zeta / np.sqrt(1 - zeta ** 2) * np.sin(wd * t))
        )
        assert np.max(np.abs(got - want)) < 1e-10

    def test_zero_drive_stays_zero(self):
        out = oscillate_raw(np.zeros(100), 100.0, OscillatorConfig())
        assert np.all(out == 0.0)

    def test_linearity(self, rng):
        cfg = OscillatorConfig()
        a = rng.standard_normal(200)
        b = rng.standard_normal(200)
        ra = oscillate_raw(a, 100.0, cfg)
        rb = oscillate_raw(b, 100.0, cfg)
        rab = oscillate_raw(2 * a + 3 * b, 100.0, cfg)
        assert np.allclose(rab, 2 * ra + 3 * rb, atol=1e-12)

    def test_resonance_gain(self):
        # driving at the natural frequency produces a larger steady response
        # than driving far above it
        cfg = OscillatorConfig()
        t = np.arange(1000) / 100.0
        at_res = oscillate_raw(np.sin(2 * np.pi * 5.0 * t), 100.0, cfg)
        above = oscillate_raw(np.sin(2 * np.pi * 20.0 * t), 100.0, cfg)
        assert np.abs(at_res[500:]).max() > 2 * np.abs(above[500:]).max()

    def test_rate_too_low(self):
        with pytest.raises(SyllableError):
            oscillate_raw(np.ones(10), 10.0, OscillatorConfig(natural_freq_hz=5.0))

    def test_log_compression_applied(self):
        # oscillate() must match oscillate_raw on the log-compressed envelope
        cfg = OscillatorConfig()
        env = EnvelopeSeq(values=np.abs(np.sin(np.arange(200) / 10.0)), rate_hz=100.0)
        got = oscillate(env, cfg)
        want = oscillate_raw(np.log1p(100.0 * env.values), env.rate_hz, cfg)
        assert np.array_equal(got, want)


class TestPickNuclei:
    def test_single_peak(self):
        osc = np.array([0.0, 0.2, 1.0, 0.2, 0.0])
        units = pick_nuclei(osc, 100.0)
        assert len(units.nuclei_times_s) == 1
        assert units.nuclei_times_s[0] == pytest.approx(0.02)

    def test_relative_floor_suppresses_small_peaks(self):
        base = np.zeros(100)
        base[20] = 1.0
        base[60] = 0.05  # below 0.12 * max
        assert len(pick_nuclei(base, 100.0).nuclei_times_s) == 1
        base[60] = 0.5  # above the floor
        assert len(pick_nuclei(base, 100.0).nuclei_times_s) == 2

    def test_min_gap_enforced(self):
        osc = np.zeros(100)
        osc[[10, 13, 16, 60]] = 1.0  # three peaks 30 ms apart, one isolated
        units = pick_nuclei(osc, 100.0, OscillatorConfig(min_peak_gap_s=0.08))
        gaps = np.diff(units.nuclei_times_s)
        assert np.all(gaps >= 0.08 - 1e-9)

    def test_all_nonpositive(self):
        units = pick_nuclei(np.full(50, -1.0), 100.0)
        assert len(units.nuclei_times_s) == 0
        assert units.rate_per_s == 0.0

    def test_duration_override(self):
        osc = np.zeros(100)
        osc[50] = 1.0
        units = pick_nuclei(osc, 100.0, clip_duration_s=4.0)
        assert units.clip_duration_s == 4.0
        assert units.rate_per_s == pytest.approx(0.25)

    def test_empty_error(self):
        with pytest.raises(SyllableError):
            pick_nuclei(np.empty(0), 100.0)


class TestDetectSyllables:
    @pytest.mark.parametrize("rate", [3.0, 4.0, 5.0, 6.0])
    def test_recovers_planted_rate(self, rate):
        # rates near the 5 Hz natural frequency, where the detector is valid;
        # far below it the oscillator's own ringing adds spurious peaks
        units = detect_syllables(am_tone(rate, duration_s=3.0))
        assert units.rate_per_s == pytest.approx(rate, abs=0.5)

    def test_silence_gives_zero_rate(self):
        units = detect_syllables(silence(2.0))
        assert units.rate_per_s == 0.0
        assert len(units.nuclei_times_s) == 0

    def test_determinism(self):
        clip = am_tone(3.0)
        a = detect_syllables(clip)
        b = detect_syllables(clip)
        assert np.array_equal(a.nuclei_times_s, b.nuclei_times_s)

    def test_gain_invariant_rate(self):
        clip = am_tone(3.0)
        loud = AudioClip(clip.samples * 0.9 / np.abs(clip.samples).max(), SR)
        quiet = AudioClip(clip.samples * 0.05, SR)
        assert detect_syllables(loud).rate_per_s == pytest.approx(
            detect_syllables(quiet).rate_per_s, abs=0.5
        )


class TestConfig:
    def test_validation(self):
        with pytest.raises(SyllableError):
            OscillatorConfig(natural_freq_hz=0.0)
        with pytest.raises(SyllableError):
            OscillatorConfig(damping_ratio=1.0)
        with pytest.raises(SyllableError):
            OscillatorConfig(peak_floor_rel=0.0)
        with pytest.raises(SyllableError):
            OscillatorConfig(min_peak_gap_s=-1.0)


class TestSpeedReport:
    def test_statistics(self):
        rows = speed_report({"b": [2.0, 3.0, 4.0], "a": [1.0, 1.0]})
        assert [r["group"] for r in rows] == ["a", "b"]
        b = rows[1]
        assert b["n"] == 3
        assert b["mean_rate"] == pytest.approx(3.0)
        assert b["median_rate"] == pytest.approx(3.0)
        assert b["stddev"] == pytest.approx(np.std([2.0, 3.0, 4.0]))

    def test_empty_group_marked(self):
        rows = speed_report({"x": []})
        assert rows[0]["empty"] and rows[0]["n"] == 0

    def test_csv(self, tmp_path):
        rows = speed_report({"En": [2.0, 4.0], "Ja": []})
        path = tmp_path / "speed.csv"
        write_speed_csv(path, rows)
        with open(path, newline="") as fh:
            got = list(csv.reader(fh))
        assert got[0] == ["group", "n", "mean_rate", "median_rate", "stddev"]
        assert got[1] == ["En", "2", "3.000", "3.000", "1.000"]
        assert got[2] == ["Ja", "0", "", "", ""]


class TestNucleiJsonl:
    def test_round_trip(self, tmp_path):
        units = {
            "b": SyllableUnits(np.array([0.5, 1.0]), 2.0, 1.0),
            "a": SyllableUnits(np.empty(0), 1.0, 0.0),
        }
        path = tmp_path / "nuclei.jsonl"
        write_nuclei_jsonl(path, units)
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        assert [l["clip_id"] for l in lines] == ["a", "b"]
        assert lines[1]["nuclei_times_s"] == [0.5, 1.0]
        assert lines[0]["rate_per_s"] == 0.0
