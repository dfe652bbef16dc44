"""Shared fixtures: reference cutter and canonical simulator runs.

The session-scoped runs are reused by the pipeline, simulator and
acceptance tests so the suite stays fast.
"""

import numpy as np
import pytest

from millenv import (Band, Cutter, SimConfig, Thresholds, analyze,
                     detect_pulses, simulate)

FS = 25000.0
RPM = 1352.8
BAND = Band(1500.0, 2500.0)
SAMPLES_PER_REV = 1152


@pytest.fixture(scope="session")
def cutter():
    # 80 mm face mill, 6 teeth, 0.1 mm/tooth feed, 340 m/min cutting speed
    return Cutter(z=6, diameter_mm=80.0, feed_per_tooth_mm=0.1,
                  cutting_speed_m_min=340.0)


def run_simulation(cutter, gains, **overrides):
    defaults = dict(rpm=RPM, noise_rms=0.01, duration_s=1.2,
                    sample_rate_hz=FS, seed=42)
    defaults.update(overrides)
    cfg = SimConfig(cutter, tuple(gains), **defaults)
    out = simulate(cfg)
    track = detect_pulses(out.channels["tacho"], threshold=0.5, hysteresis=0.2)
    return out, track


def analyze_channel(out, track, cutter, channel="ax", thresholds=None,
                    band=BAND):
    return analyze(out.channels[channel], track, cutter, band,
                   thresholds or Thresholds(),
                   samples_per_rev=SAMPLES_PER_REV)


@pytest.fixture(scope="session")
def symmetric_run(cutter):
    out, track = run_simulation(cutter, [1.0] * 6)
    return out, track, analyze_channel(out, track, cutter)


@pytest.fixture(scope="session")
def asymmetric_run(cutter):
    out, track = run_simulation(cutter, [1.0, 1.0, 1.0, 0.5, 1.0, 1.0])
    return out, track, analyze_channel(out, track, cutter)


def tone(freq_hz, duration_s=1.0, fs=FS, amp=1.0, phase=0.0):
    t = np.arange(int(round(duration_s * fs))) / fs
    return amp * np.cos(2.0 * np.pi * freq_hz * t + phase)
