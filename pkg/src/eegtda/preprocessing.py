"""Band-pass + 50 Hz notch filtering and 10-second trial segmentation."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import signal

from .errors import ConfigError, InputError
from .signal_io import Label, Recording, Segment


@dataclass
class FilterSpec:
    f_low_hz: float = 0.5
    f_high_hz: float = 60.0
    notch_hz: float = 50.0
    notch_q: float = 30.0
    order: int = 4
    zero_phase: bool = True

    def __post_init__(self):
        if self.f_low_hz <= 0 or self.f_high_hz <= 0 or self.notch_hz <= 0:
            raise ConfigError("filter frequencies must be positive")
        if self.f_low_hz >= self.f_high_hz:
            raise ConfigError("f_low_hz must be below f_high_hz")
        if self.order <= 0 or self.order % 2 != 0:
            raise ConfigError("filter order must be a positive even integer")
        if self.notch_q <= 0:
            raise ConfigError("notch_q must be positive")

    def validate_for(self, sample_rate_hz: float) -> None:
        nyq = sample_rate_hz / 2.0
        if self.f_high_hz >= nyq:
            raise ConfigError(
                f"f_high_hz={self.f_high_hz} must be below Nyquist {nyq}"
            )
        if self.notch_hz >= nyq:
            raise ConfigError(
                f"notch_hz={self.notch_hz} must be below Nyquist {nyq}"
            )


@dataclass
class Trial:
    """One fixed-length window of a preprocessed recording."""

    subject_id: str
    segment: Segment
    trial_index: int
    data: np.ndarray  # (c, t)
    sample_rate_hz: float
    channel_names: list[str]
    label: Optional[Label] = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)):
            raise InputError("trial contains non-finite samples")


def _check_length(rec: Recording, spec: FilterSpec) -> None:
    if rec.n_samples < 3 * spec.order:
        raise InputError(
            f"recording too short for filter warm-up: "
            f"{rec.n_samples} < {3 * spec.order} samples"
        )


def bandpass(rec: Recording, spec: FilterSpec) -> Recording:
    """Butterworth band-pass, each channel independently; length preserved."""
    spec.validate_for(rec.sample_rate_hz)
    _check_length(rec, spec)
    sos = signal.butter(spec.order, [spec.f_low_hz, spec.f_high_hz],
                        btype="band", output="sos", fs=rec.sample_rate_hz)
    if spec.zero_phase:
        filtered = signal.sosfiltfilt(sos, rec.data, axis=1)
    else:
        filtered = signal.sosfilt(sos, rec.data, axis=1)
    return replace(rec, data=filtered, channel_names=list(rec.channel_names))


def notch(rec: Recording, spec: FilterSpec) -> Recording:
    """Second-order IIR notch at spec.notch_hz, per channel."""
    spec.validate_for(rec.sample_rate_hz)
    _check_length(rec, spec)
    b, a = signal.iirnotch(spec.notch_hz, spec.notch_q, fs=rec.sample_rate_hz)
    if spec.zero_phase:
        filtered = signal.filtfilt(b, a, rec.data, axis=1)
    else:
        filtered = signal.lfilter(b, a, rec.data, axis=1)
    return replace(rec, data=filtered, channel_names=list(rec.channel_names))


def preprocess(rec: Recording, spec: FilterSpec) -> Recording:
    """Notch after band-pass, the pipeline's canonical filtering order."""
    return notch(bandpass(rec, spec), spec)


def segment_trials(rec: Recording, window_s: float = 10.0,
                   label: Optional[Label] = None) -> list[Trial]:
    """Cut into non-overlapping windows of window_s; trailing remainder dropped."""
    if window_s <= 0:
        raise ConfigError("window_s must be positive")
    t = int(round(window_s * rec.sample_rate_hz))
    if rec.n_samples < t:
        raise InputError(
            f"recording of {rec.n_samples} samples shorter than one "
            f"{window_s} s window ({t} samples)"
        )
    k = rec.n_samples // t
    return [
        Trial(
            subject_id=rec.subject_id,
            segment=rec.segment,
            trial_index=i,
            data=rec.data[:, i * t:(i + 1) * t].copy(),
            sample_rate_hz=rec.sample_rate_hz,
            channel_names=list(rec.channel_names),
            label=label,
        )
        for i in range(k)
    ]
