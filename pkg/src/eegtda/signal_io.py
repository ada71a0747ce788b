"""EEG data model, CSV ingestion and the synthetic cohort generator.

The real study data is private, so `synth_cohort` fabricates a cohort with the
same shape (20 subjects, 3 segments of ~3 min, 32 channels at 500 Hz) and a
controllable ground-truth signature: stressed subjects get a larger
inter-channel dispersion in their mixing matrix, which is the geometric cue
the downstream homology features are designed to pick up.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InputError

# sub-stream tags so every stage draws from its own deterministic RNG lineage
_RNG_LABELS = 7
_RNG_RECORDING = 11
_RNG_FORMS = 13


class Segment(enum.Enum):
    PRE_TASK = "pre_task"
    TASK = "task"
    POST_TASK = "post_task"


class Label(enum.Enum):
    NORMAL = 0
    STRESS = 1


@dataclass
class Recording:
    """One subject-segment of raw EEG: channels x samples, microvolts."""

    subject_id: str
    segment: Segment
    channel_names: list[str]
    sample_rate_hz: float
    data: np.ndarray  # (c, n)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise InputError("recording data must be a 2-D channels x samples array")
        c, n = self.data.shape
        if c < 2:
            raise InputError(f"need at least 2 channels, got {c}")
        if n < 1:
            raise InputError("recording has no samples")
        if len(self.channel_names) != c:
            raise InputError(
                f"{len(self.channel_names)} channel names for {c} data rows"
            )
        if len(set(self.channel_names)) != c:
            raise InputError("duplicate channel names")
        if self.sample_rate_hz <= 0:
            raise InputError("sample_rate_hz must be positive")
        if not np.all(np.isfinite(self.data)):
            raise InputError("recording contains non-finite samples")

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.data.shape[1] / self.sample_rate_hz


@dataclass
class CohortSpec:
    """Parameters of the synthetic stand-in cohort."""

    n_subjects: int = 20
    n_stress: int = 10
    segment_duration_s: float = 180.0
    sample_rate_hz: float = 500.0
    n_channels: int = 32
    dispersion_normal: float = 0.5
    dispersion_stress: float = 1.5
    pli_amplitude: float = 1.0
    noise_exponent: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_subjects < 1:
            raise ConfigError("n_subjects must be positive")
        if not 0 <= self.n_stress <= self.n_subjects:
            raise ConfigError("n_stress must lie in [0, n_subjects]")
        if self.segment_duration_s <= 0 or self.sample_rate_hz <= 0:
            raise ConfigError("durations and rates must be positive")
        if self.n_channels < 2:
            raise ConfigError("need at least 2 channels")
        if self.dispersion_normal <= 0 or self.dispersion_stress <= 0:
            raise ConfigError("dispersions must be positive")
        if self.dispersion_stress <= self.dispersion_normal:
            raise ConfigError("dispersion_stress must exceed dispersion_normal")
        if self.pli_amplitude < 0:
            raise ConfigError("pli_amplitude must be nonnegative")

    @classmethod
    def from_json(cls, path) -> "CohortSpec":
        path = Path(path)
        if not path.exists():
            raise InputError(f"cohort spec not found: {path}")
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"cohort spec is not valid JSON: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown cohort spec fields: {sorted(extra)}")
        return cls(**raw)


@dataclass
class SubjectForms:
    """Questionnaire scores: state anxiety (y1), trait anxiety (y2), EQ."""

    subject_id: str
    y1_pre: float
    y1_post: float
    y2_pre: float
    y2_post: float
    eq_pre: float
    eq_post: float

    def __post_init__(self):
        vals = [self.y1_pre, self.y1_post, self.y2_pre, self.y2_post,
                self.eq_pre, self.eq_post]
        if not all(np.isfinite(v) for v in vals):
            raise InputError(f"non-finite form value for {self.subject_id}")
        if any(v < 0 for v in vals):
            raise InputError(f"negative form value for {self.subject_id}")


@dataclass
class SyntheticSubject:
    subject_id: str
    label: Label
    recordings: dict = field(default_factory=dict)  # Segment -> Recording


def load_recording(path, subject_id: str, segment: Segment,
                   sample_rate_hz: float) -> Recording:
    """Read a samples-as-rows CSV (header = channel names) into a Recording."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"recording file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r and not r[0].startswith("#")]
    if not rows:
        raise InputError(f"empty recording file: {path}")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise InputError(f"duplicate channel names in {path}")
    if len(rows) < 2:
        raise InputError(f"no sample rows in {path}")
    c = len(header)
    samples = np.empty((len(rows) - 1, c), dtype=np.float64)
    for i, row in enumerate(rows[1:]):
        if len(row) != c:
            raise InputError(
                f"{path}: row {i + 2} has {len(row)} values, expected {c}"
            )
        try:
            samples[i] = [float(v) for v in row]
        except ValueError as exc:
            raise InputError(f"{path}: non-numeric value in row {i + 2}") from exc
    return Recording(
        subject_id=subject_id,
        segment=segment,
        channel_names=header,
        sample_rate_hz=sample_rate_hz,
        data=samples.T,
    )


def write_recording(path, rec: Recording) -> None:
    """Write the CSV layout `load_recording` reads; floats round-trip exactly."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(rec.channel_names) + "\n")
        for row in rec.data.T:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _pink_noise(rng: np.random.Generator, n: int, exponent: float) -> np.ndarray:
    """Band-unlimited 1/f^alpha noise, unit variance, zero DC."""
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    scale = np.zeros_like(freqs)
    scale[1:] = freqs[1:] ** (-exponent / 2.0)
    shaped = np.fft.irfft(spec * scale, n)
    sd = shaped.std()
    return shaped / sd if sd > 0 else shaped


def _synth_segment(spec: CohortSpec, subj_idx: int, seg_idx: int,
                   dispersion: float) -> np.ndarray:
    rng = np.random.default_rng(
        [spec.rng_seed, _RNG_RECORDING, subj_idx, seg_idx]
    )
    n = int(round(spec.segment_duration_s * spec.sample_rate_hz))
    c = spec.n_channels
    t = np.arange(n) / spec.sample_rate_hz

    # band-limited sources: two alpha, two beta oscillations
    freqs = np.concatenate([rng.uniform(8.0, 12.0, 2), rng.uniform(13.0, 30.0, 2)])
    phases = rng.uniform(0.0, 2 * np.pi, freqs.size)
    sources = np.sin(2 * np.pi * freqs[:, None] * t[None, :] + phases[:, None])

    # shared row + per-channel perturbation; dispersion controls how different
    # the channels are from each other, which is the classification signal
    shared = rng.normal(1.0, 0.1, freqs.size)
    perturb = rng.standard_normal((c, freqs.size))
    mixing = shared[None, :] + dispersion * perturb

    data = mixing @ sources
    for ch in range(c):
        data[ch] += _pink_noise(rng, n, spec.noise_exponent)
    data += spec.pli_amplitude * np.sin(2 * np.pi * 50.0 * t)[None, :]
    return 10.0 * data  # ~microvolt scale


def synth_cohort(spec: CohortSpec) -> list[SyntheticSubject]:
    """Generate the full cohort; deterministic given spec.rng_seed."""
    label_rng = np.random.default_rng([spec.rng_seed, _RNG_LABELS])
    order = label_rng.permutation(spec.n_subjects)
    stress_idx = set(order[: spec.n_stress].tolist())

    channel_names = [f"CH{i + 1:02d}" for i in range(spec.n_channels)]
    subjects = []
    for i in range(spec.n_subjects):
        label = Label.STRESS if i in stress_idx else Label.NORMAL
        dispersion = (spec.dispersion_stress if label is Label.STRESS
                      else spec.dispersion_normal)
        subject_id = f"S{i + 1:02d}"
        recs = {}
        for seg_idx, segment in enumerate(Segment):
            data = _synth_segment(spec, i, seg_idx, dispersion)
            recs[segment] = Recording(
                subject_id=subject_id,
                segment=segment,
                channel_names=list(channel_names),
                sample_rate_hz=spec.sample_rate_hz,
                data=data,
            )
        subjects.append(SyntheticSubject(subject_id, label, recs))
    return subjects


def synth_forms(labels: list[tuple[str, Label]], rng_seed: int,
                noise_sd: float = 0.1) -> list[SubjectForms]:
    """Questionnaire scores consistent with the true labels.

    Stress subjects get higher anxiety (y1/y2) and lower EQ means; noise_sd=0
    makes the separation exact.
    """
    if not labels:
        raise InputError("labels must be nonempty")
    forms = []
    for i, (subject_id, label) in enumerate(labels):
        rng = np.random.default_rng([rng_seed, _RNG_FORMS, i])
        stressed = label is Label.STRESS
        anx_mean = 0.7 if stressed else 0.3
        eq_mean = 0.3 if stressed else 0.7
        vals = {
            "y1_pre": anx_mean, "y1_post": anx_mean,
            "y2_pre": anx_mean, "y2_post": anx_mean,
            "eq_pre": eq_mean, "eq_post": eq_mean,
        }
        noisy = {k: max(0.0, v + noise_sd * rng.standard_normal())
                 for k, v in vals.items()}
        forms.append(SubjectForms(subject_id=subject_id, **noisy))
    return forms
