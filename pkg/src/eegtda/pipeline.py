"""File-level pipeline: stage functions, artifact readers/writers, manifest.

Every stage has an in-memory function plus writers/readers whose float
serialization round-trips exactly (shortest repr), so chaining stages through
files produces bit-identical results to the monolithic `run`.
"""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import __version__
from .errors import ConfigError, InputError
from .homology import PersistenceDiagram, compute_persistence, rips_filtration
from .learning import (EvalReport, FeatureVector, Grouping, ModelKind,
                       StudyDataset, assemble_features, holdout_eval, kfold_cv,
                       label_from_forms, paired_ttest)
from .plots import barcode_svg, persistence_diagram_svg
from .pointcloud import PointCloud, distance_matrix, pca_embed
from .preprocessing import FilterSpec, preprocess, segment_trials
from .signal_io import (CohortSpec, Label, Recording, Segment, SubjectForms,
                        load_recording, synth_cohort, synth_forms)
from .tsne import tsne_embed

SCHEMA = "v1"
_RNG_EVAL = 17
_RNG_TSNE = 19


def _schema_line(kind: str) -> str:
    return f"# schema=eegtda/{kind}/{SCHEMA}"


def _fmt(v: float) -> str:
    return "inf" if np.isinf(v) else repr(float(v))


@dataclass
class PipelineConfig:
    source: str = "synth"                      # "synth" | "dir"
    cohort: CohortSpec = field(default_factory=CohortSpec)
    recordings_dir: Optional[str] = None
    labels_csv: Optional[str] = None
    sample_rate_hz: float = 500.0              # dir source only
    filter: FilterSpec = field(default_factory=FilterSpec)
    window_s: float = 10.0
    embed_dim: int = 3
    threshold: Union[str, float] = "auto"
    max_dim: int = 2
    infinite_bars: str = "threshold"
    forms_noise_sd: float = 0.05
    models: list = field(default_factory=lambda: ["rf", "dt", "svm", "lr", "mlp"])
    protocol: str = "cv5"                      # "cv5" | "holdout"
    k_folds: int = 5
    grouping: str = "subject"                  # "subject" | "trial"
    seed: int = 0
    save_recordings: bool = False
    write_svg: bool = True
    tsne_iters: int = 1000
    tsne_perplexity: Optional[float] = None

    def __post_init__(self):
        if self.source not in ("synth", "dir"):
            raise ConfigError(f"unknown source {self.source!r}")
        if self.source == "dir":
            if not self.recordings_dir:
                raise ConfigError("dir source requires recordings_dir")
            if not Path(self.recordings_dir).is_dir():
                raise ConfigError(f"recordings_dir not found: {self.recordings_dir}")
            if self.labels_csv and not Path(self.labels_csv).exists():
                raise ConfigError(f"labels_csv not found: {self.labels_csv}")
        if self.protocol not in ("cv5", "holdout"):
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.grouping not in ("subject", "trial"):
            raise ConfigError(f"unknown grouping {self.grouping!r}")
        if self.infinite_bars not in ("threshold", "drop"):
            raise ConfigError(f"unknown infinite_bars mode {self.infinite_bars!r}")
        if not 0 <= self.max_dim <= 2:
            raise ConfigError("max_dim must be 0, 1 or 2")
        for m in self.models:
            ModelKind(m)  # raises ValueError for unknown names
        fs = (self.cohort.sample_rate_hz if self.source == "synth"
              else self.sample_rate_hz)
        self.filter.validate_for(fs)
        if self.window_s <= 0:
            raise ConfigError("window_s must be positive")

    @classmethod
    def from_json(cls, path, overrides: Optional[dict] = None) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw, overrides)

    @classmethod
    def from_dict(cls, raw: dict, overrides: Optional[dict] = None) -> "PipelineConfig":
        raw = dict(raw)
        raw.update(overrides or {})
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            if isinstance(raw.get("cohort"), dict):
                raw["cohort"] = CohortSpec(**raw["cohort"])
            if isinstance(raw.get("filter"), dict):
                raw["filter"] = FilterSpec(**raw["filter"])
        except TypeError as exc:
            raise ConfigError(f"bad cohort/filter fields: {exc}") from exc
        return cls(**raw)

    def canonical_dict(self) -> dict:
        d = asdict(self)
        return d

    def config_hash(self) -> str:
        payload = json.dumps(self.canonical_dict(), sort_keys=True,
                             separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class TrialDiagram:
    subject_id: str
    segment: Segment
    trial_index: int
    diagram: PersistenceDiagram


@dataclass
class TrialCloud:
    subject_id: str
    segment: Segment
    trial_index: int
    cloud: PointCloud


# ---------------------------------------------------------------- synth stage

def run_synth(cfg: PipelineConfig):
    """Returns (recordings, true_labels, forms, baseline_labels)."""
    subjects = synth_cohort(cfg.cohort)
    recordings = [s.recordings[seg] for s in subjects for seg in Segment]
    true_labels = {s.subject_id: s.label for s in subjects}
    forms = synth_forms([(s.subject_id, s.label) for s in subjects],
                        cfg.cohort.rng_seed, noise_sd=cfg.forms_noise_sd)
    baseline = label_from_forms(forms)
    return recordings, true_labels, forms, baseline


def write_labels(out: Path, baseline: dict, true_labels: Optional[dict]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "labels.csv", "w") as fh:
        fh.write(_schema_line("labels") + "\n")
        fh.write("subject,baseline_label,true_label\n")
        for sid in sorted(baseline):
            true = true_labels.get(sid).name.lower() if true_labels else ""
            fh.write(f"{sid},{baseline[sid].name.lower()},{true}\n")


def read_labels(path: Path) -> dict[str, Label]:
    if not path.exists():
        raise InputError(f"labels file not found: {path}")
    labels = {}
    for line in path.read_text().splitlines():
        if line.startswith("#") or line.startswith("subject") or not line:
            continue
        sid, baseline = line.split(",")[:2]
        labels[sid] = Label[baseline.upper()]
    return labels


def write_forms(out: Path, forms: list[SubjectForms]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    cols = ["y1_pre", "y1_post", "y2_pre", "y2_post", "eq_pre", "eq_post"]
    with open(out / "forms.csv", "w") as fh:
        fh.write(_schema_line("forms") + "\n")
        fh.write("subject," + ",".join(cols) + "\n")
        for f in sorted(forms, key=lambda f: f.subject_id):
            vals = ",".join(_fmt(getattr(f, c)) for c in cols)
            fh.write(f"{f.subject_id},{vals}\n")


def read_forms(path: Path) -> list[SubjectForms]:
    if not path.exists():
        raise InputError(f"forms file not found: {path}")
    forms = []
    for line in path.read_text().splitlines():
        if line.startswith("#") or line.startswith("subject") or not line:
            continue
        parts = line.split(",")
        forms.append(SubjectForms(parts[0], *[float(v) for v in parts[1:7]]))
    return forms


def _rec_stem(rec: Recording) -> str:
    return f"{rec.subject_id}_{rec.segment.value}"


def write_recordings(out: Path, recordings: list[Recording]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for rec in recordings:
        stem = _rec_stem(rec)
        np.save(out / f"{stem}.npy", rec.data)
        meta = {
            "schema": f"eegtda/recording-meta/{SCHEMA}",
            "subject_id": rec.subject_id,
            "segment": rec.segment.value,
            "sample_rate_hz": rec.sample_rate_hz,
            "channel_names": rec.channel_names,
        }
        (out / f"{stem}.meta.json").write_text(
            json.dumps(meta, sort_keys=True, indent=1) + "\n")


def read_recordings(path: Path) -> list[Recording]:
    if not path.is_dir():
        raise InputError(f"recordings directory not found: {path}")
    recs = []
    for meta_file in sorted(path.glob("*.meta.json")):
        meta = json.loads(meta_file.read_text())
        data = np.load(meta_file.with_name(meta_file.name.replace(".meta.json", ".npy")))
        recs.append(Recording(
            subject_id=meta["subject_id"],
            segment=Segment(meta["segment"]),
            channel_names=meta["channel_names"],
            sample_rate_hz=meta["sample_rate_hz"],
            data=data,
        ))
    if not recs:
        raise InputError(f"no recordings found under {path}")
    return _sorted_recordings(recs)


_SEG_ORDER = {seg: i for i, seg in enumerate(Segment)}


def _sorted_recordings(recs: list[Recording]) -> list[Recording]:
    return sorted(recs, key=lambda r: (r.subject_id, _SEG_ORDER[r.segment]))


def load_recordings_csv_dir(path: Path, sample_rate_hz: float) -> list[Recording]:
    """User-supplied CSVs named <subject>_<segment>.csv."""
    path = Path(path)
    recs = []
    for f in sorted(path.glob("*.csv")):
        stem = f.stem
        seg = None
        for segment in Segment:
            if stem.endswith("_" + segment.value):
                seg = segment
                sid = stem[: -len(segment.value) - 1]
        if seg is None:
            raise InputError(
                f"{f.name}: expected <subject>_<segment>.csv with segment in "
                f"{[s.value for s in Segment]}")
        recs.append(load_recording(f, sid, seg, sample_rate_hz))
    if not recs:
        raise InputError(f"no recording CSVs found under {path}")
    return _sorted_recordings(recs)


# ----------------------------------------------------------- preprocess stage

def run_preprocess(cfg: PipelineConfig,
                   recordings: list[Recording]) -> list[Recording]:
    return [preprocess(rec, cfg.filter) for rec in recordings]


# ---------------------------------------------------------------- embed stage

def run_embed(cfg: PipelineConfig, recordings: list[Recording],
              labels: dict[str, Label]) -> list[TrialCloud]:
    clouds = []
    for rec in _sorted_recordings(recordings):
        for trial in segment_trials(rec, cfg.window_s,
                                    label=labels.get(rec.subject_id)):
            pc = pca_embed(trial, d=cfg.embed_dim)
            clouds.append(TrialCloud(rec.subject_id, rec.segment,
                                     trial.trial_index, pc))
    return clouds


def write_pointclouds(out: Path, clouds: list[TrialCloud]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    d = clouds[0].cloud.dim if clouds else 0
    coord_cols = ",".join(f"x{i}" for i in range(d))
    with open(out / "points.csv", "w") as fh:
        fh.write(_schema_line("pointclouds") + "\n")
        fh.write(f"subject,segment,trial,channel,{coord_cols}\n")
        for tc in clouds:
            for name, point in zip(tc.cloud.channel_names, tc.cloud.points):
                coords = ",".join(_fmt(v) for v in point)
                fh.write(f"{tc.subject_id},{tc.segment.value},"
                         f"{tc.trial_index},{name},{coords}\n")
    with open(out / "explained_variance.csv", "w") as fh:
        fh.write(_schema_line("explained-variance") + "\n")
        fh.write("subject,segment,trial," +
                 ",".join(f"ev{i}" for i in range(d)) + "\n")
        for tc in clouds:
            evs = ",".join(_fmt(v) for v in tc.cloud.explained_variance)
            fh.write(f"{tc.subject_id},{tc.segment.value},{tc.trial_index},{evs}\n")


def read_pointclouds(path: Path) -> list[TrialCloud]:
    points_file = path / "points.csv" if path.is_dir() else path
    if not points_file.exists():
        raise InputError(f"point cloud file not found: {points_file}")
    rows: dict[tuple, list] = {}
    for line in points_file.read_text().splitlines():
        if line.startswith("#") or line.startswith("subject") or not line:
            continue
        parts = line.split(",")
        key = (parts[0], Segment(parts[1]), int(parts[2]))
        rows.setdefault(key, []).append(
            (parts[3], [float(v) for v in parts[4:]]))
    clouds = []
    for key in sorted(rows, key=lambda k: (k[0], _SEG_ORDER[k[1]], k[2])):
        names = [r[0] for r in rows[key]]
        pts = np.array([r[1] for r in rows[key]], dtype=np.float64)
        clouds.append(TrialCloud(key[0], key[1], key[2], PointCloud(
            points=pts, channel_names=names,
            explained_variance=np.zeros(pts.shape[1]))))
    return clouds


# -------------------------------------------------------------- persist stage

def run_persist(cfg: PipelineConfig, clouds: list[TrialCloud]) -> list[TrialDiagram]:
    out = []
    for tc in clouds:
        dm = distance_matrix(tc.cloud)
        filt = rips_filtration(dm, max_dim=cfg.max_dim, threshold=cfg.threshold)
        pd = compute_persistence(filt)
        out.append(TrialDiagram(tc.subject_id, tc.segment, tc.trial_index, pd))
    return out


def _diagram_stem(td: TrialDiagram) -> str:
    return f"{td.subject_id}_{td.segment.value}_{td.trial_index:03d}"


def write_diagram_csv(path: Path, pd: PersistenceDiagram) -> None:
    with open(path, "w") as fh:
        fh.write(_schema_line("diagram") + "\n")
        fh.write(f"# n_points={pd.n_points} max_dim={pd.max_dim} "
                 f"threshold={_fmt(pd.threshold)}\n")
        fh.write("dim,birth,death\n")
        for dim in range(pd.max_dim + 1):
            b, d = pd.pairs(dim, include_zero=True)
            for bi, di in zip(b, d):
                fh.write(f"{dim},{_fmt(bi)},{_fmt(di)}\n")


def read_diagram_csv(path: Path) -> PersistenceDiagram:
    if not path.exists():
        raise InputError(f"diagram file not found: {path}")
    n_points = max_dim = None
    threshold = 0.0
    per_dim: dict[int, list] = {}
    for line in path.read_text().splitlines():
        if line.startswith("# n_points="):
            fields = dict(kv.split("=") for kv in line[2:].split())
            n_points = int(fields["n_points"])
            max_dim = int(fields["max_dim"])
            threshold = float(fields["threshold"])
            continue
        if line.startswith("#") or line.startswith("dim") or not line:
            continue
        dim_s, b_s, d_s = line.split(",")
        per_dim.setdefault(int(dim_s), []).append((float(b_s), float(d_s)))
    if n_points is None:
        raise InputError(f"{path}: missing diagram metadata header")
    pd = PersistenceDiagram(n_points=n_points, max_dim=max_dim,
                            threshold=threshold)
    for dim in range(max_dim + 1):
        pairs = per_dim.get(dim, [])
        pd.births[dim] = np.array([p[0] for p in pairs], dtype=np.float64)
        pd.deaths[dim] = np.array([p[1] for p in pairs], dtype=np.float64)
    return pd


def write_diagrams(out: Path, diagrams: list[TrialDiagram]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for td in diagrams:
        write_diagram_csv(out / f"{_diagram_stem(td)}.csv", td.diagram)


def read_diagrams(path: Path) -> list[TrialDiagram]:
    if not path.is_dir():
        raise InputError(f"diagrams directory not found: {path}")
    out = []
    for f in sorted(path.glob("*.csv")):
        sid, seg, trial = f.stem.rsplit("_", 2)[0], None, None
        parts = f.stem.split("_")
        trial = int(parts[-1])
        seg_val = "_".join(parts[1:-1])
        sid = parts[0]
        seg = Segment(seg_val)
        out.append(TrialDiagram(sid, seg, trial, read_diagram_csv(f)))
    if not out:
        raise InputError(f"no diagram CSVs under {path}")
    out.sort(key=lambda td: (td.subject_id, _SEG_ORDER[td.segment], td.trial_index))
    return out


# ----------------------------------------------------------------- plot stage

def run_plot(diagrams: list[TrialDiagram], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for td in diagrams:
        stem = _diagram_stem(td)
        (out / f"{stem}.svg").write_text(
            persistence_diagram_svg(td.diagram, title=stem) + "\n")
        (out / f"{stem}_barcode.svg").write_text(
            barcode_svg(td.diagram, title=stem) + "\n")


# ------------------------------------------------------------- features stage

def run_features(cfg: PipelineConfig, diagrams: list[TrialDiagram],
                 labels: dict[str, Label]) -> list[FeatureVector]:
    return [
        assemble_features(td.diagram, td.subject_id, td.segment, td.trial_index,
                          label=labels.get(td.subject_id),
                          infinite=cfg.infinite_bars)
        for td in diagrams
    ]


def write_features(out: Path, features: list[FeatureVector]) -> None:
    from .learning import FEATURE_NAMES
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "features.csv", "w") as fh:
        fh.write(_schema_line("features") + "\n")
        fh.write("subject,segment,trial,label," + ",".join(FEATURE_NAMES) + "\n")
        for fv in features:
            label = fv.label.name.lower() if fv.label is not None else ""
            vals = ",".join(_fmt(v) for v in fv.values)
            fh.write(f"{fv.subject_id},{fv.segment.value},{fv.trial_index},"
                     f"{label},{vals}\n")


def read_features(path: Path) -> list[FeatureVector]:
    features_file = path / "features.csv" if path.is_dir() else path
    if not features_file.exists():
        raise InputError(f"features file not found: {features_file}")
    out = []
    for line in features_file.read_text().splitlines():
        if line.startswith("#") or line.startswith("subject") or not line:
            continue
        parts = line.split(",")
        label = Label[parts[3].upper()] if parts[3] else None
        out.append(FeatureVector(
            subject_id=parts[0], segment=Segment(parts[1]),
            trial_index=int(parts[2]),
            values=np.array([float(v) for v in parts[4:]], dtype=np.float64),
            label=label))
    if not out:
        raise InputError(f"no feature rows in {features_file}")
    return out


# ------------------------------------------------------------- evaluate stage

def _dataset_from(features: list[FeatureVector],
                  segment: Optional[Segment]) -> StudyDataset:
    rows = [f for f in features if segment is None or f.segment is segment]
    if any(f.label is None for f in rows):
        raise InputError("cannot evaluate: feature rows missing labels")
    return StudyDataset(
        features=np.array([f.values for f in rows]),
        labels=np.array([f.label.value for f in rows], dtype=np.int64),
        groups=[f.subject_id for f in rows],
        segment=segment,
    )


def run_evaluate(cfg: PipelineConfig, features: list[FeatureVector],
                 forms: Optional[list[SubjectForms]] = None) -> dict:
    grouping = (Grouping.BY_SUBJECT if cfg.grouping == "subject"
                else Grouping.BY_TRIAL)
    reports: list[EvalReport] = []
    scopes = [None] + list(Segment)
    for scope_idx, scope in enumerate(scopes):
        ds = _dataset_from(features, scope)
        for model_idx, name in enumerate(cfg.models):
            kind = ModelKind(name)
            seed = int(np.random.default_rng(
                [cfg.seed, _RNG_EVAL, scope_idx, model_idx]).integers(0, 2 ** 31))
            if cfg.protocol == "cv5":
                rep = kfold_cv(ds, kind, k=cfg.k_folds, grouping=grouping,
                               seed=seed)
            else:
                rep = holdout_eval(ds, kind, grouping=grouping, seed=seed)
            reports.append(rep)

    significance = {}
    if forms:
        forms = sorted(forms, key=lambda f: f.subject_id)
        y1 = [(f.y1_pre + f.y1_post) / 2 for f in forms]
        y2 = [(f.y2_pre + f.y2_post) / 2 for f in forms]
        eq = [(f.eq_pre + f.eq_post) / 2 for f in forms]
        for name, (a, b) in {"y1_vs_eq": (y1, eq), "y2_vs_eq": (y2, eq),
                             "y1_vs_y2": (y1, y2)}.items():
            t, p = paired_ttest(a, b)
            significance[name] = {"t": t, "p": p}
    return {"reports": reports, "significance": significance}


def write_eval(out: Path, cfg: PipelineConfig, result: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rep in result["reports"]:
        rows.append({
            "model": rep.model.value,
            "segment": rep.segment.value if rep.segment else "all",
            "accuracy_mean": rep.accuracy_mean,
            "accuracy_sd": rep.accuracy_sd,
            "f1": rep.f1,
            "kappa": rep.kappa,
            "fold_accuracies": rep.fold_accuracies,
            "fold_of_group": rep.fold_of_group,
            "seed": rep.seed,
        })
    payload = {
        "schema": f"eegtda/eval/{SCHEMA}",
        "protocol": cfg.protocol,
        "grouping": cfg.grouping,
        "seed": cfg.seed,
        "tsne_source": "features",
        "reports": rows,
        "significance": result["significance"],
    }
    (out / "report.json").write_text(
        json.dumps(payload, sort_keys=True, indent=1) + "\n")
    with open(out / "report.csv", "w") as fh:
        fh.write(_schema_line("eval") + "\n")
        fh.write("model,segment,accuracy_mean,accuracy_sd,f1,kappa\n")
        for r in rows:
            fh.write(f"{r['model']},{r['segment']},{_fmt(r['accuracy_mean'])},"
                     f"{_fmt(r['accuracy_sd'])},{_fmt(r['f1'])},{_fmt(r['kappa'])}\n")


# ----------------------------------------------------------------- tsne stage

def run_tsne(cfg: PipelineConfig, features: list[FeatureVector]) -> np.ndarray:
    x = np.array([f.values for f in features])
    sd = x.std(axis=0)
    x = (x - x.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    seed = int(np.random.default_rng([cfg.seed, _RNG_TSNE]).integers(0, 2 ** 31))
    return tsne_embed(x, perplexity=cfg.tsne_perplexity, iters=cfg.tsne_iters,
                      seed=seed)


def write_tsne(out: Path, features: list[FeatureVector],
               embedding: np.ndarray) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "tsne.csv", "w") as fh:
        fh.write(_schema_line("tsne") + "\n")
        fh.write("# source=features\n")
        fh.write("x,y,subject,segment,label\n")
        for fv, (x, y) in zip(features, embedding):
            label = fv.label.name.lower() if fv.label is not None else ""
            fh.write(f"{_fmt(x)},{_fmt(y)},{fv.subject_id},"
                     f"{fv.segment.value},{label}\n")


# ------------------------------------------------------------------ manifest

def write_manifest(out: Path, cfg: PipelineConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema": f"eegtda/manifest/{SCHEMA}",
        "config": cfg.canonical_dict(),
        "config_sha256": cfg.config_hash(),
        "seed": cfg.seed,
        "versions": {
            "eegtda": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------- end to end

def load_source(cfg: PipelineConfig):
    """Recordings + labels (+ forms for synth) from the configured source."""
    if cfg.source == "synth":
        return run_synth(cfg)
    recordings = load_recordings_csv_dir(Path(cfg.recordings_dir),
                                         cfg.sample_rate_hz)
    labels = {}
    if cfg.labels_csv:
        labels = read_labels(Path(cfg.labels_csv))
    return recordings, None, None, labels


def cmd_run(cfg: PipelineConfig, out_dir) -> Path:
    """Full pipeline; artifact tree is a pure function of the config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failed_marker = out / "failed"
    if failed_marker.exists():
        failed_marker.unlink()
    stage = "config"
    try:
        write_manifest(out, cfg)

        stage = "synth" if cfg.source == "synth" else "load"
        recordings, true_labels, forms, labels = load_source(cfg)
        write_labels(out / "cohort", labels, true_labels)
        if forms:
            write_forms(out / "cohort", forms)
        if cfg.save_recordings:
            write_recordings(out / "recordings" / "raw", recordings)

        stage = "preprocess"
        filtered = run_preprocess(cfg, recordings)
        if cfg.save_recordings:
            write_recordings(out / "recordings" / "preprocessed", filtered)

        stage = "embed"
        clouds = run_embed(cfg, filtered, labels)
        write_pointclouds(out / "pointclouds", clouds)

        stage = "persist"
        diagrams = run_persist(cfg, clouds)
        write_diagrams(out / "diagrams", diagrams)
        if cfg.write_svg:
            run_plot(diagrams, out / "diagrams" / "svg")

        stage = "features"
        features = run_features(cfg, diagrams, labels)
        write_features(out / "features", features)

        if labels:
            stage = "evaluate"
            result = run_evaluate(cfg, features, forms)
            write_eval(out / "eval", cfg, result)

        stage = "tsne"
        embedding = run_tsne(cfg, features)
        write_tsne(out / "tsne", features, embedding)
    except Exception as exc:
        failed_marker.write_text(f"stage={stage}\nerror={exc}\n")
        raise
    return out
