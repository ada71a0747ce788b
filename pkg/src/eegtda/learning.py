"""Feature assembly, baseline labels, cross-validated evaluation, significance.

The trial feature vector is 18 reals: for each homology dimension 0..2 the
pair count, mean / max / std lifetime, total persistence and persistent
entropy, with infinite bars replaced by the filtration threshold first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, InputError, NumericError
from .homology import PersistenceDiagram, persistent_entropy
from .models import MLP, DecisionTree, LinearSVM, LogisticRegressionGD, RandomForest
from .signal_io import Label, Segment, SubjectForms
from .stats import student_t_two_tailed_p

FEATURE_NAMES = [
    f"h{dim}_{stat}"
    for dim in range(3)
    for stat in ("count", "mean_life", "max_life", "std_life", "total_pers",
                 "entropy")
]


class ModelKind(enum.Enum):
    RF = "rf"
    DT = "dt"
    SVM = "svm"
    LR = "lr"
    MLP = "mlp"


class Grouping(enum.Enum):
    BY_TRIAL = "trial"
    BY_SUBJECT = "subject"


@dataclass
class FeatureVector:
    subject_id: str
    segment: Segment
    trial_index: int
    values: np.ndarray  # (18,)
    label: Optional[Label] = None


@dataclass
class StudyDataset:
    features: np.ndarray          # (m, 18)
    labels: np.ndarray            # (m,) in {0, 1}
    groups: list[str]             # subject id per row
    segment: Optional[Segment] = None

    def __post_init__(self):
        if not (len(self.features) == len(self.labels) == len(self.groups)):
            raise InputError("features, labels and groups must be aligned")
        if not np.all(np.isfinite(self.features)):
            raise InputError("non-finite feature values")


@dataclass
class EvalReport:
    model: ModelKind
    segment: Optional[Segment]
    accuracy_mean: float
    accuracy_sd: float
    f1: float
    kappa: float
    fold_accuracies: list[float]
    fold_of_group: dict
    seed: int


def assemble_features(pd: PersistenceDiagram, subject_id: str, segment: Segment,
                      trial_index: int, label: Optional[Label] = None,
                      infinite: str = "threshold") -> FeatureVector:
    """Summarize one diagram into the fixed 18-real feature vector."""
    values = []
    for dim in range(3):
        life = pd.lifetimes(dim, infinite=infinite) if dim in pd.births else np.zeros(0)
        if life.size == 0:
            values.extend([0.0] * 5)
        else:
            values.extend([
                float(life.size),
                float(life.mean()),
                float(life.max()),
                float(life.std()),
                float(life.sum()),
            ])
        ent = persistent_entropy(pd, dim, infinite=infinite) if dim in pd.births else 0.0
        values.append(ent)
    return FeatureVector(subject_id=subject_id, segment=segment,
                         trial_index=trial_index,
                         values=np.asarray(values, dtype=np.float64),
                         label=label)


def label_from_forms(forms: list[SubjectForms],
                     weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
                     quantile: float = 0.5) -> dict[str, Label]:
    """Baseline labels from questionnaire scores.

    Stress index = weighted mean of min-max-normalized y1, y2 and inverted EQ
    (pre/post averaged); Stress iff index >= the cohort's `quantile` quantile
    (ties count as Stress).
    """
    if not forms:
        raise InputError("no forms supplied")
    y1 = np.array([(f.y1_pre + f.y1_post) / 2.0 for f in forms])
    y2 = np.array([(f.y2_pre + f.y2_post) / 2.0 for f in forms])
    eq = np.array([(f.eq_pre + f.eq_post) / 2.0 for f in forms])

    def norm(v, name):
        rng = v.max() - v.min()
        if rng == 0:
            raise NumericError(f"cannot normalize constant scale {name}")
        return (v - v.min()) / rng

    w = np.asarray(weights, dtype=np.float64)
    idx = (w[0] * norm(y1, "y1") + w[1] * norm(y2, "y2")
           + w[2] * (1.0 - norm(eq, "eq"))) / w.sum()
    thr = float(np.quantile(idx, quantile))
    return {f.subject_id: (Label.STRESS if v >= thr else Label.NORMAL)
            for f, v in zip(forms, idx)}


def _make_model(kind: ModelKind, seed: int):
    if kind is ModelKind.RF:
        return RandomForest(seed=seed)
    if kind is ModelKind.DT:
        return DecisionTree(seed=seed)
    if kind is ModelKind.SVM:
        return LinearSVM()
    if kind is ModelKind.LR:
        return LogisticRegressionGD()
    if kind is ModelKind.MLP:
        return MLP(seed=seed)
    raise ConfigError(f"unknown model kind {kind!r}")


class _Scaler:
    """Z-score standardization fitted on training data only."""

    def fit(self, x):
        x = np.asarray(x, dtype=np.float64)
        self.mean = x.mean(axis=0)
        sd = x.std(axis=0)
        self.sd = np.where(sd > 0, sd, 1.0)
        return self

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.sd


def train_predict(kind: ModelKind, train: StudyDataset, test_features,
                  seed: int = 0):
    """Fit one model on `train` and predict labels + scores for test_features."""
    scaler = _Scaler().fit(train.features)
    model = _make_model(kind, seed)
    model.fit(scaler.transform(train.features), train.labels)
    xt = scaler.transform(test_features)
    return model.predict(xt), model.decision_scores(xt)


def metrics(y_true, y_pred) -> tuple[float, float, float]:
    """(accuracy, F1 for the positive=Stress class, Cohen's kappa)."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise InputError("length mismatch between y_true and y_pred")
    if len(y_true) == 0:
        raise InputError("empty inputs")
    n = len(y_true)
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    accuracy = (tp + tn) / n
    f1 = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else 0.0
    p_e = ((tp + fn) * (tp + fp) + (tn + fp) * (tn + fn)) / n ** 2
    if p_e == 1.0:
        raise NumericError("kappa undefined: expected agreement is 1")
    kappa = (accuracy - p_e) / (1.0 - p_e)
    return accuracy, f1, kappa


def _stratified_group_folds(group_ids: list[str], group_labels: dict, k: int,
                            seed: int) -> dict[str, int]:
    """Deal shuffled groups of each class round-robin into k folds."""
    rng = np.random.default_rng([seed, 307])
    fold_of = {}
    for label in (1, 0):
        members = sorted(g for g in group_ids if group_labels[g] == label)
        members = [members[i] for i in rng.permutation(len(members))]
        for i, g in enumerate(members):
            fold_of[g] = i % k
    return fold_of


def kfold_cv(ds: StudyDataset, kind: ModelKind, k: int = 5,
             grouping: Grouping = Grouping.BY_SUBJECT, seed: int = 0) -> EvalReport:
    """Stratified grouped k-fold cross-validation.

    BY_SUBJECT keeps all of a subject's trials in one fold; standardization is
    refit inside each training fold (no leakage).
    """
    if grouping is Grouping.BY_SUBJECT:
        group_of_row = np.asarray(ds.groups)
    else:
        group_of_row = np.arange(len(ds.labels)).astype(str)
    unique_groups = sorted(set(group_of_row.tolist()))
    if k > len(unique_groups):
        raise ConfigError(f"k={k} exceeds number of groups {len(unique_groups)}")
    group_labels = {}
    for g in unique_groups:
        labs = np.unique(ds.labels[group_of_row == g])
        group_labels[g] = int(labs[-1])  # one label per group by construction

    fold_of = _stratified_group_folds(unique_groups, group_labels, k, seed)
    fold_of_row = np.array([fold_of[g] for g in group_of_row])

    fold_accs = []
    pooled_true, pooled_pred = [], []
    for fold in range(k):
        test_mask = fold_of_row == fold
        train = StudyDataset(
            features=ds.features[~test_mask],
            labels=ds.labels[~test_mask],
            groups=[g for g, m in zip(ds.groups, test_mask) if not m],
            segment=ds.segment,
        )
        if len(np.unique(train.labels)) < 2:
            raise ConfigError(f"fold {fold}: training data has a single class")
        preds, _ = train_predict(kind, train, ds.features[test_mask],
                                 seed=seed * 1009 + fold)
        truth = ds.labels[test_mask]
        fold_accs.append(float(np.mean(preds == truth)))
        pooled_true.extend(truth.tolist())
        pooled_pred.extend(preds.tolist())

    _, f1, kappa = metrics(pooled_true, pooled_pred)
    return EvalReport(
        model=kind,
        segment=ds.segment,
        accuracy_mean=float(np.mean(fold_accs)),
        accuracy_sd=float(np.std(fold_accs)),
        f1=f1,
        kappa=kappa,
        fold_accuracies=fold_accs,
        fold_of_group=fold_of,
        seed=seed,
    )


def holdout_eval(ds: StudyDataset, kind: ModelKind, test_fraction: float = 0.2,
                 grouping: Grouping = Grouping.BY_SUBJECT,
                 seed: int = 0) -> EvalReport:
    """Single stratified grouped holdout split (default 80-20)."""
    k = max(2, int(round(1.0 / test_fraction)))
    if grouping is Grouping.BY_SUBJECT:
        group_of_row = np.asarray(ds.groups)
    else:
        group_of_row = np.arange(len(ds.labels)).astype(str)
    unique_groups = sorted(set(group_of_row.tolist()))
    group_labels = {g: int(np.unique(ds.labels[group_of_row == g])[-1])
                    for g in unique_groups}
    fold_of = _stratified_group_folds(unique_groups, group_labels, k, seed)
    test_mask = np.array([fold_of[g] == 0 for g in group_of_row])
    train = StudyDataset(ds.features[~test_mask], ds.labels[~test_mask],
                         [g for g, m in zip(ds.groups, test_mask) if not m],
                         ds.segment)
    preds, _ = train_predict(kind, train, ds.features[test_mask], seed=seed)
    truth = ds.labels[test_mask]
    acc, f1, kappa = metrics(truth, preds)
    return EvalReport(model=kind, segment=ds.segment, accuracy_mean=acc,
                      accuracy_sd=0.0, f1=f1, kappa=kappa,
                      fold_accuracies=[acc], fold_of_group=fold_of, seed=seed)


def paired_ttest(a, b) -> tuple[float, float]:
    """Two-tailed paired Student t-test on per-subject values."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) != len(b):
        raise InputError("paired samples must have equal length")
    n = len(a)
    if n < 3:
        raise InputError("paired t-test needs n >= 3")
    diff = a - b
    sd = diff.std(ddof=1)
    if sd == 0:
        raise NumericError("paired t-test undefined: zero-variance differences")
    t = float(diff.mean() / (sd / np.sqrt(n)))
    p = student_t_two_tailed_p(t, n - 1)
    return t, p
