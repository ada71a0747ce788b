"""End-to-end acceptance battery.

Each test exercises one release gate and prints a single PASS line with
capture disabled so the verdicts are visible in plain `pytest -v` output.
"""

import json
import math
import time

import numpy as np

from conftest import diagrams_equal, make_cloud
from eegtda.homology import (PersistenceDiagram, compute_persistence,
                             h0_via_mst, persistent_entropy, rips_filtration)
from eegtda.homology_oracle import naive_persistence
from eegtda.learning import metrics, paired_ttest
from eegtda.models import MLP
from eegtda.pointcloud import DistanceMatrix, distance_matrix, pca_embed
from eegtda.preprocessing import FilterSpec, Trial, bandpass, notch
from eegtda.signal_io import Label, Recording, Segment, synth_forms
from eegtda.tsne import joint_probs, kl_and_grad


def report(capfd, num: int, text: str) -> None:
    with capfd.disabled():
        print(f"ACCEPTANCE {num}: PASS — {text}", flush=True)


def cloud_dm(rng, n):
    return distance_matrix(make_cloud(rng.random((n, 3))))


def test_criterion_01_persistence_oracle_equivalence(capfd):
    rng = np.random.default_rng(20260823)
    t0 = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(4, 9))
        filt = rips_filtration(cloud_dm(rng, n), 2, "auto")
        assert diagrams_equal(compute_persistence(filt),
                              naive_persistence(filt))
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report(capfd, 1, f"100 random clouds (n<=8) match the naive oracle exactly "
              f"in {elapsed:.2f}s")


def test_criterion_02_h0_mst_duality(capfd):
    t0 = time.perf_counter()
    checked = 0
    for n in (8, 16, 32, 64):
        for seed in range(20):
            rng = np.random.default_rng([n, seed])
            dm = cloud_dm(rng, n)
            pd = compute_persistence(rips_filtration(dm, 0, "auto"))
            _, deaths = pd.pairs(0, include_zero=True)
            finite = np.sort(deaths[np.isfinite(deaths)])
            assert np.array_equal(finite, h0_via_mst(dm))
            checked += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    report(capfd, 2, f"finite H0 deaths equal MST edge weights for {checked} clouds "
              f"(n up to 64) in {elapsed:.2f}s")


def test_criterion_03_entropy_identities(capfd):
    def diagram(pairs, threshold):
        pd = PersistenceDiagram(n_points=0, max_dim=2, threshold=threshold)
        for dim in range(3):
            pd.births[dim] = np.zeros(0)
            pd.deaths[dim] = np.zeros(0)
        pd.births[0] = np.array([p[0] for p in pairs], dtype=np.float64)
        pd.deaths[0] = np.array([p[1] for p in pairs], dtype=np.float64)
        return pd

    for count in (2, 5, 16):
        pd = diagram([(0.0, 1.0)] * count, threshold=2.0)
        assert abs(persistent_entropy(pd, 0) - math.log(count)) < 1e-12
    assert persistent_entropy(diagram([(0.2, 1.7)], 2.0), 0) == 0.0

    rng = np.random.default_rng(3)
    dm = cloud_dm(rng, 10)
    base = compute_persistence(rips_filtration(dm, 2, "auto"))
    for lam in (0.1, 7.3):
        scaled = compute_persistence(
            rips_filtration(DistanceMatrix(lam * dm.dist), 2, "auto"))
        for dim in range(3):
            assert abs(persistent_entropy(scaled, dim)
                       - persistent_entropy(base, dim)) < 1e-12
    report(capfd, 3, "uniform-lifetime E=ln L, single-bar E=0 and scale invariance "
              "all hold to 1e-12")


def test_criterion_04_filter_contracts(capfd):
    fs = 500.0

    def sine(freq, dur):
        t = np.arange(int(dur * fs)) / fs
        x = np.sin(2 * np.pi * freq * t)
        return Recording("S", Segment.TASK, ["A", "B"], fs, np.vstack([x, x]))

    def amp(x):
        mid = x[len(x) // 4: 3 * len(x) // 4]
        return float(np.sqrt(2.0) * np.sqrt(np.mean(mid ** 2)))

    spec = FilterSpec()
    a50 = amp(notch(sine(50.0, 60.0), spec).data[0])
    assert a50 <= 10 ** (-30 / 20)  # >= 30 dB rejection
    a10 = amp(bandpass(sine(10.0, 60.0), spec).data[0])
    assert abs(a10 - 1.0) <= 0.05
    a_low = amp(bandpass(sine(0.05, 120.0), spec).data[0])
    assert a_low <= 0.10  # >= 90% attenuation below f_low
    report(capfd, 4, f"notch leaves {a50:.4f} at 50 Hz (>=30 dB down), passband "
              f"{a10:.3f} at 10 Hz, {a_low:.3f} at 0.05 Hz")


def test_criterion_05_pca_gram_oracle(capfd):
    rng = np.random.default_rng(5)
    worst = 0.0
    for i in range(20):
        data = rng.standard_normal((32, 5000))
        trial = Trial("S", Segment.TASK, i, data, 500.0,
                      [f"C{c}" for c in range(32)])
        pc = pca_embed(trial, 3)
        centered = data - data.mean(axis=0, keepdims=True)
        vals, vecs = np.linalg.eigh(centered @ centered.T)
        vals, vecs = np.maximum(vals[::-1], 0.0), vecs[:, ::-1]
        ref = vecs[:, :3] * np.sqrt(vals[:3])
        err = np.abs(distance_matrix(make_cloud(pc.points)).dist
                     - distance_matrix(make_cloud(ref)).dist).max()
        worst = max(worst, err)
        assert err < 1e-8
        assert np.all(np.diff(pc.explained_variance) <= 1e-12)
        col_sd = pc.points.std(axis=0)
        assert np.all(np.abs(pc.points.mean(axis=0))
                      < 1e-9 * np.maximum(col_sd, 1e-30))
    report(capfd, 5, f"20 full-size trials match the Gram eigendecomposition "
              f"oracle (worst distance error {worst:.2e})")


def test_criterion_06_gradient_checks(capfd):
    rng = np.random.default_rng(6)
    eps = 1e-6

    # MLP
    x = rng.standard_normal((8, 4))
    y = rng.integers(0, 2, 8).astype(np.float64)
    mlp = MLP(hidden=5, seed=1)
    flat = mlp.init_params(4) + 0.1 * rng.standard_normal(mlp.init_params(4).size)
    _, grad = mlp.loss_and_grad(flat, x, y)
    worst_mlp = 0.0
    for i in range(flat.size):
        fp, fm = flat.copy(), flat.copy()
        fp[i] += eps
        fm[i] -= eps
        num = (mlp.loss_and_grad(fp, x, y)[0]
               - mlp.loss_and_grad(fm, x, y)[0]) / (2 * eps)
        worst_mlp = max(worst_mlp, abs(grad[i] - num) / max(abs(num), 1e-8))
    assert worst_mlp < 1e-4

    # t-SNE
    feats = rng.standard_normal((8, 5))
    p = joint_probs(feats, perplexity=2.0)
    emb = rng.standard_normal((8, 2))
    _, grad2 = kl_and_grad(p, emb)
    worst_tsne = 0.0
    for i in range(8):
        for j in range(2):
            ep, em = emb.copy(), emb.copy()
            ep[i, j] += eps
            em[i, j] -= eps
            num = (kl_and_grad(p, ep)[0] - kl_and_grad(p, em)[0]) / (2 * eps)
            worst_tsne = max(worst_tsne,
                             abs(grad2[i, j] - num) / max(abs(num), 1e-8))
    assert worst_tsne < 1e-4
    report(capfd, 6, f"MLP and t-SNE analytic gradients match finite differences "
              f"(worst rel err {worst_mlp:.1e} / {worst_tsne:.1e})")


def test_criterion_07_metric_hand_checks(capfd):
    y_true = np.array([1] * 50 + [0] * 50)
    y_pred = np.array([1] * 40 + [0] * 10 + [1] * 20 + [0] * 30)
    acc, f1, kappa = metrics(y_true, y_pred)
    assert abs(acc - 0.700) < 1e-12
    assert abs(f1 - 0.727) < 1e-3
    assert abs(kappa - 0.400) < 1e-3

    rng = np.random.default_rng(7)
    kappas = []
    for _ in range(100):
        shuffled = y_pred[rng.permutation(len(y_pred))]
        kappas.append(metrics(y_true, shuffled)[2])
    null_mean = float(np.mean(kappas))
    assert abs(null_mean) <= 0.1
    report(capfd, 7, f"confusion hand-case gives 0.700/0.727/0.400 and "
              f"permutation-null kappa {null_mean:+.3f}")


def test_criterion_08_end_to_end_synthetic_study(capfd, tmp_path):
    from eegtda.pipeline import PipelineConfig, cmd_run
    cfg = PipelineConfig.from_dict({
        "models": ["rf"],
        "seed": 7,
        "write_svg": False,
    })
    assert cfg.cohort.n_subjects == 20 and cfg.cohort.n_channels == 32
    assert cfg.cohort.sample_rate_hz == 500.0
    assert cfg.cohort.segment_duration_s == 180.0
    assert cfg.cohort.dispersion_stress / cfg.cohort.dispersion_normal == 3.0
    t0 = time.perf_counter()
    out = cmd_run(cfg, tmp_path / "study")
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0

    rows = [line for line in
            (out / "features" / "features.csv").read_text().splitlines()
            if line and not line.startswith("#")
            and not line.startswith("subject")]
    assert len(rows) == 1080

    payload = json.loads((out / "eval" / "report.json").read_text())
    accs = {r["segment"]: r["accuracy_mean"] for r in payload["reports"]
            if r["model"] == "rf"}
    assert accs["all"] >= 0.80
    report(capfd, 8, f"full-scale cohort: 1080 feature rows, subject-grouped 5-fold "
              f"RF accuracy {accs['all']:.3f} (pre-task {accs['pre_task']:.3f}) "
              f"in {elapsed:.0f}s")


def test_criterion_09_significance_harness(capfd):
    # a cohort that underwent the stressor: high stress scales, low well-being
    labels = [(f"S{i:02d}", Label.STRESS) for i in range(20)]
    forms = synth_forms(labels, rng_seed=9, noise_sd=0.05)
    y1 = [(f.y1_pre + f.y1_post) / 2 for f in forms]
    eq = [(f.eq_pre + f.eq_post) / 2 for f in forms]
    _, p = paired_ttest(y1, eq)
    assert p < 0.01
    report(capfd, 9, f"synthetic separated forms give paired-t p={p:.2e} "
              f"for the stress-scale vs well-being comparison")


def test_criterion_10_determinism(capfd, tmp_path):
    from eegtda.pipeline import PipelineConfig, cmd_run
    cfg_dict = {
        "cohort": {"n_subjects": 6, "n_stress": 3,
                   "segment_duration_s": 30.0, "sample_rate_hz": 250.0,
                   "n_channels": 8, "rng_seed": 5},
        "models": ["lr"],
        "k_folds": 3,
        "seed": 5,
        "save_recordings": True,
        "tsne_iters": 200,
    }
    trees = []
    for name in ("a", "b"):
        out = cmd_run(PipelineConfig.from_dict(dict(cfg_dict)),
                      tmp_path / name)
        tree = {}
        for path in sorted(out.rglob("*")):
            if path.is_file():
                tree[str(path.relative_to(out))] = path.read_bytes()
        trees.append(tree)
    assert set(trees[0]) == set(trees[1])
    for rel in trees[0]:
        assert trees[0][rel] == trees[1][rel], f"artifact differs: {rel}"
    report(capfd, 10, f"two identical-config runs produced byte-identical trees "
               f"({len(trees[0])} artifacts compared)")
