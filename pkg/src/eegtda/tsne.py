"""Exact (quadratic) t-SNE with perplexity bisection and momentum descent."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, InputError

EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
_EPS = 1e-12


def _conditional_probs(sq_dists: np.ndarray, perplexity: float,
                       tol: float = 1e-5, max_iter: int = 100) -> np.ndarray:
    """Per-row Gaussian affinities with bandwidths bisected to the target
    perplexity (within tol)."""
    m = sq_dists.shape[0]
    p = np.zeros((m, m))
    for i in range(m):
        d = np.delete(sq_dists[i], i)
        beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
        for _ in range(max_iter):
            w = np.exp(-beta * (d - d.min()))
            sum_w = w.sum()
            probs = w / sum_w
            h = -np.sum(probs * np.log(np.maximum(probs, _EPS)))
            perp = np.exp(h)
            if abs(perp - perplexity) < tol:
                break
            if perp > perplexity:
                beta_lo = beta
                beta = beta * 2.0 if beta_hi == np.inf else (beta + beta_hi) / 2.0
            else:
                beta_hi = beta
                beta = (beta + beta_lo) / 2.0
        row = np.insert(probs, i, 0.0)
        p[i] = row
    return p


def joint_probs(features: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized joint affinity matrix P."""
    sq = np.square(features).sum(axis=1)
    sq_dists = np.maximum(sq[:, None] + sq[None, :] - 2.0 * features @ features.T, 0.0)
    cond = _conditional_probs(sq_dists, perplexity)
    p = (cond + cond.T) / (2.0 * features.shape[0])
    return np.maximum(p, _EPS)


def kl_and_grad(p: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """KL(P||Q) and its analytic gradient wrt the embedding y."""
    sq = np.square(y).sum(axis=1)
    num = 1.0 / (1.0 + np.maximum(sq[:, None] + sq[None, :] - 2.0 * y @ y.T, 0.0))
    np.fill_diagonal(num, 0.0)
    q = np.maximum(num / num.sum(), _EPS)
    kl = float(np.sum(p * np.log(p / q)))
    w = (p - q) * num
    grad = 4.0 * ((np.diag(w.sum(axis=1)) - w) @ y)
    return kl, grad


def tsne_embed(features: np.ndarray, perplexity: float | None = None,
               iters: int = 1000, seed: int = 0,
               learning_rate: float = 200.0,
               return_kl: bool = False):
    """Embed an m x p feature matrix into m x 2.

    Early exaggeration (x12) runs for the first 250 iterations; momentum
    switches 0.5 -> 0.8 at the same point. Deterministic given seed.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 4:
        raise ConfigError("t-SNE needs an m x p matrix with m >= 4")
    if not np.all(np.isfinite(x)):
        raise InputError("t-SNE input contains non-finite values")
    m = x.shape[0]
    if perplexity is None:
        perplexity = min(30.0, (m - 1) / 3.0)
    perplexity = min(perplexity, (m - 1) / 3.0)

    p = joint_probs(x, perplexity)
    rng = np.random.default_rng(seed)
    y = 1e-4 * rng.standard_normal((m, 2))
    velocity = np.zeros_like(y)
    kl_at_250 = kl_final = None

    p_exagg = p * EXAGGERATION
    for it in range(iters):
        active_p = p_exagg if it < EXAGGERATION_ITERS else p
        momentum = MOMENTUM_EARLY if it < EXAGGERATION_ITERS else MOMENTUM_LATE
        _, grad = kl_and_grad(active_p, y)
        velocity = momentum * velocity - learning_rate * grad
        y = y + velocity
        if return_kl and it == EXAGGERATION_ITERS:
            kl_at_250, _ = kl_and_grad(p, y)
    if return_kl:
        kl_final, _ = kl_and_grad(p, y)
        return y, (kl_at_250, kl_final)
    return y
