"""Command-line interface: one end-to-end `run` plus standalone stages.

Exit codes: 0 ok, 2 invalid config, 3 input error, 4 numeric failure.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .errors import ConfigError, EegTdaError
from . import pipeline as pl
from .pipeline import PipelineConfig
from .signal_io import Segment


def _fail(exc: EegTdaError):
    click.echo(f"error: {exc}", err=True)
    sys.exit(exc.exit_code)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EegTdaError as exc:
            _fail(exc)
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
    return wrapper


def _build_config(config_path, cohort_path, overrides: dict) -> PipelineConfig:
    raw = {}
    if config_path:
        p = Path(config_path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if cohort_path:
        raw["cohort"] = json.loads(Path(cohort_path).read_text())
    filter_over = {k: v for k, v in overrides.pop("filter", {}).items()
                   if v is not None}
    if filter_over:
        raw["filter"] = {**raw.get("filter", {}), **filter_over}
    top = {k: v for k, v in overrides.items() if v is not None}
    raw.update(top)
    return PipelineConfig.from_dict(raw)


def _common_options(fn):
    fn = click.option("--config", type=click.Path(), default=None,
                      help="JSON pipeline config")(fn)
    fn = click.option("--cohort", "cohort_path", type=click.Path(), default=None,
                      help="JSON cohort spec for the synthetic source")(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default="out",
                      show_default=True, help="artifact directory")(fn)
    return fn


def _filter_options(fn):
    fn = click.option("--f-low", type=float, default=None)(fn)
    fn = click.option("--f-high", type=float, default=None)(fn)
    fn = click.option("--notch", "notch_hz", type=float, default=None)(fn)
    fn = click.option("--notch-q", type=float, default=None)(fn)
    fn = click.option("--order", type=int, default=None)(fn)
    fn = click.option("--single-pass", is_flag=True, default=False,
                      help="causal filtering instead of zero-phase")(fn)
    fn = click.option("--window-s", type=float, default=None)(fn)
    return fn


def _filter_overrides(f_low, f_high, notch_hz, notch_q, order, single_pass):
    over = {"f_low_hz": f_low, "f_high_hz": f_high, "notch_hz": notch_hz,
            "notch_q": notch_q, "order": order}
    if single_pass:
        over["zero_phase"] = False
    return over


@click.group()
def main():
    """EEG topological-feature extraction and stress classification."""


@main.command()
@_common_options
@_filter_options
@click.option("--protocol", type=click.Choice(["cv5", "holdout"]), default=None)
@click.option("--grouping", type=click.Choice(["subject", "trial"]), default=None)
@click.option("--threshold", default=None,
              help="'auto', 'paper2eps' or a positive number")
@click.option("--max-dim", type=int, default=None)
@_handle_errors
def run(config, cohort_path, seed, out_dir, f_low, f_high, notch_hz, notch_q,
        order, single_pass, window_s, protocol, grouping, threshold, max_dim):
    """Execute the full pipeline into the artifact directory."""
    thr = threshold
    if thr is not None and thr not in ("auto", "paper2eps"):
        thr = float(thr)
    cfg = _build_config(config, cohort_path, {
        "filter": _filter_overrides(f_low, f_high, notch_hz, notch_q, order,
                                    single_pass),
        "seed": seed, "window_s": window_s, "protocol": protocol,
        "grouping": grouping, "threshold": thr, "max_dim": max_dim,
    })
    pl.cmd_run(cfg, out_dir)
    click.echo(f"run complete: {out_dir}")


@main.command()
@_common_options
@_handle_errors
def synth(config, cohort_path, seed, out_dir):
    """Generate the synthetic cohort: recordings, forms and labels."""
    over = {"seed": seed} if seed is not None else {}
    cfg = _build_config(config, cohort_path, dict(over))
    out = Path(out_dir)
    recordings, true_labels, forms, labels = pl.run_synth(cfg)
    pl.write_labels(out / "cohort", labels, true_labels)
    pl.write_forms(out / "cohort", forms)
    pl.write_recordings(out / "recordings" / "raw", recordings)
    click.echo(f"wrote {len(recordings)} recordings to {out}")


@main.command()
@_common_options
@_filter_options
@_handle_errors
def preprocess(config, cohort_path, seed, out_dir, f_low, f_high, notch_hz,
               notch_q, order, single_pass, window_s):
    """Filter raw recordings (band-pass + notch)."""
    cfg = _build_config(config, cohort_path, {
        "filter": _filter_overrides(f_low, f_high, notch_hz, notch_q, order,
                                    single_pass),
        "seed": seed, "window_s": window_s,
    })
    out = Path(out_dir)
    recordings = pl.read_recordings(out / "recordings" / "raw")
    filtered = pl.run_preprocess(cfg, recordings)
    pl.write_recordings(out / "recordings" / "preprocessed", filtered)
    click.echo(f"preprocessed {len(filtered)} recordings")


@main.command()
@_common_options
@click.option("--window-s", type=float, default=None)
@click.option("--embed-dim", type=int, default=None)
@_handle_errors
def embed(config, cohort_path, seed, out_dir, window_s, embed_dim):
    """Segment preprocessed recordings and embed channels via PCA."""
    cfg = _build_config(config, cohort_path, {
        "seed": seed, "window_s": window_s, "embed_dim": embed_dim,
    })
    out = Path(out_dir)
    recordings = pl.read_recordings(out / "recordings" / "preprocessed")
    labels = pl.read_labels(out / "cohort" / "labels.csv")
    clouds = pl.run_embed(cfg, recordings, labels)
    pl.write_pointclouds(out / "pointclouds", clouds)
    click.echo(f"embedded {len(clouds)} trials")


@main.command()
@_common_options
@click.option("--threshold", default=None)
@click.option("--max-dim", type=int, default=None)
@_handle_errors
def persist(config, cohort_path, seed, out_dir, threshold, max_dim):
    """Compute persistence diagrams from exported point clouds."""
    thr = threshold
    if thr is not None and thr not in ("auto", "paper2eps"):
        thr = float(thr)
    cfg = _build_config(config, cohort_path, {
        "seed": seed, "threshold": thr, "max_dim": max_dim,
    })
    out = Path(out_dir)
    clouds = pl.read_pointclouds(out / "pointclouds")
    diagrams = pl.run_persist(cfg, clouds)
    pl.write_diagrams(out / "diagrams", diagrams)
    click.echo(f"computed {len(diagrams)} diagrams")


@main.command()
@_common_options
@_handle_errors
def features(config, cohort_path, seed, out_dir):
    """Summarize diagrams into trial feature vectors."""
    cfg = _build_config(config, cohort_path, {"seed": seed})
    out = Path(out_dir)
    diagrams = pl.read_diagrams(out / "diagrams")
    labels = pl.read_labels(out / "cohort" / "labels.csv")
    fvs = pl.run_features(cfg, diagrams, labels)
    pl.write_features(out / "features", fvs)
    click.echo(f"wrote {len(fvs)} feature rows")


@main.command()
@_common_options
@click.option("--protocol", type=click.Choice(["cv5", "holdout"]), default=None)
@click.option("--grouping", type=click.Choice(["subject", "trial"]), default=None)
@_handle_errors
def evaluate(config, cohort_path, seed, out_dir, protocol, grouping):
    """Cross-validated classification report from the feature matrix."""
    cfg = _build_config(config, cohort_path, {
        "seed": seed, "protocol": protocol, "grouping": grouping,
    })
    out = Path(out_dir)
    fvs = pl.read_features(out / "features")
    forms_path = out / "cohort" / "forms.csv"
    forms = pl.read_forms(forms_path) if forms_path.exists() else None
    result = pl.run_evaluate(cfg, fvs, forms)
    pl.write_eval(out / "eval", cfg, result)
    click.echo("evaluation written")


@main.command()
@_common_options
@_handle_errors
def tsne(config, cohort_path, seed, out_dir):
    """2-D t-SNE embedding of the feature matrix."""
    cfg = _build_config(config, cohort_path, {"seed": seed})
    out = Path(out_dir)
    fvs = pl.read_features(out / "features")
    embedding = pl.run_tsne(cfg, fvs)
    pl.write_tsne(out / "tsne", fvs, embedding)
    click.echo("t-SNE embedding written")


@main.command()
@click.option("--out", "out_dir", type=click.Path(), default="out",
              show_default=True)
@click.option("--diagrams", "diagrams_path", type=click.Path(), default=None,
              help="diagram CSV file or directory (default: OUT/diagrams)")
@_handle_errors
def plot(out_dir, diagrams_path):
    """Render persistence diagrams and barcodes as SVG."""
    out = Path(out_dir)
    src = Path(diagrams_path) if diagrams_path else out / "diagrams"
    if src.is_file():
        pd = pl.read_diagram_csv(src)
        tds = [pl.TrialDiagram("diagram", list(Segment)[0], 0, pd)]
        pl.run_plot(tds, src.parent / "svg")
    else:
        tds = pl.read_diagrams(src)
        pl.run_plot(tds, src / "svg")
    click.echo(f"plotted {len(tds)} diagrams")


if __name__ == "__main__":
    main()
