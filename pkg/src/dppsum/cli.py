"""Command-line interface: train, summarize, evaluate, oracle-labels.

Exit codes: 0 success, 2 usage or data problems, 3 numeric failures.
The pipeline itself is deterministic; --seed exists for fixture tooling and
changes nothing in production paths.
"""

from __future__ import annotations

import functools
import sys

import click

from .dpp import TrainConfig, load_model, save_model
from .errors import (
    ClusterFormatError,
    ConfigurationError,
    InvalidSimilarityError,
    NumericError,
    TableFormatError,
)
from .ingestion import load_clusters, write_clusters
from .pipeline import (
    derive_labels,
    evaluate_summaries,
    load_summaries,
    render_report,
    summarize_clusters,
    train_clusters,
    write_summaries,
    FEATURE_MODES,
)

_DATA_ERRORS = (
    ClusterFormatError,
    TableFormatError,
    ConfigurationError,
    InvalidSimilarityError,
)


def _guarded(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except NumericError as exc:  # includes training divergence
            click.echo(f"numeric failure: {exc}", err=True)
            sys.exit(3)
        except _DATA_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except FileNotFoundError as exc:
            click.echo(f"error: no such file: {exc.filename}", err=True)
            sys.exit(2)

    return wrapper


def _seed_option(command):
    return click.option("--seed", type=int, default=0, show_default=True,
                        help="Kept for reproducibility tooling; the pipeline is deterministic.")(command)


@click.group()
@click.version_option(package_name="dppsum")
def main():
    """Budgeted extractive multi-document summarization with a DPP."""


@main.command()
@click.option("--clusters", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", type=click.Path(exists=True, file_okay=False))
@click.option("--similarity", type=click.Path(exists=True, file_okay=False))
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False))
@click.option("--alpha", type=click.FloatRange(0.0, 1.0), default=0.9, show_default=True)
@click.option("--budget", type=click.IntRange(min=1), default=100, show_default=True,
              help="Word budget used when deriving oracle labels.")
@click.option("--feature-mode", type=click.Choice(FEATURE_MODES), default="combined",
              show_default=True)
@click.option("--lr", type=click.FloatRange(min=0.0, min_open=True), default=1e-3,
              show_default=True)
@click.option("--epochs", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--oracle-labels", "use_oracle", is_flag=True,
              help="Derive gold labels with the ROUGE-1 oracle before training.")
@_seed_option
@_guarded
def train(clusters, embeddings, similarity, model_path, alpha, budget, feature_mode,
          lr, epochs, use_oracle, seed):
    """Fit quality weights by maximum likelihood on gold-labeled clusters."""
    data = load_clusters(clusters)
    if use_oracle:
        data = derive_labels(data, budget)
    bundle, trace = train_clusters(
        data, embeddings, similarity, alpha, feature_mode, TrainConfig(lr=lr, epochs=epochs)
    )
    save_model(model_path, bundle)
    for epoch, value in enumerate(trace):
        click.echo(f"epoch {epoch}: log-likelihood {value:.6f}", err=True)


@main.command()
@click.option("--clusters", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", type=click.Path(exists=True, file_okay=False))
@click.option("--similarity", type=click.Path(exists=True, file_okay=False))
@click.option("--budget", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Default: standard output.")
@_seed_option
@_guarded
def summarize(clusters, model_path, embeddings, similarity, budget, out, seed):
    """Select a budgeted summary per cluster with greedy MAP inference."""
    data = load_clusters(clusters)
    bundle = load_model(model_path)
    rows = summarize_clusters(data, bundle, embeddings, similarity, budget)
    write_summaries(out if out else sys.stdout, rows)


@main.command()
@click.option("--clusters", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--summaries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), help="Default: standard output.")
@_seed_option
@_guarded
def evaluate(clusters, summaries, out, seed):
    """ROUGE-1/2/SU4 report for a summaries file."""
    data = load_clusters(clusters)
    rows = load_summaries(summaries)
    rendered = render_report(evaluate_summaries(data, rows))
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(rendered)
    else:
        click.echo(rendered, nl=False)


@main.command(name="oracle-labels")
@click.option("--clusters", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--budget", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Default: standard output.")
@_seed_option
@_guarded
def oracle_labels_cmd(clusters, budget, out, seed):
    """Rewrite the cluster file with ROUGE-oracle gold labels filled in."""
    data = derive_labels(load_clusters(clusters), budget)
    write_clusters(out if out else sys.stdout, data)


if __name__ == "__main__":
    main()
