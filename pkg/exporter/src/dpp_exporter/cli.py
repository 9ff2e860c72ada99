"""Export CLI: cluster file in, DPPE/DPPS tables out.

Exit codes: 0 success, 1 encoder failure, 2 usage or data problems.
"""

from __future__ import annotations

import sys

import click

from dppsum import ClusterFormatError

from .encoders import EncoderError
from .export import ExportJob, export_all


@click.command()
@click.version_option(package_name="dpp-exporter")
@click.option("--clusters", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--encoder", default="hash", show_default=True,
              help="'hash', 'hash-<dim>', or a sentence-transformers model name.")
@click.option("--pooling", type=click.Choice(["mean", "max"]), default="mean",
              show_default=True,
              help="Token pooling for hash encoders; transformer models keep "
                   "their own pooling head.")
@click.option("--max-len", type=click.Choice(["64", "128"]), default="64",
              show_default=True, help="Sentence truncation length in tokens.")
@click.option("--batch-size", type=click.IntRange(min=1), default=32, show_default=True)
def main(clusters, out_dir, encoder, pooling, max_len, batch_size):
    """Embed every sentence of a cluster file and emit per-cluster tables."""
    job = ExportJob(
        clusters=clusters,
        out_dir=out_dir,
        encoder=encoder,
        max_len=int(max_len),
        batch_size=batch_size,
        pooling=pooling,
    )
    try:
        written = export_all(job)
    except EncoderError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except ClusterFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except FileNotFoundError as exc:
        click.echo(f"error: no such file: {exc.filename}", err=True)
        sys.exit(2)
    click.echo(f"wrote {len(written)} tables to {out_dir}", err=True)


if __name__ == "__main__":
    main()
