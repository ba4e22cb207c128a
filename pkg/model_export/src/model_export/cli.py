"""Command-line entry point: export the model, then emit goldens."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from model_export.export import ExportError, export_model
from model_export.goldens import emit_goldens


@click.group()
def main():
    """DenseNet201 feature-trunk exporter and golden-vector emitter."""


@main.command()
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Destination .onnx file.")
@click.option("--weights", default="random", show_default=True,
              type=click.Choice(["imagenet", "random"]),
              help="Checkpoint weights or a seeded random draw.")
@click.option("--seed", default=0, show_default=True,
              help="Seed for --weights random.")
@click.option("--goldens", "goldens_dir", type=click.Path(), default=None,
              help="Also emit golden pairs into this directory.")
@click.option("--golden-count", default=10, show_default=True,
              help="Random golden pairs (an all-zeros pair is always added).")
@click.option("--golden-seed", default=7, show_default=True)
def export(out_path, weights, seed, goldens_dir, golden_count, golden_seed):
    """Write the verified ONNX file (and optionally the golden pairs)."""
    try:
        trunk = export_model(out_path, weights=weights, seed=seed)
    except ExportError as exc:
        click.echo(f"error[export]: {exc}", err=True)
        sys.exit(1)
    except RuntimeError as exc:
        click.echo(f"error[weights]: {exc}", err=True)
        sys.exit(1)
    size = Path(out_path).stat().st_size
    click.echo(f"wrote {out_path} ({size / 1e6:.1f} MB, verified)")
    if goldens_dir:
        index = emit_goldens(trunk, goldens_dir, n=golden_count,
                             seed=golden_seed)
        click.echo(f"wrote {index['count']} golden pairs to {goldens_dir}")
