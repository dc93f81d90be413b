"""Command line interface.

Exit codes are part of the contract: 0 for success, 2 when a solver stage
rejects the design, 3 when the input itself is unusable.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import (config_to_dict, default_config, load_config,
                     save_config)
from .errors import StageFailure, VoxfabError
from .morphology import parse_morphology
from .pipeline import batch_run, run_pipeline
from .report import (design_report, dumps_canonical, write_batch_files,
                     write_result_files)
from .scoring import render_stage_table

EXIT_STAGE_FAILURE = 2
EXIT_INVALID_INPUT = 3


def _load_config(path: Path | None):
    if path is None:
        return default_config()
    return load_config(path)


def _read_spec(path: Path):
    spec = parse_morphology(path.read_bytes())
    spec.meta.setdefault("design_id", path.stem)
    return spec


@click.group()
def main():
    """Compile voxel robot morphologies into fabrication blueprints."""


@main.command("run")
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False,
                                             path_type=Path))
@click.option("-c", "--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Pipeline config JSON (defaults built in).")
@click.option("-o", "--out", "out_dir", default=Path("out"),
              type=click.Path(file_okay=False, path_type=Path),
              show_default=True, help="Output directory.")
def run_cmd(spec_file: Path, config_path: Path | None, out_dir: Path):
    """Run one design and export its blueprint (or failure report)."""
    try:
        cfg = _load_config(config_path)
        spec = _read_spec(spec_file)
    except VoxfabError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INVALID_INPUT)
    try:
        result = run_pipeline(spec, cfg)
    except StageFailure as exc:      # failures normally become reports
        click.echo(f"stage failure: {exc}", err=True)
        sys.exit(EXIT_STAGE_FAILURE)
    except VoxfabError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INVALID_INPUT)
    files = write_result_files(result, out_dir)
    for f in files:
        click.echo(str(f))
    if not result.ok:
        failure = result.failure
        click.echo(f"failed at stage {failure.stage}: {failure.reason} "
                   f"{failure.detail}".rstrip(), err=True)
        sys.exit(EXIT_STAGE_FAILURE)
    click.echo(f"s_mfg = {result.record.bundle.s_mfg!r}")


@main.command("batch")
@click.argument("spec_dir", type=click.Path(exists=True, file_okay=False,
                                            path_type=Path))
@click.option("-c", "--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-j", "--jobs", default=1, show_default=True,
              help="Worker processes.")
@click.option("-o", "--out", "out_dir", default=Path("batch_out"),
              type=click.Path(file_okay=False, path_type=Path),
              show_default=True)
def batch_cmd(spec_dir: Path, config_path: Path | None, jobs: int,
              out_dir: Path):
    """Run every *.vmorph design in a directory and aggregate statistics."""
    try:
        cfg = _load_config(config_path)
        files = sorted(spec_dir.glob("*.vmorph"))
        if not files:
            click.echo(f"no .vmorph files in {spec_dir}", err=True)
            sys.exit(EXIT_INVALID_INPUT)
        specs = [_read_spec(f) for f in files]
        results = batch_run(specs, cfg, jobs=jobs)
    except VoxfabError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INVALID_INPUT)
    stats, _ = write_batch_files(results, out_dir, cfg.scoring)
    click.echo(render_stage_table(stats))
    click.echo(f"outputs in {out_dir}")


@main.command("score")
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False,
                                             path_type=Path))
@click.option("-c", "--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def score_cmd(spec_file: Path, config_path: Path | None):
    """Run one design and print its report JSON without writing meshes."""
    try:
        cfg = _load_config(config_path)
        spec = _read_spec(spec_file)
    except VoxfabError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INVALID_INPUT)
    try:
        result = run_pipeline(spec, cfg, keep_blueprint=False)
    except VoxfabError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INVALID_INPUT)
    click.echo(dumps_canonical(design_report(result)).rstrip())
    if not result.ok:
        sys.exit(EXIT_STAGE_FAILURE)


@main.group("config")
def config_group():
    """Configuration helpers."""


@config_group.command("init")
@click.option("-o", "--out", "out_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Write to a file instead of stdout.")
def config_init(out_path: Path | None):
    """Emit the default configuration with every hyperparameter explicit."""
    cfg = default_config()
    if out_path is None:
        click.echo(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True))
    else:
        save_config(cfg, out_path)
        click.echo(str(out_path))


@main.command("serve")
@click.option("--bind", default="127.0.0.1:8341", show_default=True,
              help="host:port to listen on.")
@click.option("-c", "--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def serve_cmd(bind: str, config_path: Path | None):
    """Serve the pipeline HTTP API."""
    try:
        cfg = _load_config(config_path)
        host, sep, port_s = bind.rpartition(":")
        if not sep or not host or not port_s.isdigit():
            raise VoxfabError(f"bind must be host:port, got {bind!r}")
        port = int(port_s)
    except VoxfabError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INVALID_INPUT)
    from .server import serve
    serve(cfg, host=host, port=port)


if __name__ == "__main__":
    main()
