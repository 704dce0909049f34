"""Operator command line: validate, run, templates, bundle.

The CLI is a thin client over the core package and the HTTP service:
``validate`` and ``templates`` are local one-shot operations, ``run``
either drives a session headlessly against a scripted oracle or starts
the HTTP service for browser annotators.
"""
from __future__ import annotations

import json
import os
import sys
import zipfile
from pathlib import Path

import click

from . import checker
from .blackboard import snapshot_to_json
from .datasets import DatasetBinding, IngestionError, ingest_dataset
from .engine import EngineError, Session
from .gateway import Gateway
from .model import ParseError, parse_workflow, serialize_workflow
from .oracles import OracleAnnotator
from .templates import TEMPLATE_NAMES, UnknownTemplate, instantiate_template

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_RUNTIME = 3


def _default_seed() -> int:
    return int(os.environ.get("LABELFLOW_SEED", "0"))


def _load_graph(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        return parse_workflow(text)
    except ParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)


def _print_diagnostics(diags, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps([d.to_json() for d in diags], indent=2))
        return
    if not diags:
        click.echo("workflow is valid: no findings")
        return
    for d in diags:
        subjects = f" [{', '.join(d.subjects)}]" if d.subjects else ""
        click.echo(f"{d.severity}: {d.code}: {d.message}{subjects}")
        for fix in d.fixes:
            click.echo(f"    fix: {fix.kind} {json.dumps(fix.detail)}")


@click.group()
def main() -> None:
    """Build, check, and run data-labeling workflows."""


@main.command()
@click.argument("workflow", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Machine-readable diagnostics.")
def validate(workflow: str, as_json: bool) -> None:
    """Statically check a workflow file; exit 0 ok, 1 errors, 2 parse failure."""
    graph = _load_graph(workflow)
    diags = checker.check(graph)
    _print_diagnostics(diags, as_json)
    sys.exit(EXIT_INVALID if checker.has_errors(diags) else EXIT_OK)


def _binding_from_options(graph, dataset, fmt, id_column, content_columns, glob):
    if dataset is None:
        if graph.dataset_binding is None:
            click.echo("error: no dataset given and the workflow has no binding", err=True)
            sys.exit(EXIT_RUNTIME)
        return DatasetBinding.from_json(graph.dataset_binding)
    return DatasetBinding(
        source=dataset,
        format=fmt,
        id_column=id_column,
        content_columns=tuple(content_columns.split(",")) if content_columns else None,
        glob=glob,
    )


@main.command()
@click.argument("workflow", type=click.Path())
@click.option("--dataset", type=click.Path(), help="Dataset source path.")
@click.option("--format", "fmt", type=click.Choice(["csv-vectors", "jsonl-objects",
                                                    "image-directory"]),
              default="csv-vectors", show_default=True)
@click.option("--id-column", default=None, help="CSV column holding object ids.")
@click.option("--content-columns", default=None, help="Comma-separated CSV columns.")
@click.option("--glob", default="*.png", show_default=True,
              help="Filename pattern for image directories.")
@click.option("--oracle", "truth_path", type=click.Path(),
              help="Ground-truth JSON (uuid -> category); runs headless.")
@click.option("--noise", type=float, default=0.0, show_default=True,
              help="Oracle label error rate.")
@click.option("--serve", "serve_addr", default=None, metavar="HOST:PORT",
              help="Serve the annotation HTTP interface instead of an oracle.")
@click.option("--seed", type=int, default=None, help="Run seed (env LABELFLOW_SEED).")
@click.option("--categories", default=None,
              help="Comma-separated category list overriding the workflow's.")
@click.option("--trace", "trace_path", type=click.Path(), default="trace.jsonl",
              show_default=True)
@click.option("--snapshot", "snapshot_path", type=click.Path(), default="snapshot.json",
              show_default=True)
@click.option("--state-log", "state_log_path", type=click.Path(), default=None,
              help="Also write the blackboard delta log (JSON lines).")
def run(workflow, dataset, fmt, id_column, content_columns, glob, truth_path, noise,
        serve_addr, seed, categories, trace_path, snapshot_path, state_log_path) -> None:
    """Execute a workflow headlessly (--oracle) or serve annotators (--serve)."""
    graph = _load_graph(workflow)
    diags = checker.check(graph)
    if checker.has_errors(diags):
        _print_diagnostics(diags, as_json=False)
        sys.exit(EXIT_INVALID)
    if truth_path is None and serve_addr is None:
        click.echo("error: choose a mode: --oracle TRUTH or --serve HOST:PORT", err=True)
        sys.exit(EXIT_INVALID)

    seed = _default_seed() if seed is None else seed
    binding = _binding_from_options(graph, dataset, fmt, id_column, content_columns, glob)
    try:
        objects = ingest_dataset(binding)
    except IngestionError as exc:
        click.echo(f"dataset error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)

    if categories:
        graph.categories_config = [c for c in categories.split(",") if c]

    gateway = Gateway()
    truth = None
    if truth_path is not None:
        truth = json.loads(Path(truth_path).read_text(encoding="utf-8"))
        if not graph.categories_config:
            graph.categories_config = sorted(set(truth.values()))
        gateway.auto_responder = OracleAnnotator(truth, error_rate=noise, seed=seed)

    session = Session(graph, objects, gateway, seed)

    if truth_path is not None:
        try:
            session.run()
        except EngineError as exc:
            click.echo(f"runtime failure: {exc}", err=True)
            _write_outputs(session, trace_path, snapshot_path, state_log_path)
            sys.exit(EXIT_RUNTIME)
        _write_outputs(session, trace_path, snapshot_path, state_log_path)
        done = session.progress()
        click.echo(f"finished: {done['humanLabeled']}/{done['total']} human-labeled")
        sys.exit(EXIT_OK)

    # Serve mode: run the engine on a worker thread, host HTTP until exit/interrupt.
    import uvicorn

    from .service import SessionHost, create_app

    host_name, _, port = serve_addr.partition(":")
    host = SessionHost()
    thread = host.start(session)
    static_dir = Path(__file__).resolve().parents[2] / "frontend"
    has_ui = (static_dir / "index.html").is_file()
    app = create_app(host, static_dir=static_dir if has_ui else None)
    click.echo(f"serving session {session.session_id} on http://{serve_addr}")
    try:
        uvicorn.run(app, host=host_name or "127.0.0.1", port=int(port or "8000"),
                    log_level="warning")
    except KeyboardInterrupt:
        pass
    finally:
        gateway.close()
        thread.join(timeout=5.0)
        _write_outputs(session, trace_path, snapshot_path, state_log_path)
    sys.exit(EXIT_OK if session.status == "finished" else EXIT_RUNTIME)


def _write_outputs(session: Session, trace_path: str, snapshot_path: str,
                   state_log_path: str | None = None) -> None:
    Path(trace_path).write_text(session.trace.to_jsonl(), encoding="utf-8")
    Path(snapshot_path).write_text(snapshot_to_json(session.board.snapshot()),
                                   encoding="utf-8")
    if state_log_path:
        lines = "".join(
            json.dumps(delta, ensure_ascii=False, sort_keys=True) + "\n"
            for delta in session.board.delta_log
        )
        Path(state_log_path).write_text(lines, encoding="utf-8")


@main.group()
def templates() -> None:
    """Inspect and export the built-in workflow templates."""


@templates.command("list")
def templates_list() -> None:
    for name in TEMPLATE_NAMES:
        click.echo(name)


@templates.command("show")
@click.argument("name")
def templates_show(name: str) -> None:
    try:
        graph = instantiate_template(name)
    except UnknownTemplate:
        click.echo(f"error: unknown template {name!r}", err=True)
        sys.exit(EXIT_INVALID)
    click.echo(f"{name}: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
    for node in graph.nodes:
        kind = node.function.value if node.function else node.node_type
        impl = f" [{node.implementation}]" if node.implementation else ""
        click.echo(f"  {node.id:<16} {kind:<22} {node.label}{impl}")


@templates.command("export")
@click.argument("name")
@click.argument("path", type=click.Path())
def templates_export(name: str, path: str) -> None:
    try:
        graph = instantiate_template(name)
    except UnknownTemplate:
        click.echo(f"error: unknown template {name!r}", err=True)
        sys.exit(EXIT_INVALID)
    Path(path).write_text(serialize_workflow(graph), encoding="utf-8")
    click.echo(f"wrote {path}")


@main.command()
@click.argument("workflow", type=click.Path())
@click.option("--dataset", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv-vectors", "jsonl-objects",
                                                    "image-directory"]),
              default="csv-vectors", show_default=True)
@click.option("--output", "-o", type=click.Path(), required=True)
@click.option("--seed", type=int, default=None)
def bundle(workflow, dataset, fmt, output, seed) -> None:
    """Zip a workflow with its dataset binding and run configuration."""
    graph = _load_graph(workflow)
    diags = checker.check(graph)
    if checker.has_errors(diags):
        _print_diagnostics(diags, as_json=False)
        sys.exit(EXIT_INVALID)
    manifest = {
        "workflow": "workflow.json",
        "dataset": Path(dataset).name,
        "binding": DatasetBinding(source=Path(dataset).name, format=fmt).to_json(),
        "seed": _default_seed() if seed is None else seed,
    }
    with zipfile.ZipFile(output, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("workflow.json", serialize_workflow(graph))
        zf.write(dataset, Path(dataset).name)
        zf.writestr("manifest.json", json.dumps(manifest, indent=2) + "\n")
    click.echo(f"wrote {output}")


if __name__ == "__main__":
    main()
