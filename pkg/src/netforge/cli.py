"""Command-line front door: convert, validate, layout, params, serve, zoo."""
from __future__ import annotations

import sys

import click

from netforge.errors import NetforgeError
from netforge.frontends import convert as convert_text
from netforge.frontends import import_model
from netforge.ir import count_parameters, infer_shapes, validate as validate_model
from netforge.layout import (
    LayoutConfig,
    compute_layout,
    layout_to_json,
    layout_to_svg,
    route_connections,
)

FRAMEWORKS = ("caffe", "keras")


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_output(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _sniff_format(text: str) -> str:
    # Keras files are JSON objects; prototxt never starts with a brace.
    return "keras" if text.lstrip()[:1] == "{" else "caffe"


def _fail(exc: NetforgeError):
    click.echo(str(exc), err=True)
    sys.exit(1)


@click.group()
@click.version_option(package_name="netforge")
def main():
    """Neural network model tooling: conversion, inspection, layout, serving."""


@main.command()
@click.option("--from", "source", type=click.Choice(FRAMEWORKS), required=True,
              help="Framework of the input text.")
@click.option("--to", "target", type=click.Choice(FRAMEWORKS), required=True,
              help="Framework to emit.")
@click.option("--in", "in_path", default="-", help="Input file, - for stdin.")
@click.option("--out", "out_path", default="-", help="Output file, - for stdout.")
@click.option("--enable-custom-layers", is_flag=True,
              help="Allow registry-gated layers (LRN) in Keras output.")
def convert(source, target, in_path, out_path, enable_custom_layers):
    """Convert a model definition between frameworks."""
    text = _read_input(in_path)
    custom = frozenset({"LRN"}) if enable_custom_layers else frozenset()
    try:
        result = convert_text(text, source, target, custom_layers=custom)
    except NetforgeError as exc:
        _fail(exc)
    _write_output(out_path, result)


@main.command()
@click.option("--from", "source", type=click.Choice(FRAMEWORKS), default=None,
              help="Framework of the input text (sniffed when omitted).")
@click.option("--in", "in_path", default="-", help="Input file, - for stdin.")
def validate(source, in_path):
    """Import a model and report schema and graph diagnostics."""
    text = _read_input(in_path)
    try:
        model = import_model(text, source or _sniff_format(text))
    except NetforgeError as exc:
        _fail(exc)
    diagnostics = validate_model(model)
    for diag in diagnostics:
        click.echo(str(diag))
    if diagnostics:
        sys.exit(1)
    click.echo(f"{model.name or 'model'}: {len(model.layers)} layers, no problems")


@main.command()
@click.option("--in", "in_path", default="-", help="Input file, - for stdin.")
@click.option("--format", "out_format", type=click.Choice(("svg", "json")), default="svg",
              help="Output format.")
@click.option("--out", "out_path", default="-", help="Output file, - for stdout.")
@click.option("--from", "source", type=click.Choice(FRAMEWORKS), default=None,
              help="Framework of the input text (sniffed when omitted).")
def layout(in_path, out_format, out_path, source):
    """Compute deterministic positions and routed connections."""
    text = _read_input(in_path)
    try:
        model = import_model(text, source or _sniff_format(text))
        config = LayoutConfig()
        positions = compute_layout(model, config)
        paths = route_connections(model, positions, config)
        if out_format == "svg":
            rendered = layout_to_svg(model, positions, paths, config)
        else:
            rendered = layout_to_json(positions, paths) + "\n"
    except NetforgeError as exc:
        _fail(exc)
    _write_output(out_path, rendered)


@main.command()
@click.option("--in", "in_path", default="-", help="Input file, - for stdin.")
@click.option("--input-shape", "input_shape", default=None,
              help="Comma-separated input dims, e.g. 3,224,224.")
@click.option("--from", "source", type=click.Choice(FRAMEWORKS), default=None,
              help="Framework of the input text (sniffed when omitted).")
def params(in_path, input_shape, source):
    """Print the total learnable parameter count."""
    text = _read_input(in_path)
    try:
        model = import_model(text, source or _sniff_format(text))
        shapes = None
        if input_shape is not None:
            try:
                dims = tuple(int(d) for d in input_shape.split(","))
            except ValueError:
                raise click.UsageError(f"bad --input-shape {input_shape!r}")
            given = {
                lid: dims for lid, layer in model.layers.items()
                if layer.layer_type == "Input"
            }
            shapes = infer_shapes(model, input_shapes=given)
        click.echo(str(count_parameters(model, shapes)))
    except NetforgeError as exc:
        _fail(exc)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--workers", default=2, show_default=True, type=int,
              help="Export job worker threads.")
@click.option("--store", "store_path", default=None,
              help="Directory for the file-backed store (in-memory when omitted).")
def serve(host, port, workers, store_path):
    """Run the HTTP/WebSocket service."""
    import uvicorn

    from netforge.service import FileStore, create_app

    store = FileStore(store_path) if store_path else None
    app = create_app(store=store, workers=workers)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.group()
def zoo():
    """Bundled architecture fixtures."""


@zoo.command("list")
def zoo_list():
    """Print the available fixture names."""
    from netforge.zoo import fixture_names

    for name in fixture_names():
        click.echo(name)


@zoo.command("fetch")
@click.argument("name")
@click.option("--out", "out_path", default=None, help="Destination (default ./NAME.prototxt).")
def zoo_fetch(name, out_path):
    """Write a bundled fixture to a file."""
    from netforge.zoo import fixture_text

    try:
        text = fixture_text(name)
    except NetforgeError as exc:
        _fail(exc)
    _write_output(out_path or f"{name}.prototxt", text)


if __name__ == "__main__":
    main()
