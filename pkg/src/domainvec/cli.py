"""Command line interface.

Each verb maps to one engine operation over a local data directory, plus
``serve`` to expose the same node over HTTP and ``federate`` to pool
statistics from configured peers. Space arguments accept a UL, a content
hash, or a local-table index, like the HTTP surface.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import codec, federation, jsonio, model, service, store as store_mod
from .service import Node, Server, ServiceConfig

CONFIG_ENV = "DOMAINVEC_CONFIG"


def _load_config(config_path: str | None) -> ServiceConfig:
    path = config_path or os.environ.get(CONFIG_ENV)
    if path:
        return ServiceConfig.from_file(path)
    return ServiceConfig()


def _open_node(ctx) -> Node:
    config = _load_config(ctx.obj.get("config"))
    if ctx.obj.get("data_dir"):
        config.data_dir = ctx.obj["data_dir"]
    return Node(config)


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


@click.group()
@click.option("--config", type=click.Path(), default=None,
              help=f"Config file (or ${CONFIG_ENV}).")
@click.option("--data-dir", type=click.Path(), default=None,
              help="Override the data directory.")
@click.pass_context
def main(ctx, config, data_dir):
    """Domain Vector toolbox: spaces, vectors, search, statistics."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = config
    ctx.obj["data_dir"] = data_dir


@main.group()
def space():
    """Manage Domain Space definitions."""


@space.command("publish")
@click.argument("definition_file", type=click.File("r"))
@click.pass_context
def space_publish(ctx, definition_file):
    """Publish a definition (JSON) into the local registry."""
    node = _open_node(ctx)
    try:
        _echo_json(service.publish_space(node, "", json.load(definition_file)))
    finally:
        node.close()


@space.command("validate")
@click.argument("definition_file", type=click.File("r"))
@click.pass_context
def space_validate(ctx, definition_file):
    """Check a definition (JSON) without publishing it."""
    node = _open_node(ctx)
    try:
        definition = jsonio.definition_from_json(json.load(definition_file))
        violations = model.validate_definition(definition, node.registry.resolver())
        _echo_json({"ok": not violations, "violations": violations})
        if violations:
            sys.exit(1)
    finally:
        node.close()


@space.command("list")
@click.pass_context
def space_list(ctx):
    """List registered spaces with dimension and vector counts."""
    node = _open_node(ctx)
    try:
        _echo_json(service.list_spaces(node))
    finally:
        node.close()


@space.command("export")
@click.argument("space_id")
@click.option("-o", "--output", type=click.Path(), required=True)
@click.pass_context
def space_export(ctx, space_id, output):
    """Export a space (definitions plus vectors) to a binary stream."""
    node = _open_node(ctx)
    try:
        key = node.space_key(space_id)
        Path(output).write_bytes(store_mod.export_space(key, node.registry, node.store))
        click.echo(f"exported {key} to {output}")
    finally:
        node.close()


@space.command("import")
@click.argument("stream_file", type=click.Path(exists=True))
@click.pass_context
def space_import(ctx, stream_file):
    """Import a previously exported space stream."""
    node = _open_node(ctx)
    try:
        count = store_mod.import_space(Path(stream_file).read_bytes(),
                                       node.registry, node.store)
        click.echo(f"imported {count} vectors")
    finally:
        node.close()


@main.group()
def dv():
    """Encode, decode, and store Domain Vectors."""


@dv.command("encode")
@click.argument("space_id")
@click.argument("json_file", type=click.File("r"))
@click.option("-o", "--output", type=click.Path(), required=True)
@click.pass_context
def dv_encode(ctx, space_id, json_file, output):
    """Encode a JSON array of vectors into the binary stream format."""
    node = _open_node(ctx)
    try:
        key = node.space_key(space_id)
        flat = node.registry.flattened(key)
        version = node.registry.resolve(codec.ul_from_text(key)).version
        dvs = []
        for entry in json.load(json_file):
            if "space" not in entry:
                entry = dict(entry, space=key)
            dvs.append((version, jsonio.dv_from_json(entry, flat)))
        Path(output).write_bytes(service.encode_dv_stream(node, key, dvs))
        click.echo(f"encoded {len(dvs)} vectors to {output}")
    finally:
        node.close()


@dv.command("decode")
@click.argument("space_id")
@click.argument("binary_file", type=click.Path(exists=True))
@click.pass_context
def dv_decode(ctx, space_id, binary_file):
    """Decode a binary vector stream back to JSON."""
    node = _open_node(ctx)
    try:
        key = node.space_key(space_id)
        raw = Path(binary_file).read_bytes()
        context = codec.UlContext()
        count, pos = codec.decode_uint(raw, 0)
        out = []
        for _ in range(count):
            version, n = codec.decode_uint(raw, pos)
            pos += n
            flat = node.registry.flattened(key, version)
            decoded, n = codec.decode_dv(raw, flat, context, offset=pos)
            pos += n
            out.append(jsonio.dv_to_json(decoded))
        _echo_json(out)
    finally:
        node.close()


@dv.command("insert")
@click.argument("space_id")
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--binary", is_flag=True, help="Input is a binary stream, not JSON.")
@click.pass_context
def dv_insert(ctx, space_id, input_file, binary):
    """Insert vectors from a JSON array or binary stream."""
    node = _open_node(ctx)
    try:
        key = node.space_key(space_id)
        raw = Path(input_file).read_bytes()
        if binary:
            result = service.ingest_binary(node, key, raw)
        else:
            result = service.ingest_json(node, key, json.loads(raw))
        _echo_json(result)
    finally:
        node.close()


@main.command("search")
@click.argument("space_id")
@click.argument("query_file", type=click.File("r"))
@click.pass_context
def search_cmd(ctx, space_id, query_file):
    """Run a similarity/range query (JSON) against a space."""
    node = _open_node(ctx)
    try:
        _echo_json(service.run_search(node, node.space_key(space_id), json.load(query_file)))
    finally:
        node.close()


@main.command("stats")
@click.argument("space_id")
@click.argument("query_file", type=click.File("r"))
@click.pass_context
def stats_cmd(ctx, space_id, query_file):
    """Group statistics for a range filter (JSON with stat_dims)."""
    node = _open_node(ctx)
    try:
        _echo_json(service.run_stats(node, node.space_key(space_id), json.load(query_file)))
    finally:
        node.close()


@main.group()
def suggest():
    """Decision-support suggestions."""


@suggest.command("dimensions")
@click.argument("space_id")
@click.argument("query_file", type=click.File("r"))
@click.pass_context
def suggest_dimensions_cmd(ctx, space_id, query_file):
    """Rank dimensions by fill frequency within a condition group."""
    node = _open_node(ctx)
    try:
        _echo_json(service.run_suggest_dimensions(
            node, node.space_key(space_id), json.load(query_file)))
    finally:
        node.close()


@suggest.command("intervals")
@click.argument("space_id")
@click.argument("query_file", type=click.File("r"))
@click.pass_context
def suggest_intervals_cmd(ctx, space_id, query_file):
    """Suggest search intervals around chosen centers (JSON body)."""
    node = _open_node(ctx)
    try:
        _echo_json(service.run_suggest_intervals(
            node, node.space_key(space_id), json.load(query_file)))
    finally:
        node.close()


@main.command("evaluate")
@click.argument("space_id")
@click.argument("variants_file", type=click.File("r"))
@click.pass_context
def evaluate_cmd(ctx, space_id, variants_file):
    """Evaluate decision variants (JSON with preconditions/variants/result_dims)."""
    node = _open_node(ctx)
    try:
        _echo_json(service.run_evaluate_variants(
            node, node.space_key(space_id), json.load(variants_file)))
    finally:
        node.close()


@main.command("serve")
@click.pass_context
def serve_cmd(ctx):
    """Run the HTTP service until interrupted."""
    node = _open_node(ctx)
    server = Server(node)
    click.echo(f"listening on {server.url} (data in {node.config.data_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        node.close()


@main.command("federate")
@click.argument("request_file", type=click.File("r"))
@click.option("--peer", "peers", multiple=True,
              help="Peer base URL; repeat for several. Defaults to config peers.")
@click.pass_context
def federate_cmd(ctx, request_file, peers):
    """Coordinate a federated statistics request across peers."""
    config = _load_config(ctx.obj.get("config"))
    body = json.load(request_file)
    body.setdefault("k_min", config.k_min)
    request = federation.request_from_json(body)
    peer_urls = list(peers) or [url for _, url in config.peers]
    pooled = federation.coordinate(request, peer_urls, timeout=config.timeout_s)
    _echo_json(federation.pooled_to_json(pooled))


if __name__ == "__main__":
    main()
