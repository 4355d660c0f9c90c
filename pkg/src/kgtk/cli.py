"""``kgtk`` command line: subcommands and the ``/`` pipeline front end."""
from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import warnings
from typing import Dict, Iterator, List, Optional

from . import __version__
from .edges import EdgeStream, generate_ids, open_reader, write_edges
from .embed import (EmbedReport, LexicalizationConfig, embed, format_embedding, get_encoder,
                    lexicalize_stream)
from .errors import KgtkError, UsageError
from .extsort import SortKey, SortResources, parse_size, sort_edges
from .graph import (DEFAULT_MAX_ITER, DEFAULT_TOL, build_graph, connected_components, degrees, hits, pagerank, reachable_nodes,
                    summarize)
from .interchange import (NamespaceTable, export_ntriples, export_property_graph, import_conceptnet,
                          import_ntriples)
from .join import JOIN_TYPES, JoinSpec, join
from .pipeline import Command, StageContext, parse_pipeline, run_pipeline
from .transform import cat, filter_edges, parse_pattern, remove_columns
from .validate import DATE_POLICIES, DEFAULT_MAX_LENGTH, clean, validate

log = logging.getLogger("kgtk")


def _csv(text: Optional[str]) -> List[str]:
    return [t.strip() for t in (text or "").split(",") if t.strip()]


def _after(stream: EdgeStream, callback) -> EdgeStream:
    """Same rows; ``callback()`` runs once the stream is exhausted."""
    def gen():
        yield from stream.batches()
        callback()
    return EdgeStream(stream.header, gen(), stream.source)


def _write_report(report, path, ctx: StageContext, title):
    ctx.stderr.write(report.to_text(title))
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report.to_tsv())


def _sort_resources(args) -> SortResources:
    return SortResources(memory_budget=parse_size(args.mem), temp_dir=args.temp)


def _add_sort_resources(p):
    p.add_argument("--mem", default="256M", help="memory budget for sorting (e.g. 512M)")
    p.add_argument("--temp", default=None, help="directory for sort runs (default $KGTK_TMPDIR or system temp)")


# -- validate / clean ---------------------------------------------------------------

def _cfg_validate(p):
    p.add_argument("--on-error", choices=("report", "exclude", "abort"), default="report")
    p.add_argument("--max-length", type=int, default=DEFAULT_MAX_LENGTH)
    p.add_argument("--min-length", type=int, default=0)
    p.add_argument("--report-file", default=None, help="also write the report as TSV")


def _run_validate(args, upstream, ctx):
    out, report = validate(upstream, on_error=args.on_error, max_length=args.max_length,
                           min_length=args.min_length)
    return _after(out, lambda: _write_report(report, args.report_file, ctx, "validate"))


def _cfg_clean(p):
    p.add_argument("--date-policy", choices=DATE_POLICIES, default="drop")
    p.add_argument("--max-length", type=int, default=DEFAULT_MAX_LENGTH)
    p.add_argument("--min-length", type=int, default=0)
    p.add_argument("--report-file", default=None)
    p.add_argument("--quiet", action="store_true", help="do not print the report")


def _run_clean(args, upstream, ctx):
    out, report = clean(upstream, date_policy=args.date_policy, max_length=args.max_length,
                        min_length=args.min_length)

    def done():
        if not args.quiet:
            _write_report(report, args.report_file, ctx, "clean")
        elif args.report_file:
            with open(args.report_file, "w", encoding="utf-8") as fh:
                fh.write(report.to_tsv())
    return _after(out, done)


# -- transforms -------------------------------------------------------------------

def _cfg_filter(p):
    p.add_argument("-p", "--pattern", required=True, help='"subjects ; predicates ; objects"')


def _run_filter(args, upstream, ctx):
    return filter_edges(upstream, parse_pattern(args.pattern))


def _cfg_sort(p):
    p.add_argument("-c", "--columns", default="node1,label,node2",
                   help="comma-separated column names or 1-based positions")
    p.add_argument("-r", "--reverse", action="store_true")
    p.add_argument("--numeric", default="", help="columns compared numerically")
    _add_sort_resources(p)


def _check_sort(args):
    SortKey.parse(args.columns)
    try:
        parse_size(args.mem)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _run_sort(args, upstream, ctx):
    key = SortKey.parse(args.columns, reverse=args.reverse, numeric=_csv(args.numeric))
    return sort_edges(upstream, key, _sort_resources(args))


def _cfg_join(p):
    p.add_argument("files", nargs="*", help="LEFT RIGHT (only RIGHT after a '/')")
    p.add_argument("--join-type", choices=JOIN_TYPES, default="inner")
    p.add_argument("--join-on-id", action="store_true")
    p.add_argument("--join-on-label", action="store_true")
    p.add_argument("--join-on-node2", action="store_true")
    p.add_argument("--left-keys", default=None)
    p.add_argument("--right-keys", default=None)
    p.add_argument("--right-prefix", default="right.")
    p.add_argument("--presort", action="store_true", help="sort both inputs on their keys first")
    _add_sort_resources(p)


def _join_spec(args) -> JoinSpec:
    return JoinSpec(args.join_type,
                    tuple(_csv(args.left_keys)) or None, tuple(_csv(args.right_keys)) or None,
                    args.join_on_id, args.join_on_label, args.join_on_node2,
                    args.right_prefix, args.presort)


def _check_join(args):
    _join_spec(args).key_columns()
    if len(args.files) not in (1, 2):
        raise UsageError("join takes LEFT RIGHT, or only RIGHT after a '/'")


def _run_join(args, upstream, ctx):
    files = list(args.files)
    if upstream is not None:
        if len(files) != 1:
            raise UsageError("join after '/' takes exactly one file (the right input)")
        left, right = upstream, open_reader(files[0])
    else:
        if len(files) != 2:
            raise UsageError("join needs LEFT and RIGHT files")
        left, right = open_reader(files[0]), open_reader(files[1])
    return join(left, right, _join_spec(args), _sort_resources(args))


def _cfg_cat(p):
    p.add_argument("files", nargs="*", help="files to concatenate ('-' for stdin)")


def _run_cat(args, upstream, ctx):
    streams = [upstream] if upstream is not None else []
    streams += [open_reader(f) for f in args.files]
    if not streams:
        raise UsageError("cat needs at least one file")
    return cat(streams)


def _cfg_remove(p):
    p.add_argument("-c", "--columns", required=True, help="comma-separated column names")
    p.add_argument("--strict", action="store_true", help="fail on unknown columns")


def _run_remove(args, upstream, ctx):
    return remove_columns(upstream, _csv(args.columns), strict=args.strict)


def _cfg_add_id(p):
    p.add_argument("--id-style", choices=("sequential", "content_hash"), default="sequential")
    p.add_argument("--id-prefix", default="E")


def _run_add_id(args, upstream, ctx):
    return generate_ids(upstream, args.id_style, args.id_prefix)


# -- analytics --------------------------------------------------------------------

def _cfg_reachable(p):
    p.add_argument("--root", required=True, help="comma-separated root nodes")
    p.add_argument("--props", default="", help="comma-separated properties to follow (default all)")
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--label", default="reachable")


def _run_reachable(args, upstream, ctx):
    g = build_graph(upstream, directed=not args.undirected)
    return reachable_nodes(g, _csv(args.root), _csv(args.props), args.label)


def _cfg_components(p):
    p.add_argument("--props", default="", help="only use edges with these properties")
    p.add_argument("--label", default="connected_component")


def _run_components(args, upstream, ctx):
    return connected_components(build_graph(upstream, directed=False), _csv(args.props), args.label)


def _cfg_stats(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--directed", dest="directed", action="store_true", default=True)
    g.add_argument("--undirected", dest="directed", action="store_false")
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--pagerank", action="store_true")
    p.add_argument("--hits", action="store_true")
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iterations", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--summary-file", default=None)


def _run_stats(args, upstream, ctx):
    g = build_graph(upstream, directed=args.directed)
    metrics = []
    if args.degrees:
        metrics.extend(degrees(g))
    if g.node_count and args.pagerank:
        metrics.append(pagerank(g, args.damping, args.tolerance, args.max_iterations))
    if g.edge_count and args.hits:
        metrics.extend(hits(g, args.tolerance, args.max_iterations))
    summary, edges = summarize(g, metrics, args.top_k)

    def done():
        text = summary.to_text()
        if args.summary_file:
            with open(args.summary_file, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            ctx.stderr.write(text)
    return _after(edges, done)


# -- embeddings -------------------------------------------------------------------

def _cfg_embed(p):
    p.add_argument("--label-properties", nargs="+", default=[])
    p.add_argument("--description-properties", nargs="+", default=[])
    p.add_argument("--isa-properties", nargs="+", default=[])
    p.add_argument("--has-properties", nargs="+", default=[])
    p.add_argument("--property-value", "--property-values", dest="property_value", nargs="+", default=[])
    p.add_argument("--model", "--encoder", dest="model", default="baseline")
    p.add_argument("--encoder-command", default=None, help="command for the external encoder")
    p.add_argument("--dimension", type=int, default=64)
    p.add_argument("--sentences-file", default=None, help="also write node<TAB>sentence lines")


def _run_embed(args, upstream, ctx) -> Iterator[str]:
    try:
        config = LexicalizationConfig(tuple(args.label_properties), tuple(args.description_properties),
                                      tuple(args.isa_properties), tuple(args.has_properties),
                                      tuple(args.property_value))
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.dimension < 8:
        raise UsageError("--dimension must be at least 8")
    encoder = get_encoder(args.model, command=args.encoder_command)
    sentences = lexicalize_stream(upstream, config)
    if args.sentences_file:
        with open(args.sentences_file, "w", encoding="utf-8") as fh:
            fh.writelines(f"{s.node}\t{s.sentence}\n" for s in sentences)
    report = EmbedReport()

    def gen():
        for rec in embed(sentences, encoder, args.dimension, report):
            yield format_embedding(rec)
        if report.empty or report.failed:
            ctx.stderr.write(f"text-embeddings: {report.embedded} embedded, {len(report.empty)} empty, "
                             f"{len(report.failed)} failed\n")
    return gen()


# -- interchange ------------------------------------------------------------------

def _namespaces(args) -> NamespaceTable:
    return NamespaceTable.from_file(args.prefixes) if args.prefixes else NamespaceTable()


def _cfg_import_nt(p):
    p.add_argument("--prefixes", default=None, help="TSV of prefix<TAB>namespace")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed line")


def _run_import_nt(args, upstream, ctx):
    return import_ntriples(args.input or "-", _namespaces(args), strict=args.strict)


def _cfg_export_nt(p):
    p.add_argument("--prefixes", default=None)
    p.add_argument("--lenient", action="store_true", help="skip rows that cannot be exported")


def _run_export_nt(args, upstream, ctx):
    return export_ntriples(upstream, _namespaces(args), lenient=args.lenient)


def _cfg_import_cn(p):
    p.add_argument("--english_only", "--english-only", dest="english_only", action="store_true")


def _run_import_cn(args, upstream, ctx):
    return import_conceptnet(args.input or "-", english_only=args.english_only)


def _cfg_export_pg(p):
    p.add_argument("--nodes-file", required=True)
    p.add_argument("--edges-file", required=True)
    p.add_argument("--label-properties", default="label,rdfs:label")


def _run_export_pg(args, upstream, ctx):
    export_property_graph(upstream, args.nodes_file, args.edges_file, _csv(args.label_properties))
    return iter(())


COMMANDS: List[Command] = [
    Command("validate", "transform", _cfg_validate, _run_validate, "check conformance with the file format"),
    Command("clean", "transform", _cfg_clean, _run_clean, "repair or drop nonconforming rows",
            aliases=("clean_data", "clean-data")),
    Command("filter", "transform", _cfg_filter, _run_filter, "select edges by subject/predicate/object",
            check=lambda a: parse_pattern(a.pattern)),
    Command("sort", "transform", _cfg_sort, _run_sort, "external merge sort", check=_check_sort),
    Command("join", "multi", _cfg_join, _run_join, "sort-merge join of two edge files", check=_check_join),
    Command("cat", "multi", _cfg_cat, _run_cat, "concatenate edge files"),
    Command("remove-columns", "transform", _cfg_remove, _run_remove, "drop columns"),
    Command("add-id", "transform", _cfg_add_id, _run_add_id, "fill in missing edge ids"),
    Command("reachable-nodes", "transform", _cfg_reachable, _run_reachable, "nodes reachable from roots"),
    Command("connected-components", "transform", _cfg_components, _run_components,
            "undirected connected components"),
    Command("graph-statistics", "transform", _cfg_stats, _run_stats, "degrees, PageRank, HITS"),
    Command("text-embeddings", "sink", _cfg_embed, _run_embed, "sentence embeddings of nodes"),
    Command("import-ntriples", "source", _cfg_import_nt, _run_import_nt, "N-Triples to KGTK"),
    Command("export-ntriples", "sink", _cfg_export_nt, _run_export_nt, "KGTK to N-Triples"),
    Command("import-conceptnet", "source", _cfg_import_cn, _run_import_cn, "ConceptNet dump to KGTK"),
    Command("export-property-graph", "sink", _cfg_export_pg, _run_export_pg,
            "nodes and edges files", writes_stdout=False),
]


def registry() -> Dict[str, Command]:
    reg = {}
    for c in COMMANDS:
        reg[c.name] = c
        for a in c.aliases:
            reg[a] = c
    return reg


# -- entry point ------------------------------------------------------------------

USAGE = """usage: kgtk [--progress] [--debug] SUBCOMMAND [ARGS] [/ SUBCOMMAND [ARGS]]...

subcommands:
{}

Stages joined by a bare '/' run concurrently in one process.
Run 'kgtk SUBCOMMAND -h' for the options of one subcommand.
"""


def _usage() -> str:
    width = max(len(c.name) for c in COMMANDS)
    return USAGE.format("\n".join(f"  {c.name.ljust(width)}  {c.help}" for c in COMMANDS))


def _open_upstream(stage):
    return open_reader(stage.args.input or "-")


def _writer(stdout):
    def write_output(stage, result):
        path = getattr(stage.args, "output", None)
        if isinstance(result, EdgeStream):
            write_edges(result, path if path else stdout)
            return
        if path:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for chunk in result:
                    fh.write(chunk)
            return
        buf = []
        for chunk in result:
            buf.append(chunk)
            if len(buf) >= 1024:
                stdout.write("".join(buf).encode("utf-8"))
                buf = []
        if buf:
            stdout.write("".join(buf).encode("utf-8"))
        stdout.flush()
    return write_output


def main(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout if stdout is not None else sys.stdout.buffer
    stderr = stderr if stderr is not None else sys.stderr
    progress = debug = False
    while argv and argv[0].startswith("-"):
        flag = argv.pop(0)
        if flag == "--progress":
            progress = True
        elif flag == "--debug":
            debug = True
        elif flag in ("-h", "--help"):
            stderr.write(_usage())
            return 0
        elif flag == "--version":
            stderr.write(f"kgtk {__version__}\n")
            return 0
        else:
            stderr.write(f"kgtk: unknown option {flag}\n{_usage()}")
            return 1
    logging.basicConfig(level=logging.DEBUG if debug else logging.WARNING, stream=stderr,
                        format="kgtk: %(levelname)s: %(message)s")
    warnings.simplefilter("default")
    if not argv:
        stderr.write(_usage())
        return 1
    try:
        plan = parse_pipeline(argv, registry())
    except KgtkError as e:
        if "__exit__" in str(e):   # -h on a stage
            stage = argv[0] if "/" not in argv else argv[argv.index("/") + 1]
            cmd = registry().get(stage)
            if cmd is not None:
                stderr.write(cmd.parser().format_help())
            return 0
        stderr.write(f"kgtk: {e}\n")
        return e.exit_code
    real_stdout = stdout is getattr(sys.stdout, "buffer", None)
    try:
        run_pipeline(plan, _open_upstream, _writer(stdout), stderr=stderr, progress=progress)
    except BrokenPipeError:
        # downstream reader went away: stop quietly, and keep the interpreter's
        # final flush of stdout from raising again
        if real_stdout:
            try:
                devnull = os.open(os.devnull, os.O_WRONLY)
                os.dup2(devnull, sys.stdout.fileno())
            except (OSError, ValueError, io.UnsupportedOperation):
                pass
        return 0
    except KgtkError as e:
        if debug:
            log.exception("pipeline failed")
        stderr.write(f"kgtk: {e}\n")
        return e.exit_code
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
