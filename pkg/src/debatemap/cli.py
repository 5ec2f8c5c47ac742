"""Command line pipeline with staged artifacts.

Stages read the previous stage's files from a shared work directory and write
their own, so intermediates stay inspectable:

    ingest    protocols/*.txt          -> corpus.jsonl, corpus_stats.json
    prep      corpus.jsonl             -> dtm.csv, vocabulary.csv, prep_report.json
    select-k  dtm.csv                  -> scan.csv, scan.json (prints chosen_k)
    fit       dtm.csv                  -> model/
    landscape corpus.jsonl + model/    -> landscape.json, landscape.csv
    network   corpus.jsonl + model/    -> graphs/*.json, *.gexf, *.csv
    bundle    corpus.jsonl + model/    -> bundle/ (input of serve)
    serve     bundle/                  -> read-only HTTP API + static explorer

Every artifact embeds the configuration and seed that produced it; reruns on
unchanged inputs are byte-identical. Module errors map to distinct exit codes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date as Date
from pathlib import Path
from typing import Optional, Sequence

from . import SCHEMA_VERSION, __version__
from .bundle import (
    DEFAULT_LEVELS,
    DEFAULT_RESOLUTIONS,
    BundleInvalid,
    assemble_bundle,
    load_bundle,
)
from .corpus import (
    AffiliationOverrides,
    CorpusError,
    DEFAULT_AGENDAS,
    build_corpus,
    load_overrides,
    read_speeches,
    write_speeches,
)
from .errors import DebatemapError, IoFailure
from .landscape import (
    LandscapeError,
    landscape_payload,
    rank_table,
    speaker_topic_weights,
    write_landscape_csv,
    write_landscape_json,
    yearly_shares,
)
from .modelselect import ModelSelectError, scan_k, write_scan_report
from .netgraph import (
    NetworkError,
    build_bipartite,
    export_graph,
    filter_edges,
    graph_payload,
    louvain_communities,
    project_one_mode,
    projection_centralities,
    view_centralities,
)
from .server import DEFAULT_PORT, PORT_ENV_VAR, create_server
from .textprep import (
    PrepConfig,
    TextPrepError,
    load_stopwords,
    prepare_matrix,
    read_matrix,
    read_vocabulary,
    write_matrix,
    write_vocabulary,
)
from .topicmodel import (
    DEFAULT_SEED,
    LdaConfig,
    TopicModelError,
    fit_lda,
    read_model,
    top_words,
    write_model,
)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_CORPUS = 3
EXIT_TEXTPREP = 4
EXIT_MODEL = 5
EXIT_SELECT = 6
EXIT_LANDSCAPE = 7
EXIT_NETWORK = 8
EXIT_BUNDLE = 9
EXIT_IO = 10


def exit_code_for(exc: BaseException) -> int:
    for family, code in (
        (BundleInvalid, EXIT_BUNDLE),
        (CorpusError, EXIT_CORPUS),
        (TextPrepError, EXIT_TEXTPREP),
        (TopicModelError, EXIT_MODEL),
        (ModelSelectError, EXIT_SELECT),
        (LandscapeError, EXIT_LANDSCAPE),
        (NetworkError, EXIT_NETWORK),
        (IoFailure, EXIT_IO),
        (OSError, EXIT_IO),
        (DebatemapError, EXIT_UNEXPECTED),
    ):
        if isinstance(exc, family):
            return code
    return EXIT_UNEXPECTED


def _provenance(command: str, **config) -> dict:
    """Config-and-seed stamp embedded in artifacts; no timestamps, so reruns match."""
    return {
        "tool": f"debatemap {__version__}",
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": {k: v for k, v in sorted(config.items())},
    }


def _workdir(args) -> Path:
    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    return work


def _model_dir(args, work: Path) -> Path:
    return Path(args.model_dir) if args.model_dir else work / "model"


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def cmd_ingest(args) -> int:
    work = _workdir(args)
    protocol_dir = Path(args.protocols)
    files = sorted(protocol_dir.glob("*.txt"))
    if not files:
        raise CorpusError(f"no .txt protocol files under {protocol_dir}")
    overrides = load_overrides(args.overrides) if args.overrides else AffiliationOverrides()
    agendas = frozenset(args.agenda) if args.agenda else DEFAULT_AGENDAS
    window = None
    if args.date_from or args.date_to:
        if not (args.date_from and args.date_to):
            raise CorpusError("--from and --to must be given together")
        window = (Date.fromisoformat(args.date_from), Date.fromisoformat(args.date_to))

    corpus, report = build_corpus(files, overrides, agendas, window)
    provenance = _provenance(
        "ingest",
        protocols=str(protocol_dir),
        overrides=args.overrides or "",
        agendas=sorted(agendas),
        date_from=args.date_from or "",
        date_to=args.date_to or "",
    )
    write_speeches(corpus.speeches, work / "corpus.jsonl", header={"provenance": provenance})
    _write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "provenance": provenance,
            "stats": report.stats,
            "parsed_files": report.parsed_files,
            "failures": report.failures,
        },
        work / "corpus_stats.json",
    )
    stats = report.stats
    print(f"parsed {len(report.parsed_files)} protocol files ({len(report.failures)} failed)")
    print(f"speeches: {stats['total_speeches']} total, {stats['included_speeches']} included")
    if report.failures:
        for name, reason in sorted(report.failures.items()):
            print(f"  failed: {name}: {reason}", file=sys.stderr)
    return EXIT_OK


def cmd_prep(args) -> int:
    work = _workdir(args)
    speeches = [s for s in read_speeches(work / "corpus.jsonl") if s.included]
    if not speeches:
        raise TextPrepError("corpus has no included speeches")
    stopwords = load_stopwords(args.stopwords) if args.stopwords else frozenset()
    config = PrepConfig(
        stopwords=stopwords,
        min_count=args.min_count,
        min_token_len=args.min_token_len,
        keep_numeric=args.keep_numeric,
    )
    dtm = prepare_matrix([s.id for s in speeches], [s.text for s in speeches], config)
    provenance = _provenance(
        "prep",
        stopwords=args.stopwords or "",
        min_count=args.min_count,
        min_token_len=args.min_token_len,
        keep_numeric=args.keep_numeric,
    )
    stamp = json.dumps(provenance, ensure_ascii=False, sort_keys=True)
    write_matrix(dtm, work / "dtm.csv", provenance=stamp)
    write_vocabulary(dtm.vocabulary, work / "vocabulary.csv", provenance=stamp)
    _write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "provenance": provenance,
            "n_docs": dtm.n_docs,
            "n_terms": dtm.n_terms,
            "total_tokens": dtm.total_tokens(),
            "dropped_docs": list(dtm.dropped_docs),
        },
        work / "prep_report.json",
    )
    print(f"matrix: {dtm.n_docs} docs x {dtm.n_terms} terms, {dtm.total_tokens()} tokens")
    if dtm.dropped_docs:
        print(f"dropped {len(dtm.dropped_docs)} empty documents")
    return EXIT_OK


def _read_dtm(work: Path):
    vocabulary = read_vocabulary(work / "vocabulary.csv")
    return read_matrix(work / "dtm.csv", vocabulary)


def cmd_fit(args) -> int:
    work = _workdir(args)
    dtm = _read_dtm(work)
    config = LdaConfig(
        k=args.k,
        alpha=args.alpha,
        beta=args.beta,
        iterations=args.iterations,
        burn_in=args.burn_in,
        seed=args.seed,
        average_last_m=args.average_last_m,
    )
    model = fit_lda(dtm, config)
    write_model(model, _model_dir(args, work))
    print(f"fitted k={model.k} on {len(model.doc_ids)} docs, vocabulary {len(model.vocabulary)}")
    return EXIT_OK


def cmd_select_k(args) -> int:
    work = _workdir(args)
    dtm = _read_dtm(work)
    if args.kmin < 2 or args.kmax < args.kmin:
        raise ModelSelectError(f"need 2 <= kmin <= kmax, got {args.kmin}..{args.kmax}")
    ks = range(args.kmin, args.kmax + 1, args.step)
    base = LdaConfig(
        k=2,
        beta=args.beta,
        iterations=args.iterations,
        burn_in=args.burn_in,
        seed=args.seed,
        average_last_m=args.average_last_m,
    )
    result = scan_k(dtm, ks, base, top_n=args.top_n, max_workers=args.jobs)
    provenance = _provenance(
        "select-k",
        kmin=args.kmin,
        kmax=args.kmax,
        step=args.step,
        iterations=args.iterations,
        burn_in=args.burn_in,
        seed=args.seed,
        top_n=args.top_n or 0,
    )
    write_scan_report(result, work / "scan.csv", work / "scan.json", provenance=provenance)
    for k, score in zip(result.ks, result.scores):
        print(f"k={k} score={score:.6f}")
    for k, message in result.failures:
        print(f"k={k} failed: {message}", file=sys.stderr)
    print(f"chosen_k={result.chosen_k}")
    return EXIT_OK


def cmd_landscape(args) -> int:
    work = _workdir(args)
    corpus_speeches = read_speeches(work / "corpus.jsonl")
    model = read_model(_model_dir(args, work))
    corpus = _corpus_view(corpus_speeches)
    series = yearly_shares(corpus, model)
    table = rank_table(series, args.rank_threshold)
    keywords = {t: top_words(model, t, args.top_words) for t in range(model.k)}
    payload = landscape_payload(series, table, keywords)
    payload["schema_version"] = SCHEMA_VERSION
    payload["provenance"] = _provenance(
        "landscape",
        rank_threshold=args.rank_threshold,
        top_words=args.top_words,
        seed=model.config.seed,
        k=model.k,
    )
    write_landscape_json(payload, work / "landscape.json")
    write_landscape_csv(series, work / "landscape.csv")
    print(f"landscape over {len(series.years)} years, k={series.k}")
    return EXIT_OK


def _corpus_view(speeches):
    """Wrap bare speech records in the Corpus shape the aggregators expect."""
    from .corpus import Corpus

    affiliations = frozenset(s.affiliation for s in speeches if s.included)
    return Corpus(speeches=tuple(speeches), protocols=(), affiliations=affiliations)


def cmd_network(args) -> int:
    work = _workdir(args)
    corpus = _corpus_view(read_speeches(work / "corpus.jsonl"))
    model = read_model(_model_dir(args, work))
    weights = speaker_topic_weights(corpus, model)
    bipartite = build_bipartite(weights)
    out = Path(args.out) if args.out else work / "graphs"
    out.mkdir(parents=True, exist_ok=True)

    levels = args.level or [0.25]
    resolutions = args.resolution or [1.0]
    written = []
    for level in levels:
        view = filter_edges(
            bipartite, level, remove_isolates=args.remove_isolates, global_max=args.global_max
        )
        view_centrality = view_centralities(view, args.normalization)
        projection = project_one_mode(view, args.projection)
        projection_centrality = projection_centralities(projection, args.normalization)
        for resolution in resolutions:
            for mode, graph, centrality in (
                ("two", view, view_centrality),
                ("one", projection, projection_centrality),
            ):
                assignment = louvain_communities(
                    graph.nodes, graph.edges, resolution=resolution, seed=args.seed
                )
                payload = graph_payload(graph, assignment, centrality, level)
                stem = f"{mode}_l{level!r}_r{resolution!r}"
                for fmt in ("json", "gexf", "csv"):
                    export_graph(payload, fmt, out / f"{stem}.{fmt}")
                written.append(stem)
    print(f"wrote {len(written)} graphs to {out}")
    return EXIT_OK


def cmd_bundle(args) -> int:
    work = _workdir(args)
    speeches = read_speeches(work / "corpus.jsonl")
    corpus = _corpus_view(speeches)
    model = read_model(_model_dir(args, work))
    series = yearly_shares(corpus, model)
    table = rank_table(series, args.rank_threshold)
    stats_path = work / "corpus_stats.json"
    stats = json.loads(stats_path.read_text(encoding="utf-8")) if stats_path.is_file() else {}
    out = Path(args.out) if args.out else work / "bundle"
    provenance = _provenance(
        "bundle",
        seed=args.seed,
        levels=args.levels,
        resolutions=args.resolutions,
        projection=args.projection,
        normalization=args.normalization,
        top_words=args.top_words,
        rank_threshold=args.rank_threshold,
        k=model.k,
        model_seed=model.config.seed,
    )
    assemble_bundle(
        corpus,
        model,
        series,
        table,
        out,
        levels=args.levels,
        resolutions=args.resolutions,
        seed=args.seed,
        n_top_words=args.top_words,
        projection_method=args.projection,
        normalization=args.normalization,
        default_level=args.default_level,
        default_resolution=args.default_resolution,
        stats=stats,
        provenance=provenance,
    )
    load_bundle(out)  # refuse to emit a bundle serve would reject
    print(f"bundle written to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    bundle = load_bundle(args.bundle)
    static = args.static
    if static is None:
        default_static = Path(args.bundle) / "static"
        static = default_static if default_static.is_dir() else None
    port = args.port
    if port is None:
        port = int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))
    server = create_server(bundle, port=port, host=args.host, static_root=static, verbose=True)
    host, bound_port = server.server_address[:2]
    print(f"serving bundle {args.bundle} at http://{host}:{bound_port}/ (ctrl-c stops)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def _float_list(raw: str) -> list[float]:
    try:
        values = [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="debatemap",
        description="Map the topics, time profile, and speaker network of a debate corpus.",
    )
    parser.add_argument("--version", action="version", version=f"debatemap {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_workdir(p):
        p.add_argument("--workdir", default=".", help="directory holding staged artifacts")

    p = commands.add_parser("ingest", help="parse protocol files into an attributed corpus")
    add_workdir(p)
    p.add_argument("--protocols", required=True, help="directory of protocol .txt files")
    p.add_argument("--overrides", help="speaker-to-affiliation overrides file")
    p.add_argument("--agenda", action="append", help="accepted agenda label (repeatable)")
    p.add_argument("--from", dest="date_from", help="earliest accepted date (YYYY-MM-DD)")
    p.add_argument("--to", dest="date_to", help="latest accepted date (YYYY-MM-DD)")
    p.set_defaults(func=cmd_ingest)

    p = commands.add_parser("prep", help="tokenize, prune, and vectorize the corpus")
    add_workdir(p)
    p.add_argument("--stopwords", help="stop-word list, one word per line")
    p.add_argument("--min-count", type=int, default=3, help="drop terms occurring fewer times")
    p.add_argument("--min-token-len", type=int, default=2)
    p.add_argument("--keep-numeric", action="store_true", help="keep purely numeric tokens")
    p.set_defaults(func=cmd_prep)

    p = commands.add_parser("fit", help="fit the topic model at a fixed k")
    add_workdir(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None, help="doc-topic prior (default 50/k)")
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--average-last-m", type=int, default=0)
    p.add_argument("--model-dir", help="output model directory (default workdir/model)")
    p.set_defaults(func=cmd_fit)

    p = commands.add_parser("select-k", help="scan candidate topic counts and pick the first peak")
    add_workdir(p)
    p.add_argument("--kmin", type=int, default=2)
    p.add_argument("--kmax", type=int, default=25)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--average-last-m", type=int, default=0)
    p.add_argument("--top-n", type=int, default=None, help="restrict the score to top-n terms")
    p.add_argument("--jobs", type=int, default=None, help="parallel fits (default: cpu count)")
    p.set_defaults(func=cmd_select_k)

    p = commands.add_parser("landscape", help="aggregate yearly topic shares and rank tables")
    add_workdir(p)
    p.add_argument("--model-dir")
    p.add_argument("--rank-threshold", type=float, default=0.5)
    p.add_argument("--top-words", type=int, default=25)
    p.set_defaults(func=cmd_landscape)

    p = commands.add_parser("network", help="build, filter, project, and cluster the network")
    add_workdir(p)
    p.add_argument("--model-dir")
    p.add_argument("--level", type=float, action="append", help="filter level (repeatable)")
    p.add_argument("--resolution", type=float, action="append", help="community resolution (repeatable)")
    p.add_argument("--remove-isolates", action="store_true")
    p.add_argument("--global-max", action="store_true", help="filter against the single largest weight")
    p.add_argument("--projection", choices=["product", "count", "min"], default="product")
    p.add_argument("--normalization", choices=["max", "sum"], default="max")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="output directory (default workdir/graphs)")
    p.set_defaults(func=cmd_network)

    p = commands.add_parser("bundle", help="assemble the explorer bundle directory")
    add_workdir(p)
    p.add_argument("--model-dir")
    p.add_argument("--out", help="bundle directory (default workdir/bundle)")
    p.add_argument("--levels", type=_float_list, default=list(DEFAULT_LEVELS))
    p.add_argument("--resolutions", type=_float_list, default=list(DEFAULT_RESOLUTIONS))
    p.add_argument("--default-level", type=float, default=0.25)
    p.add_argument("--default-resolution", type=float, default=1.0)
    p.add_argument("--projection", choices=["product", "count", "min"], default="product")
    p.add_argument("--normalization", choices=["max", "sum"], default="max")
    p.add_argument("--rank-threshold", type=float, default=0.5)
    p.add_argument("--top-words", type=int, default=25)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_bundle)

    p = commands.add_parser("serve", help="serve a bundle over read-only HTTP")
    p.add_argument("--bundle", required=True, help="bundle directory from the bundle stage")
    p.add_argument("--port", type=int, default=None,
                   help=f"port (default: ${PORT_ENV_VAR} or {DEFAULT_PORT})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="static explorer directory (default: bundle/static)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - map to exit codes, never traceback
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
