"""
Graph-Guided Document Translation - Command Line Entry Point
===========================================================

Ties together all modules for translating and evaluating document corpora.

Commands:
  translate    --config FILE [--backend-url URL] [--mock-script FILE]
               [--seed N] [--workers N] [--out DIR] [--verbose]
  evaluate     --run-dir DIR [--refs FILE ...] [--refs-format lines|jsonl]
               [--lexicon FILE] [--zp FILE] [--max-path-length N]
  graph-stats  --run-dir DIR [--max-path-length N]

Exit codes:
  0 - success
  1 - a document failed or run artifacts are unusable
  2 - invalid configuration or input files
"""

import argparse
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Optional

import config
from modules import corpus_stats, exporter, ingestion, metrics, verify_nlp_setup
from modules.errors import ArtifactError, ConfigError, CorpusFormatError, GatewayError, SpanRangeError, StageError
from modules.llm_gateway import build_gateway
from modules.run_config import load_run_config
from modules.run_store import RunStore
from modules.text_vectors import tokenize
from modules.translator import run_pipeline


# Configure logging
log_level = logging.WARNING if config.is_production() else logging.INFO
logging.basicConfig(
    level=log_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_CONFIG_FAILURE = 2


# ========== translate ==========

def _print_accounting(label: str, record: Dict) -> None:
    totals = record["totals"]
    print(
        f"{label}: {totals['calls']} calls ({totals['network_calls']} network, "
        f"{totals['cached_calls']} cached), {totals['prompt_tokens']} prompt + "
        f"{totals['completion_tokens']} completion tokens, est. cost {record['estimated_cost']}"
    )


def run_translation(run_config, store: RunStore) -> int:
    """
    Translate every document of the configured corpus into a run directory.

    Documents run in parallel (run_config.workers); each one is stored as soon
    as it finishes. A failed document keeps its partial artifacts plus
    error.json and the run continues with the rest.

    Args:
        run_config: validated RunConfig
        store: RunStore of the output directory

    Returns:
        int: EXIT_OK, or EXIT_RUN_FAILURE if any document failed

    Raises:
        ConfigError: corpus or mock script cannot be loaded
    """
    start_time = time.time()
    corpus = run_config.corpus
    try:
        entries = ingestion.load_corpus(
            corpus.source, corpus.format, corpus.references, corpus.source_lang, corpus.target_lang
        )
        gateway = build_gateway(run_config, store.cache_dir)
    except (CorpusFormatError, GatewayError) as e:
        raise ConfigError(str(e)) from e

    if run_config.segmentation.kind == "semantic" and run_config.segmentation.embedder == "spacy":
        if not verify_nlp_setup(config.SPACY_MODEL):
            raise ConfigError(f"segmentation.embedder: spaCy model {config.SPACY_MODEL!r} is not installed")

    store.prepare(run_config)
    logger.info(f"[Pipeline] Translating {len(entries)} documents with {run_config.workers} workers")

    documents: Dict[str, Dict] = {}
    failures: List[str] = []
    with ThreadPoolExecutor(max_workers=run_config.workers) as executor:
        futures = {executor.submit(run_pipeline, e.document, run_config, gateway): e for e in entries}
        for future in as_completed(futures):
            doc_id = futures[future].document.doc_id
            try:
                record = future.result()
                store.save_record(record)
            except StageError as e:
                failures.append(doc_id)
                record = e.partial
                store.save_record(record, error=e)
                print(f"{doc_id}: FAILED in {e.stage}" + (f" (node {e.node})" if e.node is not None else "") + f": {e.cause}")
            documents[doc_id] = record.accounting

    # Corpus order, not completion order
    documents = {e.document.doc_id: documents[e.document.doc_id] for e in entries}
    words = sum(len(tokenize(e.document.full_text(), e.document.language)) for e in entries)
    corpus_accounting = gateway.ledger.to_dict(
        prompt_per_1k=run_config.pricing.prompt_per_1k,
        completion_per_1k=run_config.pricing.completion_per_1k,
        source_words=words,
    )
    store.save_accounting(corpus_accounting, documents)
    exporter.export_accounting_csv(documents, str(store.run_dir / "accounting.csv"))

    for doc_id, record in documents.items():
        _print_accounting(doc_id, record)
    _print_accounting("corpus", corpus_accounting)
    print(f"Wall time: {time.time() - start_time:.2f}s, output: {store.run_dir}")

    if failures:
        logger.error(f"[Pipeline] {len(failures)} of {len(entries)} documents failed: {', '.join(sorted(failures))}")
        return EXIT_RUN_FAILURE
    return EXIT_OK


def cmd_translate(args) -> int:
    overrides = {
        "backend_url": args.backend_url,
        "mock_script": args.mock_script,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
    }
    try:
        run_config = load_run_config(args.config, overrides)
        return run_translation(run_config, RunStore(run_config.output_dir))
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG_FAILURE


# ========== evaluate ==========

def _references_for(store: RunStore, doc_ids: List[str], args, target_lang: str) -> Dict[str, List[str]]:
    if args.refs:
        return ingestion.load_references(args.refs, doc_ids, target_lang, args.refs_format)
    corpus = store.load_config().get("corpus", {})
    if not corpus.get("references"):
        return {doc_id: [] for doc_id in doc_ids}
    entries = ingestion.load_corpus(
        corpus["source"], corpus.get("format", "lines"), corpus["references"],
        corpus.get("source_lang", "en"), target_lang,
    )
    by_id = {e.document.doc_id: list(e.references) for e in entries}
    return {doc_id: by_id.get(doc_id, []) for doc_id in doc_ids}


def cmd_evaluate(args) -> int:
    store = RunStore(args.run_dir)
    try:
        target_lang = store.load_config().get("corpus", {}).get("target_lang", "de")
        doc_ids = store.doc_ids()
        records = [store.load_record(doc_id) for doc_id in doc_ids]
    except ArtifactError as e:
        print(f"Run directory error: {e}", file=sys.stderr)
        return EXIT_RUN_FAILURE

    try:
        references = _references_for(store, doc_ids, args, target_lang)
        lexicon = metrics.load_lexicon(args.lexicon) if args.lexicon else None
        zp = metrics.load_zp_annotations(args.zp) if args.zp else None
        report = metrics.evaluate_run(
            records, references, lang=target_lang, lexicon=lexicon, zp=zp, max_len=args.max_path_length
        )
    except (CorpusFormatError, SpanRangeError) as e:
        print(f"Input error: {e}", file=sys.stderr)
        return EXIT_CONFIG_FAILURE

    _, md_path = exporter.export_metrics(report, store.run_dir)

    corpus = report["corpus"]
    reasons = corpus.get("reasons", {})
    print(report["signature"])
    print(f"d-BLEU: {exporter.format_value(corpus['d_bleu'], reasons.get('d_bleu'), 2)}")
    print(f"cTT:    {exporter.format_value(corpus['ctt'], reasons.get('ctt'))}")
    print(f"aZPT:   {exporter.format_value(corpus['azpt'], reasons.get('azpt'))}")
    print(f"Report: {md_path}")
    return EXIT_OK


# ========== graph-stats ==========

def cmd_graph_stats(args) -> int:
    store = RunStore(args.run_dir)
    try:
        graphs = {doc_id: store.load_graph(doc_id) for doc_id in store.doc_ids()}
    except ArtifactError as e:
        print(f"Run directory error: {e}", file=sys.stderr)
        return EXIT_RUN_FAILURE

    summary = corpus_stats.get_graph_summary(graphs, args.max_path_length)
    rows = corpus_stats.document_rows(graphs, args.max_path_length)
    trend = corpus_stats.edges_trend(rows)
    path = exporter.export_graph_stats(summary, rows, trend, store.run_dir)

    print(f"Documents: {summary['documents']}")
    print(f"Discourses per document: {summary['discourse_count_distribution']}")
    print(f"Edges per document: {summary['edges_per_document_distribution']}")
    print(f"Path lengths: {summary['path_length_distribution']}")
    print(f"Report: {path}")
    return EXIT_OK


# ========== Argument parsing ==========

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graft", description="Graph-guided document-level translation")
    subparsers = parser.add_subparsers(dest="command", required=True)

    translate = subparsers.add_parser("translate", help="translate a corpus into a run directory")
    translate.add_argument("--config", required=True, help="run configuration (JSON)")
    translate.add_argument("--backend-url", help="override backend.base_url")
    translate.add_argument("--mock-script", help="use the scripted mock backend")
    translate.add_argument("--seed", type=int, help="override segmentation.seed")
    translate.add_argument("--workers", type=int, help="documents translated in parallel")
    translate.add_argument("--out", help="output run directory")
    translate.add_argument("--verbose", action="store_true", help="debug logging")
    translate.set_defaults(handler=cmd_translate)

    evaluate = subparsers.add_parser("evaluate", help="score a finished run")
    evaluate.add_argument("--run-dir", required=True)
    evaluate.add_argument("--refs", nargs="+", help="reference files (default: those of the run config)")
    evaluate.add_argument("--refs-format", choices=["lines", "jsonl"], default="lines")
    evaluate.add_argument("--lexicon", help="term lexicon (JSON)")
    evaluate.add_argument("--zp", help="zero-pronoun annotations (JSON)")
    evaluate.add_argument("--max-path-length", type=int, default=config.MAX_PATH_LENGTH)
    evaluate.add_argument("--verbose", action="store_true", help="debug logging")
    evaluate.set_defaults(handler=cmd_evaluate)

    graph_stats = subparsers.add_parser("graph-stats", help="graph statistics of a run")
    graph_stats.add_argument("--run-dir", required=True)
    graph_stats.add_argument("--max-path-length", type=int, default=config.MAX_PATH_LENGTH)
    graph_stats.add_argument("--verbose", action="store_true", help="debug logging")
    graph_stats.set_defaults(handler=cmd_graph_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG_FAILURE if e.code else EXIT_OK

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
