"""
Report Export Module
====================

Writes run accounting, metric reports and graph statistics to CSV, JSON and
Markdown files inside a run directory.

Functions:
  - format_value(value, reason) -> table cell ("n/a (reason)" for undefined metrics)
  - accounting_frame(documents) -> DataFrame
  - export_accounting_csv(documents, output_path) -> file path
  - metrics_markdown(report) -> str
  - export_metrics(report, run_dir) -> (json path, markdown path)
  - graph_stats_markdown(summary, rows, trend) -> str
  - export_graph_stats(summary, rows, trend, run_dir) -> file path
"""

import logging
import os
from pathlib import Path
from typing import Dict, Optional, Tuple

import pandas as pd

from modules.llm_gateway import AGENT_FAMILIES
from modules.run_store import write_json

logger = logging.getLogger(__name__)


def format_value(value, reason: Optional[str] = None, digits: int = 4) -> str:
    """
    Render a metric for a table cell.

    Example:
        >>> format_value(None, "no lexicon supplied")
        'n/a (no lexicon supplied)'
        >>> format_value(0.5)
        '0.5'
    """
    if value is None:
        return f"n/a ({reason})" if reason else "n/a"
    if isinstance(value, float):
        return str(round(value, digits))
    return str(value)


def _ensure_output_directory(output_path: str) -> None:
    output_dir = os.path.dirname(output_path)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)


# ============================================================================
# Accounting
# ============================================================================

def accounting_frame(documents: Dict[str, Dict]) -> pd.DataFrame:
    """
    One row per document: totals, estimated cost and calls per agent family.

    Args:
        documents: doc_id -> accounting record (UsageLedger.to_dict output)
    """
    rows = []
    for doc_id, record in documents.items():
        row = {"doc_id": doc_id}
        row.update(record.get("totals", {}))
        row["estimated_cost"] = record.get("estimated_cost", 0.0)
        for family in AGENT_FAMILIES:
            row[f"{family}_calls"] = record.get("by_agent", {}).get(family, {}).get("calls", 0)
        rows.append(row)
    return pd.DataFrame(rows)


def export_accounting_csv(documents: Dict[str, Dict], output_path: str) -> str:
    """Write the per-document accounting table; returns the absolute path."""
    _ensure_output_directory(output_path)
    accounting_frame(documents).to_csv(output_path, index=False, encoding="utf-8")
    absolute_path = os.path.abspath(output_path)
    logger.info(f"Exported accounting for {len(documents)} documents to {absolute_path}")
    return absolute_path


# ============================================================================
# Metrics report
# ============================================================================

def _histogram_table(histogram: Dict, key_name: str) -> str:
    if not histogram:
        return "_no paths_"
    frame = pd.DataFrame({key_name: list(histogram.keys()), "paths": list(histogram.values())})
    return frame.to_markdown(index=False)


def metrics_markdown(report: Dict) -> str:
    """Markdown version of an evaluate_run report."""
    corpus = report["corpus"]
    reasons = corpus.get("reasons", {})
    lines = ["# Metrics report", "", report.get("signature", ""), "", "## Corpus", ""]

    corpus_rows = [
        {"metric": "d-BLEU", "value": format_value(corpus.get("d_bleu"), reasons.get("d_bleu"), 2)},
        {"metric": "cTT", "value": format_value(corpus.get("ctt"), reasons.get("ctt"))},
        {"metric": "aZPT", "value": format_value(corpus.get("azpt"), reasons.get("azpt"))},
        {"metric": "paths", "value": format_value(corpus.get("num_paths"))},
        {"metric": "share of paths with 2-5 nodes", "value": format_value(corpus.get("share_length_2_5"))},
        {"metric": "share of paths with CR > 0.6", "value": format_value(corpus.get("share_cr_above_0_6"))},
    ]
    lines += [pd.DataFrame(corpus_rows).to_markdown(index=False), "", "## Documents", ""]

    doc_rows = []
    for doc_id, entry in report["documents"].items():
        doc_reasons = entry.get("reasons", {})
        doc_rows.append({
            "doc_id": doc_id,
            "discourses": entry.get("num_discourses"),
            "d-BLEU": format_value(entry.get("d_bleu"), doc_reasons.get("d_bleu"), 2),
            "cTT": format_value(entry.get("ctt"), doc_reasons.get("ctt")),
            "aZPT": format_value(entry.get("azpt"), doc_reasons.get("azpt")),
        })
    if doc_rows:
        lines.append(pd.DataFrame(doc_rows).to_markdown(index=False))

    lines += ["", "## Path lengths", "", _histogram_table(corpus.get("path_length_histogram", {}), "nodes")]
    lines += ["", "## Consistency ratio", "", _histogram_table(corpus.get("cr_histogram", {}), "CR")]
    return "\n".join(lines) + "\n"


def export_metrics(report: Dict, run_dir) -> Tuple[str, str]:
    """Write metrics.json and metrics.md into the run directory."""
    run_dir = Path(run_dir)
    json_path = run_dir / "metrics.json"
    md_path = run_dir / "metrics.md"
    write_json(json_path, report)
    with open(md_path, "w", encoding="utf-8") as f:
        f.write(metrics_markdown(report))
    logger.info(f"Exported metrics report to {json_path} and {md_path}")
    return str(json_path), str(md_path)


# ============================================================================
# Graph statistics
# ============================================================================

def _distribution_table(distribution: Dict, key_name: str, count_name: str) -> str:
    if not distribution:
        return "_empty_"
    frame = pd.DataFrame({key_name: list(distribution.keys()), count_name: list(distribution.values())})
    return frame.to_markdown(index=False)


def graph_stats_markdown(summary: Dict, rows: pd.DataFrame, trend: pd.DataFrame) -> str:
    """Markdown version of corpus_stats.get_graph_summary plus its tables."""
    lines = [
        "# Graph statistics",
        "",
        f"Documents: {summary['documents']}",
        f"Share of discourses with 3-40 sentences: {format_value(summary['share_discourses_3_40_sentences'])}",
        f"Share of documents with 3-20 non-consecutive edges: {format_value(summary['share_documents_3_20_non_consecutive'])}",
        f"Share of paths with 2-5 nodes: {format_value(summary['share_paths_length_2_5'])}",
        "",
        "## Documents",
        "",
        rows.to_markdown(index=False) if not rows.empty else "_empty_",
        "",
        "## Discourses per document",
        "",
        _distribution_table(summary["discourse_count_distribution"], "discourses", "documents"),
        "",
        "## Sentences per discourse",
        "",
        _distribution_table(summary["sentences_per_discourse_distribution"], "sentences", "discourses"),
        "",
        "## Edges per document",
        "",
        _distribution_table(summary["edges_per_document_distribution"], "edges", "documents"),
        "",
        "## Edges versus discourses",
        "",
        trend.to_markdown(index=False) if not trend.empty else "_empty_",
        "",
        "## Path lengths",
        "",
        _distribution_table(summary["path_length_distribution"], "nodes", "paths"),
    ]
    return "\n".join(lines) + "\n"


def export_graph_stats(summary: Dict, rows: pd.DataFrame, trend: pd.DataFrame, run_dir) -> str:
    path = Path(run_dir) / "graph_stats.md"
    with open(path, "w", encoding="utf-8") as f:
        f.write(graph_stats_markdown(summary, rows, trend))
    logger.info(f"Exported graph statistics to {path}")
    return str(path)


__all__ = [
    "format_value",
    "accounting_frame",
    "export_accounting_csv",
    "metrics_markdown",
    "export_metrics",
    "graph_stats_markdown",
    "export_graph_stats",
]
