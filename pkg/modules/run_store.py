"""
Run Directory Storage
=====================

File-based persistence of run artifacts. Every document gets its own folder
that is written atomically (built in a temporary folder, then renamed).
JSON is written with stable key order and without timestamps so that two runs
with the same inputs produce byte-identical directories.

Layout:
  <run_dir>/config.json
  <run_dir>/accounting.json, accounting.csv
  <run_dir>/cache/<sha256>.json
  <run_dir>/docs/<doc_id>/source.json, segmentation.json, graph.json,
      memories/<i>.json, translations/<i>.txt, document.txt, accounting.json,
      error.json (failed documents only)
"""

import json
import logging
import os
import shutil
from pathlib import Path
from typing import Dict, List, Optional

from modules.core_model import DiscourseGraph, Document, LocalMemory, Translation, spans_to_discourses, validate_segmentation
from modules.errors import ArtifactError, GraftError, StageError
from modules.ingestion import is_safe_doc_id
from modules.translator import RunRecord

logger = logging.getLogger(__name__)


def write_json(path, data) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")


def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise ArtifactError(f"cannot read {path}: {e}") from e


class RunStore:
    """Reads and writes one run directory."""

    def __init__(self, run_dir):
        self.run_dir = Path(run_dir)
        self.docs_dir = self.run_dir / "docs"

    @property
    def cache_dir(self) -> Path:
        return self.run_dir / "cache"

    def _doc_path(self, doc_id: str) -> Path:
        if not is_safe_doc_id(doc_id):
            raise ArtifactError(f"document id {doc_id!r} cannot name a folder under {self.docs_dir}")
        return self.docs_dir / doc_id

    # ------------------------------------------------------------------
    # Writing
    # ------------------------------------------------------------------

    def prepare(self, run_config) -> None:
        """Create the directory and write config.json."""
        self.docs_dir.mkdir(parents=True, exist_ok=True)
        write_json(self.run_dir / "config.json", run_config.to_record())
        logger.info(f"Run directory ready: {self.run_dir}")

    def save_record(self, record: RunRecord, error: Optional[StageError] = None) -> Path:
        """
        Persist a (possibly partial) run record.

        Args:
            record: Record to write
            error: Stage failure to store as error.json next to the partial artifacts

        Returns:
            Path: the document folder
        """
        target = self._doc_path(record.doc_id)
        tmp = self.docs_dir / f".{record.doc_id}.tmp"
        if tmp.exists():
            shutil.rmtree(tmp)
        tmp.mkdir(parents=True)

        write_json(tmp / "source.json", record.source.to_dict())
        if record.segmentation:
            write_json(tmp / "segmentation.json", [[d.lo, d.hi] for d in record.segmentation])
        if record.graph is not None:
            write_json(tmp / "graph.json", record.graph.to_dict())
        if record.memories:
            (tmp / "memories").mkdir()
            for i, memory in sorted(record.memories.items()):
                write_json(tmp / "memories" / f"{i}.json", memory.to_dict())
        if record.translations:
            (tmp / "translations").mkdir()
            for t in record.translations:
                with open(tmp / "translations" / f"{t.discourse_index}.txt", "w", encoding="utf-8") as f:
                    f.write(t.target_text)
        if record.document:
            with open(tmp / "document.txt", "w", encoding="utf-8") as f:
                f.write(record.document)
        write_json(tmp / "accounting.json", record.accounting)
        if error is not None:
            write_json(tmp / "error.json", {"stage": error.stage, "node": error.node, "message": str(error.cause)})

        if target.exists():
            shutil.rmtree(target)
        os.replace(tmp, target)
        logger.debug(f"Stored {record.doc_id} in {target}")
        return target

    def save_accounting(self, corpus: Dict, documents: Dict[str, Dict]) -> None:
        """Corpus totals plus per-document records, in corpus order."""
        write_json(self.run_dir / "accounting.json", {"corpus": corpus, "documents": documents})

    # ------------------------------------------------------------------
    # Reading
    # ------------------------------------------------------------------

    def doc_ids(self) -> List[str]:
        """Documents of the run in corpus order."""
        accounting = self.run_dir / "accounting.json"
        if accounting.exists():
            return list(read_json(accounting).get("documents", {}))
        if not self.docs_dir.exists():
            raise ArtifactError(f"{self.run_dir} is not a run directory")
        return sorted(p.name for p in self.docs_dir.iterdir() if (p / "source.json").exists())

    def load_config(self) -> Dict:
        return read_json(self.run_dir / "config.json")

    def load_record(self, doc_id: str) -> RunRecord:
        """
        Load a document's artifacts back into a RunRecord.

        Raises:
            ArtifactError: missing or inconsistent artifacts
        """
        folder = self._doc_path(doc_id)
        if not (folder / "source.json").exists():
            raise ArtifactError(f"no artifacts for document {doc_id!r} in {self.run_dir}")
        if (folder / "error.json").exists():
            raise ArtifactError(f"document {doc_id!r} failed: {read_json(folder / 'error.json')['message']}")

        try:
            source = Document.from_dict(read_json(folder / "source.json"))
            segmentation = spans_to_discourses(read_json(folder / "segmentation.json"))
            validate_segmentation(segmentation, len(source))
            graph = DiscourseGraph.from_dict(read_json(folder / "graph.json"))

            memories = {}
            if (folder / "memories").exists():
                for path in (folder / "memories").glob("*.json"):
                    memories[int(path.stem)] = LocalMemory.from_dict(read_json(path))

            translations = []
            for d in segmentation:
                with open(folder / "translations" / f"{d.index}.txt", "r", encoding="utf-8") as f:
                    translations.append(Translation(d.index, f.read(), d.lo, d.hi))
            with open(folder / "document.txt", "r", encoding="utf-8") as f:
                document = f.read()
        except (OSError, ValueError, KeyError, GraftError) as e:
            if isinstance(e, ArtifactError):
                raise
            raise ArtifactError(f"invalid artifacts for {doc_id!r}: {e}") from e

        return RunRecord(
            doc_id=doc_id,
            source=source,
            segmentation=segmentation,
            graph=graph,
            memories=memories,
            translations=translations,
            document=document,
            accounting=read_json(folder / "accounting.json"),
        )

    def load_graph(self, doc_id: str) -> DiscourseGraph:
        path = self._doc_path(doc_id) / "graph.json"
        if not path.exists():
            raise ArtifactError(f"no graph for document {doc_id!r}")
        try:
            return DiscourseGraph.from_dict(read_json(path))
        except (KeyError, ValueError) as e:
            raise ArtifactError(f"invalid graph for {doc_id!r}: {e}") from e


__all__ = [
    "write_json",
    "read_json",
    "RunStore",
]
