"""
Run Configuration
=================

Declarative run configuration, validated with pydantic. One JSON file
selects the corpus, backend, strategies, ablation profile and decoding
parameters of a run; every default is materialized into the run directory.

Functions:
  - load_run_config(path, overrides) -> RunConfig
  - format_validation_error(error) -> str
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

import config
from modules.core_model import MEMORY_COMPONENTS
from modules.errors import ConfigError

logger = logging.getLogger(__name__)

# Named memory presets: full memory and no memory
MEMORY_PRESETS = {
    "FM": {name: True for name in MEMORY_COMPONENTS},
    "NM": {name: False for name in MEMORY_COMPONENTS},
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CorpusSettings(_Section):
    source: str
    references: List[str] = Field(default_factory=list)
    format: Literal["lines", "jsonl"] = "lines"
    source_lang: str = "en"
    target_lang: str = "de"


class BackendSettings(_Section):
    kind: Literal["http", "mock"] = "http"
    base_url: str = config.DEFAULT_BACKEND_URL
    model_name: str = config.DEFAULT_MODEL_NAME
    api_key_env: str = config.API_KEY_ENV
    mock_script: Optional[str] = None
    timeout_s: float = Field(config.REQUEST_TIMEOUT_SECONDS, gt=0)
    max_retries: int = Field(config.MAX_RETRIES, ge=0)
    backoff_factor: float = Field(config.BACKOFF_FACTOR, ge=0)

    @model_validator(mode="after")
    def _mock_needs_script(self):
        if self.kind == "mock" and not self.mock_script:
            raise ValueError("mock backend requires mock_script")
        return self


class DecodingSettings(_Section):
    temperature: float = Field(config.DEFAULT_TEMPERATURE, ge=0, le=1)
    normalize_output: bool = False


class SegmentationSettings(_Section):
    kind: Literal["llm", "random", "semantic", "sentence"] = "llm"
    seed: int = 0
    threshold: float = Field(config.SEMANTIC_THRESHOLD, gt=0, lt=1)
    window: int = Field(config.SEMANTIC_WINDOW, ge=0)
    embedder: Literal["tfidf", "spacy"] = "tfidf"
    max_sentences: int = Field(config.MAX_DISCOURSE_SENTENCES, ge=1)


class EdgeSettings(_Section):
    kind: Literal["llm", "chain", "tfidf"] = "llm"
    tau: float = Field(config.TFIDF_TAU, gt=0, lt=1)
    window: Optional[int] = Field(None, ge=1)
    workers: int = Field(config.EDGE_WORKERS, ge=1)


class MemorySettings(_Section):
    noun_pronoun: bool = True
    entities: bool = True
    phrases: bool = True
    connectives: bool = True
    summary: bool = True
    summary_cap: int = Field(config.SUMMARY_CAP, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _expand_preset(cls, value):
        if isinstance(value, str):
            if value not in MEMORY_PRESETS:
                raise ValueError(f"unknown memory preset {value!r}; use one of {sorted(MEMORY_PRESETS)}")
            return dict(MEMORY_PRESETS[value])
        return value

    def enabled(self) -> Tuple[str, ...]:
        return tuple(name for name in MEMORY_COMPONENTS if getattr(self, name))


class CacheSettings(_Section):
    enabled: bool = True


class PricingSettings(_Section):
    prompt_per_1k: float = Field(0.0, ge=0)
    completion_per_1k: float = Field(0.0, ge=0)


class RunConfig(_Section):
    """Complete description of one run."""

    corpus: CorpusSettings
    backend: BackendSettings = Field(default_factory=BackendSettings)
    decoding: DecodingSettings = Field(default_factory=DecodingSettings)
    segmentation: SegmentationSettings = Field(default_factory=SegmentationSettings)
    edges: EdgeSettings = Field(default_factory=EdgeSettings)
    memory: MemorySettings = Field(default_factory=MemorySettings)
    ablation: Literal["full", "ta_only", "ta_da", "ta_da_ma"] = "full"
    cache: CacheSettings = Field(default_factory=CacheSettings)
    pricing: PricingSettings = Field(default_factory=PricingSettings)
    workers: int = Field(config.DEFAULT_WORKERS, ge=1)
    output_dir: str = config.RUNS_FOLDER

    @field_validator("ablation", mode="before")
    @classmethod
    def _normalize_ablation(cls, value):
        return value.lower().replace("+", "_").replace(" ", "") if isinstance(value, str) else value

    # ------------------------------------------------------------------
    # Ablation profile
    # ------------------------------------------------------------------

    def segments_document(self) -> bool:
        return self.ablation != "ta_only"

    def effective_edge_kind(self) -> Optional[str]:
        """Graph strategy actually used; None when the document is one block."""
        if self.ablation == "ta_only":
            return None
        if self.ablation in ("ta_da", "ta_da_ma"):
            return "chain"
        return self.edges.kind

    def memory_components(self) -> Tuple[str, ...]:
        """Memory components extracted in this run."""
        if self.ablation in ("ta_only", "ta_da"):
            return ()
        return self.memory.enabled()

    def to_record(self) -> Dict:
        """Settings written to the run directory (output location excluded)."""
        return self.model_dump(mode="json", exclude={"output_dir"})


def format_validation_error(error: ValidationError) -> str:
    """One line per problem, each prefixed with its dotted field path."""
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "; ".join(lines)


_PATH_FIELDS = (("corpus", "source"), ("backend", "mock_script"))


def _resolve(base: Path, value: Optional[str]) -> Optional[str]:
    if not value or Path(value).is_absolute():
        return value
    return str((base / value).resolve())


def load_run_config(path, overrides: Optional[Dict] = None) -> RunConfig:
    """
    Read and validate a run configuration file.

    Relative paths inside the file resolve against the file's directory.

    Args:
        path: JSON config file
        overrides: CLI overrides; keys backend_url, mock_script, seed, workers, out

    Returns:
        RunConfig: validated configuration

    Raises:
        ConfigError: unreadable file or invalid settings (with field paths)
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")

    base = path.parent
    for section, key in _PATH_FIELDS:
        if isinstance(raw.get(section), dict) and isinstance(raw[section].get(key), str):
            raw[section][key] = _resolve(base, raw[section][key])
    corpus = raw.get("corpus")
    if isinstance(corpus, dict) and isinstance(corpus.get("references"), list):
        corpus["references"] = [_resolve(base, r) if isinstance(r, str) else r for r in corpus["references"]]
    if isinstance(raw.get("output_dir"), str):
        raw["output_dir"] = _resolve(base, raw["output_dir"])

    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if overrides.get("backend_url"):
        raw.setdefault("backend", {})["base_url"] = overrides["backend_url"]
    if overrides.get("mock_script"):
        backend = raw.setdefault("backend", {})
        backend["kind"] = "mock"
        backend["mock_script"] = str(Path(overrides["mock_script"]).resolve())
    if "seed" in overrides:
        raw.setdefault("segmentation", {})["seed"] = overrides["seed"]
    if "workers" in overrides:
        raw["workers"] = overrides["workers"]
    if overrides.get("out"):
        raw["output_dir"] = str(Path(overrides["out"]).resolve())

    try:
        run_config = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(format_validation_error(e)) from e

    logger.info(
        f"Loaded config {path.name}: segmentation={run_config.segmentation.kind}, "
        f"edges={run_config.effective_edge_kind()}, ablation={run_config.ablation}"
    )
    return run_config


__all__ = [
    "MEMORY_PRESETS",
    "CorpusSettings",
    "BackendSettings",
    "DecodingSettings",
    "SegmentationSettings",
    "EdgeSettings",
    "MemorySettings",
    "CacheSettings",
    "PricingSettings",
    "RunConfig",
    "format_validation_error",
    "load_run_config",
]
