"""
Memory Agent
============

Extracts the five-component local memory from a translated discourse and
merges predecessor memories into the incident memory of a node.

Functions:
  - parse_memory_map(text) -> dict
  - extract(client, source_text, translation_text, components, ordinal) -> LocalMemory
  - aggregate(preds, pred_indices, summary_cap) -> LocalMemory
"""

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Sequence

import config
from modules.core_model import MAP_COMPONENTS, MEMORY_COMPONENTS, LocalMemory
from modules.errors import MemoryExtractionError
from modules.prompts import JSON_REMINDER

logger = logging.getLogger(__name__)

_FENCE = re.compile(r"^```[a-zA-Z]*\s*|\s*```$")


def parse_memory_map(text: str) -> Dict[str, str]:
    """
    Parse a memory component answer: one flat JSON object of string -> string.

    Surrounding markdown code fences are ignored.

    Raises:
        ValueError: if the answer is not such an object

    Example:
        >>> parse_memory_map('```json\\n{"Bank": "Ufer"}\\n```')
        {'Bank': 'Ufer'}
    """
    cleaned = _FENCE.sub("", text.strip())
    data = json.loads(cleaned)
    if not isinstance(data, dict):
        raise ValueError(f"expected a JSON object, got {type(data).__name__}")

    result = {}
    for key, value in data.items():
        if not isinstance(value, str):
            raise ValueError(f"value for {key!r} is not a string")
        key = key.strip()
        if not key:
            raise ValueError("empty key")
        result[key] = value.strip()
    return result


def _flatten(text: str) -> str:
    return " ".join(text.split())


def _extract_component(client, component: str, source_text: str, translation_text: str, ordinal):
    agent_kind = f"memory.{component}"
    prompt = client.render(agent_kind, {"source": source_text, "translation": translation_text})
    answer = client.ask(agent_kind, prompt, ordinal)

    if component == "summary":
        return _flatten(answer)

    try:
        return parse_memory_map(answer)
    except ValueError as e:
        logger.warning(f"[{client.doc_id}] {agent_kind} #{ordinal}: unparseable answer ({e}), asking again")

    answer = client.ask(agent_kind, f"{prompt}\n{JSON_REMINDER}", ordinal)
    try:
        return parse_memory_map(answer)
    except ValueError as e:
        raise MemoryExtractionError(component, f"invalid answer {answer[:80]!r}: {e}") from e


def extract(
    client,
    source_text: str,
    translation_text: str,
    components: Sequence[str] = MEMORY_COMPONENTS,
    ordinal: Optional[int] = None,
) -> LocalMemory:
    """
    Build the local memory of one discourse.

    One Memory Agent call per enabled component, issued concurrently.
    Components not listed in `components` stay empty and cost no call.

    Args:
        client: AgentClient for the document
        source_text: Source discourse
        translation_text: Its translation
        components: Enabled memory components
        ordinal: Node index, stamped on every call

    Returns:
        LocalMemory

    Raises:
        MemoryExtractionError: tagged with the first failing component
    """
    enabled = [name for name in MEMORY_COMPONENTS if name in components]
    if not enabled:
        return LocalMemory()

    results, errors = {}, {}
    with ThreadPoolExecutor(max_workers=len(enabled)) as executor:
        futures = {
            name: executor.submit(_extract_component, client, name, source_text, translation_text, ordinal)
            for name in enabled
        }
        for name, future in futures.items():
            try:
                results[name] = future.result()
            except Exception as e:
                errors[name] = e

    for name in enabled:
        if name in errors:
            error = errors[name]
            if isinstance(error, MemoryExtractionError):
                raise error
            raise MemoryExtractionError(name, str(error)) from error

    return LocalMemory(
        summary=results.get("summary", ""),
        **{name: results.get(name, {}) for name in MAP_COMPONENTS},
    )


def aggregate(
    preds: Sequence[LocalMemory],
    pred_indices: Optional[Sequence[int]] = None,
    summary_cap: int = config.SUMMARY_CAP,
) -> LocalMemory:
    """
    Merge predecessor memories into an incident memory.

    For every map component the earliest predecessor's binding of a key wins;
    later bindings of the same key are dropped. Entry order is ascending
    predecessor index, then each memory's own order. Non-empty summaries of
    the earliest `summary_cap` predecessors are joined with " | ".

    Example:
        >>> a = LocalMemory(entities={"Bank": "Ufer"})
        >>> b = LocalMemory(entities={"Bank": "Bank"})
        >>> aggregate([a, b], [0, 2]).entities
        {'Bank': 'Ufer'}
    """
    ordered = list(preds)
    if pred_indices is not None:
        ordered = [m for _, m in sorted(zip(pred_indices, preds), key=lambda pair: pair[0])]

    merged = {name: {} for name in MAP_COMPONENTS}
    for memory in ordered:
        for name in MAP_COMPONENTS:
            target = merged[name]
            for key, value in memory.component(name).items():
                if key not in target:
                    target[key] = value

    summaries = [m.summary for m in ordered if m.summary][:summary_cap]
    return LocalMemory(summary=config.SUMMARY_DELIMITER.join(summaries), **merged)


__all__ = [
    "parse_memory_map",
    "extract",
    "aggregate",
]
