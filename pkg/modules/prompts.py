"""
Prompt Library for the Translation Agents
=========================================

Few-shot prompt templates for the four agents of the pipeline:
Discourse Agent (segmentation), Edge Agent (edge), Memory Agent
(memory.<component>, one template per memory component) and Translation Agent
(translation). Every template carries three worked examples authored for
English -> German; the language pair of the actual run is bound at render time.

Example:
    >>> t = get_template("segmentation", "en", "de")
    >>> prompt = render(t, {"current_segment": "A.", "sentence": "B."})
    >>> prompt == render(t, {"current_segment": "A.", "sentence": "B."})
    True
"""

import logging
import string
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Tuple

from modules.core_model import MAP_COMPONENTS, MEMORY_COMPONENTS, LocalMemory
from modules.errors import PromptRenderError

logger = logging.getLogger(__name__)


# ============================================================================
# LANGUAGES AND AGENT KINDS
# ============================================================================

LANGUAGE_NAMES = {
    "en": "English", "de": "German", "fr": "French", "es": "Spanish",
    "it": "Italian", "pt": "Portuguese", "nl": "Dutch", "ru": "Russian",
    "zh": "Chinese", "ja": "Japanese", "ko": "Korean", "ar": "Arabic",
}

BINARY_AGENTS = ("segmentation", "edge")
MEMORY_AGENTS = tuple(f"memory.{name}" for name in MEMORY_COMPONENTS)
AGENT_KINDS = BINARY_AGENTS + MEMORY_AGENTS + ("translation",)

# Appended to a binary prompt when the first answer could not be parsed
BINARY_REMINDER = "Reply with exactly one word: yes or no."
JSON_REMINDER = "Reply with one flat JSON object mapping source strings to target strings and nothing else."

_MEMORY_HEADINGS = {
    "noun_pronoun": "Nouns and the pronouns that refer to them",
    "entities": "Named entities",
    "phrases": "Key phrases",
    "connectives": "Discourse connectives",
}

# Slots filled from the template's language pair rather than by the caller
_LANGUAGE_SLOTS = {"source_language", "target_language"}


def language_name(tag: str) -> str:
    """English name for a language tag; unknown tags are returned unchanged."""
    primary = tag.replace("_", "-").split("-")[0].lower()
    return LANGUAGE_NAMES.get(primary, tag)


# ============================================================================
# TEMPLATE TYPE
# ============================================================================

@dataclass(frozen=True)
class FewShotExample:
    input_text: str
    output_text: str


@dataclass(frozen=True)
class PromptTemplate:
    """
    One agent prompt.

    `body` is a str.format template; its field names are the template's slots.
    `source_language` and `target_language` are bound from the language pair.
    """

    template_id: str
    task: str
    body: str
    examples: Tuple[FewShotExample, ...]
    source_lang: str = "en"
    target_lang: str = "de"

    @property
    def slot_names(self) -> List[str]:
        names = []
        for _, field_name, _, _ in string.Formatter().parse(self.body):
            if field_name and field_name not in names and field_name not in _LANGUAGE_SLOTS:
                names.append(field_name)
        return names

    def for_languages(self, source_lang: str, target_lang: str) -> "PromptTemplate":
        return replace(self, source_lang=source_lang, target_lang=target_lang)


# ============================================================================
# RENDERING
# ============================================================================

def render_memory(memory: LocalMemory) -> str:
    """
    Render a memory as a prompt section, components in fixed order and
    entries in insertion order. An empty memory renders as "".
    """
    if memory is None or memory.is_empty():
        return ""

    lines = ["Context memory from related earlier discourses:"]
    for name in MAP_COMPONENTS:
        mapping = memory.component(name)
        if not mapping:
            continue
        lines.append(f"{_MEMORY_HEADINGS[name]}:")
        lines.extend(f"- {source} -> {target}" for source, target in mapping.items())
    if memory.summary:
        lines.append(f"Summary so far: {memory.summary}")
    return "\n".join(lines) + "\n\n"


def _format_value(value) -> str:
    if isinstance(value, LocalMemory):
        return render_memory(value)
    return str(value)


def render(template: PromptTemplate, slots: Mapping[str, object]) -> str:
    """
    Render a template into the exact prompt bytes sent to the backend.

    Args:
        template: Prompt template
        slots: Slot values; LocalMemory values are rendered with render_memory

    Returns:
        str: task instructions, numbered few-shot examples, then the filled body

    Raises:
        PromptRenderError: if a slot of the template is not bound
    """
    missing = [name for name in template.slot_names if name not in slots]
    if missing:
        raise PromptRenderError(f"template {template.template_id!r} has unbound slots: {missing}")

    values = {name: _format_value(slots[name]) for name in template.slot_names}
    values["source_language"] = language_name(template.source_lang)
    values["target_language"] = language_name(template.target_lang)

    try:
        task = template.task.format(**values)
        body = template.body.format(**values)
    except (KeyError, IndexError, ValueError) as e:
        raise PromptRenderError(f"template {template.template_id!r} failed to render: {e}")

    parts = [task, ""]
    for number, example in enumerate(template.examples, 1):
        parts.append(f"Example {number}:")
        parts.append(example.input_text)
        parts.append(f"Answer: {example.output_text}")
        parts.append("")
    parts.append("Now the actual input:")
    parts.append(body)
    return "\n".join(parts)


# ============================================================================
# TEMPLATE LIBRARY
# ============================================================================

_SEGMENTATION = PromptTemplate(
    template_id="discourse_agent_v1",
    task=(
        "You are segmenting a {source_language} document into discourses: runs of "
        "consecutive sentences about one topic that should be translated together. "
        "Given the current discourse and the next sentence, answer yes if the sentence "
        "continues the current discourse and no if it starts a new one."
    ),
    body="Current discourse:\n{current_segment}\nNext sentence:\n{sentence}\nAnswer:",
    examples=(
        FewShotExample(
            "Current discourse:\nThe museum opened in 1902. It houses Roman coins.\n"
            "Next sentence:\nThe coin collection was donated by a local family.",
            "yes",
        ),
        FewShotExample(
            "Current discourse:\nThe museum opened in 1902.\n"
            "Next sentence:\nIn other news, the football season starts next week.",
            "no",
        ),
        FewShotExample(
            "Current discourse:\nShe boiled the water. Then she added the pasta.\n"
            "Next sentence:\nAfter ten minutes, she drained it.",
            "yes",
        ),
    ),
)

_EDGE = PromptTemplate(
    template_id="edge_agent_v1",
    task=(
        "Two discourses come from the same {source_language} document; the first appears "
        "earlier. Answer yes if translating the later discourse into {target_language} "
        "needs context from the earlier one (shared entities, terminology, references or "
        "an ongoing argument), otherwise answer no."
    ),
    body="Earlier discourse:\n{earlier}\nLater discourse:\n{later}\nAnswer:",
    examples=(
        FewShotExample(
            "Earlier discourse:\nDr. Weber founded the clinic in Basel.\n"
            "Later discourse:\nYears later, the clinic she built treated thousands.",
            "yes",
        ),
        FewShotExample(
            "Earlier discourse:\nThe recipe needs two eggs.\n"
            "Later discourse:\nThe weather stayed dry all week.",
            "no",
        ),
        FewShotExample(
            "Earlier discourse:\nWe call this approach bank-level pooling.\n"
            "Later discourse:\nBank-level pooling reduces the variance further.",
            "yes",
        ),
    ),
)


def _map_template(component: str, task: str, examples: Tuple[FewShotExample, ...]) -> PromptTemplate:
    return PromptTemplate(
        template_id=f"memory_{component}_v1",
        task=task + " Reply with one flat JSON object mapping source strings to target strings. "
        "Reply with an empty object if there is nothing to record.",
        body="Source ({source_language}):\n{source}\nTranslation ({target_language}):\n{translation}\nAnswer:",
        examples=examples,
    )


_MEMORY_TEMPLATES = {
    "noun_pronoun": _map_template(
        "noun_pronoun",
        "Find nouns in the {source_language} source and the {target_language} pronouns "
        "that refer to them in the translation.",
        (
            FewShotExample(
                "Source (English):\nThe company lost money. It closed in May.\n"
                "Translation (German):\nDie Firma verlor Geld. Sie schloss im Mai.",
                '{"company": "sie"}',
            ),
            FewShotExample(
                "Source (English):\nThe table was old. We sold it.\n"
                "Translation (German):\nDer Tisch war alt. Wir verkauften ihn.",
                '{"table": "ihn"}',
            ),
            FewShotExample(
                "Source (English):\nIt rained.\nTranslation (German):\nEs regnete.",
                "{}",
            ),
        ),
    ),
    "entities": _map_template(
        "entities",
        "List the named entities of the {source_language} source together with their "
        "translation in the {target_language} text.",
        (
            FewShotExample(
                "Source (English):\nThe United Nations met in Geneva.\n"
                "Translation (German):\nDie Vereinten Nationen tagten in Genf.",
                '{"United Nations": "Vereinte Nationen", "Geneva": "Genf"}',
            ),
            FewShotExample(
                "Source (English):\nMaria visited the Black Forest.\n"
                "Translation (German):\nMaria besuchte den Schwarzwald.",
                '{"Maria": "Maria", "Black Forest": "Schwarzwald"}',
            ),
            FewShotExample(
                "Source (English):\nWe went home.\nTranslation (German):\nWir gingen nach Hause.",
                "{}",
            ),
        ),
    ),
    "phrases": _map_template(
        "phrases",
        "List the key phrases and domain terms of the {source_language} source together "
        "with the {target_language} wording used for them.",
        (
            FewShotExample(
                "Source (English):\nThe interest rate rose again.\n"
                "Translation (German):\nDer Zinssatz stieg erneut.",
                '{"interest rate": "Zinssatz"}',
            ),
            FewShotExample(
                "Source (English):\nClimate change affects crop yields.\n"
                "Translation (German):\nDer Klimawandel beeinflusst die Ernteerträge.",
                '{"climate change": "Klimawandel", "crop yields": "Ernteerträge"}',
            ),
            FewShotExample(
                "Source (English):\nThanks a lot.\nTranslation (German):\nVielen Dank.",
                "{}",
            ),
        ),
    ),
    "connectives": _map_template(
        "connectives",
        "List the discourse connectives of the {source_language} source together with "
        "their {target_language} translation.",
        (
            FewShotExample(
                "Source (English):\nHowever, the plan failed.\n"
                "Translation (German):\nDer Plan scheiterte jedoch.",
                '{"however": "jedoch"}',
            ),
            FewShotExample(
                "Source (English):\nIt was late, so we left. Moreover, it rained.\n"
                "Translation (German):\nEs war spät, also gingen wir. Außerdem regnete es.",
                '{"so": "also", "moreover": "außerdem"}',
            ),
            FewShotExample(
                "Source (English):\nThe sky is blue.\nTranslation (German):\nDer Himmel ist blau.",
                "{}",
            ),
        ),
    ),
    "summary": PromptTemplate(
        template_id="memory_summary_v1",
        task=(
            "Summarize what the {target_language} translation says in one short "
            "{target_language} sentence on a single line."
        ),
        body="Source ({source_language}):\n{source}\nTranslation ({target_language}):\n{translation}\nAnswer:",
        examples=(
            FewShotExample(
                "Source (English):\nThe museum opened in 1902. It houses Roman coins.\n"
                "Translation (German):\nDas Museum wurde 1902 eröffnet. Es beherbergt römische Münzen.",
                "Ein 1902 eröffnetes Museum zeigt römische Münzen.",
            ),
            FewShotExample(
                "Source (English):\nShe boiled the water. Then she added the pasta.\n"
                "Translation (German):\nSie kochte das Wasser. Dann gab sie die Nudeln hinein.",
                "Sie beginnt, Nudeln zu kochen.",
            ),
            FewShotExample(
                "Source (English):\nThe vote was postponed.\n"
                "Translation (German):\nDie Abstimmung wurde verschoben.",
                "Die Abstimmung findet später statt.",
            ),
        ),
    ),
}

_TRANSLATION = PromptTemplate(
    template_id="translation_agent_v1",
    task=(
        "Translate the {source_language} discourse into {target_language}. Keep the "
        "terminology, entity names, pronoun choices and connectives given in the context "
        "memory when it is present. Reply with the translation only."
    ),
    body="{memory}Source ({source_language}):\n{discourse}\nTranslation ({target_language}):",
    examples=(
        FewShotExample(
            "Source (English):\nThe bank raised its fees.\nTranslation (German):",
            "Die Bank erhöhte ihre Gebühren.",
        ),
        FewShotExample(
            "Source (English):\nWe sat on the bank of the river.\nTranslation (German):",
            "Wir saßen am Ufer des Flusses.",
        ),
        FewShotExample(
            "Source (English):\nHowever, the results were promising.\nTranslation (German):",
            "Die Ergebnisse waren jedoch vielversprechend.",
        ),
    ),
)

PROMPT_LIBRARY: Dict[str, PromptTemplate] = {
    "segmentation": _SEGMENTATION,
    "edge": _EDGE,
    **{f"memory.{name}": template for name, template in _MEMORY_TEMPLATES.items()},
    "translation": _TRANSLATION,
}


def get_template(agent_kind: str, source_lang: str, target_lang: str) -> PromptTemplate:
    """
    Look up the template for an agent and bind the run's language pair.

    Raises:
        PromptRenderError: for an unknown agent kind
    """
    try:
        template = PROMPT_LIBRARY[agent_kind]
    except KeyError:
        raise PromptRenderError(f"no prompt template for agent kind {agent_kind!r}")
    return template.for_languages(source_lang, target_lang)


__all__ = [
    "LANGUAGE_NAMES",
    "AGENT_KINDS",
    "BINARY_AGENTS",
    "MEMORY_AGENTS",
    "BINARY_REMINDER",
    "JSON_REMINDER",
    "FewShotExample",
    "PromptTemplate",
    "PROMPT_LIBRARY",
    "language_name",
    "render_memory",
    "render",
    "get_template",
]
