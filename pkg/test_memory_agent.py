"""
Memory Agent Tests
==================

Run with: pytest test_memory_agent.py
"""

import random

import pytest

from modules.core_model import LocalMemory
from modules.errors import MemoryExtractionError
from modules.llm_gateway import LLMGateway, MockBackend
from modules.memory_agent import aggregate, extract, parse_memory_map
from modules.prompts import JSON_REMINDER

SOURCE = "The bank raised its fees."
TARGET = "Die Bank erhöhte ihre Gebühren."


def mock_client(entries):
    backend = MockBackend(entries)
    return LLMGateway(backend, model_name="m").client("doc", "en", "de"), backend


FULL_SCRIPT = [
    {"match": {"agent": "memory.noun_pronoun"}, "response": "{}"},
    {"match": {"agent": "memory.entities"}, "response": '```json\n{"bank": "Bank"}\n```'},
    {"match": {"agent": "memory.phrases"}, "response": '{"fees": "Gebühren", "raised": "erhöhte"}'},
    {"match": {"agent": "memory.connectives"}, "response": "{}"},
    {"match": {"agent": "memory.summary"}, "response": "Die Bank\nerhöht Gebühren."},
]


# ========== Parsing ==========

def test_parse_memory_map_strips_fences_and_whitespace():
    assert parse_memory_map('```json\n{" Bank ": " Ufer "}\n```') == {"Bank": "Ufer"}
    assert parse_memory_map("{}") == {}


@pytest.mark.parametrize("answer", ['["a"]', '{"a": 1}', '{"": "x"}', "Bank -> Ufer", '{"a": {"b": "c"}}'])
def test_parse_memory_map_rejects_non_flat_objects(answer):
    with pytest.raises(ValueError):
        parse_memory_map(answer)


# ========== Extraction ==========

def test_extract_all_components():
    client, backend = mock_client(FULL_SCRIPT)
    memory = extract(client, SOURCE, TARGET, ordinal=2)

    assert memory.entities == {"bank": "Bank"}
    assert list(memory.phrases) == ["fees", "raised"]
    assert memory.noun_pronoun == {}
    assert memory.summary == "Die Bank erhöht Gebühren."
    assert backend.count_calls("memory") == 5
    assert {r.ordinal for r in backend.call_log} == {2}


def test_disabled_components_cost_no_call():
    client, backend = mock_client(FULL_SCRIPT)
    memory = extract(client, SOURCE, TARGET, components=("entities", "connectives", "summary", "noun_pronoun"))
    assert memory.phrases == {}
    assert backend.count_calls("memory") == 4
    assert "memory.phrases" not in {r.agent_kind for r in backend.call_log}


def test_no_components_no_calls():
    client, backend = mock_client([])
    assert extract(client, SOURCE, TARGET, components=()) == LocalMemory()
    assert backend.count_calls() == 0


def test_unparseable_map_is_reasked_once():
    client, _ = mock_client([])
    prompt = client.render("memory.entities", {"source": SOURCE, "translation": TARGET})
    client, backend = mock_client([
        {"match": {"prompt": f"{prompt}\n{JSON_REMINDER}"}, "response": '{"bank": "Bank"}'},
        {"match": {"agent": "memory.entities"}, "response": "bank = Bank"},
    ])
    memory = extract(client, SOURCE, TARGET, components=("entities",))
    assert memory.entities == {"bank": "Bank"}
    assert backend.count_calls("memory") == 2


def test_second_bad_answer_names_the_component():
    script = [{"match": {"agent": "memory.connectives"}, "response": "however"}] + FULL_SCRIPT
    client, _ = mock_client(script)
    with pytest.raises(MemoryExtractionError) as excinfo:
        extract(client, SOURCE, TARGET)
    assert excinfo.value.component == "connectives"


# ========== Aggregation ==========

def test_aggregate_earliest_predecessor_wins():
    early = LocalMemory(entities={"bank": "Ufer"}, phrases={"fees": "Gebühren"})
    late = LocalMemory(entities={"bank": "Bank", "Basel": "Basel"})
    merged = aggregate([late, early], [3, 0])
    assert merged.entities == {"bank": "Ufer", "Basel": "Basel"}
    assert list(merged.entities) == ["bank", "Basel"]
    assert merged.phrases == {"fees": "Gebühren"}


def test_aggregate_summary_cap_and_delimiter():
    preds = [LocalMemory(summary=f"s{i}") for i in range(6)]
    preds.insert(2, LocalMemory())
    merged = aggregate(preds, list(range(7)), summary_cap=5)
    assert merged.summary == "s0 | s1 | s2 | s3 | s4"


def test_aggregate_nothing():
    assert aggregate([]).is_empty()


def test_aggregate_three_conflicting_predecessors():
    preds = {
        4: LocalMemory(entities={"bank": "Ufer"}, summary="late"),
        1: LocalMemory(entities={"bank": "Bank", "fees": "Gebühren"}, summary="early"),
        2: LocalMemory(entities={"fees": "Kosten", "river": "Fluss"}, connectives={"however": "jedoch"}),
    }
    merged = aggregate(list(preds.values()), list(preds))
    assert merged.entities == {"bank": "Bank", "fees": "Gebühren", "river": "Fluss"}
    assert merged.connectives == {"however": "jedoch"}
    assert merged.summary == "early | late"


def test_aggregate_is_idempotent():
    rng = random.Random(9)
    keys = ["bank", "fees", "river", "she", "however"]
    for _ in range(100):
        memory = LocalMemory(
            entities={k: rng.choice("XYZ") for k in rng.sample(keys, rng.randint(0, 5))},
            phrases={k: rng.choice("XYZ") for k in rng.sample(keys, rng.randint(0, 5))},
            summary=rng.choice(["", "A summary."]),
        )
        assert aggregate([memory]) == memory
        doubled = aggregate([memory, memory], [0, 1])
        assert doubled.entities == memory.entities
        assert doubled.phrases == memory.phrases
