"""
Run Configuration Tests
=======================

Run with: pytest test_run_config.py
"""

import json
from pathlib import Path

import pytest

from modules.errors import ConfigError
from modules.run_config import RunConfig, load_run_config


def write_config(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_defaults_are_materialized():
    run_config = RunConfig.model_validate({"corpus": {"source": "docs.txt"}})
    record = run_config.to_record()
    assert record["segmentation"]["kind"] == "llm"
    assert record["edges"]["tau"] == 0.3
    assert record["memory"]["summary_cap"] == 5
    assert record["decoding"]["temperature"] == 0.1
    assert "output_dir" not in record


def test_relative_paths_resolve_against_config_dir(tmp_path):
    path = write_config(tmp_path, {
        "corpus": {"source": "src.txt", "references": ["ref.txt"]},
        "backend": {"kind": "mock", "mock_script": "script.json"},
        "output_dir": "out",
    })
    run_config = load_run_config(path)
    assert Path(run_config.corpus.source) == (tmp_path / "src.txt").resolve()
    assert Path(run_config.corpus.references[0]) == (tmp_path / "ref.txt").resolve()
    assert Path(run_config.backend.mock_script) == (tmp_path / "script.json").resolve()
    assert Path(run_config.output_dir) == (tmp_path / "out").resolve()


def test_cli_overrides(tmp_path):
    path = write_config(tmp_path, {"corpus": {"source": "src.txt"}})
    run_config = load_run_config(path, {
        "backend_url": "http://other/v1",
        "mock_script": str(tmp_path / "m.json"),
        "seed": 11,
        "workers": 3,
        "out": str(tmp_path / "runs"),
    })
    assert run_config.backend.kind == "mock"
    assert run_config.backend.base_url == "http://other/v1"
    assert run_config.segmentation.seed == 11
    assert run_config.workers == 3
    assert Path(run_config.output_dir) == (tmp_path / "runs").resolve()


def test_none_overrides_are_ignored(tmp_path):
    path = write_config(tmp_path, {"corpus": {"source": "src.txt"}, "workers": 2})
    assert load_run_config(path, {"workers": None, "seed": None}).workers == 2


@pytest.mark.parametrize("data, field", [
    ({"corpus": {"source": "s"}, "edges": {"tau": 1.5}}, "edges.tau"),
    ({"corpus": {"source": "s"}, "decoding": {"temperature": 2}}, "decoding.temperature"),
    ({"corpus": {"source": "s"}, "segmentation": {"kind": "magic"}}, "segmentation.kind"),
    ({"corpus": {"source": "s"}, "unknown": 1}, "unknown"),
    ({"corpus": {"source": "s"}, "backend": {"kind": "mock"}}, "backend"),
    ({"corpus": {"source": "s"}, "memory": "XM"}, "memory"),
    ({}, "corpus"),
])
def test_invalid_settings_name_the_field(tmp_path, data, field):
    with pytest.raises(ConfigError) as excinfo:
        load_run_config(write_config(tmp_path, data))
    assert field in str(excinfo.value)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(bad)


def test_memory_presets():
    full = RunConfig.model_validate({"corpus": {"source": "s"}, "memory": "FM"})
    none = RunConfig.model_validate({"corpus": {"source": "s"}, "memory": "NM"})
    assert full.memory_components() == ("noun_pronoun", "entities", "phrases", "connectives", "summary")
    assert none.memory_components() == ()


@pytest.mark.parametrize("ablation, segments, edge_kind, has_memory", [
    ("full", True, "tfidf", True),
    ("ta_only", False, None, False),
    ("TA + DA", True, "chain", False),
    ("ta_da_ma", True, "chain", True),
])
def test_ablation_profiles(ablation, segments, edge_kind, has_memory):
    run_config = RunConfig.model_validate({
        "corpus": {"source": "s"},
        "edges": {"kind": "tfidf"},
        "ablation": ablation,
    })
    assert run_config.segments_document() is segments
    assert run_config.effective_edge_kind() == edge_kind
    assert bool(run_config.memory_components()) is has_memory


def test_disabling_one_component():
    run_config = RunConfig.model_validate({"corpus": {"source": "s"}, "memory": {"phrases": False}})
    assert "phrases" not in run_config.memory_components()
    assert len(run_config.memory_components()) == 4
