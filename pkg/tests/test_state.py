import json
import threading
from pathlib import Path

import numpy as np
import pytest

from vicollage import state


@pytest.fixture(autouse=True)
def reset_state():
    state.reset()
    yield
    state.reset()


@pytest.fixture(autouse=True)
def temp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _counting_builder(calls):
    def build(m, norm):
        calls.append((m, norm))
        return np.eye(m), 2.0 * np.eye(m)

    return build


def test_cached_operators_build_once_per_key():
    calls = []
    first = state.cached_operators(5, "flat", _counting_builder(calls))
    second = state.cached_operators(5, "flat", _counting_builder(calls))
    assert first is second
    assert calls == [(5, "flat")]
    state.cached_operators(5, "l2", _counting_builder(calls))
    assert calls == [(5, "flat"), (5, "l2")]


def test_smaller_dimensions_are_sliced_from_cache():
    calls = []
    state.cached_operators(9, "flat", _counting_builder(calls))
    stiff, mass = state.cached_operators(4, "flat", _counting_builder(calls))
    assert calls == [(9, "flat")]
    np.testing.assert_array_equal(mass, 2.0 * np.eye(4))
    assert not stiff.flags.writeable


def test_concurrent_fills_agree():
    calls = []
    results = []
    barrier = threading.Barrier(4)

    def worker():
        barrier.wait()
        results.append(state.cached_operators(6, "flat", _counting_builder(calls)))

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len({id(r) for r in results}) == 1
    assert list(state.OPERATORS) == [(6, "flat")]


def test_reset_keeps_the_registry_object():
    registry = state.OPERATORS
    state.cached_operators(3, "flat", _counting_builder([]))
    state.reset()
    assert state.OPERATORS is registry
    assert not registry


def test_write_manifest_creates_snapshot():
    state.cached_operators(3, "flat", _counting_builder([]))
    state.write_manifest("runs/last.json", "direct", "m = 3\n\nn = 31\n", 5)
    payload = json.loads(Path("runs/last.json").read_text())
    assert "updated_at" in payload
    assert payload["command"] == "direct"
    assert payload["config"] == ["m = 3", "n = 31"]
    assert payload["rows"] == 5
    assert payload["cached_operators"] == ["3:flat"]


def test_write_manifest_overwrites_previous_content():
    path = Path("manifest.json")
    path.write_text("{}")
    state.write_manifest(str(path), "inverse", "", 0)
    payload = json.loads(path.read_text())
    assert payload["command"] == "inverse"
    assert payload["config"] == []
