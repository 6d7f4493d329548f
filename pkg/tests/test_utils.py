import importlib
import logging
import sys
import threading
from pathlib import Path

import numpy as np
import pytest

# Ensure the project root is on the import path so ``scripts`` can be imported
root_path = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(root_path))
sys.path.insert(0, str(root_path / "scripts"))

from scripts.utils.io_helpers import read_json, read_utf8, write_json, write_utf8
from scripts.utils.logging_helper import get_logger, set_level
from scripts.utils.parallel import chunk_bounds, chunk_map


@pytest.fixture()
def paths(tmp_path, monkeypatch):
    monkeypatch.setenv("PIFMHD_ROOT", str(tmp_path))
    module = importlib.reload(importlib.import_module("scripts.utils.paths"))
    yield module
    monkeypatch.delenv("PIFMHD_ROOT")
    importlib.reload(module)


# ── paths ────────────────────────────────────────────────────────────────
def test_root_comes_from_environment(paths, tmp_path):
    assert paths.ROOT == tmp_path.resolve()
    assert paths.LOG_DIR.is_dir()
    assert paths.RUNS_DIR == tmp_path.resolve() / "config" / "runs"


def test_run_label_and_default_dir(paths):
    assert paths.run_label("alfven2d", (32, 64)) == "alfven2d_32x64"
    assert paths.run_label("a b/c", (8, 8, 8)) == "a_b_c_8x8x8"
    assert paths.default_run_dir("rotor", (200, 200)) == paths.OUTPUT_DIR / "rotor_200x200"


# ── io helpers ───────────────────────────────────────────────────────────
def test_read_utf8_strips_bom(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_bytes(b"\xef\xbb\xbfproblem = rotor\n")
    assert read_utf8(path) == "problem = rotor\n"


def test_read_utf8_is_strict(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_bytes(b"mesh = \xff\xfe\n")
    with pytest.raises(UnicodeDecodeError):
        read_utf8(path)


def test_write_utf8_creates_parents(tmp_path):
    path = tmp_path / "a" / "b" / "notes.txt"
    write_utf8(path, "ρ > 0\n")
    assert path.read_text(encoding="utf-8") == "ρ > 0\n"


def test_json_helpers(tmp_path):
    payload = {"problem": "blast2d", "mesh": [128, 128], "min_p": 1.5e-3}
    path = tmp_path / "out" / "summary.json"
    write_json(path, payload)
    assert read_json(path) == payload
    assert path.read_text(encoding="utf-8").endswith("\n")


# ── parallel sweeps ──────────────────────────────────────────────────────
def test_chunk_bounds_cover_range():
    assert chunk_bounds(10, 4) == [(0, 4), (4, 8), (8, 10)]
    assert chunk_bounds(0, 4) == []
    with pytest.raises(ValueError):
        chunk_bounds(10, 0)


@pytest.mark.parametrize("threads", [1, 2, 5])
def test_chunk_map_is_independent_of_thread_count(threads):
    data = np.random.default_rng(0).normal(size=1000)
    out = np.zeros_like(data)

    def work(lo, hi):
        out[lo:hi] = np.cumsum(data[lo:hi])

    chunk_map(work, data.size, threads=threads, chunk=64)
    expected = np.concatenate([np.cumsum(data[lo:hi]) for lo, hi in chunk_bounds(1000, 64)])
    assert np.array_equal(out, expected)


def test_chunk_map_serial_runs_in_caller():
    seen = set()
    lock = threading.Lock()

    def work(lo, hi):
        with lock:
            seen.add(threading.get_ident())

    chunk_map(work, 100, threads=1, chunk=10)
    assert seen == {threading.get_ident()}


def test_chunk_map_propagates_worker_errors():
    def work(lo, hi):
        if lo >= 20:
            raise RuntimeError("bad chunk")

    with pytest.raises(RuntimeError, match="bad chunk"):
        chunk_map(work, 40, threads=3, chunk=10)


# ── logging ──────────────────────────────────────────────────────────────
def test_logger_named_after_module(tmp_path):
    log = get_logger(log_dir=tmp_path)
    assert log.name == "pifmhd.test_utils"
    assert not log.propagate
    assert get_logger(log_dir=tmp_path) is log
    set_level(logging.DEBUG)
    assert log.level == logging.DEBUG
    set_level(logging.INFO)
    assert log.level == logging.INFO
