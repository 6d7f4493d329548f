import sys
from pathlib import Path

import pytest

# Ensure the project root is on the import path so ``scripts`` can be imported
root_path = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(root_path))
sys.path.insert(0, str(root_path / "scripts"))

from bin.run_campaign import execute, filter_runs, load_campaign
from scripts.core.driver.config import build_config, normalize_keys
from scripts.core.errors import ConfigError
from scripts.utils.paths import CAMPAIGNS

RUNS = [
    {"name": "blast2d", "problem": "blast2d"},
    {"name": "blast2d_unlimited", "problem": "blast2d", "pp": "off"},
    {"name": "rotor", "problem": "rotor"},
    {"name": "ot", "problem": "orszagtang"},
]


def test_shipped_campaign_validates():
    runs = load_campaign(CAMPAIGNS)
    names = [r["name"] for r in runs]
    assert len(names) == len(set(names))
    for entry in runs:
        values = normalize_keys({k: v for k, v in entry.items() if k != "name"},
                                source=entry["name"])
        assert build_config(overrides=values).problem == entry["problem"]


def test_load_campaign_requires_names(tmp_path):
    path = tmp_path / "campaign.yaml"
    path.write_text("runs:\n  - problem: rotor\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_campaign(path)


def test_load_campaign_empty_file(tmp_path):
    path = tmp_path / "campaign.yaml"
    path.write_text("", encoding="utf-8")
    assert load_campaign(path) == []


@pytest.mark.parametrize("pattern,expected", [
    ("", ["blast2d", "blast2d_unlimited", "rotor", "ot"]),
    ("blast", ["blast2d", "blast2d_unlimited"]),
    ("ROTOR|orszag", ["rotor", "ot"]),
    ("unlimited$", ["blast2d_unlimited"]),
    ("kelvin", []),
])
def test_filter_runs(pattern, expected):
    assert [r["name"] for r in filter_runs(RUNS, pattern)] == expected


def test_execute_completed_run(tmp_path):
    row = execute({"name": "ot_small", "problem": "orszagtang", "mesh": "16x16",
                   "tfinal": 0.01, "out": str(tmp_path / "ot")})
    assert row["status"] == "Completed"
    assert int(row["steps"]) >= 1
    assert (tmp_path / "ot" / "summary.json").exists()


def test_execute_reports_positivity_abort(tmp_path):
    row = execute({"name": "blast_unlimited", "problem": "blast2d", "mesh": "32x32",
                   "pp": "off", "tfinal": 0.002, "out": str(tmp_path / "blast")})
    assert row["status"] == "Aborted (positivity)"
    assert row["steps"] == "-"


def test_execute_reports_bad_entry_as_failed():
    row = execute({"name": "bad", "problem": "rotor", "cfl": 3.0})
    assert row["status"] == "Failed"


def test_execute_rejects_unknown_keys():
    row = execute({"name": "typo", "problem": "rotor", "meshh": "8x8"})
    assert row["status"] == "Failed"
