import io
import json
from pathlib import Path

import pytest

from eqindex.cli import ConfigError, config_from_dict, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_run_shift_text():
    code, text = run("run", "--config", str(CONFIGS / "shift.toml"))
    assert code == 0
    assert "index: 2" in text


def test_run_shift_machine():
    code, text = run("run", "--model", "shift", "--resolution", "20", "--format", "machine")
    doc = json.loads(text)
    assert code == 0
    assert doc["schema_version"] == "eqindex.report/1"
    assert doc["index"] == {"kind": "integer", "value": 2}
    assert doc["labels"][0]["m_plus"] == 2 and doc["labels"][0]["m_minus"] == 0


def test_machine_output_is_reproducible():
    args = ("suite", "stability", "--config", str(CONFIGS / "stability.toml"), "--format", "machine")
    first, second = run(*args), run(*args)
    assert first[0] == 0 and first == second
    assert json.loads(first[1])["reports"][0]["seed"] == 7


@pytest.mark.parametrize(
    "name, expected",
    [
        ("shift_z2.toml", [[0, 1], [1, 1]]),
        ("toeplitz.toml", 2),
        ("circle.toml", 0),
    ],
)
def test_bundled_configs(name, expected):
    code, text = run("run", "--config", str(CONFIGS / name), "--format", "machine")
    doc = json.loads(text)
    assert code == 0
    index = doc["index"]
    assert (index["value"] if index["kind"] == "integer" else index["entries"]) == expected


def test_plane_window():
    code, text = run("run", "--config", str(CONFIGS / "plane.toml"), "--resolution", "100", "--format", "machine")
    doc = json.loads(text)
    assert code == 0
    assert doc["index"]["kind"] == "windowed_character"
    assert [row["m_minus"] for row in doc["labels"]] == [1] * 9


def test_product_config():
    code, text = run("run", "--config", str(CONFIGS / "product.toml"))
    assert code == 0 and "INDETERMINATE" not in text


def test_malformed_config(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[model\nkind = 'shift'\n")
    assert run("run", "--config", str(bad))[0] == 1


def test_missing_config(tmp_path):
    assert run("run", "--config", str(tmp_path / "absent.toml"))[0] == 1


def test_unknown_model_and_suite():
    assert run("run", "--model", "nope")[0] == 1
    assert run("suite", "nope", "--model", "shift")[0] == 1
    assert run("run")[0] == 1


def test_bad_flags():
    assert run("run", "--model", "shift", "--tol", "2")[0] == 1
    assert run("run", "--model", "shift", "--window", "3,1")[0] == 1
    assert run("bogus")[0] == 1


def test_indeterminate_exit_code(tmp_path):
    # the smallest kept and largest dropped singular values of the circle model sit
    # far closer than this gap demands
    cfg = tmp_path / "tight.toml"
    cfg.write_text('[model]\nkind = "circle"\nk_max = 8\n[policy]\nmin_gap = 1e30\n')
    code, text = run("run", "--config", str(cfg))
    assert code == 2
    assert "INDETERMINATE" in text


def test_convergence_suite_without_plateau(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[model]\nkind = "circle"\n[policy]\nmin_gap = 1e30\n[run]\nresolutions = [8, 16, 32]\n')
    assert run("suite", "convergence", "--config", str(cfg))[0] == 2


def test_symbols_suite():
    code, text = run("suite", "symbols")
    assert code == 0 and "result: PASS" in text


def test_homotopy_suite_machine():
    code, text = run("suite", "homotopy", "--format", "machine")
    doc = json.loads(text)
    assert code == 0 and doc["schema_version"] == "eqindex.suite/1" and len(doc["reports"]) == 3


def test_dump_shift():
    code, text = run("dump", "--model", "shift", "--resolution", "4")
    lines = text.splitlines()
    assert code == 0
    assert lines[1] == "shape: 2 x 4"
    assert lines[-2:] == ["0 0 1 0", "0 0 0 1"]


def test_dump_machine_roundtrip():
    code, text = run("dump", "--model", "circle", "--resolution", "4", "--format", "machine")
    doc = json.loads(text)
    assert code == 0 and doc["schema_version"] == "eqindex.dump/1"
    assert doc["spec"]["kind"] == "circle"


def test_config_validation():
    with pytest.raises(ConfigError):
        config_from_dict({"extra": {}})
    with pytest.raises(ConfigError):
        config_from_dict({"policy": {"speed": 1}})
    with pytest.raises(ConfigError):
        config_from_dict({"run": {"resolutions": [1, 2]}})
    with pytest.raises(ConfigError):
        config_from_dict({"run": {"format": "xml"}})
    cfg = config_from_dict({"model": {"kind": "shift", "n": 10}, "run": {"window": "-2,3", "seed": 4}})
    assert cfg.window == (-2, 3) and cfg.seed == 4
