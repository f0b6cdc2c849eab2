# SPDX-FileCopyrightText: 2024-present lachiewalker <lachiewalker1@hotmail.com>
#
# SPDX-License-Identifier: MIT
import pytest

from quakebend.config import RunConfig, apply_overrides, config_hash, load_config, parse_config
from quakebend.errors import ConfigError

MINIMAL = """
genus = 2

[[curves]]
word = "a1"
translation = 0.5
"""


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert cfg.genus == 2
    assert cfg.curves[0].word == "a1"
    assert cfg.curves[0].weight == 1.0
    assert cfg.representation.source == "reference"
    assert cfg.earthquake.kind == "recipe"


def test_defaults_are_valid():
    assert RunConfig().genus == 2


@pytest.mark.parametrize(
    "text, fragment",
    [
        (MINIMAL + "weight = -1.0\n", "curves.0.weight"),
        (MINIMAL + "curve_color = 'red'\n", "curve_color"),
        ("genus = 1\n", "genus"),
        ("genus = 2\n[[curves]]\nword = 'a3'\n", "a3"),
        ("genus = 2\n[representation]\ndimension = 2\n[[curves]]\nword = 'a1'\nangle = 0.2\n", "bending angle"),
        ("genus = 2\n[representation]\nsource = 'explicit'\n", "matrices"),
        ("[earthquake]\nkind = 'explicit'\n", "earthquake.sequence"),
        ("genus = 2\n[[curves]]\nword = 'a1 A1'\n", "empty word"),
        ("[earthquake]\nseed_curve = 'b1 B1'\n", "empty word"),
        ("[earthquake]\ntwisting_curve = 'a2 b2 B2 A2'\n", "empty word"),
    ],
)
def test_invalid_config(text, fragment):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text, "test.toml")
    assert fragment in str(excinfo.value)
    assert excinfo.value.exit_code == 2


def test_toml_syntax_error():
    with pytest.raises(ConfigError, match="Failed to parse"):
        parse_config("genus = \n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")


def test_load_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(MINIMAL)
    assert load_config(path) == parse_config(MINIMAL)


def test_overrides():
    cfg = apply_overrides(parse_config(MINIMAL), seed=9, out="/tmp/run", tol=1e-4)
    assert cfg.seed == 9
    assert cfg.output.dir == "/tmp/run"
    assert cfg.earthquake.tol == 1e-4
    assert apply_overrides(cfg) == cfg


def test_config_hash():
    first, second = parse_config(MINIMAL), parse_config(MINIMAL)
    assert config_hash(first) == config_hash(second)
    assert len(config_hash(first)) == 64
    assert config_hash(apply_overrides(first, seed=1)) != config_hash(first)
