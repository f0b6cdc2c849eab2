# SPDX-FileCopyrightText: 2024-present lachiewalker <lachiewalker1@hotmail.com>
#
# SPDX-License-Identifier: MIT
import json

import numpy as np
import pytest

from quakebend.__main__ import main

CROSSINGS = """
genus = 2

[[curves]]
word = "a1"
translation = 0.5

[crossings]
words = ["b1", "a2", "a1 b1"]
oracle_radius = 5
"""


def _write(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_crossings_command(tmp_path):
    out = tmp_path / "out"
    assert main(["crossings", "--config", _write(tmp_path, CROSSINGS), "--out", str(out)]) == 0
    report = _report(out)
    assert report["passed"]
    assert report["command"] == "crossings"
    assert {c["name"] for c in report["checks"]} == {"side_separation", "crossing_oracle"}
    assert len(report["config_hash"]) == 64
    assert (out / "report.txt").exists()
    assert "seconds" in json.loads((out / "timings.json").read_text())


def test_reports_are_reproducible(tmp_path):
    config = _write(tmp_path, CROSSINGS)
    out = tmp_path / "out"
    main(["crossings", "--config", config, "--out", str(out)])
    first = (out / "report.json").read_bytes()
    main(["crossings", "--config", config, "--out", str(out)])
    assert (out / "report.json").read_bytes() == first


def test_deform_at_time_zero(tmp_path):
    out = tmp_path / "out"
    config = _write(tmp_path, CROSSINGS + "\n[deform]\nt = 0.0\n")
    assert main(["deform", "--config", config, "--out", str(out)]) == 0
    result = _report(out)["result"]
    assert np.allclose(result["output"], result["input"])


def test_deform_twist(tmp_path):
    out = tmp_path / "out"
    assert main(["deform", "--config", _write(tmp_path, CROSSINGS), "--out", str(out)]) == 0
    report = _report(out)
    assert report["checks"][0]["name"] == "homomorphism"
    assert report["checks"][0]["residual"] < 1e-8
    assert set(report["result"]["crossings"]) == {"a1", "b1", "a2", "b2"}


def test_limitset_command(tmp_path):
    out = tmp_path / "out"
    config = _write(tmp_path, "genus = 2\n[representation]\ndimension = 3\n[limitset]\ndepth = 2\n")
    assert main(["limitset", "--config", config, "--out", str(out)]) == 0
    lines = (out / "limitset.csv").read_text().splitlines()
    assert lines[0].startswith("# config-sha256: ")
    assert lines[1] == "x1,x2,x3"
    assert (out / "limitset.svg").exists()


def test_bad_config_exit_code(tmp_path):
    out = tmp_path / "out"
    config = _write(tmp_path, CROSSINGS + "curve_color = 'red'\n")
    assert main(["crossings", "--config", config, "--out", str(out)]) == 2


def test_precondition_exit_code(tmp_path):
    out = tmp_path / "out"
    config = _write(tmp_path, "genus = 2\n[[curves]]\nword = 'a1'\n[[curves]]\nword = 'b1'\n")
    assert main(["deform", "--config", config, "--out", str(out)]) == 2
    witness = json.loads((out / "witness.json").read_text())
    assert witness["error"] == "PreconditionError"


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["nonsense"])
