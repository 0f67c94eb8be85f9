import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_lab import cli
from collapse_lab.io import ConfigError, csv_text, format_float, read_config, to_json


@given(st.floats(allow_nan=False))
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


def test_csv_is_lf_and_full_precision():
    t = csv_text({"a": [1 / 3, 2.0], "b": [math.pi, -1e-300]})
    assert "\r" not in t and t.endswith("\n")
    assert t.splitlines()[1] == "0.33333333333333331,3.1415926535897931"
    with pytest.raises(ValueError):
        csv_text({"a": [1.0], "b": [1.0, 2.0]})


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.floats(allow_nan=False) | st.text(max_size=5),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=4), inner, max_size=4),
    max_leaves=12)


@given(json_values)
def test_json_is_a_fixed_point(obj):
    t = to_json(obj)
    assert to_json(json.loads(t)) == t


def test_json_handles_numpy():
    t = to_json({"b": np.float64(0.1), "a": np.arange(2), "c": np.bool_(True)})
    assert json.loads(t) == {"a": [0, 1], "b": 0.1, "c": True}
    assert t.index('"a"') < t.index('"b"')


def test_read_config(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# comment\ny-min = 1e-3  # trailing\n\norder=12\norder = 20\n")
    assert read_config(p) == {"y_min": "1e-3", "order": "20"}
    p.write_text("nonsense\n")
    with pytest.raises(ConfigError):
        read_config(p)


def test_flags_beat_config_file():
    cfg = cli.resolve_config(cli.LE_KEYS, {"delta": "0.5", "n_grid": "21"}, {"delta": "0"}, "lane-emden")
    assert cfg["delta"] == 0.0 and cfg["n_grid"] == 21 and cfg["vacuum_tol"] == 1e-10


def test_unknown_key_is_a_config_error():
    with pytest.raises(ConfigError, match="bogus"):
        cli.resolve_config(cli.LE_KEYS, {}, {"bogus": "1"}, "lane-emden")


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_lane_emden_run_and_echo(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["lane-emden", "--n-grid", "101", "--out", str(a)]) == 0
    files = _files(a)
    assert set(files) == {"config.txt", "lane_emden.csv", "plot.py", "summary.json"}
    assert files["lane_emden.csv"].splitlines()[0] == b"r,w,w_prime"
    compile(files["plot.py"], "plot.py", "exec")
    summary = json.loads(files["summary.json"])
    assert summary["all_passed"] and summary["solver"] == "lane-emden"
    # the echoed config reproduces the run byte for byte
    assert cli.main(["lane-emden", "--config", str(a / "config.txt"), "--out", str(b)]) == 0
    assert _files(b) == files


def test_diagnostic_failure_still_writes_summary(tmp_path):
    # confinement gives two sign changes, which the single-crossing diagnostic rejects
    assert cli.main(["lane-emden", "--delta", "1", "--out", str(tmp_path)]) == 1
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert not summary["all_passed"]
    assert not summary["diagnostics"]["single_sign_change"]["passed"]


@pytest.mark.parametrize("argv", [
    ["lane-emden", "--delta", "abc"],
    ["lane-emden", "--bogus", "1"],
    ["lane-emden", "--delta", "-1"],
    ["yahil", "--gamma", "1.5"],
    ["nosuch"],
])
def test_config_errors_exit_2(tmp_path, capsys, argv):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("collapse-lab: config error:") and "\n" not in err


def test_missing_out_and_missing_config(tmp_path):
    assert cli.main(["lane-emden"]) == 2
    assert cli.main(["lane-emden", "--config", str(tmp_path / "nope"), "--out", str(tmp_path)]) == 2


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("COLLAPSE_LAB_THREADS", "many")
    assert cli.main(["lane-emden", "--out", str(tmp_path)]) == 2
    monkeypatch.setenv("COLLAPSE_LAB_THREADS", "2")
    assert cli.threads_from_env() == 2


def test_bare_switch_and_equals_form():
    assert cli._split_flags(["--homogeneous", "--t-end=3"]) == {"homogeneous": "true", "t_end": "3"}


def test_dust_homogeneous(tmp_path):
    assert cli.main(["dust", "--homogeneous", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["all_passed"]


@pytest.mark.parametrize("argv", [["affine", "--model", "simple"],
                                  ["affine", "--model", "gw", "--delta", "-1", "--lamdot0", "-0.5"],
                                  ["neardust"]])
def test_more_subcommands_pass(tmp_path, argv):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 0
