import json
import math

import pytest

import grlsnam


def test_barrier_value():
    assert grlsnam.ipc_barrier(0.5, 1.0) == pytest.approx(0.25 * math.log(2.0), abs=1e-12)
    assert grlsnam.ipc_barrier(1.5, 1.0) == 0.0
    assert grlsnam.ipc_barrier_grad(2.0, 1.0) == 0.0


def test_spl():
    assert grlsnam.spl(True, 12.0, 10.0) == pytest.approx(10.0 / 12.0)
    assert grlsnam.spl(False, 12.0, 10.0) == 0.0


def test_workspace_json_roundtrip_fields():
    ws = json.loads(grlsnam.generate_workspace_json("test_id", 3))
    assert ws["L"] > 0
    assert len(ws["obstacles"]) > 0
    assert {"c", "r"} <= set(ws["obstacles"][0])


def test_preset_config_is_toml():
    text = grlsnam.preset_config_toml("bottleneck")
    assert "family" in text


def test_run_episode_returns_metrics():
    m = grlsnam.run("bottleneck", 1)
    assert m["method"] == "grlsnam"
    assert m["steps"] > 0
    assert 0.0 <= m["spl"] <= 1.0


def test_errors_surface_as_python_exceptions():
    with pytest.raises(grlsnam.GrlsnamError):
        grlsnam.preset_config_toml("no_such_family")
