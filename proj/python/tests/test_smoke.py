import cmath
import math

import numpy as np
import pytest

import wavestruct as ws


def test_bessel_wronskian():
    z = 2 + 1j
    w = ws.bessel_i(0, z) * ws.bessel_k(1, z) + ws.bessel_i(1, z) * ws.bessel_k(0, z)
    assert abs(w - 1 / z) < 1e-12 * abs(1 / z)


def test_bessel_k_domain():
    with pytest.raises(ValueError):
        ws.bessel_k(0, -1.0)


def test_bdf2_weights_of_s_are_the_difference_operator():
    w = ws.cq_weights("bdf2", 1.0, 20, lambda s: s)
    k = 1.0 / 20
    expected = np.zeros(21)
    expected[:3] = np.array([1.5, -2.0, 0.5]) / k
    assert np.max(np.abs(np.asarray(w) - expected)) < 1e-7 * np.max(np.abs(expected))


def test_tr_convolve_integrates():
    m = 40
    t = np.linspace(0.0, 2.0, m + 1)
    f = np.sin(3 * t)[None, :].astype(complex)
    out = ws.cq_convolve("tr", 2.0, f, lambda s: 1 / s)
    trap = np.concatenate([[0.0], np.cumsum(0.5 * (f[0, 1:] + f[0, :-1]) * (t[1] - t[0]))])
    assert np.max(np.abs(out[0] - trap)) < 1e-7


def test_default_config_layout():
    cfg = ws.default_config("rectangle", "bdf2")
    assert cfg["formulation"] == "coupled"
    assert cfg["scheme"] == "bdf2"
    assert cfg["geometry"]["type"] == "rectangle"


def test_small_disk_study():
    cfg = ws.default_config("disk", "tr")
    cfg["final_time"] = 2.0
    cfg["ladder"] = [{"n": 24, "m": 24}, {"n": 48, "m": 48}]
    out = ws.run_study(cfg)
    rows = out["rows"]
    assert [r["ok"] for r in rows] == [True, True]
    assert math.isnan(rows[0]["ecr_u"])
    assert rows[1]["E_u"] < rows[0]["E_u"]
    assert out["csv"].splitlines()[0].startswith("N,M,E^u,ecr_u,E^v,ecr_v")
    assert out["metadata"]["entries"][1]["N"] == 48


def test_invalid_config_raises():
    cfg = ws.default_config("disk", "tr")
    cfg["final_time"] = -1.0
    with pytest.raises(ValueError):
        ws.run_study(cfg)


def test_selftest_passes():
    checks = ws.selftest()
    assert checks and all(passed for _, passed, _ in checks)
