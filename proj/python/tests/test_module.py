import json
import math

import jsonschema
import pytest

import wolfbench


def test_version():
    assert wolfbench.__version__ == "0.1.0"


def test_tiny_world_report(tiny, schema):
    r = wolfbench.evaluate(tiny, "fixed:1")
    jsonschema.validate(r, schema)
    assert r["frr"] == pytest.approx(0.45, abs=1e-15)
    assert r["far"] == pytest.approx(0.0, abs=1e-15)
    assert r["ar"] == pytest.approx(0.275, abs=1e-15)
    assert r["wap"]["value"] == pytest.approx(0.35, abs=1e-15)
    assert r["wap"]["probe_hex"] == "0"
    assert r["lemma1_max_residual"] <= 1e-12


def test_general_policy_is_delta_secure(tiny):
    for delta in (0.5, 0.25, 0.1, 0.01):
        assert wolfbench.evaluate(tiny, f"general:{delta}")["wap"]["value"] < delta


def test_monte_carlo_report_validates_and_replays(schema):
    pop = wolfbench.generate_population(6, 24, seed=3, p_min=0.05, p_max=0.2)
    r = wolfbench.evaluate(pop, "fixed:5", mode="mc", samples=500, seed=9,
                           budget=60, restarts=3, confirm_samples=2000, baseline_samples=200)
    jsonschema.validate(r, schema)
    assert r["mode"] == "monte-carlo"
    assert r["lemma1_max_residual"] is None
    text = json.dumps(r)
    again = json.loads(wolfbench.replay(text, jobs=2))
    assert again == r


def test_score_world_reports_null_rates(schema):
    pop = wolfbench.generate_population(4, 8, seed=1, family="gaussian")
    r = wolfbench.evaluate(pop, "gaussian:-2")
    jsonschema.validate(r, schema)
    assert r["frr"] is None and r["far"] is None
    assert r["wap"]["value"] == pytest.approx(wolfbench.std_normal_cdf(-2.0), abs=1e-10)


def test_wolf_certificate(tiny):
    c = wolfbench.wolf(tiny, "fixed:1")
    assert c["probe_hex"] == "0"
    assert c["is_wolf"] == (c["ar_w"] > c["ar_baseline"])


def test_sweep_csv(tiny):
    rows = wolfbench.sweep(tiny, "fixed", [2, 0, 1]).strip().splitlines()
    assert rows[0] == "parameter,frr,far,ar,wap,stderr_wap"
    params = [float(r.split(",")[0]) for r in rows[1:]]
    assert params == sorted(params)


def test_kernels():
    assert wolfbench.std_normal_cdf(-2.0) == pytest.approx(0.022750131948179207, abs=1e-15)
    zero = 1.0 / math.sqrt(2 * math.pi * math.e)
    assert abs(wolfbench.entropy_gaussian(zero)) <= 1e-14
    assert wolfbench.daugman_threshold(4, -0.4) == pytest.approx(0.3)
    assert wolfbench.general_adaptive_threshold([0, 1, 2], [0.35, 0.35, 0.3], 0.5) == 1.0
    support, mass = wolfbench.p_s_exact(json.dumps(_tiny()), "0")
    assert support == [0.0, 1.0, 2.0]
    assert mass == pytest.approx([0.35, 0.35, 0.30], abs=1e-15)


def _tiny():
    from conftest import TINY
    return TINY


def test_errors_map_to_exception_classes(tiny):
    with pytest.raises(wolfbench.ConfigError):
        wolfbench.parse_policy("median:1")
    with pytest.raises(wolfbench.ConfigError):
        wolfbench.generate_population(2, 2, p_min=0.9)
    with pytest.raises(wolfbench.ModeError):
        wolfbench.evaluate(wolfbench.generate_population(2, 22), "fixed:3")
    with pytest.raises(wolfbench.CalibrationError):
        wolfbench.evaluate(wolfbench.generate_population(2, 6, family="gaussian"), "general:0.1")
    assert issubclass(wolfbench.ModeError, wolfbench.WolfbenchError)
