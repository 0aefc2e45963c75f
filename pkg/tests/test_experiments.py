"""Tests for the experiment presets and their parameter validation."""

import pytest

from shrinktargets.errors import ConfigInvalid
from shrinktargets.experiments import TAGS, run_experiment, validate


def test_validate_rejects_unknown_tag():
    with pytest.raises(ConfigInvalid):
        validate("theorem-x", {})


def test_validate_rejects_bad_exponents():
    with pytest.raises(ConfigInvalid):
        validate("A", {"a": "3/2"})
    with pytest.raises(ConfigInvalid):
        validate("B", {"a": "3/5"})
    with pytest.raises(ConfigInvalid):
        validate("C", {"a": "1/10"})   # needs a < 1/14
    with pytest.raises(ConfigInvalid):
        validate("C", {"c": "1"})      # needs sampler exponent > 1
    with pytest.raises(ConfigInvalid):
        validate("D", {"a": "1/5", "b": "1/4"})   # b + 2a >= 1/2
    with pytest.raises(ConfigInvalid):
        validate("lln", {"seeds": 0})
    with pytest.raises(ConfigInvalid):
        validate("lln", {"seeds": []})


def test_validate_accepts_defaults():
    for tag in TAGS:
        validate(tag, {})


def test_run_lln_smoke():
    res = run_experiment("lln", {"N": 4000, "seeds": 2, "tol": 0.5})
    assert len(res["trials"]) == 2
    assert res["assertions"][0]["passed"]
    assert res["csv"]["traces"]


def test_run_thmA_smoke():
    res = run_experiment("A", {"N": 4000, "seeds": 2, "tol": 0.5,
                               "a_list": ["3/10"]})
    assert res["assertions"][0]["passed"]


def test_run_thmB_smoke():
    res = run_experiment("B", {"N": 4000, "seeds": 2, "tol": 0.5})
    assert res["assertions"][0]["passed"]


def test_run_thmC_smoke():
    res = run_experiment("C", {"N": 200, "seeds": 1, "tol": 1.0})
    assert res["assertions"][0]["passed"]


def test_run_thmD_smoke():
    res = run_experiment("D", {"N": 4000, "seeds": 1, "x_panel": 8,
                               "frac": 0.0})
    assert res["assertions"][0]["name"] == "two_power_cauchy_proxy"
    assert res["trials"][0]["proxy"]


def test_run_prop1_small():
    # N must be large enough that the 2 ln N gap exceeds the dyadic
    # resolution of every index; 48 is the smallest power-friendly choice
    res = run_experiment("lemma-prop1", {"N": 48})
    assert res["assertions"][0]["passed"]
    assert res["trials"][0]["failures"] == 0


def test_run_prop2_smoke():
    res = run_experiment("lemma-prop2", {"N": 1 << 12, "seeds": 3})
    names = [a["name"] for a in res["assertions"]]
    assert "f_partial_sums_monotone" in names
    assert all(a["passed"] for a in res["assertions"][:2])


def test_run_concentration_smoke():
    res = run_experiment("concentration",
                         {"N_grid": [256, 512], "trials": 10,
                          "m_list": [1], "seeds": 1})
    assert len(res["reports"]) == 4
    assert all(rep.q99 <= rep.max for rep in res["reports"])


def test_run_vdc_smoke():
    res = run_experiment("vdc", {"count": 200, "seeds": 1})
    assert res["assertions"][0]["passed"]


def test_run_cov_decay_smoke():
    res = run_experiment("cov-decay", {"pairs": 5, "seeds": 1})
    assert all(a["passed"] for a in res["assertions"])


def test_run_interaction_smoke():
    res = run_experiment("interaction",
                         {"N_grid": [1 << 10, 1 << 11, 1 << 12],
                          "seeds": 2, "band": 1.0,
                          "a": "1/20", "b": "3/50"})
    assert res["assertions"][0]["passed"]


def test_workers_match_serial():
    params = {"N": 2000, "seeds": 3, "tol": 0.5}
    r1 = run_experiment("lln", params, workers=1)
    r2 = run_experiment("lln", params, workers=2)
    assert [t["final_dev"] for t in r1["trials"]] == \
           [t["final_dev"] for t in r2["trials"]]
