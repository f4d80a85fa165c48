import json

import pytest

from threearm import config as cfgmod
from threearm.analysis import ArmSummary
from threearm.design import FilterKind, StrategyKind
from threearm.errors import ConfigError, InputError
from threearm.ingest import read_summaries, write_summaries

DESIGN = {"sigma": 0.5, "alpha": 0.025, "rho": 0.5, "delta_N": 0.1}


def test_design_and_unknown_keys():
    p = cfgmod.design({"design": DESIGN})
    assert p.delta == pytest.approx(0.1)
    with pytest.raises(ConfigError, match="design: delta_n"):
        cfgmod.design({"design": {**DESIGN, "delta_n": 0.1}})
    with pytest.raises(ConfigError, match="design.sigma"):
        cfgmod.design({"design": {k: v for k, v in DESIGN.items() if k != "sigma"}})
    with pytest.raises(ConfigError, match="design"):
        cfgmod.design({"design": {**DESIGN, "alpha": 0.7}})
    with pytest.raises(ConfigError, match="must be a number"):
        cfgmod.design({"design": {**DESIGN, "sigma": "0.5"}})


@pytest.mark.parametrize(
    "raw, kind",
    [(1, FilterKind.SUPERIORITY), ("filter2", FilterKind.DELTA_SUPERIORITY), ("full_historical", FilterKind.FULL_HISTORICAL),
     ({"custom": 0.05}, FilterKind.CUSTOM)],
)
def test_filter_forms(raw, kind):
    assert cfgmod.filter_rule({"filter": raw}).kind is kind


@pytest.mark.parametrize("raw", [0, 7, "filterX", True, {"tau": 1}, [1]])
def test_filter_rejects(raw):
    with pytest.raises(ConfigError):
        cfgmod.filter_rule({"filter": raw})


def test_strategy_and_sizes():
    assert cfgmod.strategy({}) is StrategyKind.FORMAL
    assert cfgmod.strategy({"strategy": "Intuitive"}) is StrategyKind.INTUITIVE
    with pytest.raises(ConfigError):
        cfgmod.strategy({"strategy": "bayes"})
    assert cfgmod.sizes_list({"sizes": {"n_E": 5, "n_R": 6, "n_P": 7}})[0].as_tuple() == (5, 6, 7)
    assert len(cfgmod.sizes_list({"sizes_list": [[5, 6, 7], [8, 9, 10]]})) == 2
    for bad in ({"sizes": [5, 6]}, {"sizes": [5, 6, 7.5]}, {"sizes": [1, 6, 7]}, {"sizes_list": []}, {},
                {"sizes": [5, 6, 7], "sizes_list": [[5, 6, 7]]}):
        with pytest.raises(ConfigError):
            cfgmod.sizes_list(bad)


def test_scenarios():
    p = cfgmod.design({"design": DESIGN})
    got = cfgmod.scenarios({"effect_E": 0.2, "scenarios": [{"name": "a", "v": 0.5}, {"mu_E": 1, "mu_R": 2, "mu_P": 3}]}, p)
    assert got[0][0] == "a" and got[0][1].mu_R == pytest.approx(0.1)
    assert got[1][0] == "scenario2" and got[1][1].mu_P == 3
    for bad in ({"scenarios": []}, {"scenarios": [{"v": 1}]}, {"effect_E": 0.2, "scenarios": [{"v": 1, "mu_E": 0}]},
                {"scenarios": [{"mu_E": 1}]}, {"scenarios": [{"v": 1, "effect_E": 0.2, "extra": 1}]}):
        with pytest.raises(ConfigError):
            cfgmod.scenarios(bad, p)


def test_prior_and_grid():
    assert cfgmod.prior({"prior": {"three_point": 0.8}}).atoms[0] == (1.0, 0.8)
    assert cfgmod.prior({"prior": {"atoms": [[1, 0.5], [0.25, 0.5]]}}).atoms[1] == (0.25, 0.5)
    for bad in ({"prior": {}}, {"prior": {"point": 1, "three_point": 1}}, {"prior": {"atoms": [[1]]}}, {"prior": {"atoms": [[1, 0.4]]}}):
        with pytest.raises(ConfigError):
            cfgmod.prior(bad)
    grid = cfgmod.p_grid({"p_grid": {"start": 0.5, "stop": 1.0, "step": 0.05}})
    assert len(grid) == 11 and grid[5] == 0.75 and grid[-1] == 1.0
    with pytest.raises(ConfigError):
        cfgmod.p_grid({"p_grid": {"start": 1, "stop": 0, "step": 0.1}})


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        cfgmod.load(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(ConfigError, match="invalid JSON"):
        cfgmod.load(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="object"):
        cfgmod.load(bad)


def test_summary_roundtrip(tmp_path):
    data = [ArmSummary("E", 147, 10.2, 6.1), ArmSummary("R", 148, 9.4, 6.9), ArmSummary("P", 145, 1 / 3, 5.8)]
    path = tmp_path / "s.csv"
    write_summaries(path, data)
    assert read_summaries(path) == data


def test_patient_rows_reduced(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("arm,value\nE,1\nE,3\nR,2\nR,2\nR,5\nP,0\nP,1\n")
    s = {x.label: x for x in read_summaries(path)}
    assert s["E"].n == 2 and s["E"].mean == 2.0 and s["E"].sd == pytest.approx(2 ** 0.5)
    assert s["R"].mean == 3.0 and s["R"].sd == pytest.approx(3 ** 0.5)


@pytest.mark.parametrize(
    "text, where",
    [
        ("arm,n,mean,sd\nE,10,1,1\nR,10,1,1\n", "missing arm"),
        ("arm,n,mean\nE,10,1\n", "missing column"),
        ("arm,n,mean,sd\nE,10,1,1\nR,ten,1,1\nP,10,1,1\n", "line 3, column 'n'"),
        ("arm,n,mean,sd\nE,10,1,1\nQ,10,1,1\nP,10,1,1\n", "line 3, column 'arm'"),
        ("arm,n,mean,sd\nE,10,1,1\nR,10,x,1\nP,10,1,1\n", "line 3, column 'mean'"),
        ("arm,n,mean,sd\nE,10,1,1\nR,10,1,-1\nP,10,1,1\n", "line 3"),
        ("arm,value\nE,1\nE,2\nR,1\nP,1\nP,2\n", "fewer than two"),
    ],
)
def test_ingest_errors(tmp_path, text, where):
    path = tmp_path / "d.csv"
    path.write_text(text)
    with pytest.raises(InputError, match=where):
        read_summaries(path)


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="not found"):
        read_summaries(tmp_path / "none.csv")
