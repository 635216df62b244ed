import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shearloc import io
from shearloc.config import RunConfig, Tolerances
from shearloc.errors import MissingArtifact, RangeError

BASE = {"alpha": 1.572, "m": 0.02246, "n": 0.025, "lambda_frac": 0.5}


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=6, max_size=6))
def test_csv_float_round_trip(tmp_path_factory, row):
    path = tmp_path_factory.mktemp("csv") / "p.csv"
    io.write_csv(path, io.SCHEMAS["profiles"], np.array([row]))
    _, data = io.read_csv(path, "profiles")
    assert list(data[0]) == row


def test_csv_schema_checks(tmp_path):
    path = io.write_csv(tmp_path / "o.csv", ("a", "b"), np.ones((2, 2)))
    with pytest.raises(io.SchemaError):
        io.read_csv(path, "orbit")
    with pytest.raises(MissingArtifact):
        io.read_csv(tmp_path / "missing.csv")
    bad = io.write_csv(tmp_path / "b.csv", io.SCHEMAS["orbit"], np.array([[0, 1, 2, 3, np.inf]]))
    with pytest.raises(io.SchemaError):
        io.validate_csv(bad, "orbit")


def test_json_cleaning(tmp_path):
    obj = {"b": np.float64(1.5), "a": [np.int64(2), np.bool_(True)], "c": float("nan"),
           "d": np.arange(3)}
    path = io.write_json(tmp_path / "r.json", obj)
    back = json.loads(path.read_text())
    assert back == {"a": [2, True], "b": 1.5, "c": None, "d": [0, 1, 2]}
    assert list(back) == sorted(back)


def test_jsonl(tmp_path):
    p = tmp_path / "b.jsonl"
    io.append_jsonl(p, {"c": 0.1, "residual": 1e-12, "iterations": 3})
    io.append_jsonl(p, {"c": 0.2, "residual": 1e-12, "iterations": 2})
    assert io.validate_jsonl(p) == 2
    io.append_jsonl(p, {"c": 0.3})
    with pytest.raises(io.SchemaError):
        io.validate_jsonl(p)


def test_fmt_is_exact():
    x = 0.1 + 0.2
    assert float(io.fmt(x)) == x


def test_config_rate_sources():
    cfg = RunConfig.from_dict(BASE)
    P = cfg.params()
    assert P.lam == pytest.approx(0.5 * P.lambda_max)
    G0, U0 = cfg.gamma_u()
    assert G0 == 1.0
    cfg2 = RunConfig.from_dict({"alpha": 1.572, "m": 0.02246, "n": 0.025, "U0": U0 * 3, "Gamma0": 3.0})
    assert cfg2.resolved_lambda() == pytest.approx(P.lam, rel=1e-12)
    with pytest.raises(RangeError):
        RunConfig.from_dict({"alpha": 1.572, "m": 0.02246, "n": 0.025})
    with pytest.raises(RangeError):
        RunConfig.from_dict({**BASE, "lambda": 1.0})


@pytest.mark.parametrize("bad", [{"foo": 1}, {"eta_max": -1.0}, {"times": [-1.0]},
                                 {"tolerances": {"newton_tol": 0.0}}])
def test_config_rejects(bad):
    with pytest.raises(RangeError):
        RunConfig.from_dict({**BASE, **bad})


def test_config_load(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({**BASE, "schedule": {"mesh_intervals": 150}}))
    cfg = RunConfig.load(p)
    assert cfg.schedule.mesh_intervals == 150
    assert RunConfig.load(json.dumps(BASE)).alpha == 1.572
    with pytest.raises(RangeError):
        RunConfig.load(tmp_path / "nope.json")
    with pytest.raises(RangeError):
        RunConfig.load("{not json")
    d = cfg.to_dict()
    assert d["lambda"] is None and d["lambda_frac"] == 0.5 and "tolerances" in d


def test_seed_k():
    assert RunConfig.from_dict(BASE).seed_k() == 40
    assert RunConfig.from_dict({**BASE, "n": 0.03}).seed_k() is None
    with pytest.raises(RangeError):
        RunConfig.from_dict({**BASE, "k": 41}).seed_k()


def test_tolerances_positive():
    with pytest.raises(RangeError):
        Tolerances(bc_tol=-1.0)
    assert math.isclose(Tolerances().ode_tol, 1e-12)
