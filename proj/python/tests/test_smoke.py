import math

import numpy as np
import pytest

import wqst


def test_metrics():
    assert wqst.rmse(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == pytest.approx(math.sqrt(12.5), abs=1e-12)
    assert wqst.r_squared(np.array([1.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0])) == pytest.approx(0.5, abs=1e-12)


def test_geo():
    assert wqst.haversine_km(0, 0, 0, 1) == pytest.approx(111.1951, abs=1e-4)
    assert wqst.classify_distance(8.0) == "Coastal"
    assert wqst.classify_distance(8.1) == "Inland"
    assert wqst.major_of("BSk") == "B"


def test_errors_are_translated():
    with pytest.raises(wqst.WqstError, match="LengthMismatch"):
        wqst.rmse(np.array([1.0]), np.array([1.0, 2.0]))
    with pytest.raises(wqst.WqstError):
        wqst.major_of("Af")


def test_line_fit():
    x = np.arange(10.0).reshape(-1, 1)
    m = wqst.fit("linear", x, 2 * x[:, 0] + 1)
    assert m.kind == "linear"
    np.testing.assert_allclose(m.predict(np.array([[20.0]])), [41.0], atol=1e-9)


@pytest.mark.parametrize("kind", wqst.model_kinds())
def test_every_kind_round_trips(kind, tmp_path):
    X, y, names = wqst.synthetic_design("wt", n_stations=30, samples_per_station=10, seed=3)
    hp = {"n_trees": 10} if kind == "random_forest" else {"n_rounds": 20} if kind == "gradient_boosting" else {}
    m = wqst.fit(kind, X, y, hp, seed=1, column_names=names)
    assert m.column_names == names
    p = m.predict(X)
    assert p.shape == (X.shape[0],)
    path = tmp_path / f"{kind}.model"
    m.save(str(path))
    np.testing.assert_array_equal(wqst.load_model(str(path)).predict(X), p)
    np.testing.assert_array_equal(wqst.model_from_text(m.to_text()).predict(X), p)


def test_synthetic_records_are_seeded():
    a = wqst.synthetic_records(20, 5, seed=9)
    b = wqst.synthetic_records(20, 5, seed=9)
    assert len(a["latitude"]) == 100
    np.testing.assert_array_equal(a["water_temperature"], b["water_temperature"])
    assert set(a["climate_zone"]) <= {"BWh", "BWk", "BSh", "BSk", "Csa", "Csb", "Dsa", "Dsb", "Dsc"}


def test_importance_and_forecast():
    X, y, names = wqst.synthetic_design("ph", n_stations=100, samples_per_station=10, seed=2, fields={"c2": "0.4"})
    m = wqst.fit("gradient_boosting", X, y, {"n_rounds": 50}, seed=2, column_names=names)
    gain = wqst.importance_gain(m)
    assert sum(gain.values()) == pytest.approx(1.0, abs=1e-9)
    assert max(gain, key=gain.get) == "Latitude"
    perm = wqst.importance_permutation(m, X, y, seed=1, repeats=2)
    assert sum(perm.values()) == pytest.approx(1.0, abs=1e-9)
    f = wqst.forecast(m, 37.7749, -122.4194)
    assert f.shape == (1152, 5)
    assert np.all(f[:, 3] <= f[:, 2]) and np.all(f[:, 2] <= f[:, 4])


def test_cli_entry(tmp_path):
    code, out, _ = wqst.run_cli(["--set", f"output_dir={tmp_path}", "synth", "--stations", "5", "--samples", "2"])
    assert code == 0
    assert "10 records" in out
    assert wqst.run_cli(["--set", "bogus=1", "synth"])[0] == 2
