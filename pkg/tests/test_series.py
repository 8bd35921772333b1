import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chainsim.series import ExperimentReport, TimeSeries, local_maxima, local_minima, prominent_maxima

finite = st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False)


def test_channel_length_mismatch():
    with pytest.raises(ValueError):
        TimeSeries([0, 1, 2], {"a": [1, 2]})


@given(arrays(float, st.integers(1, 30), elements=finite))
def test_csv_round_trip_is_bit_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "x.csv"
    ts = TimeSeries(np.arange(len(values)) * 0.1, {"P": values, "Q": -values})
    ts.to_csv(path)
    back = TimeSeries.from_csv(path)
    assert np.array_equal(back.t, ts.t)
    assert np.array_equal(back["P"], values) and np.array_equal(back["Q"], -values)


def test_csv_header(tmp_path):
    TimeSeries([0.0, 0.5], {"P_xy": [0, 1], "P_dq": [0, -1]}).to_csv(tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "t,P_xy,P_dq"


def test_report_writes_named_files(tmp_path):
    ts = TimeSeries([0.0, 1.0], {"J0": [1.0, 0.5]}, {"experiment": "figure2", "n": 21, "engine": "analytic"})
    report = ExperimentReport("figure2", [ts], {"beat_period": np.float64(5.5), "flags": [np.bool_(True)]}, {"n": 21})
    written = report.write(tmp_path)
    assert [p.name for p in written] == ["figure2_21_analytic.csv", "figure2_21_report.json"]
    data = json.loads(written[1].read_text())
    assert data["summary"] == {"beat_period": 5.5, "flags": [True]}
    assert data["series"][0]["file"] == "figure2_21_analytic.csv"


def test_local_maxima_tie_goes_to_earlier_point():
    y = [0, 1, 3, 3, 1, 0, 2, 0]
    assert local_maxima(y).tolist() == [2, 6]
    assert local_minima(y).tolist() == [5]


def test_prominence_filters_wiggles():
    t = np.linspace(0, 4 * np.pi, 4001)
    y = np.cos(t) + 0.02 * np.cos(40 * t)
    strong = prominent_maxima(y, 0.5)
    assert len(strong) == 1 and abs(t[strong[0]] - 2 * np.pi) < 0.02
    assert len(local_maxima(y)) > 10
