from fractions import Fraction
import io
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from a1heat.kernels import EvalPoint
from a1heat.regions import RegionLabel
from a1heat.report import CSV_HEADER, ReportError, dumps, dumps_csv, loads, report_write, to_plain
from a1heat.verify import GridSpec, ratio_sweep

GRID = GridSpec((0.0, 1.0), (0.0, 1.0), (0.5, 2.0))


@pytest.fixture(scope="module")
def report():
    return ratio_sweep(1.0, GRID, keep_rows=True)


def test_json_round_trip_is_byte_identical(report):
    text = dumps(report)
    assert dumps(loads(text)) == text
    assert "rows" not in loads(text)


def test_json_key_order_sorted(report):
    keys = list(loads(dumps(report)))
    assert keys == sorted(keys)


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip(x):
    assert loads(dumps({"x": x}))["x"] == x
    assert dumps(loads(dumps({"x": x}))) == dumps({"x": x})


def test_special_values():
    out = loads(dumps({"a": math.nan, "b": math.inf, "c": Fraction(3, 2), "d": RegionLabel.D2,
                       "e": frozenset({"b", "a"}), "f": EvalPoint(1, 0, 2)}))
    assert out == {"a": "NaN", "b": "Infinity", "c": "3/2", "d": "D2", "e": ["a", "b"],
                   "f": {"r": 1.0, "s": 0.0, "t": 2.0}}


def test_integers_stay_integers():
    assert dumps({"n": 3}) == '{\n  "n": 3\n}\n'
    assert dumps({"x": 3.0}) == '{\n  "x": 3.0\n}\n'


def test_csv_header_and_rows(report):
    text = dumps_csv(report)
    lines = text.splitlines()
    assert lines[0] == "r,s,t,h,E,ratio,region"
    assert ",".join(CSV_HEADER) == lines[0]
    assert len(lines) == 1 + report.n_points
    r, s, t, h, E, ratio, region = lines[1].split(",")
    assert float(h) / float(E) == pytest.approx(float(ratio), rel=1e-12)


def test_report_write_file_and_stdout(tmp_path, report, capsys):
    path = tmp_path / "r.json"
    report_write(report, str(path), "json")
    assert path.read_text() == dumps(report)
    report_write(report, "-", "csv")
    assert capsys.readouterr().out.startswith("r,s,t,h,E,ratio,region\n")


def test_report_write_errors(tmp_path, report):
    with pytest.raises(ReportError):
        report_write({"a": 1}, str(tmp_path / "x.csv"), "csv")
    with pytest.raises(ReportError):
        report_write(report, str(tmp_path / "x"), "yaml")
    with pytest.raises(ReportError):
        report_write(report, str(tmp_path / "missing" / "x.json"), "json")


def test_unserialisable():
    with pytest.raises(TypeError):
        dumps({"x": object()})
