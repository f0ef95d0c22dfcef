import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import RADII
from pucp.experiments import Constant, EstimateChain, StepRecord, TraceInstance, trace_lower_bound
from pucp.manufactured import manufactured_instance
from pucp.reports import emit_report, parse_report
from pucp.textfmt import dumps, format_number


@pytest.fixture(scope="module")
def reference_chain(grid256, calibration):
    inst = manufactured_instance("affine", 2.0, grid256)
    return trace_lower_bound(TraceInstance(inst.reference, 2.0, "drift", None, 4.0), "drift_lq", RADII,
                             calibration=calibration)


def test_empty_chain_csv_is_header_only():
    assert emit_report(EstimateChain("drift_lq", ()), "csv") == "radius,measured,bound,slack\n"


def test_reference_csv_monotone(reference_chain):
    lines = emit_report(reference_chain, "csv").splitlines()
    assert lines[0] == "radius,measured,bound,slack"
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    assert len(rows) == len(RADII)
    radii = [r[0] for r in rows]
    assert radii == sorted(radii)
    assert all(r[3] >= 0 for r in rows)


def test_structured_round_trip(reference_chain):
    text = emit_report(reference_chain, "structured")
    assert parse_report(text) == reference_chain
    doc = json.loads(text)
    assert doc["passed"] is True and doc["first_failure"] is None
    for step in doc["steps"]:
        for c in step["constants"]:
            assert c["provenance"] in ("paper_formula", "measured", "calibrated")


def test_plotdata_blocks(reference_chain):
    text = emit_report(reference_chain, "plotdata")
    blocks = text.strip().split("\n\n\n")
    assert [b.splitlines()[0] for b in blocks] == ["# drift_lq measured loglog", "# drift_lq bound loglog"]
    for b in blocks:
        for ln in b.splitlines()[1:]:
            x, y = map(float, ln.split())
            assert x > 0 and y > 0


def test_unknown_format(reference_chain):
    with pytest.raises(ValueError):
        emit_report(reference_chain, "xml")


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False))
def test_seventeen_digits_round_trip(x):
    assert float(json.loads(format_number(x))) == x if math.isfinite(x) else True
    assert json.loads(dumps({"x": x}))["x"] == x


def test_non_finite_values_parse_back():
    chain = EstimateChain("drift_l2", (StepRecord("s", "a", 1.0, math.inf, (Constant("E", math.inf, "measured"),)),))
    back = parse_report(emit_report(chain))
    assert back == chain and back.passed
