import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsspce.errors import ParameterError, ShapeError
from fsspce.fss import FssConfig, fit_fss_pce
from fsspce.models import EXAMPLE2, HIV
from fsspce.polybasis import Dataset
from fsspce.rng import make_rng
from fsspce.serialization import (
    MODEL_FORMAT,
    TRACE_COLUMNS,
    dump_model,
    load_model,
    model_from_dict,
    model_to_dict,
    read_dataset_csv,
    trace_csv_text,
    write_dataset_csv,
)


def _fit():
    d = HIV.sample(80, make_rng(0))
    return d, fit_fss_pce(d, FssConfig(2, threshold=0.05))


def test_model_round_trip_bit_exact():
    d, res = _fit()
    buf = io.StringIO()
    dump_model(res.model, buf)
    back = load_model(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.coefficients, res.model.coefficients)
    assert np.array_equal(back.basis.coefficients, res.model.basis.coefficients)
    assert np.array_equal(back.predict(d.inputs), res.model.predict(d.inputs))
    assert back.sd == res.model.sd
    doc = json.loads(buf.getvalue())
    assert doc["format"] == MODEL_FORMAT
    assert set(doc) >= {"multi_indices", "monomial_coefficients", "rescale_map", "theta"}


def test_model_document_errors():
    _, res = _fit()
    doc = model_to_dict(res.model)
    with pytest.raises(ParameterError):
        model_from_dict({**doc, "format": "other/9"})
    with pytest.raises(ParameterError):
        model_from_dict({k: v for k, v in doc.items() if k != "theta"})
    bad = dict(doc, multi_indices=doc["multi_indices"][:-1])
    with pytest.raises(ShapeError):
        model_from_dict(bad)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 30), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_dataset_csv_round_trip(m, n, seed):
    rng = np.random.default_rng(seed)
    d = Dataset(rng.standard_normal((m, n)) * 10.0 ** rng.integers(-12, 12, (m, n)), rng.standard_normal(m))
    buf = io.StringIO()
    write_dataset_csv(d, buf)
    back = read_dataset_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.inputs, d.inputs) and np.array_equal(back.outputs, d.outputs)


def test_dataset_csv_header():
    buf = io.StringIO()
    write_dataset_csv(EXAMPLE2.sample(3, make_rng(1)), buf)
    assert buf.getvalue().splitlines()[0] == "x1,x2,x3,x4,x5,x6,y"


@pytest.mark.parametrize("text", [
    "",
    "a,b\n1,2\n",
    "x1,y\n",
    "x1,y\n1,2,3\n",
    "x1,y\n1,abc\n",
    "x1,y\n1,nan\n",
    "x2,y\n1,2\n",
])
def test_bad_csv_rejected(text):
    with pytest.raises(ParameterError):
        read_dataset_csv(io.StringIO(text))


def test_blank_lines_skipped():
    d = read_dataset_csv(io.StringIO("x1,y\n1,2\n\n3,4\n"))
    assert d.size == 2


def test_trace_csv():
    _, res = _fit()
    lines = trace_csv_text(res.trace).splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == len(res.trace) + 1
    first = lines[1].split(",")
    assert first[0] == "1"
    assert tuple(int(v) for v in first[1].split(";")) == res.trace[0].multi_index
