import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from matineq import matfile

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=6), elements=finite))
def test_real_round_trip_exact(M):
    back = matfile.loads(matfile.dumps(M))
    assert back.dtype == np.float64
    assert np.array_equal(back, M)


@given(hnp.arrays(np.complex128, hnp.array_shapes(min_dims=2, max_dims=2, max_side=5),
                  elements=st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300)))
def test_complex_round_trip_exact(M):
    back = matfile.loads(matfile.dumps(M))
    assert np.array_equal(back, M)


def test_schema_fields():
    d = matfile.to_dict(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert d == {"dims": [2, 2], "field": "real", "re": [1.0, 2.0, 3.0, 4.0]}
    d = matfile.to_dict(np.array([[1j]]))
    assert d["field"] == "complex" and d["im"] == [1.0]


def test_save_load(tmp_path):
    M = np.array([[0.1, 1 / 3], [np.pi, -2e-308]])
    matfile.save(tmp_path / "m.json", M)
    assert np.array_equal(matfile.load(tmp_path / "m.json"), M)


@pytest.mark.parametrize("text,msg", [
    ('{"dims": [2, 2], "re": [1, 2, 3]}', "3 entries"),
    ('{"dims": [2], "re": [1]}', "dims"),
    ('{"dims": [1, 1], "field": "quat", "re": [1]}', "field"),
    ('{"dims": [1, 1], "re": ["x"]}', "finite"),
    ('{"dims": [1, 1], "field": "complex", "re": [1]}', "'im'"),
    ('{"dims": [1, 1], "re": [1], "im": [0]}', "must not"),
    ('[1, 2]', "object"),
])
def test_malformed(text, msg):
    with pytest.raises(matfile.MatrixFileError, match=msg):
        matfile.loads(text)


def test_bad_json_is_positioned():
    with pytest.raises(matfile.MatrixFileError, match=r"line 2, column \d+"):
        matfile.loads('{"dims": [1, 1],\n "re": [1,]}')


def test_nonfinite_rejected():
    # json accepts the NaN literal; the schema does not
    with pytest.raises(matfile.MatrixFileError):
        matfile.loads(json.dumps({"dims": [1, 1], "re": [float("nan")]}))


def test_missing_file(tmp_path):
    with pytest.raises(matfile.MatrixFileError):
        matfile.load(tmp_path / "nope.json")
