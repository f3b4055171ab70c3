import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncavg.errors import InvalidInput
from ncavg.jsonio import decode_matrix, dumps, encode_matrix, loads, parse_complex


@pytest.mark.parametrize(
    "text,value",
    [
        ("0", 0),
        ("2", 2),
        ("0.3-0.4i", 0.3 - 0.4j),
        ("0.3+0.4j", 0.3 + 0.4j),
        ("i", 1j),
        ("-i", -1j),
        ("-1e-3j", -1e-3j),
        ("1 - i", 1 - 1j),
        ("1e-2+2.5e1i", 0.01 + 25j),
        (0.5, 0.5),
        ([0.1, -0.2], 0.1 - 0.2j),
    ],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("bad", ["", "abc", "1+", "1++2i", "i2"])
def test_parse_complex_rejects(bad):
    with pytest.raises(InvalidInput):
        parse_complex(bad)


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.tuples(finite, finite), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_round_trip_bit_exact(rows):
    M = np.array([[complex(a, b) for a, b in r] for r in rows])
    back = decode_matrix(loads(dumps({"m": encode_matrix(M)}))["m"])
    assert np.array_equal(back.view(np.uint64), M.view(np.uint64))


def test_decode_forms():
    M = decode_matrix([[1, [0, 2]], ["3-i", 0.5]])
    assert np.array_equal(M, np.array([[1, 2j], [3 - 1j, 0.5]]))
    with pytest.raises(InvalidInput):
        decode_matrix([[1, 2], [3]])
    with pytest.raises(InvalidInput):
        decode_matrix([])
    with pytest.raises(InvalidInput):
        decode_matrix([[True]])


def test_dumps_deterministic_and_clean():
    a = dumps({"b": np.float64(1.5), "a": float("inf")})
    assert a == dumps({"a": float("inf"), "b": 1.5})
    assert json.loads(a) == {"a": "inf", "b": 1.5}
    with pytest.raises(InvalidInput):
        loads("{bad")
