"""JSON encoding of complex matrices and parsing of complex literals.

Complex entries are ``[re, im]`` pairs in row-major nested arrays.  Floats
are written with ``repr``, the shortest decimal that round-trips exactly.
"""

from __future__ import annotations

import json
import math
import re

import numpy as np

from .errors import InvalidInput

_COMPLEX = re.compile(
    r"""^\s*(?:
        (?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
        (?:\s*(?P<sign>[+-])\s*(?P<im>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*[ij])?
      | (?P<pure>[+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)\s*(?P<unit>[ij])
    )\s*$""",
    re.VERBOSE,
)


def parse_complex(text) -> complex:
    """Parse ``"0.3-0.4i"``, ``"2"``, ``"i"``, ``"-1e-3j"`` and the like."""
    if isinstance(text, (int, float, complex)) and not isinstance(text, bool):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    m = _COMPLEX.match(str(text))
    if not m:
        raise InvalidInput(f"cannot parse complex number {text!r}")
    if m.group("unit"):
        pure = m.group("pure")
        if pure in (None, "", "+", "-"):
            pure = (pure or "") + "1"
        return complex(0.0, float(pure))
    re_part = float(m.group("re"))
    if m.group("sign") is None:
        return complex(re_part, 0.0)
    im = float(m.group("im") or 1.0)
    return complex(re_part, im if m.group("sign") == "+" else -im)


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def _entry(v) -> complex:
    if isinstance(v, bool):
        raise InvalidInput("boolean matrix entry")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(v[0], v[1])
    if isinstance(v, str):
        return parse_complex(v)
    raise InvalidInput(f"bad matrix entry {v!r}")


def decode_matrix(data) -> np.ndarray:
    """Nested rows of entries; an entry is a number, ``[re, im]`` or a string."""
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise InvalidInput("matrix must be a non-empty list of rows")
    width = len(data[0])
    if width == 0 or any(len(r) != width for r in data):
        raise InvalidInput("matrix rows must be non-empty and of equal length")
    M = np.array([[_entry(v) for v in row] for row in data], dtype=complex)
    if not np.all(np.isfinite(M)):
        raise InvalidInput("matrix has non-finite entries")
    return M


def decode_vector(data) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise InvalidInput("vector must be a non-empty list")
    return np.array([_entry(v) for v in data], dtype=complex)


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.asarray(v, dtype=complex)]


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed JSON: {exc}") from None
