import os
import re
import tempfile
from typing import Any, Iterable, List, Sequence

import numpy as np

_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PAIR_RE = re.compile(rf"^\s*({_FLOAT})\s*(?:,\s*({_FLOAT})\s*)?$")


def parse_complex(text: str) -> complex:
    """Parse 're,im' or a bare real into a complex number"""
    match = _PAIR_RE.match(text)
    if not match:
        raise ValueError(f"Cannot parse complex number from {text!r}; use 're,im' or a bare real")
    re_part = float(match.group(1))
    im_part = float(match.group(2)) if match.group(2) is not None else 0.0
    return complex(re_part, im_part)


def parse_complex_list(items: Iterable[str]) -> List[complex]:
    return [parse_complex(item) for item in items]


def to_pair(value: complex) -> List[float]:
    value = complex(value)
    return [float(value.real), float(value.imag)]


def from_pair(pair: Sequence[float]) -> complex:
    if len(pair) != 2:
        raise ValueError(f"Complex pairs need exactly two entries, got {len(pair)}")
    return complex(float(pair[0]), float(pair[1]))


def atomic_write(path: str, text: str) -> None:
    """Write text to path via a temp file in the same directory and a rename"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def to_jsonable(value: Any) -> Any:
    """Complex numbers become [re, im]; numpy scalars and arrays become Python values"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return to_pair(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value
