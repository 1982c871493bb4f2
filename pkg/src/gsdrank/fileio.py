"""Reading and writing ``I x J x 2`` tensors as JSON documents.

A document looks like::

    {"dims": [2, 2, 2], "slices": [[[1, 0], [0, 1]], [[1, 0], [0, 2]]]}

Each slice is row-major: ``I`` rows of ``J`` numbers.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .errors import TensorFileError
from .tensor import Tensor3

__all__ = ["parse_tensor", "parse_tensor_file", "emit_tensor", "write_tensor_file"]


def _reject_constant(name):
    raise TensorFileError(f"non-finite value {name} is not allowed")


def _check_int(value, field):
    if isinstance(value, bool) or not isinstance(value, int):
        raise TensorFileError(f"{field}: expected an integer, got {value!r}")
    if value < 1:
        raise TensorFileError(f"{field}: must be positive, got {value}")
    return value


def parse_tensor(text):
    """Parse a tensor document from a string."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise TensorFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except TensorFileError:
        raise
    except (ValueError, RecursionError) as exc:
        raise TensorFileError(f"unreadable document: {exc}") from None
    if not isinstance(doc, dict):
        raise TensorFileError("top level must be an object with 'dims' and 'slices'")
    for key in ("dims", "slices"):
        if key not in doc:
            raise TensorFileError(f"missing field '{key}'")
    dims = doc["dims"]
    if not isinstance(dims, list) or len(dims) != 3:
        raise TensorFileError(f"dims: expected [I, J, 2], got {dims!r}")
    I = _check_int(dims[0], "dims[0]")
    J = _check_int(dims[1], "dims[1]")
    K = _check_int(dims[2], "dims[2]")
    if K != 2:
        raise TensorFileError(f"dims[2]: K must equal 2, got {K}")

    slices = doc["slices"]
    if not isinstance(slices, list) or len(slices) != 2:
        n = len(slices) if isinstance(slices, list) else type(slices).__name__
        raise TensorFileError(f"slices: expected 2 matrices, got {n}")
    data = np.empty((I, J, 2))
    for k, S in enumerate(slices):
        where = f"slices[{k}]"
        if not isinstance(S, list) or len(S) != I:
            raise TensorFileError(f"{where}: expected {I} rows, got "
                                  f"{len(S) if isinstance(S, list) else type(S).__name__}")
        for i, row in enumerate(S):
            if not isinstance(row, list) or len(row) != J:
                raise TensorFileError(f"{where}[{i}]: expected {J} entries, got "
                                      f"{len(row) if isinstance(row, list) else type(row).__name__}")
            for j, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise TensorFileError(f"{where}[{i}][{j}]: expected a number, got {v!r}")
                try:
                    x = float(v)
                except OverflowError:
                    x = math.inf
                if not math.isfinite(x):
                    raise TensorFileError(f"{where}[{i}][{j}]: non-finite value")
                data[i, j, k] = x
    return Tensor3(data)


def parse_tensor_file(source):
    """Read a tensor document from a path or a text stream."""
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise TensorFileError(f"{source}: {exc.strerror}") from None
        try:
            return parse_tensor(text)
        except TensorFileError as exc:
            raise TensorFileError(f"{source}: {exc}") from None
    return parse_tensor(source.read())


def emit_tensor(Y, indent=None):
    """Serialize ``Y`` to a document string.

    Floats are written with ``repr`` so parsing the result reproduces every
    entry bit for bit.
    """
    Y.require_k2()
    I, J, _ = Y.shape
    doc = {"dims": [I, J, 2],
           "slices": [[[float(x) for x in row] for row in S] for S in Y.slices]}
    return json.dumps(doc, indent=indent)


def write_tensor_file(Y, dest, indent=None):
    text = emit_tensor(Y, indent=indent) + "\n"
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        dest.write(text)
