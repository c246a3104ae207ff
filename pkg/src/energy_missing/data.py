"""Incomplete samples: values, response indicators and complete-case bookkeeping.

The response matrix is authoritative. Values at unobserved positions are stored
as NaN for convenience but are never read; arithmetic goes through
:attr:`IncompleteSample.filled`, which holds zeros there.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import EmptyInputError, IngestionError, ParameterError, ShapeError

MISSING_TOKENS = frozenset({"", "NA"})


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class IncompleteSample:
    """A case-by-variable matrix paired with its binary response matrix."""

    values: np.ndarray
    response: np.ndarray
    filled: np.ndarray = field(init=False, repr=False)
    complete_flags: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        response = np.array(self.response, dtype=bool)
        if values.ndim != 2 or response.shape != values.shape:
            raise ShapeError(
                f"values {values.shape} and response {response.shape} must be "
                "two-dimensional with identical shapes"
            )
        if values.shape[1] == 0:
            raise EmptyInputError("sample has no columns")
        if not np.isfinite(values[response]).all():
            raise ParameterError("observed values must be finite")
        values[~response] = np.nan
        filled = np.where(response, values, 0.0)
        flags = response.all(axis=1) if values.shape[0] else np.zeros(0, bool)
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "response", _readonly(response))
        object.__setattr__(self, "filled", _readonly(filled))
        object.__setattr__(self, "complete_flags", _readonly(flags))

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def complete_count(self):
        return int(self.complete_flags.sum())

    @property
    def is_complete(self):
        return bool(self.response.all())

    def take(self, rows):
        """Rows ``rows`` (in the given order) as a new sample."""
        rows = np.asarray(rows, dtype=np.intp)
        return IncompleteSample(self.values[rows], self.response[rows])

    def with_response(self, response):
        """Same values, new response matrix; newly hidden cells become missing."""
        response = np.asarray(response, dtype=bool) & self.response
        return IncompleteSample(self.values, response)

    def equals(self, other):
        """Exact equality of response matrices and of observed values."""
        return (
            self.values.shape == other.values.shape
            and np.array_equal(self.response, other.response)
            and np.array_equal(self.filled, other.filled)
        )

    def to_array(self):
        """Copy of the values with NaN at missing positions."""
        return self.values.copy()


def build_sample(values) -> IncompleteSample:
    """Build an :class:`IncompleteSample` from a matrix of reals and missing markers.

    ``None`` and NaN both mark a missing cell. A 2-d ``numpy`` array is used
    as is; nested sequences must be rectangular.
    """
    if isinstance(values, IncompleteSample):
        return values
    if isinstance(values, np.ndarray):
        if values.ndim != 2:
            raise ShapeError(f"expected a 2-d matrix, got {values.ndim} dimensions")
        arr = values.astype(float)
    else:
        rows = list(values)
        if not rows:
            raise EmptyInputError("sample has no rows")
        widths = set()
        parsed = []
        for row in rows:
            row = list(row)
            widths.add(len(row))
            parsed.append([math.nan if v is None else float(v) for v in row])
        if len(widths) != 1:
            raise ShapeError(f"ragged input: row lengths {sorted(widths)}")
        arr = np.array(parsed, dtype=float)
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyInputError(f"sample of shape {arr.shape} is empty")
    response = ~np.isnan(arr)
    if np.isinf(arr).any():
        raise ParameterError("values must be finite or missing")
    return IncompleteSample(arr, response)


def check_sample(X, name="X") -> IncompleteSample:
    """Validate ``X`` (array-like with NaN for missing, or a sample)."""
    try:
        return build_sample(X)
    except (ShapeError, EmptyInputError, ParameterError) as exc:
        raise type(exc)(f"{name}: {exc}") from None


def check_pair(x, y):
    x = check_sample(x, "x")
    y = check_sample(y, "y")
    if x.d != y.d:
        raise ShapeError(f"dimension mismatch: x has {x.d} columns, y has {y.d}")
    return x, y


def hadamard_overlap(r1, r2):
    """Componentwise product of two response vectors and its number of ones."""
    r1 = np.asarray(r1)
    r2 = np.asarray(r2)
    if r1.shape != r2.shape or r1.ndim != 1:
        raise ShapeError(f"response vectors differ in shape: {r1.shape} vs {r2.shape}")
    mask = (r1.astype(np.int64) * r2.astype(np.int64)).astype(np.int8)
    return mask, int(mask.sum())


def complete_subsample(sample: IncompleteSample) -> IncompleteSample:
    """The fully observed rows of ``sample``, in their original order."""
    return sample.take(np.flatnonzero(sample.complete_flags))


def concatenate(a: IncompleteSample, b: IncompleteSample) -> IncompleteSample:
    if a.d != b.d:
        raise ShapeError(f"dimension mismatch: {a.d} vs {b.d}")
    return IncompleteSample(
        np.vstack([a.values, b.values]), np.vstack([a.response, b.response])
    )


# --- CSV interchange -------------------------------------------------------


def _sniff_delimiter(first_line):
    return ";" if first_line.count(";") > first_line.count(",") else ","


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_table(text, delimiter=None, header=None):
    """Parse CSV text into ``(column_names, sample)``.

    ``delimiter`` is auto-detected (``;`` or ``,``) unless given. ``header``
    may be True/False; by default a first row containing any non-numeric,
    non-missing token is taken as the header. Empty fields and ``NA`` are
    missing.
    """
    lines = text.splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise IngestionError("empty file")
    if delimiter is None:
        delimiter = _sniff_delimiter(lines[0])
    rows = list(csv.reader(io.StringIO("\n".join(lines)), delimiter=delimiter))
    if header is None:
        header = any(
            tok.strip() not in MISSING_TOKENS and not _is_number(tok.strip())
            for tok in rows[0]
        )
    columns = [tok.strip() for tok in rows[0]] if header else None
    body = rows[1:] if header else rows
    if not body:
        raise IngestionError("file has no data rows")
    width = len(columns) if columns is not None else len(body[0])
    values = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise ShapeError(
                f"row {i + 1 + bool(header)} has {len(row)} fields, expected {width}"
            )
        for j, tok in enumerate(row):
            tok = tok.strip()
            if tok in MISSING_TOKENS:
                values[i, j] = np.nan
                continue
            try:
                values[i, j] = float(tok)
            except ValueError:
                raise IngestionError(
                    f"non-numeric value {tok!r} at row {i + 1 + bool(header)}, "
                    f"column {j + 1}"
                ) from None
    return columns, build_sample(values)


def read_table(path, delimiter=None, header=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_table(text, delimiter=delimiter, header=header)


def read_csv(path, delimiter=None, header=None) -> IncompleteSample:
    return read_table(path, delimiter=delimiter, header=header)[1]


def format_csv(sample: IncompleteSample, columns=None, delimiter=",") -> str:
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    if columns is not None:
        writer.writerow(columns)
    for vals, resp in zip(sample.values, sample.response):
        writer.writerow([repr(float(v)) if r else "NA" for v, r in zip(vals, resp)])
    return out.getvalue()


def write_csv(sample: IncompleteSample, path, columns=None, delimiter=","):
    Path(path).write_text(format_csv(sample, columns=columns, delimiter=delimiter))
