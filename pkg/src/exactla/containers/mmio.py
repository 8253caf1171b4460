"""Matrix Market reader/writer with a ``%%field:`` header extension.

Written files look like::

    %%MatrixMarket matrix coordinate integer general
    %%field: modular 101
    2 2 2
    1 1 1
    2 2 1

Dense matrices use the ``array`` layout (column-major values). Over ZZ the
field line is ``%%field: integer`` and values are signed decimals.
"""

from __future__ import annotations

import io
import os

import numpy as np

from ..field_arith import ZZ, PrimeField
from .dense import DenseMatrix, _DenseBase
from .sparse import SparseCOO

_HEADER = "%%MatrixMarket matrix {} integer general"


class MatrixMarketError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def field_line(F) -> str:
    if F.is_integer_ring:
        return "%%field: integer"
    return f"%%field: modular {F.p}"


def mm_dumps(A) -> str:
    F = A.field
    if isinstance(A, _DenseBase):
        m, n = A.shape
        lines = [_HEADER.format("array"), field_line(F), f"{m} {n}"]
        lines.extend(str(int(v)) for v in A.array.T.reshape(-1))
    else:
        if F.is_integer_ring:
            raise TypeError("sparse containers over ZZ are not supported")
        from .convert import to_csr

        S = to_csr(A)
        m, n = S.shape
        lines = [_HEADER.format("coordinate"), field_line(F), f"{m} {n} {S.nnz}"]
        rows = S.row_indices() + 1
        lines.extend(f"{i} {j} {v}" for i, j, v in zip(rows.tolist(), (S.col_idx + 1).tolist(), S.values.tolist()))
    return "\n".join(lines) + "\n"


def mm_write(A, dest) -> None:
    text = mm_dumps(A)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


def parse_field(text: str, lineno: int = 2):
    body = text[len("%%field:"):].split()
    if body == ["integer"]:
        return ZZ
    if len(body) == 2 and body[0] == "modular":
        try:
            p = int(body[1])
        except ValueError:
            raise MatrixMarketError(lineno, f"bad modulus {body[1]!r}") from None
        try:
            return PrimeField(p)
        except ValueError as exc:
            raise MatrixMarketError(lineno, str(exc)) from None
    raise MatrixMarketError(lineno, f"unsupported field {' '.join(body)!r}")


def _int_tokens(line: str, lineno: int, count: int, what: str) -> list:
    toks = line.split()
    if len(toks) != count:
        raise MatrixMarketError(lineno, f"expected {count} fields in {what}, got {len(toks)}")
    try:
        return [int(t) for t in toks]
    except ValueError:
        raise MatrixMarketError(lineno, f"non-integer value in {what}: {line.strip()!r}") from None


def mm_loads(text: str, field=None, dense: bool = False):
    """Parse a Matrix Market document.

    Coordinate data over a prime field gives a ``SparseCOO`` (duplicates
    summed, zeros dropped) unless ``dense`` is set; array data and integer
    data give a ``DenseMatrix``.
    """
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError(1, "empty input")
    head = lines[0].split()
    if (
        len(head) != 5
        or head[0] != "%%MatrixMarket"
        or [t.lower() for t in head[1:]] not in (
            ["matrix", "coordinate", "integer", "general"],
            ["matrix", "array", "integer", "general"],
        )
    ):
        raise MatrixMarketError(1, f"malformed header {lines[0]!r}")
    layout = head[2].lower()

    F = None
    pos = 1
    if len(lines) > 1 and lines[1].startswith("%%field:"):
        F = parse_field(lines[1], 2)
        pos = 2
    elif len(lines) > 1 and lines[1].startswith("%%"):
        raise MatrixMarketError(2, f"malformed field line {lines[1]!r}")
    if F is None:
        if field is None:
            raise MatrixMarketError(2, "missing %%field line")
        F = field
    elif field is not None and F != field:
        raise MatrixMarketError(2, f"file field {F} does not match expected {field}")

    body = []
    for k in range(pos, len(lines)):
        s = lines[k].strip()
        if not s or s.startswith("%"):
            continue
        body.append((k + 1, s))
    if not body:
        raise MatrixMarketError(len(lines), "missing size line")

    lineno, size = body[0]
    if layout == "coordinate":
        m, n, nnz = _int_tokens(size, lineno, 3, "size line")
        if nnz < 0:
            raise MatrixMarketError(lineno, "negative entry count")
    else:
        m, n = _int_tokens(size, lineno, 2, "size line")
        nnz = m * n
    if m <= 0 or n <= 0:
        raise MatrixMarketError(lineno, f"nonpositive dimensions {m}x{n}")
    entries = body[1:]
    if len(entries) != nnz:
        where = entries[nnz][0] if len(entries) > nnz else len(lines)
        raise MatrixMarketError(where, f"expected {nnz} entries, found {len(entries)}")

    if layout == "array":
        vals = []
        for ln, s in entries:
            vals.append(_int_tokens(s, ln, 1, "array entry")[0])
        arr = np.array(vals, dtype=object).reshape(n, m).T
        return DenseMatrix(F, m, n, arr)

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = []
    for t, (ln, s) in enumerate(entries):
        i, j, v = _int_tokens(s, ln, 3, "coordinate entry")
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixMarketError(ln, f"index ({i}, {j}) outside a {m}x{n} matrix")
        rows[t], cols[t] = i - 1, j - 1
        vals.append(v)
    if F.is_integer_ring or dense:
        arr = np.zeros((m, n), dtype=object)
        for r, c, v in zip(rows.tolist(), cols.tolist(), vals):
            arr[r, c] += v
        return DenseMatrix(F, m, n, arr)
    vals = np.array([v % F.p for v in vals], dtype=np.int64)
    return SparseCOO(F, m, n, rows, cols, vals)


def mm_read(source, field=None, dense: bool = False):
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            text = fh.read()
    elif isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError("mm_read expects a path or a text stream")
    return mm_loads(text, field=field, dense=dense)

