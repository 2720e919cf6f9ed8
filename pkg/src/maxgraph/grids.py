"""Rectangular node grids, grid-backed fields and their CSV/JSON formats.

Values are stored as arrays indexed ``[i, j]`` with ``i`` along ``x1`` and
``j`` along ``x2``.  On disk the ``x1`` index runs fastest.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .fields import FunctionField

SCHEMA = "maxgraph-grid/1"


@dataclass(frozen=True)
class Grid:
    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid needs at least 2 nodes per direction")
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise ValueError("grid bounds must satisfy min < max")

    @classmethod
    def square(cls, bounds, n):
        return cls(*bounds, n, n)

    @property
    def bounds(self):
        return (self.x1_min, self.x1_max, self.x2_min, self.x2_max)

    @property
    def x1(self):
        return np.linspace(self.x1_min, self.x1_max, self.n1)

    @property
    def x2(self):
        return np.linspace(self.x2_min, self.x2_max, self.n2)

    @property
    def h1(self):
        return (self.x1_max - self.x1_min) / (self.n1 - 1)

    @property
    def h2(self):
        return (self.x2_max - self.x2_min) / (self.n2 - 1)

    def mesh(self):
        """``(X1, X2)`` arrays of shape ``(n1, n2)``."""
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def points(self):
        X1, X2 = self.mesh()
        return X1.ravel(), X2.ravel()

    def contains(self, p):
        return self.x1_min <= p[0] <= self.x1_max and self.x2_min <= p[1] <= self.x2_max

    def refine(self):
        """Grid with every cell halved."""
        return Grid(*self.bounds, 2 * self.n1 - 1, 2 * self.n2 - 1)

    def sample(self, field):
        X1, X2 = self.mesh()
        vals = field.value((X1, X2))
        return np.broadcast_to(np.asarray(vals, dtype=float), X1.shape).copy()

    def to_dict(self):
        return {"bounds": list(self.bounds), "resolution": [self.n1, self.n2]}


def bilinear(grid: Grid, values, p):
    """Bilinear interpolation of node ``values`` at ``p`` (scalars or arrays)."""
    x1 = np.asarray(p[0], dtype=float)
    x2 = np.asarray(p[1], dtype=float)
    if np.any((x1 < grid.x1_min - 1e-12) | (x1 > grid.x1_max + 1e-12) | (x2 < grid.x2_min - 1e-12) | (x2 > grid.x2_max + 1e-12)):
        raise ValueError("interpolation point outside the grid rectangle")
    s = (x1 - grid.x1_min) / grid.h1
    t = (x2 - grid.x2_min) / grid.h2
    i = np.clip(np.floor(s).astype(int), 0, grid.n1 - 2)
    j = np.clip(np.floor(t).astype(int), 0, grid.n2 - 2)
    a = s - i
    b = t - j
    v = np.asarray(values)
    res = (
        (1 - a) * (1 - b) * v[i, j] + a * (1 - b) * v[i + 1, j]
        + (1 - a) * b * v[i, j + 1] + a * b * v[i + 1, j + 1]
    )
    return float(res) if np.ndim(res) == 0 else res


def grid_field(grid: Grid, values, grad=None, hess=None, name=None):
    """Field whose value interpolates node values; partials from ``grad`` when given."""
    vals = np.array(values, dtype=float)
    return FunctionField(lambda p: bilinear(grid, vals, p), grad=grad, hess=hess, name=name)


# ---------------------------------------------------------------------------
# serialization

def _fmt(x):
    return repr(float(x))


def to_csv(grid: Grid, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "x2", "value"])
    x1, x2 = grid.x1, grid.x2
    v = np.asarray(values)
    for j in range(grid.n2):
        for i in range(grid.n1):
            w.writerow([_fmt(x1[i]), _fmt(x2[j]), _fmt(v[i, j])])
    return buf.getvalue()


def to_json(grid: Grid, values, extra=None) -> str:
    v = np.asarray(values, dtype=float)
    doc = {
        "schema": SCHEMA,
        "bounds": [float(b) for b in grid.bounds],
        "resolution": [grid.n1, grid.n2],
        "values": [[float(v[i, j]) for i in range(grid.n1)] for j in range(grid.n2)],
    }
    if extra:
        doc["meta"] = extra
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def from_json(text):
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported grid schema {doc.get('schema')!r}")
    n1, n2 = doc["resolution"]
    grid = Grid(*doc["bounds"], n1, n2)
    rows = np.asarray(doc["values"], dtype=float)
    if rows.shape != (n2, n1):
        raise ValueError("grid values do not match the resolution header")
    return grid, rows.T.copy()


def from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["x1", "x2", "value"]:
        raise ValueError("CSV grid must start with the header x1,x2,value")
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    x1 = np.unique(data[:, 0])
    x2 = np.unique(data[:, 1])
    grid = Grid(x1[0], x1[-1], x2[0], x2[-1], len(x1), len(x2))
    return grid, data[:, 2].reshape(len(x2), len(x1)).T.copy()


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
