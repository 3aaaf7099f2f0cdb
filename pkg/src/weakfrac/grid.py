"""Meshes, sampled functions, and the CSV interchange format.

The CSV format shared by every CLI/service input and output is a two-column
file with header ``x,value``, one node per row, decimal floating point
written with 17 significant digits (lossless for doubles), LF line endings.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import InputError, UsageError
from .special import Interval

__all__ = [
    "Grid",
    "GridFunction",
    "GridKind",
    "Interval",
    "make_grid",
    "sample",
    "read_csv",
    "write_csv",
]


class GridKind(enum.Enum):
    UNIFORM = "uniform"
    GRADED = "graded"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class Grid:
    """A strictly increasing mesh on a finite interval, endpoints included."""

    interval: Interval
    nodes: np.ndarray
    kind: GridKind = GridKind.EXPLICIT
    gamma: float | None = None  # grading exponent, GRADED only

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if not self.interval.finite:
            raise UsageError("grids require a finite interval")
        if nodes.ndim != 1 or nodes.size < 3:
            raise UsageError("a grid needs at least 3 nodes")
        if not np.all(np.isfinite(nodes)):
            raise InputError("grid nodes must be finite")
        if nodes[0] != self.interval.a or nodes[-1] != self.interval.b:
            raise UsageError("grid must start at a and end at b")
        if not np.all(np.diff(nodes) > 0):
            raise UsageError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> float:
        """Nominal mesh size (b-a)/(n-1); the actual spacing for UNIFORM."""
        return self.interval.length / (self.n - 1)

    def refine(self, splits: int = 1) -> "Grid":
        """Split every cell into 2**splits equal parts (kind becomes EXPLICIT)."""
        nodes = self.nodes
        for _ in range(splits):
            mids = 0.5 * (nodes[:-1] + nodes[1:])
            merged = np.empty(nodes.size + mids.size)
            merged[0::2] = nodes
            merged[1::2] = mids
            nodes = merged
        return Grid(self.interval, nodes, GridKind.EXPLICIT)


def make_grid(
    interval: Interval,
    n: int,
    kind: GridKind = GridKind.UNIFORM,
    gamma: float = 1.0,
    nodes: Iterable[float] | None = None,
) -> Grid:
    """Build a grid with ``n`` nodes on ``interval``.

    GRADED places node_i = a + (b-a) (i/(n-1))**gamma, clustering nodes at the
    left endpoint for gamma > 1 (the singular end of left-anchored kernels).
    Infinite intervals must carry a truncation window.
    """
    work = interval.truncated()
    if n < 3:
        raise UsageError(f"a grid needs at least 3 nodes, got n={n}")
    a, b = work.a, work.b
    if kind is GridKind.UNIFORM:
        xs = np.linspace(a, b, n)
    elif kind is GridKind.GRADED:
        if gamma < 1.0:
            raise UsageError("grading exponent must be >= 1")
        t = np.linspace(0.0, 1.0, n)
        xs = a + (b - a) * t**gamma
        xs[0], xs[-1] = a, b
        # strong grading can push nodes below the ulp of the endpoint; keep
        # the representable ones
        xs = np.unique(xs)
    elif kind is GridKind.EXPLICIT:
        if nodes is None:
            raise UsageError("explicit grids require a node sequence")
        xs = np.asarray(list(nodes), dtype=float)
    else:  # pragma: no cover
        raise UsageError(f"unknown grid kind {kind!r}")
    return Grid(work, xs, kind, gamma if kind is GridKind.GRADED else None)


def graded_pieces(
    interval: Interval,
    n_per_piece: int,
    seams: Iterable[float],
    gamma: float,
    toward_left: bool = True,
) -> Grid:
    """Composite mesh: the interval is split at the seams and every piece is
    graded toward its left (or right) edge.

    Left-anchored operators want clustering at the interval start and at any
    interior singular point (jumps of the data, kernel anchors), which is
    exactly what per-piece left grading gives.
    """
    work = interval.truncated()
    cuts = sorted({work.a, work.b, *(s for s in seams if work.a < s < work.b)})
    t = np.linspace(0.0, 1.0, n_per_piece) ** gamma
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        xs = lo + (hi - lo) * t if toward_left else hi - (hi - lo) * t[::-1]
        pieces.append(xs)
    nodes = np.unique(np.concatenate(pieces))
    nodes[0], nodes[-1] = work.a, work.b
    return Grid(work, nodes, GridKind.EXPLICIT)


def refined_near(
    interval: Interval,
    base_h: float,
    features: Iterable[float],
    half_width: float,
    fine_h: float,
) -> Grid:
    """Uniform mesh with fine patches around the given feature points."""
    work = interval.truncated()
    parts = [np.arange(work.a, work.b + 0.5 * base_h, base_h)]
    parts[0][-1] = work.b
    for c in features:
        lo = max(work.a, c - half_width)
        hi = min(work.b, c + half_width)
        if hi > lo:
            parts.append(np.arange(lo, hi + 0.5 * fine_h, fine_h))
    merged = np.unique(np.concatenate(parts))
    merged = merged[(merged >= work.a) & (merged <= work.b)]
    keep = [0]
    for i in range(1, merged.size):
        if merged[i] - merged[keep[-1]] > 0.25 * fine_h:
            keep.append(i)
    nodes = merged[keep]
    nodes[0], nodes[-1] = work.a, work.b
    return Grid(work, nodes, GridKind.EXPLICIT)


@dataclass(frozen=True)
class GridFunction:
    """Samples of a real function at the nodes of a grid.

    Values must be finite.  Operators that exclude a singular node (the
    anchored endpoint of a fractional derivative) mark it with NaN and are
    constructed with ``allow_nan=True``; NaN is a marker, never data.
    """

    grid: Grid
    values: np.ndarray
    allow_nan: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != self.grid.nodes.shape:
            raise InputError(
                f"value count {vals.size} does not match node count {self.grid.n}"
            )
        if self.allow_nan:
            if np.any(np.isinf(vals)):
                raise InputError("grid function values must not be infinite")
        elif not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise InputError(
                f"non-finite sample at node index {bad} (x={self.grid.nodes[bad]!r})"
            )
        vals.setflags(write=False)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values: np.ndarray, allow_nan: bool = False) -> "GridFunction":
        return GridFunction(self.grid, values, allow_nan=allow_nan)

    def __call__(self, x: float | np.ndarray) -> float | np.ndarray:
        """Piecewise-linear interpolation at x (the model every scheme uses)."""
        return np.interp(x, self.grid.nodes, self.values)


def sample(f: Callable[[float], float], grid: Grid) -> GridFunction:
    """Evaluate ``f`` at every node; non-finite samples are an InputError."""
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(grid.nodes), dtype=float)
        if vals.shape != grid.nodes.shape:
            raise TypeError
    except Exception:
        vals = np.array([float(f(x)) for x in grid.nodes])
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise InputError(f"non-finite sample at node x={grid.nodes[bad]!r}")
    return GridFunction(grid, vals)


def sample_singular(f: Callable[[float], float], grid: Grid, anchor_index: int = 0) -> GridFunction:
    """Sample a function that blows up at one endpoint node.

    The anchored node's value is copied from its interior neighbour; with
    meshes graded toward the anchor the first cell carries O(w_0^alpha) mass,
    so the substitution is harmless downstream.
    """
    nodes = grid.nodes
    vals = np.empty_like(nodes)
    idx = range(grid.n)
    for i in idx:
        if i == anchor_index:
            continue
        vals[i] = float(f(nodes[i]))
    vals[anchor_index] = vals[anchor_index + 1] if anchor_index == 0 else vals[anchor_index - 1]
    if not np.all(np.isfinite(vals)):
        raise InputError("non-finite sample away from the anchored node")
    return GridFunction(grid, vals)


def write_csv(gf: GridFunction, path_or_buf) -> None:
    """Write ``x,value`` rows with 17 significant digits and LF endings."""
    if hasattr(path_or_buf, "write"):
        _write_csv_stream(gf, path_or_buf)
        return
    with open(path_or_buf, "w", newline="\n") as handle:
        _write_csv_stream(gf, handle)


def _write_csv_stream(gf: GridFunction, stream) -> None:
    stream.write("x,value\n")
    for x, v in zip(gf.grid.nodes, gf.values):
        stream.write(f"{x:.17g},{v:.17g}\n")


def read_csv(path_or_buf, allow_nan: bool = True) -> GridFunction:
    """Read a GridFunction written by :func:`write_csv`."""
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, "r") as handle:
            text = handle.read()
    lines = [ln.strip() for ln in io.StringIO(text) if ln.strip()]
    if not lines or lines[0].lower().replace(" ", "") != "x,value":
        raise InputError("expected CSV header 'x,value'")
    xs: list[float] = []
    vs: list[float] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected two comma-separated fields")
        try:
            x, v = float(parts[0]), float(parts[1])
        except ValueError:
            raise InputError(f"line {lineno}: could not parse floats from {line!r}")
        if not math.isfinite(x):
            raise InputError(f"line {lineno}: node must be finite")
        xs.append(x)
        vs.append(v)
    if len(xs) < 3:
        raise InputError("need at least 3 rows")
    grid = Grid(Interval(xs[0], xs[-1]), np.asarray(xs), GridKind.EXPLICIT)
    return GridFunction(grid, np.asarray(vs), allow_nan=allow_nan)
