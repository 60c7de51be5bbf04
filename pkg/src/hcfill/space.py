"""Finite metric models, balls, ball families and coverings.

Two space models:

* VoxelSpace -- a set of occupied cells of an axis grid in l_inf^n with cell
  side `delta`.  A cell is identified with its center point; all geometry on
  voxel spaces is exact rational arithmetic.  Grid balls (axis cubes with
  grid-aligned corners, radius k*delta/2) are the canonical covering objects.
* NetSpace -- a finite point list with an explicit metric (l_inf, l2, l1 or a
  validated distance matrix) and a declared net scale `eps_net`.  Net answers
  elsewhere are always brackets; comparisons use the float tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .errors import InputError
from .exact import TOL, Scalar, as_fraction, fmt_scalar, parse_scalar

Cell = tuple[int, ...]
Point = tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# spaces

@dataclass(frozen=True)
class VoxelSpace:
    n: int
    delta: Fraction
    cells: frozenset[Cell]

    def __post_init__(self):
        if self.n < 1:
            raise InputError("ambient dimension must be >= 1")
        if self.delta <= 0:
            raise InputError("delta must be positive")
        for c in self.cells:
            if len(c) != self.n:
                raise InputError(f"cell {c} does not have {self.n} coordinates")

    @property
    def variant(self) -> str:
        return "voxel"

    def require_nonempty(self):
        if not self.cells:
            raise InputError("operation requires a non-empty voxel set")

    def bbox(self) -> tuple[tuple[int, int], ...]:
        self.require_nonempty()
        return tuple(
            (min(c[i] for c in self.cells), max(c[i] for c in self.cells))
            for i in range(self.n)
        )

    def cell_center(self, cell: Cell) -> Point:
        half = Fraction(1, 2)
        return tuple(self.delta * (coord + half) for coord in cell)

    def sorted_cells(self) -> tuple[Cell, ...]:
        return tuple(sorted(self.cells))


@dataclass(frozen=True)
class NetSpace:
    metric: str  # "linf" | "l2" | "l1" | "matrix"
    points: tuple[tuple[float, ...], ...]
    eps_net: float = 0.0
    matrix: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.metric not in ("linf", "l2", "l1", "matrix"):
            raise InputError(f"unknown metric {self.metric!r}")
        if self.eps_net < 0:
            raise InputError("eps_net must be >= 0")
        if self.metric == "matrix":
            validate_metric_matrix(self.matrix, len(self.points))

    @property
    def variant(self) -> str:
        return "net"

    def require_nonempty(self):
        if not self.points:
            raise InputError("operation requires a non-empty net")

    def dist(self, i: int, j: int) -> float:
        if self.metric == "matrix":
            return self.matrix[i][j]
        a, b = self.points[i], self.points[j]
        if len(a) != len(b):
            raise InputError("dimension mismatch between net points")
        if self.metric == "linf":
            return max(abs(x - y) for x, y in zip(a, b))
        if self.metric == "l1":
            return sum(abs(x - y) for x, y in zip(a, b))
        return sum((x - y) ** 2 for x, y in zip(a, b)) ** 0.5


Space = VoxelSpace | NetSpace


def validate_metric_matrix(matrix, count: int):
    if matrix is None:
        raise InputError("matrix metric requires a distance matrix")
    if len(matrix) != count or any(len(row) != count for row in matrix):
        raise InputError("distance matrix must be square and match the point count")
    for i in range(count):
        if abs(matrix[i][i]) > TOL:
            raise InputError("distance matrix diagonal must be zero")
        for j in range(count):
            if matrix[i][j] < -TOL:
                raise InputError("distances must be non-negative")
            if abs(matrix[i][j] - matrix[j][i]) > TOL:
                raise InputError("distance matrix must be symmetric")
    for i, j, k in itertools.permutations(range(count), 3):
        if matrix[i][j] > matrix[i][k] + matrix[k][j] + TOL:
            raise InputError(
                f"triangle inequality violated on points ({i},{j},{k})"
            )


# ---------------------------------------------------------------------------
# elementary geometry

def linf(a, b) -> Scalar:
    if len(a) != len(b):
        raise InputError("dimension mismatch")
    return max(abs(x - y) for x, y in zip(a, b))


def distance(p, q, space: Space) -> Scalar:
    """Metric distance between two points of the model.

    For voxel spaces, arguments may be cells (integer tuples) or coordinate
    points; cells are measured at their centers.  For nets, arguments are
    point indices.
    """
    if isinstance(space, VoxelSpace):
        pp = space.cell_center(p) if _is_cell(p) else p
        qq = space.cell_center(q) if _is_cell(q) else q
        return linf(pp, qq)
    if not (isinstance(p, int) and isinstance(q, int)):
        raise InputError("net distances are between point indices")
    if not (0 <= p < len(space.points) and 0 <= q < len(space.points)):
        raise InputError(f"unknown point id {p if p >= len(space.points) else q}")
    return space.dist(p, q)


def _is_cell(x) -> bool:
    return isinstance(x, tuple) and all(isinstance(c, int) for c in x)


# ---------------------------------------------------------------------------
# balls

@dataclass(frozen=True, order=True)
class Ball:
    center: Point
    radius: Scalar

    def __post_init__(self):
        if self.radius < 0:
            raise InputError("ball radius must be non-negative")

    def key(self):
        return (self.center, self.radius)

    def to_dict(self) -> dict:
        return {
            "center": [fmt_scalar(c) for c in self.center],
            "radius": fmt_scalar(self.radius),
        }

    @staticmethod
    def from_dict(d: dict) -> "Ball":
        return Ball(
            tuple(parse_scalar(c) for c in d["center"]),
            parse_scalar(d["radius"]),
        )


def grid_ball(space: VoxelSpace, anchor: Cell, k: int) -> Ball:
    """The axis cube spanning cells anchor .. anchor+k-1 in each coordinate:
    an l_inf ball of radius k*delta/2 at a half-integer grid point."""
    if k < 1:
        raise InputError("grid ball size must be >= 1")
    half = Fraction(k, 2)
    center = tuple(space.delta * (a + half) for a in anchor)
    return Ball(center, space.delta * half)


def min_enclosing_ball_linf(points) -> Ball:
    """Chebyshev ball of a point set: bounding-box midpoint, radius half the
    largest side."""
    points = list(points)
    if not points:
        raise InputError("cannot enclose an empty point set")
    n = len(points[0])
    lo = [min(as_fraction(p[i]) for p in points) for i in range(n)]
    hi = [max(as_fraction(p[i]) for p in points) for i in range(n)]
    center = tuple((a + b) / 2 for a, b in zip(lo, hi))
    radius = max((b - a) / 2 for a, b in zip(lo, hi))
    return Ball(center, radius)


def ball_members(ball: Ball, space: Space) -> frozenset:
    """Cells (voxel) or point indices (net) within the closed ball."""
    if isinstance(space, VoxelSpace):
        if len(ball.center) != space.n:
            raise InputError("ball dimension does not match the space")
        r = ball.radius if isinstance(ball.radius, Fraction) else as_fraction(ball.radius)
        center = ball.center
        # Integer-interval test per coordinate: |delta*(c+1/2) - center_i| <= r.
        ranges = []
        for i in range(space.n):
            lo = (center[i] - r) / space.delta - Fraction(1, 2)
            hi = (center[i] + r) / space.delta - Fraction(1, 2)
            ranges.append((ceil(lo), _floor_frac(hi)))
        out = []
        for c in space.cells:
            if all(ranges[i][0] <= c[i] <= ranges[i][1] for i in range(space.n)):
                out.append(c)
        return frozenset(out)
    members = []
    for i in range(len(space.points)):
        if _net_point_in_ball(ball, i, space):
            members.append(i)
    return frozenset(members)


def _net_point_in_ball(ball: Ball, idx: int, space: NetSpace) -> bool:
    if space.metric == "matrix":
        # centers of matrix-net balls are point indices wrapped in a 1-tuple
        ci = int(ball.center[0])
        return space.dist(ci, idx) <= float(ball.radius) + TOL
    d = linf(tuple(float(c) for c in ball.center), space.points[idx]) \
        if space.metric == "linf" else _net_coord_dist(ball.center, space.points[idx], space.metric)
    return d <= float(ball.radius) + TOL


def _net_coord_dist(a, b, metric: str) -> float:
    af = tuple(float(x) for x in a)
    if metric == "l1":
        return sum(abs(x - y) for x, y in zip(af, b))
    return sum((x - y) ** 2 for x, y in zip(af, b)) ** 0.5


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def neighborhood(space: Space, rho: Scalar) -> VoxelSpace:
    """All cells within l_inf distance rho of an occupied cell.

    The cell-count expansion uses ceil(rho/delta) so that composing two
    neighborhoods can only enlarge the single combined one.
    """
    if not isinstance(space, VoxelSpace):
        raise InputError("neighborhoods are only defined in the voxel model")
    if rho < 0:
        raise InputError("rho must be >= 0")
    k = ceil(as_fraction(rho) / space.delta)
    if k == 0 or not space.cells:
        return space
    offsets = list(itertools.product(range(-k, k + 1), repeat=space.n))
    grown = set()
    for c in space.cells:
        for off in offsets:
            grown.add(tuple(a + b for a, b in zip(c, off)))
    return VoxelSpace(space.n, space.delta, frozenset(grown))


def space_radius(space: VoxelSpace) -> Fraction:
    """Radius of the smallest enclosing l_inf ball of the occupied region
    (cells taken as closed cubes)."""
    space.require_nonempty()
    return max((hi - lo + 1) for lo, hi in space.bbox()) * space.delta / 2


def space_diameter(space: VoxelSpace) -> Fraction:
    return 2 * space_radius(space)


# ---------------------------------------------------------------------------
# ball families

@dataclass(frozen=True)
class AllGridBalls:
    """Every grid ball; `stride` restricts anchors and sizes to multiples of
    a base step (the rescaled family used by the scaling law)."""
    stride: int = 1

    kind = "all-grid"


@dataclass(frozen=True)
class CentersIn:
    points: tuple[Point, ...]

    kind = "centers-in"

    def __post_init__(self):
        if not self.points:
            raise InputError("CentersIn family requires a non-empty center set")


@dataclass(frozen=True)
class FixedFamily:
    balls: tuple[Ball, ...]

    kind = "fixed"

    def __post_init__(self):
        if not self.balls:
            raise InputError("Fixed family requires at least one ball")


@dataclass(frozen=True)
class RadiusCapped:
    limit: Scalar

    kind = "radius-capped"

    def __post_init__(self):
        if self.limit <= 0:
            raise InputError("radius cap must be positive")


@dataclass(frozen=True)
class FamilyIntersection:
    parts: tuple

    kind = "intersection"


BallFamily = AllGridBalls | CentersIn | FixedFamily | RadiusCapped | FamilyIntersection


def intersect_families(a: BallFamily, b: BallFamily) -> BallFamily:
    parts = []
    for f in (a, b):
        parts.extend(f.parts if isinstance(f, FamilyIntersection) else (f,))
    return FamilyIntersection(tuple(parts))


def family_label(family: BallFamily) -> str:
    if isinstance(family, FamilyIntersection):
        return " & ".join(family_label(p) for p in family.parts)
    if isinstance(family, AllGridBalls) and family.stride != 1:
        return f"all-grid/stride={family.stride}"
    if isinstance(family, RadiusCapped):
        return f"radius<={fmt_scalar(family.limit)}"
    if isinstance(family, FixedFamily):
        return f"fixed[{len(family.balls)}]"
    if isinstance(family, CentersIn):
        return f"centers-in[{len(family.points)}]"
    return family.kind


# ---------------------------------------------------------------------------
# coverings

@dataclass(frozen=True)
class Covering:
    balls: tuple[Ball, ...]
    target: frozenset
    m: Scalar
    cost: Scalar = field(default=None)  # recomputed in __post_init__

    def __post_init__(self):
        from .exact import power
        total = sum(power(b.radius, self.m) for b in self.balls)
        object.__setattr__(self, "cost", total)

    def validate(self, space: Space) -> None:
        """Exact coverage check: every target element inside some ball."""
        covered = set()
        for b in self.balls:
            covered |= ball_members(b, space)
        missing = set(self.target) - covered
        if missing:
            raise InputError(f"covering misses {len(missing)} target elements")

    def to_dict(self) -> dict:
        return {
            "m": fmt_scalar(self.m),
            "cost": fmt_scalar(self.cost),
            "balls": [b.to_dict() for b in sorted(self.balls)],
            "target": sorted(list(t) if isinstance(t, tuple) else t for t in self.target),
        }


# ---------------------------------------------------------------------------
# serialization

def space_to_dict(space: Space) -> dict:
    if isinstance(space, VoxelSpace):
        return {
            "variant": "voxel",
            "n": space.n,
            "delta": fmt_scalar(space.delta),
            "cells": sorted(list(c) for c in space.cells),
        }
    d = {
        "variant": "net",
        "metric": space.metric,
        "points": [list(p) for p in space.points],
        "eps_net": space.eps_net,
    }
    if space.matrix is not None:
        d["matrix"] = [list(r) for r in space.matrix]
    return d


def space_from_dict(d: dict) -> Space:
    try:
        variant = d["variant"]
    except (KeyError, TypeError):
        raise InputError("space document must carry a 'variant' field")
    if variant == "voxel":
        return VoxelSpace(
            int(d["n"]),
            parse_scalar(d["delta"]),
            frozenset(tuple(int(x) for x in c) for c in d["cells"]),
        )
    if variant == "net":
        return NetSpace(
            d.get("metric", "linf"),
            tuple(tuple(float(x) for x in p) for p in d["points"]),
            float(d.get("eps_net", 0.0)),
            tuple(tuple(float(x) for x in r) for r in d["matrix"]) if "matrix" in d else None,
        )
    raise InputError(f"unknown space variant {variant!r}")


def load_space(path: str) -> Space:
    import csv
    import json

    if str(path).endswith(".csv"):
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
        points = tuple(tuple(float(x) for x in row) for row in rows)
        return NetSpace("linf", points)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})")
    return space_from_dict(doc)


def load_matrix_net(path: str, eps_net: float = 0.0) -> NetSpace:
    """Square CSV of pairwise distances -> matrix-metric net."""
    import csv

    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    matrix = tuple(tuple(float(x) for x in row) for row in rows)
    points = tuple((float(i),) for i in range(len(matrix)))
    return NetSpace("matrix", points, eps_net, matrix)


def save_space(space: Space, path: str) -> None:
    import json

    with open(path, "w") as fh:
        json.dump(space_to_dict(space), fh, sort_keys=True)
        fh.write("\n")
