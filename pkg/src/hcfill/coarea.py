"""Level-set slicing through a covering: per-ball value intervals, the exact
majorant integral and the best-slice selection.

For a Lipschitz function f on a covered set U, each covering ball B_i pins f
to an interval of width at most 2*Lip*r_i.  Integrating the step function
R -> sum of r_i^(m-1) over balls whose interval contains R therefore costs at
most 2*Lip*(covering cost in dimension m), and some slice level R realizes
cost at most 2*Lip/(R2-R1) times the covering cost.  The integral is a finite
sum over interval lengths; no quadrature is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .exact import Scalar, as_fraction, fmt_scalar, power
from .space import Covering, VoxelSpace, linf

_HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# function descriptors

@dataclass(frozen=True)
class DistanceToPoint:
    point: tuple
    lip: Fraction = Fraction(1)

    def cell_interval(self, space: VoxelSpace, cell):
        d = linf(space.cell_center(cell), self.point)
        h = space.delta * _HALF
        return (max(Fraction(0), as_fraction(d) - h), as_fraction(d) + h)


@dataclass(frozen=True)
class DistanceToSet:
    cells: frozenset
    lip: Fraction = Fraction(1)

    def cell_interval(self, space: VoxelSpace, cell):
        c = space.cell_center(cell)
        d = min(as_fraction(linf(c, space.cell_center(t))) for t in self.cells)
        h = space.delta * _HALF
        return (max(Fraction(0), d - h), d + h)


@dataclass(frozen=True)
class ExplicitValues:
    values: dict
    lip: Scalar

    def cell_interval(self, space, cell):
        try:
            v = self.values[cell]
        except KeyError:
            raise InputError(f"function undefined on element {cell}")
        return (v, v)

    def validate(self, space: VoxelSpace, domain, tol: float = 1e-9):
        """The declared Lipschitz constant must hold on every pair."""
        missing = set(domain) - set(self.values)
        if missing:
            raise InputError(f"function undefined on {len(missing)} elements")
        elems = sorted(domain)
        for i, a in enumerate(elems):
            for b in elems[i + 1:]:
                d = float(linf(space.cell_center(a), space.cell_center(b)))
                if abs(float(self.values[a]) - float(self.values[b])) > float(self.lip) * d + tol:
                    raise InputError(
                        f"declared Lipschitz constant {self.lip} violated on pair {a}, {b}"
                    )


FunctionDescriptor = DistanceToPoint | DistanceToSet | ExplicitValues


# ---------------------------------------------------------------------------
# slice profiles

@dataclass(frozen=True)
class SliceProfile:
    descriptor: FunctionDescriptor
    cover: Covering
    intervals: tuple  # per covering ball: (a_i, b_i) over covered elements
    range: tuple  # (R1, R2)
    cell_intervals: dict

    @property
    def lip(self) -> Scalar:
        return self.descriptor.lip

    def level_set(self, level) -> frozenset:
        """Elements whose value interval contains the level (conservative:
        never misses a continuum crossing)."""
        return frozenset(
            c for c, (a, b) in self.cell_intervals.items() if a <= level <= b
        )

    def to_dict(self) -> dict:
        return {
            "range": [fmt_scalar(x) for x in self.range],
            "intervals": [[fmt_scalar(a), fmt_scalar(b)] for a, b in self.intervals],
        }


def slice_profile(
    space: VoxelSpace,
    domain,
    descriptor: FunctionDescriptor,
    cover: Covering,
    rng: tuple | None = None,
) -> SliceProfile:
    """Per-ball min/max of the function over covered elements.

    Raises if a ball's interval exceeds the 2*Lip*r_i width that the slicing
    argument rests on (cannot happen for grid-ball covers).
    """
    domain = frozenset(domain)
    if isinstance(descriptor, ExplicitValues):
        descriptor.validate(space, domain)
    cell_ints = {c: descriptor.cell_interval(space, c) for c in domain}
    from .space import ball_members

    intervals = []
    for ball in cover.balls:
        members = ball_members(ball, space) & domain
        if not members:
            intervals.append(None)
            continue
        a = min(cell_ints[c][0] for c in members)
        b = max(cell_ints[c][1] for c in members)
        width_ok = float(b - a) <= 2.0 * float(descriptor.lip) * float(ball.radius) + 1e-9
        if not width_ok:
            raise InputError(
                "covering ball pins the function to an interval wider than "
                "2*Lip*r; is the declared Lipschitz constant right?"
            )
        intervals.append((a, b))
    if rng is None:
        lo = min(v[0] for v in cell_ints.values())
        hi = max(v[1] for v in cell_ints.values())
        rng = (lo, hi)
    return SliceProfile(descriptor, cover, tuple(intervals), tuple(rng), cell_ints)


def coarea_integral(profile: SliceProfile, m: Scalar) -> Scalar:
    """Exact value of the majorant integral: sum over balls of
    r_i^(m-1) * |interval_i clipped to the range|."""
    r1, r2 = profile.range
    total = None
    for ball, interval in zip(profile.cover.balls, profile.intervals):
        if interval is None:
            continue
        lo, hi = max(interval[0], r1), min(interval[1], r2)
        if hi <= lo:
            continue
        term = power(ball.radius, as_fraction(m) - 1) * (hi - lo)
        total = term if total is None else total + term
    return total if total is not None else Fraction(0)


def best_slice(profile: SliceProfile, m: Scalar):
    """Level R in the profile range minimizing the slice majorant
    sum over balls with interval containing R of r_i^(m-1).

    The majorant is a step function with breakpoints at interval endpoints,
    so it is evaluated at every endpoint and at every midpoint between
    consecutive endpoints; ties resolve to the smallest R.
    """
    r1, r2 = profile.range
    if not r2 > r1:
        raise InputError("degenerate slice range")
    points = {as_fraction(r1), as_fraction(r2)}
    for interval in profile.intervals:
        if interval is None:
            continue
        for v in interval:
            v = as_fraction(v)
            if r1 <= v <= r2:
                points.add(v)
    sorted_pts = sorted(points)
    candidates = list(sorted_pts)
    for a, b in zip(sorted_pts, sorted_pts[1:]):
        candidates.append((a + b) / 2)
    candidates.sort()

    exponent = as_fraction(m) - 1
    weights = [
        None if interval is None else as_fraction(power(ball.radius, exponent))
        for ball, interval in zip(profile.cover.balls, profile.intervals)
    ]
    best_r = None
    best_cost = None
    for r in candidates:
        cost = Fraction(0)
        for weight, interval in zip(weights, profile.intervals):
            if interval is not None and interval[0] <= r <= interval[1]:
                cost += weight
        if best_cost is None or cost < best_cost or (cost == best_cost and r < best_r):
            best_r, best_cost = r, cost
    return best_r, best_cost
