"""Hausdorff content of finite models under restricted ball families.

The m-dimensional content of a target is the minimum of sum(r_i^m) over
coverings by balls from the family.  `exact_content` solves the weighted
set-cover instance by branch and bound with an LP-dual-feasible ratio bound
(exact rational arithmetic for integer m); `greedy_content` gives the usual
ratio-greedy upper bound.  Net-model answers are brackets: the optimum over
net-centered balls, deflated by eps_net on the lower side.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError, UncoverableError
from .exact import Scalar, as_fraction, fmt_scalar, is_integral, power
from .space import (
    AllGridBalls,
    Ball,
    BallFamily,
    CentersIn,
    Covering,
    FamilyIntersection,
    FixedFamily,
    NetSpace,
    RadiusCapped,
    Space,
    VoxelSpace,
    ball_members,
    family_label,
    grid_ball,
    linf,
)

DEFAULT_NODE_BUDGET = 10**6


@dataclass(frozen=True)
class ContentResult:
    m: Scalar
    family: str
    value_lower: Scalar
    value_upper: Scalar
    optimal: bool
    witness: Covering
    certificate: dict
    exact_arithmetic: bool

    def __post_init__(self):
        if float(self.value_lower) > float(self.value_upper) + 1e-12:
            raise InputError("content bracket is inverted")
        if self.optimal and self.value_lower != self.value_upper:
            raise InputError("optimal result must have a degenerate bracket")

    @property
    def value(self) -> Scalar:
        return self.value_upper

    def to_dict(self) -> dict:
        return {
            "m": fmt_scalar(self.m),
            "family": self.family,
            "value_lower": fmt_scalar(self.value_lower),
            "value_upper": fmt_scalar(self.value_upper),
            "optimal": self.optimal,
            "exact_arithmetic": self.exact_arithmetic,
            "witness": self.witness.to_dict(),
            "certificate": self.certificate,
        }


@dataclass(frozen=True)
class _Candidate:
    ball: Ball
    mask: int
    cost: Scalar


# ---------------------------------------------------------------------------
# candidate generation

def _flatten_family(family: BallFamily):
    caps = []
    core = None
    parts = family.parts if isinstance(family, FamilyIntersection) else (family,)
    for part in parts:
        if isinstance(part, RadiusCapped):
            caps.append(as_fraction(part.limit))
        elif core is None:
            core = part
        else:
            raise InputError("cannot intersect two non-cap ball families")
    if core is None:
        core = AllGridBalls()
    cap = min(caps) if caps else None
    return core, cap


def _voxel_grid_candidates(space: VoxelSpace, target, m, stride, cap):
    cells = sorted(target)
    index = {c: i for i, c in enumerate(cells)}
    lo = [min(c[i] for c in cells) for i in range(space.n)]
    hi = [max(c[i] for c in cells) for i in range(space.n)]
    k_max = max(h - l + 1 for l, h in zip(lo, hi))
    k_max += (-k_max) % stride
    exact = is_integral(m)
    out = []
    for k in range(stride, k_max + 1, stride):
        radius = space.delta * Fraction(k, 2)
        if cap is not None and radius > cap:
            break
        cost = power(radius, m)
        anchor_ranges = []
        for i in range(space.n):
            a_lo = lo[i] - k + 1
            if stride > 1:
                a_lo += (-a_lo) % stride
            anchor_ranges.append(range(a_lo, hi[i] + 1, stride))
        for anchor in itertools.product(*anchor_ranges):
            mask = 0
            count = 0
            for cell in itertools.product(
                *(range(max(a, l), min(a + k - 1, h) + 1)
                  for a, l, h in zip(anchor, lo, hi))
            ):
                idx = index.get(cell)
                if idx is not None:
                    mask |= 1 << idx
                    count += 1
            if count == 0:
                continue
            # a block whose cost reaches that of `count` unit balls is
            # dominated by the singles it contains: cost ratio is k^m
            if stride == 1 and k > 1:
                dominated = k ** int(m) >= count if exact \
                    else float(k) ** float(m) >= count - 1e-12
                if dominated:
                    continue
            out.append(_Candidate(grid_ball(space, anchor, k), mask, cost))
    return out, index


def _point_candidates(space: Space, target, m, centers, cap):
    """Balls centered at the given points with radii from the distance set to
    target elements (the covering optimum over real radii is attained there)."""
    elems = sorted(target)
    index = {c: i for i, c in enumerate(elems)}
    voxel = isinstance(space, VoxelSpace)
    out = []
    for center in centers:
        if voxel:
            dists = sorted({linf(space.cell_center(c), center) for c in elems})
        else:
            dists = sorted({_net_center_dist(space, center, e) for e in elems})
            dists = [d for d in dists if d > 0.0] or dists[:1]
        seen = set()
        for r in dists:
            if cap is not None and as_fraction(r) > cap:
                break
            ball = Ball(center, r if isinstance(r, Fraction) else float(r))
            members = ball_members(ball, space)
            mask = 0
            for e in members:
                if e in index:
                    mask |= 1 << index[e]
            if mask and mask not in seen:
                seen.add(mask)
                out.append(_Candidate(ball, mask, power(as_fraction(r), m)))
    return out, index


def _net_center_dist(space: NetSpace, center, e: int) -> float:
    if space.metric == "matrix":
        return space.dist(int(center[0]), e)
    cf = tuple(float(x) for x in center)
    pt = space.points[e]
    if space.metric == "linf":
        return max(abs(a - b) for a, b in zip(cf, pt))
    if space.metric == "l1":
        return sum(abs(a - b) for a, b in zip(cf, pt))
    return sum((a - b) ** 2 for a, b in zip(cf, pt)) ** 0.5


def _fixed_candidates(space: Space, target, m, balls, cap):
    elems = sorted(target)
    index = {c: i for i, c in enumerate(elems)}
    out = []
    for ball in balls:
        if cap is not None and as_fraction(ball.radius) > cap:
            continue
        members = ball_members(ball, space)
        mask = 0
        for e in members:
            if e in index:
                mask |= 1 << index[e]
        if mask:
            out.append(_Candidate(ball, mask, power(ball.radius, m)))
    return out, index


def generate_candidates(space: Space, target, m: Scalar, family: BallFamily):
    core, cap = _flatten_family(family)
    if isinstance(core, AllGridBalls):
        if isinstance(space, NetSpace):
            centers = _net_centers(space)
            cands, index = _point_candidates(space, target, m, centers, cap)
        else:
            cands, index = _voxel_grid_candidates(space, target, m, core.stride, cap)
    elif isinstance(core, CentersIn):
        cands, index = _point_candidates(space, target, m, core.points, cap)
    elif isinstance(core, FixedFamily):
        cands, index = _fixed_candidates(space, target, m, core.balls, cap)
    else:
        raise InputError(f"unsupported ball family {core!r}")

    best: dict[int, _Candidate] = {}
    for cand in cands:
        cur = best.get(cand.mask)
        if cur is None or (cand.cost, cand.ball.key()) < (cur.cost, cur.ball.key()):
            best[cand.mask] = cand
    cands = sorted(best.values(), key=lambda c: (c.cost, c.ball.key()))

    # full dominance pass only when small enough to pay for itself
    if len(cands) <= 2000:
        kept: list[_Candidate] = []
        for cand in cands:
            if not any(
                other.mask | cand.mask == other.mask and other.cost <= cand.cost
                for other in kept
            ):
                kept.append(cand)
        cands = kept
    return cands, index


def _net_centers(space: NetSpace):
    if space.metric == "matrix":
        return [(Fraction(i),) for i in range(len(space.points))]
    return [tuple(float(x) for x in p) for p in space.points]


# ---------------------------------------------------------------------------
# lower bounds

def _ratio_duals(cands, n_elems):
    """LP-dual-feasible element prices y_e = min over balls containing e of
    cost/|members|: for every ball, sum over its members of y is <= its cost,
    so sum(y) lower-bounds every cover from the family."""
    duals = [None] * n_elems
    for cand in cands:
        ratio = cand.cost / cand.mask.bit_count()
        mask = cand.mask
        while mask:
            low = mask & -mask
            e = low.bit_length() - 1
            if duals[e] is None or ratio < duals[e]:
                duals[e] = ratio
            mask ^= low
    return duals


def _dual_bound(cands, uncovered):
    """Ratio bound recomputed against the current uncovered set."""
    if not uncovered:
        return 0
    best = {}
    for cand in cands:
        inter = cand.mask & uncovered
        if not inter:
            continue
        ratio = cand.cost / inter.bit_count()
        mask = inter
        while mask:
            low = mask & -mask
            cur = best.get(low)
            if cur is None or ratio < cur:
                best[low] = ratio
            mask ^= low
    return sum(best.values())


def volume_lower_bound(space: VoxelSpace, target=None, m: Scalar = 1) -> Scalar:
    """(V_target)^(m/n) / 2^m with V = cell count * delta^n.

    Sound for any covering by l_inf balls: the covering cubes' total volume
    must reach V (so sum (2r_i)^n >= V) and the power-mean inequality turns
    the n-sum into a bound on sum r_i^m.
    """
    if not isinstance(space, VoxelSpace):
        raise InputError("volume bound needs the voxel model")
    cells = set(target) if target is not None else set(space.cells)
    volume = as_fraction(len(cells)) * power(space.delta, space.n)
    exponent = Fraction(as_fraction(m), space.n) if is_integral(m) else None
    two_m = power(Fraction(2), m)
    if volume == 1:
        return 1 / two_m if not isinstance(two_m, float) else 1.0 / two_m
    if exponent is not None and exponent.denominator == 1:
        return power(volume, int(exponent)) / two_m
    return float(volume) ** (float(m) / space.n) / float(two_m)


# ---------------------------------------------------------------------------
# solvers

def _greedy_cover(cands, full):
    covered = 0
    chosen = []
    while covered != full:
        best = None
        best_key = None
        for cand in cands:
            new = (cand.mask | covered) ^ covered
            if not new:
                continue
            key = (cand.cost / new.bit_count(), cand.ball.key())
            if best is None or key < best_key:
                best, best_key = cand, key
        if best is None:
            raise UncoverableError("family cannot cover the target")
        chosen.append(best)
        covered |= best.mask
    return chosen


def greedy_content(
    space: Space,
    target=None,
    m: Scalar = 1,
    family: BallFamily = AllGridBalls(),
) -> ContentResult:
    """Iterative best-ratio covering; an upper bound by construction."""
    target = _resolve_target(space, target)
    cands, index = generate_candidates(space, target, m, family)
    chosen = _greedy_cover(cands, (1 << len(index)) - 1)
    witness = Covering(tuple(c.ball for c in chosen), frozenset(target), m)
    lower = _net_deflated_cost(space, witness) if isinstance(space, NetSpace) else _zero(witness.cost)
    return ContentResult(
        m, family_label(family), lower, witness.cost, False, witness,
        {"kind": "greedy"}, _exact_mode(space, m),
    )


def exact_content(
    space: Space,
    target=None,
    m: Scalar = 1,
    family: BallFamily = AllGridBalls(),
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ContentResult:
    """Branch-and-bound optimum of the covering cost.

    Branches on the uncovered element with the fewest candidate balls, prunes
    with the ratio-dual bound and memoized covered-set dominance, and returns
    a certified bracket instead of failing when the node budget runs out.
    """
    target = _resolve_target(space, target)
    cands, index = generate_candidates(space, target, m, family)
    n_elems = len(index)
    full = (1 << n_elems) - 1

    covers_elem = [[] for _ in range(n_elems)]
    for ci, cand in enumerate(cands):
        mask = cand.mask
        while mask:
            low = mask & -mask
            covers_elem[low.bit_length() - 1].append(ci)
            mask ^= low
    for e in range(n_elems):
        if not covers_elem[e]:
            raise UncoverableError("family cannot cover the target")

    chosen = _greedy_cover(cands, full)
    best_cost = sum(c.cost for c in chosen)
    best_sel = [c.ball for c in chosen]

    duals = _ratio_duals(cands, n_elems)
    root_dual = sum(duals)

    nodes = 0
    budget_hit = False
    frontier_lower = None
    memo: dict[int, Scalar] = {}
    stack = [(0, _zero(cands[0].cost if cands else 0), ())]
    while stack:
        covered, cost, sel = stack.pop()
        nodes += 1
        bound = cost + _dual_bound(cands, full ^ covered)
        if nodes > node_budget:
            budget_hit = True
            frontier_lower = bound if frontier_lower is None else min(frontier_lower, bound)
            continue
        if covered == full:
            if cost < best_cost:
                best_cost = cost
                best_sel = [cands[i].ball for i in sel]
            continue
        seen = memo.get(covered)
        if seen is not None and seen <= cost:
            continue
        memo[covered] = cost
        if bound >= best_cost:
            continue
        pick, pick_count = -1, None
        mask = full ^ covered
        while mask:
            low = mask & -mask
            e = low.bit_length() - 1
            if pick_count is None or len(covers_elem[e]) < pick_count:
                pick, pick_count = e, len(covers_elem[e])
            mask ^= low
        for ci in reversed(covers_elem[pick]):
            cand = cands[ci]
            stack.append((covered | cand.mask, cost + cand.cost, sel + (ci,)))

    witness = Covering(tuple(best_sel), frozenset(target), m)
    lowers = [root_dual]
    core, _ = _flatten_family(family)
    if isinstance(space, VoxelSpace) and isinstance(core, AllGridBalls) and core.stride == 1:
        lowers.append(volume_lower_bound(space, target, m))
    if budget_hit:
        if frontier_lower is not None:
            lowers.append(min(frontier_lower, best_cost))
        lower = max(lowers)
        optimal = False
    else:
        lower = best_cost
        optimal = True

    if isinstance(space, NetSpace):
        optimal = False
        lower = _net_deflated_cost(space, witness)

    cert = {
        "kind": "branch-and-bound" if optimal else "bracket",
        "nodes": nodes,
        "lp_dual_lower": fmt_scalar(root_dual),
        "duals": [fmt_scalar(d) for d in duals],
    }
    return ContentResult(
        m, family_label(family), lower, best_cost, optimal, witness, cert,
        _exact_mode(space, m),
    )


def content_ball_scan(space: Space, m: Scalar, R: Scalar, family=AllGridBalls()):
    """Exact content of B(center, R) within the space, for every occupied
    element as center; also the maximum ratio HC_m(ball)/R^m."""
    if R <= 0:
        raise InputError("R must be positive")
    results = []
    max_ratio = 0.0
    if isinstance(space, VoxelSpace):
        centers = [(c, space.cell_center(c)) for c in space.sorted_cells()]
    else:
        centers = [(i, c) for i, c in enumerate(_net_centers(space))]
    rm = float(power(as_fraction(R), m))
    for label, point in centers:
        members = ball_members(Ball(point, as_fraction(R)), space)
        if not members:
            continue
        res = exact_content(space, members, m, family)
        results.append((label, res))
        max_ratio = max(max_ratio, float(res.value_upper) / rm)
    return results, max_ratio


def merge_to_disjoint(balls, exponent: Scalar):
    """Fold intersecting balls into single containing balls until disjoint.

    The merged ball has radius r_a + r_b and its center sits on the segment
    between the old centers, so for exponent e <= 1 the cost sum(r^e) never
    increases: (r_a+r_b)^e <= r_a^e + r_b^e.
    """
    if float(exponent) > 1.0 + 1e-12:
        raise InputError("disjoint merging needs exponent <= 1")
    current = sorted(balls)
    changed = True
    while changed:
        changed = False
        for i in range(len(current)):
            for j in range(i + 1, len(current)):
                a, b = current[i], current[j]
                d = linf(a.center, b.center)
                if d > a.radius + b.radius:
                    continue
                merged = Ball(_merge_center(a, b, d), a.radius + b.radius)
                current = [x for k, x in enumerate(current) if k not in (i, j)]
                current.append(merged)
                current.sort()
                changed = True
                break
            if changed:
                break
    return current


def _merge_center(a: Ball, b: Ball, d):
    # Point on [center_a, center_b] within r_a of b's center and within r_b
    # of a's center; the (r_a+r_b)-ball there contains both inputs.
    if d == 0:
        return a.center
    t = min(as_fraction(a.radius), as_fraction(d)) / as_fraction(d)
    return tuple(bc + (ac - bc) * t for ac, bc in zip(a.center, b.center))


# ---------------------------------------------------------------------------
# helpers

def _resolve_target(space: Space, target):
    if target is None:
        space.require_nonempty()
        if isinstance(space, VoxelSpace):
            return frozenset(space.cells)
        return frozenset(range(len(space.points)))
    target = frozenset(target)
    if not target:
        raise InputError("target must be non-empty")
    return target


def _exact_mode(space: Space, m: Scalar) -> bool:
    return isinstance(space, VoxelSpace) and is_integral(m)


def _zero(like) -> Scalar:
    return 0.0 if isinstance(like, float) else Fraction(0)


def _net_deflated_cost(space: NetSpace, witness: Covering) -> float:
    """Same cover with radii deflated by eps_net, clamped at zero."""
    total = 0.0
    for ball in witness.balls:
        total += max(0.0, float(ball.radius) - space.eps_net) ** float(witness.m)
    return total
