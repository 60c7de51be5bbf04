import itertools
import random
from fractions import Fraction

import pytest

from hcfill.content import (
    exact_content,
    generate_candidates,
    greedy_content,
    merge_to_disjoint,
    volume_lower_bound,
)
from hcfill.errors import InputError, UncoverableError
from hcfill.shapes import make_box, make_cube, random_blob, random_subset, scale_replicate
from hcfill.space import (
    AllGridBalls,
    Ball,
    CentersIn,
    FixedFamily,
    NetSpace,
    RadiusCapped,
    grid_ball,
    intersect_families,
    linf,
)


def brute_force_optimum(space, target, m, family=AllGridBalls()):
    """Independent oracle: exhaustive DFS over the candidate set with only
    incumbent pruning."""
    cands, index = generate_candidates(space, frozenset(target), m, family)
    full = (1 << len(index)) - 1
    best = [None]

    def rec(covered, cost):
        if best[0] is not None and cost >= best[0]:
            return
        if covered == full:
            best[0] = cost
            return
        low = (full ^ covered) & -(full ^ covered)
        e = low.bit_length() - 1
        for c in cands:
            if c.mask >> e & 1:
                rec(covered | c.mask, cost + c.cost)

    rec(0, Fraction(0) if not isinstance(cands[0].cost, float) else 0.0)
    return best[0]


def test_unit_square_contents():
    s = make_cube(2, 4, Fraction(1, 4))
    assert exact_content(s, None, 1).value == Fraction(1, 2)
    assert exact_content(s, None, 2).value == Fraction(1, 4)


def test_single_cell_any_m():
    s = make_cube(2, 1, Fraction(1, 8))
    for m in (1, 2, 3):
        assert exact_content(s, None, m).value == Fraction(1, 16) ** m
    res = exact_content(s, None, Fraction(5, 2))
    assert res.value == pytest.approx(float(Fraction(1, 16)) ** 2.5)
    assert not res.exact_arithmetic


def test_rectangle_value_pinned_by_brute_force():
    s = make_box(2, (8, 4), Fraction(1, 4))
    res = exact_content(s, None, 1)
    assert res.optimal
    assert res.value == brute_force_optimum(s, s.cells, 1)
    assert res.value == Fraction(1)  # frozen from the exhaustive search
    assert Fraction(1, 2) <= res.value <= Fraction(1)


def test_solver_matches_oracle_on_random_blobs(small_blobs):
    for s in small_blobs[:8]:
        res = exact_content(s, None, 1)
        assert res.optimal
        assert res.value == brute_force_optimum(s, s.cells, 1)


def test_greedy_upper_bounds_exact(small_blobs):
    for s in small_blobs[:6]:
        g = greedy_content(s, None, 1)
        e = exact_content(s, None, 1)
        assert g.value_upper >= e.value
        assert not g.optimal


def test_witness_is_verified_cover():
    s = random_blob(5, 2, 10, 5)
    res = exact_content(s, None, 1)
    res.witness.validate(s)
    assert res.witness.cost == res.value_upper


def test_volume_lower_bound_values():
    for n in (2, 3):
        s = make_cube(n, 8, Fraction(1, 8))
        for m in range(1, n + 1):
            assert volume_lower_bound(s, None, m) == Fraction(1, 2**m)
    half = make_box(2, (8, 4), Fraction(1, 8))  # half of the unit square
    assert volume_lower_bound(half, None, 1) == pytest.approx(0.5**0.5 / 2)


def test_lower_certificate_is_dual_feasible():
    s = random_blob(3, 2, 8, 4)
    res = exact_content(s, None, 1)
    cands, index = generate_candidates(s, frozenset(s.cells), 1, AllGridBalls())
    duals = [Fraction(d) for d in res.certificate["duals"]]
    assert sum(duals) <= res.value
    for cand in cands:
        total = sum(duals[i] for i in range(len(index)) if cand.mask >> i & 1)
        assert total <= cand.cost


def test_bracket_soundness_small_instances(small_blobs):
    # exhaustive optimum over <= 12 candidates must sit inside every bracket
    for s in small_blobs[:5]:
        target = random_subset(s, seed=hash(s.cells) % 997, keep=0.6)
        cands, index = generate_candidates(s, target, 1, AllGridBalls())
        if len(cands) > 12:
            continue
        full = (1 << len(index)) - 1
        best = None
        for picks in itertools.chain.from_iterable(
            itertools.combinations(range(len(cands)), k)
            for k in range(1, len(cands) + 1)
        ):
            mask = 0
            cost = Fraction(0)
            for i in picks:
                mask |= cands[i].mask
                cost += cands[i].cost
            if mask == full and (best is None or cost < best):
                best = cost
        res = exact_content(s, target, 1)
        assert res.value_lower <= best <= res.value_upper


def test_budget_exhaustion_returns_bracket():
    from hcfill.shapes import make_l_hexomino

    s = make_l_hexomino()
    optimum = exact_content(s, None, 1).value  # needs real branching
    res = exact_content(s, None, 1, node_budget=2)
    assert not res.optimal
    assert res.value_lower <= optimum <= res.value_upper
    assert res.certificate["kind"] == "bracket"


def test_subadditivity_and_monotonicity(small_blobs):
    rng = random.Random(0)
    for s in small_blobs[:8]:
        cells = s.sorted_cells()
        cut = rng.randrange(1, len(cells))
        a, b = frozenset(cells[:cut]), frozenset(cells[cut:])
        va = exact_content(s, a, 1).value
        vb = exact_content(s, b, 1).value
        vu = exact_content(s, a | b, 1).value
        assert vu <= va + vb
        assert va <= vu or a == frozenset(cells)  # monotone in the target
        sub = random_subset(s, seed=cut, keep=0.5)
        assert exact_content(s, sub, 1).value <= exact_content(s, None, 1).value


def test_rescaling_with_rescaled_family():
    for lam in (2, 3):
        s = random_blob(9, 2, 6, 4)
        scaled = scale_replicate(s, lam)
        base = exact_content(s, None, 2).value
        scaled_value = exact_content(scaled, None, 2, AllGridBalls(stride=lam)).value
        assert scaled_value == lam**2 * base
        # the unconstrained family can only do better
        assert exact_content(scaled, None, 2).value <= scaled_value


def test_dimension_comparison(small_blobs):
    # HC_k^(1/k) >= HC_m^(1/m) for m > k, cross-powered to stay rational
    for s in small_blobs[:8]:
        v1 = exact_content(s, None, 1).value
        v2 = exact_content(s, None, 2).value
        assert v1**2 >= v2


def test_family_restriction_monotonicity():
    s = random_blob(2, 2, 8, 4)
    base = exact_content(s, None, 1)
    q = base.witness.balls
    tilde = exact_content(s, None, 1, FixedFamily(q)).value
    centers = CentersIn(tuple(b.center for b in q))
    via_centers = exact_content(s, None, 1, centers).value
    assert tilde >= via_centers  # fixed radii are a subfamily of free radii
    capped = intersect_families(AllGridBalls(), RadiusCapped(Fraction(1, 8)))
    assert exact_content(s, None, 1, capped).value >= base.value


def test_fixed_family_uncoverable():
    s = make_cube(2, 3, Fraction(1, 4))
    lonely = FixedFamily((grid_ball(s, (0, 0), 1),))
    with pytest.raises(UncoverableError):
        exact_content(s, None, 1, lonely)


def test_radius_cap_limits_candidates():
    s = make_cube(2, 4, Fraction(1, 4))
    capped = intersect_families(AllGridBalls(), RadiusCapped(Fraction(1, 8)))
    res = exact_content(s, None, 1, capped)
    assert all(b.radius <= Fraction(1, 8) for b in res.witness.balls)
    assert res.value == 16 * Fraction(1, 8)


def test_merge_to_disjoint_examples():
    a = Ball((Fraction(0),), Fraction(1))
    b = Ball((Fraction(1),), Fraction(1))
    merged = merge_to_disjoint([a, b], 1)
    assert len(merged) == 1
    assert merged[0].radius == 2
    # cost did not go up: (r+s)^1 = r + s
    assert merged[0].radius == a.radius + b.radius
    for ball in (a, b):
        assert linf(ball.center, merged[0].center) + ball.radius <= merged[0].radius

    far = [Ball((Fraction(0),), Fraction(1)), Ball((Fraction(10),), Fraction(1))]
    assert merge_to_disjoint(far, 1) == sorted(far)


def test_merge_three_overlapping():
    balls = [
        Ball((Fraction(0), Fraction(0)), Fraction(1)),
        Ball((Fraction(1), Fraction(0)), Fraction(1)),
        Ball((Fraction(0), Fraction(1)), Fraction(1)),
    ]
    merged = merge_to_disjoint(balls, Fraction(1, 2))
    cost = sum(float(b.radius) ** 0.5 for b in merged)
    assert cost <= 3.0 + 1e-12
    for i, a in enumerate(merged):
        for b in merged[i + 1:]:
            assert linf(a.center, b.center) > a.radius + b.radius
        for src in balls:
            pass
    covered = set()
    for src in balls:
        hit = any(
            linf(src.center, m.center) + src.radius <= m.radius for m in merged
        )
        assert hit


def test_merge_rejects_large_exponent():
    with pytest.raises(InputError):
        merge_to_disjoint([Ball((Fraction(0),), Fraction(1))], Fraction(3, 2))


def test_net_bracket():
    net = NetSpace("linf", ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)), eps_net=0.25)
    res = exact_content(net, None, 1)
    assert not res.optimal
    assert res.value_lower <= res.value_upper
    assert res.value_upper > 0
    tight = NetSpace("linf", ((0.0, 0.0), (1.0, 0.0)), eps_net=0.0)
    res = exact_content(tight, None, 1)
    assert res.value_upper == pytest.approx(1.0)
    assert res.value_lower == pytest.approx(1.0)


def test_content_ball_scan_small_space():
    s = make_cube(2, 2, Fraction(1, 8))  # diameter 1/4 < R
    results, max_ratio = __import__("hcfill.content", fromlist=["content_ball_scan"]) \
        .content_ball_scan(s, 1, Fraction(1, 2))
    whole = exact_content(s, None, 1).value
    assert all(res.value == whole for _, res in results)
    assert max_ratio == pytest.approx(float(whole) / 0.5)


def test_content_ball_scan_single_cell():
    from hcfill.content import content_ball_scan

    s = make_cube(2, 1, Fraction(1, 8))
    results, max_ratio = content_ball_scan(s, 2, Fraction(1, 8))
    assert len(results) == 1
    assert results[0][1].value == Fraction(1, 16) ** 2


def test_content_ball_scan_dumbbell():
    from hcfill.content import content_ball_scan
    from hcfill.shapes import make_dumbbell

    s = make_dumbbell()
    results, max_ratio = content_ball_scan(s, 1, 2 * s.delta)
    assert len(results) == len(s.cells)
    # bridge centers see fewer cells than block centers
    values = {label: float(res.value) for label, res in results}
    assert min(values.values()) < max(values.values())


def test_centers_in_rejects_empty():
    with pytest.raises(InputError):
        CentersIn(())
