import itertools
import random
from fractions import Fraction

import pytest

from hcfill.errors import InputError
from hcfill.shapes import make_box, make_cube
from hcfill.space import (
    Ball,
    NetSpace,
    VoxelSpace,
    ball_members,
    distance,
    grid_ball,
    linf,
    load_space,
    min_enclosing_ball_linf,
    neighborhood,
    save_space,
    space_diameter,
    space_from_dict,
    space_radius,
    space_to_dict,
)


def test_distance_linf_and_l2():
    net = NetSpace("linf", ((0.0, 0.0), (3.0, 4.0)))
    assert distance(0, 1, net) == 4
    net2 = NetSpace("l2", ((0.0, 0.0), (3.0, 4.0)))
    assert distance(0, 1, net2) == 5
    assert distance(0, 0, net2) == 0


def test_distance_voxel_cells():
    s = make_cube(2, 4, Fraction(1, 4))
    assert distance((0, 0), (3, 0), s) == Fraction(3, 4)
    assert distance((1, 1), (1, 1), s) == 0


def test_distance_errors():
    net = NetSpace("linf", ((0.0, 0.0),))
    with pytest.raises(InputError):
        distance(0, 5, net)
    net2 = NetSpace("l2", ((0.0, 0.0), (1.0, 2.0, 3.0)))
    with pytest.raises(InputError):
        distance(0, 1, net2)


def test_min_enclosing_ball():
    b = min_enclosing_ball_linf([(0, 0), (1, 0)])
    assert b.center == (Fraction(1, 2), Fraction(0)) and b.radius == Fraction(1, 2)
    b = min_enclosing_ball_linf([(0, 0), (2, 1)])
    assert b.center == (Fraction(1), Fraction(1, 2)) and b.radius == 1
    b = min_enclosing_ball_linf([(5, 7)])
    assert b.center == (5, 7) and b.radius == 0
    with pytest.raises(InputError):
        min_enclosing_ball_linf([])


def test_ball_members_grid():
    s = make_cube(2, 2, Fraction(1, 2))
    full = grid_ball(s, (0, 0), 2)
    assert ball_members(full, s) == frozenset(s.cells)
    point = Ball(s.cell_center((0, 0)), Fraction(0))
    assert ball_members(point, s) == frozenset({(0, 0)})
    far = Ball((Fraction(50), Fraction(50)), Fraction(1, 4))
    assert ball_members(far, s) == frozenset()


def test_membership_matches_distance():
    rng = random.Random(1)
    s = make_cube(2, 5, Fraction(1, 8))
    for _ in range(50):
        center = (Fraction(rng.randrange(0, 40), 64), Fraction(rng.randrange(0, 40), 64))
        radius = Fraction(rng.randrange(0, 30), 64)
        members = ball_members(Ball(center, radius), s)
        for cell in s.cells:
            inside = linf(s.cell_center(cell), center) <= radius
            assert (cell in members) == inside


def test_neighborhood_examples():
    single = VoxelSpace(2, Fraction(1, 8), frozenset({(0, 0)}))
    grown = neighborhood(single, Fraction(1, 8))
    assert len(grown.cells) == 9  # 3^2 block
    assert neighborhood(single, 0).cells == single.cells

    strip = VoxelSpace(2, Fraction(1, 8), frozenset({(0, 0), (0, 1)}))
    grown = neighborhood(strip, Fraction(1, 8))
    # oracle: every cell at Chebyshev distance <= 1 from the strip
    expected = {
        (i, j)
        for i in range(-2, 3)
        for j in range(-2, 4)
        if min(max(abs(i - a), abs(j - b)) for a, b in strip.cells) <= 1
    }
    assert grown.cells == frozenset(expected)
    assert len(grown.cells) == 12


def test_neighborhood_composition_only_enlarges():
    s = make_box(2, (2, 1), Fraction(1, 4))
    for a, b in [(Fraction(1, 8), Fraction(1, 8)), (Fraction(3, 16), Fraction(3, 16))]:
        twice = neighborhood(neighborhood(s, a), b)
        once = neighborhood(s, a + b)
        assert once.cells <= twice.cells


def test_neighborhood_net_rejected():
    net = NetSpace("linf", ((0.0, 0.0),))
    with pytest.raises(InputError):
        neighborhood(net, 0.5)


def test_metric_matrix_validation():
    good = ((0.0, 1.0, 2.0), (1.0, 0.0, 1.5), (2.0, 1.5, 0.0))
    NetSpace("matrix", ((0.0,), (1.0,), (2.0,)), 0.0, good)
    rng = random.Random(7)
    rejected = 0
    for _ in range(40):
        pts = [(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(4)]
        mat = [[max(abs(a - c), abs(b - d)) for c, d in pts] for a, b in pts]
        i, j = rng.sample(range(4), 2)
        mat[i][j] = mat[j][i] = mat[i][j] * 4 + 1.0  # break the triangle
        with pytest.raises(InputError):
            NetSpace("matrix", tuple((float(k),) for k in range(4)), 0.0,
                     tuple(tuple(r) for r in mat))
        rejected += 1
    assert rejected == 40


def test_space_serialization_roundtrip(tmp_path):
    s = make_cube(2, 3, Fraction(1, 8))
    path = tmp_path / "s.json"
    save_space(s, path)
    loaded = load_space(str(path))
    assert loaded == s
    assert space_from_dict(space_to_dict(s)) == s

    net = NetSpace("l2", ((0.0, 0.0), (1.0, 1.0)), 0.1)
    assert space_from_dict(space_to_dict(net)) == net


def test_load_net_csv(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0,0\n1,2\n")
    net = load_space(str(path))
    assert net.variant == "net" and len(net.points) == 2


def test_radius_and_diameter():
    s = make_box(2, (4, 2), Fraction(1, 4))
    assert space_radius(s) == Fraction(1, 2)  # 4 cells * (1/4) / 2
    assert space_diameter(s) == 1
    single = make_cube(2, 1, Fraction(1, 8))
    assert space_radius(single) == Fraction(1, 16)


def test_grid_ball_is_cell_block():
    s = make_cube(3, 4, Fraction(1, 4))
    b = grid_ball(s, (1, 0, 2), 2)
    members = ball_members(b, s)
    expected = frozenset(itertools.product((1, 2), (0, 1), (2, 3)))
    assert members == expected
