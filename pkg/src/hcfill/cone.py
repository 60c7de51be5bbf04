"""Cone coverings: from a covering of a set Y inside B(p, R), an explicit
covering of the cone over Y with apex p, with certified m-cost.

For an input ball (q_i, r_i) the segment [q_i, p] is seeded with centers
spaced r_i/m apart.  The standard variant uses the uniform radius
(1+1/m)*r_i, giving at most ceil(m*R/r_i) balls per input and total cost at
most m*(1+1/m)^m * R * C, where C is the input covering's (m-1)-cost.  The
improved variant shrinks each radius proportionally to the cone section it
guards (the section of the cone at parameter t has radius t*r_i), which cuts
the constant to 2*(1+1/m)^m.  Certificates carry both sides of the bound and
per-ball provenance; coverage is checked by sampling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .errors import InputError, VerificationError
from .exact import Scalar, as_fraction, fmt_scalar, power
from .space import Ball, Covering, VoxelSpace, linf


@dataclass(frozen=True)
class ConeCertificate:
    apex: tuple
    ambient_radius: Scalar
    m: Scalar
    variant: str
    input_cost: Scalar  # sum r_i^(m-1) of the input covering
    balls: tuple[Ball, ...]
    provenance: tuple  # (input index, step j) per output ball
    cost: Scalar
    bound: Scalar
    per_input_counts: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "apex": [fmt_scalar(x) for x in self.apex],
            "ambient_radius": fmt_scalar(self.ambient_radius),
            "m": fmt_scalar(self.m),
            "variant": self.variant,
            "input_cost": fmt_scalar(self.input_cost),
            "cost": fmt_scalar(self.cost),
            "bound": fmt_scalar(self.bound),
            "balls": [
                {**b.to_dict(), "input": prov[0], "step": prov[1]}
                for b, prov in zip(self.balls, self.provenance)
            ],
        }


def cone_covering(
    input_cover: Covering,
    apex,
    R: Scalar,
    m: Scalar,
    variant: str = "standard",
    centers_in=None,
) -> ConeCertificate:
    """Cover the cone over the input covering's region from `apex`.

    The input covering carries dimension m-1 costs; the output covers the
    cone at dimension m.  Every input ball must satisfy d(q_i, apex) + r_i
    <= R; every input radius must be positive.  When a center-restricted
    family is in force, pass its point set as `centers_in`: the input centers
    and the apex are checked against it (emitted centers lie on the segments
    between them, which a center subspace contains by convexity).
    """
    if variant not in ("standard", "improved"):
        raise InputError(f"unknown cone variant {variant!r}")
    if float(m) < 1.0:
        raise InputError("cone covering needs m >= 1")
    apex = tuple(as_fraction(x) for x in apex)
    if centers_in is not None:
        allowed = {tuple(as_fraction(x) for x in p) for p in centers_in}
        if apex not in allowed:
            raise InputError("apex lies outside the declared center set")
        for i, src in enumerate(input_cover.balls):
            if tuple(as_fraction(x) for x in src.center) not in allowed:
                raise InputError(f"input ball {i} center outside the declared center set")
    mf = as_fraction(m)
    Rf = as_fraction(R)

    balls: list[Ball] = []
    provenance: list[tuple[int, int]] = []
    counts: list[int] = []
    for i, src in enumerate(input_cover.balls):
        r = as_fraction(src.radius)
        if r <= 0:
            raise InputError("cone covering needs positive input radii")
        q = tuple(as_fraction(x) for x in src.center)
        d = as_fraction(linf(q, apex))
        if d + r > Rf:
            raise InputError(
                f"input ball {i} is not inside the ambient ball of radius {R}"
            )
        step = r / mf
        n_balls = max(1, ceil(mf * d / r)) if d > 0 else 1
        counts.append(n_balls)
        direction = None if d == 0 else tuple((a - b) / d for a, b in zip(apex, q))
        for j in range(n_balls):
            u = step * j
            center = q if direction is None else tuple(
                qc + dc * u for qc, dc in zip(q, direction)
            )
            if variant == "standard":
                radius = (1 + 1 / mf) * r
            else:
                # section of the cone in this ball's slab has parameter at
                # most t_j = 1 - max(0, j-1)*step/d; radius t_j*r + step
                # covers it
                t_j = 1 if j <= 1 else 1 - (j - 1) * step / d
                radius = t_j * r + step
            balls.append(Ball(center, radius))
            provenance.append((i, j))

    exponent = mf - 1
    input_cost = sum(power(as_fraction(b.radius), exponent) for b in input_cover.balls)
    cost = sum(power(as_fraction(b.radius), mf) for b in balls)
    factor = power(1 + 1 / mf, mf)
    lead = mf if variant == "standard" else 2
    bound = lead * factor * Rf * input_cost if not isinstance(factor, float) else \
        float(lead) * factor * float(Rf) * float(input_cost)

    if isinstance(cost, Fraction) and isinstance(bound, Fraction):
        violated = cost > bound
    else:
        violated = float(cost) > float(bound) + 1e-9 * max(1.0, abs(float(bound)))
    if violated:
        raise VerificationError(
            "cone covering exceeded its certified bound",
            {"cost": fmt_scalar(cost), "bound": fmt_scalar(bound), "variant": variant},
        )
    for i, src in enumerate(input_cover.balls):
        if counts[i] > ceil(mf * Rf / as_fraction(src.radius)):
            raise VerificationError(
                "cone covering emitted more balls than its per-input cap",
                {"input": i, "count": counts[i]},
            )
    return ConeCertificate(
        apex, Rf, m, variant, input_cost, tuple(balls), tuple(provenance),
        cost, bound, tuple(counts),
    )


def cone_coverage_check(
    cert: ConeCertificate,
    input_cover: Covering,
    samples: int = 10_000,
    seed: int = 0,
) -> dict:
    """Sample points x in the input balls and blend parameters t in [0,1];
    every t*x + (1-t)*apex must land inside an output ball.

    Uses the slab structure for an O(1) candidate lookup with a full scan as
    fallback; returns the number of misses (0 for a sound certificate).
    """
    rng = random.Random(seed)
    apex = tuple(float(x) for x in cert.apex)
    n = len(apex)
    inputs = list(input_cover.balls)
    by_input: dict[int, list[int]] = {}
    for k, (i, _) in enumerate(cert.provenance):
        by_input.setdefault(i, []).append(k)
    out_centers = [tuple(float(x) for x in b.center) for b in cert.balls]
    out_radii = [float(b.radius) for b in cert.balls]

    misses = 0
    tol = 1e-9
    for s in range(samples):
        i = s % len(inputs)
        src = inputs[i]
        q = tuple(float(x) for x in src.center)
        r = float(src.radius)
        x = tuple(qc + r * (2 * rng.random() - 1) for qc in q)
        t = rng.random()
        z = tuple(t * xc + (1 - t) * ac for xc, ac in zip(x, apex))
        ids = by_input[i]
        d = max(abs(a - b) for a, b in zip(q, apex))
        hit = False
        if d > 0 and len(ids) > 1:
            step = r / float(cert.m)
            j_guess = int(round((1 - t) * d / step))
            for j in (j_guess, j_guess - 1, j_guess + 1):
                if 0 <= j < len(ids):
                    k = ids[j]
                    if max(abs(a - b) for a, b in zip(z, out_centers[k])) <= out_radii[k] + tol:
                        hit = True
                        break
        if not hit:
            for k in range(len(cert.balls)):
                if max(abs(a - b) for a, b in zip(z, out_centers[k])) <= out_radii[k] + tol:
                    hit = True
                    break
        if not hit:
            misses += 1
    return {"samples": samples, "misses": misses}


def cone_map_image(
    space: VoxelSpace,
    target_cells,
    apex,
    r: Scalar,
) -> VoxelSpace:
    """Image of the blend map x -> phi(d(x, Y))*x + (1-phi)*apex, voxelized.

    phi falls linearly from 1 at distance 0 to 0 at distance r, so points at
    distance >= r from Y map exactly to the apex.  The image point set is
    rounded to containing cells (a conservative enlargement).
    """
    if not isinstance(space, VoxelSpace):
        raise InputError("cone maps need the voxel model")
    if r <= 0:
        raise InputError("r must be positive")
    apex = tuple(as_fraction(x) for x in apex)
    rf = as_fraction(r)
    target = [space.cell_center(c) for c in sorted(target_cells)]
    if not target:
        raise InputError("target set must be non-empty")
    cells = set()
    for cell in space.sorted_cells():
        x = space.cell_center(cell)
        d = min(as_fraction(linf(x, t)) for t in target)
        phi = max(Fraction(0), 1 - d / rf)
        image = tuple(phi * xc + (1 - phi) * ac for xc, ac in zip(x, apex))
        cells.add(tuple(_containing_index(coord, space.delta) for coord in image))
    return VoxelSpace(space.n, space.delta, frozenset(cells))


def blend_point(x, apex, dist_to_target: Scalar, r: Scalar):
    """Pointwise cone map used by the pipeline's displacement accounting."""
    xf = tuple(as_fraction(c) for c in x)
    af = tuple(as_fraction(c) for c in apex)
    phi = max(Fraction(0), 1 - as_fraction(dist_to_target) / as_fraction(r))
    return tuple(phi * a + (1 - phi) * b for a, b in zip(xf, af))


def _containing_index(coord: Fraction, delta: Fraction) -> int:
    q = as_fraction(coord) / delta
    return q.numerator // q.denominator
