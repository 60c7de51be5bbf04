"""Scalar arithmetic shared by every module.

Voxel-model quantities (cell size, grid-ball radii, integer-exponent costs)
are `fractions.Fraction` and all comparisons on them are exact.  Anything
that passes through a non-integer exponent degrades to float and is compared
with the tolerance `TOL`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, float, int]

# Comparison tolerance for float-valued quantities (non-integer exponents,
# net-model distances).  Rational comparisons never use it.
TOL = 1e-9


def is_integral(m: Scalar) -> bool:
    if isinstance(m, int):
        return True
    if isinstance(m, Fraction):
        return m.denominator == 1
    return float(m).is_integer()


def as_fraction(x: Scalar) -> Fraction:
    """Exact conversion; floats convert via their binary expansion."""
    return Fraction(x)


def power(base: Scalar, m: Scalar) -> Scalar:
    """base**m, exact (Fraction) when the exponent is an integer and the
    base is rational, float otherwise."""
    if isinstance(base, (Fraction, int)) and is_integral(m):
        return Fraction(base) ** int(m)
    return float(base) ** float(m)


def root(x: Scalar, m: Scalar) -> float:
    """x**(1/m); always float (roots of rationals are rarely rational)."""
    xf = float(x)
    if xf == 0.0:
        return 0.0
    return xf ** (1.0 / float(m))


def leq(a: Scalar, b: Scalar, tol: float = TOL) -> bool:
    """a <= b, exact for two rationals, tolerant otherwise."""
    if isinstance(a, (Fraction, int)) and isinstance(b, (Fraction, int)):
        return a <= b
    return float(a) <= float(b) + tol


def parse_scalar(text: Scalar) -> Fraction:
    """Parse "p/q" strings, ints, floats and decimal strings to an exact
    Fraction.  Used by every JSON loader."""
    if isinstance(text, (Fraction, int)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text)
    s = str(text).strip()
    return Fraction(s)


def fmt_scalar(x: Scalar) -> Union[str, float, int]:
    """JSON-friendly form: Fractions as "p/q" strings (ints stay ints),
    floats as floats."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    return float(x)
