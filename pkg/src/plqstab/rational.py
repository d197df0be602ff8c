"""Exact rational scalars and vector helpers.

Every kernel computation in this package is exact; floating point only
appears in the numeric probes, which go through ``to_float``.  ``Rat``
is ``gmpy2.mpq`` when available (a drop-in rational that is several
times faster than ``fractions.Fraction``) and ``Fraction`` otherwise.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Rat = Fraction

ZERO = Rat(0)
ONE = Rat(1)


def rat(value, den=None):
    """Exact rational from int/str/Rat/float, or a (num, den) pair."""
    if den is not None:
        return Rat(value, den)
    if isinstance(value, float):
        # exact binary expansion, no rounding
        return Rat(Fraction(value))
    return Rat(value)


def parse_rat(text):
    """Parse ``"p/q"``, integer, or plain decimal text to an exact Rat.

    Raises ValueError on anything else (floats in scientific notation,
    empty strings, ...).
    """
    if isinstance(text, int):
        return Rat(text)
    if isinstance(text, float):
        raise ValueError("refusing float %r; use a string 'p/q' or an int" % text)
    s = str(text).strip()
    if not s:
        raise ValueError("empty rational literal")
    return Rat(Fraction(s))


def format_rat(value) -> str:
    """Render as ``"p"`` or ``"p/q"`` (gcd-reduced, positive denominator)."""
    return str(value)


def to_float(value) -> float:
    return float(value)


# -- small tuple-vector helpers (vectors are tuples of Rat) ------------------

def vec(values):
    return tuple(rat(v) for v in values)


def vzeros(n):
    return (ZERO,) * n


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vneg(a):
    return tuple(-x for x in a)


def vscale(t, a):
    return tuple(t * x for x in a)


def vdot(a, b):
    s = ZERO
    for x, y in zip(a, b):
        s += x * y
    return s


def norm_sq(a):
    return vdot(a, a)


def norm2(a) -> float:
    return float(norm_sq(a)) ** 0.5


def norm_inf(a):
    m = ZERO
    for x in a:
        ax = -x if x < 0 else x
        if ax > m:
            m = ax
    return m


def is_zero_vec(a) -> bool:
    return all(x == 0 for x in a)


def to_float_vec(a):
    return tuple(float(x) for x in a)


def from_float_vec(a):
    return tuple(rat(float(x)) for x in a)


def primitive(a):
    """Scale a rational vector to a canonical primitive integer vector.

    The result has integer entries with gcd 1 and the same direction;
    the zero vector maps to itself.
    """
    from math import gcd

    nums = [rat(x) for x in a]
    if all(x == 0 for x in nums):
        return tuple(ZERO for _ in nums)
    den_lcm = 1
    for x in nums:
        d = int(x.denominator)
        den_lcm = den_lcm // gcd(den_lcm, d) * d
    ints = [int(x * den_lcm) for x in nums]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    return tuple(Rat(v // g) for v in ints)
