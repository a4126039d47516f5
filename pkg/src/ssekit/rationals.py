"""Rational scalars and vectors.

The scalar type is fractions.Fraction, which already maintains the invariants
we need (reduced form, positive denominator, total order).  Vectors and matrix
rows are plain tuples of Fractions.  The helpers here cover construction,
wire-format parsing, and the handful of vector operations the rest of the
package uses.
"""

from fractions import Fraction


def rat(x, den=None):
    """Coerce to Fraction. Accepts ints, Fractions, and 'p/q' strings."""
    if den is not None:
        return Fraction(x, den)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def rat_str(q):
    """Exact wire format: 'p/q' or plain 'p' for integers."""
    q = rat(q)
    return str(q)


def vec(xs):
    return tuple(rat(x) for x in xs)


def dot(a, b):
    if len(a) != len(b):
        raise ValueError(f"dot: length mismatch {len(a)} vs {len(b)}")
    total = Fraction(0)
    for x, y in zip(a, b):
        total += x * y
    return total


def vec_add(a, b):
    if len(a) != len(b):
        raise ValueError("vec_add: length mismatch")
    return tuple(x + y for x, y in zip(a, b))


def vec_scale(c, a):
    c = rat(c)
    return tuple(c * x for x in a)


def is_simplex_point(x):
    """True iff x has nonnegative entries summing to exactly 1."""
    return all(xi >= 0 for xi in x) and sum(x, Fraction(0)) == 1


def bitsize(q):
    """Bits of numerator plus bits of denominator (both at least 1)."""
    q = rat(q)
    return max(abs(q.numerator), 1).bit_length() + q.denominator.bit_length()
