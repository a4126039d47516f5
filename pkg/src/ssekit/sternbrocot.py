"""Exact binary search for rationals on the Stern-Brocot tree.

Two entry points:

- stern_brocot_find: a three-way comparator against a hidden rational; returns
  the hidden value exactly in O(bit size) probes.  The walk accelerates runs
  (repeated moves in one direction) with doubling plus binary refinement, one
  continued-fraction coefficient at a time, so probe counts stay logarithmic
  in the coefficient sizes rather than linear.

- stern_brocot_threshold: a monotone boolean predicate P with P(d) true iff
  d >= d*.  A pure boolean cannot confirm arrival (P answers the same at d*
  and above it), so the walk narrows a bracket (lo, hi] whose upper end is on
  the true side and stops once the open part of the bracket contains no
  rational within the bit bound; the unique admissible point left is the upper
  end, which must be d*.  Correctness rests on a Stern-Brocot fact: every
  rational strictly inside an interval is a tree descendant of the simplest
  one, so numerators and denominators only grow from there.

stern_brocot_find raises BoundExceededError when the comparator's answers are
inconsistent with every rational inside the configured bit bound.
"""

from fractions import Fraction


class BoundExceededError(Exception):
    """No rational within the bit bound is consistent with the oracle."""


def _admissible(q, bit_bound):
    return abs(q.numerator).bit_length() <= bit_bound and q.denominator.bit_length() <= bit_bound


def _simplest_in_open(lo, hi):
    """Simplest rational strictly inside (lo, hi), with 0 <= lo < hi; hi=None means +inf."""
    f = lo.numerator // lo.denominator
    a = f + 1
    if hi is None or a < hi:
        return Fraction(a)
    lo_frac = lo - f
    hi_frac = hi - f
    sub_lo = 1 / hi_frac
    sub_hi = None if lo_frac == 0 else 1 / lo_frac
    return f + 1 / _simplest_in_open(sub_lo, sub_hi)


def _find_positive(cmp, bit_bound):
    """Walk for a hidden rational in (0, +inf). cmp(q) ~ sign(hidden - q).

    State is an open interval (L, H) whose endpoints are Stern-Brocot
    neighbours; the upper endpoint starts as the 1/0 point at infinity.
    """
    ln, ld = 0, 1
    hn, hd = 1, 0
    guard = bit_bound + 3
    while True:
        s = _simplest_in_open(Fraction(ln, ld), Fraction(hn, hd) if hd else None)
        if not _admissible(s, bit_bound):
            raise BoundExceededError("no admissible rational remains in the search interval")
        c = cmp(Fraction(ln + hn, ld + hd))
        if c == 0:
            return Fraction(ln + hn, ld + hd)
        if c > 0:
            # Hidden above the mediant. Probes L + t*H increase with t; find
            # the adjacent pair with hidden above one and below the next.
            below, above = 1, None  # t values: hidden above probe(below)
            t = 2
            while above is None:
                pn, pd = ln + t * hn, ld + t * hd
                if pn.bit_length() > guard or pd.bit_length() > guard:
                    raise BoundExceededError("probe magnitude exceeded the bit bound")
                c2 = cmp(Fraction(pn, pd))
                if c2 == 0:
                    return Fraction(pn, pd)
                if c2 > 0:
                    below = t
                    t *= 2
                else:
                    above = t
            while above - below > 1:
                mid = (below + above) // 2
                c2 = cmp(Fraction(ln + mid * hn, ld + mid * hd))
                if c2 == 0:
                    return Fraction(ln + mid * hn, ld + mid * hd)
                if c2 > 0:
                    below = mid
                else:
                    above = mid
            ln, ld, hn, hd = ln + below * hn, ld + below * hd, ln + above * hn, ld + above * hd
        else:
            # Hidden below the mediant. Probes t*L + H decrease with t; find
            # the adjacent pair with hidden below one and above the next.
            above, below = 1, None  # t values: hidden below probe(above)
            t = 2
            while below is None:
                pn, pd = t * ln + hn, t * ld + hd
                if pn.bit_length() > guard or pd.bit_length() > guard:
                    raise BoundExceededError("probe magnitude exceeded the bit bound")
                c2 = cmp(Fraction(pn, pd))
                if c2 == 0:
                    return Fraction(pn, pd)
                if c2 < 0:
                    above = t
                    t *= 2
                else:
                    below = t
            while below - above > 1:
                mid = (above + below) // 2
                c2 = cmp(Fraction(mid * ln + hn, mid * ld + hd))
                if c2 == 0:
                    return Fraction(mid * ln + hn, mid * ld + hd)
                if c2 < 0:
                    above = mid
                else:
                    below = mid
            ln, ld, hn, hd = below * ln + hn, below * ld + hd, above * ln + hn, above * ld + hd


def stern_brocot_find(cmp, bit_bound):
    """Recover a hidden rational from a three-way comparator.

    cmp(probe) must return a negative number if the hidden value is below the
    probe, 0 if equal, positive if above.  The hidden value's numerator and
    denominator must fit in bit_bound bits each.
    """
    c0 = cmp(Fraction(0))
    if c0 == 0:
        return Fraction(0)
    if c0 > 0:
        return _find_positive(cmp, bit_bound)
    return -_find_positive(lambda q: -cmp(-q), bit_bound)


def stern_brocot_threshold(pred, lo, hi, bit_bound):
    """Find d* in (lo, hi] where a monotone predicate flips: pred(d) <=> d >= d*.

    Preconditions: lo < hi, pred is false at lo and true at hi (the callers
    know both without spending queries, so neither endpoint is probed).  The
    search runs on the shifted axis u = d - lo, so the bit bound applies to
    d* - lo; callers should budget for the shift.
    """
    lo = Fraction(lo)
    hi = Fraction(hi)
    if not lo < hi:
        raise ValueError("threshold search needs lo < hi")
    span = hi - lo

    def ask(u):
        # Probes at or beyond the span are true by precondition: free answer.
        if u >= span:
            return True
        return pred(lo + u)

    def arrived(a_n, a_d, b_n, b_d):
        s = _simplest_in_open(Fraction(a_n, a_d), Fraction(b_n, b_d))
        return not _admissible(s, bit_bound)

    # Bracket (L, H] on the u axis with the true endpoint at H.
    ln, ld = 0, 1
    hn, hd = span.numerator, span.denominator
    while True:
        if arrived(ln, ld, hn, hd):
            return lo + Fraction(hn, hd)
        if ask(Fraction(ln + hn, ld + hd)):
            # True at the mediant: walk toward L along probes t*L + H.
            t_true = 1
            t_false = None
            t = 2
            early = None
            while t_false is None:
                # Current bracket is (L, probe(t_true)].
                cn, cd = t_true * ln + hn, t_true * ld + hd
                if arrived(ln, ld, cn, cd):
                    early = Fraction(cn, cd)
                    break
                if ask(Fraction(t * ln + hn, t * ld + hd)):
                    t_true = t
                    t *= 2
                else:
                    t_false = t
            if early is not None:
                return lo + early
            while t_false - t_true > 1:
                mid = (t_true + t_false) // 2
                if ask(Fraction(mid * ln + hn, mid * ld + hd)):
                    t_true = mid
                else:
                    t_false = mid
            ln, ld, hn, hd = t_false * ln + hn, t_false * ld + hd, t_true * ln + hn, t_true * ld + hd
        else:
            # False at the mediant: walk toward H along probes L + t*H.
            t_false = 1
            t_true = None
            t = 2
            early = None
            while t_true is None:
                # Current bracket is (probe(t_false), H].
                cn, cd = ln + t_false * hn, ld + t_false * hd
                if arrived(cn, cd, hn, hd):
                    early = Fraction(hn, hd)
                    break
                if ask(Fraction(ln + t * hn, ld + t * hd)):
                    t_true = t
                else:
                    t_false = t
                    t *= 2
            if early is not None:
                return lo + early
            while t_true - t_false > 1:
                mid = (t_false + t_true) // 2
                if ask(Fraction(ln + mid * hn, ld + mid * hd)):
                    t_true = mid
                else:
                    t_false = mid
            ln, ld, hn, hd = ln + t_false * hn, ld + t_false * hd, ln + t_true * hn, ld + t_true * hd
