"""Synthesis of fake follower matrices that induce a chosen profile.

Given a leader matrix and a target profile (x*, j*) whose value v clears the
maximin threshold, produce a follower matrix U with is_sse((uL, U), (x*, j*)).

The synthesis runs a portfolio, cheapest first, with every candidate checked
by is_sse before it is returned:

1. Boosted zero-sum start: U = -uL with column j* raised by a constant just
   large enough that j* is a best response at x*.  Against every other
   strategy the follower still plays pure punishment, so this verifies
   immediately unless the boost hands the leader a region where column j*
   pays more than v.

2. Solo column: when column j* never pays the leader more than v, making it
   the unique best response everywhere is already a witness.

3. Column reshaping: keep U_k = -uL_k for k in an active set, retire the
   remaining columns below every other payoff, and solve an exact LP for an
   affine payoff t on column j* such that, writing g for the upper envelope
   of the active -uL_k:
     - t beats g at x* (so j* is a best response there),
     - t stays strictly below g wherever uL(., j*) > v (the leader can never
       be handed more than v through column j*),
     - t stays strictly above g wherever every active column pays more than v
       (only j* may win there).
   Each condition is affine on a cell of the piecewise-linear g, so vertex
   constraints with a shared margin variable capture the strict parts; cells
   whose vertices never violate the cap impose nothing and are skipped.  The
   active set starts at all other columns and shrinks through subsets,
   because an affine t can be blocked by a kink of g at x* that disappears
   once the kinking column is retired.

4. Eviction cuts: repeatedly lower the violating column along a functional
   that vanishes at x* and is negative at the violating strategy.  This is a
   last-resort repair loop with a budget; exhaustion raises.
"""

from fractions import Fraction
from itertools import combinations

from .games import (
    Game,
    best_response_set,
    compute_sse,
    is_sse,
    matrix_payoff,
    maximin,
)
from .linprog import LinearProgram, lp_solve_exact
from .polytope import enumerate_polytope_vertices
from .rationals import dot

_MAX_RETIREMENT_PATTERNS = 128


class WitnessSynthesisError(Exception):
    """No synthesis stage produced a verified witness."""


def _boosted_zero_sum(leader, x_star, j_star, target):
    m, n = len(leader), len(leader[0])
    boost = target - min(matrix_payoff(leader, x_star, k) for k in range(n))
    return [
        [-leader[i][k] + (boost if k == j_star else Fraction(0)) for k in range(n)]
        for i in range(m)
    ]


def _solo_column(leader, j_star):
    m, n = len(leader), len(leader[0])
    return [
        [Fraction(0) if k == j_star else Fraction(-1) for k in range(n)]
        for i in range(m)
    ]


def _reshaped_column(leader, x_star, j_star, target, active):
    """Fake matrix from the cell-vertex LP over `active`, or None if infeasible.

    Variables are the m entries of column j* plus a strictness margin; the
    margin is maximized and must come out positive.  Columns outside `active`
    (other than j*) are retired to a constant below every remaining payoff, so
    they are never best responses and need no safety constraints.
    """
    m, n = len(leader), len(leader[0])
    if not active:
        return None
    j_col = [leader[i][j_star] for i in range(m)]
    cap = maximin(leader, active + (j_star,)).value
    if cap > target:
        # Some leader strategy forces more than v among the active columns,
        # so no best-response assignment over them can keep the value at v.
        return None

    def argmin_cell(k):
        cons = []
        for kp in active:
            if kp != k:
                cons.append(([leader[i][k] - leader[i][kp] for i in range(m)], "<=", Fraction(0)))
        return cons

    cons = []
    for k in active:
        col = [leader[i][k] for i in range(m)]
        # Where column j* would overpay the leader, t must lose to the
        # punisher.  Points with uL(., j*) > v have their active minimum at
        # most the restricted maximin, which clips vacuous corners.
        lose_cell = argmin_cell(k) + [(j_col, ">=", target), (col, "<=", cap)]
        lose_vertices = enumerate_polytope_vertices(m, lose_cell)
        if any(dot(y, j_col) > target for y in lose_vertices):
            for y in lose_vertices:
                strict = dot(y, j_col) > target
                row = list(y) + [Fraction(1) if strict else Fraction(0)]
                cons.append((row, "<=", -dot(y, col)))
        # Where every active column overpays the leader, t must win; there
        # the mirrored clip bounds column j*.
        win_cell = argmin_cell(k) + [(col, ">=", target), (j_col, "<=", cap)]
        win_vertices = enumerate_polytope_vertices(m, win_cell)
        if any(dot(y, col) > target for y in win_vertices):
            for y in win_vertices:
                strict = dot(y, col) > target
                row = list(y) + [Fraction(-1) if strict else Fraction(0)]
                cons.append((row, ">=", -dot(y, col)))
    runner_up = min(matrix_payoff(leader, x_star, k) for k in active)
    anchor_strict = runner_up > target
    row = list(x_star) + [Fraction(-1) if anchor_strict else Fraction(0)]
    cons.append((row, ">=", -runner_up))
    cons.append(([Fraction(0)] * m + [Fraction(1)], "<=", Fraction(1)))
    lp = LinearProgram(
        m + 1,
        [Fraction(0)] * m + [Fraction(1)],
        sense="max",
        constraints=cons,
        nonneg=(False,) * m + (True,),
    )
    res = lp_solve_exact(lp)
    if not res.optimal or res.value <= 0:
        return None
    t = res.point[:m]
    keep = set(active)
    drop = Fraction(1) + max(
        [abs(e) for row_l in leader for e in row_l] + [abs(ti) for ti in t]
    )
    return [
        [
            t[i] if k == j_star else (-leader[i][k] if k in keep else -drop)
            for k in range(n)
        ]
        for i in range(m)
    ]


def _retirement_patterns(others):
    count = 0
    for size in range(len(others), 0, -1):
        for active in combinations(others, size):
            yield active
            count += 1
            if count >= _MAX_RETIREMENT_PATTERNS:
                return


def _eviction_direction(x_star, x_bad):
    """A linear functional equal to 0 at x_star and -1 at x_bad (on the simplex)."""
    i0 = next(i for i in range(len(x_star)) if x_star[i] != x_bad[i])
    s = x_bad[i0] - x_star[i0]
    return tuple(-(Fraction(1 if i == i0 else 0) - x_star[i0]) / s for i in range(len(x_star)))


def _cut_loop(leader, profile, fake, target, budget):
    m, n = len(leader), len(leader[0])
    x_star, j_star = profile.strategy, profile.response
    fake = [list(row) for row in fake]
    for _ in range(budget):
        game = Game(leader, fake)
        if is_sse(game, profile):
            return fake
        if j_star not in best_response_set(fake, x_star) or n == 1:
            return None
        violator, value = compute_sse(game)
        if value <= target:
            return None
        x_bad, j_bad = violator.strategy, violator.response
        if x_bad == x_star:
            direction = (Fraction(-1),) * m
        else:
            direction = _eviction_direction(x_star, x_bad)
        runner_up = max(matrix_payoff(fake, x_bad, k) for k in range(n) if k != j_bad)
        scale = matrix_payoff(fake, x_bad, j_bad) - runner_up + 1
        for i in range(m):
            fake[i][j_bad] += scale * direction[i]
    return None


def construct_witness(leader_matrix, profile, cut_budget=60):
    """A follower matrix making the profile an equilibrium, or None.

    None means the profile is not inducible (its value is below the full
    maximin).  Every returned matrix has passed is_sse against the target
    profile.  WitnessSynthesisError signals that all synthesis stages failed
    on an inducible profile; callers must surface it, not retry silently.
    """
    leader = tuple(tuple(row) for row in leader_matrix)
    m = len(leader)
    n = len(leader[0])
    x_star = profile.strategy
    j_star = profile.response
    if len(x_star) != m or j_star >= n:
        raise ValueError("profile does not match the matrix")
    target = matrix_payoff(leader, x_star, j_star)
    full = maximin(leader, range(n))
    if target < full.value:
        return None

    def verified(candidate):
        if candidate is None:
            return None
        matrix = tuple(tuple(row) for row in candidate)
        if is_sse(Game(leader, matrix), profile):
            return matrix
        return None

    start = _boosted_zero_sum(leader, x_star, j_star, target)
    found = verified(start)
    if found is not None:
        return found
    if maximin(leader, (j_star,)).value <= target:
        found = verified(_solo_column(leader, j_star))
        if found is not None:
            return found
    others = tuple(k for k in range(n) if k != j_star)
    for active in _retirement_patterns(others):
        found = verified(_reshaped_column(leader, x_star, j_star, target, active))
        if found is not None:
            return found
    found = verified(_cut_loop(leader, profile, start, target, cut_budget))
    if found is not None:
        return found
    raise WitnessSynthesisError(
        "all synthesis stages failed to produce a verified witness for an inducible profile"
    )
