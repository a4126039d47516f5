"""Recovery of leader-payoff directions from equilibrium queries.

Against a fixed follower column j, the leader's payoff is an affine
function of the mixed strategy.  A planted follower matrix can confine
column j's best-response region so tightly that equilibrium membership
queries reveal where that affine function crosses a known level, one
pinned strategy per row.  Those crossings determine an exact direction
vector a_j with  u_L(x, j) = gamma_j * (a_j . x) + beta_j  for some
gamma_j > 0, unless column j's solo maximin already equals the
unrestricted maximin, in which case no planted matrix can separate the
two and the column is flagged instead.

The machinery has three layers:

* covers: follower matrices that keep a set of columns out of every
  best response over the region where the leader guarantees the set's
  restricted maximin (make_proper_cover, learn_separating_hyperplane,
  compute_cover);
* pinned points: a growth-weighted fake whose best-response region for
  the target column touches each low row in exactly one place
  (pinning_fake, critical_points, advance_Ig);
* assembly: learn_aj and learn_gradient_model, walking the columns in
  an order that makes every prerequisite available when it is needed.

All arithmetic is exact; "arbitrary" choices are resolved to the
lexicographically smallest candidate so replays are byte-identical.
"""

from dataclasses import dataclass
from fractions import Fraction

from .games import StrategyProfile, best_response_region
from .linprog import LinearProgram, lp_solve_exact, lp_solve_lexmin
from .rationals import bitsize, dot, rat
from .sternbrocot import stern_brocot_find, stern_brocot_threshold

_ZERO = Fraction(0)
_ONE = Fraction(1)

_DOUBLING_CAP = 128


class _MaximinCoincides:
    """Sentinel: the column's solo maximin equals the unrestricted one."""

    __slots__ = ()

    def __repr__(self):
        return "MAXIMIN_COINCIDES"


MAXIMIN_COINCIDES = _MaximinCoincides()


@dataclass(frozen=True)
class ColumnOrdering:
    """Rows of one column split into the maximizers and the rest.

    low lists the rows where the column pays the leader strictly below
    its best value, high lists the maximizing rows; both ascending, and
    together they exhaust range(m).
    """

    column: int
    low: tuple
    high: tuple

    @property
    def split(self):
        return len(self.low)

    @property
    def permutation(self):
        return self.low + self.high


def order_rows(column, best_rows, m):
    """ColumnOrdering for a column whose maximizing rows are known."""
    high = tuple(sorted(best_rows))
    members = set(high)
    low = tuple(i for i in range(m) if i not in members)
    return ColumnOrdering(column, low, high)


@dataclass(frozen=True)
class CoverMatrix:
    """A follower matrix shielding a set of columns from best response.

    Wherever the leader guarantees the covered set's restricted
    maximin, every best response to this matrix pays the leader
    strictly less than that value.  proper additionally means no
    strategy anywhere on the simplex has a best response inside the
    covered set.
    """

    matrix: tuple
    covered: frozenset
    proper: bool


@dataclass(frozen=True)
class CriticalPointState:
    """Growth weights, their pinned strategies, and which ones passed.

    g holds one positive weight per low row; points holds the pinned
    strategy for each; members indexes the points whose profile the
    oracle confirmed as an equilibrium at these weights.
    """

    g: tuple
    points: tuple
    members: frozenset


@dataclass(frozen=True)
class GradientModel:
    """Per-column payoff directions, one entry per follower column.

    Each entry is the direction tuple a_j, or MAXIMIN_COINCIDES for a
    column whose solo maximin ties the unrestricted maximin.
    """

    directions: tuple

    def coincident_columns(self):
        return frozenset(
            j for j, a in enumerate(self.directions) if a is MAXIMIN_COINCIDES
        )


def _unit(m, i):
    return tuple(_ONE if k == i else _ZERO for k in range(m))


def _simplex(m):
    return ([_ONE] * m, "=", _ONE)


def _dominant_matrix(m, n, pivot):
    """Matrix whose only best response, everywhere, is the pivot column."""
    return tuple(
        tuple(_ZERO if k == pivot else -_ONE for k in range(n)) for _ in range(m)
    )


def make_proper_cover(matrix, covered):
    """Rewrite the covered columns so they are never a best response.

    Covered columns that already lose everywhere are kept; otherwise
    every covered column drops to a constant strictly below all other
    entries, which cannot disturb best responses outside the set.
    """
    mat = tuple(tuple(rat(v) for v in row) for row in matrix)
    m, n = len(mat), len(mat[0])
    covered = frozenset(covered)
    if not covered:
        raise ValueError("there is nothing to cover")
    if covered.issuperset(range(n)):
        raise ValueError("no matrix can keep every column out of best response")
    clear = True
    for k in sorted(covered):
        cons = [_simplex(m)] + best_response_region(mat, k)
        probe = lp_solve_exact(LinearProgram(m, [_ZERO] * m, "max", cons))
        if probe.optimal:
            clear = False
            break
    if clear:
        return CoverMatrix(mat, covered, True)
    floor = min(mat[i][k] for i in range(m) for k in range(n) if k not in covered)
    floor = floor - 1
    rewritten = tuple(
        tuple(floor if k in covered else row[k] for k in range(n)) for row in mat
    )
    return CoverMatrix(rewritten, covered, True)


def _threshold_probe(base_fn, column, direction, region, level):
    """Variant of the base matrix probing one crossing level.

    The target column is rebuilt so that its follower payoff ties the
    best rival exactly on the slice of the region where the direction's
    value is `level`, and falls off as the direction grows.  The target
    is then an equilibrium response of the hidden game against this
    matrix exactly when the leader's crossing level is at most `level`.
    """
    m, n = len(base_fn), len(base_fn[0])
    lp = LinearProgram(
        m,
        [_ZERO] * m,
        sense="min",
        constraints=[_simplex(m)] + list(region) + [(direction, "=", level)],
    )
    slice_point = lp_solve_lexmin(lp)
    assert slice_point.optimal, "probed levels stay within the region's span"
    z = slice_point.point
    rival = None
    rival_value = None
    for k in range(n):
        if k == column:
            continue
        value = dot(z, [row[k] for row in base_fn])
        if rival_value is None or value > rival_value:
            rival, rival_value = k, value
    probe = [list(row) for row in base_fn]
    for i in range(m):
        probe[i][column] = base_fn[i][rival] + level - direction[i]
    return probe


def learn_separating_hyperplane(
    session,
    column,
    base_fn,
    region,
    in_q,
    best_rows=None,
    direction=None,
    bit_budget=None,
):
    """Halfspace marking where one column pays at least the group value.

    Returns (b, c) such that, over the given region, the leader's
    payoff against `column` reaches the covered set's restricted
    maximin exactly where b . x <= c.  A column whose solo maximin ties
    the group value needs no queries: full mass on its maximizing rows
    is the test.  Otherwise the crossing level of the known direction
    is bracketed by equilibrium-response probes and, when it falls
    strictly inside the bracket, pinned exactly by a Stern-Brocot
    threshold search.
    """
    m = session.m
    if in_q:
        if best_rows is None:
            raise ValueError("a tied column needs its maximizing rows")
        chosen = set(best_rows)
        return tuple(-_ONE if i in chosen else _ZERO for i in range(m)), -_ONE
    if direction is None:
        raise ValueError("an untied column needs its learned direction")
    a = tuple(rat(v) for v in direction)
    base = [_simplex(m)] + list(region)
    lo_res = lp_solve_exact(LinearProgram(m, a, "min", base))
    hi_res = lp_solve_exact(LinearProgram(m, a, "max", base))
    assert lo_res.optimal and hi_res.optimal, "the maximin region is never empty"
    d_lo, d_hi = lo_res.value, hi_res.value

    def crosses(level):
        probe = _threshold_probe(base_fn, column, a, region, level)
        return session.query_er(probe, column, a)

    if crosses(d_lo):
        threshold = d_lo - 1
    elif d_hi == d_lo or not crosses(d_hi):
        threshold = d_hi + 1
    else:
        budget = bit_budget
        if budget is None:
            budget = 64 + bitsize(d_lo) + bitsize(d_hi) + max(bitsize(v) for v in a)
        threshold = stern_brocot_threshold(crosses, d_lo, d_hi, budget)
    return tuple(-v for v in a), -threshold


def compute_cover(
    session,
    covered,
    region,
    base_fn,
    q_columns,
    best_rows,
    directions=None,
    dominant_pivot=None,
    bit_budget=None,
):
    """Build a proper cover of the covered columns, or None if none exists.

    region describes (simplex implicit) where the leader guarantees the
    covered set's restricted maximin.  q_columns are the outside
    columns whose solo maximin ties that value; their halfspaces come
    free from best_rows.  Every other outside column must appear in
    directions with its learned direction vector.  When some column's
    solo maximin is known to sit strictly below the group value, pass
    it as dominant_pivot: a matrix making the pivot strictly dominant
    is already a proper cover and costs no queries.

    None means the group's restricted maximin equals the unrestricted
    maximin, so no matrix can keep all outside columns unattractive.
    """
    m, n = session.m, session.n
    covered = frozenset(covered)
    if dominant_pivot is not None:
        if dominant_pivot in covered:
            raise ValueError("the dominant pivot must lie outside the covered set")
        return CoverMatrix(_dominant_matrix(m, n, dominant_pivot), covered, True)
    halfspaces = {}
    for k in range(n):
        if k in covered:
            continue
        if k in q_columns:
            halfspaces[k] = learn_separating_hyperplane(
                session, k, base_fn, region, True, best_rows=best_rows[k]
            )
        else:
            if directions is None or k not in directions:
                raise ValueError("column %d needs its direction learned first" % k)
            halfspaces[k] = learn_separating_hyperplane(
                session,
                k,
                base_fn,
                region,
                False,
                direction=directions[k],
                bit_budget=bit_budget,
            )
    cons = [_simplex(m)] + list(region)
    for k in sorted(halfspaces):
        b, c = halfspaces[k]
        cons.append((b, "<=", c))
    feasible = lp_solve_exact(LinearProgram(m, [_ZERO] * m, "max", cons))
    if feasible.optimal:
        return None
    mu = [[_ZERO] * n for _ in range(m)]
    for k, (b, c) in halfspaces.items():
        for i in range(m):
            mu[i][k] = b[i] - c
    return make_proper_cover(mu, covered)


def pinning_fake(g, cover, ordering):
    """Follower matrix whose target best responses touch each low row once.

    Low rows carry the growth weights in the target column and nothing
    anywhere else; high rows replay the cover with the target column
    dropped below the cover's worst entry, so mass confined to high
    rows never answers with the target.
    """
    mat = cover.matrix
    m, n = len(mat), len(mat[0])
    target = ordering.column
    basement = min(v for row in mat for v in row) - 1
    weights = tuple(rat(v) for v in g)
    fake = [[_ZERO] * n for _ in range(m)]
    for pos, i in enumerate(ordering.low):
        fake[i][target] = weights[pos]
    for i in ordering.high:
        for k in range(n):
            fake[i][k] = basement if k == target else mat[i][k]
    return tuple(tuple(row) for row in fake)


def _pinned_point(fake, ordering, pos):
    m = len(fake)
    row = ordering.low[pos]
    cons = [_simplex(m)] + best_response_region(fake, ordering.column)
    for other in ordering.low:
        if other != row:
            cons.append((_unit(m, other), "=", _ZERO))
    res = lp_solve_lexmin(LinearProgram(m, _unit(m, row), "min", cons))
    assert res.optimal, "positive growth weights keep every pinned facet nonempty"
    assert res.point[row] > 0, "a pinned strategy keeps mass on its own row"
    return res.point


def critical_points(g, cover, ordering):
    """One pinned strategy per low row.

    Each point puts minimal mass on its row inside the target column's
    best-response region, with every other low row shut off; ties are
    broken lexicographically.
    """
    weights = tuple(rat(v) for v in g)
    assert len(weights) == ordering.split
    assert all(v > 0 for v in weights), "growth weights must stay positive"
    fake = pinning_fake(weights, cover, ordering)
    return tuple(_pinned_point(fake, ordering, pos) for pos in range(ordering.split))


def _survey(session, g, cover, ordering):
    """Critical points plus which of them the oracle confirms."""
    weights = tuple(rat(v) for v in g)
    points = critical_points(weights, cover, ordering)
    fake = pinning_fake(weights, cover, ordering)
    members = frozenset(
        pos
        for pos, x in enumerate(points)
        if session.query_sse(fake, StrategyProfile(x, ordering.column))
    )
    return CriticalPointState(weights, points, members)


def initial_growth_state(session, cover, ordering):
    """Survey at unit growth weights."""
    return _survey(session, (_ONE,) * ordering.split, cover, ordering)


def advance_Ig(session, cover, ordering, state, bit_budget=None):
    """Grow the set of passing critical points by exactly one row.

    While the set is empty, every weight doubles until the target
    column breaks into some equilibrium.  Otherwise the lowest missing
    row's weight rises to the exact level where its pinned strategy
    joins the incumbents, found by a three-way Stern-Brocot search:
    below the level only incumbents pass, above it only the newcomer.
    """
    split = ordering.split
    full = frozenset(range(split))
    if state.members == full:
        raise ValueError("every critical point already passes")
    if not state.members:
        weight = state.g[0]
        for _ in range(_DOUBLING_CAP):
            weight *= 2
            state = _survey(session, (weight,) * split, cover, ordering)
            if state.members:
                return state
        raise AssertionError("doubled weights must eventually wake the target")
    pos = min(full - state.members)
    incumbent = min(state.members)
    pivot_weight = state.g[pos]

    def compare(offset):
        if offset == 0:
            return 1
        g2 = tuple(
            pivot_weight + offset if t == pos else v for t, v in enumerate(state.g)
        )
        fake = pinning_fake(g2, cover, ordering)
        newcomer_point = _pinned_point(fake, ordering, pos)
        newcomer = session.query_sse(
            fake, StrategyProfile(newcomer_point, ordering.column)
        )
        # Pins on the other rows do not move when this row's weight changes,
        # so the incumbent's point can be reused as is.
        holds = session.query_sse(
            fake, StrategyProfile(state.points[incumbent], ordering.column)
        )
        if newcomer and holds:
            return 0
        if holds:
            return 1
        if newcomer:
            return -1
        raise AssertionError("one of the two pinned strategies must keep passing")

    budget = bit_budget
    if budget is None:
        budget = 64 + sum(bitsize(v) for row in cover.matrix for v in row)
        budget += sum(bitsize(v) for v in state.g)
    offset = stern_brocot_find(compare, budget)
    g2 = tuple(pivot_weight + offset if t == pos else v for t, v in enumerate(state.g))
    after = _survey(session, g2, cover, ordering)
    assert after.members == state.members | {pos}, (
        "the crossing level admits exactly one newcomer"
    )
    return after


def learn_aj(session, column, table, directions=None, bit_budget=None):
    """Direction of the leader's payoff against one column, or the tie flag.

    A column sitting above the maximin floor is probed behind a dominant
    rival; if it is maximized on every row it is constant and the zero
    direction comes back without queries.  A floor column first needs a
    cover of itself, built from the tied columns' row sets and the other
    columns' directions (learned on demand when not supplied); if no
    cover exists the column's solo maximin equals the unrestricted
    maximin and MAXIMIN_COINCIDES is returned.  The cover check runs
    even for a constant floor column, since the tie is invisible later
    once the zero direction has swallowed the column.
    """
    session.set_phase("gradient")
    m, n = session.m, session.n
    ordering = order_rows(column, table.best_rows[column], m)
    floor_columns = table.argmin_value_columns()
    if column not in floor_columns:
        if not ordering.low:
            return (_ZERO,) * m
        cover = compute_cover(
            session,
            (column,),
            (),
            None,
            (),
            None,
            dominant_pivot=min(floor_columns),
        )
    else:
        known = dict(directions or {})
        for k in range(n):
            if k == column or k in floor_columns or k in known:
                continue
            known[k] = learn_aj(session, k, table, bit_budget=bit_budget)
        region = tuple((_unit(m, i), "=", _ZERO) for i in ordering.low)
        cover = compute_cover(
            session,
            (column,),
            region,
            _dominant_matrix(m, n, column),
            frozenset(floor_columns) - {column},
            table.best_rows,
            known,
            bit_budget=bit_budget,
        )
        if cover is None:
            return MAXIMIN_COINCIDES
        if not ordering.low:
            return (_ZERO,) * m
    state = initial_growth_state(session, cover, ordering)
    full = frozenset(range(ordering.split))
    while state.members != full:
        state = advance_Ig(session, cover, ordering, state, bit_budget=bit_budget)
    a = [_ZERO] * m
    for pos, i in enumerate(ordering.low):
        a[i] = -1 / state.points[pos][i]
    return tuple(a)


def learn_gradient_model(session, table, bit_budget=None):
    """All column directions in one pass, cheap columns first.

    Columns above the maximin floor only need a dominant rival to probe
    behind, so they go first; floor columns then reuse those directions
    when testing whether their own maximin can be shielded.
    """
    session.set_phase("gradient")
    n = session.n
    floor_columns = set(table.argmin_value_columns())
    learned = {}
    results = [None] * n
    for j in range(n):
        if j not in floor_columns:
            results[j] = learn_aj(session, j, table, bit_budget=bit_budget)
            learned[j] = results[j]
    for j in range(n):
        if j in floor_columns:
            results[j] = learn_aj(
                session, j, table, directions=learned, bit_budget=bit_budget
            )
    return GradientModel(tuple(results))
