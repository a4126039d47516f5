"""Payoff-scale calibration across follower columns.

Each hidden leader column is affine in its learned direction,
u(x, j) = gamma_j * (a_j . x) + beta_j with gamma_j > 0.  The scales
themselves stay hidden; instead, two strategy pairs per column, one
whose common leader value sits exactly at the pair's restricted
maximin and one strictly below it, determine gamma_j / gamma_b and
(beta_j - beta_b) / gamma_b relative to a base column b.  Rescaling
every candidate column by these ratios yields a surrogate leader
matrix that is fully known, and an exact maximin over the surrogate
produces a tight column set and a strategy meeting the hidden game's
own maximin on every tight column.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

from .games import StrategyProfile, best_response_region, maximin, matrix_payoff
from .gradient import compute_cover
from .linprog import (
    LinearProgram,
    lp_solve_exact,
    lp_solve_lexmin,
    solve_linear_system_2x2,
)
from .oracle import OracleModeError
from .rationals import bitsize, dot, rat_str
from .sternbrocot import BoundExceededError, stern_brocot_find
from .warmup import GREATER

_ZERO = Fraction(0)
_ONE = Fraction(1)

AT_MAXIMIN = "at-maximin"
BELOW_MAXIMIN = "below-maximin"


@dataclass(frozen=True)
class ReferencePair:
    """Two strategies with equal hidden leader value on a column pair.

    x plays against the first column of `columns`, y against the
    second.  kind says whether that common value sits at the pair's
    restricted maximin or strictly below it.
    """

    x: tuple
    y: tuple
    columns: tuple
    kind: str


@dataclass(frozen=True)
class ColumnCalibration:
    """Scale and shift of one column relative to the base column."""

    column: int
    ratio: Fraction
    offset: Fraction


@dataclass(frozen=True)
class ShortCircuit:
    """Joint-maximin shortcut: the pair's restricted maximin is global.

    x_star meets both pair thresholds at once, so the tight set and
    witness strategy are settled without a second reference pair.
    """

    tight_set: frozenset
    x_star: tuple


@dataclass(frozen=True)
class RelabelPlan:
    """Anchor column and a pair route for every candidate column.

    base anchors all ratios.  excluded lists constant columns; they
    cannot anchor a pair and never join the candidate set.  routes
    maps each remaining candidate to "direct", "swapped", or
    ("via", l) when the pair must detour through an intermediate
    column l whose best rows differ from the base's.
    """

    base: int
    excluded: frozenset
    routes: dict


@dataclass(frozen=True)
class CalibrationResult:
    """Candidate set, surrogate matrix, tight columns, and witness.

    The surrogate is exact on candidate columns (hidden payoffs
    rescaled by the base column's scale) and a large constant
    elsewhere, so its maximin is fully computable.  pathway records
    how the outcome was reached: "surrogate" for the calibrated
    matrix, "shortcut" when a pair's restricted maximin turned out
    to be global, "coincident" when a single column already carried
    the full maximin.
    """

    jhat: frozenset
    surrogate: tuple
    tight_set: frozenset
    x_star: tuple
    pathway: str = "surrogate"


class _Abort(Exception):
    """Internal signal: a pair run ended the whole calibration early."""

    def __init__(self, shortcut):
        super().__init__("calibration settled by a pair shortcut")
        self.shortcut = shortcut


def _simplex(m):
    return ([_ONE] * m, "=", _ONE)


def _beats(relations, t, b):
    """Some best row of column t sees column b strictly under t's maximin."""
    return any(
        relations.entry_relations[(t, i, b)] == GREATER
        for i in sorted(relations.best_rows[t])
    )


def _orientation(relations, b, t):
    """Role order for a pair run between b and t, or None when neither
    column dips on the other's best rows."""
    if _beats(relations, t, b):
        return b, t
    if _beats(relations, b, t):
        return t, b
    return None


def compute_Jhat(relations, base, active=None):
    """Candidate columns: those dipping strictly below the base maximin.

    Everything is read off the warm-up table, so membership costs no
    queries.  active restricts the candidate pool (the relabeling
    plan keeps constant columns out).  The base column itself always
    qualifies because it is non-constant.
    """
    n = len(relations.best_rows)
    m = 1 + max(i for _, i, _ in relations.entry_relations)
    pool = sorted(active) if active is not None else range(n)
    members = frozenset(
        j
        for j in pool
        if any(relations.entry_relations[(base, i, j)] == GREATER for i in range(m))
    )
    assert members, "some column always dips below the base column's maximin"
    return members


def normalize_labels(model, relations):
    """Pick the anchor column and decide how each candidate pairs with it.

    Constant columns are excluded up front.  The anchor is the lowest
    non-constant column whose solo maximin is minimal.  Each candidate
    then runs its pair construction directly, with roles swapped, or
    through an intermediate column when neither side dips on the
    other's best rows.
    """
    directions = model.directions
    n = len(directions)
    assert not model.coincident_columns(), (
        "coincident columns are resolved before calibration"
    )
    excluded = frozenset(j for j in range(n) if not any(directions[j]))
    live = [j for j in range(n) if j not in excluded]
    assert live, "an all-constant game pins its maximin and never gets here"
    base = None
    for j in live:
        if all(relations.value_relations[(j, k)] != GREATER for k in live if k != j):
            base = j
            break
    assert base is not None, "the solo maximin ordering always has a least element"
    jhat = compute_Jhat(relations, base, frozenset(live))
    routes = {}
    for j in sorted(jhat):
        if j == base:
            continue
        order = _orientation(relations, base, j)
        if order == (base, j):
            routes[j] = "direct"
        elif order == (j, base):
            routes[j] = "swapped"
        else:
            hops = [
                l
                for l in sorted(jhat)
                if l not in (base, j)
                and relations.best_rows[l] != relations.best_rows[base]
            ]
            assert hops, (
                "candidates sharing best rows with the base everywhere "
                "would coincide with the full maximin"
            )
            routes[j] = ("via", hops[0])
    return RelabelPlan(base, excluded, routes)


def _family_matrix(m, n, base, target, a_target, d):
    """Fake follower splitting base from target along a_target . x = d.

    The base column reads zero, the target reads d - a_target per row,
    and every other column sits at -1 so it never best-responds.
    """
    rows = []
    for i in range(m):
        row = []
        for k in range(n):
            if k == base:
                row.append(_ZERO)
            elif k == target:
                row.append(d - a_target[i])
            else:
                row.append(-_ONE)
        rows.append(tuple(row))
    return tuple(rows)


def _search_bits(bit_budget, *vectors):
    if bit_budget is not None:
        return bit_budget
    total = 96
    for vec in vectors:
        for v in vec:
            total += bitsize(v)
    return total


def first_reference_pair(session, base, target, a_base, a_target, bit_budget=None):
    """Pair meeting the two-column restricted maximin, plus the target
    threshold pinning it.

    The split level d where both columns stay equilibrium responses of
    the family matrix is unique; a rational search closes on it with
    two equilibrium-response probes per step.  The pair itself then
    comes from two exact LPs on either side of the split.
    """
    session.set_phase("calibration")
    m, n = session.m, session.n

    def compare(d):
        fake = _family_matrix(m, n, base, target, a_target, d)
        base_ok = session.query_er(fake, base, a_base)
        target_ok = session.query_er(fake, target, a_target)
        assert base_ok or target_ok, (
            "one side of the split always holds an equilibrium response"
        )
        if base_ok and target_ok:
            return 0
        return 1 if base_ok else -1

    d_star = stern_brocot_find(compare, _search_bits(bit_budget, a_base, a_target))
    x_res = lp_solve_lexmin(
        LinearProgram(m, a_base, "max", [_simplex(m), (a_target, ">=", d_star)])
    )
    y_res = lp_solve_lexmin(
        LinearProgram(m, a_target, "max", [_simplex(m), (a_target, "<=", d_star)])
    )
    assert x_res.optimal and y_res.optimal, "both sides of the split meet the simplex"
    pair = ReferencePair(x_res.point, y_res.point, (base, target), AT_MAXIMIN)
    return pair, d_star


def _pair_cover(
    session, base, target, a_base, a_target, d_base_star, d_target_star,
    directions, best_rows, bit_budget,
):
    region = ((a_base, ">=", d_base_star), (a_target, ">=", d_target_star))
    base_fn = _family_matrix(
        session.m, session.n, base, target, a_target, d_target_star
    )
    return compute_cover(
        session,
        (base, target),
        region,
        base_fn,
        frozenset(),
        best_rows,
        directions,
        bit_budget=bit_budget,
    )


def _pair_shortcut(m, base, target, a_base, a_target, d_base_star, d_target_star):
    spot = lp_solve_lexmin(
        LinearProgram(
            m,
            [_ZERO] * m,
            "max",
            [
                _simplex(m),
                (a_base, "=", d_base_star),
                (a_target, "=", d_target_star),
            ],
        )
    )
    assert spot.optimal, (
        "with no cover, both pair thresholds are attainable at once"
    )
    return ShortCircuit(frozenset((base, target)), spot.point)


def _shrink_limit(m, a_base, a_target, d_base_star, d_target_star):
    """Largest amount both thresholds can drop while each side of the
    split keeps a strategy: seeds the halving search."""
    zeros = [_ZERO] * m
    cons = [
        ([_ONE] * m + zeros + [_ZERO], "=", _ONE),
        (zeros + [_ONE] * m + [_ZERO], "=", _ONE),
        (list(a_target) + zeros + [_ZERO], ">=", d_target_star),
        (list(a_base) + zeros + [_ONE], "<=", d_base_star),
        (zeros + list(a_target) + [_ONE], "<=", d_target_star),
    ]
    res = lp_solve_exact(
        LinearProgram(2 * m + 1, [_ZERO] * (2 * m) + [_ONE], "max", cons)
    )
    assert res.optimal and res.value > 0, (
        "the pair thresholds always leave slack on both sides"
    )
    return res.value


def _tilt_column(entries, candidates, slice_cons, a_vec, gap, m):
    """One affine pair column: the rival optimum over the slice, tilted
    downhill along a_vec steeply enough to outrun every rival inside
    the threshold gap.  Ties are broken lexicographically throughout."""
    assert gap > 0
    best_value = None
    best_col = None
    for k in candidates:
        g = [entries[i][k] for i in range(m)]
        res = lp_solve_exact(LinearProgram(m, g, "max", slice_cons))
        assert res.optimal, "slice sets stay nonempty inside the threshold rectangle"
        if best_value is None or res.value > best_value:
            best_value, best_col = res.value, k
    z_res = lp_solve_lexmin(
        LinearProgram(m, [entries[i][best_col] for i in range(m)], "max", slice_cons)
    )
    assert z_res.optimal
    z = tuple(z_res.point)
    attaining = min(
        k
        for k in candidates
        if dot([entries[i][k] for i in range(m)], z) == best_value
    )
    flat = [entries[i][k] for k in candidates for i in range(m)]
    spread = 1 + max(flat) - min(flat)
    tilt = 6 * spread / gap
    b_vec = [entries[i][attaining] - tilt * a_vec[i] for i in range(m)]
    shift = best_value - dot(b_vec, z)
    return [v + shift for v in b_vec], z


def _pair_probe_matrix(
    m, n, base, target, a_base, a_target, d_b, d_t, d_b_star, d_t_star, cover
):
    """Fake follower realizing the pair split at (d_b, d_t), strictly
    below both thresholds.  Outside columns keep their cover entries;
    the pair columns are tilted planes pinned halfway back toward the
    thresholds.  Returns the matrix and the two pinned strategies."""
    bar_b = (d_b + d_b_star) / 2
    bar_t = (d_t + d_t_star) / 2
    entries = [list(row) for row in cover.matrix]
    outside = sorted(k for k in range(n) if k not in (base, target))
    assert outside, "a proper cover implies columns beyond the pair"
    slice_b = [_simplex(m), (a_base, "=", bar_b), (a_target, ">=", bar_t)]
    col_b, z_b = _tilt_column(entries, outside, slice_b, a_base, d_b_star - d_b, m)
    for i in range(m):
        entries[i][base] = col_b[i]
    slice_t = [_simplex(m), (a_target, "=", bar_t)]
    col_t, z_t = _tilt_column(
        entries, sorted(outside + [base]), slice_t, a_target, d_t_star - d_t, m
    )
    for i in range(m):
        entries[i][target] = col_t[i]
    return tuple(tuple(row) for row in entries), z_b, z_t


def _halve_then_balance(probe, d_b_star, d_t_star, seed, budget):
    """Shared search schedule for the second pair.

    probe(d_b, d_t, lazy) answers whether the base and target columns
    respond at a split; with lazy=True it may skip the target query
    once the base already responds.  Halving finds a responsive
    two-sided shrink, the midpoint jump locks one side, and a rational
    search balances the other.  Returns the final split parameters.
    """
    eps = seed
    steps = 0
    while True:
        ok_b, ok_t = probe(d_b_star - eps, d_t_star - eps, True)
        if ok_b or ok_t:
            break
        steps += 1
        if steps > budget:
            raise BoundExceededError(
                "halving never reached a responsive pair split"
            )
        eps = eps / 2
    mid_b = d_b_star - eps / 2
    mid_t = d_t_star - eps / 2
    ok_b, ok_t = probe(mid_b, mid_t, False)
    assert ok_b or ok_t, "the midpoint split keeps at least one column responsive"
    if ok_b and ok_t:
        return mid_b, mid_t
    if ok_b:

        def compare(p):
            if p <= mid_t:
                return 1
            if p >= d_t_star:
                return -1
            got_b, got_t = probe(mid_b, p, False)
            assert got_b or got_t, "the searched slab keeps one column responsive"
            if got_b and got_t:
                return 0
            return 1 if not got_t else -1

        return mid_b, stern_brocot_find(compare, budget)

    def compare(p):
        if p <= mid_b:
            return 1
        if p >= d_b_star:
            return -1
        got_b, got_t = probe(p, mid_t, False)
        assert got_b or got_t, "the searched slab keeps one column responsive"
        if got_b and got_t:
            return 0
        return 1 if not got_b else -1

    return stern_brocot_find(compare, budget), mid_t


def second_reference_pair(
    session, base, target, a_base, a_target, d_base_star, d_target_star,
    directions, best_rows, bit_budget=None,
):
    """Pair strictly below the two-column restricted maximin, or the
    joint-maximin shortcut.

    A cover first silences every other column over the region where
    both thresholds hold; when none exists the restricted maximin is
    already global and the shortcut strategy settles the output.
    Otherwise probe matrices walk the thresholds down until both pair
    columns respond at a common value, and the pinned strategies of
    the final matrix form the pair.

    directions must hold the learned direction of every column outside
    the pair.
    """
    session.set_phase("calibration")
    m, n = session.m, session.n
    cover = _pair_cover(
        session, base, target, a_base, a_target, d_base_star, d_target_star,
        directions, best_rows, bit_budget,
    )
    if cover is None:
        return _pair_shortcut(
            m, base, target, a_base, a_target, d_base_star, d_target_star
        )
    seed = _shrink_limit(m, a_base, a_target, d_base_star, d_target_star)
    budget = _search_bits(
        bit_budget, a_base, a_target, (d_base_star, d_target_star)
    )

    def build(d_b, d_t):
        return _pair_probe_matrix(
            m, n, base, target, a_base, a_target, d_b, d_t,
            d_base_star, d_target_star, cover,
        )

    def probe(d_b, d_t, lazy):
        fake, _, _ = build(d_b, d_t)
        ok_b = session.query_er(fake, base, a_base)
        if lazy and ok_b:
            return True, False
        return ok_b, session.query_er(fake, target, a_target)

    final_b, final_t = _halve_then_balance(
        probe, d_base_star, d_target_star, seed, budget
    )
    _, z_b, z_t = build(final_b, final_t)
    return ReferencePair(z_b, z_t, (base, target), BELOW_MAXIMIN)


def second_reference_pair_brc(
    session, base, target, a_base, a_target, d_base_star, d_target_star,
    directions, best_rows, bit_budget=None,
):
    """Second pair through best-response-region queries.

    Exists to cross-check the fake-matrix path: the probe regions sit
    at the same halfway-back levels the probe matrices pin, so both
    paths land on pairs with the same common leader value.  Requires a
    session opened in brc mode.
    """
    if session.mode != "brc":
        raise OracleModeError(
            "best-response-region probes need a session opened in brc mode"
        )
    session.set_phase("calibration")
    m, n = session.m, session.n
    cover = _pair_cover(
        session, base, target, a_base, a_target, d_base_star, d_target_star,
        directions, best_rows, bit_budget,
    )
    if cover is None:
        return _pair_shortcut(
            m, base, target, a_base, a_target, d_base_star, d_target_star
        )
    seed = _shrink_limit(m, a_base, a_target, d_base_star, d_target_star)
    budget = _search_bits(
        bit_budget, a_base, a_target, (d_base_star, d_target_star)
    )

    def regions_at(d_b, d_t):
        r_b = (d_b + d_base_star) / 2
        r_t = (d_t + d_target_star) / 2
        regions = []
        for k in range(n):
            if k == base:
                regions.append(((a_target, ">=", r_t), (a_base, "<=", r_b)))
            elif k == target:
                regions.append(((a_target, "<=", r_t),))
            else:
                regions.append(
                    tuple(
                        [(a_base, ">=", r_b), (a_target, ">=", r_t)]
                        + list(best_response_region(cover.matrix, k))
                    )
                )
        return regions

    def ask(regions, column, a_col):
        spot = lp_solve_lexmin(
            LinearProgram(m, a_col, "max", [_simplex(m)] + list(regions[column]))
        )
        assert spot.optimal, "pair regions stay nonempty across the searched slab"
        return session.query_br_correspondence(
            regions, StrategyProfile(spot.point, column)
        )

    def probe(d_b, d_t, lazy):
        regions = regions_at(d_b, d_t)
        ok_b = ask(regions, base, a_base)
        if lazy and ok_b:
            return True, False
        return ok_b, ask(regions, target, a_target)

    final_b, final_t = _halve_then_balance(
        probe, d_base_star, d_target_star, seed, budget
    )
    regions = regions_at(final_b, final_t)
    x_res = lp_solve_lexmin(
        LinearProgram(m, a_base, "max", [_simplex(m)] + list(regions[base]))
    )
    y_res = lp_solve_lexmin(
        LinearProgram(m, a_target, "max", [_simplex(m)] + list(regions[target]))
    )
    assert x_res.optimal and y_res.optimal
    return ReferencePair(x_res.point, y_res.point, (base, target), BELOW_MAXIMIN)


def solve_ratios(pair_at, pair_below, a_base, a_target):
    """Exact scale and shift of the target column from the two pairs.

    Each pair equates hidden values across the columns, which reads as
    one linear equation in the ratio and offset; distinct common
    values keep the system non-singular.
    """
    assert pair_at.kind == AT_MAXIMIN and pair_below.kind == BELOW_MAXIMIN
    assert pair_at.columns == pair_below.columns
    rows = [
        (dot(a_target, pair.y), _ONE, dot(a_base, pair.x))
        for pair in (pair_at, pair_below)
    ]
    sol = solve_linear_system_2x2(
        rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2]
    )
    assert sol is not None, (
        "a pair at the joint maximin and one below it never align"
    )
    ratio, offset = sol
    assert ratio > 0, "payoff scales are positive"
    return ColumnCalibration(pair_at.columns[1], ratio, offset)


def build_surrogate_and_J_xstar(calibrations, jhat, directions, base):
    """Assemble the surrogate matrix and read off the tight output.

    Candidate columns become their rescaled hidden payoffs; every
    other column gets a constant above all of them so it never binds.
    The exact maximin of the surrogate then gives the witness strategy
    (lexicographically least) and the tight set.
    """
    n = len(directions)
    m = len(directions[base])
    scale = {base: (_ONE, _ZERO)}
    for cal in calibrations:
        scale[cal.column] = (cal.ratio, cal.offset)
    assert set(scale) == set(jhat), "one calibration per candidate column"
    columns = {}
    top = None
    for j in sorted(jhat):
        ratio, offset = scale[j]
        a = directions[j]
        col = tuple(ratio * a[i] + offset for i in range(m))
        columns[j] = col
        peak = max(col)
        top = peak if top is None else max(top, peak)
    lid = 1 + top
    surrogate = tuple(
        tuple(columns[j][i] if j in columns else lid for j in range(n))
        for i in range(m)
    )
    res = maximin(surrogate, range(n))
    tight = frozenset(
        j for j in jhat if matrix_payoff(surrogate, res.witness, j) == res.value
    )
    assert tight, "the surrogate maximin is attained on a candidate column"
    return CalibrationResult(frozenset(jhat), surrogate, tight, tuple(res.witness))


def _marker_surrogate(m, n, tight):
    """Placeholder surrogate for outcomes settled without ratios: tight
    columns read zero, the rest one, so the surrogate maximin lands on
    the tight set everywhere."""
    return tuple(
        tuple(_ZERO if j in tight else _ONE for j in range(n)) for _ in range(m)
    )


def calibrate(session, relations, model, bit_budget=None):
    """Full calibration pass over one oracle session.

    A coincident column settles everything immediately: it carries the
    full maximin, so a pure strategy on its best row is the witness.
    Otherwise each candidate column is calibrated against the anchor
    through its planned route, with pair runs shared between routes,
    and the surrogate maximin produces the output.  Any pair whose
    restricted maximin turns out to be global short-circuits the whole
    stage.
    """
    session.set_phase("calibration")
    m, n = session.m, session.n
    flagged = model.coincident_columns()
    if flagged:
        pick = min(flagged)
        x_star = tuple(
            _ONE if i == min(relations.best_rows[pick]) else _ZERO for i in range(m)
        )
        only = frozenset((pick,))
        return CalibrationResult(
            only, _marker_surrogate(m, n, only), only, x_star, "coincident"
        )
    plan = normalize_labels(model, relations)
    base = plan.base
    jhat = compute_Jhat(relations, base, frozenset(range(n)) - plan.excluded)
    directions = model.directions
    memo = {}

    def learned(b, t):
        # ratio gamma_t / gamma_b and offset (beta_t - beta_b) / gamma_b
        if (b, t) not in memo:
            order = _orientation(relations, b, t)
            assert order is not None, (
                "pair routes only join columns with distinct best rows"
            )
            lead, follow = order
            pair_at, d_follow = first_reference_pair(
                session, lead, follow, directions[lead], directions[follow],
                bit_budget,
            )
            d_lead = dot(directions[lead], pair_at.x)
            others = {
                k: directions[k] for k in range(n) if k not in (lead, follow)
            }
            below = second_reference_pair(
                session, lead, follow, directions[lead], directions[follow],
                d_lead, d_follow, others, relations.best_rows, bit_budget,
            )
            if isinstance(below, ShortCircuit):
                raise _Abort(below)
            cal = solve_ratios(
                pair_at, below, directions[lead], directions[follow]
            )
            memo[(lead, follow)] = (cal.ratio, cal.offset)
            memo[(follow, lead)] = (1 / cal.ratio, -cal.offset / cal.ratio)
        return memo[(b, t)]

    calibrations = []
    try:
        for j in sorted(jhat):
            if j == base:
                continue
            route = plan.routes[j]
            if isinstance(route, tuple):
                hop = route[1]
                r_hop, o_hop = learned(base, hop)
                r_sub, o_sub = learned(j, hop)
                ratio = r_hop / r_sub
                offset = o_hop - o_sub * ratio
            else:
                ratio, offset = learned(base, j)
            calibrations.append(ColumnCalibration(j, ratio, offset))
    except _Abort as stop:
        cut = stop.shortcut
        return CalibrationResult(
            jhat,
            _marker_surrogate(m, n, cut.tight_set),
            cut.tight_set,
            cut.x_star,
            "shortcut",
        )
    return build_surrogate_and_J_xstar(calibrations, jhat, directions, base)


def calibration_to_json(result):
    """JSON view of a calibration outcome for reports."""
    return json.dumps(
        {
            "jhat": sorted(result.jhat),
            "surrogate": [[rat_str(v) for v in row] for row in result.surrogate],
            "tight_set": sorted(result.tight_set),
            "x_star": [rat_str(v) for v in result.x_star],
            "pathway": result.pathway,
        },
        separators=(",", ":"),
    )
