"""Cross-column calibration: reference pairs, ratios, and the surrogate."""

import random
from fractions import Fraction

import pytest

from generators import random_game
from ssekit.calibrate import (
    AT_MAXIMIN,
    BELOW_MAXIMIN,
    ColumnCalibration,
    ReferencePair,
    ShortCircuit,
    _halve_then_balance,
    _pair_cover,
    _shrink_limit,
    build_surrogate_and_J_xstar,
    calibrate,
    calibration_to_json,
    compute_Jhat,
    first_reference_pair,
    normalize_labels,
    second_reference_pair,
    second_reference_pair_brc,
    solve_ratios,
)
from ssekit.games import Game, maximin, matrix_payoff
from ssekit.gradient import GradientModel, learn_gradient_model
from ssekit.linprog import LinearProgram, lp_solve_exact
from ssekit.oracle import OracleModeError, OracleSession
from ssekit.rationals import dot
from ssekit.sternbrocot import BoundExceededError
from ssekit.warmup import EQUAL, GREATER, RelationTable, learn_relation_table

F = Fraction


def _session(leader, follower=None, mode="payoff"):
    m, n = len(leader), len(leader[0])
    follower = follower or [[0] * n for _ in range(m)]
    return OracleSession(Game(leader, follower), mode=mode)


def _pipeline(leader, follower=None):
    s = _session(leader, follower)
    table = learn_relation_table(s)
    model = learn_gradient_model(s, table)
    return s, table, model


def _lm(leader):
    return tuple(tuple(F(v) for v in row) for row in leader)


def _affine_fit(leader, j, a):
    """Exact scale and shift of column j along direction a."""
    col = [F(row[j]) for row in leader]
    i0 = 0
    i1 = next(i for i in range(len(a)) if a[i] != a[i0])
    gamma = (col[i0] - col[i1]) / (a[i0] - a[i1])
    beta = col[i0] - gamma * a[i0]
    return gamma, beta


# Fixture with a genuine second-pair run: no pair's restricted maximin
# reaches the full maximin, so covers exist and the search completes.
FULLPATH = [[4, 0, 2], [0, 4, 3]]

# Fixture whose relabeling needs a detour: columns 0 and 1 peak together
# on row 0, so neither dips on the other's best rows.
VIA = [[4, 4, 0], [0, 1, 4], [1, 0, 4]]


class TestComputeJhat:
    def test_g1_both_columns(self, g1):
        s = OracleSession(g1)
        table = learn_relation_table(s)
        assert compute_Jhat(table, 1) == frozenset({0, 1})

    def test_high_column_left_out(self):
        _, table, _ = _pipeline([[5, 1, 9], [4, 3, 8]])
        members = compute_Jhat(table, 0)
        assert 0 in members and 1 in members
        assert 2 not in members

    def test_constant_base_rejected(self):
        _, table, _ = _pipeline([[5], [5]], [[0], [1]])
        with pytest.raises(AssertionError):
            compute_Jhat(table, 0)


class TestNormalizeLabels:
    def test_g1_direct(self, g1):
        s = OracleSession(g1)
        table = learn_relation_table(s)
        model = learn_gradient_model(s, table)
        plan = normalize_labels(model, table)
        assert plan.base == 1
        assert plan.excluded == frozenset()
        assert plan.routes == {0: "direct"}

    def test_constant_column_excluded(self):
        _, table, model = _pipeline([[4, 1, 7], [2, 3, 7]])
        plan = normalize_labels(model, table)
        assert plan.excluded == frozenset({2})
        assert plan.base == 1
        assert plan.routes == {0: "direct"}

    def test_swapped_roles(self):
        # Column 1 peaks only on row 0 where column 0 matches it exactly,
        # so the dip that orients the pair shows up on column 0's side.
        leader = [[4, 4, 0], [4, 1, 0], [0, 0, 5]]
        _, table, model = _pipeline(leader)
        plan = normalize_labels(model, table)
        assert plan.base == 0
        assert plan.routes == {1: "swapped", 2: "direct"}

    def test_via_route(self):
        _, table, model = _pipeline(VIA)
        plan = normalize_labels(model, table)
        assert plan.base == 0
        assert plan.routes == {1: ("via", 2), 2: "direct"}

    def test_no_hop_available(self):
        # Hand-built table: both columns peak on row 0 at the same value
        # and there is no third column to route through.
        best = (frozenset({0}), frozenset({0}))
        entries = {}
        for j in range(2):
            for k in range(2):
                entries[(j, 0, k)] = EQUAL
                entries[(j, 1, k)] = GREATER
        values = {(j, k): EQUAL for j in range(2) for k in range(2) if j != k}
        table = RelationTable(best, entries, values)
        model = GradientModel(((F(1), F(0)), (F(2), F(0))))
        with pytest.raises(AssertionError):
            normalize_labels(model, table)


class TestFirstReferencePair:
    def test_g1_split(self, g1):
        s = OracleSession(g1)
        table = learn_relation_table(s)
        model = learn_gradient_model(s, table)
        pair, d_star = first_reference_pair(
            s, 1, 0, model.directions[1], model.directions[0]
        )
        assert d_star == F(-9, 8)
        assert pair.x == (F(1, 4), F(3, 4))
        assert pair.y == (F(1, 4), F(3, 4))
        assert pair.kind == AT_MAXIMIN
        assert pair.columns == (1, 0)
        value = matrix_payoff(g1.leader, pair.x, 1)
        assert value == maximin(g1.leader, (0, 1)).value
        assert matrix_payoff(g1.leader, pair.y, 0) == value
        assert dot(model.directions[1], pair.x) == F(-39, 28)

    def test_budget_exhausted(self, g1):
        s = OracleSession(g1)
        table = learn_relation_table(s)
        model = learn_gradient_model(s, table)
        with pytest.raises(BoundExceededError):
            first_reference_pair(
                s, 1, 0, model.directions[1], model.directions[0], bit_budget=1
            )

    def test_split_matches_engine_threshold(self):
        # Identical leading columns: the search halts on an exact hit.
        leader = [[2, 2, 0], [0, 0, 5]]
        s, table, model = _pipeline(leader)
        pair, d_star = first_reference_pair(
            s, 0, 2, model.directions[0], model.directions[2]
        )
        gamma, beta = _affine_fit(leader, 2, model.directions[2])
        restricted = maximin(_lm(leader), (0, 2)).value
        assert d_star == (restricted - beta) / gamma
        assert matrix_payoff(_lm(leader), pair.x, 0) == restricted
        assert matrix_payoff(_lm(leader), pair.y, 2) == restricted


def _pair_setup(leader, lead, follow, mode="payoff"):
    """Model on a payoff session, then a fresh session in the asked mode
    positioned for a second-pair run on (lead, follow)."""
    _, table, model = _pipeline(leader)
    s = _session(leader, mode=mode)
    dirs = model.directions
    probe = _session(leader)
    pair_at, d_follow = first_reference_pair(
        probe, lead, follow, dirs[lead], dirs[follow]
    )
    d_lead = dot(dirs[lead], pair_at.x)
    others = {k: dirs[k] for k in range(len(dirs)) if k not in (lead, follow)}
    return s, table, dirs, pair_at, d_lead, d_follow, others


class TestSecondReferencePair:
    def test_g1_short_circuits(self, g1):
        s = OracleSession(g1)
        table = learn_relation_table(s)
        model = learn_gradient_model(s, table)
        pair_at, d_follow = first_reference_pair(
            s, 1, 0, model.directions[1], model.directions[0]
        )
        d_lead = dot(model.directions[1], pair_at.x)
        out = second_reference_pair(
            s, 1, 0, model.directions[1], model.directions[0],
            d_lead, d_follow, {}, table.best_rows,
        )
        assert isinstance(out, ShortCircuit)
        assert out.tight_set == frozenset({0, 1})
        assert out.x_star == (F(1, 4), F(3, 4))

    def test_three_column_shortcut(self):
        # Column 2 is constant, so the pair is (0, 1); its restricted
        # maximin is already the full maximin and no cover exists.
        leader = [[4, 0, 3], [0, 4, 3]]
        s, table, dirs, pair_at, d_lead, d_follow, others = _pair_setup(
            leader, 0, 1
        )
        out = second_reference_pair(
            s, 0, 1, dirs[0], dirs[1], d_lead, d_follow, others, table.best_rows
        )
        assert isinstance(out, ShortCircuit)
        assert out.x_star == (F(1, 2), F(1, 2))

    def test_full_run_lands_below(self):
        s, table, dirs, pair_at, d_lead, d_follow, others = _pair_setup(
            FULLPATH, 2, 0
        )
        out = second_reference_pair(
            s, 2, 0, dirs[2], dirs[0], d_lead, d_follow, others, table.best_rows
        )
        assert isinstance(out, ReferencePair)
        assert out.kind == BELOW_MAXIMIN
        lm = _lm(FULLPATH)
        vx = matrix_payoff(lm, out.x, 2)
        vy = matrix_payoff(lm, out.y, 0)
        assert vx == vy
        assert vx < maximin(lm, (0, 2)).value
        assert vx == F(23, 10)

    def test_halving_budget(self):
        def never(db, dt, lazy):
            return False, False

        with pytest.raises(BoundExceededError):
            _halve_then_balance(never, F(1), F(1), F(1), 8)

    def test_shrink_window_supports_search(self):
        # Engine-side check that the searched rectangle really keeps one
        # of the pair responsive: for every rival column, shrinking both
        # thresholds by less than the rival's breakeven slack cannot hand
        # it the equilibrium response at full pair value.
        leader = FULLPATH
        s, table, dirs, pair_at, d_lead, d_follow, others = _pair_setup(
            leader, 2, 0
        )
        cover = _pair_cover(
            s, 2, 0, dirs[2], dirs[0], d_lead, d_follow, others, table.best_rows,
            None,
        )
        assert cover is not None
        m, n = s.m, s.n
        seed = _shrink_limit(m, dirs[2], dirs[0], d_lead, d_follow)
        assert seed > 0
        lm = _lm(leader)
        fits = {j: _affine_fit(leader, j, dirs[j]) for j in (2, 0)}
        stars = {2: d_lead, 0: d_follow}
        best = None
        for k in range(n):
            if k in (2, 0):
                continue
            mu = [cover.matrix[i][k] for i in range(m)]
            rivals = [
                [cover.matrix[i][l] for i in range(m)]
                for l in range(n)
                if l not in (2, 0, k)
            ]
            # vars: x (m entries) then eps
            cons = [([F(1)] * m + [F(0)], "=", F(1))]
            for j in (2, 0):
                a = dirs[j]
                cons.append((list(a) + [F(1)], ">=", stars[j]))
            for g in rivals:
                cons.append(
                    ([mu[i] - g[i] for i in range(m)] + [F(0)], ">=", F(0))
                )
            for j in (2, 0):
                gamma, beta = fits[j]
                lead_col = [lm[i][k] for i in range(m)]
                cons.append(
                    (lead_col + [gamma], ">=", gamma * stars[j] + beta)
                )
            cons.append(([F(0)] * m + [F(1)], "<=", seed))
            res = lp_solve_exact(
                LinearProgram(m + 1, [F(0)] * m + [F(-1)], "max", cons)
            )
            if res.optimal:
                slack = -res.value
                best = slack if best is None else min(best, slack)
        assert best is None or best > 0


class TestSecondReferencePairBrc:
    def test_mode_guard(self, g1):
        s = OracleSession(g1)
        table = learn_relation_table(s)
        model = learn_gradient_model(s, table)
        with pytest.raises(OracleModeError):
            second_reference_pair_brc(
                s, 1, 0, model.directions[1], model.directions[0],
                F(0), F(0), {}, table.best_rows,
            )

    @pytest.mark.parametrize(
        "leader,lead,follow",
        [(FULLPATH, 2, 0), (FULLPATH, 2, 1), (VIA, 0, 2)],
    )
    def test_matches_fake_matrix_path(self, leader, lead, follow):
        sp, table, dirs, pair_at, d_lead, d_follow, others = _pair_setup(
            leader, lead, follow
        )
        out_p = second_reference_pair(
            sp, lead, follow, dirs[lead], dirs[follow],
            d_lead, d_follow, others, table.best_rows,
        )
        sb = _session(leader, mode="brc")
        out_b = second_reference_pair_brc(
            sb, lead, follow, dirs[lead], dirs[follow],
            d_lead, d_follow, others, table.best_rows,
        )
        assert isinstance(out_p, ReferencePair)
        assert isinstance(out_b, ReferencePair)
        lm = _lm(leader)
        vp = matrix_payoff(lm, out_p.x, lead)
        vb = matrix_payoff(lm, out_b.x, lead)
        assert vp == matrix_payoff(lm, out_p.y, follow)
        assert vb == matrix_payoff(lm, out_b.y, follow)
        assert vp == vb
        assert vp < maximin(lm, (lead, follow)).value

    def test_region_queries_only(self):
        sb = _session(FULLPATH, mode="brc")
        _, table, model = _pipeline(FULLPATH)
        dirs = model.directions
        probe = _session(FULLPATH)
        pair_at, d_follow = first_reference_pair(probe, 2, 0, dirs[2], dirs[0])
        d_lead = dot(dirs[2], pair_at.x)
        others = {1: dirs[1]}
        second_reference_pair_brc(
            sb, 2, 0, dirs[2], dirs[0], d_lead, d_follow, others, table.best_rows
        )
        kinds = {e.kind for e in sb.entries()}
        assert "SSE" not in kinds
        assert "BRC" in kinds


class TestSolveRatios:
    def _pair(self, x, y, cols, kind):
        return ReferencePair(tuple(x), tuple(y), cols, kind)

    def test_g1_scales(self):
        at = self._pair((F(1, 4), F(3, 4)), (F(1, 4), F(3, 4)), (1, 0), AT_MAXIMIN)
        below = self._pair((F(1, 2), F(1, 2)), (F(0), F(1)), (1, 0), BELOW_MAXIMIN)
        a1 = (F(-39, 7), F(0))
        a0 = (F(0), F(-3, 2))
        cal = solve_ratios(at, below, a1, a0)
        assert cal.column == 0
        assert cal.ratio == F(26, 7)
        assert cal.offset == F(39, 14)

    def test_identical_columns(self):
        a = (F(1), F(0))
        at = self._pair((F(1), F(0)), (F(1), F(0)), (0, 1), AT_MAXIMIN)
        below = self._pair(
            (F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)), (0, 1), BELOW_MAXIMIN
        )
        cal = solve_ratios(at, below, a, a)
        assert (cal.ratio, cal.offset) == (F(1), F(0))

    def test_pure_rescaling(self):
        a = (F(1), F(0))
        at = self._pair((F(1), F(0)), (F(1, 2), F(1, 2)), (0, 1), AT_MAXIMIN)
        below = self._pair(
            (F(1, 2), F(1, 2)), (F(1, 4), F(3, 4)), (0, 1), BELOW_MAXIMIN
        )
        cal = solve_ratios(at, below, a, a)
        assert (cal.ratio, cal.offset) == (F(2), F(0))

    def test_degenerate_pairs_rejected(self):
        a = (F(1), F(0))
        at = self._pair((F(1), F(0)), (F(1), F(0)), (0, 1), AT_MAXIMIN)
        below = self._pair((F(1, 2), F(1, 2)), (F(1), F(0)), (0, 1), BELOW_MAXIMIN)
        with pytest.raises(AssertionError):
            solve_ratios(at, below, a, a)

    def test_kind_checked(self):
        a = (F(1), F(0))
        at = self._pair((F(1), F(0)), (F(1), F(0)), (0, 1), AT_MAXIMIN)
        with pytest.raises(AssertionError):
            solve_ratios(at, at, a, a)


class TestBuildSurrogate:
    G1_DIRS = ((F(0), F(-3, 2)), (F(-39, 7), F(0)))

    def test_g1_tight_pair(self):
        cals = [ColumnCalibration(0, F(26, 7), F(39, 14))]
        res = build_surrogate_and_J_xstar(cals, frozenset({0, 1}), self.G1_DIRS, 1)
        assert res.x_star == (F(1, 4), F(3, 4))
        assert res.tight_set == frozenset({0, 1})
        assert res.pathway == "surrogate"
        value = matrix_payoff(res.surrogate, res.x_star, 0)
        assert value == F(-39, 28)

    def test_base_alone(self):
        res = build_surrogate_and_J_xstar([], frozenset({1}), self.G1_DIRS, 1)
        assert res.x_star == (F(0), F(1))
        assert res.tight_set == frozenset({1})

    def test_missing_calibration_rejected(self):
        with pytest.raises(AssertionError):
            build_surrogate_and_J_xstar([], frozenset({0, 1}), self.G1_DIRS, 1)


def _check_output_law(game, res):
    # The contract: u(x*, j) = M_J = M_[n] exactly, for every j in J.
    lm = game.leader
    value = maximin(lm, range(game.n)).value
    assert res.tight_set and res.tight_set <= res.jhat
    assert maximin(lm, sorted(res.tight_set)).value == value
    for j in res.tight_set:
        assert matrix_payoff(lm, res.x_star, j) == value


class TestCalibrateEndToEnd:
    def test_g1(self, g1):
        s = OracleSession(g1)
        table = learn_relation_table(s)
        model = learn_gradient_model(s, table)
        res = calibrate(s, table, model)
        assert res.pathway == "shortcut"
        assert res.tight_set == frozenset({0, 1})
        assert res.x_star == (F(1, 4), F(3, 4))
        _check_output_law(g1, res)

    def test_shortcut_with_spectator_column(self):
        leader = [[4, 0, 3], [0, 4, 3]]
        s, table, model = _pipeline(leader)
        res = calibrate(s, table, model)
        assert res.pathway == "shortcut"
        assert res.jhat == frozenset({0, 1})
        assert res.tight_set == frozenset({0, 1})
        assert res.x_star == (F(1, 2), F(1, 2))
        _check_output_law(Game(leader, [[0, 0, 0], [0, 0, 0]]), res)

    def _surrogate_exact(self, leader, res, model, base):
        gamma, beta = _affine_fit(leader, base, model.directions[base])
        for i in range(len(leader)):
            for j in res.jhat:
                assert res.surrogate[i][j] == (F(leader[i][j]) - beta) / gamma

    def test_full_surrogate(self):
        s, table, model = _pipeline(FULLPATH)
        res = calibrate(s, table, model)
        assert res.pathway == "surrogate"
        assert res.jhat == frozenset({0, 1, 2})
        assert res.tight_set == frozenset({0, 1})
        assert res.x_star == (F(1, 2), F(1, 2))
        _check_output_law(Game(FULLPATH, [[0, 0, 0], [0, 0, 0]]), res)
        self._surrogate_exact(FULLPATH, res, model, 2)

    def test_via_recomposition(self):
        s, table, model = _pipeline(VIA)
        res = calibrate(s, table, model)
        assert res.pathway == "surrogate"
        assert res.jhat == frozenset({0, 1, 2})
        assert res.tight_set == frozenset({0, 1, 2})
        assert res.x_star == (F(7, 15), F(4, 15), F(4, 15))
        _check_output_law(Game(VIA, [[0] * 3] * 3), res)
        self._surrogate_exact(VIA, res, model, 0)

    def test_coincident_column(self):
        leader = [[5, 1], [5, 7], [5, 0]]
        s, table, model = _pipeline(leader, [[1, 0], [0, 1], [1, 1]])
        res = calibrate(s, table, model)
        assert res.pathway == "coincident"
        assert res.jhat == res.tight_set == frozenset({0})
        assert res.x_star == (F(1), F(0), F(0))
        _check_output_law(Game(leader, [[0, 0]] * 3), res)

    def test_deterministic_replay(self):
        outs = []
        for _ in range(2):
            s, table, model = _pipeline(FULLPATH)
            outs.append((calibrate(s, table, model), s.transcript_jsonl()))
        assert outs[0][0] == outs[1][0]
        assert outs[0][1] == outs[1][1]

    def test_query_counts_stay_put(self):
        s, table, model = _pipeline(FULLPATH)
        calibrate(s, table, model)
        assert s.ledger_report().per_phase["calibration"] == 66
        s2, table2, model2 = _pipeline(VIA)
        calibrate(s2, table2, model2)
        assert s2.ledger_report().per_phase["calibration"] == 64

    def test_json_round_trip(self):
        s, table, model = _pipeline(FULLPATH)
        res = calibrate(s, table, model)
        blob = calibration_to_json(res)
        assert '"pathway":"surrogate"' in blob
        assert '"tight_set":[0,1]' in blob

    @pytest.mark.parametrize("seed", range(7000, 7012))
    def test_random_games_obey_output_law(self, seed):
        rng = random.Random(seed)
        game = random_game(rng)
        s = OracleSession(game)
        table = learn_relation_table(s)
        model = learn_gradient_model(s, table)
        res = calibrate(s, table, model)
        _check_output_law(game, res)
        calibration_to_json(res)
