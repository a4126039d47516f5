"""Warm-up probes against sessions with known games."""

import random
from fractions import Fraction

from ssekit.games import Game
from ssekit.oracle import OracleSession
from ssekit.warmup import (
    EQUAL,
    GREATER,
    LESS,
    learn_Ij,
    learn_relation_table,
    relation_Mj_Mk,
    relation_Mj_entry,
)

from generators import random_game


def _direct_relation(a, b):
    return LESS if a < b else EQUAL if a == b else GREATER


def _column_max(leader, j):
    return max(row[j] for row in leader)


class TestLearnIj:
    def test_fixture_columns(self, g1):
        session = OracleSession(g1)
        assert learn_Ij(session, 0) == {0}
        assert learn_Ij(session, 1) == {1}

    def test_all_equal_column_returns_every_row(self):
        game = Game([[5, 1], [5, 7], [5, 0]], [[0, 0], [0, 0], [0, 0]])
        session = OracleSession(game)
        assert learn_Ij(session, 0) == {0, 1, 2}
        assert learn_Ij(session, 1) == {1}

    def test_costs_exactly_m_queries_per_column(self, g1):
        session = OracleSession(g1)
        learn_Ij(session, 0)
        learn_Ij(session, 1)
        assert session.ledger_report().total == g1.m * g1.n


class TestEntryRelations:
    def test_fixture_orderings(self, g1):
        session = OracleSession(g1)
        best0 = learn_Ij(session, 0)
        best1 = learn_Ij(session, 1)
        assert relation_Mj_entry(session, 0, 1, 1, best0) == GREATER
        assert relation_Mj_entry(session, 1, 0, 0, best1) == LESS

    def test_same_column_is_answered_from_the_cache(self, g1):
        session = OracleSession(g1)
        best0 = learn_Ij(session, 0)
        before = session.ledger_report().total
        assert relation_Mj_entry(session, 0, 0, 0, best0) == EQUAL
        assert relation_Mj_entry(session, 0, 1, 0, best0) == GREATER
        assert session.ledger_report().total == before

    def test_costs_at_most_two_queries(self, g1):
        session = OracleSession(g1)
        best0 = learn_Ij(session, 0)
        before = session.ledger_report().total
        relation_Mj_entry(session, 0, 1, 1, best0)
        assert session.ledger_report().total - before <= 2


class TestValueRelations:
    def test_fixture_column_optima(self, g1):
        session = OracleSession(g1)
        best0 = learn_Ij(session, 0)
        best1 = learn_Ij(session, 1)
        assert relation_Mj_Mk(session, 0, 1, best0, best1) == GREATER
        assert relation_Mj_Mk(session, 1, 0, best1, best0) == LESS
        assert relation_Mj_Mk(session, 0, 0, best0, best0) == EQUAL

    def test_uniform_game_ties_everywhere(self):
        game = Game([[2, 2], [2, 2]], [[0, 0], [0, 0]])
        session = OracleSession(game)
        table = learn_relation_table(session)
        assert all(rel == EQUAL for rel in table.value_relations.values())
        assert table.argmin_value_columns() == {0, 1}


class TestRelationTable:
    def test_matches_direct_computation_on_random_games(self):
        rng = random.Random(55)
        for _ in range(12):
            game = random_game(rng)
            m, n = game.m, game.n
            session = OracleSession(game)
            table = learn_relation_table(session)
            for j in range(n):
                expected = {i for i in range(m) if game.leader[i][j] == _column_max(game.leader, j)}
                assert table.best_rows[j] == expected
            for j in range(n):
                for i in range(m):
                    for k in range(n):
                        expected = _direct_relation(
                            _column_max(game.leader, j), game.leader[i][k]
                        )
                        assert table.entry_relations[(j, i, k)] == expected
            for j in range(n):
                for k in range(n):
                    expected = _direct_relation(
                        _column_max(game.leader, j), _column_max(game.leader, k)
                    )
                    assert table.value_relations[(j, k)] == expected

    def test_argmin_columns_match_direct_minimum(self):
        rng = random.Random(56)
        for _ in range(12):
            game = random_game(rng)
            session = OracleSession(game)
            table = learn_relation_table(session)
            optima = [_column_max(game.leader, j) for j in range(game.n)]
            low = min(optima)
            assert table.argmin_value_columns() == {
                j for j, v in enumerate(optima) if v == low
            }

    def test_query_budget_and_phase_label(self, g1):
        session = OracleSession(g1)
        table = learn_relation_table(session)
        report = session.ledger_report()
        m, n = g1.m, g1.n
        assert report.per_phase == {"warmup": report.total}
        assert report.total <= m * n + 2 * n * m * n
        assert all(rows for rows in table.best_rows)
