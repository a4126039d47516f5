"""Oracle session behaviour: answers, ledger accounting, query boundaries."""

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

import ssekit
from ssekit.games import (
    Game,
    StrategyProfile,
    best_response_region,
    compute_sse,
    maximin,
)
from ssekit.oracle import (
    MalformedQueryError,
    OracleModeError,
    OracleSession,
)
from ssekit.polytope import enumerate_polytope_vertices
from ssekit.rationals import dot

from generators import random_simplex_point


def _random_fake(rng, m=2, n=2, denom=6):
    return [
        [Fraction(rng.randint(-denom * denom, denom * denom), rng.randint(1, denom)) for _ in range(n)]
        for _ in range(m)
    ]


def _fd_matrix(d):
    # Two columns against the g1 leader: the first constant zero, the second
    # affine with slope matching the leader's second column, crossing at d.
    a2 = (Fraction(1), Fraction(3))
    return [[Fraction(0), d - a2[0]], [Fraction(0), d - a2[1]]]


@pytest.fixture
def session(g1):
    return OracleSession(g1)


class TestSseQueries:
    def test_truthful_round_trip(self, g1, session):
        profile, _ = compute_sse(g1)
        assert session.query_sse(g1.follower, profile) is True

    def test_dominant_column_moves_the_equilibrium(self, session):
        fake = [[0, -1], [0, -1]]
        assert session.query_sse(fake, StrategyProfile((1, 0), 0)) is True
        assert session.query_sse(fake, StrategyProfile((0, 1), 0)) is False

    def test_dimension_mismatch_is_rejected_and_not_counted(self, session):
        with pytest.raises(MalformedQueryError):
            session.query_sse([[0, 1, 2], [1, 0, 2]], StrategyProfile((1, 0), 0))
        with pytest.raises(MalformedQueryError):
            session.query_sse([[0, 1], [1, 0]], StrategyProfile((1, 0, 0), 0))
        assert session.ledger_report().total == 0

    def test_repeated_queries_are_counted_but_deduplicated_in_digests(self, g1, session):
        profile, _ = compute_sse(g1)
        for _ in range(3):
            session.query_sse(g1.follower, profile)
        report = session.ledger_report()
        assert report.total == 3
        assert report.distinct_digests == 1


class TestErQueries:
    # The probe matrices pit a constant column against an affine one whose
    # crossing point d is the knob; the hidden game is g1, whose restricted
    # two-column maximin 5/2 is the critical crossing.

    def test_low_crossing_kills_the_affine_response(self, session):
        fake = _fd_matrix(Fraction(2))
        assert session.query_er(fake, 0, (4, 2)) is True
        assert session.query_er(fake, 1, (1, 3)) is False

    def test_critical_crossing_keeps_both_responses(self, session):
        fake = _fd_matrix(Fraction(5, 2))
        assert session.query_er(fake, 0, (4, 2)) is True
        assert session.query_er(fake, 1, (1, 3)) is True

    def test_er_counts_once_and_records_the_inner_check(self, session):
        fake = _fd_matrix(Fraction(2))
        session.query_er(fake, 0, (4, 2))
        report = session.ledger_report()
        assert report.total == 1
        assert report.er_internal_sse == 1
        assert session.entries()[0].kind == "ER"

    def test_empty_region_answers_false_for_free(self, session):
        fake = [[0, -1], [0, -1]]
        assert session.query_er(fake, 1, (1, 3)) is False
        assert session.ledger_report().total == 0

    def test_er_true_implies_the_probe_profile_passes_sse(self, g1):
        rng = random.Random(15)
        for _ in range(20):
            session = OracleSession(g1, record_payloads=True)
            fake = _random_fake(rng)
            j = rng.randrange(2)
            a_j = tuple(g1.leader[i][j] for i in range(2))
            if session.query_er(fake, j, a_j):
                probe = session.entries()[-1].payload[1]
                fresh = OracleSession(g1)
                assert fresh.query_sse(fake, probe) is True


class TestBrcQueries:
    def test_matrix_shaped_regions_reproduce_sse_answers(self, g1):
        rng = random.Random(7)
        brc = OracleSession(g1, mode="brc")
        plain = OracleSession(g1)
        for _ in range(15):
            fake = _random_fake(rng)
            regions = [best_response_region(fake, j) for j in range(2)]
            x = random_simplex_point(rng, 2)
            j = rng.randrange(2)
            profile = StrategyProfile(x, j)
            assert brc.query_br_correspondence(regions, profile) == plain.query_sse(
                fake, profile
            )

    def test_three_column_partition_matches_vertex_enumeration(self):
        leader = [[6, 1, 0], [2, 5, 0], [0, 2, 4]]
        follower = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        game = Game(leader, follower)
        brc = OracleSession(game, mode="brc")
        a1 = tuple(Fraction(leader[i][0]) for i in range(3))
        a2 = tuple(Fraction(leader[i][1]) for i in range(3))
        d1, d2 = Fraction(3), Fraction(2)
        regions = [
            [(a2, ">=", d2), (a1, "<=", d1)],
            [(a2, "<=", d2)],
            [(a2, ">=", d2), (a1, ">=", d1)],
        ]
        best = None
        for j, region in enumerate(regions):
            for y in enumerate_polytope_vertices(3, region):
                value = dot(y, a1 if j == 0 else a2 if j == 1 else tuple(
                    Fraction(leader[i][2]) for i in range(3)
                ))
                if best is None or value > best:
                    best = value
        boundary = enumerate_polytope_vertices(3, [(a1, "=", d1), (a2, ">=", d2)])
        assert boundary
        for x in boundary:
            expected = dot(x, a1) == best
            assert brc.query_br_correspondence(regions, StrategyProfile(x, 0)) == expected

    def test_payoff_mode_rejects_brc(self, session):
        with pytest.raises(OracleModeError):
            session.query_br_correspondence([[], []], StrategyProfile((1, 0), 0))

    def test_non_covering_regions_are_malformed(self, g1):
        brc = OracleSession(g1, mode="brc")
        a2 = (Fraction(1), Fraction(3))
        regions = [
            [(a2, ">=", Fraction(5, 2))],
            [(a2, "<=", Fraction(2))],
        ]
        with pytest.raises(MalformedQueryError):
            brc.query_br_correspondence(regions, StrategyProfile((1, 0), 0))
        assert brc.ledger_report().total == 0

    def test_unconstrained_region_covers_everything(self, g1):
        brc = OracleSession(g1, mode="brc")
        regions = [[], [((1, 3), "<=", Fraction(2))]]
        brc.query_br_correspondence(regions, StrategyProfile((1, 0), 0))
        assert brc.ledger_report().total == 1


class TestLedger:
    def test_fresh_session_reports_zero(self, session):
        report = session.ledger_report()
        assert report.total == 0
        assert report.per_phase == {}

    def test_phase_counts_sum_to_total(self, g1, session):
        profile, _ = compute_sse(g1)
        session.set_phase("warmup")
        session.query_sse(g1.follower, profile)
        session.query_sse(g1.follower, profile)
        session.set_phase("search")
        session.query_sse(g1.follower, profile)
        report = session.ledger_report()
        assert report.per_phase == {"warmup": 2, "search": 1}
        assert sum(report.per_phase.values()) == report.total == 3

    def test_transcript_lines_replay_the_ledger(self, g1, session):
        profile, _ = compute_sse(g1)
        session.set_phase("probe")
        session.query_sse(g1.follower, profile)
        lines = session.transcript_jsonl().splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record == {
            "seq": 0,
            "kind": "SSE",
            "phase": "probe",
            "digest": session.entries()[0].digest,
            "answer": True,
        }

    def test_identical_query_sequences_give_identical_ledgers(self, g1):
        rng = random.Random(33)
        queries = []
        for _ in range(10):
            fake = _random_fake(rng)
            queries.append((fake, StrategyProfile(random_simplex_point(rng, 2), rng.randrange(2))))
        ledgers = []
        for _ in range(2):
            session = OracleSession(g1)
            for fake, profile in queries:
                session.query_sse(fake, profile)
            ledgers.append(session.transcript_jsonl())
        assert ledgers[0] == ledgers[1]


class TestBoundaryIntegrity:
    LEARNER_MODULES = ("warmup.py", "gradient.py", "calibrate.py", "planner.py")

    def test_learner_modules_never_touch_the_hidden_game(self):
        src = Path(ssekit.__file__).parent
        missing = [name for name in self.LEARNER_MODULES if not (src / name).exists()]
        assert not missing, f"learner modules not present yet: {missing}"
        for name in self.LEARNER_MODULES:
            text = (src / name).read_text()
            assert "_hidden" not in text, name
            assert "true_game" not in text, name

    def test_session_exposes_no_game_accessor(self, session):
        public = {a for a in dir(session) if not a.startswith("_")}
        assert public == {
            "m",
            "n",
            "mode",
            "set_phase",
            "entries",
            "query_sse",
            "query_er",
            "query_br_correspondence",
            "ledger_report",
            "transcript_jsonl",
        }
