"""Query boundary between learners and the hidden game.

An OracleSession wraps the true game and answers yes/no equilibrium queries
about fake follower matrices without ever revealing the true leader payoffs.
Every answered query is appended to an immutable ledger carrying a sequence
number, the query kind, the learner-declared phase label, a payload digest,
and the answer, so runs are replayable and query complexity is measurable.

Three query kinds exist.  SSE asks whether a profile is an equilibrium of
(hidden leader, fake follower).  ER asks whether a column is an equilibrium
response of that pair; it needs the caller to supply the leader-payoff
direction for the column, reduces to one SSE check at an extreme point, and
counts as a single ledger entry.  BRC replaces the fake matrix with explicit
per-column best-response regions and is only answered by sessions opened in
"brc" mode.

Global equilibrium values are memoized per fake matrix; repeated queries stay
cheap but every call still lands in the ledger, with deduplication potential
reported separately.
"""

from dataclasses import dataclass
import hashlib
import json
import time
from fractions import Fraction
from itertools import product

from .games import (
    Game,
    StrategyProfile,
    best_response_region,
    best_response_set,
    matrix_payoff,
    sse_value,
)
from .linprog import LinearProgram, lp_solve_exact, lp_solve_lexmin
from .rationals import rat, rat_str

MODES = ("payoff", "brc")


class MalformedQueryError(ValueError):
    """Query payload rejected before answering; nothing is counted."""


class OracleModeError(RuntimeError):
    """Query kind not available in the session's mode."""


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    kind: str
    phase: str
    digest: str
    answer: bool
    payload: object = None


@dataclass(frozen=True)
class QueryLedgerReport:
    total: int
    per_phase: dict
    wall_time: float
    distinct_digests: int
    er_internal_sse: int


def _digest(wire):
    return hashlib.sha256(wire.encode("ascii")).hexdigest()[:16]


def _matrix_wire(matrix):
    return json.dumps(
        [[rat_str(v) for v in row] for row in matrix], separators=(",", ":")
    )


def _regions_wire(regions):
    return json.dumps(
        [
            [[[rat_str(c) for c in coeffs], rel, rat_str(rhs)] for coeffs, rel, rhs in region]
            for region in regions
        ],
        separators=(",", ":"),
    )


def _violation_options(coeffs, rel, rhs):
    """Ways to strictly violate one constraint, as (coeffs, sign) rows where
    sign +1 means coeffs.x - eps >= rhs and -1 means coeffs.x + eps <= rhs."""
    if rel == "<=":
        return [(coeffs, +1, rhs)]
    if rel == ">=":
        return [(coeffs, -1, rhs)]
    if rel == "=":
        return [(coeffs, +1, rhs), (coeffs, -1, rhs)]
    raise MalformedQueryError(f"bad relation {rel!r}")


class OracleSession:
    """Answers queries against a hidden game and records them."""

    def __init__(self, true_game, mode="payoff", record_payloads=False):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not isinstance(true_game, Game):
            raise TypeError("the session wraps a Game instance")
        self._hidden = true_game
        self._mode = mode
        self._record_payloads = record_payloads
        self._entries = []
        self._phase = "unlabeled"
        self._value_cache = {}
        self._er_internal_sse = 0
        self._started = time.monotonic()

    @property
    def m(self):
        return self._hidden.m

    @property
    def n(self):
        return self._hidden.n

    @property
    def mode(self):
        return self._mode

    def set_phase(self, label):
        self._phase = str(label)

    def entries(self):
        return tuple(self._entries)

    def _append(self, kind, digest, answer, payload):
        entry = LedgerEntry(
            seq=len(self._entries),
            kind=kind,
            phase=self._phase,
            digest=digest,
            answer=answer,
            payload=payload if self._record_payloads else None,
        )
        self._entries.append(entry)
        return answer

    def _check_matrix(self, fake_follower):
        fake = tuple(tuple(rat(v) for v in row) for row in fake_follower)
        if len(fake) != self.m or any(len(row) != self.n for row in fake):
            raise MalformedQueryError("fake matrix shape does not match the game")
        return fake

    def _global_value(self, fake):
        if fake not in self._value_cache:
            self._value_cache[fake] = sse_value(Game(self._hidden.leader, fake))
        return self._value_cache[fake]

    def _evaluate_sse(self, fake, profile):
        if profile.response not in best_response_set(fake, profile.strategy):
            return False
        achieved = matrix_payoff(self._hidden.leader, profile.strategy, profile.response)
        return achieved == self._global_value(fake)

    def query_sse(self, fake_follower, profile):
        """Whether the profile is an equilibrium of (hidden leader, fake)."""
        fake = self._check_matrix(fake_follower)
        if len(profile.strategy) != self.m or profile.response >= self.n:
            raise MalformedQueryError("profile shape does not match the game")
        answer = self._evaluate_sse(fake, profile)
        payload = (_matrix_wire(fake), profile)
        return self._append("SSE", _digest(payload[0]), answer, payload)

    def query_er(self, fake_follower, j, a_j):
        """Whether column j is an equilibrium response of (hidden leader, fake).

        a_j must be the leader-payoff direction for column j, so the extreme
        point of j's best-response region can be computed caller-side; the
        check then costs one internal SSE evaluation but a single ledger
        entry.  An empty best-response region answers False for free.
        """
        fake = self._check_matrix(fake_follower)
        if not 0 <= j < self.n:
            raise MalformedQueryError("column out of range")
        direction = tuple(rat(v) for v in a_j)
        if len(direction) != self.m:
            raise MalformedQueryError("direction length does not match the game")
        ones = [Fraction(1)] * self.m
        lp = LinearProgram(
            self.m,
            list(direction),
            sense="max",
            constraints=[(ones, "=", Fraction(1))] + best_response_region(fake, j),
        )
        res = lp_solve_lexmin(lp)
        if not res.optimal:
            return False
        probe = StrategyProfile(res.point, j)
        answer = self._evaluate_sse(fake, probe)
        self._er_internal_sse += 1
        payload = (_matrix_wire(fake), probe)
        return self._append("ER", _digest(payload[0]), answer, payload)

    def _check_regions(self, br_regions):
        regions = []
        for region in br_regions:
            checked = []
            for coeffs, rel, rhs in region:
                coeffs = tuple(rat(c) for c in coeffs)
                if len(coeffs) != self.m:
                    raise MalformedQueryError("region constraint arity mismatch")
                if rel not in ("<=", ">=", "="):
                    raise MalformedQueryError(f"bad relation {rel!r}")
                checked.append((coeffs, rel, rat(rhs)))
            regions.append(tuple(checked))
        if len(regions) != self.n:
            raise MalformedQueryError("need one region per column")
        return tuple(regions)

    def _covers_simplex(self, regions):
        """Whether the union of the regions contains the whole simplex.

        A point escapes the union iff it strictly violates one constraint of
        every region, so each choice of violated constraints is one exact LP
        over (x, margin); any positive margin exhibits an uncovered point.
        """
        option_lists = []
        for region in regions:
            options = []
            for con in region:
                options.extend(_violation_options(*con))
            if not options:
                return True
            option_lists.append(options)
        ones = [Fraction(1)] * self.m + [Fraction(0)]
        for choice in product(*option_lists):
            cons = [(ones, "=", Fraction(1)), ([Fraction(0)] * self.m + [Fraction(1)], "<=", Fraction(1))]
            for coeffs, sign, rhs in choice:
                row = list(coeffs) + [Fraction(-sign)]
                cons.append((row, ">=" if sign > 0 else "<=", rhs))
            lp = LinearProgram(
                self.m + 1,
                [Fraction(0)] * self.m + [Fraction(1)],
                sense="max",
                constraints=cons,
            )
            res = lp_solve_exact(lp)
            if res.optimal and res.value > 0:
                return False
        return True

    def _region_optimum(self, region, j):
        ones = [Fraction(1)] * self.m
        lp = LinearProgram(
            self.m,
            [self._hidden.leader[i][j] for i in range(self.m)],
            sense="max",
            constraints=[(ones, "=", Fraction(1))] + list(region),
        )
        res = lp_solve_exact(lp)
        return res.value if res.optimal else None

    def query_br_correspondence(self, br_regions, profile):
        """Equilibrium check where the follower plays by explicit regions.

        Available in "brc" mode only.  The regions must jointly cover the
        simplex; the answer is whether the profile's strategy lies in its
        response's region and attains the best leader payoff reachable over
        any column's region.
        """
        if self._mode != "brc":
            raise OracleModeError("BR-correspondence queries need a session in brc mode")
        regions = self._check_regions(br_regions)
        if len(profile.strategy) != self.m or profile.response >= self.n:
            raise MalformedQueryError("profile shape does not match the game")
        if not self._covers_simplex(regions):
            raise MalformedQueryError("regions do not cover the simplex")
        x = profile.strategy
        member = True
        for coeffs, rel, rhs in regions[profile.response]:
            lhs = sum(c * v for c, v in zip(coeffs, x))
            if rel == "<=" and lhs > rhs:
                member = False
            elif rel == ">=" and lhs < rhs:
                member = False
            elif rel == "=" and lhs != rhs:
                member = False
        if member:
            best = None
            for j, region in enumerate(regions):
                opt = self._region_optimum(region, j)
                if opt is not None and (best is None or opt > best):
                    best = opt
            achieved = matrix_payoff(self._hidden.leader, x, profile.response)
            answer = best is not None and achieved == best
        else:
            answer = False
        payload = (_regions_wire(regions), profile)
        return self._append("BRC", _digest(payload[0]), answer, payload)

    def ledger_report(self):
        """Snapshot of query counts; free of side effects."""
        per_phase = {}
        for entry in self._entries:
            per_phase[entry.phase] = per_phase.get(entry.phase, 0) + 1
        return QueryLedgerReport(
            total=len(self._entries),
            per_phase=per_phase,
            wall_time=time.monotonic() - self._started,
            distinct_digests=len({e.digest for e in self._entries}),
            er_internal_sse=self._er_internal_sse,
        )

    def transcript_jsonl(self):
        """One JSON line per query, in answer order."""
        lines = []
        for e in self._entries:
            lines.append(
                json.dumps(
                    {
                        "seq": e.seq,
                        "kind": e.kind,
                        "phase": e.phase,
                        "digest": e.digest,
                        "answer": e.answer,
                    },
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines)
