"""First learning pass: pure best responses and singleton-value orderings.

Everything here is learned through equilibrium queries alone.  Two fake
matrices drive the whole pass.  A dominant-column matrix (probe column all
zeros, the rest all minus one) makes the probe column the follower's only
choice, so asking whether a pure profile is an equilibrium reveals whether
that row maximizes the leader's column payoff.  Adding a single zero entry at
(i, k) keeps column k reachable exactly at the pure strategy i, which turns
equilibrium answers into exact orderings between the column optimum M_j and
the single payoff u(i, k), and between column optima pairwise.

The results are cached in a RelationTable once per run; downstream learners
read the table instead of paying for repeated probes.
"""

from dataclasses import dataclass
from fractions import Fraction

from .games import StrategyProfile

LESS, EQUAL, GREATER = "<", "=", ">"


@dataclass(frozen=True)
class RelationTable:
    """Warm-up facts: best-response rows per column and exact orderings.

    best_rows[j] is the set of rows maximizing the leader's column j.
    entry_relations maps (j, i, k) to the ordering of M_j versus u(i, k);
    value_relations maps (j, k) to the ordering of M_j versus M_k.
    """

    best_rows: tuple
    entry_relations: dict
    value_relations: dict

    def argmin_value_columns(self):
        """Columns whose optimum is no larger than any other column's."""
        n = len(self.best_rows)
        return frozenset(
            j
            for j in range(n)
            if all(self.value_relations[(j, k)] != GREATER for k in range(n))
        )


def _pure(m, i):
    return tuple(Fraction(1) if t == i else Fraction(0) for t in range(m))


def _dominant_fake(m, n, j):
    return [
        [Fraction(0) if c == j else Fraction(-1) for c in range(n)] for _ in range(m)
    ]


def _two_live_fake(m, n, j, i, k):
    fake = _dominant_fake(m, n, j)
    fake[i][k] = Fraction(0)
    return fake


def learn_Ij(session, j):
    """Rows maximizing the leader's column j, in exactly m queries."""
    m, n = session.m, session.n
    fake = _dominant_fake(m, n, j)
    return frozenset(
        i
        for i in range(m)
        if session.query_sse(fake, StrategyProfile(_pure(m, i), j))
    )


def relation_Mj_entry(session, j, i, k, best_rows_j):
    """Ordering of M_j versus u(i, k), in at most two queries.

    best_rows_j must be learn_Ij(session, j); a representative of it anchors
    the M_j side.  The k = j case is answered from the cache for free.
    """
    if j == k:
        return EQUAL if i in best_rows_j else GREATER
    m, n = session.m, session.n
    fake = _two_live_fake(m, n, j, i, k)
    anchor = min(best_rows_j)
    if not session.query_sse(fake, StrategyProfile(_pure(m, anchor), j)):
        return LESS
    if session.query_sse(fake, StrategyProfile(_pure(m, i), k)):
        return EQUAL
    return GREATER


def relation_Mj_Mk(session, j, k, best_rows_j, best_rows_k):
    """Ordering of the two column optima; M_k is pinned by any of its rows."""
    if j == k:
        return EQUAL
    return relation_Mj_entry(session, j, min(best_rows_k), k, best_rows_j)


def learn_relation_table(session):
    """All warm-up facts in one sweep; phase-labeled 'warmup' in the ledger.

    Costs m * n queries for the best-row sets plus at most two per (j, i, k)
    triple; the pairwise column-optimum orderings reuse the triples and are
    free.
    """
    session.set_phase("warmup")
    m, n = session.m, session.n
    best_rows = tuple(learn_Ij(session, j) for j in range(n))
    entry_relations = {}
    for j in range(n):
        for i in range(m):
            for k in range(n):
                entry_relations[(j, i, k)] = relation_Mj_entry(
                    session, j, i, k, best_rows[j]
                )
    value_relations = {}
    for j in range(n):
        for k in range(n):
            if j == k:
                value_relations[(j, k)] = EQUAL
            else:
                value_relations[(j, k)] = entry_relations[(j, min(best_rows[k]), k)]
    return RelationTable(best_rows, entry_relations, value_relations)
