"""Full-information Stackelberg machinery.

Games are bi-matrix payoff pairs over exact rationals.  The leader commits to
a mixed strategy x over rows; the follower sees x and picks a column from the
best-response set under the follower matrix; ties break in the leader's
favour.  Everything here is stateless and exact: best-response sets, the
strong-equilibrium computation via one LP per column, restricted maximin
values, the inducibility test, and synthesis of a fake follower matrix that
makes a desired profile the equilibrium.

Row and column indices are 0-based throughout the package.
"""

from dataclasses import dataclass
from fractions import Fraction
import json

from .linprog import LinearProgram, lp_solve_exact, lp_solve_lexmin
from .rationals import dot, is_simplex_point, rat, rat_str


class Game:
    """Immutable bi-matrix game (leader payoffs, follower payoffs)."""

    __slots__ = ("leader", "follower", "m", "n")

    def __init__(self, leader, follower):
        lead = tuple(tuple(rat(v) for v in row) for row in leader)
        fol = tuple(tuple(rat(v) for v in row) for row in follower)
        if not lead or not lead[0]:
            raise ValueError("game needs at least one row and one column")
        widths = {len(r) for r in lead} | {len(r) for r in fol}
        if len(widths) != 1 or len(lead) != len(fol):
            raise ValueError("leader and follower matrices must have identical shapes")
        object.__setattr__(self, "leader", lead)
        object.__setattr__(self, "follower", fol)
        object.__setattr__(self, "m", len(lead))
        object.__setattr__(self, "n", len(lead[0]))

    def __setattr__(self, name, value):
        raise AttributeError("Game is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Game)
            and self.leader == other.leader
            and self.follower == other.follower
        )

    def __hash__(self):
        return hash((self.leader, self.follower))

    def __repr__(self):
        return f"Game(m={self.m}, n={self.n})"

    def to_dict(self):
        return {
            "m": self.m,
            "n": self.n,
            "leader": [[rat_str(v) for v in row] for row in self.leader],
            "follower": [[rat_str(v) for v in row] for row in self.follower],
        }

    @classmethod
    def from_dict(cls, data):
        game = cls(data["leader"], data["follower"])
        if game.m != data["m"] or game.n != data["n"]:
            raise ValueError("declared dimensions do not match the matrices")
        return game


def game_to_json(game):
    """Serialize to the wire format with exact 'p/q' entries."""
    return json.dumps(game.to_dict(), separators=(",", ":"))


def game_from_json(text):
    return Game.from_dict(json.loads(text))


@dataclass(frozen=True)
class StrategyProfile:
    """A leader mixed strategy together with a follower column."""

    strategy: tuple
    response: int

    def __post_init__(self):
        object.__setattr__(self, "strategy", tuple(rat(v) for v in self.strategy))
        if not is_simplex_point(self.strategy):
            raise ValueError("strategy is not a point of the simplex")
        if not isinstance(self.response, int) or self.response < 0:
            raise ValueError("response must be a nonnegative column index")


@dataclass(frozen=True)
class MaximinResult:
    subset: tuple
    value: Fraction
    witness: tuple
    region: tuple  # linear constraints over x describing the maximin set


def matrix_payoff(matrix, x, j):
    """Expected payoff of column j against mixed strategy x."""
    return dot(x, tuple(row[j] for row in matrix))


def _check_profile(game, profile):
    if len(profile.strategy) != game.m:
        raise ValueError("strategy length does not match the game")
    if profile.response >= game.n:
        raise ValueError("response column out of range")


def best_response_set(follower_matrix, x):
    """Exact argmax set of follower payoffs against x. Never empty."""
    n = len(follower_matrix[0])
    if len(x) != len(follower_matrix):
        raise ValueError("strategy length does not match the matrix")
    values = [matrix_payoff(follower_matrix, x, j) for j in range(n)]
    top = max(values)
    return {j for j, v in enumerate(values) if v == top}


def best_response_region(follower_matrix, j):
    """Constraints (beyond the simplex) for {x : j is a best response to x}."""
    m = len(follower_matrix)
    n = len(follower_matrix[0])
    cons = []
    for k in range(n):
        if k == j:
            continue
        coeffs = [follower_matrix[i][j] - follower_matrix[i][k] for i in range(m)]
        cons.append((coeffs, ">=", Fraction(0)))
    return cons


def _column_optimum(game, j):
    """max u^L(x, j) over the best-response region of j; None when empty."""
    ones = [Fraction(1)] * game.m
    lp = LinearProgram(
        game.m,
        [game.leader[i][j] for i in range(game.m)],
        sense="max",
        constraints=[(ones, "=", Fraction(1))] + best_response_region(game.follower, j),
    )
    return lp


def compute_sse(game):
    """The equilibrium profile under optimistic tie-breaking, plus its value.

    Ties across columns resolve to the lowest column index; ties within a
    column resolve to the lexicographically smallest optimal strategy, so the
    output is deterministic.
    """
    best_j = None
    best_value = None
    programs = {}
    for j in range(game.n):
        lp = _column_optimum(game, j)
        programs[j] = lp
        res = lp_solve_exact(lp)
        if not res.optimal:
            continue
        if best_value is None or res.value > best_value:
            best_value = res.value
            best_j = j
    assert best_j is not None, "some column is always a best response"
    res = lp_solve_lexmin(programs[best_j])
    profile = StrategyProfile(res.point, best_j)
    return profile, best_value


def sse_value(game):
    return compute_sse(game)[1]


def is_sse(game, profile):
    """True iff the response is a best response and the profile attains the
    optimistic equilibrium value."""
    _check_profile(game, profile)
    if profile.response not in best_response_set(game.follower, profile.strategy):
        return False
    achieved = matrix_payoff(game.leader, profile.strategy, profile.response)
    return achieved == sse_value(game)


def is_sse_response(game, j):
    """True iff column j's best-response region attains the equilibrium value."""
    if not 0 <= j < game.n:
        raise ValueError("response column out of range")
    res = lp_solve_exact(_column_optimum(game, j))
    if not res.optimal:
        return False
    return res.value == sse_value(game)


def maximin(leader_matrix, subset):
    """Restricted maximin: value, witness, and the region where it is attained.

    subset indexes columns of the leader matrix; the result's region lists
    linear constraints over x (the simplex is implicit) cutting out the set of
    strategies that guarantee the value against every column in the subset.
    """
    m = len(leader_matrix)
    n = len(leader_matrix[0])
    cols = sorted(set(subset))
    if not cols:
        raise ValueError("maximin needs a nonempty set of columns")
    if cols[0] < 0 or cols[-1] >= n:
        raise ValueError("column index out of range")
    ones = [Fraction(1)] * m + [Fraction(0)]
    cons = [(ones, "=", Fraction(1))]
    for j in cols:
        cons.append(([leader_matrix[i][j] for i in range(m)] + [Fraction(-1)], ">=", Fraction(0)))
    lp = LinearProgram(
        m + 1,
        [Fraction(0)] * m + [Fraction(1)],
        sense="max",
        constraints=cons,
        nonneg=(True,) * m + (False,),
    )
    res = lp_solve_lexmin(lp)
    assert res.optimal, "restricted maximin is always attained on the simplex"
    witness = res.point[:m]
    region = tuple(
        ([leader_matrix[i][j] for i in range(m)], ">=", res.value) for j in cols
    )
    return MaximinResult(tuple(cols), res.value, witness, region)


def inducible_fullinfo(leader_matrix, profile):
    """Whether the profile clears the all-columns maximin value."""
    n = len(leader_matrix[0])
    if len(profile.strategy) != len(leader_matrix) or profile.response >= n:
        raise ValueError("profile does not match the matrix")
    target = matrix_payoff(leader_matrix, profile.strategy, profile.response)
    return target >= maximin(leader_matrix, range(n)).value
