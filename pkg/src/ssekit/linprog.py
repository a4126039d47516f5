"""Exact linear programming over rationals.

Two-phase primal simplex on a dense Fraction tableau with Bland's rule, which
guarantees termination on the highly degenerate programs this package creates
(best-response regions share boundaries by construction).  Free variables are
handled by difference splitting.  Everything is exact; there is no epsilon
anywhere.

The solver is deterministic: same program in, same pivots, same witness out.
Callers that need the lexicographically smallest optimal point (the package's
universal tie-break) use lp_solve_lexmin, which pins the optimum and then
minimizes coordinates one at a time.
"""

from dataclasses import dataclass
from fractions import Fraction

from .rationals import rat, dot

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RELS = ("<=", "=", ">=")


class LinearProgram:
    """max/min objective subject to linear constraints.

    constraints: iterable of (coeffs, rel, rhs) with rel in '<=', '=', '>='.
    nonneg: True for all-nonnegative variables, False for all-free, or a
    per-variable sequence of bools.
    """

    def __init__(self, num_vars, objective, sense="max", constraints=(), nonneg=True):
        if num_vars < 1:
            raise ValueError("num_vars must be positive")
        self.num_vars = num_vars
        self.objective = tuple(rat(c) for c in objective)
        if len(self.objective) != num_vars:
            raise ValueError("objective length does not match num_vars")
        if sense not in ("max", "min"):
            raise ValueError(f"bad sense {sense!r}")
        self.sense = sense
        self.constraints = []
        for coeffs, rel, rhs in constraints:
            coeffs = tuple(rat(c) for c in coeffs)
            if len(coeffs) != num_vars:
                raise ValueError("constraint length does not match num_vars")
            if rel not in _RELS:
                raise ValueError(f"bad relation {rel!r}")
            self.constraints.append((coeffs, rel, rat(rhs)))
        if nonneg is True or nonneg is False:
            self.nonneg = (nonneg,) * num_vars
        else:
            self.nonneg = tuple(bool(f) for f in nonneg)
            if len(self.nonneg) != num_vars:
                raise ValueError("nonneg length does not match num_vars")

    def with_extra(self, extra_constraints):
        """A copy of this program with extra constraints appended."""
        lp = LinearProgram(self.num_vars, self.objective, self.sense, [], self.nonneg)
        lp.constraints = list(self.constraints)
        for coeffs, rel, rhs in extra_constraints:
            coeffs = tuple(rat(c) for c in coeffs)
            if len(coeffs) != self.num_vars:
                raise ValueError("constraint length does not match num_vars")
            if rel not in _RELS:
                raise ValueError(f"bad relation {rel!r}")
            lp.constraints.append((coeffs, rel, rat(rhs)))
        return lp


@dataclass
class LPResult:
    status: str
    value: Fraction = None
    point: tuple = None
    pivots: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


def _pivot(A, b, basis, leave, enter):
    piv = A[leave][enter]
    inv = Fraction(1) / piv
    A[leave] = [a * inv for a in A[leave]]
    b[leave] = b[leave] * inv
    for r in range(len(A)):
        if r == leave:
            continue
        f = A[r][enter]
        if f != 0:
            row_l = A[leave]
            A[r] = [a - f * al for a, al in zip(A[r], row_l)]
            b[r] = b[r] - f * b[leave]
    basis[leave] = enter


def _simplex_min(A, b, c, basis, ncols):
    """Bland-rule simplex for min c.x, Ax=b, x>=0, starting from the given basis.

    Returns (OPTIMAL or UNBOUNDED, pivot count). A, b, basis are mutated in place.
    """
    m = len(A)
    pivots = 0
    while True:
        in_basis = set(basis)
        enter = -1
        for j in range(ncols):
            if j in in_basis:
                continue
            rc = c[j]
            for r in range(m):
                cb = c[basis[r]]
                if cb != 0 and A[r][j] != 0:
                    rc -= cb * A[r][j]
            if rc < 0:
                enter = j
                break
        if enter < 0:
            return OPTIMAL, pivots
        leave = -1
        best = None
        for r in range(m):
            a = A[r][enter]
            if a > 0:
                ratio = b[r] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best = ratio
                    leave = r
        if leave < 0:
            return UNBOUNDED, pivots
        _pivot(A, b, basis, leave, enter)
        pivots += 1


def lp_solve_exact(lp):
    """Solve exactly. Optimal results carry an exact witness point."""
    n_orig = lp.num_vars
    # Map original variables to standard-form columns (split the free ones).
    col_of = []  # per original var: (pos_col, neg_col or None)
    ncols = 0
    for i in range(n_orig):
        if lp.nonneg[i]:
            col_of.append((ncols, None))
            ncols += 1
        else:
            col_of.append((ncols, ncols + 1))
            ncols += 2

    def expand(coeffs):
        row = [Fraction(0)] * ncols
        for i, cf in enumerate(coeffs):
            p, q = col_of[i]
            row[p] += cf
            if q is not None:
                row[q] -= cf
        return row

    rows = []
    rhs = []
    rels = []
    for coeffs, rel, r in lp.constraints:
        rows.append(expand(coeffs))
        rhs.append(r)
        rels.append(rel)
    # Slack and surplus columns.
    for k, rel in enumerate(rels):
        if rel == "=":
            continue
        for row in rows:
            row.append(Fraction(0))
        rows[k][-1] = Fraction(1) if rel == "<=" else Fraction(-1)
        ncols += 1
    # Nonnegative right-hand sides.
    for k in range(len(rows)):
        if rhs[k] < 0:
            rows[k] = [-a for a in rows[k]]
            rhs[k] = -rhs[k]

    m = len(rows)
    pivots = 0
    if m > 0:
        # Phase 1: artificial basis.
        A = [list(row) for row in rows]
        b = list(rhs)
        art0 = ncols
        for k in range(m):
            for r in range(m):
                A[r].append(Fraction(1) if r == k else Fraction(0))
        total = ncols + m
        basis = list(range(art0, art0 + m))
        c1 = [Fraction(0)] * ncols + [Fraction(1)] * m
        _, p1 = _simplex_min(A, b, c1, basis, total)
        pivots += p1
        phase1_val = sum(c1[basis[r]] * b[r] for r in range(m))
        if phase1_val != 0:
            return LPResult(INFEASIBLE, pivots=pivots)
        # Drive leftover artificials out of the basis.
        drop = []
        for r in range(m):
            if basis[r] >= art0:
                pivot_col = -1
                for j in range(ncols):
                    if A[r][j] != 0:
                        pivot_col = j
                        break
                if pivot_col < 0:
                    drop.append(r)
                else:
                    _pivot(A, b, basis, r, pivot_col)
                    pivots += 1
        for r in sorted(drop, reverse=True):
            del A[r], b[r], basis[r]
        m = len(A)
        # Truncate artificial columns.
        A = [row[:ncols] for row in A]
    else:
        A, b, basis = [], [], []

    # Phase 2.
    sign = Fraction(-1) if lp.sense == "max" else Fraction(1)
    c2 = [Fraction(0)] * ncols
    for i, cf in enumerate(lp.objective):
        p, q = col_of[i]
        c2[p] += sign * cf
        if q is not None:
            c2[q] -= sign * cf
    status, p2 = _simplex_min(A, b, c2, basis, ncols)
    pivots += p2
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, pivots=pivots)
    xs = [Fraction(0)] * ncols
    for r in range(m):
        xs[basis[r]] = b[r]
    point = []
    for i in range(n_orig):
        p, q = col_of[i]
        point.append(xs[p] if q is None else xs[p] - xs[q])
    point = tuple(point)
    value = dot(lp.objective, point)
    return LPResult(OPTIMAL, value, point, pivots=pivots)


def lp_solve_lexmin(lp):
    """Solve, then pick the lexicographically smallest optimal point.

    Pins the objective at its optimum and minimizes x_0, x_1, ... in turn.
    The result is the unique lex-min optimum, independent of pivot order.
    """
    first = lp_solve_exact(lp)
    if not first.optimal:
        return first
    pivots = first.pivots
    pinned = [(lp.objective, "=", first.value)]
    coords = []
    for i in range(lp.num_vars):
        e_i = tuple(Fraction(1) if k == i else Fraction(0) for k in range(lp.num_vars))
        sub = LinearProgram(lp.num_vars, e_i, "min", [], lp.nonneg)
        sub.constraints = list(lp.constraints) + list(pinned)
        res = lp_solve_exact(sub)
        if not res.optimal:
            raise RuntimeError("lexmin subproblem not optimal; feasible region is unbounded")
        pivots += res.pivots
        coords.append(res.value)
        pinned.append((e_i, "=", res.value))
    return LPResult(OPTIMAL, first.value, tuple(coords), pivots=pivots)


def solve_linear_system(rows, rhs):
    """Solve a square exact linear system by Gaussian elimination.

    Returns the unique solution tuple, or None if the matrix is singular.
    """
    n = len(rows)
    M = [[rat(v) for v in row] + [rat(rhs[i])] for i, row in enumerate(rows)]
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if M[r][col] != 0:
                piv = r
                break
        if piv < 0:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1) / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [v - f * w for v, w in zip(M[r], M[col])]
    return tuple(M[r][n] for r in range(n))


def solve_linear_system_2x2(a11, a12, b1, a21, a22, b2):
    """Unique solution of a 2x2 system, or None when the determinant vanishes."""
    a11, a12, a21, a22 = rat(a11), rat(a12), rat(a21), rat(a22)
    b1, b2 = rat(b1), rat(b2)
    det = a11 * a22 - a12 * a21
    if det == 0:
        return None
    x = (b1 * a22 - b2 * a12) / det
    y = (a11 * b2 - a21 * b1) / det
    return (x, y)
