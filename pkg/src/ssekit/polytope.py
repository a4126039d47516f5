"""Brute-force vertex enumeration for small polytopes inside the simplex.

This exists as an independent cross-check for the LP layer and for region
verification in tests.  It never sits on a hot path, so the implementation
favours obviousness: try every candidate active set, solve the linear system,
keep the feasible unique solutions.  Intended for dimensions up to about six.
"""

from fractions import Fraction
from itertools import combinations

from .rationals import rat


def _unique_solution(rows, rhs, num_vars):
    """Solve a (possibly rectangular) exact linear system.

    Returns the solution vector when the system is consistent with full
    column rank, otherwise None (underdetermined or inconsistent).
    """
    aug = [list(row) + [r] for row, r in zip(rows, rhs)]
    n_rows = len(aug)
    pivot_cols = []
    r = 0
    for col in range(num_vars):
        pivot = next((i for i in range(r, n_rows) if aug[i][col] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = Fraction(1) / aug[r][col]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(n_rows):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivot_cols.append(col)
        r += 1
    if r < num_vars:
        return None
    for i in range(r, n_rows):
        if aug[i][num_vars] != 0:
            return None
    x = [Fraction(0)] * num_vars
    for row_idx, col in enumerate(pivot_cols):
        x[col] = aug[row_idx][num_vars]
    return x


def enumerate_polytope_vertices(num_vars, constraints=()):
    """All vertices of {x in the standard simplex : constraints hold}.

    constraints follow the LP convention: (coeffs, rel, rhs) with rel one of
    '<=', '>=', '='.  The simplex part (sum x = 1, x >= 0) is implicit.
    Returns a lexicographically sorted, duplicate-free list of tuples of
    Fractions; an empty polytope yields an empty list.
    """
    fixed_rows = [[Fraction(1)] * num_vars]
    fixed_rhs = [Fraction(1)]
    ineqs = []  # (coeffs, rhs) in <= form, for feasibility checks
    candidates = []  # (row, rhs) hyperplanes that may or may not be active
    for coeffs, rel, rhs in constraints:
        coeffs = [rat(c) for c in coeffs]
        rhs = rat(rhs)
        if len(coeffs) != num_vars:
            raise ValueError("constraint arity does not match num_vars")
        if rel == "=":
            fixed_rows.append(coeffs)
            fixed_rhs.append(rhs)
        elif rel == "<=":
            ineqs.append((coeffs, rhs))
            candidates.append((coeffs, rhs))
        elif rel == ">=":
            ineqs.append(([-c for c in coeffs], -rhs))
            candidates.append((coeffs, rhs))
        else:
            raise ValueError(f"bad relation {rel!r}")
    for i in range(num_vars):
        row = [Fraction(0)] * num_vars
        row[i] = Fraction(1)
        candidates.append((row, Fraction(0)))

    def feasible(x):
        if any(v < 0 for v in x):
            return False
        for coeffs, rhs in ineqs:
            if sum(c * v for c, v in zip(coeffs, x)) > rhs:
                return False
        for row, rhs in zip(fixed_rows, fixed_rhs):
            if sum(c * v for c, v in zip(row, x)) != rhs:
                return False
        return True

    seen = set()
    # Activating up to num_vars - 1 extra hyperplanes on top of the fixed
    # equalities covers every basic solution even when rows are redundant.
    max_extra = max(0, num_vars - 1)
    for k in range(max_extra + 1):
        for chosen in combinations(range(len(candidates)), k):
            rows = list(fixed_rows) + [candidates[i][0] for i in chosen]
            rhs = list(fixed_rhs) + [candidates[i][1] for i in chosen]
            x = _unique_solution(rows, rhs, num_vars)
            if x is not None and feasible(x):
                seen.add(tuple(x))
    return sorted(seen)
