"""Exact rational linear algebra: rank, solves, and a small simplex for hull membership.

Everything here works on Python ``int``/``Fraction`` values so results are
exact. Matrices are plain lists of rows; sizes in this package stay below a
few hundred rows and ~30 columns.
"""

from fractions import Fraction
from math import gcd, lcm


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    # numpy integer scalars and similar
    try:
        return Fraction(int(x)) if int(x) == x else Fraction(x)
    except (TypeError, ValueError):
        return Fraction(x)


def integer_row(row):
    """Scale a rational row to a primitive integer row (same direction)."""
    fr = [_as_fraction(x) for x in row]
    den = 1
    for x in fr:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def rank(rows):
    """Exact rank of a rational matrix given as a sequence of rows."""
    m = [integer_row(r) for r in rows]
    m = [r for r in m if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r]
        pc = p[c]
        for i in range(r + 1, len(m)):
            rc = m[i][c]
            if rc == 0:
                continue
            row = [pc * a - rc * b for a, b in zip(m[i], p)]
            g = 0
            for v in row:
                g = gcd(g, v)
            if g > 1:
                row = [v // g for v in row]
            m[i] = row
        r += 1
        if r == len(m):
            break
    return r


def independent_rows(rows, limit=None):
    """Greedy indices of rows that are linearly independent, in input order."""
    basis = []  # reduced rows in echelon form, with pivot columns
    pivots = []
    chosen = []
    for idx, row in enumerate(rows):
        v = [_as_fraction(x) for x in row]
        for b, pc in zip(basis, pivots):
            if v[pc] != 0:
                f = v[pc] / b[pc]
                v = [x - f * y for x, y in zip(v, b)]
        pc = next((j for j, x in enumerate(v) if x != 0), None)
        if pc is None:
            continue
        basis.append(v)
        pivots.append(pc)
        chosen.append(idx)
        if limit is not None and len(chosen) == limit:
            break
    return chosen


def inverse(matrix):
    """Exact inverse of a square rational matrix (Gauss-Jordan)."""
    n = len(matrix)
    a = [[_as_fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(matrix)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        a[c], a[piv] = a[piv], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


def solve(matrix, rhs):
    """Solve a square nonsingular system exactly."""
    inv = inverse(matrix)
    b = [_as_fraction(x) for x in rhs]
    return [sum(r * x for r, x in zip(row, b)) for row in inv]


def matvec(matrix, vec):
    return [sum(a * b for a, b in zip(row, vec)) for row in matrix]


def nullspace(rows, ncols):
    """Basis of the right nullspace {y : rows @ y = 0} as primitive integer vectors."""
    m = [[_as_fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        y = [Fraction(0)] * ncols
        y[fc] = Fraction(1)
        for row, pc in zip(m, pivots):
            y[pc] = -row[fc]
        basis.append(integer_row(y))
    return basis


def hull_membership(points, target):
    """Decide exactly whether ``target`` lies in the convex hull of ``points``.

    Phase-one simplex with Bland's rule over ``Fraction``. Returns the convex
    weights (list of Fractions, one per point) or ``None`` if infeasible.
    """
    pts = [[_as_fraction(x) for x in p] for p in points]
    x = [_as_fraction(v) for v in target]
    n = len(pts)
    dim = len(x)
    # equality rows: sum_k lam_k p_k[i] = x[i], sum_k lam_k = 1
    rows = [[pts[k][i] for k in range(n)] for i in range(dim)]
    rows.append([Fraction(1)] * n)
    rhs = x + [Fraction(1)]
    m = len(rows)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    # tableau columns: n structural + m artificial, last column = rhs
    tab = [rows[i] + [Fraction(int(i == j)) for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs for minimising the sum of artificials
    cost = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(width + 1):
            cost[j] -= tab[i][j]
    for j in range(n, width):
        cost[j] += 1
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][width] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:  # unbounded cannot happen in phase one
            break
        pr = best[1]
        pv = tab[pr][enter]
        tab[pr] = [v / pv for v in tab[pr]]
        for i in range(m):
            if i != pr and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [a - f * b for a, b in zip(tab[i], tab[pr])]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, tab[pr])]
        basis[pr] = enter
    if -cost[width] != 0:
        return None
    lam = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            lam[b] = tab[i][width]
    return lam
