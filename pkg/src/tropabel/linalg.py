"""Small exact linear-algebra kernel: rationals, integer lattices, Hermite form.

Vectors are tuples of ints (or Fractions where noted); matrices are tuples of
row tuples.  Everything is exact; floats never appear.
"""

from fractions import Fraction
from math import gcd


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u):
    return tuple(c * a for a in u)


def is_zero(u):
    return all(a == 0 for a in u)


def primitive(vec):
    """Divide an integer vector by the gcd of its entries.

    The direction is preserved: rays of a cone are genuinely oriented, so no
    sign flip happens here (use sign_normalize for sign-ambiguous vectors).
    """
    g = 0
    for a in vec:
        g = gcd(g, abs(a))
    if g <= 1:
        return tuple(vec)
    return tuple(a // g for a in vec)


def sign_normalize(vec):
    """Primitive form with the first nonzero entry positive (kernel bases)."""
    v = primitive(vec)
    for a in v:
        if a != 0:
            return v if a > 0 else tuple(-x for x in v)
    return v


def _to_fraction_rows(rows):
    return [[Fraction(x) for x in row] for row in rows]


def rank(rows):
    """Rank over the rationals."""
    if not rows:
        return 0
    m = _to_fraction_rows(rows)
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def nullspace(rows, ncols):
    """Integer primitive basis of {x : rows @ x = 0}, sign-normalized.

    Returns a deterministic list (free columns in increasing order).
    """
    m = _to_fraction_rows(rows)
    pivots = {}
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots[c] = r
        r += 1
        if r == len(m):
            break
    basis = []
    free = [c for c in range(ncols) if c not in pivots]
    for c in free:
        v = [Fraction(0)] * ncols
        v[c] = Fraction(1)
        for pc, pr in pivots.items():
            v[pc] = -m[pr][c]
        den = 1
        for a in v:
            den = den * a.denominator // gcd(den, a.denominator)
        basis.append(sign_normalize(tuple(int(a * den) for a in v)))
    return basis


def solve(rows, rhs):
    """One exact solution x of rows @ x = rhs, or None if inconsistent.

    Free variables are set to 0; entries are Fractions.
    """
    if not rows:
        return None
    ncols = len(rows[0])
    m = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    pivots = {}
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots[c] = r
        r += 1
        if r == len(m):
            break
    for i in range(r, len(m)):
        if m[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for c, pr in pivots.items():
        x[c] = m[pr][ncols]
    return tuple(x)


def hnf_transform(mat):
    """Row-style Hermite reduction: returns (H, U) with U @ mat = H, U unimodular.

    H is in echelon form with nonnegative pivots; zero rows of H sit at the
    bottom, so the matching rows of U span the left integer kernel of mat.
    """
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    h = [list(row) for row in mat]
    u = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
    r = 0
    for c in range(ncols):
        # chase the column to a single nonzero entry at row r
        while True:
            nz = [i for i in range(r, nrows) if h[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(h[i][c]))
            h[r], h[piv] = h[piv], h[r]
            u[r], u[piv] = u[piv], u[r]
            done = True
            for i in range(r + 1, nrows):
                if h[i][c] != 0:
                    q = h[i][c] // h[r][c]
                    h[i] = [a - q * b for a, b in zip(h[i], h[r])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[r])]
                    if h[i][c] != 0:
                        done = False
            if done:
                break
        if r < nrows and h[r][c] != 0:
            if h[r][c] < 0:
                h[r] = [-a for a in h[r]]
                u[r] = [-a for a in u[r]]
            for i in range(r):
                q = h[i][c] // h[r][c]
                if q:
                    h[i] = [a - q * b for a, b in zip(h[i], h[r])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[r])]
            r += 1
            if r == nrows:
                break
    return [tuple(row) for row in h], [tuple(row) for row in u]


def left_kernel_lattice(mat):
    """Basis of the saturated lattice {x in Z^m : x @ mat = 0}."""
    if not mat:
        return []
    h, u = hnf_transform(mat)
    return [sign_normalize(u[i]) for i in range(len(h)) if is_zero(h[i])]


def lattice_quotient(basis, n):
    """Projection data for Z^n / U where U is a saturated lattice.

    basis: rows spanning U (rank s, saturated).  Returns (proj, lift, pair)
    where proj maps an ambient integer covector to Z^(n-s) with kernel
    exactly U, lift is a right inverse of proj, and pair maps an ambient
    vector r to coordinates with proj(u) . pair(r) = u . r for every u.
    """
    s = len(basis)
    if s == 0:
        ident = lambda v: tuple(v)
        return ident, ident, ident
    # column-style HNF via the row-style routine on the transpose:
    # find unimodular C (n x n) with basis @ C = [T | 0], T unimodular.
    bt = [tuple(basis[i][j] for i in range(s)) for j in range(n)]
    h, u = hnf_transform(bt)  # u @ bt = h, i.e. basis @ u^T = h^T
    ct = u  # rows of C^T
    t = [tuple(h[i][j] for i in range(s)) for j in range(s)]  # T^T
    tmat = [tuple(t[j][i] for j in range(s)) for i in range(s)]
    if abs(_det_int(tmat)) != 1:
        raise ValueError("lattice is not saturated")
    # absorb T^{-1}: replace the first s columns of C by C[:, :s] @ T^{-1}.
    tinv = _int_inverse(tmat)
    new_ct = []
    for i in range(s):
        new_ct.append(tuple(sum(tinv[i][k] * ct[k][j] for k in range(s)) for j in range(n)))
    for i in range(s, n):
        new_ct.append(tuple(ct[i]))
    ct = new_ct
    # now basis @ C = [I | 0]; rows s..n-1 of C^T give the projection.
    cinv_t = _int_inverse([list(r) for r in ct])  # (C^T)^{-1} = (C^{-1})^T

    def proj(v):
        return tuple(dot(ct[i], v) for i in range(s, n))

    def lift(w):
        # x with x @ C = (0, w): x = (0, w) @ C^{-1}; row i of C^{-1} is
        # column i of (C^T)^{-1}.
        return tuple(sum(w[k - s] * cinv_t[j][k] for k in range(s, n)) for j in range(n))

    def pair(r):
        # rows s..n-1 of C^{-1} applied to r; the first s rows are the
        # U-basis, which kills r-pairings coming from the quotient side
        return tuple(sum(cinv_t[j][k] * r[j] for j in range(n)) for k in range(s, n))

    return proj, lift, pair


def _det_int(m):
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return int(det) if det.denominator == 1 else det


def _int_inverse(m):
    """Inverse of a unimodular integer matrix, as integer rows."""
    n = len(m)
    a = [[Fraction(x) for x in m[i]] + [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    out = []
    for i in range(n):
        row = a[i][n:]
        assert all(x.denominator == 1 for x in row)
        out.append(tuple(int(x) for x in row))
    return out
