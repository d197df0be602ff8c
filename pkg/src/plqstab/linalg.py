"""Exact rational matrices, linear solving, and PSD tests."""

from __future__ import annotations

from .rational import ONE, ZERO, rat, vdot

__all__ = [
    "RatMatrix",
    "identity",
    "zeros",
    "rref",
    "rank",
    "kernel_basis",
    "column_space_basis",
    "solve_general",
    "solve_unique",
    "invert",
    "psd_check",
    "is_positive_definite",
    "pseudo_inverse_psd",
]


class RatMatrix:
    """Immutable dense matrix of exact rationals."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows):
        rows = tuple(tuple(rat(v) for v in r) for r in rows)
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise ValueError("ragged matrix rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "nrows", len(rows))
        object.__setattr__(self, "ncols", len(rows[0]) if rows else 0)

    def __setattr__(self, *a):  # immutability
        raise AttributeError("RatMatrix is immutable")

    # -- construction ---------------------------------------------------
    @staticmethod
    def from_cols(cols):
        cols = [tuple(rat(v) for v in c) for c in cols]
        if not cols:
            return RatMatrix(())
        return RatMatrix(tuple(zip(*cols)))

    # -- basic access ----------------------------------------------------
    def row(self, i):
        return self.rows[i]

    def col(self, j):
        return tuple(r[j] for r in self.rows)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def T(self):
        return RatMatrix(tuple(zip(*self.rows))) if self.rows else RatMatrix(())

    def is_square(self):
        return self.nrows == self.ncols

    def is_symmetric(self):
        if not self.is_square():
            return False
        r = self.rows
        return all(r[i][j] == r[j][i] for i in range(self.nrows) for j in range(i))

    # -- arithmetic --------------------------------------------------------
    def matvec(self, v):
        return tuple(vdot(r, v) for r in self.rows)

    def rmatvec(self, v):
        """Transpose-vector product ``A^T v``."""
        return tuple(vdot(self.col(j), v) for j in range(self.ncols))

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            cols = [other.col(j) for j in range(other.ncols)]
            return RatMatrix(tuple(tuple(vdot(r, c) for c in cols) for r in self.rows))
        return self.matvec(other)

    def __add__(self, other):
        return RatMatrix(tuple(tuple(a + b for a, b in zip(r, s))
                               for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other):
        return RatMatrix(tuple(tuple(a - b for a, b in zip(r, s))
                               for r, s in zip(self.rows, other.rows)))

    def __neg__(self):
        return RatMatrix(tuple(tuple(-a for a in r) for r in self.rows))

    def scale(self, t):
        t = rat(t)
        return RatMatrix(tuple(tuple(t * a for a in r) for r in self.rows))

    def __eq__(self, other):
        return isinstance(other, RatMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "RatMatrix(%r)" % (self.rows,)

    def to_float(self):
        import numpy as np

        return np.array([[float(v) for v in r] for r in self.rows], dtype=float)


def identity(n):
    return RatMatrix(tuple(tuple(ONE if i == j else ZERO for j in range(n))
                           for i in range(n)))


def zeros(nrows, ncols):
    return RatMatrix(tuple((ZERO,) * ncols for _ in range(nrows)))


def rref(rows):
    """Reduced row echelon form. Returns (rref row list, pivot column list)."""
    m = [list(r) for r in rows]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    pivots = []
    r = 0
    for c in range(nc):
        pr = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        piv = m[r][c]
        m[r] = [v / piv for v in m[r]]
        for i in range(nr):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return m, pivots


def rank(mat) -> int:
    rows = mat.rows if isinstance(mat, RatMatrix) else mat
    if not rows:
        return 0
    return len(rref(rows)[1])


def kernel_basis(mat):
    """Basis of the null space {x : A x = 0} as a list of tuples."""
    rows = mat.rows if isinstance(mat, RatMatrix) else tuple(mat)
    if not rows:
        return []
    nc = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * nc
        v[fc] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][fc]
        basis.append(tuple(v))
    return basis


def column_space_basis(mat):
    """Linearly independent columns spanning the range, as tuples."""
    m = mat if isinstance(mat, RatMatrix) else RatMatrix(mat)
    if m.nrows == 0 or m.ncols == 0:
        return []
    _, piv = rref(m.rows)
    return [m.col(c) for c in piv]


def solve_general(amat, b):
    """All solutions of A x = b: (particular, nullspace basis) or None."""
    rows = amat.rows if isinstance(amat, RatMatrix) else tuple(amat)
    b = tuple(rat(v) for v in b)
    if not rows:
        return ((), []) if all(v == 0 for v in b) else None
    nc = len(rows[0])
    aug = [list(r) + [bb] for r, bb in zip(rows, b)]
    red, pivots = rref(aug)
    for row in red:
        if all(v == 0 for v in row[:nc]) and row[nc] != 0:
            return None
    x = [ZERO] * nc
    for i, pc in enumerate(pivots):
        if pc == nc:
            return None  # pivot in augmented column: inconsistent
        x[pc] = red[i][nc]
    null = kernel_basis(rows)
    return tuple(x), null


def solve_unique(amat, b):
    """Unique solution of A x = b; None when inconsistent or underdetermined."""
    sol = solve_general(amat, b)
    if sol is None:
        return None
    x, null = sol
    if null:
        return None
    return x


def invert(mat):
    """Exact inverse of a nonsingular square matrix; None when singular."""
    m = mat if isinstance(mat, RatMatrix) else RatMatrix(mat)
    if not m.is_square():
        raise ValueError("inverse of a non-square matrix")
    n = m.nrows
    aug = [list(m.rows[i]) + [ONE if j == i else ZERO for j in range(n)]
           for i in range(n)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        return None
    return RatMatrix(tuple(tuple(red[i][n:]) for i in range(n)))


def _require_symmetric(mat):
    m = mat if isinstance(mat, RatMatrix) else RatMatrix(mat)
    if not m.is_square():
        raise ValueError("matrix is not square")
    if not m.is_symmetric():
        raise ValueError("matrix is not symmetric")
    return m


def psd_check(mat) -> bool:
    """Exact positive-semidefiniteness via symmetrically pivoted LDL^T."""
    m = _require_symmetric(mat)
    n = m.nrows
    a = [list(r) for r in m.rows]
    idx = list(range(n))
    k = 0
    while k < n:
        p = next((i for i in range(k, n) if a[i][i] > 0), None)
        if p is None:
            # all remaining diagonal entries are <= 0
            for i in range(k, n):
                if a[i][i] < 0:
                    return False
                for j in range(k, n):
                    if a[i][j] != 0:
                        return False
            return True
        if p != k:
            a[k], a[p] = a[p], a[k]
            for row in a:
                row[k], row[p] = row[p], row[k]
        piv = a[k][k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / piv
                ai, ak = a[i], a[k]
                for j in range(k, n):
                    ai[j] -= f * ak[j]
        for j in range(k, n):
            a[k][j] = ZERO
            a[j][k] = ZERO
        k += 1
    return True


def is_positive_definite(mat) -> bool:
    m = _require_symmetric(mat)
    return psd_check(m) and rank(m) == m.nrows


def pseudo_inverse_psd(mat):
    """Moore-Penrose inverse of a symmetric PSD matrix, exactly.

    Uses M+ = V (V^T M V)^{-1} V^T with V a basis of range(M).
    """
    m = _require_symmetric(mat)
    cols = column_space_basis(m)
    if not cols:
        return zeros(m.nrows, m.nrows)
    v = RatMatrix.from_cols(cols)
    w = v.T @ m @ v
    winv = invert(w)
    if winv is None:  # cannot happen for PSD M with V spanning range(M)
        raise ArithmeticError("core block unexpectedly singular")
    return v @ winv @ v.T
