"""Exact convex quadratic programming over H-polyhedra.

minimize 1/2 y^T Q y + c^T y  over  P = {y : <b_i, y> <= alpha_i}

with Q symmetric PSD (verified).  Solutions are found by enumerating
candidate active sets of inequality rows, which is exact and adequate
at desk scale (at most 2^p subsets for p inequality rows):

* positive definite Q: each linearly independent active set gives one
  bordered KKT system; the first consistent candidate that is feasible
  with nonnegative multipliers is the unique minimizer;
* singular PSD Q: after an explicit descent-ray test, each subset is
  checked by an LP feasibility run over the full KKT conditions, whose
  any solution is a global minimizer.

Returned optima satisfy the KKT conditions exactly by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import RatMatrix, invert, is_positive_definite, psd_check, rank
from .lp import lp_feasible_point
from .polyhedra import Polyhedron, _subsets
from .rational import ONE, ZERO, rat, vdot

__all__ = ["QpOptimal", "QpUnbounded", "QpInfeasible", "qp_solve", "StrictQpSolver"]


@dataclass(frozen=True)
class QpOptimal:
    point: tuple
    value: object


@dataclass(frozen=True)
class QpUnbounded:
    ray: tuple


@dataclass(frozen=True)
class QpInfeasible:
    pass


def _objective(qmat: RatMatrix, c, y):
    return vdot(qmat.matvec(y), y) / 2 + vdot(c, y)


def _descent_ray(qmat: RatMatrix, c, poly: Polyhedron):
    """Feasible recession direction with Q d = 0 and <c, d> <= -1, or None."""
    n = qmat.nrows
    a_ub = list(poly.b) + [tuple(c)]
    b_ub = [ZERO] * len(poly.b) + [-ONE]
    a_eq = list(qmat.rows)
    b_eq = [ZERO] * n
    return lp_feasible_point(tuple(a_ub), tuple(b_ub), tuple(a_eq), tuple(b_eq), n=n)


def qp_solve(qmat: RatMatrix, c, poly: Polyhedron):
    """Exact outcome: QpInfeasible | QpUnbounded(ray) | QpOptimal(point, value)."""
    if not psd_check(qmat):
        raise ValueError("quadratic term must be symmetric positive semidefinite")
    c = tuple(rat(v) for v in c)
    n = qmat.nrows
    if len(c) != n:
        raise ValueError("linear term dimension mismatch")
    poly = poly.with_dim(n)
    if poly.is_empty():
        return QpInfeasible()
    ray = _descent_ray(qmat, c, poly)
    if ray is not None:
        return QpUnbounded(ray=ray)
    if is_positive_definite(qmat):
        y = StrictQpSolver(qmat, poly).solve(c)
        return QpOptimal(point=y, value=_objective(qmat, c, y))
    y = _solve_singular(qmat, c, poly)
    return QpOptimal(point=y, value=_objective(qmat, c, y))


def _solve_singular(qmat: RatMatrix, c, poly: Polyhedron):
    """Subset enumeration with full-KKT LP feasibility checks."""
    eq_rows, eq_rhs = poly.eq_system()
    _, ineq = poly._split()
    n = qmat.nrows
    ne = len(eq_rows)
    for subset in _subsets(tuple(ineq)):
        ns = len(subset)
        nv = n + ne + ns  # variables: y, nu (free), mu (>= 0)
        a_eq, b_eq = [], []
        # stationarity: Q y + sum nu_k e_k + sum mu_i b_i = -c
        for r in range(n):
            row = list(qmat.rows[r])
            row += [eq_rows[k][r] for k in range(ne)]
            row += [poly.b[i][r] for i in subset]
            a_eq.append(tuple(row))
            b_eq.append(-c[r])
        for k in range(ne):
            a_eq.append(tuple(eq_rows[k]) + (ZERO,) * (ne + ns))
            b_eq.append(eq_rhs[k])
        for i in subset:
            a_eq.append(tuple(poly.b[i]) + (ZERO,) * (ne + ns))
            b_eq.append(poly.alpha[i])
        a_ub, b_ub = [], []
        for i_other in ineq:
            if i_other in subset:
                continue
            a_ub.append(tuple(poly.b[i_other]) + (ZERO,) * (ne + ns))
            b_ub.append(poly.alpha[i_other])
        for j in range(ns):
            row = [ZERO] * nv
            row[n + ne + j] = -ONE
            a_ub.append(tuple(row))
            b_ub.append(ZERO)
        sol = lp_feasible_point(tuple(a_ub), tuple(b_ub), tuple(a_eq), tuple(b_eq), n=nv)
        if sol is not None:
            return tuple(sol[:n])
    raise AssertionError("feasible bounded QP without a KKT point")


class StrictQpSolver:
    """Repeated exact solves of min 1/2 y^T Q y + c^T y over a fixed P, Q PD.

    Bordered KKT systems are factored once per active set and reused
    across calls (the proximal map evaluates this with varying c).
    """

    def __init__(self, qmat: RatMatrix, poly: Polyhedron):
        self.q = qmat
        self.poly = poly.with_dim(qmat.nrows)
        self.n = qmat.nrows
        self._solvers: dict = {}
        eq_rows, eq_rhs = poly.eq_system()
        # dependent equality rows are implied (P nonempty): keep a basis
        self._eq_rows, self._eq_rhs = [], []
        for r, a in zip(eq_rows, eq_rhs):
            if rank(self._eq_rows + [list(r)]) > len(self._eq_rows):
                self._eq_rows.append(list(r))
                self._eq_rhs.append(a)
        _, self._ineq = poly._split()
        self._last_subset = None  # warm start across repeated solves

    def _subset_solver(self, subset):
        if subset in self._solvers:
            return self._solvers[subset]
        act_rows = list(self._eq_rows) + [self.poly.b[i] for i in subset]
        act_rhs = list(self._eq_rhs) + [self.poly.alpha[i] for i in subset]
        if act_rows and rank(act_rows) < len(act_rows):
            self._solvers[subset] = None  # dependent rows: covered elsewhere
            return None
        n, na = self.n, len(act_rows)
        kkt = [[ZERO] * (n + na) for _ in range(n + na)]
        for i in range(n):
            for j in range(n):
                kkt[i][j] = self.q.rows[i][j]
            for k in range(na):
                kkt[i][n + k] = act_rows[k][i]
                kkt[n + k][i] = act_rows[k][i]
        inv = invert(RatMatrix(kkt))
        assert inv is not None, "PD bordered system with independent rows is regular"
        self._solvers[subset] = (inv, tuple(act_rhs), len(self._eq_rows))
        return self._solvers[subset]

    def _try_subset(self, subset, c):
        solver = self._subset_solver(subset)
        if solver is None:
            return None
        inv, act_rhs, ne = solver
        rhs = tuple(-v for v in c) + act_rhs
        sol = inv.matvec(rhs)
        y = sol[:self.n]
        mus = sol[self.n + ne:]
        if any(m < 0 for m in mus):
            return None
        if all(vdot(self.poly.b[i], y) <= self.poly.alpha[i]
               for i in self._ineq if i not in subset):
            return tuple(y)
        return None

    def solve(self, c):
        """The unique minimizer for the linear term c."""
        c = tuple(rat(v) for v in c)
        if self._last_subset is not None:
            y = self._try_subset(self._last_subset, c)
            if y is not None:
                return y
        for subset in _subsets(tuple(self._ineq)):
            y = self._try_subset(subset, c)
            if y is not None:
                self._last_subset = subset
                return y
        raise AssertionError("strictly convex QP over nonempty P has a minimizer")
