"""Calculus of piecewise linear-quadratic penalties.

theta(u) = sup_{y in Y} { <y, u> - 1/2 <y, B y> }

for a nonempty convex polyhedron Y and a symmetric PSD matrix B.  The
module provides exact evaluation, the domain cone, subdifferentials and
their inverses, the proximal map (with a per-call verified identity),
second subderivatives, graphical derivatives, second-order difference
quotients, and the polyhedral decomposition of the subdifferential
graph together with its limiting normal cones (the coderivative test).

All values are exact rationals; +infinity is represented by ExtReal.
"""

from __future__ import annotations

from .linalg import RatMatrix, invert, psd_check, rank
from .polyhedra import (PolyCone, Polyhedron, PolyUnion, critical_cone,
                        fm_project, limiting_normal_cone_union, normal_cone)
from .qp import QpOptimal, QpUnbounded, StrictQpSolver, qp_solve
from .rational import ONE, ZERO, rat, vadd, vdot, vscale, vsub

__all__ = ["ExtReal", "PLUS_INF", "PlqPenalty", "coderivative_contains",
           "subdiff_graph_normal_cones"]


class ExtReal:
    """A rational number or +infinity, with absorbing arithmetic."""

    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = None if value is None else rat(value)

    @property
    def is_finite(self):
        return self.value is not None

    @staticmethod
    def finite(v):
        return ExtReal(v)

    def __add__(self, other):
        if isinstance(other, ExtReal):
            if self.is_finite and other.is_finite:
                return ExtReal(self.value + other.value)
            return PLUS_INF
        if self.is_finite:
            return ExtReal(self.value + rat(other))
        return PLUS_INF

    __radd__ = __add__

    def scale(self, t):
        """Multiply by a positive rational (positive homogeneity only)."""
        t = rat(t)
        if t <= 0:
            raise ValueError("scale factor must be positive")
        return ExtReal(self.value * t) if self.is_finite else PLUS_INF

    def __eq__(self, other):
        if isinstance(other, ExtReal):
            return self.value == other.value
        return self.is_finite and self.value == rat(other)

    def __lt__(self, other):
        o = other if isinstance(other, ExtReal) else ExtReal(other)
        if not self.is_finite:
            return False
        if not o.is_finite:
            return True
        return self.value < o.value

    def __le__(self, other):
        return self == other or self < other

    def __hash__(self):
        return hash(self.value)

    def to_float(self):
        return float("inf") if not self.is_finite else float(self.value)

    def __repr__(self):
        return "+inf" if not self.is_finite else "ExtReal(%s)" % (self.value,)


PLUS_INF = ExtReal(None)


class PlqPenalty:
    """The pair (Y, B) and the calculus of its dualizing penalty."""

    def __init__(self, poly_y: Polyhedron, bmat: RatMatrix):
        if not psd_check(bmat):
            raise ValueError("B must be symmetric positive semidefinite")
        self.Y = poly_y.with_dim(bmat.nrows)
        self.B = bmat
        self.m = bmat.nrows
        if self.Y.is_empty():
            raise ValueError("Y must be nonempty (penalty would be improper)")
        self._cache: dict = {}

    # -- evaluation ------------------------------------------------------------
    def theta_with_argmax(self, u):
        """(theta(u), a maximizer or None when the value is +infinity)."""
        u = tuple(rat(v) for v in u)
        out = qp_solve(self.B, tuple(-v for v in u), self.Y)
        if isinstance(out, QpUnbounded):
            return PLUS_INF, None
        assert isinstance(out, QpOptimal)  # Y nonempty was checked
        return ExtReal(-out.value), out.point

    def theta(self, u) -> ExtReal:
        return self.theta_with_argmax(u)[0]

    # -- domain -----------------------------------------------------------------
    def domain_cone(self) -> PolyCone:
        """dom theta: nonpositive polar of (horizon of Y) intersect ker B."""
        if "domain" not in self._cache:
            rows = list(self.Y.b)
            for r in self.B.rows:
                rows.append(tuple(r))
                rows.append(tuple(-v for v in r))
            rec_ker = PolyCone(rows, dim=self.m)
            self._cache["domain"] = rec_ker.polar()
        return self._cache["domain"]

    def domain_contains(self, u) -> bool:
        return self.domain_cone().contains(tuple(rat(v) for v in u))

    # -- subdifferential ----------------------------------------------------------
    def subdiff(self, u) -> Polyhedron:
        """The exact maximizer polyhedron; empty iff u is outside the domain."""
        u = tuple(rat(v) for v in u)
        val, ystar = self.theta_with_argmax(u)
        if ystar is None:
            return Polyhedron.empty(self.m)
        by = self.B.matvec(ystar)
        grad = vsub(u, by)  # u - B y*, constant on the solution set
        rows = list(self.Y.b)
        rhs = list(self.Y.alpha)
        for i, brow in enumerate(self.B.rows):
            rows.append(tuple(brow))
            rhs.append(by[i])
            rows.append(tuple(-v for v in brow))
            rhs.append(-by[i])
        rows.append(grad)
        rhs.append(vdot(grad, ystar))
        rows.append(tuple(-v for v in grad))
        rhs.append(-vdot(grad, ystar))
        return Polyhedron(rows, rhs).with_dim(self.m)

    def subdiff_contains(self, u, lam) -> bool:
        """lam in the subdifferential at u, i.e. u - B lam normal to Y at lam.

        Cross-checked against the Fenchel equality
        theta(u) == <lam, u> - 1/2 <lam, B lam>.
        """
        u = tuple(rat(v) for v in u)
        lam = tuple(rat(v) for v in lam)
        if not self.Y.contains(lam):
            return False
        resid = vsub(u, self.B.matvec(lam))
        nc = normal_cone(self.Y, lam)
        result = nc.contains(resid)
        val = self.theta(u)
        fenchel = val.is_finite and \
            val.value == vdot(lam, u) - vdot(lam, self.B.matvec(lam)) / 2
        assert result == fenchel, "subgradient test disagrees with Fenchel equality"
        return result

    def inverse_subdiff(self, lam) -> Polyhedron:
        """{u : lam in subdiff(u)} = B lam + N_Y(lam); empty off Y."""
        lam = tuple(rat(v) for v in lam)
        if not self.Y.contains(lam):
            return Polyhedron.empty(self.m)
        shift = self.B.matvec(lam)
        nc = normal_cone(self.Y, lam)
        rows = nc.rows
        rhs = [vdot(r, shift) for r in rows]
        return Polyhedron(rows, rhs).with_dim(self.m)

    # -- proximal map ---------------------------------------------------------------
    def _prox_solver(self) -> StrictQpSolver:
        if "prox" not in self._cache:
            q = RatMatrix([[self.B.rows[i][j] + (ONE if i == j else ZERO)
                            for j in range(self.m)] for i in range(self.m)])
            self._cache["prox"] = StrictQpSolver(q, self.Y)
        return self._cache["prox"]

    def prox(self, x):
        """Proximal point, via the conjugate pair: prox(x) = x - y*(x)
        with y* the minimizer of 1/2<y,By> + 1/2|x-y|^2 over Y.

        Postcondition verified on every call: x - prox(x) is a
        subgradient at prox(x), through the normal-cone characterization
        prox(x) - B y* in N_Y(y*).
        """
        x = tuple(rat(v) for v in x)
        ystar = self._prox_solver().solve(tuple(-v for v in x))
        p = vsub(x, ystar)
        resid = vsub(p, self.B.matvec(ystar))
        assert self.Y.contains(ystar) and \
            normal_cone(self.Y, ystar).contains(resid), "proximal identity failed"
        return p

    def prox_linearization(self, x):
        """An active-piece affine model of prox at x: (matrix J, offset o).

        On the active piece the prox map is affine, prox(v) = J v + o;
        J is a generalized Jacobian element at kinks.
        """
        x = tuple(rat(v) for v in x)
        solver = self._prox_solver()
        ystar = solver.solve(tuple(-v for v in x))
        eq_rows, _ = self.Y.eq_system()
        _, ineq = self.Y._split()
        tight = [i for i in ineq
                 if vdot(self.Y.b[i], ystar) == self.Y.alpha[i]]
        act = list(eq_rows) + [self.Y.b[i] for i in tight]
        # keep a maximal independent subset of the active rows
        rows_indep = []
        for r in act:
            if rank(rows_indep + [list(r)]) > len(rows_indep):
                rows_indep.append(list(r))
        n, na = self.m, len(rows_indep)
        kkt = [[ZERO] * (n + na) for _ in range(n + na)]
        for i in range(n):
            for j in range(n):
                kkt[i][j] = self.B.rows[i][j] + (ONE if i == j else ZERO)
            for k in range(na):
                kkt[i][n + k] = rows_indep[k][i]
                kkt[n + k][i] = rows_indep[k][i]
        inv = invert(RatMatrix(kkt))
        assert inv is not None
        # y(v) = M v + d with M the top-left n x n block of the inverse
        mrows = [[inv.rows[i][j] for j in range(n)] for i in range(n)]
        mmat = RatMatrix(mrows)
        jac = RatMatrix([[ (ONE if i == j else ZERO) - mrows[i][j]
                           for j in range(n)] for i in range(n)])
        offset = vsub(self.prox(x), jac.matvec(x))
        return jac, offset

    # -- second-order objects ----------------------------------------------------------
    def critical_cone_at(self, zbar, lam) -> PolyCone:
        """K_Y(lam, zbar - B lam) for a verified graph pair (zbar, lam)."""
        zbar = tuple(rat(v) for v in zbar)
        lam = tuple(rat(v) for v in lam)
        if not self.subdiff_contains(zbar, lam):
            raise ValueError("(zbar, lam) is not in the subdifferential graph")
        return critical_cone(self.Y, lam, vsub(zbar, self.B.matvec(lam)))

    def restricted(self, cone: PolyCone) -> "PlqPenalty":
        """The penalty with Y replaced by a cone (same B)."""
        return PlqPenalty(cone.as_polyhedron(), self.B)

    def second_subderivative(self, zbar, lam, u) -> ExtReal:
        """Twice the restricted penalty of the critical cone at (zbar, lam)."""
        k = self.critical_cone_at(zbar, lam)
        return self.restricted(k).theta(u).scale(2)

    def graph_derivative_contains(self, zbar, lam, u, eta) -> bool:
        """eta in D(subdiff)(zbar, lam)(u), by the conic reformulation:
        eta in K, u - B eta in polar(K), <u - B eta, eta> = 0.
        """
        k = self.critical_cone_at(zbar, lam)
        u = tuple(rat(v) for v in u)
        eta = tuple(rat(v) for v in eta)
        if not k.contains(eta):
            return False
        resid = vsub(u, self.B.matvec(eta))
        if vdot(resid, eta) != 0:
            return False
        return k.polar().contains(resid)

    def difference_quotient(self, xbar, ybar, w, t) -> ExtReal:
        """Second-order difference quotient
        (theta(xbar + t w) - theta(xbar) - t<ybar, w>) / (t^2/2).
        """
        t = rat(t)
        if t <= 0:
            raise ValueError("step must be positive")
        base = self.theta(xbar)
        if not base.is_finite:
            raise ValueError("base point outside the domain")
        xbar = tuple(rat(v) for v in xbar)
        w = tuple(rat(v) for v in w)
        shifted = self.theta(vadd(xbar, vscale(t, w)))
        if not shifted.is_finite:
            return PLUS_INF
        num = shifted.value - base.value - t * vdot(tuple(rat(v) for v in ybar), w)
        return ExtReal(num / (t * t / 2))

    # -- graph structure ------------------------------------------------------------------
    def graph_pieces(self) -> PolyUnion:
        """gph(subdiff) in (z, lam) space as a finite union of polyhedra.

        One piece per face of Y: lam tight on the face, z - B lam in the
        cone spanned by the tight rows (lifted multipliers eliminated by
        Fourier-Motzkin projection).
        """
        if "graph" in self._cache:
            return self._cache["graph"]
        m = self.m
        eq_pairs, ineq = self.Y._split()
        eq_rows, eq_rhs = self.Y.eq_system()
        pieces = []
        from .polyhedra import _subsets

        for subset in _subsets(tuple(ineq)):
            gen_rows = list(eq_rows) + [self.Y.b[i] for i in subset]
            nb = len(gen_rows)
            nb_free = len(eq_rows)  # multipliers of equality rows are free
            dim = 2 * m + nb
            rows, rhs = [], []
            # lam constraints: tight on subset, feasible elsewhere
            for k, r in enumerate(eq_rows):
                row = [ZERO] * dim
                for j in range(m):
                    row[m + j] = r[j]
                rows.append(tuple(row)); rhs.append(eq_rhs[k])
                rows.append(tuple(-v for v in row)); rhs.append(-eq_rhs[k])
            for i in ineq:
                row = [ZERO] * dim
                for j in range(m):
                    row[m + j] = self.Y.b[i][j]
                if i in subset:
                    rows.append(tuple(row)); rhs.append(self.Y.alpha[i])
                    rows.append(tuple(-v for v in row)); rhs.append(-self.Y.alpha[i])
                else:
                    rows.append(tuple(row)); rhs.append(self.Y.alpha[i])
            # z - B lam = sum beta_k b_k   (beta free on equality rows, >= 0 else)
            for r_ix in range(m):
                row = [ZERO] * dim
                row[r_ix] = ONE
                for j in range(m):
                    row[m + j] = -self.B.rows[r_ix][j]
                for k in range(nb):
                    row[2 * m + k] = -gen_rows[k][r_ix]
                rows.append(tuple(row)); rhs.append(ZERO)
                rows.append(tuple(-v for v in row)); rhs.append(ZERO)
            for k in range(nb_free, nb):
                row = [ZERO] * dim
                row[2 * m + k] = -ONE
                rows.append(tuple(row)); rhs.append(ZERO)
            lifted = Polyhedron(rows, rhs).with_dim(dim)
            piece = fm_project(lifted, range(2 * m))
            if not piece.is_empty():
                pieces.append(piece)
        self._cache["graph"] = PolyUnion(pieces)
        return self._cache["graph"]

    # -- serialization ----------------------------------------------------------------------
    def to_doc(self):
        return {"Y": self.Y.to_doc(),
                "B": [[str(v) for v in row] for row in self.B.rows]}

    def __repr__(self):
        return "PlqPenalty(m=%d, rows=%d)" % (self.m, len(self.Y.b))


def subdiff_graph_normal_cones(penalty: PlqPenalty, zbar, lam):
    """Limiting normal cones to gph(subdiff) at (zbar, lam), memoized."""
    zbar = tuple(rat(v) for v in zbar)
    lam = tuple(rat(v) for v in lam)
    cache = penalty._cache.setdefault("graph_normals", {})
    key = (zbar, lam)
    if key not in cache:
        union = penalty.graph_pieces()
        cache[key] = limiting_normal_cone_union(union, zbar + lam)
    return cache[key]


def coderivative_contains(penalty: PlqPenalty, zbar, lam, w, u) -> bool:
    """u in D*(subdiff)(zbar, lam)(w), i.e. (u, -w) is a limiting normal
    of the subdifferential graph at (zbar, lam)."""
    if not penalty.subdiff_contains(zbar, lam):
        raise ValueError("(zbar, lam) is not in the subdifferential graph")
    cones = subdiff_graph_normal_cones(penalty, zbar, lam)
    vec = tuple(rat(v) for v in u) + tuple(-rat(v) for v in w)
    return cones.contains(vec)
