"""Composite optimization layer: KKT systems, second-order conditions,
and stability of the KKT solution map.

An ENLP minimizes phi0(x) + theta(Phi(x)) with a piecewise
linear-quadratic penalty theta; its Lagrangian is

    L(x, lam) = phi0(x) + <Phi(x), lam> - 1/2 <lam, B lam>,

so the induced variational system has f = grad(phi0) and the residual
Jacobian equals the Lagrangian Hessian.  The second-order engine
decomposes the domain of the restricted penalty by the faces of the
critical cone; on the region attached to a face the penalty is an
explicit quadratic form (solved on the span of the face with a rational
pseudo-inverse), and strict or non-strict copositivity of each pulled
back form is decided exactly by enumerating stationary families over
the simplex of cone generators.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import RatMatrix, pseudo_inverse_psd, solve_general, zeros
from .lp import LpOptimal, lp_feasible_point, lp_max
from .plq import PlqPenalty, subdiff_graph_normal_cones
from .polyhedra import (PolyCone, Polyhedron, _subsets, fm_project,
                        normal_cone)
from .polymap import Polynomial, PolyMap
from .rational import ONE, ZERO, norm2, rat, vadd, vdot, vsub
from .stability import (_face_system, _nontrivial_point, classify_multiplier,
                        uniqueness_report)
from .varsys import VarSystem

__all__ = [
    "EnlpProblem",
    "StabilityReport",
    "InternalConsistencyError",
    "copositive_on_cone",
]


class InternalConsistencyError(AssertionError):
    """A theorem-level equivalence failed on exact data; always a bug."""


@dataclass(frozen=True)
class StabilityReport:
    bcq: bool
    sosc: bool
    sonc: object            # True | False | "inconclusive"
    unique: bool
    noncritical: bool
    isolated_calm_skkt: bool
    lipschitz_like_skkt: bool
    robust_ic: object       # True | False | "not-certified"
    consistency_notes: tuple

    def to_doc(self):
        def enc(v):
            return v if isinstance(v, (bool, str)) else str(v)

        return {
            "bcq": self.bcq,
            "sosc": self.sosc,
            "sonc": enc(self.sonc),
            "unique": self.unique,
            "noncritical": self.noncritical,
            "isolated_calm_skkt": self.isolated_calm_skkt,
            "lipschitz_like_skkt": self.lipschitz_like_skkt,
            "robust_ic": enc(self.robust_ic),
            "consistency_notes": list(self.consistency_notes),
        }


class EnlpProblem:
    """Cost polynomial, constraint map, and penalty."""

    def __init__(self, phi0: Polynomial, phi: PolyMap, penalty: PlqPenalty):
        if phi0.n != phi.n:
            raise ValueError("cost and constraint map disagree on dimension")
        if phi.k != penalty.m:
            raise ValueError("constraint range does not match the penalty")
        self.phi0 = phi0
        self.phi = phi
        self.penalty = penalty
        self.n = phi.n
        self.m = phi.k
        self._grad0 = PolyMap(tuple(phi0.diff(j) for j in range(self.n)), n=self.n)
        self._vs = VarSystem(self._grad0, phi, penalty)

    def to_varsys(self) -> VarSystem:
        return self._vs

    # -- Lagrangian -----------------------------------------------------------
    def lagrangian(self, x, lam):
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        blam = self.penalty.B.matvec(lam)
        return self.phi0.eval(x) + vdot(self.phi.eval(x), lam) - vdot(lam, blam) / 2

    def lagrangian_gradient_x(self, x, lam):
        return self._vs.psi(x, lam)

    def lagrangian_hessian_xx(self, x, lam) -> RatMatrix:
        return self._vs.psi_jacobian_x(x, lam)

    def objective(self, x):
        """phi0(x) + theta(Phi(x)) as an extended real."""
        return self.penalty.theta(self.phi.eval(x)) + self.phi0.eval(x)

    # -- first-order tests -------------------------------------------------------
    def kkt_check(self, x, lam):
        """(exact KKT truth, float residual)."""
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        grad = self.lagrangian_gradient_x(x, lam)
        stationary = all(v == 0 for v in grad)
        phix = self.phi.eval(x)
        in_subdiff = self.penalty.subdiff_contains(phix, lam)
        resid = norm2(grad)
        if not in_subdiff:
            resid += norm2(vsub(phix, self.penalty.prox(vadd(lam, phix))))
        return stationary and in_subdiff, resid

    def _require_kkt(self, x, lam):
        ok, _ = self.kkt_check(x, lam)
        if not ok:
            raise ValueError("the pair does not solve the KKT system exactly")

    def multiplier_set(self, x):
        return self._vs.multiplier_set(x)

    def bcq_holds(self, x) -> bool:
        """Normals of dom(theta) at Phi(x) meet ker(DPhi^T) only at zero."""
        x = tuple(rat(v) for v in x)
        phix = self.phi.eval(x)
        dom = self.penalty.domain_cone()
        if not dom.contains(phix):
            raise ValueError("base point is infeasible for the penalty domain")
        nc = normal_cone(dom.as_polyhedron(), phix)
        gmat = self.phi.jacobian_at(x)
        a_eq, b_eq, a_ub, b_ub = [], [], [], []
        for b in nc.rows:  # v in the normal cone of the domain
            a_ub.append(tuple(b))
            b_ub.append(ZERO)
        for j in range(self.n):  # DPhi^T v = 0
            a_eq.append(tuple(gmat.rows[i][j] for i in range(self.m)))
            b_eq.append(ZERO)
        return _nontrivial_point(a_eq, b_eq, a_ub, b_ub, self.m,
                                 range(self.m)) is None

    # -- second-order conditions -----------------------------------------------------
    def _regions(self, kcone: PolyCone, hess: RatMatrix, gmat: RatMatrix):
        """(cone in direction space, quadratic form matrix) per face region."""
        bmat = self.penalty.B
        m, n = self.m, self.n
        out = []
        for face in kcone.faces():
            span = face.piece.span_basis()
            if span:
                gspan = RatMatrix.from_cols(list(span))
                core = gspan.T @ bmat @ gspan
                smat = gspan @ pseudo_inverse_psd(core) @ gspan.T
            else:
                smat = zeros(m, m)
            region = self._face_region(kcone, face)
            wrows = [tuple(gmat.rmatvec(r)) for r in region.rows]
            wcone = PolyCone(wrows, dim=n)
            gsg = gmat.T @ smat @ gmat
            qform = hess + gsg
            out.append((wcone, qform))
        return out

    def _face_region(self, kcone: PolyCone, face) -> PolyCone:
        """{u : exists y in F with u - B y in polar(K) cap F-perp}."""
        from .stability import _residual_rows

        m = self.m
        bmat = self.penalty.B
        rows, rhs = [], []
        # variables (u, y) in R^{2m}
        for b in face.piece.rows:
            rows.append((ZERO,) * m + tuple(b))
            rhs.append(ZERO)
        for h, kind in _residual_rows(kcone, face.piece):
            bh = bmat.matvec(h)
            row = tuple(h) + tuple(-v for v in bh)
            rows.append(row)
            rhs.append(ZERO)
            if kind == "eq":
                rows.append(tuple(-v for v in row))
                rhs.append(ZERO)
        lifted = Polyhedron(rows, rhs).with_dim(2 * m)
        proj = fm_project(lifted, range(m))
        return PolyCone(proj.b, dim=m)

    def sosc_holds(self, x, lam) -> bool:
        """Strict copositivity of the Lagrangian-plus-penalty form on the
        directions whose image lies in the restricted penalty domain."""
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        self._require_kkt(x, lam)
        zbar = self.phi.eval(x)
        kcone = self.penalty.critical_cone_at(zbar, lam)
        hess = self.lagrangian_hessian_xx(x, lam)
        gmat = self.phi.jacobian_at(x)
        for wcone, qform in self._regions(kcone, hess, gmat):
            ok, _ = copositive_on_cone(qform, wcone, strict=True)
            if not ok:
                return False
        return True

    def sonc_holds(self, x):
        """Non-strict second-order necessary condition.

        Exact (True/False) when the multiplier set is a singleton;
        otherwise True when some vertex multiplier certifies the
        condition over its own region decomposition, else
        "inconclusive" (the regions induced by different multipliers
        need not agree)."""
        x = tuple(rat(v) for v in x)
        if not self.bcq_holds(x):
            raise ValueError("the basic constraint qualification fails")
        mset = self.multiplier_set(x)
        if mset.empty:
            raise ValueError("no multipliers at the base point")
        zbar = self.phi.eval(x)
        gmat = self.phi.jacobian_at(x)

        def check(lam) -> bool:
            kcone = self.penalty.critical_cone_at(zbar, lam)
            hess = self.lagrangian_hessian_xx(x, lam)
            for wcone, qform in self._regions(kcone, hess, gmat):
                ok, _ = copositive_on_cone(qform, wcone, strict=False)
                if not ok:
                    return False
            return True

        if mset.singleton:
            return check(mset.representative)
        verts, rays, lin = _vertices_and_rays(mset.poly)
        if rays or lin or not verts:
            return "inconclusive"
        for v in verts:
            if check(v):
                return True
        return "inconclusive"

    # -- stability of the KKT solution map ----------------------------------------------
    def isolated_calmness_skkt(self, x, lam) -> bool:
        """Graphical-derivative criterion: the linearized KKT system
        admits only the zero direction pair."""
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        self._require_kkt(x, lam)
        pen = self.penalty
        zbar = self.phi.eval(x)
        kcone = pen.critical_cone_at(zbar, lam)
        hess = self.lagrangian_hessian_xx(x, lam)
        gmat = self.phi.jacobian_at(x)
        n, m = self.n, self.m
        for face in kcone.faces():
            a_eq, b_eq, a_ub, b_ub = _face_system(hess, gmat, pen.B, kcone,
                                                  face.piece)
            if _nontrivial_point(a_eq, b_eq, a_ub, b_ub, n + m,
                                 range(n + m)) is not None:
                return False
        return True

    def lipschitz_like_skkt(self, x, lam) -> bool:
        """Coderivative criterion: only the zero pair satisfies the
        linearized inclusion through the limiting normals of the
        subdifferential graph."""
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        self._require_kkt(x, lam)
        pen = self.penalty
        zbar = self.phi.eval(x)
        hess = self.lagrangian_hessian_xx(x, lam)
        gmat = self.phi.jacobian_at(x)
        n, m = self.n, self.m
        cones = subdiff_graph_normal_cones(pen, zbar, lam)
        for cone in cones:
            a_eq, b_eq, a_ub, b_ub = [], [], [], []
            for i in range(n):  # H xi + G^T eta = 0
                row = list(hess.rows[i]) + [gmat.rows[k][i] for k in range(m)]
                a_eq.append(tuple(row))
                b_eq.append(ZERO)
            for h in cone.rows:  # (eta, -G xi) in the normal cone piece
                hz, hl = h[:m], h[m:]
                gh = gmat.rmatvec(hl)
                row = tuple(-v for v in gh) + tuple(hz)
                a_ub.append(row)
                b_ub.append(ZERO)
            if _nontrivial_point(a_eq, b_eq, a_ub, b_ub, n + m,
                                 range(n + m)) is not None:
                return False
        return True

    def robust_ic_report(self, x, lam) -> StabilityReport:
        """Full stability report with exact theorem-level cross-checks."""
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        self._require_kkt(x, lam)
        vs = self._vs
        verdict = classify_multiplier(vs, x, lam)
        noncritical = not verdict.critical
        uniq = uniqueness_report(vs, x, lam)
        bcq = self.bcq_holds(x)
        sosc = self.sosc_holds(x, lam)
        try:
            sonc = self.sonc_holds(x) if bcq else "inconclusive"
        except ValueError:
            sonc = "inconclusive"
        icalm = self.isolated_calmness_skkt(x, lam)
        liplike = self.lipschitz_like_skkt(x, lam)

        notes = []
        if not uniq.consistent:
            raise InternalConsistencyError(
                "multiplier uniqueness disagrees with the dual qualification")
        if sosc and not noncritical:
            raise InternalConsistencyError(
                "second-order sufficiency with a critical multiplier")
        if liplike and not icalm:
            raise InternalConsistencyError(
                "Lipschitz-like map that is not isolatedly calm")
        if icalm != (noncritical and uniq.singleton):
            raise InternalConsistencyError(
                "isolated calmness disagrees with noncriticality + uniqueness")
        if sonc is False and sosc:
            raise InternalConsistencyError(
                "sufficient condition holds while the necessary one fails")

        if sosc and uniq.singleton:
            robust = True
            notes.append("robust isolated calmness certified through the "
                         "second-order sufficient condition")
        elif not uniq.singleton or not noncritical:
            robust = False
            notes.append("robust isolated calmness fails: multiplier is "
                         "critical or not unique")
        else:
            robust = "not-certified"
            notes.append("local optimality could not be certified (the "
                         "second-order sufficient condition fails)")
        return StabilityReport(bcq=bcq, sosc=sosc, sonc=sonc,
                               unique=uniq.singleton, noncritical=noncritical,
                               isolated_calm_skkt=icalm,
                               lipschitz_like_skkt=liplike, robust_ic=robust,
                               consistency_notes=tuple(notes))


# -- exact copositivity ---------------------------------------------------------------


def copositive_on_cone(qform: RatMatrix, cone: PolyCone, strict: bool):
    """Is w^T Q w > 0 (>= 0 when strict=False) for all nonzero w in the cone?

    Exact decision by generator representation: the minimum of the form
    over the simplex of generator coefficients is attained at a
    stationary family of some simplex face; families are solved by
    rational elimination, their (constant) value is thresholded, and
    realizability plus the existence of a nonzero represented direction
    are decided by LPs.  Returns (verdict, witness direction or None).
    """
    lin, rays = cone.generators()
    gens = list(rays)
    for l in lin:
        gens.append(l)
        gens.append(tuple(-v for v in l))
    if not gens:
        return True, None
    nvec = len(gens)
    gcols = RatMatrix.from_cols(gens)  # n x N
    mhat = gcols.T @ qform @ gcols

    for subset in _subsets(tuple(range(nvec))):
        if not subset:
            continue
        k = len(subset)
        # stationarity of c^T Mhat c on the face affine hull:
        # 2 (Mhat c)_i = nu on the subset, sum c = 1, c zero elsewhere
        a = []
        b = []
        for i in subset:
            row = [2 * mhat.rows[i][j] for j in subset] + [-ONE]
            a.append(tuple(row))
            b.append(ZERO)
        a.append(tuple([ONE] * k + [ZERO]))
        b.append(ONE)
        fam = solve_general(a, b)
        if fam is None:
            continue
        c0 = fam[0][:k]
        val = _form_value(mhat, subset, c0)
        if strict and val > 0:
            continue
        if not strict and val >= 0:
            continue
        feasible = _family_point(a, b, k)
        if feasible is None:
            continue
        if val < 0:
            witness = _combine(gens, subset, feasible[:k])
            return False, witness
        # strict case, val == 0: a represented nonzero direction?
        witness = _nonzero_direction(a, b, k, gens, subset)
        if witness is not None:
            return False, witness
    return True, None


def _form_value(mhat: RatMatrix, subset, coeffs):
    total = ZERO
    for ii, i in enumerate(subset):
        for jj, j in enumerate(subset):
            total += coeffs[ii] * mhat.rows[i][j] * coeffs[jj]
    return total


def _family_point(a_eq, b_eq, k):
    """A stationary-family point on the simplex face (c >= 0), or None."""
    a_ub = []
    b_ub = []
    for i in range(k):
        row = [ZERO] * (k + 1)
        row[i] = -ONE
        a_ub.append(tuple(row))
        b_ub.append(ZERO)
    return lp_feasible_point(tuple(a_ub), tuple(b_ub), tuple(a_eq),
                             tuple(b_eq), n=k + 1)


def _combine(gens, subset, coeffs):
    n = len(gens[0])
    out = [ZERO] * n
    for c, i in zip(coeffs, subset):
        for j in range(n):
            out[j] += c * gens[i][j]
    return tuple(out)


def _nonzero_direction(a_eq, b_eq, k, gens, subset):
    """A family point whose generator combination is nonzero, or None."""
    n = len(gens[0])
    a_ub = []
    b_ub = []
    for i in range(k):
        row = [ZERO] * (k + 1)
        row[i] = -ONE
        a_ub.append(tuple(row))
        b_ub.append(ZERO)
    for j in range(n):
        obj = [gens[i][j] for i in subset] + [ZERO]
        for sign in (1, -1):
            o = lp_max(tuple(v * sign for v in obj), tuple(a_ub), tuple(b_ub),
                       tuple(a_eq), tuple(b_eq))
            if isinstance(o, LpOptimal) and o.value > 0:
                return _combine(gens, subset, o.point[:k])
    return None


def _vertices_and_rays(poly: Polyhedron):
    """(vertices, extreme rays, lineality) via homogenization."""
    d = poly.dim
    rows = [tuple(b) + (-a,) for b, a in zip(poly.b, poly.alpha)]
    rows.append((ZERO,) * d + (-ONE,))
    cone = PolyCone(rows, dim=d + 1)
    lin, rays = cone.generators()
    verts, recession = [], []
    for r in rays:
        if r[d] > 0:
            verts.append(tuple(v / r[d] for v in r[:d]))
        else:
            recession.append(tuple(r[:d]))
    lineality = [tuple(l[:d]) for l in lin]
    return verts, recession, lineality
