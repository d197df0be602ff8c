"""Criticality classification and stability diagnostics.

The classifier decides, exactly, whether a multiplier admits a nonzero
primal direction in the linearized system

    A xi + G^T eta = 0,   eta in K,   G xi - B eta in polar(K),
    <G xi - B eta, eta> = 0,

with A the partial Jacobian of the residual, G the constraint Jacobian
and K the critical cone.  The solution set decomposes over the faces F
of K (complementarity is automatic when eta in F and the residual lies
in polar(K) with F orthogonal), leaving one linear-conic system per
face whose nontriviality is decided by LPs under a box normalization.

Floating point enters only in the probes: error-bound residuals, the
divergence probe along a critical direction, and a damped semismooth
Newton solver for canonically perturbed systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .linalg import RatMatrix
from .lp import LpOptimal, lp_max
from .polyhedra import PolyCone
from .rational import (ONE, ZERO, norm2, rat, to_float_vec, vadd, vdot,
                       vscale, vsub)
from .varsys import VarSystem

__all__ = [
    "CriticalityVerdict",
    "UniquenessReport",
    "ProbeRecord",
    "ProbeTrace",
    "NewtonResult",
    "classify_multiplier",
    "dqc_holds",
    "uniqueness_report",
    "error_bound_residuals",
    "critical_ray_probe",
    "solve_perturbed",
    "semi_isolated_probe",
    "trace_is_divergent",
]


@dataclass(frozen=True)
class CriticalityVerdict:
    critical: bool
    xi: tuple | None = None
    eta: tuple | None = None
    face_tight: frozenset | None = None
    face_count: int = 0
    face_certificates: tuple = ()

    def __str__(self):
        return "Critical" if self.critical else "Noncritical"


@dataclass(frozen=True)
class UniquenessReport:
    singleton: bool
    dqc: bool

    @property
    def consistent(self) -> bool:
        return self.singleton == self.dqc


@dataclass(frozen=True)
class ProbeRecord:
    t: float
    p1: tuple
    p2: tuple
    x: tuple
    lam: tuple
    lhs: float
    rhs: float
    ratio: float


class ProbeTrace:
    """A table of probe records with CSV serialization."""

    CSV_HEADER = "t,p1,p2,x,lambda,lhs,rhs,ratio"

    def __init__(self, records):
        self.records = tuple(records)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def ratios(self):
        return [r.ratio for r in self.records]

    def to_csv(self) -> str:
        def cell(v):
            if isinstance(v, tuple):
                return ";".join(repr(float(x)) for x in v)
            return repr(float(v))

        lines = [self.CSV_HEADER]
        for r in self.records:
            lines.append(",".join([cell(r.t), cell(r.p1), cell(r.p2), cell(r.x),
                                   cell(r.lam), cell(r.lhs), cell(r.rhs),
                                   cell(r.ratio)]))
        return "\n".join(lines) + "\n"


def trace_is_divergent(trace: ProbeTrace, tail=5, threshold=1e3) -> bool:
    """Ratios grow strictly over the last `tail` records and exceed the
    threshold; records whose perturbation vanished exactly carry an
    infinite ratio and count as grown."""
    rs = trace.ratios()
    if len(rs) < tail:
        return False
    tail_rs = rs[-tail:]
    for a, b in zip(tail_rs, tail_rs[1:]):
        if math.isinf(a) and math.isinf(b):
            continue
        if not b > a:
            return False
    return tail_rs[-1] > threshold


# -- shared face-system machinery ------------------------------------------------


def _residual_rows(kcone: PolyCone, face_piece: PolyCone):
    """Rows (h, kind) describing membership in polar(K) intersect F-perp.

    kind is 'le' for <h, v> <= 0 and 'eq' for <h, v> = 0.
    """
    lin, rays = kcone.generators()
    rows = [(r, "le") for r in rays]
    rows += [(l, "eq") for l in lin]
    rows += [(g, "eq") for g in face_piece.span_basis()]
    return rows


def _face_system(amat: RatMatrix, gmat: RatMatrix, bmat: RatMatrix,
                 kcone: PolyCone, face_piece: PolyCone):
    """Equality/inequality rows over (xi, eta) for one face system."""
    n = amat.ncols
    m = gmat.nrows
    a_eq, b_eq, a_ub, b_ub = [], [], [], []
    for i in range(n):  # A xi + G^T eta = 0
        row = list(amat.rows[i]) + [gmat.rows[k][i] for k in range(m)]
        a_eq.append(tuple(row))
        b_eq.append(ZERO)
    for b in face_piece.rows:  # eta in F
        a_ub.append((ZERO,) * n + tuple(b))
        b_ub.append(ZERO)
    for h, kind in _residual_rows(kcone, face_piece):
        # <h, G xi - B eta> = (G^T h) . xi - (B h) . eta
        gh = gmat.rmatvec(h)
        bh = bmat.matvec(h)
        row = tuple(gh) + tuple(-v for v in bh)
        if kind == "eq":
            a_eq.append(row)
            b_eq.append(ZERO)
        else:
            a_ub.append(row)
            b_ub.append(ZERO)
    return a_eq, b_eq, a_ub, b_ub


def _nontrivial_point(a_eq, b_eq, a_ub, b_ub, nvars, test_coords):
    """A system point with some tested coordinate nonzero, or None.

    Maximizes each tested coordinate under the box |coord| <= 1 (the
    solution set is a cone, so any nonzero value rescales to the box).
    """
    box_ub = list(a_ub)
    box_rhs = list(b_ub)
    for j in test_coords:
        for s in (ONE, -ONE):
            row = [ZERO] * nvars
            row[j] = s
            box_ub.append(tuple(row))
            box_rhs.append(ONE)
    for j in test_coords:
        for sign in (ONE, -ONE):
            obj = [ZERO] * nvars
            obj[j] = sign
            out = lp_max(tuple(obj), tuple(box_ub), tuple(box_rhs),
                         tuple(a_eq), tuple(b_eq))
            if isinstance(out, LpOptimal) and out.value > 0:
                return out.point
    return None


# -- classification ---------------------------------------------------------------


def classify_multiplier(system: VarSystem, xbar, lam) -> CriticalityVerdict:
    """Exact Critical/Noncritical verdict with a rational witness."""
    xbar = tuple(rat(v) for v in xbar)
    lam = tuple(rat(v) for v in lam)
    if not system.is_solution(xbar, lam):
        raise ValueError("criticality is defined at exact solutions only")
    pen = system.penalty
    zbar = system.phi.eval(xbar)
    kcone = pen.critical_cone_at(zbar, lam)
    amat = system.psi_jacobian_x(xbar, lam)
    gmat = system.phi.jacobian_at(xbar)
    n, m = system.n, system.m

    certificates = []
    faces = kcone.faces()
    for face in faces:
        a_eq, b_eq, a_ub, b_ub = _face_system(amat, gmat, pen.B, kcone, face.piece)
        point = _nontrivial_point(a_eq, b_eq, a_ub, b_ub, n + m, range(n))
        if point is not None:
            xi = tuple(point[:n])
            eta = tuple(point[n:])
            _assert_witness(system, xbar, lam, kcone, xi, eta)
            return CriticalityVerdict(critical=True, xi=xi, eta=eta,
                                      face_tight=face.tight,
                                      face_count=len(faces),
                                      face_certificates=tuple(certificates))
        certificates.append((face.tight, "only xi = 0"))
    return CriticalityVerdict(critical=False, face_count=len(faces),
                              face_certificates=tuple(certificates))


def _assert_witness(system, xbar, lam, kcone, xi, eta):
    pen = system.penalty
    amat = system.psi_jacobian_x(xbar, lam)
    gmat = system.phi.jacobian_at(xbar)
    lhs = vadd(amat.matvec(xi), gmat.rmatvec(eta))
    assert all(v == 0 for v in lhs), "witness breaks the linear equation"
    resid = vsub(gmat.matvec(xi), pen.B.matvec(eta))
    assert kcone.contains(eta), "witness eta escapes the critical cone"
    assert kcone.polar().contains(resid), "witness residual escapes the polar"
    assert vdot(resid, eta) == 0, "witness breaks complementarity"
    assert any(v != 0 for v in xi), "trivial witness"


def dqc_holds(system: VarSystem, xbar, lam) -> bool:
    """Dual qualification: the graphical derivative of the subgradient
    map at zero meets the kernel of the adjoint Jacobian only at zero."""
    xbar = tuple(rat(v) for v in xbar)
    lam = tuple(rat(v) for v in lam)
    if not system.is_solution(xbar, lam):
        raise ValueError("dual qualification is defined at exact solutions only")
    pen = system.penalty
    zbar = system.phi.eval(xbar)
    kcone = pen.critical_cone_at(zbar, lam)
    gmat = system.phi.jacobian_at(xbar)
    m, n = system.m, system.n
    for face in kcone.faces():
        a_eq, b_eq, a_ub, b_ub = [], [], [], []
        for b in face.piece.rows:  # eta in F
            a_ub.append(tuple(b))
            b_ub.append(ZERO)
        for h, kind in _residual_rows(kcone, face.piece):  # -B eta in polar(K) cap F-perp
            bh = pen.B.matvec(h)
            row = tuple(-v for v in bh)
            if kind == "eq":
                a_eq.append(row)
                b_eq.append(ZERO)
            else:
                a_ub.append(row)
                b_ub.append(ZERO)
        for j in range(n):  # eta in ker(DPhi^T)
            col = tuple(gmat.rows[i][j] for i in range(m))
            a_eq.append(col)
            b_eq.append(ZERO)
        if _nontrivial_point(a_eq, b_eq, a_ub, b_ub, m, range(m)) is not None:
            return False
    return True


def uniqueness_report(system: VarSystem, xbar, lam) -> UniquenessReport:
    """Multiplier uniqueness, directly and through dual qualification."""
    if not system.is_solution(xbar, lam):
        raise ValueError("uniqueness report needs an exact solution")
    singleton = system.multiplier_set(tuple(rat(v) for v in xbar)).singleton
    dqc = dqc_holds(system, xbar, lam)
    return UniquenessReport(singleton=singleton, dqc=dqc)


# -- error bounds --------------------------------------------------------------------


def error_bound_residuals(system: VarSystem, xbar, lam_bar, x, lam):
    """(lhs, rhs_iii, rhs_iv) of the two error-bound estimates, as floats.

    lhs     = |x - xbar| + dist(lam, multiplier set at xbar)
    rhs_iii = |Psi(x, lam)| + dist(Phi(x), inverse subdifferential of lam)
    rhs_iv  = |Psi(x, lam)| + |Phi(x) - prox(lam + Phi(x))|
    """
    xbar = tuple(rat(v) for v in xbar)
    x = tuple(rat(v) for v in x)
    lam = tuple(rat(v) for v in lam)
    if not system.is_solution(xbar, lam_bar):
        raise ValueError("error bounds are anchored at an exact solution")
    mset = system.multiplier_set(xbar)
    _, d2 = mset.poly.project_point(lam)
    lhs = norm2(vsub(x, xbar)) + float(d2) ** 0.5

    psi_norm = norm2(system.psi(x, lam))
    phix = system.phi.eval(x)
    inv = system.penalty.inverse_subdiff(lam)
    if inv.is_empty():
        rhs_iii = math.inf
    else:
        _, d2i = inv.project_point(phix)
        rhs_iii = psi_norm + float(d2i) ** 0.5
    prox_pt = system.penalty.prox(vadd(lam, phix))
    rhs_iv = psi_norm + norm2(vsub(phix, prox_pt))
    return lhs, rhs_iii, rhs_iv


# -- probes -------------------------------------------------------------------------


def critical_ray_probe(system: VarSystem, xbar, lam_bar,
                       verdict: CriticalityVerdict, t_grid=None) -> ProbeTrace:
    """Walk (xbar + t xi, lam_bar + t eta) along a critical witness.

    Each step is verified exactly to solve the canonically perturbed
    system with perturbations p1 = Psi(x_t, lam_t) and
    p2 = z_t - Phi(x_t), z_t the linearization of Phi; the recorded
    ratio |x_t - xbar| / (|p1| + |p2|) blows up when the multiplier is
    critical.  A perturbation that vanishes exactly yields an infinite
    ratio (the ray consists of unperturbed solutions)."""
    if not verdict.critical:
        raise ValueError("ray probe requires a critical verdict with a witness")
    if t_grid is None:
        t_grid = [rat(1, 2 ** k) for k in range(1, 11)]
    xbar = tuple(rat(v) for v in xbar)
    lam_bar = tuple(rat(v) for v in lam_bar)
    xi = verdict.xi
    eta = verdict.eta
    gmat = system.phi.jacobian_at(xbar)
    zbar = system.phi.eval(xbar)
    records = []
    for t in t_grid:
        t = rat(t)
        xt = vadd(xbar, vscale(t, xi))
        lt = vadd(lam_bar, vscale(t, eta))
        zt = vadd(zbar, vscale(t, gmat.matvec(xi)))
        p1 = system.psi(xt, lt)
        p2 = vsub(zt, system.phi.eval(xt))
        # exact membership in the perturbed solution set
        assert system.penalty.subdiff_contains(vadd(system.phi.eval(xt), p2), lt), \
            "ray point left the perturbed solution set; shrink the grid"
        move = norm2(vsub(xt, xbar))
        pert = norm2(p1) + norm2(p2)
        ratio = move / pert if pert > 0 else math.inf
        records.append(ProbeRecord(t=float(t), p1=to_float_vec(p1),
                                   p2=to_float_vec(p2), x=to_float_vec(xt),
                                   lam=to_float_vec(lt), lhs=move, rhs=pert,
                                   ratio=ratio))
    return ProbeTrace(records)


@dataclass(frozen=True)
class NewtonResult:
    converged: bool
    x: tuple
    lam: tuple
    residual_norm: float
    iterations: int


def _residual_float(system: VarSystem, p1, p2, x, lam):
    import numpy as np

    xr = tuple(rat(float(v)) for v in x)
    lr = tuple(rat(float(v)) for v in lam)
    phix = system.phi.eval(xr)
    arg = vadd(lr, vadd(phix, tuple(rat(float(v)) for v in p2)))
    prox_pt = system.penalty.prox(arg)
    r1 = vsub(system.psi(xr, lr), tuple(rat(float(v)) for v in p1))
    r2 = vsub(vadd(phix, tuple(rat(float(v)) for v in p2)), prox_pt)
    return np.array(to_float_vec(r1 + r2), dtype=float), arg


def solve_perturbed(system: VarSystem, p1, p2, start, tol=1e-10, max_iter=200):
    """Damped semismooth Newton for the canonically perturbed system.

    Residual R(x, lam) = (Psi(x, lam) - p1,
                          Phi(x) + p2 - prox(lam + Phi(x) + p2));
    generalized Jacobian elements come from the active piece of the
    proximal map.  Reports NewtonResult; never raises on stagnation.
    """
    import numpy as np

    n, m = system.n, system.m
    x = np.array([float(v) for v in start[0]], dtype=float)
    lam = np.array([float(v) for v in start[1]], dtype=float)
    r, arg = _residual_float(system, p1, p2, x, lam)
    rnorm = float(np.linalg.norm(r))
    for it in range(max_iter):
        if rnorm <= tol:
            return NewtonResult(True, tuple(x.tolist()), tuple(lam.tolist()),
                                rnorm, it)
        xr = tuple(rat(float(v)) for v in x)
        lr = tuple(rat(float(v)) for v in lam)
        a = system.psi_jacobian_x(xr, lr).to_float()
        g = system.phi.jacobian_at_float(tuple(float(v) for v in x))
        jac_prox, _ = system.penalty.prox_linearization(arg)
        pj = jac_prox.to_float()
        top = np.hstack([a, g.T])
        bottom = np.hstack([(np.eye(m) - pj) @ g, -pj])
        jmat = np.vstack([top, bottom])
        try:
            step = np.linalg.solve(jmat, -r)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jmat, -r, rcond=None)
        damp = 1.0
        best = None
        for _ in range(30):
            xn = x + damp * step[:n]
            ln = lam + damp * step[n:]
            rn, argn = _residual_float(system, p1, p2, xn, ln)
            rn_norm = float(np.linalg.norm(rn))
            if rn_norm < rnorm:
                best = (xn, ln, rn, argn, rn_norm)
                break
            damp /= 2
        if best is None:
            return NewtonResult(False, tuple(x.tolist()), tuple(lam.tolist()),
                                rnorm, it + 1)
        x, lam, r, arg, rnorm = best
    converged = rnorm <= tol
    return NewtonResult(converged, tuple(x.tolist()), tuple(lam.tolist()),
                        rnorm, max_iter)


def semi_isolated_probe(system: VarSystem, xbar, lam_bar, grid=8, scale=1e-3,
                        tol=1e-10, seed=0):
    """Solve a deterministic family of perturbed systems and record the
    ratio (|x - xbar| + dist(lam, multipliers)) / (|p1| + |p2|).

    Returns (ProbeTrace, estimated modulus).  Non-converged solves are
    recorded with NaN lhs and excluded from the modulus.
    """
    import random as _random

    import numpy as np

    xbar = tuple(rat(v) for v in xbar)
    lam_bar = tuple(rat(v) for v in lam_bar)
    if not system.is_solution(xbar, lam_bar):
        raise ValueError("probe is anchored at an exact solution")
    n, m = system.n, system.m
    mset = system.multiplier_set(xbar)
    rng = _random.Random(seed)
    dirs = []
    for i in range(n):
        e = [0.0] * n
        e[i] = 1.0
        dirs.append((tuple(e), (0.0,) * m))
        dirs.append((tuple(-v for v in e), (0.0,) * m))
    for i in range(m):
        e = [0.0] * m
        e[i] = 1.0
        dirs.append(((0.0,) * n, tuple(e)))
        dirs.append(((0.0,) * n, tuple(-v for v in e)))
    for _ in range(4):
        d1 = [rng.uniform(-1, 1) for _ in range(n)]
        d2 = [rng.uniform(-1, 1) for _ in range(m)]
        nd = math.hypot(*(d1 + d2)) or 1.0
        dirs.append((tuple(v / nd for v in d1), tuple(v / nd for v in d2)))

    records = []
    modulus = 0.0
    for k in range(1, grid + 1):
        t = scale / (2 ** (k - 1))
        d1, d2 = dirs[(k - 1) % len(dirs)]
        p1 = tuple(t * v for v in d1)
        p2 = tuple(t * v for v in d2)
        res = solve_perturbed(system, p1, p2, (xbar, lam_bar), tol=tol)
        pert = math.hypot(*p1) + math.hypot(*p2)
        if not res.converged:
            records.append(ProbeRecord(t=t, p1=p1, p2=p2, x=res.x, lam=res.lam,
                                       lhs=math.nan, rhs=pert, ratio=math.nan))
            continue
        lam_exact = tuple(rat(float(v)) for v in res.lam)
        _, d2dist = mset.poly.project_point(lam_exact)
        lhs = norm2(vsub(tuple(rat(float(v)) for v in res.x), xbar)) \
            + float(d2dist) ** 0.5
        ratio = lhs / pert if pert > 0 else 0.0
        modulus = max(modulus, ratio)
        records.append(ProbeRecord(t=t, p1=p1, p2=p2, x=res.x, lam=res.lam,
                                   lhs=lhs, rhs=pert, ratio=ratio))
    return ProbeTrace(records), modulus
