"""Exact polyhedral geometry.

H-representation polyhedra and cones over the rationals, with the cone
calculus used by the stability analyses: tangent, normal, critical and
polar cones, face enumeration, horizon cones, Euclidean projection,
Fourier-Motzkin projection, and limiting normal cones of finite unions.

Generator representations are computed by an incremental double
description sweep and are intended for desk scale (dimension <= 8 or
so); complexity is exponential in the number of rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import RatMatrix, pseudo_inverse_psd, rank, rref
from .lp import LpInfeasible, LpOptimal, lp_feasible_point, lp_max
from .rational import (ONE, ZERO, is_zero_vec, primitive, rat, vadd, vdot,
                       vscale, vsub)

__all__ = [
    "Polyhedron",
    "PolyCone",
    "Face",
    "PolyUnion",
    "tangent_cone",
    "normal_cone",
    "critical_cone",
    "dual_cone",
    "polar_cone",
    "horizon_cone",
    "fm_project",
    "limiting_normal_cone_union",
    "intersect_cones",
]

_GEN_MEMO: dict = {}
_FACES_MEMO: dict = {}
_FROM_GEN_MEMO: dict = {}


def _canon_row(b, a):
    """Jointly scale (b, alpha) to a primitive integer row."""
    joint = primitive(tuple(b) + (a,))
    return joint[:-1], joint[-1]


class Polyhedron:
    """{y : <b_i, y> <= alpha_i, i = 1..p} with exact rational data.

    Rows are normalized to primitive integer form and deduplicated;
    opposite row pairs are recognized internally as equalities so that
    enumerative routines only branch on genuine inequalities.
    """

    def __init__(self, b_rows, alpha):
        b_rows = list(b_rows)
        alpha = list(alpha)
        if len(b_rows) != len(alpha):
            raise ValueError("row/alpha count mismatch")
        rows = []
        seen = set()
        for b, a in zip(b_rows, alpha):
            cb, ca = _canon_row(tuple(rat(v) for v in b), rat(a))
            key = (cb, ca)
            if key in seen:
                continue
            if is_zero_vec(cb) and ca >= 0:
                continue  # trivially true
            seen.add(key)
            rows.append(key)
        self.b = tuple(r for r, _ in rows)
        self.alpha = tuple(a for _, a in rows)
        if self.b:
            d = len(self.b[0])
            if any(len(r) != d for r in self.b):
                raise ValueError("inconsistent row dimensions")
            self._dim = d
        else:
            self._dim = None
        self._cache: dict = {}

    # -- construction ------------------------------------------------------
    @staticmethod
    def whole_space(dim):
        p = Polyhedron((), ())
        p._dim = dim
        return p

    @staticmethod
    def empty(dim):
        p = Polyhedron(((ZERO,) * dim,), (-ONE,))
        p._dim = dim
        return p

    @staticmethod
    def from_eq_ineq(eq_rows, eq_rhs, ineq_rows, ineq_rhs, dim=None):
        rows = list(ineq_rows) + [r for r in eq_rows] + [tuple(-v for v in r) for r in eq_rows]
        rhs = list(ineq_rhs) + list(eq_rhs) + [-a for a in eq_rhs]
        p = Polyhedron(rows, rhs)
        if p._dim is None:
            p._dim = dim
        return p

    @property
    def dim(self):
        if self._dim is None:
            raise ValueError("dimension of a constraint-free polyhedron is unset")
        return self._dim

    def with_dim(self, dim):
        if self._dim is None:
            self._dim = dim
        elif self._dim != dim:
            raise ValueError("dimension mismatch")
        return self

    # -- derived equality/inequality split ----------------------------------
    def _split(self):
        """Indices: (equality pair list [(i, j)], inequality index list)."""
        if "split" in self._cache:
            return self._cache["split"]
        n = len(self.b)
        paired = {}
        eq_pairs = []
        used = set()
        index = {(self.b[i], self.alpha[i]): i for i in range(n)}
        for i in range(n):
            if i in used:
                continue
            neg = (tuple(-v for v in self.b[i]), -self.alpha[i])
            j = index.get(neg)
            if j is not None and j != i and j not in used:
                eq_pairs.append((i, j))
                used.add(i)
                used.add(j)
        ineq = [i for i in range(n) if i not in used]
        self._cache["split"] = (eq_pairs, ineq)
        return eq_pairs, ineq

    def eq_system(self):
        """(rows, rhs) of the recognized equality part."""
        pairs, _ = self._split()
        return ([self.b[i] for i, _ in pairs], [self.alpha[i] for i, _ in pairs])

    def ineq_system(self):
        _, ineq = self._split()
        return ([self.b[i] for i in ineq], [self.alpha[i] for i in ineq])

    # -- membership --------------------------------------------------------
    def contains(self, y) -> bool:
        y = tuple(rat(v) for v in y)
        if self._dim is not None and len(y) != self._dim:
            raise ValueError("point dimension mismatch")
        return all(vdot(b, y) <= a for b, a in zip(self.b, self.alpha))

    def tight_rows(self, y):
        y = tuple(rat(v) for v in y)
        return frozenset(i for i in range(len(self.b))
                         if vdot(self.b[i], y) == self.alpha[i])

    def active_set(self, y) -> "Face":
        if not self.contains(y):
            raise ValueError("active set requested at an exterior point")
        tight = self.tight_rows(y)
        rows = list(self.b) + [tuple(-v for v in self.b[i]) for i in sorted(tight)]
        rhs = list(self.alpha) + [-self.alpha[i] for i in sorted(tight)]
        return Face(tight=tight, piece=Polyhedron(rows, rhs).with_dim(self.dim))

    def is_empty(self) -> bool:
        if "empty" in self._cache:
            return self._cache["empty"]
        if self._dim is None:
            self._cache["empty"] = False
            return False
        pt = lp_feasible_point(self.b, self.alpha, n=self.dim)
        self._cache["empty"] = pt is None
        if pt is not None:
            self._cache["point"] = pt
        return self._cache["empty"]

    def some_point(self):
        if self.is_empty():
            return None
        if "point" not in self._cache:
            self._cache["point"] = lp_feasible_point(self.b, self.alpha, n=self.dim)
        return self._cache["point"]

    # -- misc geometry -------------------------------------------------------
    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(self.b + other.b, self.alpha + other.alpha).with_dim(self.dim)

    def implicit_equality_rows(self):
        """Inequality rows satisfied with equality everywhere on the set."""
        if "implicit" in self._cache:
            return self._cache["implicit"]
        _, ineq = self._split()
        out = []
        for i in ineq:
            o = lp_max(tuple(-v for v in self.b[i]), self.b, self.alpha)
            if isinstance(o, LpOptimal) and -o.value == self.alpha[i]:
                out.append(i)
        self._cache["implicit"] = out
        return out

    def affine_dimension(self):
        """Dimension of the affine hull; -1 for the empty set."""
        if self.is_empty():
            return -1
        pairs, _ = self._split()
        eq_rows = [self.b[i] for i, _ in pairs]
        eq_rows += [self.b[i] for i in self.implicit_equality_rows()]
        if not eq_rows:
            return self.dim
        return self.dim - rank(eq_rows)

    def irredundant(self) -> "Polyhedron":
        """Equivalent description with LP-redundant rows removed."""
        rows = list(self.b)
        rhs = list(self.alpha)
        i = 0
        while i < len(rows):
            others = rows[:i] + rows[i + 1:]
            orhs = rhs[:i] + rhs[i + 1:]
            o = lp_max(rows[i], tuple(others), tuple(orhs))
            if isinstance(o, LpInfeasible):
                return Polyhedron.empty(self.dim)
            if isinstance(o, LpOptimal) and o.value <= rhs[i]:
                rows.pop(i)
                rhs.pop(i)
            else:
                i += 1
        return Polyhedron(rows, rhs).with_dim(self.dim)

    # -- Euclidean projection -------------------------------------------------
    def _subset_projector(self, subset):
        cache = self._cache.setdefault("projectors", {})
        if subset in cache:
            return cache[subset]
        eq_rows, eq_rhs = self.eq_system()
        rows = list(eq_rows) + [self.b[i] for i in subset]
        rhs = list(eq_rhs) + [self.alpha[i] for i in subset]
        if not rows:
            cache[subset] = ("free", None, None, None)
            return cache[subset]
        amat = RatMatrix(rows)
        gram_inv = pseudo_inverse_psd(amat @ amat.T)
        cache[subset] = ("proj", amat, gram_inv, tuple(rhs))
        return cache[subset]

    def project_point(self, x):
        """Euclidean projection: (nearest point, squared distance), exact.

        The projection lies on some face, where it equals the affine
        projection onto the rows tight there, so scanning the affine
        projections of all inequality subsets and keeping the nearest
        feasible one is exact.
        """
        if self.is_empty():
            raise ValueError("projection onto an empty polyhedron")
        x = tuple(rat(v) for v in x)
        if self.contains(x):
            return x, ZERO
        _, ineq = self._split()
        best = None
        best_d = None
        for subset in _subsets(tuple(ineq)):
            kind, amat, gram_inv, rhs = self._subset_projector(subset)
            if kind == "free":
                cand = x
            else:
                resid = vsub(amat.matvec(x), rhs)
                mu = gram_inv.matvec(resid)
                cand = vsub(x, amat.rmatvec(mu))
                if amat.matvec(cand) != tuple(rhs):
                    continue  # inconsistent affine system
            if not self.contains(cand):
                continue
            d = vdot(vsub(x, cand), vsub(x, cand))
            if best_d is None or d < best_d:
                best, best_d = cand, d
        assert best is not None, "nonempty polyhedron with no projection candidate"
        return best, best_d

    # -- serialization ---------------------------------------------------------
    def to_doc(self):
        return {"b": [[str(v) for v in row] for row in self.b],
                "alpha": [str(a) for a in self.alpha]}

    @staticmethod
    def from_doc(doc, dim=None):
        from .rational import parse_rat

        rows = [tuple(parse_rat(v) for v in row) for row in doc["b"]]
        alpha = [parse_rat(a) for a in doc["alpha"]]
        return Polyhedron(rows, alpha).with_dim(dim) if dim is not None else \
            Polyhedron(rows, alpha)

    def __repr__(self):
        return "Polyhedron(rows=%d, dim=%s)" % (len(self.b), self._dim)


def _subsets(items):
    """All subsets, by increasing cardinality (deterministic order)."""
    from itertools import combinations

    for k in range(len(items) + 1):
        for c in combinations(items, k):
            yield c


@dataclass(frozen=True)
class Face:
    """A face as its tight row indices plus the induced piece."""

    tight: frozenset
    piece: object


class PolyCone:
    """Polyhedral cone {x : <b_i, x> <= 0} with lazy generators.

    The generator form (lineality basis + extreme rays modulo lineality)
    is produced by double description and memoized per canonical
    H-representation; both forms are cross-checked on creation of the
    generator form.
    """

    def __init__(self, rows, dim=None):
        canon = []
        seen = set()
        for r in rows:
            c = primitive(tuple(rat(v) for v in r))
            if is_zero_vec(c):
                continue
            if c not in seen:
                seen.add(c)
                canon.append(c)
        self.rows = tuple(canon)
        if self.rows:
            d = len(self.rows[0])
            if any(len(r) != d for r in self.rows):
                raise ValueError("inconsistent row dimensions")
            self._dim = d
        else:
            self._dim = dim
        if self._dim is None:
            raise ValueError("cone dimension cannot be inferred from no rows")

    @property
    def dim(self):
        return self._dim

    @staticmethod
    def whole_space(dim):
        return PolyCone((), dim=dim)

    @staticmethod
    def from_generators(lineality, rays, dim):
        """Cone spanned by a lineality space and nonnegative ray combinations."""
        polar_rows = [tuple(rat(v) for v in r) for r in rays]
        for l in lineality:
            l = tuple(rat(v) for v in l)
            polar_rows.append(l)
            polar_rows.append(tuple(-v for v in l))
        canon = tuple(sorted({primitive(r) for r in polar_rows
                              if not is_zero_vec(primitive(r))}))
        key = (dim, canon)
        if key not in _FROM_GEN_MEMO:
            lin, ray = _cone_generators(canon, dim)
            rows = list(ray)
            for l in lin:
                rows.append(l)
                rows.append(tuple(-v for v in l))
            _FROM_GEN_MEMO[key] = PolyCone(rows, dim=dim)
        return _FROM_GEN_MEMO[key]

    def as_polyhedron(self) -> Polyhedron:
        return Polyhedron(self.rows, (ZERO,) * len(self.rows)).with_dim(self.dim)

    def contains(self, v) -> bool:
        v = tuple(rat(x) for x in v)
        if len(v) != self.dim:
            raise ValueError("vector dimension mismatch")
        return all(vdot(b, v) <= 0 for b in self.rows)

    def _key(self):
        return (self.dim, frozenset(self.rows))

    # -- generators -----------------------------------------------------------
    def generators(self):
        """(lineality basis, extreme rays), memoized."""
        key = self._key()
        if key not in _GEN_MEMO:
            lin, rays = _cone_generators(self.rows, self.dim)
            for g in list(lin) + [tuple(-v for v in l) for l in lin] + list(rays):
                assert self.contains(g), "generator violates H-representation"
            _GEN_MEMO[key] = (lin, rays)
        return _GEN_MEMO[key]

    def lineality_basis(self):
        return self.generators()[0]

    def extreme_rays(self):
        return self.generators()[1]

    def span_basis(self):
        """Basis of the linear span of the cone."""
        lin, rays = self.generators()
        stacked = list(lin) + list(rays)
        if not stacked:
            return ()
        red, piv = rref(stacked)
        return tuple(primitive(tuple(red[i])) for i in range(len(piv)))

    def is_trivial(self) -> bool:
        lin, rays = self.generators()
        return not lin and not rays

    # -- polarity ---------------------------------------------------------------
    def polar(self) -> "PolyCone":
        """Nonpositive polar {v : <v, x> <= 0 for all x in the cone}."""
        lin, rays = self.generators()
        rows = list(rays)
        for l in lin:
            rows.append(l)
            rows.append(tuple(-v for v in l))
        return PolyCone(rows, dim=self.dim)

    def dual(self) -> "PolyCone":
        """Nonnegative polar {v : <v, x> >= 0 for all x in the cone}."""
        p = self.polar()
        return PolyCone([tuple(-v for v in r) for r in p.rows], dim=self.dim)

    def negate(self) -> "PolyCone":
        return PolyCone([tuple(-v for v in r) for r in self.rows], dim=self.dim)

    def set_equal(self, other: "PolyCone") -> bool:
        """Exact set equality via mutual generator membership."""
        for g in _all_generator_vectors(self):
            if not other.contains(g):
                return False
        for g in _all_generator_vectors(other):
            if not self.contains(g):
                return False
        return True

    # -- faces ---------------------------------------------------------------
    def faces(self):
        """All nonempty faces as Face(tight rows, sub-cone), memoized."""
        key = self._key()
        if key in _FACES_MEMO:
            return _FACES_MEMO[key]
        pairs, ineq = self._poly_split()
        always = frozenset(i for pair in pairs for i in pair)
        box_rows, box_rhs = _box_rows(self.dim)
        found = {}
        for subset in _subsets(tuple(ineq)):
            closure = self._face_closure(subset, ineq, box_rows, box_rhs)
            if closure in found:
                continue
            rows = list(self.rows) + [tuple(-v for v in self.rows[i])
                                      for i in sorted(closure)]
            found[closure] = Face(tight=closure | always,
                                  piece=PolyCone(rows, dim=self.dim))
        faces = tuple(found.values())
        _FACES_MEMO[key] = faces
        return faces

    def _poly_split(self):
        n = len(self.rows)
        index = {self.rows[i]: i for i in range(n)}
        used = set()
        pairs = []
        for i in range(n):
            if i in used:
                continue
            j = index.get(tuple(-v for v in self.rows[i]))
            if j is not None and j not in used and j != i:
                pairs.append((i, j))
                used.update((i, j))
        ineq = [i for i in range(n) if i not in used]
        return pairs, ineq

    def _face_closure(self, subset, ineq, box_rows, box_rhs):
        """Inequality rows identically zero on the face tight on `subset`."""
        eq = [self.rows[i] for i in subset]
        others = [i for i in ineq if i not in subset]
        # relative-interior probe over (x, t): maximize t subject to
        # <b_i, x> <= -t for the rows outside the subset; t* > 0 means the
        # subset is already closed
        n = self.dim
        a_ub = [tuple(r) + (ZERO,) for r in self.rows]
        b_ub = [ZERO] * len(self.rows)
        for i in others:
            a_ub.append(tuple(self.rows[i]) + (ONE,))
            b_ub.append(ZERO)
        a_ub += [tuple(r) + (ZERO,) for r in box_rows]
        b_ub += list(box_rhs)
        a_ub.append((ZERO,) * n + (ONE,))
        b_ub.append(ONE)
        a_eq = [tuple(r) + (ZERO,) for r in eq]
        b_eq = [ZERO] * len(eq)
        o = lp_max((ZERO,) * n + (ONE,), a_ub, b_ub, a_eq, b_eq)
        assert isinstance(o, LpOptimal)
        if o.value > 0:
            return frozenset(subset)
        closure = set(subset)
        for i in others:
            o = lp_max(tuple(-v for v in self.rows[i]),
                       tuple(list(self.rows) + box_rows),
                       tuple([ZERO] * len(self.rows) + list(box_rhs)),
                       tuple(eq), tuple([ZERO] * len(eq)))
            assert isinstance(o, LpOptimal)
            if o.value == 0:
                closure.add(i)
        return frozenset(closure)

    def __repr__(self):
        return "PolyCone(rows=%d, dim=%d)" % (len(self.rows), self.dim)


def _box_rows(n):
    rows = []
    for i in range(n):
        e = [ZERO] * n
        e[i] = ONE
        rows.append(tuple(e))
        e2 = [ZERO] * n
        e2[i] = -ONE
        rows.append(tuple(e2))
    return rows, [ONE] * (2 * n)


def _all_generator_vectors(cone: PolyCone):
    lin, rays = cone.generators()
    out = list(rays)
    for l in lin:
        out.append(l)
        out.append(tuple(-v for v in l))
    return out


def _cone_generators(rows, dim):
    """Double description: H-rows -> (lineality basis, extreme rays)."""
    lineality = [tuple(ONE if j == i else ZERO for j in range(dim))
                 for i in range(dim)]
    rays: list = []
    for b in rows:
        lv = [vdot(b, l) for l in lineality]
        hit = next((i for i, v in enumerate(lv) if v != 0), None)
        if hit is not None:
            l0, s = lineality[hit], lv[hit]
            if s > 0:
                l0 = tuple(-v for v in l0)
                s = -s
            new_lin = []
            for i, l in enumerate(lineality):
                if i == hit:
                    continue
                f = lv[i] / s
                new_lin.append(vsub(l, vscale(f, l0)))
            rays = [vsub(r, vscale(vdot(b, r) / s, l0)) for r in rays]
            rays.append(l0)
            lineality = new_lin
        else:
            pos = [r for r in rays if vdot(b, r) > 0]
            neg = [r for r in rays if vdot(b, r) < 0]
            zero = [r for r in rays if vdot(b, r) == 0]
            combo = []
            for rp in pos:
                ap = vdot(b, rp)
                for rn in neg:
                    an = vdot(b, rn)
                    combo.append(vadd(vscale(ap, rn), vscale(-an, rp)))
            rays = neg + zero + combo
        rays = _prune_rays(rays, lineality)
    lin_basis = ()
    if lineality:
        red, piv = rref(lineality)
        lin_basis = tuple(primitive(tuple(red[i])) for i in range(len(piv)))
    return lin_basis, tuple(rays)


def _prune_rays(rays, lineality):
    rays = [primitive(r) for r in rays if not is_zero_vec(primitive(r))]
    out = []
    seen = set()
    for r in rays:
        if r not in seen:
            seen.add(r)
            out.append(r)
    i = 0
    while i < len(out):
        if _in_cone_span(out[i], out[:i] + out[i + 1:], lineality):
            out.pop(i)
        else:
            i += 1
    return out


def _in_cone_span(v, rays, lineality):
    """v in cone(rays) + span(lineality)?  LP feasibility."""
    n = len(v)
    k, kl = len(rays), len(lineality)
    if k == 0 and kl == 0:
        return is_zero_vec(v)
    a_eq = []
    for j in range(n):
        a_eq.append(tuple(r[j] for r in rays) + tuple(l[j] for l in lineality))
    b_eq = list(v)
    a_ub = []
    for i in range(k):
        row = [ZERO] * (k + kl)
        row[i] = -ONE
        a_ub.append(tuple(row))
    b_ub = [ZERO] * k
    return lp_feasible_point(tuple(a_ub), tuple(b_ub), tuple(a_eq), tuple(b_eq),
                             n=k + kl) is not None


# -- cone operations on polyhedra -------------------------------------------

def tangent_cone(p: Polyhedron, y) -> PolyCone:
    """Feasible-direction cone at a point: relax the non-tight rows."""
    if not p.contains(y):
        raise ValueError("tangent cone requested at an exterior point")
    tight = p.tight_rows(y)
    return PolyCone([p.b[i] for i in sorted(tight)], dim=p.dim)


def normal_cone(p: Polyhedron, y) -> PolyCone:
    """Cone generated by the tight rows; equals the polar of the tangent cone."""
    if not p.contains(y):
        raise ValueError("normal cone requested at an exterior point")
    tight = p.tight_rows(y)
    cache = p._cache.setdefault("normal_cones", {})
    if tight not in cache:
        cache[tight] = PolyCone.from_generators(
            (), [p.b[i] for i in sorted(tight)], p.dim)
    return cache[tight]


def critical_cone(p: Polyhedron, lam, v) -> PolyCone:
    """Tangent cone at lam intersected with the orthogonal complement of v.

    Requires v to be a normal vector at lam (verified exactly).
    """
    t = tangent_cone(p, lam)
    tight = p.tight_rows(lam)
    if not _in_cone_span(tuple(rat(x) for x in v),
                         [p.b[i] for i in sorted(tight)], []):
        raise ValueError("v is not in the normal cone at the base point")
    v = tuple(rat(x) for x in v)
    rows = list(t.rows)
    if not is_zero_vec(v):
        rows.append(v)
        rows.append(tuple(-x for x in v))
    return PolyCone(rows, dim=p.dim)


def dual_cone(c: PolyCone) -> PolyCone:
    """Nonnegative polar; (R^m_+)* == R^m_+ under this convention."""
    return c.dual()


def polar_cone(c: PolyCone) -> PolyCone:
    """Nonpositive polar, the sign used by the criticality systems."""
    return c.polar()


def horizon_cone(p: Polyhedron) -> PolyCone:
    """Recession cone {y : <b_i, y> <= 0 for all i}; requires nonempty input."""
    if p.is_empty():
        raise ValueError("horizon cone of an empty polyhedron")
    return PolyCone(p.b, dim=p.dim)


# -- Fourier-Motzkin projection ----------------------------------------------

def fm_project(p: Polyhedron, keep) -> Polyhedron:
    """Exact projection onto the kept coordinates (ascending order).

    Eliminates one coordinate at a time, preferring substitution through
    recognized equality rows, with LP-based redundancy pruning after
    every elimination.
    """
    keep = sorted(set(keep))
    d = p.dim
    if any(k < 0 or k >= d for k in keep):
        raise ValueError("keep index out of range")
    drop = [j for j in range(d) if j not in keep]
    rows = [list(r) for r in p.b]
    rhs = list(p.alpha)

    for v in drop:
        rows, rhs = _eliminate_var(rows, rhs, v)
        pr = Polyhedron([tuple(r) for r in rows], rhs).with_dim(d).irredundant()
        rows = [list(r) for r in pr.b]
        rhs = list(pr.alpha)

    out_rows = []
    for r in rows:
        assert all(r[j] == 0 for j in drop), "eliminated coordinate survives"
        out_rows.append(tuple(r[j] for j in keep))
    return Polyhedron(out_rows, rhs).with_dim(len(keep))


def _eliminate_var(rows, rhs, v):
    # substitution through an equality pair touching v, when available
    n = len(rows)
    index = {}
    for i, r in enumerate(rows):
        index[(tuple(r), rhs[i])] = i
    for i, r in enumerate(rows):
        if r[v] == 0:
            continue
        neg = (tuple(-x for x in r), -rhs[i])
        cneg = _canon_row(*neg)
        j = None
        for k, rr in enumerate(rows):
            if k != i and _canon_row(tuple(rr), rhs[k]) == cneg:
                j = k
                break
        if j is not None:
            base, brhs, piv = rows[i], rhs[i], rows[i][v]
            new_rows, new_rhs = [], []
            for k, rr in enumerate(rows):
                if k in (i, j):
                    continue
                f = rr[v] / piv
                new_rows.append([a - f * bv for a, bv in zip(rr, base)])
                new_rhs.append(rhs[k] - f * brhs)
            return new_rows, new_rhs
    # classic Fourier-Motzkin combination step
    pos = [i for i, r in enumerate(rows) if r[v] > 0]
    neg = [i for i, r in enumerate(rows) if r[v] < 0]
    zero = [i for i, r in enumerate(rows) if r[v] == 0]
    new_rows = [list(rows[i]) for i in zero]
    new_rhs = [rhs[i] for i in zero]
    for ip in pos:
        a = rows[ip][v]
        for im in neg:
            c = rows[im][v]
            # a > 0, c < 0: (-c) * row_p + a * row_m kills coordinate v
            new_rows.append([(-c) * x + a * y for x, y in zip(rows[ip], rows[im])])
            new_rhs.append((-c) * rhs[ip] + a * rhs[im])
    return new_rows, new_rhs


# -- unions and limiting normals ----------------------------------------------

class PolyUnion:
    """Finite union of polyhedral pieces; membership tests each piece."""

    def __init__(self, pieces):
        self.pieces = tuple(pieces)

    def contains(self, y) -> bool:
        return any(p.contains(y) for p in self.pieces)

    def __len__(self):
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)


def intersect_cones(cones, dim) -> PolyCone:
    rows = []
    for c in cones:
        rows.extend(c.rows)
    return PolyCone(rows, dim=dim)


def limiting_normal_cone_union(union: PolyUnion, point):
    """Limiting normal cone to a finite union of polyhedra, exactly.

    Locally the union agrees with the union of the tangent cones of the
    pieces containing the point.  Regular normal cones are constant on
    the relatively open cells of the hyperplane arrangement spanned by
    all tangent rows, so the limiting cone is the union, over the cells
    contained in the local union, of the intersections of the normal
    cones of the covering pieces.  Returns a PolyUnion of PolyCone.
    """
    point = tuple(rat(v) for v in point)
    holders = [p for p in union.pieces if p.contains(point)]
    if not holders:
        raise ValueError("point outside the union")
    dim = holders[0].dim
    tangents = [tangent_cone(p, point) for p in holders]

    # hyperplane arrangement data: sign-canonical primitive normals
    hyper = []
    hindex = {}
    trows = []  # per tangent: list of (hyper index, required sign of <h,x>)
    for t in tangents:
        req = []
        for b in t.rows:
            h = primitive(b)
            neg = tuple(-v for v in h)
            if h in hindex:
                req.append((hindex[h], -1))        # <b,x> <= 0 with b = +h
            elif neg in hindex:
                req.append((hindex[neg], +1))       # b = -h: <h,x> >= 0
            else:
                hindex[h] = len(hyper)
                hyper.append(h)
                req.append((hindex[h], -1))
        trows.append(req)

    cells = _arrangement_cells(hyper, dim)

    cones = []
    seen = set()
    for signs in cells:
        covering = [k for k, req in enumerate(trows)
                    if all(signs[hi] == 0 or signs[hi] == s for hi, s in req)]
        if not covering:
            continue
        normal_parts = []
        for k in covering:
            gens = [tangents[k].rows[j] for j, b in enumerate(tangents[k].rows)
                    if _row_sign_on_cell(b, hindex, signs) == 0]
            normal_parts.append(PolyCone.from_generators((), gens, dim))
        cone = intersect_cones(normal_parts, dim)
        key = frozenset(cone.rows)
        if key not in seen:
            seen.add(key)
            cones.append(cone)

    # the regular normal cone at the point must be covered
    regular = intersect_cones(
        [PolyCone.from_generators((), list(t.rows), dim) for t in tangents], dim)
    for g in _all_generator_vectors(regular):
        assert any(c.contains(g) for c in cones), \
            "regular normal cone escaped the limiting cone union"
    return PolyUnion(cones)


def _row_sign_on_cell(b, hindex, signs):
    h = primitive(b)
    if h in hindex:
        return signs[hindex[h]]
    return -signs[hindex[tuple(-v for v in h)]]


def _arrangement_cells(hyper, dim):
    """Sign vectors of the nonempty cells of a central arrangement."""
    cells = []

    def feasible(assign):
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for hi, s in enumerate(assign):
            h = hyper[hi]
            if s == 0:
                a_eq.append(h)
                b_eq.append(ZERO)
            elif s < 0:
                a_ub.append(h)
                b_ub.append(-ONE)
            else:
                a_ub.append(tuple(-v for v in h))
                b_ub.append(-ONE)
        return lp_feasible_point(tuple(a_ub), tuple(b_ub),
                                 tuple(a_eq), tuple(b_eq), n=dim) is not None

    def rec(assign):
        if len(assign) == len(hyper):
            cells.append(tuple(assign))
            return
        for s in (0, -1, 1):
            assign.append(s)
            if feasible(assign):
                rec(assign)
            assign.pop()

    if hyper:
        rec([])
    else:
        cells.append(())
    return cells
