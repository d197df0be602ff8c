"""Variational systems of subdifferential type.

A system is a triple (f, Phi, theta) with f : R^n -> R^n,
Phi : R^n -> R^m polynomial maps and theta a piecewise linear-quadratic
penalty; its residual map is

    Psi(x, lam) = f(x) + DPhi(x)^T lam,

and a pair (x, lam) solves the system when Psi(x, lam) = 0 and lam is a
subgradient of theta at Phi(x).
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import RatMatrix
from .plq import PlqPenalty
from .polyhedra import Polyhedron
from .polymap import PolyMap
from .rational import rat, vadd

__all__ = ["VarSystem", "MultiplierSet"]


@dataclass(frozen=True)
class MultiplierSet:
    """The multiplier polyhedron at a base point with its shape flags."""

    poly: Polyhedron
    empty: bool
    singleton: bool
    dimension: int
    representative: tuple | None

    def contains(self, lam) -> bool:
        return self.poly.contains(lam)


class VarSystem:
    """The data (f, Phi, penalty) with exact residual calculus."""

    def __init__(self, f: PolyMap, phi: PolyMap, penalty: PlqPenalty):
        if f.k != f.n:
            raise ValueError("f must map R^n to R^n")
        if phi.n != f.n:
            raise ValueError("f and Phi disagree on the primal dimension")
        if phi.k != penalty.m:
            raise ValueError("Phi range dimension does not match the penalty")
        self.f = f
        self.phi = phi
        self.penalty = penalty
        self.n = f.n
        self.m = phi.k
        self._cache: dict = {}

    # -- residual ----------------------------------------------------------
    def psi(self, x, lam):
        """Psi(x, lam) = f(x) + DPhi(x)^T lam, exactly."""
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        jac = self.phi.jacobian_at(x)
        return vadd(self.f.eval(x), jac.rmatvec(lam))

    def psi_jacobian_x(self, x, lam) -> RatMatrix:
        """d(Psi)/dx = Df(x) + sum_i lam_i Hess(Phi_i)(x)."""
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        jac = self.f.jacobian_at(x)
        rows = [list(r) for r in jac.rows]
        for i in range(self.m):
            if lam[i] == 0:
                continue
            h = self.phi.hessian_at(i, x)
            for a in range(self.n):
                for b in range(self.n):
                    rows[a][b] += lam[i] * h.rows[a][b]
        return RatMatrix(rows)

    # -- float counterparts (numeric probes only) -------------------------------
    def psi_float(self, x, lam):
        import numpy as np

        jac = self.phi.jacobian_at_float(x)
        return np.array(self.f.eval_float(x), dtype=float) + jac.T @ np.asarray(lam)

    # -- multipliers ----------------------------------------------------------
    def multiplier_set(self, x) -> MultiplierSet:
        """All lam with Psi(x, lam) = 0 and lam a subgradient at Phi(x)."""
        x = tuple(rat(v) for v in x)
        key = ("mult", x)
        if key in self._cache:
            return self._cache[key]
        jac = self.phi.jacobian_at(x)
        fx = self.f.eval(x)
        sub = self.penalty.subdiff(self.phi.eval(x))
        rows = list(sub.b)
        rhs = list(sub.alpha)
        for j in range(self.n):  # DPhi(x)^T lam = -f(x), row per primal coordinate
            col = tuple(jac.rows[i][j] for i in range(self.m))
            rows.append(col)
            rhs.append(-fx[j])
            rows.append(tuple(-v for v in col))
            rhs.append(fx[j])
        poly = Polyhedron(rows, rhs).with_dim(self.m)
        if poly.is_empty():
            out = MultiplierSet(poly, True, False, -1, None)
        else:
            dim = poly.affine_dimension()
            rep, _ = poly.project_point((rat(0),) * self.m)
            out = MultiplierSet(poly, False, dim == 0, dim, rep)
        self._cache[key] = out
        return out

    def is_solution(self, x, lam) -> bool:
        x = tuple(rat(v) for v in x)
        lam = tuple(rat(v) for v in lam)
        if any(v != 0 for v in self.psi(x, lam)):
            return False
        return self.penalty.subdiff_contains(self.phi.eval(x), lam)

    def is_stationary(self, x) -> bool:
        return not self.multiplier_set(x).empty
