"""Problem-file schema: parsing and validation.

A problem file is a UTF-8 JSON document:

    {
      "name": "...",
      "kind": "enlp" | "varsys",
      "n": 2, "m": 2,
      "phi0": "x1^2 + x2^2",            # enlp only
      "f": ["x1", "x2"],                # varsys only, n expressions
      "Phi": ["x1", "0"],               # m expressions
      "Y": {"b": [["-1","0"],["0","-1"]], "alpha": ["0","0"]},
      "B": [["1","0"],["0","1"]],
      "points": [{"x": ["0","0"], "lambda": ["0","0"]}],
      "probe": {"grid": 8, "tol": 1e-10}   # optional defaults for --probe
    }

All numerals are exact rationals: JSON integers or strings "p/q".
Validation failures raise ProblemFileError with the offending path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .enlp import EnlpProblem
from .exprparse import ParseError, parse_expression
from .linalg import RatMatrix, psd_check
from .plq import PlqPenalty
from .polyhedra import Polyhedron
from .polymap import PolyMap
from .rational import parse_rat
from .varsys import VarSystem

__all__ = ["ProblemFile", "ProblemFileError", "parse_problem_file",
           "parse_problem_doc"]


class ProblemFileError(ValueError):
    def __init__(self, path, message):
        super().__init__("%s: %s" % (path, message))
        self.path = path


@dataclass
class ProblemFile:
    name: str
    kind: str
    n: int
    m: int
    problem: object          # EnlpProblem | VarSystem
    points: list             # [(x tuple, lambda tuple), ...]
    probe_grid: int
    probe_tol: float


def _expect(doc, key, types, path):
    if key not in doc:
        raise ProblemFileError("%s.%s" % (path, key), "missing field")
    v = doc[key]
    if not isinstance(v, types):
        raise ProblemFileError("%s.%s" % (path, key),
                               "expected %s" % (types,))
    return v


def _rat_at(value, path):
    try:
        return parse_rat(value)
    except (ValueError, TypeError) as e:
        raise ProblemFileError(path, "bad rational %r (%s)" % (value, e))


def _rat_vector(values, length, path):
    if not isinstance(values, list) or len(values) != length:
        raise ProblemFileError(path, "expected a list of %d rationals" % length)
    return tuple(_rat_at(v, "%s[%d]" % (path, i)) for i, v in enumerate(values))


def _rat_matrix(values, nrows, ncols, path):
    if not isinstance(values, list) or len(values) != nrows:
        raise ProblemFileError(path, "expected %d rows" % nrows)
    return RatMatrix([_rat_vector(r, ncols, "%s[%d]" % (path, i))
                      for i, r in enumerate(values)])


def _expression(text, n, path):
    if not isinstance(text, str):
        raise ProblemFileError(path, "expected an expression string")
    try:
        return parse_expression(text, n)
    except ParseError as e:
        raise ProblemFileError(path, str(e))


def parse_problem_doc(doc, name_hint="problem") -> ProblemFile:
    if not isinstance(doc, dict):
        raise ProblemFileError("$", "top level must be an object")
    name = doc.get("name", name_hint)
    kind = _expect(doc, "kind", str, "$")
    if kind not in ("enlp", "varsys"):
        raise ProblemFileError("$.kind", "must be 'enlp' or 'varsys'")
    n = _expect(doc, "n", int, "$")
    m = _expect(doc, "m", int, "$")
    if n < 1 or m < 1:
        raise ProblemFileError("$.n", "dimensions must be positive")

    ydoc = _expect(doc, "Y", dict, "$")
    brows = _expect(ydoc, "b", list, "$.Y")
    alpha = _expect(ydoc, "alpha", list, "$.Y")
    if len(brows) != len(alpha):
        raise ProblemFileError("$.Y", "b and alpha lengths differ")
    yrows = [_rat_vector(r, m, "$.Y.b[%d]" % i) for i, r in enumerate(brows)]
    yalpha = [_rat_at(a, "$.Y.alpha[%d]" % i) for i, a in enumerate(alpha)]
    ypoly = Polyhedron(yrows, yalpha).with_dim(m)

    bmat = _rat_matrix(_expect(doc, "B", list, "$"), m, m, "$.B")
    if not bmat.is_symmetric():
        raise ProblemFileError("$.B", "matrix is not symmetric")
    if not psd_check(bmat):
        raise ProblemFileError("$.B", "matrix is not positive semidefinite")
    try:
        penalty = PlqPenalty(ypoly, bmat)
    except ValueError as e:
        raise ProblemFileError("$.Y", str(e))

    phi_list = _expect(doc, "Phi", list, "$")
    if len(phi_list) != m:
        raise ProblemFileError("$.Phi", "expected %d expressions" % m)
    phi = PolyMap([_expression(t, n, "$.Phi[%d]" % i)
                   for i, t in enumerate(phi_list)], n=n)

    if kind == "enlp":
        if "f" in doc:
            raise ProblemFileError("$.f", "an enlp file declares phi0, not f")
        phi0 = _expression(_expect(doc, "phi0", str, "$"), n, "$.phi0")
        problem = EnlpProblem(phi0, phi, penalty)
    else:
        if "phi0" in doc:
            raise ProblemFileError("$.phi0", "a varsys file declares f, not phi0")
        f_list = _expect(doc, "f", list, "$")
        if len(f_list) != n:
            raise ProblemFileError("$.f", "expected %d expressions" % n)
        fmap = PolyMap([_expression(t, n, "$.f[%d]" % i)
                        for i, t in enumerate(f_list)], n=n)
        problem = VarSystem(fmap, phi, penalty)

    pts_doc = _expect(doc, "points", list, "$")
    if not pts_doc:
        raise ProblemFileError("$.points", "at least one point is required")
    points = []
    for i, p in enumerate(pts_doc):
        if not isinstance(p, dict):
            raise ProblemFileError("$.points[%d]" % i, "expected an object")
        x = _rat_vector(_expect(p, "x", list, "$.points[%d]" % i), n,
                        "$.points[%d].x" % i)
        lam = _rat_vector(_expect(p, "lambda", list, "$.points[%d]" % i), m,
                          "$.points[%d].lambda" % i)
        points.append((x, lam))

    probe = doc.get("probe", {})
    if not isinstance(probe, dict):
        raise ProblemFileError("$.probe", "expected an object")
    grid = probe.get("grid", 8)
    tol = probe.get("tol", 1e-10)
    if not isinstance(grid, int) or grid < 1:
        raise ProblemFileError("$.probe.grid", "expected a positive integer")

    return ProblemFile(name=name, kind=kind, n=n, m=m, problem=problem,
                       points=points, probe_grid=grid, probe_tol=float(tol))


def parse_problem_file(path) -> ProblemFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ProblemFileError(str(path), "cannot read file (%s)" % e)
    except json.JSONDecodeError as e:
        raise ProblemFileError(str(path), "invalid JSON (%s)" % e)
    import os

    hint = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_problem_doc(doc, name_hint=hint)
