"""Exact algebra of 1-jets of local diffeomorphisms of a box chart in R^3.

A jet is stored as (source, target, matrix): two chart points and the 3x3
Jacobian of the map at the source.  Composition multiplies Jacobians by the
chain rule; a linear frame at x is the jet of a map 0 -> x and is acted on
by jets through composition.

All values are immutable and all operations are pure functions, so the
module is safe for unrestricted concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix, SourceTargetMismatch

# Source/target matching tolerance and invertibility floor (double precision
# leaves ample headroom at chart scale ~1).
POINT_TOL = 1e-9
DET_TOL = 1e-12


def as_point(x) -> np.ndarray:
    """Coerce to an immutable finite 3-vector of chart coordinates."""
    p = np.array(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"point has non-finite coordinates: {p}")
    p.setflags(write=False)
    return p


def as_matrix(m, *, invertible: bool = False) -> np.ndarray:
    """Coerce to an immutable finite 3x3 matrix, optionally requiring |det| >= DET_TOL."""
    a = np.array(m, dtype=float).reshape(3, 3)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if invertible and abs(np.linalg.det(a)) < DET_TOL:
        raise SingularMatrix(f"|det| = {abs(np.linalg.det(a)):.3e} < {DET_TOL:.0e}")
    a.setflags(write=False)
    return a


def points_close(a: np.ndarray, b: np.ndarray, tol: float = POINT_TOL) -> bool:
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol)


@dataclass(frozen=True, eq=False)
class Jet1:
    """1-jet (source, target, matrix) with invertible matrix part."""

    source: np.ndarray
    target: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source", as_point(self.source))
        object.__setattr__(self, "target", as_point(self.target))
        object.__setattr__(self, "matrix", as_matrix(self.matrix, invertible=True))

    def __repr__(self):
        return f"Jet1({self.source.tolist()} -> {self.target.tolist()})"


@dataclass(frozen=True, eq=False)
class Frame:
    """Linear frame at a point: the jet of a map taking 0 to ``base``."""

    base: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_point(self.base))
        object.__setattr__(self, "matrix", as_matrix(self.matrix, invertible=True))


def identity(x) -> Jet1:
    """Identity jet at x."""
    return Jet1(x, x, np.eye(3))


def compose(g: Jet1, h: Jet1, tol: float = POINT_TOL) -> Jet1:
    """Jet composition g . h (h applied first).  Requires h.target == g.source."""
    if not points_close(h.target, g.source, tol):
        raise SourceTargetMismatch(
            f"h.target {h.target.tolist()} != g.source {g.source.tolist()}"
        )
    return Jet1(h.source, g.target, g.matrix @ h.matrix)


def invert(g: Jet1) -> Jet1:
    """Groupoid inverse: swaps source/target, inverts the matrix part."""
    return Jet1(g.target, g.source, np.linalg.inv(g.matrix))


def act_on_frame(g: Jet1, z: Frame, tol: float = POINT_TOL) -> Frame:
    """Move a frame along a jet: base goes to g.target, matrix composes."""
    if not points_close(z.base, g.source, tol):
        raise SourceTargetMismatch(
            f"frame base {z.base.tolist()} != g.source {g.source.tolist()}"
        )
    return Frame(g.target, g.matrix @ z.matrix)
