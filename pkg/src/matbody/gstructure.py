"""Bridge between groupoid sections and parallelisms (frame fields).

A parallelism P sends each point to a frame; the induced groupoid section is
g(x, y) = P(y) P(x)^-1.  Sections arising this way are exactly those obeying
the composition law g(y, z) g(x, y) = g(x, z), and inverting the map requires
choosing one frame: two parallelisms induce the same section iff they differ
by a fixed right factor.  Isotropy groups are sampled by conjugating material
symmetries with a reference frame, and integrability of a parallelism is
decided by the commutativity of its frame vector fields.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .bodies import Body, SampleSet, is_material_symmetry
from .errors import NotMorphism, OutOfDomain, SourceTargetMismatch
from .grid import Grid, TrilinearField, grid_gradient
from .jets import Frame, Jet1, as_matrix, as_point, points_close

MORPHISM_TOL = 1e-9


class Parallelism:
    """Global frame field: x -> Frame(x, M(x)) with M(x) invertible."""

    def __init__(self, matrix_fn: Callable[[np.ndarray], np.ndarray], lo, hi):
        self._fn = matrix_fn
        self.lo = as_point(lo)
        self.hi = as_point(hi)

    def contains(self, x) -> bool:
        p = np.asarray(x, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def frame(self, x) -> Frame:
        p = as_point(x)
        if not self.contains(p):
            raise OutOfDomain(f"{p.tolist()} outside parallelism domain")
        return Frame(p, as_matrix(self._fn(p), invertible=True))

    def matrix(self, x) -> np.ndarray:
        return self.frame(x).matrix

    @staticmethod
    def constant(M, lo, hi) -> "Parallelism":
        M = np.asarray(M, dtype=float)
        return Parallelism(lambda x: M, lo, hi)

    @staticmethod
    def from_grid(axes, frames) -> "Parallelism":
        field = TrilinearField(axes, np.asarray(frames, dtype=float))
        return Parallelism(field, [a[0] for a in axes], [a[-1] for a in axes])

    def right_translate(self, Z0) -> "Parallelism":
        """The parallelism x -> P(x) Z0 (same induced groupoid section)."""
        Z0 = np.asarray(Z0, dtype=float)
        return Parallelism(lambda x: self._fn(x) @ Z0, self.lo, self.hi)


def g_map(P: Parallelism, x, y) -> Jet1:
    """Induced groupoid section: the jet (x -> y, P(y) P(x)^-1)."""
    return Jet1(x, y, P.matrix(y) @ np.linalg.inv(P.matrix(x)))


class GroupoidSection:
    """Assignment (x, y) -> jet with that source and target."""

    def __init__(self, jet_fn: Callable[[np.ndarray, np.ndarray], Jet1]):
        self._fn = jet_fn

    def __call__(self, x, y) -> Jet1:
        return self._fn(as_point(x), as_point(y))

    @staticmethod
    def of_parallelism(P: Parallelism) -> "GroupoidSection":
        return GroupoidSection(lambda x, y: g_map(P, x, y))


def morphism_defect(S: GroupoidSection, triples: Sequence) -> float:
    """Worst violation of S(y,z) S(x,y) = S(x,z) over the given triples."""
    worst = 0.0
    for (x, y, z) in triples:
        lhs = S(y, z).matrix @ S(x, y).matrix
        worst = max(worst, float(np.max(np.abs(lhs - S(x, z).matrix))))
    return worst


def invert_g_map(S: GroupoidSection, z, Z: Frame, points: Sequence,
                 tol: float = MORPHISM_TOL) -> Parallelism:
    """Parallelism P(x) = S(z, x) . Z, defined when S obeys the morphism law.

    The law is checked on all ordered triples drawn from ``points``; by
    construction the result satisfies g_map(P) == S wherever the law holds.
    """
    z = as_point(z)
    pts = [as_point(p) for p in points]
    triples = [(a, b, c) for a in pts for b in pts for c in pts]
    defect = morphism_defect(S, triples)
    if defect > tol:
        raise NotMorphism(f"composition-law defect {defect:.3e} > {tol:g} on sampled triples")
    lo = np.min(np.stack(pts + [z]), axis=0)
    hi = np.max(np.stack(pts + [z]), axis=0)
    Zm = Z.matrix
    return Parallelism(lambda x: S(z, x).matrix @ Zm, lo, hi)


def isotropy_group_sample(body: Body, z0, Z0: Frame, candidates: Sequence,
                          samples: SampleSet, tol: float) -> list:
    """Conjugated material symmetries Z0^-1 P Z0 for candidates P that pass.

    Realizes the associated-group construction: the sampled isotropy group of
    the body at z0, read through the reference frame Z0.
    """
    z0 = as_point(z0)
    if not body.contains(z0):
        raise OutOfDomain(f"{z0.tolist()} outside domain of body '{body.name}'")
    if not points_close(Z0.base, z0):
        raise SourceTargetMismatch(
            f"reference frame based at {Z0.base.tolist()}, not at z0 = {z0.tolist()}"
        )
    Zi = np.linalg.inv(Z0.matrix)
    out = []
    for P in candidates:
        P = np.asarray(P, dtype=float)
        if is_material_symmetry(body, z0, P, samples, tol):
            out.append(Zi @ P @ Z0.matrix)
    return out


def frame_bracket_defect(P: Parallelism, grid: Grid) -> float:
    """Max commutator of the frame vector fields over interior lattice points.

    E_i are the columns of P; [E_i, E_j]^k = E_i^l d_l E_j^k - E_j^l d_l E_i^k
    with central differences on the grid.  Vanishing brackets characterize
    integrable parallelisms (coordinate frames).
    """
    frames = np.stack([P.matrix(x) for x in grid.points])
    E = grid.reshape(frames)                       # (nx,ny,nz,3(k),3(col i))
    dE = grid_gradient(grid, E)
    dE_stack = np.stack(dE, axis=-1)               # [..., k, i, l]
    # bracket[..., k, i, j] = sum_l E[..., l, i] dE[l][..., k, j] - (i <-> j)
    term = np.einsum("...li,...kjl->...kij", E, dE_stack)
    bracket = term - np.swapaxes(term, -1, -2)
    interior = grid.interior_mask()
    return float(np.max(np.abs(bracket[interior])))


def is_integrable_parallelism(P: Parallelism, grid: Grid, tol: float) -> tuple:
    """(integrable?, max bracket defect) for a parallelism sampled on a grid."""
    defect = frame_bracket_defect(P, grid)
    return defect <= tol, defect
