"""Right-invariant flows of algebroid sections and the derivation they induce.

A section assigns to each base point a pair (v(x), A(x)).  Its exponential
at x is the jet (x -> y(t), F(t)) obtained by integrating

    dy/dt = v(y),        dF/dt = A(y) F,        y(0) = x,  F(0) = I,

with classical fixed-step RK4.  Differentiating the pullback of the flow on
the coordinate frame at t = 0 recovers (-A(x), v(x)); that finite-difference
check is the sign-convention lock used by the connection module.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import LeftDomain, StepTooLarge
from .grid import TrilinearField
from .jets import Jet1, as_point

MAX_STEP = 1e-2
DEFAULT_STEP = 1e-3
MAX_PULLBACK_H = 1e-4
DEFAULT_PULLBACK_H = 1e-5


class SectionField:
    """Assignment x -> (v(x), A(x)), analytic or interpolated from a lattice."""

    def __init__(self, fn: Callable[[np.ndarray], tuple], lo, hi):
        self._fn = fn
        self.lo = as_point(lo)
        self.hi = as_point(hi)

    def contains(self, x) -> bool:
        p = np.asarray(x, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def value(self, x) -> tuple:
        p = np.asarray(x, dtype=float)
        if not self.contains(p):
            raise LeftDomain(f"point {p.tolist()} outside section domain")
        v, A = self._fn(p)
        return np.asarray(v, dtype=float), np.asarray(A, dtype=float)

    @staticmethod
    def from_functions(vf, af, lo, hi) -> "SectionField":
        return SectionField(lambda x: (vf(x), af(x)), lo, hi)

    @staticmethod
    def constant(v, A, lo, hi) -> "SectionField":
        v = np.asarray(v, dtype=float).reshape(3)
        A = np.asarray(A, dtype=float).reshape(3, 3)
        return SectionField(lambda x: (v, A), lo, hi)

    @staticmethod
    def from_grid(axes, v_data, a_data) -> "SectionField":
        """Trilinear interpolation of lattice samples; domain is the grid hull."""
        vf = TrilinearField(axes, np.asarray(v_data, dtype=float))
        af = TrilinearField(axes, np.asarray(a_data, dtype=float))
        lo = [a[0] for a in axes]
        hi = [a[-1] for a in axes]
        return SectionField(lambda x: (vf(x), af(x)), lo, hi)


def _rk4_step(section: SectionField, y: np.ndarray, F: np.ndarray, dt: float) -> tuple:
    """One RK4 step of (dy, dF) = (v(y), A(y) F)."""

    def rhs(y, F):
        v, A = section.value(y)
        return v, A @ F

    k1y, k1f = rhs(y, F)
    k2y, k2f = rhs(y + 0.5 * dt * k1y, F + 0.5 * dt * k1f)
    k3y, k3f = rhs(y + 0.5 * dt * k2y, F + 0.5 * dt * k2f)
    k4y, k4f = rhs(y + dt * k3y, F + dt * k3f)
    y = y + (dt / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y)
    F = F + (dt / 6.0) * (k1f + 2 * k2f + 2 * k3f + k4f)
    if not section.contains(y):
        raise LeftDomain(f"trajectory exited the domain at {y.tolist()}")
    return y, F


def _rk4(section: SectionField, t: float, y0: np.ndarray, F0: np.ndarray,
         step: float) -> tuple:
    """Integrate from 0 to t with fixed-step RK4."""
    n = max(1, math.ceil(abs(t) / step))
    dt = t / n
    y, F = y0.astype(float).copy(), F0.astype(float).copy()
    for _ in range(n):
        y, F = _rk4_step(section, y, F, dt)
    return y, F


def exp_section(section: SectionField, t: float, x, step: float = DEFAULT_STEP) -> Jet1:
    """Exponential jet Exp_t of the section at x: (x -> y(t), F(t))."""
    if step > MAX_STEP:
        raise StepTooLarge(f"step {step:g} > {MAX_STEP:g}")
    x = as_point(x)
    if t == 0.0:
        return Jet1(x, x, np.eye(3))
    y, F = _rk4(section, t, x, np.eye(3), step)
    return Jet1(x, y, F)


def flow_point(section: SectionField, t: float, x, step: float = DEFAULT_STEP) -> np.ndarray:
    """Base (anchor) flow of the section: target of the exponential jet."""
    return exp_section(section, t, x, step).target


def exp_trajectory(section: SectionField, t: float, x,
                   step: float = DEFAULT_STEP) -> list:
    """Record the exponential flow: one (t_k, y_k, F_k) tuple per RK4 step.

    The partition matches exp_section's, so the final record equals the jet
    it returns.
    """
    if step > MAX_STEP:
        raise StepTooLarge(f"step {step:g} > {MAX_STEP:g}")
    x = as_point(x)
    y, F = x.copy(), np.eye(3)
    records = [(0.0, y.copy(), F.copy())]
    if t == 0.0:
        return records
    n = max(1, math.ceil(abs(t) / step))
    dt = t / n
    for k in range(1, n + 1):
        y, F = _rk4_step(section, y, F, dt)
        records.append((k * dt, y.copy(), F.copy()))
    return records


def one_parameter_check(section: SectionField, t: float, u: float, x,
                        step: float = DEFAULT_STEP) -> float:
    """Defect of Exp_{t+u}(x) against Exp_t(flow_u(x)) composed with Exp_u(x).

    Returns the max-abs discrepancy over the target point and the matrix part.
    """
    whole = exp_section(section, t + u, x, step)
    first = exp_section(section, u, x, step)
    second = exp_section(section, t, first.target, step)
    # matrix of the bisection product; sources agree by construction
    prod_matrix = second.matrix @ first.matrix
    return max(
        float(np.max(np.abs(whole.target - second.target))),
        float(np.max(np.abs(whole.matrix - prod_matrix))),
    )


def derivation_matrix(section: SectionField, x, h: float = DEFAULT_PULLBACK_H,
                      step: float = DEFAULT_STEP) -> tuple:
    """Derivation induced by the section, by central differencing the pullback.

    Returns (M, b) with M the matrix of the derivation on the coordinate frame
    (approximately -A(x)) and b the base vector field (approximately v(x)).
    """
    if h > MAX_PULLBACK_H:
        raise StepTooLarge(f"pullback step {h:g} > {MAX_PULLBACK_H:g}")
    x = as_point(x)
    z_minus = flow_point(section, -h, x, step)
    z_plus = flow_point(section, +h, x, step)
    # pullback of the coordinate frame at x under Exp_t is the matrix of the
    # jet based at the backward-flowed point
    m_fwd = exp_section(section, +h, z_minus, step).matrix
    m_bwd = exp_section(section, -h, z_plus, step).matrix
    M = -(m_fwd - m_bwd) / (2 * h)
    b = (z_plus - z_minus) / (2 * h)
    return M, b
