"""Config-driven analysis pipeline and report serialization.

run_analysis computes, per grid point, the material-algebroid fiber with its
singular-value audit, then the uniformity verdict, and -- when uniform -- the
minimal-lift connection, its curvature/torsion, and the homogeneity verdict.
Structured reports are canonical JSON (sorted keys, native floats) and are
byte-identical across runs with the same config; wall-clock timings therefore
appear only in the text rendering.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jets
from .algebroid import anchor_rank, fiber, isotropy_algebra, uniformity_verdict
from .bodies import (
    Body,
    builtin_body,
    make_samples,
    membership_defect,
    membership_tol,
    polynomial_body,
)
from .connection import (
    build_homogeneous_chart,
    chart_christoffels,
    christoffels,
    curvature_torsion,
    homogeneity_verdict,
    minimal_lift_section,
)
from .errors import ConfigError, MatbodyError
from .flows import SectionField, exp_trajectory
from .grid import make_grid

SCHEMA_NAME = "matbody.report.v1"

# Gap threshold below which the rank decision at a point is flagged ambiguous.
RANK_GAP_FLOOR = 10.0

_DEFAULTS = {
    "grid": {"resolution": [5, 5, 5], "margin": 0.1},
    "samples": {"count": 24, "seed": 20240},
    "tolerances": {
        "rank_tol": 1e-6,
        "v_tol": 1e-8,
        "flat_tol": 1e-4,
        "fd_step": 1e-5,
        "membership_tol": None,
    },
    "flags": {
        "emit_singular_values": False,
        "emit_chart": False,
        "emit_trajectories": False,
    },
}


@dataclass(frozen=True)
class AnalysisConfig:
    body_kind: Optional[str] = "homogeneous_isotropic"
    body_polynomial: Optional[dict] = None
    resolution: tuple = (5, 5, 5)
    margin: float = 0.1
    sample_count: int = 24
    seed: int = 20240
    rank_tol: float = 1e-6
    v_tol: float = 1e-8
    flat_tol: float = 1e-4
    fd_step: float = 1e-5
    membership_tol: Optional[float] = None
    emit_singular_values: bool = False
    emit_chart: bool = False
    emit_trajectories: bool = False

    def validate(self) -> "AnalysisConfig":
        if (self.body_kind is None) == (self.body_polynomial is None):
            raise ConfigError("config must select exactly one of builtin body or polynomial")
        if len(self.resolution) != 3 or any(int(r) < 3 for r in self.resolution):
            raise ConfigError(f"grid resolution must be 3 ints >= 3, got {self.resolution}")
        if self.sample_count < 12:
            raise ConfigError(f"sample count must be >= 12, got {self.sample_count}")
        for name in ("rank_tol", "v_tol", "flat_tol", "fd_step", "margin"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.membership_tol is not None and self.membership_tol <= 0:
            raise ConfigError("membership_tol must be > 0 when given")
        if self.margin <= self.fd_step:
            raise ConfigError("grid margin must exceed fd_step so stencils stay in the box")
        return self

    @staticmethod
    def from_dict(raw: dict) -> "AnalysisConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config document must be a JSON object")
        known = {"body", "grid", "samples", "tolerances", "flags"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")

        def section(name):
            merged = dict(_DEFAULTS[name])
            user = raw.get(name, {})
            if not isinstance(user, dict):
                raise ConfigError(f"config section '{name}' must be an object")
            bad = set(user) - set(merged)
            if bad:
                raise ConfigError(f"unknown keys in '{name}': {sorted(bad)}")
            merged.update(user)
            return merged

        body = raw.get("body", "homogeneous_isotropic")
        body_kind, body_poly = None, None
        if isinstance(body, str):
            body_kind = body
        elif isinstance(body, dict) and "builtin" in body:
            body_kind = body["builtin"]
        elif isinstance(body, dict) and "polynomial" in body:
            body_poly = body["polynomial"]
        else:
            raise ConfigError("body must be a builtin name or {'polynomial': {...}}")

        g, s, t, f = section("grid"), section("samples"), section("tolerances"), section("flags")
        try:
            cfg = AnalysisConfig(
                body_kind=body_kind,
                body_polynomial=body_poly,
                resolution=tuple(int(r) for r in g["resolution"]),
                margin=float(g["margin"]),
                sample_count=int(s["count"]),
                seed=int(s["seed"]),
                rank_tol=float(t["rank_tol"]),
                v_tol=float(t["v_tol"]),
                flat_tol=float(t["flat_tol"]),
                fd_step=float(t["fd_step"]),
                membership_tol=None if t["membership_tol"] is None
                else float(t["membership_tol"]),
                emit_singular_values=bool(f["emit_singular_values"]),
                emit_chart=bool(f["emit_chart"]),
                emit_trajectories=bool(f["emit_trajectories"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}")
        return cfg.validate()

    def echo(self) -> dict:
        """Full configuration echo, including the package-level constants."""
        return {
            "body": self.body_kind if self.body_kind else {"polynomial": self.body_polynomial},
            "grid": {"resolution": list(self.resolution), "margin": self.margin},
            "samples": {"count": self.sample_count, "seed": self.seed},
            "tolerances": {
                "rank_tol": self.rank_tol,
                "v_tol": self.v_tol,
                "flat_tol": self.flat_tol,
                "fd_step": self.fd_step,
                "membership_tol": self.membership_tol,
            },
            "flags": {
                "emit_singular_values": self.emit_singular_values,
                "emit_chart": self.emit_chart,
                "emit_trajectories": self.emit_trajectories,
            },
            "constants": {
                "point_tol": jets.POINT_TOL,
                "det_tol": jets.DET_TOL,
                "rank_gap_floor": RANK_GAP_FLOOR,
            },
        }


def resolve_body(cfg: AnalysisConfig) -> Body:
    if cfg.body_kind is not None:
        return builtin_body(cfg.body_kind)
    poly = cfg.body_polynomial
    if not isinstance(poly, dict) or "terms" not in poly:
        raise ConfigError("polynomial body needs a 'terms' list")
    return polynomial_body(
        poly["terms"], poly.get("lo"), poly.get("hi"), poly.get("name", "polynomial")
    )


@dataclass
class AnalysisReport:
    config: AnalysisConfig
    body_name: str
    grid_shape: tuple
    point_records: list
    uniformity: str
    offending_points: list
    homogeneity: str
    homogeneity_reason: str
    max_abs_gamma: Optional[float]
    lift_residual_max: Optional[float]
    max_abs_R: Optional[float]
    max_abs_T: Optional[float]
    interior_max_abs_R: Optional[float]
    interior_max_abs_T: Optional[float]
    rank_ambiguous_points: list
    fiber_dim_levels: list
    membership_tol_used: Optional[float]
    exp_membership_defect: Optional[float]
    chart: Optional[dict]
    trajectory: Optional[list] = None
    timings: dict = field(default_factory=dict)

    def to_canonical_dict(self) -> dict:
        """Deterministic payload: everything except wall-clock timings."""
        return {
            "schema": SCHEMA_NAME,
            "config": self.config.echo(),
            "body": self.body_name,
            "grid_shape": list(self.grid_shape),
            "points": self.point_records,
            "uniformity": {
                "verdict": self.uniformity,
                "offending_points": self.offending_points,
            },
            "connection": {
                "max_abs_gamma": self.max_abs_gamma,
                "lift_residual_max": self.lift_residual_max,
            },
            "flatness": {
                "max_abs_R": self.max_abs_R,
                "max_abs_T": self.max_abs_T,
                "interior_max_abs_R": self.interior_max_abs_R,
                "interior_max_abs_T": self.interior_max_abs_T,
            },
            "homogeneity": {
                "verdict": self.homogeneity,
                "reason": self.homogeneity_reason,
            },
            "diagnostics": {
                "rank_ambiguous_points": self.rank_ambiguous_points,
                "fiber_dim_levels": self.fiber_dim_levels,
                "membership_tol": self.membership_tol_used,
                "exp_membership_defect": self.exp_membership_defect,
            },
            "chart": self.chart,
            "trajectory": self.trajectory,
        }


def _native(obj):
    """Recursively convert numpy scalars/arrays so json emits native types."""
    if isinstance(obj, dict):
        return {k: _native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _native(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not np.isfinite(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def run_analysis(cfg: AnalysisConfig) -> AnalysisReport:
    """Full uniformity/homogeneity pipeline; deterministic for a fixed config."""
    cfg.validate()
    body = resolve_body(cfg)
    timings = {}

    t0 = time.perf_counter()
    grid = make_grid(body.lo, body.hi, cfg.resolution, cfg.margin)
    samples = make_samples(cfg.sample_count, cfg.seed)
    fibers = []
    for x in grid.points:
        try:
            fibers.append(fiber(body, x, samples, cfg.rank_tol, cfg.fd_step))
        except MatbodyError as exc:
            raise type(exc)(f"at grid point {x.tolist()}: {exc}") from exc
    timings["fibers_s"] = time.perf_counter() - t0

    records, ambiguous = [], []
    for p, f in enumerate(fibers):
        idx = [int(i) for i in grid.index_of(p)]
        gap = f.sv_gap()
        rec = {
            "index": idx,
            "x": grid.points[p].tolist(),
            "fiber_dim": f.dim,
            "isotropy_dim": isotropy_algebra(f, cfg.v_tol).dim,
            "anchor_rank": anchor_rank(f, cfg.v_tol),
            "sv_gap": gap,
        }
        if cfg.emit_singular_values:
            rec["singular_values"] = f.singular_values.tolist()
        records.append(rec)
        if gap < RANK_GAP_FLOOR:
            ambiguous.append(idx)

    uni = uniformity_verdict(fibers, cfg.v_tol)
    offending = sorted(list(grid.index_of(p)) for p in uni.offending)
    offending = [[int(i) for i in idx] for idx in offending]
    dim_levels = sorted({f.dim for f in fibers})

    max_gamma = lift_res = None
    maxR = maxT = intR = intT = None
    exp_defect = None
    trajectory = None
    mem_tol = cfg.membership_tol
    chart_payload = None
    verdict, reason = "n/a", "body is not uniform; no material connection exists"

    if uni.uniform:
        t0 = time.perf_counter()
        section = minimal_lift_section(grid, fibers, cfg.v_tol)
        conn = christoffels(section)
        report = curvature_torsion(conn)
        hom = homogeneity_verdict(body, fibers, section, report, cfg.flat_tol, cfg.v_tol)
        timings["connection_s"] = time.perf_counter() - t0
        verdict, reason = hom.verdict, hom.reason
        max_gamma = conn.max_abs()
        lift_res = float(np.max(section.residuals))
        maxR, maxT = report.max_abs_R, report.max_abs_T
        intR, intT = report.interior_max_abs_R, report.interior_max_abs_T

        t0 = time.perf_counter()
        center = grid.points[grid.n_points // 2]
        if mem_tol is None:
            mem_tol = membership_tol(body, samples, [center])
        exp_defect, trajectory = _exponential_cross_check(
            body, grid, section, samples, keep_records=cfg.emit_trajectories
        )
        timings["cross_check_s"] = time.perf_counter() - t0

        if cfg.emit_chart and verdict == "homogeneous_evidence":
            t0 = time.perf_counter()
            chart = build_homogeneous_chart(conn, grid.points[grid.n_points // 2],
                                            cfg.flat_tol)
            _, interior_max, full_max = chart_christoffels(conn, chart)
            chart_payload = {
                "x0": chart.x0.tolist(),
                "coords": chart.coords.tolist(),
                "frames": chart.frames.tolist(),
                "gamma_prime_interior_max": interior_max,
                "gamma_prime_max": full_max,
            }
            timings["chart_s"] = time.perf_counter() - t0

    return AnalysisReport(
        config=cfg,
        body_name=body.name,
        grid_shape=grid.shape,
        point_records=_native(records),
        uniformity=uni.verdict,
        offending_points=offending,
        homogeneity=verdict,
        homogeneity_reason=reason,
        max_abs_gamma=_native(max_gamma),
        lift_residual_max=_native(lift_res),
        max_abs_R=_native(maxR),
        max_abs_T=_native(maxT),
        interior_max_abs_R=_native(intR),
        interior_max_abs_T=_native(intT),
        rank_ambiguous_points=ambiguous,
        fiber_dim_levels=[int(d) for d in dim_levels],
        membership_tol_used=_native(mem_tol),
        exp_membership_defect=_native(exp_defect),
        chart=_native(chart_payload),
        trajectory=_native(trajectory),
        timings=timings,
    )


def _exponential_cross_check(body: Body, grid, section, samples,
                             t: float = 0.1, keep_records: bool = False) -> tuple:
    """Membership defect of the exponentiated lift in direction e1 at the center.

    Links the infinitesimal fiber computation back to the finite membership
    test along the flow; reported as a diagnostic, never gated.  Optionally
    returns the per-step trajectory records for the report.
    """
    a_data = grid.reshape(section.lam[:, 0, :, :])
    v_data = np.broadcast_to(np.array([1.0, 0.0, 0.0]), (grid.n_points, 3))
    s = SectionField.from_grid(grid.axes, grid.reshape(np.array(v_data)), a_data)
    center = grid.points[grid.n_points // 2]
    records = exp_trajectory(s, t, center)
    t_end, y_end, f_end = records[-1]
    defect = membership_defect(body, jets.Jet1(center, y_end, f_end), samples)
    payload = None
    if keep_records:
        payload = [{"t": tk, "y": yk.tolist(), "F": fk.tolist()}
                   for tk, yk, fk in records]
    return defect, payload


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def emit_report(report: AnalysisReport, format: str = "structured") -> bytes:
    """Render a report: canonical JSON ('structured') or human tables ('text')."""
    if format == "structured":
        doc = _native(report.to_canonical_dict())
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")
    if format == "text":
        return _text_report(report).encode("utf-8")
    raise ConfigError(f"unknown report format '{format}'")


def parse_report(data: bytes) -> dict:
    """Parse a structured report; the inverse of emit_report('structured')."""
    doc = json.loads(data.decode("utf-8"))
    if doc.get("schema") != SCHEMA_NAME:
        raise ConfigError(f"not a {SCHEMA_NAME} document")
    return doc


def _text_report(r: AnalysisReport) -> str:
    nx, ny, nz = r.grid_shape
    recs = {tuple(rec["index"]): rec for rec in r.point_records}
    lines = []
    lines.append(f"matbody analysis: body = {r.body_name}")
    lines.append(f"grid {nx}x{ny}x{nz}; cells show fiber dim / isotropy dim / anchor rank")
    for ix in range(nx):
        lines.append(f"-- slice ix={ix} (rows iy, cols iz) " + "-" * 28)
        for iy in range(ny):
            cells = []
            for iz in range(nz):
                rec = recs[(ix, iy, iz)]
                cells.append(f"{rec['fiber_dim']}/{rec['isotropy_dim']}/{rec['anchor_rank']}")
            lines.append("  " + "  ".join(f"{c:>7}" for c in cells))
    lines.append("")
    lines.append(f"uniformity verdict : {r.uniformity}")
    if r.offending_points:
        lines.append("offending grid points (anchor rank < 3), lexicographic:")
        for idx in sorted(r.offending_points):
            rec = recs[tuple(idx)]
            lines.append(f"  index {idx}  x = {rec['x']}  anchor_rank = {rec['anchor_rank']}")
    if r.max_abs_gamma is not None:
        lines.append(f"connection         : max|Gamma| = {r.max_abs_gamma:.6e}, "
                     f"lift residual max = {r.lift_residual_max:.3e}")
        lines.append(f"flatness           : max|R| = {r.max_abs_R:.6e}, "
                     f"max|T| = {r.max_abs_T:.6e}")
    lines.append(f"homogeneity verdict: {r.homogeneity}")
    lines.append(f"  reason: {r.homogeneity_reason}")
    if r.rank_ambiguous_points:
        lines.append(f"rank-ambiguous points (sv gap < {RANK_GAP_FLOOR:g}x): "
                     f"{sorted(r.rank_ambiguous_points)}")
    if r.exp_membership_defect is not None:
        lines.append(f"exponential cross-check: membership defect {r.exp_membership_defect:.3e} "
                     f"(tol {r.membership_tol_used:.3e})")
    if r.chart is not None:
        lines.append(f"chart: recomputed interior max|Gamma'| = "
                     f"{r.chart['gamma_prime_interior_max']:.3e}")
    if r.timings:
        stamps = ", ".join(f"{k} = {v:.3f}" for k, v in sorted(r.timings.items()))
        lines.append(f"timings (s): {stamps}")
    return "\n".join(lines) + "\n"
