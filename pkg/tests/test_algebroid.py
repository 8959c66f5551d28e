"""Material algebroid fibers against the analytic-gradient oracle.

Expected dimensions were computed with the oracle before the production path
existed and are frozen here:

    homogeneous_isotropic : fiber 6, isotropy 3, anchor rank 3
    uniform_fgm (both)    : fiber 3, isotropy 0, anchor rank 3
    nonuniform            : anchor rank 2 (< 3) at every probed point
"""

import numpy as np
import pytest

from matbody import (
    AlgebroidElement,
    OutOfDomain,
    SectionField,
    constraint_rows,
    exp_section,
    fiber,
    is_material_isomorphism,
    isotropy_algebra,
    make_samples,
    uniformity_verdict,
)
from matbody.algebroid import FiberBasis, anchor_rank, stack_constraints
from oracles import (
    E12,
    I3,
    analytic_rows_fgm,
    analytic_rows_isotropic,
    analytic_rows_nonuniform,
    anchor_rank_of,
    kernel_of,
)

RANK_TOL = 1e-6


def probe_points(rng, n=3):
    return [rng.uniform(-0.7, 0.7, 3) for _ in range(n)]


# ---------------------------------------------------------------------------
# constraint rows
# ---------------------------------------------------------------------------

def test_rows_match_analytic_oracle(iso_body, fgm_body, nonuniform_body, samples, rng):
    x = np.array([0.3, -0.2, 0.1])
    Fs = samples.matrices[:8]
    pairs = [
        (iso_body, analytic_rows_isotropic(Fs)),
        (fgm_body, analytic_rows_fgm(Fs, x, E12)),
        (nonuniform_body, analytic_rows_nonuniform(Fs, x)),
    ]
    for body, expected in pairs:
        got = np.vstack([constraint_rows(body, x, F) for F in Fs])
        assert np.max(np.abs(got - expected)) <= 1e-7


def test_isotropic_v_columns_vanish(iso_body, samples, rng):
    """x-independent response: the anchor block of every row is exactly zero."""
    for F in samples.matrices[:6]:
        rows = constraint_rows(iso_body, rng.uniform(-0.5, 0.5, 3), F)
        assert np.max(np.abs(rows[:, :3])) <= 1e-9


def test_isotropic_skew_annihilated_at_identity(iso_body, rng):
    """dW/dF(I) = 0 analytically, so rows at F = I kill every (0, skew)."""
    rows = constraint_rows(iso_body, rng.uniform(-0.5, 0.5, 3), np.eye(3))
    for _ in range(10):
        S = rng.uniform(-1, 1, (3, 3))
        A = S - S.T
        u = np.concatenate([np.zeros(3), A.ravel()])
        assert np.max(np.abs(rows @ u)) <= 1e-8


def test_fgm_fiber_element_annihilated(fgm_body, samples, rng):
    """(v, (d_v K) K^-1) satisfies the chain-rule identity row by row."""
    x = np.array([0.4, 0.1, -0.3])
    K = I3 + x[0] * E12
    for _ in range(5):
        v = rng.uniform(-1, 1, 3)
        A = (v[0] * E12) @ np.linalg.inv(K)
        u = np.concatenate([v, A.ravel()])
        for F in samples.matrices[:10]:
            rows = constraint_rows(fgm_body, x, F)
            assert np.max(np.abs(rows @ u)) <= 1e-6


def test_rows_stencil_domain_check(iso_body):
    with pytest.raises(OutOfDomain):
        constraint_rows(iso_body, [1.0, 0, 0], np.eye(3))  # on the boundary


# ---------------------------------------------------------------------------
# fibers and dimensions
# ---------------------------------------------------------------------------

def test_fiber_dims_match_oracle(iso_body, fgm_body, nonuniform_body, samples, rng):
    for x in probe_points(rng):
        f_iso = fiber(iso_body, x, samples, RANK_TOL)
        dim, null_rows, _ = kernel_of(analytic_rows_isotropic(samples.matrices))
        assert (f_iso.dim, dim) == (6, 6)
        assert isotropy_algebra(f_iso).dim == 3
        assert anchor_rank(f_iso) == 3

        f_fgm = fiber(fgm_body, x, samples, RANK_TOL)
        dim, null_rows, _ = kernel_of(analytic_rows_fgm(samples.matrices, x, E12))
        assert (f_fgm.dim, dim) == (3, 3)
        assert isotropy_algebra(f_fgm).dim == 0
        assert anchor_rank(f_fgm) == 3

        f_non = fiber(nonuniform_body, x, samples, RANK_TOL)
        _, null_rows, _ = kernel_of(analytic_rows_nonuniform(samples.matrices, x))
        assert anchor_rank(f_non) < 3
        assert anchor_rank_of(null_rows) < 3


def test_fiber_basis_orthonormal_and_in_kernel(iso_body, samples, rng):
    x = np.array([0.2, 0.2, 0.2])
    f = fiber(iso_body, x, samples, RANK_TOL)
    B = f.basis_matrix()
    assert np.max(np.abs(B @ B.T - np.eye(f.dim))) <= 1e-10
    L = stack_constraints(iso_body, x, samples)
    sigma_max = np.linalg.svd(L, compute_uv=False)[0]
    for u in B:
        assert np.linalg.norm(L @ u) <= RANK_TOL * sigma_max


def test_fiber_residual_on_fresh_samples(iso_body, fgm_body, samples):
    """Basis elements stay near-null for an independently seeded sample set."""
    fresh = make_samples(24, seed=777)
    x = np.array([-0.3, 0.5, 0.0])
    for body in (iso_body, fgm_body):
        f = fiber(body, x, samples, RANK_TOL)
        L = stack_constraints(body, x, fresh)
        sigma_max = np.linalg.svd(L, compute_uv=False)[0]
        for u in f.basis_matrix():
            assert np.linalg.norm(L @ u) <= 10 * RANK_TOL * sigma_max


def test_isotropy_elements_are_skew(iso_body, samples):
    f = fiber(iso_body, np.zeros(3), samples, RANK_TOL)
    iso = isotropy_algebra(f)
    assert iso.dim == 3
    for e in iso.basis:
        assert np.max(np.abs(e.v)) <= 1e-10
        assert np.max(np.abs(e.A + e.A.T)) <= 1e-8


def test_empty_fiber_isotropy():
    f = FiberBasis(np.zeros(3), (), 0, np.ones(12))
    assert isotropy_algebra(f).dim == 0
    assert anchor_rank(f) == 0


def test_dim_stable_under_sample_doubling(iso_body, fgm_body, fgm_integrable_body,
                                          nonuniform_body, rng):
    x = np.array([0.35, -0.15, 0.25])
    for body, expected in ((iso_body, 6), (fgm_body, 3), (fgm_integrable_body, 3)):
        dims = {fiber(body, x, make_samples(n, seed=5000 + n), RANK_TOL).dim
                for n in (24, 48)}
        assert dims == {expected}
    ranks = {anchor_rank(fiber(nonuniform_body, x, make_samples(n, seed=6000 + n),
                               RANK_TOL)) for n in (24, 48)}
    assert ranks == {2}


def test_sv_gap_is_clean_on_builtins(iso_body, fgm_body, samples):
    for body in (iso_body, fgm_body):
        f = fiber(body, np.array([0.1, 0.4, -0.2]), samples, RANK_TOL)
        assert f.sv_gap() > 1e6


# ---------------------------------------------------------------------------
# uniformity verdict
# ---------------------------------------------------------------------------

def test_uniformity_verdicts(iso_body, fgm_body, nonuniform_body, samples, rng):
    pts = probe_points(rng, 4)
    for body, expect in ((iso_body, "uniform"), (fgm_body, "uniform"),
                         (nonuniform_body, "not_uniform")):
        fibers = [fiber(body, x, samples, RANK_TOL) for x in pts]
        res = uniformity_verdict(fibers)
        assert res.verdict == expect
        if expect == "uniform":
            assert res.offending == ()
            assert all(r == 3 for r in res.anchor_ranks)
        else:
            assert len(res.offending) == len(pts)


# ---------------------------------------------------------------------------
# exponentiation consistency: fibers exponentiate into the groupoid
# ---------------------------------------------------------------------------

def test_fiber_elements_exponentiate_to_isomorphisms(iso_body, samples):
    x = np.array([0.0, 0.1, -0.1])
    f = fiber(iso_body, x, samples, RANK_TOL)
    for e in f.basis:
        s = SectionField.constant(e.v, e.A, iso_body.lo, iso_body.hi)
        g = exp_section(s, 0.1, x)
        assert is_material_isomorphism(iso_body, g, samples, 1e-5)


def test_algebroid_element_vector_round_trip(rng):
    u = rng.uniform(-1, 1, 12)
    e = AlgebroidElement.from_vector(u)
    assert np.array_equal(e.to_vector(), u)
