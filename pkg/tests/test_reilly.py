import numpy as np
import pytest

from shrinkerlab import domain as dm
from shrinkerlab import reilly as rl
from shrinkerlab import solver as sv
from shrinkerlab.errors import MissingGeometryError, ParameterError
from shrinkerlab.fields import ScalarField

# independent quadrature oracles for u = x1 on the unit ball of R^3
VOLUME_SIDE = 2.540629686306907
RICCI_TERM = 3.130204156281716
LAP_SQ_TERM = 0.5895744699748094
BOUNDARY_A_TERM = -5.081259372613813
BOUNDARY_MIXED = 5.081259372613813
BOUNDARY_LAP = 2.5406296863069064

U_X1 = ScalarField(lambda x: x[0], batch_evaluator=lambda P: P[:, 0])


@pytest.fixture(scope="module")
def unit_ball():
    return dm.ball_domain(1.0, ambient_dim=3)


@pytest.mark.parametrize("R", [1.0, 2.0, 5.0, 10.0])
def test_cutoff_invariants(R):
    phi = rl.CutoffFamily(R)
    assert phi.validate()
    assert phi.max_gradient() <= 2.0 / R + 1e-8
    assert phi.max_gradient() == pytest.approx(15.0 / (8.0 * R), rel=1e-6)
    assert phi.profile(0.5 * R) == 1.0
    assert phi.profile(2.5 * R) == 0.0


def test_linear_field_identity(unit_ball):
    rep = rl.reilly_residual(U_X1, None, unit_ball, mesh_h=1 / 32)
    assert rep.residual <= 1e-3
    assert rep.volume_side == pytest.approx(VOLUME_SIDE, abs=1e-4)
    assert rep.boundary_side == pytest.approx(VOLUME_SIDE, abs=1e-6)


def test_term_breakdown_against_oracles(unit_ball):
    rep = rl.reilly_residual(U_X1, None, unit_ball, mesh_h=1 / 32)
    tb = rep.term_breakdown
    assert tb["volume_hess_sq"] == pytest.approx(0.0, abs=1e-9)
    assert tb["volume_transport"] == 0.0
    assert tb["volume_ricci"] == pytest.approx(RICCI_TERM, abs=1e-3)
    assert tb["volume_lap_f_sq"] == pytest.approx(LAP_SQ_TERM, abs=1e-3)
    assert tb["boundary_second_fundamental"] == pytest.approx(BOUNDARY_A_TERM, abs=1e-3)
    assert tb["boundary_mixed"] == pytest.approx(BOUNDARY_MIXED, abs=1e-3)
    assert tb["boundary_surface_laplacian"] == pytest.approx(BOUNDARY_LAP, abs=1e-3)


def test_constant_field_everything_zero(unit_ball):
    const = ScalarField(lambda x: 0.7,
                        batch_evaluator=lambda P: np.full(P.shape[0], 0.7))
    rep = rl.reilly_residual(const, None, unit_ball, mesh_h=1 / 16)
    assert rep.residual == pytest.approx(0.0, abs=1e-12)
    assert all(abs(v) <= 1e-12 for v in rep.term_breakdown.values())


def test_cutoff_activates_transport(unit_ball):
    rep = rl.reilly_residual(U_X1, rl.CutoffFamily(0.5), unit_ball, mesh_h=1 / 32)
    assert abs(rep.term_breakdown["volume_transport"]) > 0.1
    assert rep.residual <= 1e-3


def test_mesh_refinement_order(unit_ball):
    r16 = rl.reilly_residual(U_X1, None, unit_ball, mesh_h=1 / 16).residual
    r32 = rl.reilly_residual(U_X1, None, unit_ball, mesh_h=1 / 32).residual
    assert r32 <= 0.5 * r16  # at least first order


def test_level_set_boundary_lacks_curvature():
    level = dm.DomainSpec(
        dm.OrientedBoundary(dm.LevelSetBoundary(lambda x: 1.0 - float(np.dot(x, x))),
                            side=+1),
        None, exhaustion_radius=2.0, ambient_dim=3)
    with pytest.raises(MissingGeometryError, match="curvature"):
        rl.reilly_residual(U_X1, None, level, mesh_h=1 / 8)


def test_f_minimal_pieces_have_zero_weighted_curvature():
    # sphere of radius sqrt(2) in R^3 and a plane through the origin
    ball = dm.ball_domain(np.sqrt(2.0), ambient_dim=3)
    pts, _ = ball.sigma1.quad_nodes(3, 3.0, per_dim=16)
    worst = max(abs(ball.sigma1.weighted_mean_curvature(p)) for p in pts)
    assert worst <= 1e-8
    slab = dm.slab_domain(0.0, 1.0, ambient_dim=2, radius=3.0)
    pts, _ = slab.sigma1.quad_nodes(2, 3.0, per_dim=16)
    worst = max(abs(slab.sigma1.weighted_mean_curvature(p)) for p in pts)
    assert worst <= 1e-8


@pytest.fixture(scope="module")
def off_origin():
    dom = dm.slab_domain(-1, 1, ambient_dim=2, radius=8.0)
    sol = sv.solve_mixed_bvp(dom, h=1 / 32, tol=1e-11)
    return dom, sol


class TestChain:
    def test_failure_with_attribution(self, off_origin):
        dom, sol = off_origin
        rep = rl.energy_growth_chain(sol, dom, [1.0, 2.0, 4.0])
        holds = {r: h for r, _, _, h, _ in rep.per_R}
        assert holds[1.0] and holds[2.0] and not holds[4.0]
        assert not rep.consistent
        assert all(abs(v) > 1e-6 for v in rep.boundary_terms.values())
        assert not rep.f_minimal["sigma1"] and not rep.f_minimal["sigma2"]

    def test_truncation_flag(self, off_origin):
        dom, sol = off_origin
        rep = rl.energy_growth_chain(sol, dom, [6.0])
        assert rep.per_R[0][4]  # 2R = 12 > solved radius 8

    def test_half_minimal_slab(self):
        dom = dm.slab_domain(0.0, 1.0, ambient_dim=2, radius=8.0)
        sol = sv.solve_mixed_bvp(dom, h=1 / 32, tol=1e-11)
        rep = rl.energy_growth_chain(sol, dom, [1.0, 2.0])
        assert abs(rep.boundary_terms["sigma1"]) < 1e-6
        assert rep.boundary_terms["sigma2"] > 1.0
        assert rep.f_minimal["sigma1"] and not rep.f_minimal["sigma2"]

    def test_constant_solution_trivially_consistent(self, annulus_dom):
        sol = sv.solve_mixed_bvp(annulus_dom, h=1 / 16, tol=1e-11,
                                 boundary_values=(1.0, 1.0))
        rep = rl.energy_growth_chain(sol, annulus_dom, [1.0, 1.2])
        assert rep.consistent
        assert all(l == 0.0 for _, l, _, _, _ in rep.per_R)


def test_box_fraction_basics():
    # half cell, full cell, empty cell, and an oblique case checked by
    # dense subsampling
    f = rl._box_fraction(np.array([0.0, 1.0, -1.0]),
                         np.array([[1.0, 0], [1, 0], [1, 0]]), 1.0)
    np.testing.assert_allclose(f, [0.5, 1.0, 0.0])
    normal = np.array([[0.6, 0.8]])
    depth = np.array([0.21])
    f = rl._box_fraction(depth, normal, 1.0)
    xs = np.linspace(-0.5, 0.5, 201)
    X, Y = np.meshgrid(xs, xs)
    exact = np.mean(depth[0] + 0.6 * X + 0.8 * Y >= 0)
    assert f[0] == pytest.approx(exact, abs=2e-3)


def test_chain_needs_grid(annulus_dom, radial_profile):
    with pytest.raises(ParameterError):
        rl.energy_growth_chain(radial_profile, annulus_dom, [1.0])
