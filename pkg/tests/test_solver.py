import math

import numpy as np
import pytest

from shrinkerlab import domain as dm
from shrinkerlab import solver as sv
from shrinkerlab.errors import (ParameterError, SingularSystemError)

# frozen from an independent Gauss-Kronrod quadrature of the closed forms
RADIAL_U_AT_1 = 0.28880994490040635
SLAB02_U_AT_1 = 0.2526921048336703


class TestClosedForms:
    def test_radial_endpoints_and_monotonicity(self):
        sol = sv.solve_radial(0.5, 2, 2)
        prof = sol.profile
        assert prof.value(0.5) == 0.0
        assert prof.value(2.0) == 1.0
        rs = np.linspace(0.5, 2.0, 17)
        vals = [prof.value(r) for r in rs]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_radial_regression_value(self):
        sol = sv.solve_radial(0.5, 2, 2)
        assert sol.profile.value(1.0) == pytest.approx(RADIAL_U_AT_1, abs=1e-10)

    def test_radial_parameter_errors(self):
        with pytest.raises(ParameterError):
            sv.solve_radial(1.0, 1.0, 2)
        with pytest.raises(ParameterError):
            sv.solve_radial(0.0, 1.0, 2)
        with pytest.raises(ParameterError):
            sv.solve_radial(-0.5, 1.0, 2)

    def test_slab_symmetry_and_regression(self):
        assert sv.solve_slab(-1, 1).profile.value(0.0) == pytest.approx(0.5, abs=1e-12)
        sol = sv.solve_slab(-1, 1)
        assert sol.profile.value(-1.0) == 0.0
        assert sol.profile.value(1.0) == 1.0
        assert sv.solve_slab(0, 2).profile.value(1.0) == pytest.approx(
            SLAB02_U_AT_1, abs=1e-10)

    def test_slab_depends_only_on_height(self):
        prof = sv.solve_slab(-1, 1).profile
        assert prof(np.array([3.7, 0.25])) == prof(np.array([-1.2, 0.25]))


class TestMixedBvp:
    def test_slab_second_order(self, slab_dom, slab_profile):
        errors = {}
        for h in (1 / 8, 1 / 16):
            sol = sv.solve_mixed_bvp(slab_dom, h=h, tol=1e-11)
            errors[h] = sv.max_node_error(sol, slab_profile.profile, within_radius=2.0)
        constants = {h: e / h ** 2 for h, e in errors.items()}
        cs = list(constants.values())
        assert max(cs) / min(cs) < 2.5, f"C = err/h^2 not stable: {constants}"

    def test_annulus_against_radial_oracle(self, annulus_dom, radial_profile):
        errs = []
        for h in (1 / 16, 1 / 32):
            sol = sv.solve_mixed_bvp(annulus_dom, h=h, tol=1e-11)
            errs.append(sv.max_node_error(sol, radial_profile.profile))
        assert errs[1] < 5e-4
        assert math.log2(errs[0] / errs[1]) > 1.4

    def test_constant_boundary_data(self, annulus_dom):
        sol = sv.solve_mixed_bvp(annulus_dom, h=1 / 16, tol=1e-11,
                                 boundary_values=(1.0, 1.0))
        vals = sol.field.values
        assert np.nanmin(vals) == pytest.approx(1.0, abs=1e-9)
        assert np.nanmax(vals) == pytest.approx(1.0, abs=1e-9)

    def test_maximum_principle(self, slab_grid_solution, annulus_grid_solution):
        for sol in (slab_grid_solution, annulus_grid_solution):
            assert np.nanmin(sol.field.values) >= 0.0
            assert np.nanmax(sol.field.values) <= 1.0

    def test_two_initial_guesses_agree(self, annulus_dom):
        tol = 1e-11
        a = sv.solve_mixed_bvp(annulus_dom, h=1 / 16, tol=tol, initial_guess=0.0)
        b = sv.solve_mixed_bvp(annulus_dom, h=1 / 16, tol=tol, initial_guess=1.0)
        gap = np.nanmax(np.abs(a.field.values - b.field.values))
        assert gap <= 10 * tol

    def test_pure_neumann_is_singular(self):
        far_ball = dm.DomainSpec(
            dm.OrientedBoundary(dm.SphereBoundary(5.0), side=-1), None,
            exhaustion_radius=2.0, ambient_dim=2, kind="ball", params={"rho": 5.0})
        with pytest.raises(SingularSystemError, match="constant"):
            sv.solve_mixed_bvp(far_ball, h=1 / 8)

    def test_grid_invariant_and_classification(self, annulus_dom):
        grid = sv.Grid(annulus_dom, h=1 / 16)
        assert grid.check_stencil_invariant()
        assert grid.node_count(sv.INTERIOR) > 0
        assert grid.node_count(sv.DIRICHLET0) > 0
        assert grid.node_count(sv.DIRICHLET1) > 0

    def test_boundary_separation_guard(self):
        squeezed = dm.annulus_domain(0.5, 0.55, ambient_dim=2)
        with pytest.raises(ParameterError, match="2 grid cells"):
            sv.Grid(squeezed, h=1 / 16)


class TestExhaustion:
    def test_slab_differences_decay(self, slab_dom):
        sol = sv.solve_exhaustion(slab_dom.with_radius(2.0), [2, 4, 8], h=1 / 16,
                                  tol=1e-4, linear_tol=1e-11)
        diffs = [d for _, d in sol.report.exhaustion_history]
        assert len(diffs) == 2
        assert diffs[1] < diffs[0]
        assert diffs[-1] < 1e-4
        assert sol.report.converged

    def test_annulus_saturated_ball(self, annulus_dom):
        sol = sv.solve_exhaustion(annulus_dom.with_radius(2.5), [2.5, 3.0, 3.5],
                                  h=1 / 16, tol=1e-6, linear_tol=1e-11)
        diffs = [d for _, d in sol.report.exhaustion_history]
        assert diffs == [0.0, 0.0]
        assert sol.report.details["neumann_nodes"] == 0

    def test_radius_count_guard(self, slab_dom):
        with pytest.raises(ParameterError):
            sv.solve_exhaustion(slab_dom, [4.0], h=1 / 16)
        with pytest.raises(ParameterError):
            sv.solve_exhaustion(slab_dom, [4.0, 3.0, 5.0], h=1 / 16)
