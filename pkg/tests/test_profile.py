import numpy as np
import pytest

from neelwall.errors import NoConvergence, RangeViolation
from neelwall.grid import Field, Grid, inner_l2, norm_l2, random_compact
from neelwall.profile import (
    SolveConfig,
    energy,
    energy_gradient,
    odd_defect,
    phase_derivative,
    reference_phase,
    residual,
    solve_profile,
    translate_wall,
    far_field_report,
)

import oracles


class TestEnergy:
    def test_far_field_contributes_nothing(self, grid_small):
        # clamp the guess to exactly +-pi/2 outside the core: both the
        # slope and cos(theta) vanish there, so the plateau carries no energy
        g = grid_small
        vals = np.clip(reference_phase(g).values, -np.pi / 2, np.pi / 2)
        vals[np.abs(g.nodes) > 20] = np.sign(g.nodes[np.abs(g.nodes) > 20]) * np.pi / 2
        theta = Field(g, vals)
        plateau = np.abs(g.nodes) > 25
        assert np.abs(np.cos(theta.values[plateau])).max() <= 1e-15
        assert np.abs(phase_derivative(theta).values[plateau]).max() <= 1e-6
        h_weighted = g.h * np.sum(np.cos(theta.values[plateau]) ** 2)
        assert h_weighted <= 1e-12

    def test_reference_energy_matches_kernel_oracle(self, grid_prod):
        g = grid_prod
        theta = reference_phase(g)
        sech = 1.0 / np.cosh(g.nodes)
        deriv_term = g.h * float(sech @ sech)
        ct = Field(g, np.cos(theta.values))
        oracle = 0.5 * (deriv_term + oracles.b_form_oracle(ct, ct))
        assert energy(theta) == pytest.approx(oracle, abs=1e-8)

    def test_reference_energy_near_analytic_value(self, grid_prod):
        # 1/2 (2 + (4/pi) ln 2 + 2) for the arcsin(tanh) profile on the line;
        # the box value differs by the lattice-interaction correction
        analytic = 0.5 * (2.0 + 4.0 * np.log(2.0) / np.pi + 2.0)
        assert energy(reference_phase(grid_prod)) == pytest.approx(analytic, abs=5e-3)

    def test_translation_invariance(self, profile_prod):
        g = profile_prod.grid
        for delta in (5 * g.h, -3.3 * g.h, 0.6):
            shifted = translate_wall(profile_prod.theta, delta)
            assert abs(energy(shifted) - profile_prod.energy) <= 1e-9

    def test_range_guard(self, grid_small):
        bad = Field(grid_small, 1.8 * reference_phase(grid_small).values)
        with pytest.raises(RangeViolation):
            energy(bad)


class TestGradient:
    def test_zero_phase_has_zero_gradient(self, grid_small):
        g = grid_small
        grad = energy_gradient(g.zeros())
        assert np.abs(grad.values).max() == 0.0

    @pytest.mark.parametrize("eps", [1e-3, 1e-4])
    def test_directional_derivative_consistency(self, profile_small, rng, eps):
        theta = profile_small.theta
        w = random_compact(theta.grid, rng)
        fd = oracles.fd_directional_derivative(energy, theta, w, eps)
        exact = inner_l2(energy_gradient(theta), w)
        assert fd == pytest.approx(exact, abs=50 * eps**2 * norm_l2(w) ** 2)

    def test_residual_at_minimizer(self, profile_prod):
        assert residual(profile_prod.theta) <= 1e-8

    def test_residual_examples(self, grid_small, profile_small):
        assert residual(grid_small.zeros()) == 0.0
        assert residual(reference_phase(grid_small)) > 1e-3
        assert residual(profile_small.theta) <= 1e-10


class TestSolver:
    def test_converges_with_certificates(self, profile_prod):
        p = profile_prod
        assert p.residual_l2 <= 1e-8
        assert p.theta.values[p.grid.center_index] == 0.0
        assert p.min_slope > 0
        assert p.odd_defect == 0.0

    def test_energy_descends_from_guess(self, profile_small, grid_small):
        guess_energy = energy(reference_phase(grid_small))
        assert profile_small.energy < guess_energy
        # accepted steps never increase the energy beyond the documented
        # double-precision floor of the line search
        diffs = np.diff(profile_small.energy_history)
        floor = 8 * np.finfo(float).eps * (abs(profile_small.energy) + 1.0)
        assert diffs.max() <= floor

    def test_idempotent_restart(self, profile_small, grid_small):
        again = solve_profile(SolveConfig(grid_small), initial=profile_small.theta)
        assert again.iterations == 0
        assert np.array_equal(again.theta.values, profile_small.theta.values)

    def test_refinement_changes_energy_at_interaction_scale(self, profile_prod):
        # the alternating-lattice energy carries a wall-interaction term of
        # order 1/R^2, so doubling (n, R) moves the energy by about
        # three-quarters of it; verify the magnitude and the 1/R^2 scaling
        fine = solve_profile(SolveConfig(Grid(4096, 120.0)))
        finer = solve_profile(SolveConfig(Grid(8192, 240.0)))
        change1 = abs(fine.energy - profile_prod.energy) / abs(profile_prod.energy)
        change2 = abs(finer.energy - fine.energy) / abs(fine.energy)
        assert change1 <= 3e-4
        assert 2.0 <= change1 / change2 <= 8.0

    def test_no_convergence_carries_history(self, grid_small):
        with pytest.raises(NoConvergence) as err:
            solve_profile(SolveConfig(grid_small, tol_residual=1e-14, max_iters=3))
        assert err.value.iterate is not None
        assert len(err.value.residual_history) == 4

    def test_monotone_slope_positive_everywhere_inside(self, profile_prod):
        assert np.min(profile_prod.dtheta.values[1:]) > 0
        # the seam node is the midpoint between lattice walls: zero slope
        assert abs(profile_prod.dtheta.values[0]) <= 1e-12

    def test_bounded_derivatives_report(self, profile_prod):
        rep = far_field_report(profile_prod)
        # both sup norms stay uniformly bounded; the slope peaks at the core
        assert 1.0 <= rep["sup_dtheta"] <= 2.0
        assert 0.0 < rep["sup_d2theta"] <= 2.0
        # the algebraic lattice tails sit just above the strict far-field
        # tolerance; the slope still decays by six orders from its peak
        assert np.abs(profile_prod.dtheta.values[:20]).max() <= 1e-5


class TestTranslate:
    def test_translate_roundtrip(self, profile_small):
        theta = profile_small.theta
        back = translate_wall(translate_wall(theta, 1.7), -1.7)
        assert np.abs(back.values - theta.values).max() <= 1e-11

    def test_translate_is_equilibrium(self, profile_prod):
        shifted = translate_wall(profile_prod.theta, 5 * profile_prod.grid.h)
        assert residual(shifted) <= 10 * profile_prod.residual_l2 + 1e-11

    def test_odd_defect_of_asymmetric_field(self, grid_small):
        vals = reference_phase(grid_small).values.copy()
        vals[grid_small.center_index + 5] += 1e-3
        assert odd_defect(Field(grid_small, vals)) >= 1e-3
