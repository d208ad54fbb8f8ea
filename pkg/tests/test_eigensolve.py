"""Oracle solvers: secular, transfer-matrix and grid, plus cross-checks."""

import cmath
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from eigenbump import bump as bumpmod
from eigenbump.eigensolve import (SecularProblem, StepPotential1D,
                                  count_zeros, grid_oracle_1d, refine_eigen,
                                  secular_residual, step_matrix,
                                  transfer_eigen_1d)
from eigenbump.errors import (ContourError, GridResolutionError,
                              InvalidArgumentError, NoConvergenceError,
                              WrongSheetError)


def problem_for(params):
    return SecularProblem(d=params.d, c=params.c, a=params.a,
                          branch_ref=params.tau)


def single_bump_potential(params, t=0.0, boundary="whole", phi=0.0):
    return StepPotential1D((t - params.a, t + params.a), (params.c,),
                           boundary=boundary, phi=phi)


class TestSecular:
    def test_designed_bumps_are_roots(self, moderate_bumps):
        for params in moderate_bumps:
            res = secular_residual(problem_for(params), params.k)
            assert abs(res) <= 1e-10

    def test_d3_matches_cotangent_form(self):
        params = bumpmod.design_bump(3, 4.0, 1.0, 4.0, 4.0, 0.4)
        prob = problem_for(params)
        for dk in (0.0, 0.01 + 0.003j, -0.02j):
            k = params.k + dk
            tau = cmath.sqrt(k * k - params.c)
            if abs(tau - params.tau) > abs(tau + params.tau):
                tau = -tau
            want = k + 1j * tau * (cmath.cos(tau * params.a)
                                   / cmath.sin(tau * params.a))
            assert secular_residual(prob, k) == pytest.approx(want, rel=1e-10)

    def test_free_problem_has_no_upper_roots(self):
        # c = 0: F(k) = 2k (d=3), no zeros off the origin
        prob = SecularProblem(d=3, c=0.0, a=2.0, branch_ref=complex(1.0, 0.5))
        assert count_zeros(prob, (0.3 + 0.1j, 2.5 + 2.0j)) == 0

    def test_refine_converges_from_asymptotic_seed(self):
        for d in (1, 2, 3, 5):
            for lam in (0.5, 1.0, 2.0):
                params = bumpmod.design_bump(d, d + 1.0, lam, 6.0, 6.0, 0.45)
                if abs(params.tau) * params.a > 3e4:
                    continue  # keep this matrix in the native lane
                prob = problem_for(params)
                seed = complex(-params.nu, params.eta)
                got = refine_eigen(prob, seed)
                assert got.residual <= 1e-10
                assert abs(got.mu - params.mu) < 1e-8
                assert got.k.imag > 0.0

    def test_refine_fixed_point_at_root(self, moderate_bump):
        prob = problem_for(moderate_bump)
        got = refine_eigen(prob, moderate_bump.k)
        assert got.k == moderate_bump.k  # accepted before any step

    def test_refine_rejects_rootless_region(self, moderate_bump):
        prob = problem_for(moderate_bump)
        # far upper-right region: free-resolvent regime, no roots; the
        # iteration must not fabricate one
        with pytest.raises((NoConvergenceError, WrongSheetError)):
            refine_eigen(prob, complex(8.0, 6.0))

    def test_mu_derived_from_k(self, moderate_bump):
        res = refine_eigen(problem_for(moderate_bump), moderate_bump.k)
        assert res.mu == res.k * res.k
        assert res.method == "secular"


class TestCountZeros:
    def test_one_root_around_designed(self, moderate_bump):
        k = moderate_bump.k
        prob = problem_for(moderate_bump)
        half = min(0.3 * k.imag, math.pi / (8.0 * moderate_bump.a))
        box = (k - half - 1j * half, k + half + 1j * half)
        assert count_zeros(prob, box) == 1

    def test_doubled_box_still_one(self, moderate_bump):
        k = moderate_bump.k
        prob = problem_for(moderate_bump)
        half = min(0.3 * k.imag, math.pi / (8.0 * moderate_bump.a))
        box = (k - 2 * half - 2j * half, k + 2 * half + 2j * half)
        assert count_zeros(prob, box) == 1

    def test_far_region_empty(self):
        prob = SecularProblem(d=1, c=complex(0.0, -1e-4), a=1.0,
                              branch_ref=complex(1.0, 0.5))
        assert count_zeros(prob, (2.0 + 1.0j, 3.0 + 2.0j)) == 0

    def test_contour_through_root_detected(self, moderate_bump):
        prob = problem_for(moderate_bump)
        k = moderate_bump.k
        # a corner sits (numerically) on the root
        with pytest.raises((ContourError, InvalidArgumentError)):
            count_zeros(prob, (k, k + 0.05 + 0.05j))


class TestTransfer:
    def test_agrees_with_secular_everywhere(self, moderate_bumps, rng):
        for params in moderate_bumps:
            t = float(rng.uniform(-20.0, 20.0))
            got = transfer_eigen_1d(single_bump_potential(params, t), params.k)
            assert got.residual <= 1e-10
            assert abs(got.mu - params.mu) <= 1e-8

    def test_textbook_negative_well(self):
        # even ground state of the unit well of depth 1:
        # sqrt(1-E) tan(sqrt(1-E)) = sqrt(E), mu = -E (independent bisection)
        def matching(e):
            return math.sqrt(1.0 - e) * math.tan(math.sqrt(1.0 - e)) - math.sqrt(e)
        e_root = brentq(matching, 0.3, 0.7, xtol=1e-14)
        pot = StepPotential1D((-1.0, 1.0), (-1.0,), boundary="whole")
        got = transfer_eigen_1d(pot, complex(0.0, math.sqrt(e_root)))
        assert got.mu == pytest.approx(-e_root, abs=1e-10)

    def test_robin_dirichlet_approaches_whole_line(self, moderate_bump):
        whole = transfer_eigen_1d(single_bump_potential(moderate_bump, 0.0),
                                  moderate_bump.k)
        gaps = []
        for t in (10.0 * moderate_bump.a, 20.0 * moderate_bump.a,
                  40.0 * moderate_bump.a):
            pot = single_bump_potential(moderate_bump, t, "robin", math.pi / 2.0)
            got = transfer_eigen_1d(pot, moderate_bump.k)
            gaps.append(abs(got.mu - whole.mu))
        assert gaps[0] < 1e-6
        assert gaps[1] <= gaps[0] and gaps[2] <= gaps[1]

    def test_robin_boundary_bound_state(self):
        # phi in (0, pi/2) carries the boundary bound state mu = -tan(phi)^2
        # even with no potential at all
        phi = 0.8
        pot = StepPotential1D((50.0, 51.0), (0.0,), boundary="robin", phi=phi)
        kappa = math.tan(phi)
        got = transfer_eigen_1d(pot, complex(0.0, kappa * 1.001))
        assert got.mu == pytest.approx(-kappa * kappa, rel=1e-9)

    def test_conjugation_symmetry(self, moderate_bumps):
        for params in moderate_bumps:
            pot = single_bump_potential(params, 3.0)
            conj_pot = StepPotential1D(pot.breakpoints,
                                       tuple(v.conjugate() for v in pot.values))
            base = transfer_eigen_1d(pot, params.k)
            mirrored = transfer_eigen_1d(conj_pot, -base.k.conjugate())
            assert mirrored.mu == pytest.approx(base.mu.conjugate(), abs=1e-10)

    def test_sheet_discipline(self, moderate_bump):
        got = transfer_eigen_1d(single_bump_potential(moderate_bump), moderate_bump.k)
        assert got.k.imag > 0.0 and got.mu.imag < 0.0

    def test_seed_needs_upper_half_plane(self, moderate_bump):
        with pytest.raises(InvalidArgumentError):
            transfer_eigen_1d(single_bump_potential(moderate_bump),
                              complex(1.0, -0.2))

    def test_extended_precision_lane_matches_native(self, moderate_bump):
        # same physical problem, pushed into the mp lane by a distant shift
        native = transfer_eigen_1d(single_bump_potential(moderate_bump, 0.0),
                                   moderate_bump.k)
        far = transfer_eigen_1d(single_bump_potential(moderate_bump, 2.0e5),
                                moderate_bump.k)
        assert far.mu == pytest.approx(native.mu, abs=1e-10)


class TestStepMatrix:
    def test_determinant_one(self, rng):
        # cos^2 + sin^2 = 1 is conditioned like eps * e^{2 |Im kappa L|},
        # so the 1e-12 check is meaningful for |Im kappa L| up to ~4
        count = 0
        while count < 40:
            k = complex(rng.uniform(-2, 2), rng.uniform(0.05, 1.0))
            w = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            length = float(rng.uniform(0.1, 8.0))
            kappa = cmath.sqrt(k * k - w)
            if abs((kappa * length).imag) > 4.0:
                continue
            count += 1
            det = np.linalg.det(step_matrix(k, w, length))
            assert det == pytest.approx(1.0, rel=1e-12)

    def test_composition_matches_single_step(self):
        k, w = complex(-1.0, 0.2), complex(0.1, -0.3)
        one = step_matrix(k, w, 2.0)
        two = step_matrix(k, w, 1.2) @ step_matrix(k, w, 0.8)
        assert np.allclose(one, two, rtol=1e-12)


class TestGridOracle:
    def test_zero_potential_empty(self):
        pot = StepPotential1D((-1.0, 1.0), (0.0,), boundary="whole")
        out = grid_oracle_1d(pot, complex(1.0, -0.4), 0.15)
        assert out == []

    def test_matches_transfer_within_estimate(self, moderate_bump):
        pot = single_bump_potential(moderate_bump, 4.0)
        ref = transfer_eigen_1d(pot, moderate_bump.k)
        found = grid_oracle_1d(pot, ref.mu, 0.02)
        assert len(found) == 1
        assert abs(found[0].mu - ref.mu) <= 1e-8 + found[0].residual

    def test_robin_case_matches_transfer(self, moderate_bump):
        t = 12.0 * moderate_bump.a
        pot = single_bump_potential(moderate_bump, t, "robin", math.pi / 2.0)
        ref = transfer_eigen_1d(pot, moderate_bump.k)
        found = grid_oracle_1d(pot, ref.mu, 0.02)
        assert found and abs(found[0].mu - ref.mu) <= 1e-8 + found[0].residual

    def test_requires_lower_half_target(self, moderate_bump):
        pot = single_bump_potential(moderate_bump)
        with pytest.raises(InvalidArgumentError):
            grid_oracle_1d(pot, complex(1.0, 0.2), 0.1)

    def test_unresolvable_radius_raises(self, moderate_bump):
        pot = single_bump_potential(moderate_bump, 4.0)
        with pytest.raises(GridResolutionError):
            grid_oracle_1d(pot, moderate_bump.mu, 1e-9)

    def test_domain_cap_raises(self):
        params = bumpmod.design_bump(1, 2.0, 1.0, 0.5, 0.5, 0.1)
        pot = single_bump_potential(params, 0.0)
        with pytest.raises(GridResolutionError):
            grid_oracle_1d(pot, params.mu, 0.001)


class TestMultiBumpGrid:
    def test_two_bump_potential_both_roots_recovered(self, moderate_bumps):
        # the multi-bump grid cross-check at a scale a grid can afford
        first, second = moderate_bumps[0], moderate_bumps[2]
        t1 = 2.0 * first.a
        t2 = t1 + first.a + 3.0 * second.a
        pot = StepPotential1D(
            (t1 - first.a, t1 + first.a, t2 - second.a, t2 + second.a),
            (first.c, 0.0, second.c))
        for params in (first, second):
            ref = transfer_eigen_1d(pot, params.k)
            found = grid_oracle_1d(pot, ref.mu, 0.02)
            assert found
            assert abs(found[0].mu - ref.mu) <= 1e-8 + found[0].residual


class TestOracleTriangle:
    def test_three_methods_agree(self, moderate_bump):
        sec = refine_eigen(problem_for(moderate_bump), moderate_bump.k)
        pot = single_bump_potential(moderate_bump, 6.0)
        tra = transfer_eigen_1d(pot, moderate_bump.k)
        gri = grid_oracle_1d(pot, sec.mu, 0.02)[0]
        assert abs(sec.mu - tra.mu) <= 1e-8
        assert abs(sec.mu - gri.mu) <= 1e-8 + gri.residual
        assert abs(tra.mu - gri.mu) <= 1e-8 + gri.residual
