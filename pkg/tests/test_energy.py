"""Height-excess energies: closed form vs quadrature oracle, monotonicity,
continuity bounds, and the blow-up dichotomy."""

import numpy as np
import pytest

from varifolds.atomic import AtomicVarifold, Box, sample_circle, sample_line
from varifolds.energy import (EnergyParams, energy_alpha, energy_alpha_oracle,
                              height_excess, integrated_energy, local_energy_params,
                              weight_kernel)
from varifolds.errors import ValidationError
from varifolds.grassmann import plane_from_basis

Y_AXIS = plane_from_basis([[0.0, 1.0]])
X_AXIS = plane_from_basis([[1.0, 0.0]])


def single_atom(position=(0.5, 0.0), mass=1.0):
    return AtomicVarifold(n=2, d=1, points=[list(position)], bases=[[[0.0, 1.0]]],
                          masses=[mass])


def line_plane(theta):
    return plane_from_basis([[np.cos(theta), np.sin(theta)]])


def random_instance(rng, n=2, count=60):
    points = rng.uniform(-1.2, 1.2, (count, n))
    masses = rng.uniform(0.1, 2.0, count)
    direction = rng.standard_normal(n)
    bases = np.broadcast_to(direction / np.linalg.norm(direction), (count, 1, n)).copy()
    return AtomicVarifold(n=n, d=1, points=points, bases=bases, masses=masses)


class TestWeightKernel:
    def test_zero_beyond_r_max(self):
        params = EnergyParams(alpha=0.1, r_max=0.8)
        assert weight_kernel(0.8, params, 1) == 0.0
        assert weight_kernel(2.0, params, 1) == 0.0

    def test_worked_value_and_quadrature(self):
        params = EnergyParams(alpha=0.1)
        got = weight_kernel(0.5, params, 1)
        assert got == pytest.approx(7.0 / 3.0, abs=1e-12)
        # independent check: midpoint quadrature of r^-4 over [0.5, 1]
        steps = 200_000
        r = 0.5 + (np.arange(steps) + 0.5) * (0.5 / steps)
        quad = float(np.sum(r**-4.0) * 0.5 / steps)
        assert got == pytest.approx(quad, rel=1e-9)

    def test_plateau_below_alpha(self):
        params = EnergyParams(alpha=0.2)
        plateau = (0.2 ** (-3.0) - 1.0) / 3.0
        for rho in (0.0, 0.05, 0.2):
            assert weight_kernel(rho, params, 1) == pytest.approx(plateau, rel=1e-14)

    def test_continuous_and_nonincreasing(self):
        params = EnergyParams(alpha=0.15, r_max=0.9)
        rho = np.linspace(0.0, 1.2, 500)
        w = weight_kernel(rho, params, 1)
        assert np.all(np.diff(w) <= 1e-12)
        # continuity: increments bounded by sup |W'| = alpha^-(d+3) times the step
        step = rho[1] - rho[0]
        assert np.max(np.abs(np.diff(w))) <= 0.15 ** (-4.0) * step * 1.05

    def test_rejects_negative_rho(self):
        with pytest.raises(ValidationError):
            weight_kernel(-0.1, EnergyParams(alpha=0.1), 1)


class TestEnergyParams:
    def test_ordering_enforced(self):
        with pytest.raises(ValidationError):
            EnergyParams(alpha=0.5, r_max=0.2)
        with pytest.raises(ValidationError):
            EnergyParams(alpha=0.0)
        with pytest.raises(ValidationError):
            EnergyParams(alpha=0.1, r_max=1.5)

    def test_local_truncation(self):
        window = Box((0.3, 0.3), (0.7, 0.7))
        domain = Box((0.0, 0.0), (1.0, 1.0))
        params = local_energy_params(0.05, window, domain)
        assert params.r_max == pytest.approx(0.15)
        assert params.window == window

    def test_window_must_be_inside(self):
        with pytest.raises(ValidationError):
            local_energy_params(0.05, Box((0.0, 0.0), (1.0, 1.0)), Box((0.0, 0.0), (1.0, 1.0)))


class TestEnergyAlpha:
    def test_atoms_in_plane_give_zero(self):
        v = sample_line((-0.4, 0.0), (0.6, 0.0), 50)
        report = energy_alpha((0.1, 0.0), X_AXIS, v, EnergyParams(alpha=0.05))
        assert report.value == 0.0

    def test_single_atom_worked_example(self):
        v = single_atom()
        report = energy_alpha((0.0, 0.0), Y_AXIS, v, EnergyParams(alpha=0.1))
        assert report.value == pytest.approx(7.0 / 12.0, abs=1e-12)
        oracle = energy_alpha_oracle((0.0, 0.0), Y_AXIS, v, EnergyParams(alpha=0.1), 100_000)
        assert report.value == pytest.approx(oracle, rel=1e-4)

    def test_alpha_equals_r_max_gives_zero(self):
        v = single_atom()
        report = energy_alpha((0.0, 0.0), Y_AXIS, v, EnergyParams(alpha=1.0))
        assert report.value == 0.0

    def test_terms_sum_to_value(self):
        rng = np.random.default_rng(9)
        v = random_instance(rng)
        params = EnergyParams(alpha=0.2)
        report = energy_alpha((0.0, 0.0), line_plane(0.4), v, params, keep_terms=True)
        assert report.terms.shape == (v.count,)
        assert report.value == pytest.approx(float(np.sum(report.terms)), rel=1e-12)

    def test_windowed_energy_below_global(self):
        v = sample_circle((0.0, 0.0), 1.0, 400)
        window = Box((0.2, -0.7), (1.1, 0.7))  # gap 0.1 to the domain edge
        local = local_energy_params(0.02, window, v.domain)
        assert local.r_max == pytest.approx(0.05)
        x = (1.0, 0.0)
        e_local = energy_alpha(x, Y_AXIS, v, local).value
        e_global = energy_alpha(x, Y_AXIS, v, EnergyParams(alpha=0.02)).value
        assert 0.0 < e_local <= e_global

    def test_point_outside_window_rejected(self):
        v = sample_circle((0.0, 0.0), 1.0, 100)
        window = Box((0.4, -0.5), (1.1, 0.5))
        params = EnergyParams(alpha=0.05, r_max=0.2, window=window)
        with pytest.raises(ValidationError, match="window"):
            energy_alpha((-1.0, 0.0), Y_AXIS, v, params)

    def test_atom_at_evaluation_point_is_harmless(self):
        v = AtomicVarifold(n=2, d=1, points=[[0.0, 0.0], [0.4, 0.0]],
                           bases=[[[0.0, 1.0]], [[0.0, 1.0]]], masses=[1.0, 1.0])
        value = energy_alpha((0.0, 0.0), Y_AXIS, v, EnergyParams(alpha=0.1)).value
        only_far = energy_alpha((0.0, 0.0), Y_AXIS, single_atom((0.4, 0.0)),
                                EnergyParams(alpha=0.1)).value
        assert value == pytest.approx(only_far, rel=1e-14)


class TestOracle:
    def test_zero_when_all_atoms_beyond_r_max(self):
        v = single_atom((3.0, 0.0))
        assert energy_alpha_oracle((0.0, 0.0), Y_AXIS, v, EnergyParams(alpha=0.1), 1000) == 0.0

    def test_monotone_in_alpha(self):
        rng = np.random.default_rng(4)
        v = random_instance(rng)
        for a1, a2 in [(0.05, 0.1), (0.1, 0.3), (0.3, 0.9)]:
            o1 = energy_alpha_oracle((0.0, 0.0), line_plane(1.0), v, EnergyParams(alpha=a1), 5000)
            o2 = energy_alpha_oracle((0.0, 0.0), line_plane(1.0), v, EnergyParams(alpha=a2), 5000)
            assert o1 >= o2

    def test_richardson_convergence_to_closed_form(self):
        rng = np.random.default_rng(17)
        v = random_instance(rng, count=40)
        params = EnergyParams(alpha=0.15)
        plane = line_plane(0.9)
        exact = energy_alpha((0.0, 0.0), plane, v, params).value
        errors = [abs(energy_alpha_oracle((0.0, 0.0), plane, v, params, s) - exact)
                  for s in (1000, 4000, 16_000, 64_000)]
        assert errors[-1] < errors[0]
        assert errors[-1] <= 1e-4 * exact

    def test_min_steps(self):
        with pytest.raises(ValidationError):
            energy_alpha_oracle((0.0, 0.0), Y_AXIS, single_atom(), EnergyParams(alpha=0.1), 5)

    def test_gap_scales_like_one_over_steps(self):
        # |closed - oracle(steps)| <= C / steps: the midpoint rule misplaces
        # each atom's indicator jump by at most half a cell, so C is the sum
        # of the jump heights times the interval length (plus slack for the
        # smooth part).
        rng = np.random.default_rng(99)
        for _ in range(20):
            v = random_instance(rng, n=int(rng.integers(2, 4)), count=50)
            alpha = float(rng.uniform(0.15, 0.5))
            plane = (line_plane(rng.uniform(0, np.pi)) if v.n == 2
                     else plane_from_basis([rng.standard_normal(3)]))
            params = EnergyParams(alpha=alpha)
            x = np.zeros(v.n)
            exact = energy_alpha(x, plane, v, params).value
            rho = np.linalg.norm(v.points - x, axis=1)
            resid = (v.points - x) - ((v.points - x) @ plane.basis.T) @ plane.basis
            jumping = (rho > alpha) & (rho < 1.0)
            jumps = float(np.sum(v.masses[jumping]
                                 * np.einsum("ij,ij->i", resid, resid)[jumping]
                                 * rho[jumping] ** (-(v.d + 3))))
            for steps in (2000, 100_000):
                gap = abs(energy_alpha_oracle(x, plane, v, params, steps) - exact)
                assert gap <= (1.0 - alpha) * jumps / steps + 1e-12
            fine = abs(energy_alpha_oracle(x, plane, v, params, 100_000) - exact)
            assert fine <= 1e-4 * max(exact, 1e-12)


class TestHeightExcess:
    def test_atoms_in_plane(self):
        v = sample_line((-0.5, 0.0), (0.5, 0.0), 20)
        assert height_excess((0.0, 0.0), X_AXIS, v, 0.4) == 0.0

    def test_single_atom_arithmetic(self):
        v = single_atom()
        got = height_excess((0.0, 0.0), Y_AXIS, v, 0.6)
        assert got == pytest.approx(0.25 / 0.6**3, rel=1e-14)
        assert got == pytest.approx(1.1574074, abs=1e-6)

    def test_empty_ball(self):
        assert height_excess((0.0, 0.0), Y_AXIS, single_atom(), 0.3) == 0.0

    def test_energy_is_scale_integral_of_height_excess(self):
        # E(alpha) equals the dr/r integral of hex(r); check by quadrature.
        rng = np.random.default_rng(31)
        v = random_instance(rng, count=30)
        plane = line_plane(0.7)
        params = EnergyParams(alpha=0.2)
        steps = 20_000
        width = (1.0 - 0.2) / steps
        nodes = 0.2 + (np.arange(steps) + 0.5) * width
        quad = sum(height_excess((0.0, 0.0), plane, v, r) / r for r in nodes[::200]) \
            * width * 200
        exact = energy_alpha((0.0, 0.0), plane, v, params).value
        assert quad == pytest.approx(exact, rel=0.02)


class TestIntegratedEnergy:
    def test_zero_for_flat_data(self):
        v = sample_line((0.0, 0.0), (1.0, 0.0), 64)
        assert integrated_energy(v, v, EnergyParams(alpha=0.05)) == 0.0

    def test_single_atom_composition(self):
        v_eval = AtomicVarifold(n=2, d=1, points=[[0.0, 0.0]], bases=[[[0.0, 1.0]]],
                                masses=[2.5])
        v_mass = single_atom()
        got = integrated_energy(v_eval, v_mass, EnergyParams(alpha=0.1))
        assert got == pytest.approx(2.5 * 7.0 / 12.0, rel=1e-12)

    def test_full_subsample_is_exact(self):
        v = sample_circle((0.0, 0.0), 1.0, 200)
        params = EnergyParams(alpha=0.1)
        full = integrated_energy(v, v, params)
        sampled = integrated_energy(v, v, params, sample=200, seed=5)
        assert sampled == full
        oversampled = integrated_energy(v, v, params, sample=10_000, seed=5)
        assert oversampled == full

    def test_subsample_deterministic_and_close(self):
        v = sample_circle((0.0, 0.0), 1.0, 600)
        params = EnergyParams(alpha=0.1)
        full = integrated_energy(v, v, params)
        a = integrated_energy(v, v, params, sample=150, seed=7)
        b = integrated_energy(v, v, params, sample=150, seed=7)
        assert a == b
        assert a == pytest.approx(full, rel=0.25)

    def test_dimension_mismatch(self):
        v2 = sample_circle((0.0, 0.0), 1.0, 16)
        v3 = sample_line((0, 0, 0), (1, 1, 1), 16)
        with pytest.raises(ValidationError):
            integrated_energy(v2, v3, EnergyParams(alpha=0.1))


class TestMonotonicityInAlpha:
    def test_exact_monotonicity(self):
        rng = np.random.default_rng(13)
        v = random_instance(rng)
        plane = line_plane(0.3)
        values = [energy_alpha((0.0, 0.0), plane, v, EnergyParams(alpha=a)).value
                  for a in (0.05, 0.1, 0.2, 0.4, 0.8, 1.0)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] == 0.0


class TestLipschitzInPlane:
    def test_coarse_bound_holds(self):
        v = sample_circle((0.0, 0.0), 1.0, 2000)
        alpha = 0.05
        params = EnergyParams(alpha=alpha)
        bound_const = 2.0 / alpha**2 * v.total_mass
        rng = np.random.default_rng(21)
        for _ in range(200):
            x = v.points[rng.integers(v.count)]
            p = line_plane(rng.uniform(0, np.pi))
            q = line_plane(rng.uniform(0, np.pi))
            ep = energy_alpha(x, p, v, params).value
            eq = energy_alpha(x, q, v, params).value
            opnorm = float(np.linalg.norm(p.projector - q.projector, 2))
            assert abs(ep - eq) <= bound_const * opnorm + 1e-12

    def test_sharper_integral_bound_holds(self):
        # 2 |P-Q|_op * integral of r^-(d+1) mass(B_r(x)) dr, overestimated by
        # a right-endpoint Riemann sum (the mass is nondecreasing in r).
        from varifolds.atomic import mass_in_ball

        v = sample_circle((0.0, 0.0), 1.0, 500)
        alpha = 0.1
        params = EnergyParams(alpha=alpha)
        x = v.points[3]
        edges = np.geomspace(alpha, 1.0, 200)
        upper = float(np.sum([
            (hi - lo) * lo ** (-2.0) * mass_in_ball(v, x, hi)
            for lo, hi in zip(edges[:-1], edges[1:])
        ]))
        rng = np.random.default_rng(2)
        for _ in range(50):
            p = line_plane(rng.uniform(0, np.pi))
            q = line_plane(rng.uniform(0, np.pi))
            gap = abs(energy_alpha(x, p, v, params).value
                      - energy_alpha(x, q, v, params).value)
            opnorm = float(np.linalg.norm(p.projector - q.projector, 2))
            assert gap <= 2.0 * opnorm * upper + 1e-12


class TestSpatialContinuity:
    def test_sup_over_planes_shrinks_with_distance(self):
        v = sample_circle((0.0, 0.0), 1.0, 4000)
        params = EnergyParams(alpha=0.05)
        x = np.array([1.0, 0.0])
        planes = [line_plane(t) for t in np.linspace(0, np.pi, 64, endpoint=False)]

        def sup_gap(z):
            return max(abs(energy_alpha(x, p, v, params).value
                           - energy_alpha(z, p, v, params).value) for p in planes)

        near = sup_gap(x + np.array([0.0, 1e-3]))
        far = sup_gap(x + np.array([0.0, 1e-1]))
        assert near < far

    def test_translation_invariance(self):
        rng = np.random.default_rng(15)
        v = random_instance(rng, count=40)
        shift = np.array([5.0, -3.0])
        moved = AtomicVarifold(n=2, d=1, points=v.points + shift, bases=v.bases,
                               masses=v.masses)
        plane = line_plane(1.2)
        params = EnergyParams(alpha=0.2)
        a = energy_alpha((0.1, 0.2), plane, v, params).value
        b = energy_alpha(shift + (0.1, 0.2), plane, moved, params).value
        assert a == pytest.approx(b, rel=1e-12)


class TestBlowUpDichotomy:
    def test_radial_grows_tangent_saturates(self):
        count = 10_000
        v = sample_circle((0.0, 0.0), 1.0, count)
        x = (1.0, 0.0)
        spacing = 2.0 * np.pi / count
        alphas = np.geomspace(0.1, max(10 * spacing, 1e-3), 9)
        radial = [energy_alpha(x, X_AXIS, v, EnergyParams(alpha=a)).value for a in alphas]
        tangent = [energy_alpha(x, Y_AXIS, v, EnergyParams(alpha=a)).value for a in alphas]
        # radial plane: affine in log(1/alpha) with positive slope
        logs = np.log(1.0 / alphas)
        slope = np.polyfit(logs, radial, 1)[0]
        assert slope > 0.0
        half = len(alphas) // 2
        slope_lo = np.polyfit(logs[:half], radial[:half], 1)[0]
        slope_hi = np.polyfit(logs[half:], radial[half:], 1)[0]
        assert slope_lo == pytest.approx(slope_hi, rel=0.3)
        # tangent plane: halving alpha adds less and less
        increments = [energy_alpha(x, Y_AXIS, v, EnergyParams(alpha=a / 2)).value - e
                      for a, e in zip(alphas, tangent)]
        assert all(inc >= -1e-15 for inc in increments)
        assert increments[-1] < increments[0] / 5.0
