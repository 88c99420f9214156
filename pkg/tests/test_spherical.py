import numpy as np
import pytest

from qsm.exceptions import DimensionCap, DomainError
from qsm.numerics import QuadratureSpec, integrate
from qsm.spherical import (
    LatticeSpec,
    SphericalParams,
    free_energy_finite_beta,
    ground_energy,
    ground_energy_h_extrapolated,
    saddle_exponent,
    saddle_exponent_deriv,
    solve_saddle,
    spectrum_term_finite,
    spectrum_term_limit,
    susceptibility_at_zero_field,
)


class TestSpectrumFinite:
    def test_four_site_chain_by_hand(self):
        # modes cos(2 pi k/4) sum to {1, 0, -1, 0}
        expected = (np.log(1.0) + np.log(2.0) + np.log(3.0) + np.log(2.0)) / 4.0
        assert spectrum_term_finite(LatticeSpec(1, 4), 1.0) == pytest.approx(expected, abs=1e-14)

    def test_three_site_chain_by_hand(self):
        # cos values {1, -1/2, -1/2}
        expected = (np.log(2.0) + 2.0 * np.log(3.5)) / 3.0
        assert spectrum_term_finite(LatticeSpec(1, 3), 2.0) == pytest.approx(expected, abs=1e-14)

    @pytest.mark.parametrize("lattice", [LatticeSpec(1, 8), LatticeSpec(2, 5), LatticeSpec(3, 4)])
    def test_large_shift_asymptotics(self, lattice):
        w = 1e8
        assert abs(spectrum_term_finite(lattice, w) - np.log(w)) < 1e-7

    def test_domain_error(self):
        with pytest.raises(DomainError):
            spectrum_term_finite(LatticeSpec(1, 4), 0.0)
        with pytest.raises(DomainError):
            spectrum_term_finite(LatticeSpec(1, 4), -1.0)

    def test_lattice_validation(self):
        with pytest.raises(ValueError):
            LatticeSpec(1, 2)
        with pytest.raises(ValueError):
            LatticeSpec(0, 5)
        with pytest.raises(DimensionCap):
            LatticeSpec(9, 8)  # 8^9 sites overflows the dense-table cap


class TestSpectrumLimit:
    def test_chain_closed_form_against_quadrature(self):
        for w in (0.05, 0.3, 1.0, 4.0):
            direct = integrate(lambda t: np.log(w + 1.0 - np.cos(t)), 0.0, 2.0 * np.pi)[0] / (2.0 * np.pi)
            assert spectrum_term_limit(1, w) == pytest.approx(direct, abs=1e-11)

    def test_chain_value_at_unit_shift(self):
        # log((2 + sqrt(3))/2)
        assert spectrum_term_limit(1, 1.0) == pytest.approx(np.log(2.0 + np.sqrt(3.0)) - np.log(2.0), abs=1e-14)

    def test_finite_sum_converges_to_limit(self):
        limit = spectrum_term_limit(1, 1.0)
        assert abs(spectrum_term_finite(LatticeSpec(1, 64), 1.0) - limit) < 1e-3
        assert abs(spectrum_term_finite(LatticeSpec(1, 256), 1.0) - limit) < 1e-5
        # near the band edge convergence is slow enough to resolve the trend
        limit_small = spectrum_term_limit(1, 0.01)
        gaps = [
            abs(spectrum_term_finite(LatticeSpec(1, L), 0.01) - limit_small)
            for L in (8, 16, 32, 64)
        ]
        assert gaps[0] > gaps[1] > gaps[2] > gaps[3]

    def test_square_lattice_against_nested_quadrature(self):
        # independent route: both axes by adaptive quadrature, no closed form
        w = 1.0

        def outer(t2_array):
            out = np.empty_like(t2_array)
            for idx, t2 in enumerate(t2_array):
                out[idx] = integrate(
                    lambda t1: np.log(w + 2.0 - np.cos(t1) - np.cos(t2)), 0.0, np.pi
                )[0]
            return out / np.pi

        direct = integrate(outer, 0.0, np.pi)[0] / np.pi
        assert spectrum_term_limit(2, w) == pytest.approx(direct, abs=1e-9)

    def test_square_lattice_against_monte_carlo(self):
        w = 1.0
        rng = np.random.default_rng(2718)
        means = []
        for _ in range(10):
            angles = rng.uniform(0.0, 2.0 * np.pi, size=(10**6, 2))
            means.append(np.log(w + 2.0 - np.cos(angles).sum(axis=1)).mean())
        estimate = np.mean(means)
        std_err = np.std(means, ddof=1) / np.sqrt(len(means))
        assert abs(spectrum_term_limit(2, w) - estimate) < 3.0 * std_err

    def test_cubic_lattice_matches_dense_mode_sum(self):
        # at w = 1 the L = 64 mode sum is converged to machine precision
        assert spectrum_term_limit(3, 1.0) == pytest.approx(
            spectrum_term_finite(LatticeSpec(3, 64), 1.0), abs=1e-10
        )

    def test_dimension_cap(self):
        with pytest.raises(DimensionCap):
            spectrum_term_limit(4, 1.0)


class TestSaddleExponent:
    def test_convexity_probes(self):
        params = SphericalParams(J=1.0, B=1.0, H=0.01, d=1, beta=2.0)
        for w in (0.1, 0.5, 1.0, 5.0):
            h = 1e-4 * w
            second = (
                saddle_exponent(params, w + h)
                - 2.0 * saddle_exponent(params, w)
                + saddle_exponent(params, w - h)
            )
            assert second > 0.0

    def test_linear_term_dominates_at_large_w(self):
        params = SphericalParams(J=1.0, B=2.0, H=0.3, d=2, beta=1.5)
        w = 1e6
        ratio = saddle_exponent(params, w) / (params.beta * params.J * w)
        assert ratio == pytest.approx(1.0, abs=1e-4)

    def test_pole_at_origin_with_longitudinal_field(self):
        params = SphericalParams(J=1.0, B=0.5, H=0.2, d=1, beta=1.0)
        assert saddle_exponent(params, 1e-9) > 1e6

    def test_domain_and_dimension_checks(self):
        params = SphericalParams(J=1.0, B=0.5, H=0.0, d=1, beta=1.0)
        with pytest.raises(DomainError):
            saddle_exponent(params, 0.0)
        with pytest.raises(DomainError):
            saddle_exponent(params, -0.5)
        with pytest.raises(ValueError):
            saddle_exponent(params, 1.0, LatticeSpec(2, 4))

    def test_derivative_consistent_with_difference(self):
        params = SphericalParams(J=0.8, B=1.3, H=0.1, d=2, beta=3.0)
        for w in (0.2, 1.0, 3.0):
            h = 1e-6 * max(w, 1.0)
            fd = (saddle_exponent(params, w + h) - saddle_exponent(params, w - h)) / (2 * h)
            assert saddle_exponent_deriv(params, w) == pytest.approx(fd, rel=1e-5)


class TestSolveSaddle:
    def test_saddle_approaches_free_location(self):
        # u0 = w0 + d -> B/2J as beta grows
        gaps = []
        for beta in (100.0, 1000.0):
            sol = solve_saddle(SphericalParams(J=1.0, B=4.0, H=0.0, d=1, beta=beta))
            gaps.append(abs(sol.w0 + 1.0 - 2.0))
        assert gaps[1] < gaps[0]
        assert gaps[1] < 1e-3

    def test_saddle_collapses_with_field(self):
        w0s = []
        for h in (1e-2, 1e-3, 1e-4):
            sol = solve_saddle(SphericalParams(J=1.0, B=1.0, H=h, d=1, beta=1e4))
            w0s.append(sol.w0)
        assert w0s[0] > w0s[1] > w0s[2] > 0.0
        assert w0s[0] < 0.02

    def test_saddle_collapse_square_lattice(self):
        w0s = [
            solve_saddle(SphericalParams(J=1.0, B=0.0, H=h, d=2, beta=1e4)).w0
            for h in (1e-2, 1e-3, 1e-4)
        ]
        assert w0s[0] > w0s[1] > w0s[2] > 0.0

    def test_optimality(self):
        sol = solve_saddle(SphericalParams(J=1.0, B=3.0, H=0.2, d=1, beta=5.0))
        params = SphericalParams(J=1.0, B=3.0, H=0.2, d=1, beta=5.0)
        center = saddle_exponent(params, sol.w0)
        for delta in (1e-12, 1e-5):
            # roundoff allowance for the tiny displacement
            slack = 4e-16 * abs(center)
            assert center <= saddle_exponent(params, sol.w0 + delta) + slack
            assert center <= saddle_exponent(params, sol.w0 - delta) + slack

    def test_finite_lattice_mode(self):
        params = SphericalParams(J=1.0, B=3.0, H=0.0, d=1, beta=5.0)
        sol = solve_saddle(params, LatticeSpec(1, 64))
        assert sol.mode == "finite_N"
        assert abs(sol.f_per_site - solve_saddle(params).f_per_site) < 1e-3


class TestGroundEnergy:
    def test_closed_points(self):
        assert ground_energy(1.0, 0.0, 0.0, 3) == pytest.approx(-3.0, abs=1e-14)
        assert ground_energy(1.0, 5.0, 0.0, 1) == pytest.approx(-5.0, abs=1e-14)
        assert ground_energy(1.0, 1.0, 0.0, 1) == pytest.approx(-1.25, abs=1e-14)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_branches_meet_at_critical_field(self, d):
        b = 2.0 * d  # J = 1
        pinned = -(d + b * b / (4.0 * d))
        free = -b
        assert pinned == pytest.approx(free, abs=1e-12)
        assert ground_energy(1.0, b, 0.0, d) == pytest.approx(free, abs=1e-12)

    def test_longitudinal_field_lowers_energy_then_extrapolates(self):
        base = ground_energy(1.0, 1.0, 0.0, 1)
        with_field = ground_energy(1.0, 1.0, 1e-2, 1)
        assert with_field < base  # -e(u) decreases: field adds energy scale
        extrap = ground_energy_h_extrapolated(1.0, 1.0, 1)
        assert extrap == pytest.approx(base, abs=1e-6)

    def test_extrapolation_at_branch_point(self):
        assert ground_energy_h_extrapolated(1.0, 2.0, 1) == pytest.approx(-2.0, abs=1e-6)

    def test_monotone_nonincreasing_in_field(self):
        for d in (1, 2):
            vals = [ground_energy_h_extrapolated(1.0, b, d) for b in np.linspace(0.0, 5.0 * d, 21)]
            assert all(a >= b - 1e-10 for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            ground_energy(0.0, 1.0)
        with pytest.raises(ValueError):
            ground_energy(1.0, -1.0)


class TestFreeEnergyFiniteBeta:
    def test_monotone_approach_above_critical_field(self):
        fs = [
            free_energy_finite_beta(SphericalParams(J=1.0, B=5.0, H=0.0, d=1, beta=beta)).value
            for beta in (10.0, 20.0, 40.0)
        ]
        assert fs[0] > fs[1] > fs[2] > -5.0
        assert abs(fs[2] + 5.0) < 0.2

    def test_two_limit_extrapolation_point(self):
        res = free_energy_finite_beta(SphericalParams(J=1.0, B=1.0, H=1e-4, d=1, beta=1e4))
        assert res.value == pytest.approx(-1.25, abs=1e-2)
        assert res.method == "saddle"

    def test_finite_and_limit_modes_agree(self):
        params = SphericalParams(J=1.0, B=3.0, H=0.0, d=1, beta=5.0)
        f_lat = free_energy_finite_beta(params, LatticeSpec(1, 64)).value
        f_lim = free_energy_finite_beta(params).value
        assert abs(f_lat - f_lim) < 1e-3


@pytest.mark.parametrize("j,d,expected", [(1.0, 1, 0.5), (1.0, 3, 1.0 / 6.0), (2.0, 2, 0.125)])
def test_susceptibility(j, d, expected):
    assert susceptibility_at_zero_field(j, d) == pytest.approx(expected, abs=1e-6)


def test_params_validation():
    with pytest.raises(ValueError):
        SphericalParams(J=-1.0, B=0.0, H=0.0, d=1, beta=1.0)
    with pytest.raises(ValueError):
        SphericalParams(J=1.0, B=-0.1, H=0.0, d=1, beta=1.0)
    with pytest.raises(ValueError):
        SphericalParams(J=1.0, B=0.0, H=0.0, d=0, beta=1.0)
    with pytest.raises(ValueError):
        SphericalParams(J=1.0, B=0.0, H=0.0, d=1, beta=0.0)
