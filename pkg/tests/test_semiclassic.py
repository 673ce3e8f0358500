import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfwd import bounds, radial, semiclassic
from tfwd.edf import GAMMA_TF


@pytest.fixture(scope="module")
def universal():
    return semiclassic.solve_tf_universal()


class TestUniversal:
    def test_boundary_values(self, universal):
        assert universal(0.0) == 1.0
        assert universal(1e-12) == pytest.approx(1.0, abs=1e-11)

    def test_initial_slope(self, universal):
        assert universal.slope == pytest.approx(-1.5880710, abs=5e-8)

    def test_slope_independent_of_step(self, universal):
        fine = semiclassic.solve_tf_universal(max_step=0.05)
        assert fine.slope == pytest.approx(universal.slope, abs=1e-7)

    def test_positive_convex_decreasing(self, universal):
        x = np.geomspace(1e-6, 1e6, 2000)
        y = universal(x)
        assert np.all(y > 0)
        assert np.all(np.diff(y) < 0)
        assert np.all(universal.derivative(x) < 0)

    def test_equation_residual(self, universal):
        # integrated form of y'' = y^(3/2)/sqrt(x): y'(b) - y'(a) = int_a^b y^(3/2)/sqrt(x) dx
        from scipy.integrate import quad

        for a, b in [(1e-3, 0.1), (0.1, 1.0), (1.0, 10.0), (10.0, 100.0)]:
            rhs, _ = quad(lambda x: universal(x) ** 1.5 / math.sqrt(x), a, b, epsabs=0, epsrel=1e-11, limit=200)
            lhs = universal.derivative(b) - universal.derivative(a)
            assert lhs == pytest.approx(rhs, rel=1e-7)

    def test_small_x_series(self, universal):
        # y = 1 + y'(0) x + (4/3) x^(3/2) + O(x^2)
        x = 1e-6
        assert universal(x) == pytest.approx(1 + universal.slope * x + 4 / 3 * x**1.5, abs=1e-11)

    def test_sommerfeld_tail(self, universal):
        # x^3 y -> 144 with a deficit decaying like x^(-0.772)
        deficit = [144 - x**3 * universal(x) for x in (1e3, 1e4, 1e5)]
        assert all(d > 0 for d in deficit)
        exponents = [math.log10(a / b) for a, b in zip(deficit, deficit[1:])]
        lam = (math.sqrt(73) - 7) / 2
        assert exponents == pytest.approx([lam, lam], abs=0.03)
        assert 1e3**3 * universal(1e3) == pytest.approx(144, rel=0.07)


class TestTFAtom:
    @pytest.mark.parametrize("Z", [1.0, 10.0, 92.0])
    def test_neutral(self, Z):
        sol = semiclassic.tf_atom(Z)
        assert sol.sigma.N == pytest.approx(Z, rel=1e-6)
        assert np.all(sol.sigma.rho >= 0)

    def test_constant_scale_invariant(self):
        e1 = semiclassic.tf_atom(1.0).e_tf_constant
        e92 = semiclassic.tf_atom(92.0).e_tf_constant
        assert e92 == pytest.approx(e1, rel=1e-6)

    def test_dual_route(self):
        sol = semiclassic.tf_atom(30.0)
        assert sol.e_tf_constant == pytest.approx(0.7687, abs=1e-4)
        assert sol.e_tf_slope == pytest.approx(sol.e_tf_constant, rel=5e-3)

    def test_potential_bounds(self):
        sol = semiclassic.tf_atom(50.0)
        r = np.geomspace(1e-8, 1e3, 1000)
        phi = sol.potential(r)
        assert np.all(phi >= 0)
        assert np.all(phi <= 50.0 / r)
        assert r[0] * phi[0] == pytest.approx(50.0, rel=1e-5)

    def test_potential_matches_hartree(self):
        # phi_sigma = Z/r - sigma * |x|^-1
        sol = semiclassic.tf_atom(20.0)
        r = sol.sigma.grid.nodes
        mid = (r > 1e-3) & (r < 10)
        assert np.allclose(sol.phi_sigma[mid], (20.0 / r - sol.hartree_sigma)[mid], rtol=1e-6)

    def test_potential_tail(self):
        sol = semiclassic.tf_atom(10.0)
        r = np.array([1e2, 1e3])
        r4phi = r**4 * sol.potential(r)
        assert np.all(r4phi < 144 * sol.length_scale**3 * 10.0)

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            semiclassic.tf_potential_at(semiclassic.tf_atom(10.0), 0.0)
        with pytest.raises(ValueError):
            semiclassic.tf_atom(0.0)

    def test_energy_from_functional(self):
        sol = semiclassic.tf_atom(10.0)
        s = sol.sigma
        kin = 0.3 * GAMMA_TF * radial.integrate_radial(s.grid, s.rho ** (5 / 3), origin=True)
        E = kin + radial.nuclear_attraction(s, 10.0) + sol.D_sigma
        assert E == pytest.approx(sol.E_TF, rel=1e-12)
        assert sol.E_TF == pytest.approx(-sol.e_tf_constant * 10 ** (7 / 3), rel=1e-12)

    def test_D_sigma_shared_with_bounds(self):
        lo = bounds.lower_bound(20.0, 1.0)
        assert lo.D_sigma == semiclassic.tf_atom(20.0).D_sigma


class TestTFW:
    @pytest.mark.parametrize("Z", [10.0, 50.0, 90.0])
    def test_excess_charge_window(self, Z):
        sol = semiclassic.solve_tfw(Z)
        assert Z <= sol.rho_W.N <= Z + 1
        assert sol.el_residual < 1e-6

    def test_energy_decreases_along_iterations(self):
        sol = semiclassic.solve_tfw(30.0)
        hist = np.array(sol.energy_history)
        assert np.all(np.diff(hist) <= 1e-14 * abs(hist[-1]))

    def test_gap_scales_like_Z2(self):
        Z = np.arange(10.0, 100.0, 10.0)
        gap = np.array([semiclassic.solve_tfw(z).energy - semiclassic.tf_atom(z).E_TF for z in Z])
        assert np.all(gap > 0)
        A = np.vstack([Z**2, np.ones_like(Z)]).T
        coef, *_ = np.linalg.lstsq(A, gap, rcond=None)
        r2 = 1 - np.sum((gap - A @ coef) ** 2) / np.sum((gap - gap.mean()) ** 2)
        assert r2 > 0.999
        assert coef[0] > 0

    def test_beta_monotone(self):
        assert semiclassic.solve_tfw(20.0, beta=4.0).energy >= semiclassic.solve_tfw(20.0, beta=2.0).energy

    def test_grid_refinement(self):
        a = semiclassic.solve_tfw(20.0).energy
        b = semiclassic.solve_tfw(20.0, nodes=8000).energy
        assert abs(b / a - 1) < 1e-5

    def test_energy_matches_functional(self):
        sol = semiclassic.solve_tfw(20.0)
        assert sol.energy == pytest.approx(semiclassic.nonrel_tfw_energy(sol.rho_W, 20.0, 2.0), rel=1e-14)
        assert sol.energy == pytest.approx(sol.discrete_energy, rel=1e-6)

    def test_nonconvergence_raises_with_history(self):
        with pytest.raises(semiclassic.SolverError) as info:
            semiclassic.solve_tfw(7.0, nodes=1000, tol=1e-30, max_iter=3)
        assert len(info.value.history) == 3

    def test_invalid(self):
        with pytest.raises(ValueError):
            semiclassic.solve_tfw(-1.0)
        with pytest.raises(ValueError):
            semiclassic.solve_tfw(10.0, beta=0.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.5, max_value=200.0))
def test_property_tf_scaling(Z):
    sol = semiclassic.tf_atom(Z, nodes=3001)
    assert sol.e_tf_constant == pytest.approx(0.768745, rel=1e-5)
    assert sol.sigma.N == pytest.approx(Z, rel=1e-6)
