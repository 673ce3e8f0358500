import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfwd import radial
from tfwd.checks import random_density
from tfwd.radial import RadialDensity, RadialGrid


def uniform_ball(N=2.0, R=1.3, n=4001):
    grid = radial.log_grid(1e-6 * R, R, n)
    return RadialDensity(grid, np.full(grid.size, N / (4 / 3 * math.pi * R**3)))


class TestGrid:
    def test_invariants(self):
        g = radial.log_grid(1e-5, 10.0, 1001)
        assert np.all(np.diff(g.nodes) > 0) and g.nodes[0] > 0
        assert np.all(g.weights > 0)

    @pytest.mark.parametrize("n", [1001, 1000])
    def test_shell_volume(self, n):
        g = radial.log_grid(1.0, 2.0, n)
        assert radial.integrate_radial(g, np.ones(n)) == pytest.approx(4 * math.pi / 3 * 7, rel=1e-10)

    def test_linear_grid_volume(self):
        g = radial.linear_grid(1.0, 2.0, 101)
        assert radial.integrate_radial(g, np.ones(101)) == pytest.approx(4 * math.pi / 3 * 7, rel=1e-10)

    def test_rejects_bad_nodes(self):
        with pytest.raises(ValueError):
            RadialGrid(np.array([1.0, 0.5, 2.0]), np.ones(3))
        with pytest.raises(ValueError):
            radial.log_grid(0.0, 1.0, 10)
        with pytest.raises(ValueError):
            radial.simpson_weights(2, 0.1)

    def test_default_grid_range(self):
        g = radial.default_grid(10.0)
        assert g.size == 4000
        assert g.r_min == pytest.approx(1e-7)


class TestIntegrate:
    def test_zero(self):
        g = radial.log_grid(1e-6, 50, 2001)
        assert radial.integrate_radial(g, np.zeros(g.size)) == 0.0

    def test_exponential(self):
        g = radial.log_grid(1e-6, 50, 4001)
        assert radial.integrate_radial(g, np.exp(-g.nodes)) == pytest.approx(8 * math.pi, rel=1e-8)

    def test_length_mismatch(self):
        g = radial.log_grid(1e-6, 50, 101)
        with pytest.raises(ValueError):
            radial.integrate_radial(g, np.ones(100))

    def test_origin_correction_power_law(self):
        # r^(-3/2) has int_0^1 4 pi r^2 r^(-3/2) dr = 8 pi / 3; the head below r_1 is added analytically
        g = radial.log_grid(1e-4, 1.0, 2001)
        v = g.nodes**-1.5
        assert radial.integrate_radial(g, v, origin=True) == pytest.approx(8 * math.pi / 3, rel=1e-8)


class TestGradient:
    g = radial.log_grid(1e-3, 10, 20001)
    interior = slice(1, -1)

    def test_constant(self):
        assert np.allclose(radial.radial_gradient(self.g, np.full(self.g.size, 3.0)), 0, atol=1e-12)

    def test_square(self):
        r = self.g.nodes
        d = radial.radial_gradient(self.g, r**2)
        assert np.allclose(d[self.interior], 2 * r[self.interior], rtol=1e-6)

    def test_exponential(self):
        r = self.g.nodes
        d = radial.radial_gradient(self.g, np.exp(-r))
        assert np.allclose(d[self.interior], -np.exp(-r[self.interior]), atol=1e-5)

    def test_linear_grid(self):
        g = radial.linear_grid(0.1, 2, 2001)
        assert np.allclose(radial.radial_gradient(g, g.nodes**2)[1:-1], 2 * g.nodes[1:-1], rtol=1e-6)


class TestElectrostatics:
    def test_zero_density(self):
        g = radial.log_grid(1e-6, 10, 501)
        rho = RadialDensity.zero(g)
        assert np.all(radial.hartree_potential(rho) == 0)
        assert radial.coulomb_self_energy(rho) == 0
        assert radial.nuclear_attraction(rho, 3.0) == 0

    def test_uniform_ball_potential(self):
        N, R = 2.0, 1.3
        rho = uniform_ball(N, R)
        r = rho.grid.nodes
        phi = radial.hartree_potential(rho)
        assert np.allclose(phi, N * (3 * R**2 - r**2) / (2 * R**3), rtol=1e-8)
        out = np.array([1.5, 4.0, 100.0])
        assert np.allclose(radial.potential_at(rho.grid, phi, rho.N, out), N / out, rtol=1e-8)

    def test_uniform_ball_energies(self):
        N, R = 2.0, 1.3
        rho = uniform_ball(N, R)
        assert radial.coulomb_self_energy(rho) == pytest.approx(3 * N**2 / (5 * R), rel=1e-7)
        assert radial.nuclear_attraction(rho, 1.0) == pytest.approx(-3 * N / (2 * R), rel=1e-8)
        assert radial.nuclear_attraction(rho, 2.0) == pytest.approx(2 * radial.nuclear_attraction(rho, 1.0))

    def test_narrow_gaussian_far_field(self):
        g = radial.log_grid(1e-6, 30, 4001)
        w = 0.05
        rho = RadialDensity(g, np.exp(-((g.nodes / w) ** 2)) / (math.pi**1.5 * w**3))
        phi = radial.hartree_potential(rho)
        far = g.nodes > 1.0
        assert np.allclose(phi[far] * g.nodes[far], 1.0, rtol=1e-8)

    def test_gauss_law(self):
        g = radial.log_grid(1e-6, 20, 3001)
        rho = RadialDensity(g, np.where(g.nodes < 5, (5 - g.nodes) ** 2, 0.0))
        phi = radial.hartree_potential(rho)
        assert phi[-1] * g.nodes[-1] == pytest.approx(rho.N, rel=1e-8)

    def test_rphi_increasing(self):
        rho = random_density(np.random.default_rng(1), radial.log_grid(1e-5, 40, 2001))
        rphi = rho.grid.nodes * radial.hartree_potential(rho)
        assert np.all(np.diff(rphi) >= -1e-12 * rphi[-1])

    def test_self_energy_gaussian_mixtures(self):
        # concentric Gaussians q (a/pi)^(3/2) exp(-a r^2) interact with q_i q_j (2/sqrt(pi)) sqrt(a_i a_j / (a_i + a_j))
        rng = np.random.default_rng(5)
        g = radial.log_grid(1e-6, 40, 4001)
        r = g.nodes
        for _ in range(5):
            q = rng.uniform(0.2, 5.0, 3)
            a = 10 ** rng.uniform(-1, 1.5, 3)
            rho = RadialDensity(g, sum(qi * (ai / math.pi) ** 1.5 * np.exp(-ai * r * r) for qi, ai in zip(q, a)))
            exact = 0.5 * sum(
                qi * qj * 2 / math.sqrt(math.pi) * math.sqrt(ai * aj / (ai + aj)) for qi, ai in zip(q, a) for qj, aj in zip(q, a)
            )
            D = radial.coulomb_self_energy(rho)
            assert D >= 0
            assert D == pytest.approx(exact, rel=1e-6)

    def test_bilinear_scaling(self):
        rho = random_density(np.random.default_rng(2), radial.log_grid(1e-5, 40, 1501))
        assert radial.coulomb_self_energy(rho.scaled(3.0)) == pytest.approx(9 * radial.coulomb_self_energy(rho), rel=1e-12)


class TestDensity:
    def test_negative_rejected(self):
        g = radial.log_grid(1e-3, 1, 11)
        with pytest.raises(ValueError):
            RadialDensity(g, -np.ones(11))

    def test_fermi_roundtrip(self):
        rho = random_density(np.random.default_rng(4), radial.log_grid(1e-5, 40, 1001))
        back = rho.fermi_momentum().density()
        mask = rho.rho > 0
        assert np.allclose(back[mask], rho.rho[mask], rtol=1e-12)

    def test_csv_roundtrip(self, tmp_path):
        rho = random_density(np.random.default_rng(6), radial.log_grid(1e-5, 40, 301))
        path = tmp_path / "d.csv"
        radial.write_density_csv(path, rho)
        assert path.read_text().splitlines()[0] == "r,rho"
        back = radial.read_density_csv(path)
        assert np.array_equal(back.grid.nodes, rho.grid.nodes)
        assert np.array_equal(back.rho, rho.rho)
        assert back.N == pytest.approx(rho.N, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_property_self_energy_nonnegative_and_gauss(seed):
    g = radial.log_grid(1e-5, 60, 801)
    rho = random_density(np.random.default_rng(seed), g)
    phi = radial.hartree_potential(rho)
    assert radial.coulomb_self_energy(rho, phi) >= 0
    assert np.all(phi > 0)
    assert phi[-1] * g.nodes[-1] == pytest.approx(rho.N, rel=1e-6)
