import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfwd import bounds, edf, radial, semiclassic, specfun
from tfwd.checks import random_density
from tfwd.edf import AtomicSystem, EnergyBreakdown, MolecularSystem
from tfwd.radial import RadialDensity

GRID = radial.log_grid(1e-5, 40.0, 3001)


def gaussian(grid=GRID, N=3.0, w=0.8):
    return RadialDensity(grid, N * np.exp(-((grid.nodes / w) ** 2)) / (math.pi**1.5 * w**3))


def ball(N, R, n=2001):
    g = radial.log_grid(1e-6 * R, R, n)
    return RadialDensity(g, np.full(g.size, N / (4 / 3 * math.pi * R**3)))


class TestSystems:
    def test_kappa(self):
        s = AtomicSystem(Z=92.0)
        assert s.kappa == pytest.approx(92 / 137.037, rel=1e-14)
        assert AtomicSystem.from_kappa(50.0, 1.0).c == 50.0

    @pytest.mark.parametrize("kw", [{"Z": -1.0}, {"Z": 1.0, "c": 0.0}, {"Z": 1.0, "lam": -1.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            AtomicSystem(**kw)

    def test_molecule_distinct_positions(self):
        with pytest.raises(ValueError):
            MolecularSystem(np.zeros((2, 3)), np.ones(2))
        with pytest.raises(ValueError):
            MolecularSystem(np.zeros((2, 3)), np.ones(3))

    def test_breakdown_sum_and_json(self):
        br = EnergyBreakdown(W=1, TF=2, X=0.5, V_ne=-4, D_ee=1, U_nn=0.25, N=3)
        assert br.total == pytest.approx(-0.25)
        d = json.loads(br.to_json())
        assert list(d)[:8] == ["W", "TF", "X", "V_ne", "D_ee", "U_nn", "total", "N"]
        assert d["units"] == "Hartree"


class TestTerms:
    sys = AtomicSystem(Z=0.0)

    def test_zero_density(self):
        rho = RadialDensity.zero(GRID)
        for fn in (edf.weizsacker_energy, edf.tf_energy, edf.exchange_energy):
            assert fn(rho, self.sys) == 0.0
        br = edf.total_energy_atomic(rho, AtomicSystem(Z=5.0))
        assert br.total == 0 and br.W == 0 and br.V_ne == 0

    def test_signs(self):
        rho = gaussian()
        br = edf.total_energy_atomic(rho, AtomicSystem(Z=3.0))
        assert br.W >= 0 and br.TF >= 0 and br.D_ee >= 0 and br.V_ne < 0
        assert br.total == pytest.approx(br.W + br.TF - br.X + br.V_ne + br.D_ee)

    def test_zero_Z(self):
        rho = gaussian()
        br = edf.total_energy_atomic(rho, AtomicSystem(Z=0.0))
        assert br.V_ne == 0
        assert br.total == pytest.approx(br.W + br.TF - br.X + br.D_ee)

    def test_nonrelativistic_limits(self):
        rho = gaussian()
        sys = AtomicSystem(Z=0.0, c=1e8)
        assert edf.weizsacker_energy(rho, sys) == pytest.approx(sys.lam / 2 * edf.weizsacker_reference(rho), rel=1e-4)
        assert edf.tf_energy(rho, sys) == pytest.approx(edf.nonrel_tf_kinetic(rho), rel=1e-4)
        assert edf.exchange_energy(rho, sys) == pytest.approx(edf.dirac_exchange(rho), rel=1e-4)

    def test_nonrelativistic_limits_monotone_in_c(self):
        rho = gaussian(N=30.0, w=0.3)
        targets = {
            edf.weizsacker_energy: 1 / 18 * edf.weizsacker_reference(rho),
            edf.tf_energy: edf.nonrel_tf_kinetic(rho),
            edf.exchange_energy: edf.dirac_exchange(rho),
        }
        for fn, ref in targets.items():
            errs = [abs(fn(rho, AtomicSystem(Z=0.0, c=c)) / ref - 1) for c in (1e2, 1e4, 1e6, 1e8)]
            assert errs[0] > errs[1] > errs[2]
            assert errs[3] < 1e-4

    def test_dirac_constant_identity(self):
        assert (3 * math.pi**2) ** (4 / 3) / (4 * math.pi**3) == pytest.approx(0.75 * (3 / math.pi) ** (1 / 3), rel=1e-14)

    def test_tf_quintic_bound(self):
        rho = gaussian(N=50.0, w=0.2)
        sys = AtomicSystem(Z=0.0, c=2.0)
        C5, _ = specfun.tf_quintic_constant()
        p = radial.fermi_momentum(rho.rho)
        bound = sys.c**5 / (8 * math.pi**2) * C5 * radial.integrate_radial(GRID, (p / sys.c) ** 5, origin=True)
        assert edf.tf_energy(rho, sys) <= bound

    def test_exchange_linear_bound(self):
        rng = np.random.default_rng(11)
        coef = specfun.exchange_linear_coefficient()
        for _ in range(20):
            rho = random_density(rng, GRID)
            c = 10.0 / float(rng.choice([0.1, 0.5, 1.0, 2.0]))
            assert edf.exchange_energy(rho, AtomicSystem(Z=0.0, c=c)) <= coef * c * rho.N

    def test_smaller_coefficient_is_violated(self):
        # with the coefficient eta0/(4 pi) the linear exchange bound fails for a dense density
        # uniform density with p/c at the maximizer of X(t)/t^3 (t ~ 1.02)
        rho = ball(1.0, 0.5)
        c = float(radial.fermi_momentum(rho.rho[0])) / 1.0183
        X = edf.exchange_energy(rho, AtomicSystem(Z=0.0, c=c))
        assert X > specfun.eta0(3.0) / (4 * math.pi) * c * rho.N
        assert X <= specfun.exchange_linear_coefficient() * c * rho.N

    def test_lemma0(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            rho = random_density(rng, GRID)
            c = 10 ** rng.uniform(-1, 3)
            lhs, rhs = edf.lemma0_pointwise(rho, c)
            assert np.all(lhs <= rhs + 1e-10 * np.maximum(rhs, 1e-300))
            sys = AtomicSystem(Z=0.0, c=c)
            assert edf.weizsacker_energy(rho, sys) <= sys.lam * edf.weizsacker_reference(rho)

    def test_grid_refinement(self):
        sys = AtomicSystem(Z=3.0)
        coarse = edf.total_energy_atomic(gaussian(radial.log_grid(1e-5, 40, 2001)), sys).total
        fine = edf.total_energy_atomic(gaussian(radial.log_grid(1e-5, 40, 4001)), sys).total
        assert abs(fine / coarse - 1) < 1e-5


class TestDomain:
    def test_negative_density_rejected_at_construction(self):
        with pytest.raises(ValueError):
            RadialDensity(GRID, -np.ones(GRID.size))

    def test_infinite_gradient_rejected(self):
        rho = gaussian()
        vals = rho.rho.copy()
        vals[100] = 1e300
        with pytest.raises(specfun.DomainError, match="violated"):
            edf.total_energy_atomic(RadialDensity(GRID, vals), AtomicSystem(Z=1.0))


def test_atomic_total_matches_upper_bound_pipeline():
    Z, kappa = 50.0, 1.0
    up = bounds.upper_bound(Z, kappa)
    rho = semiclassic.solve_tfw(Z).rho_W
    br = edf.total_energy_atomic(rho, AtomicSystem.from_kappa(Z, kappa))
    assert br.total == up.value


class TestMolecular:
    def test_single_part_equals_atomic(self):
        rho = gaussian()
        mol = edf.total_energy_molecular([(rho, (0, 0, 0))], MolecularSystem(np.zeros((1, 3)), np.array([3.0])))
        at = edf.total_energy_atomic(rho, AtomicSystem(Z=3.0))
        assert mol.total == pytest.approx(at.total, rel=1e-12)

    def test_two_balls_interaction(self):
        R, d = 0.7, 3.1
        a, b = ball(1.0, R), ball(1.0, R)
        zero = MolecularSystem(np.array([[0, 0, 0], [d, 0, 0]], float), np.zeros(2))
        both = edf.total_energy_molecular([(a, (0, 0, 0)), (b, (d, 0, 0))], zero)
        one = edf.total_energy_atomic(a, AtomicSystem(Z=0.0))
        assert both.D_ee - 2 * one.D_ee == pytest.approx(1 / d, rel=1e-8)

    def test_two_protons(self):
        d = 1.4
        mol = edf.total_energy_molecular([], MolecularSystem(np.array([[0, 0, 0], [0, 0, d]], float), np.ones(2)))
        assert mol.total == pytest.approx(1 / d)
        assert mol.N == 0

    def test_off_center_attraction_newton(self):
        # a nucleus outside a spherical part sees it as a point charge
        rho = ball(2.0, 0.5)
        sys = MolecularSystem(np.array([[2.0, 0, 0]]), np.array([1.0]))
        mol = edf.total_energy_molecular([(rho, (0, 0, 0))], sys)
        assert mol.V_ne == pytest.approx(-rho.N / 2.0, rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.5, 1e3))
def test_property_lemma0_pointwise(seed, c):
    rho = random_density(np.random.default_rng(seed), radial.log_grid(1e-5, 40, 1501))
    lhs, rhs = edf.lemma0_pointwise(rho, c)
    assert np.all(lhs <= rhs + 1e-10 * np.maximum(rhs, 1e-300))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 5.0))
def test_property_exchange_linear(seed, kappa):
    rho = random_density(np.random.default_rng(seed), radial.log_grid(1e-5, 40, 1501))
    c = 10.0 / kappa
    X = edf.exchange_energy(rho, AtomicSystem(Z=0.0, c=c))
    assert X <= specfun.exchange_linear_coefficient() * c * rho.N
