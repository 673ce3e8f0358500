"""Engel-Dreizler relativistic TFWD functional on radial densities.

Units are Hartree atomic units throughout.  The functional is

    E(rho) = W(rho) + TF(rho) - X(rho) + V(rho)

with the Fermi momentum p = (3 pi^2 rho)^(1/3) and t = p / c.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import radial, specfun
from .radial import RadialDensity

log = logging.getLogger(__name__)

C_LIGHT = 137.037
LAMBDA_DEFAULT = 1.0 / 9.0
GAMMA_TF = (3.0 * math.pi**2) ** (2.0 / 3.0)

__all__ = [
    "C_LIGHT",
    "LAMBDA_DEFAULT",
    "GAMMA_TF",
    "AtomicSystem",
    "MolecularSystem",
    "EnergyBreakdown",
    "weizsacker_energy",
    "tf_energy",
    "exchange_energy",
    "weizsacker_reference",
    "nonrel_tf_kinetic",
    "dirac_exchange",
    "lemma0_pointwise",
    "domain_check",
    "total_energy_atomic",
    "total_energy_molecular",
]


@dataclass(frozen=True)
class AtomicSystem:
    Z: float
    c: float = C_LIGHT
    lam: float = LAMBDA_DEFAULT

    def __post_init__(self):
        if self.Z < 0:
            raise ValueError("Z must be nonnegative")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")

    @property
    def kappa(self) -> float:
        return self.Z / self.c

    @classmethod
    def from_kappa(cls, Z: float, kappa: float, lam: float = LAMBDA_DEFAULT) -> "AtomicSystem":
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        return cls(Z=Z, c=Z / kappa, lam=lam)


@dataclass(frozen=True, eq=False)
class MolecularSystem:
    centers: np.ndarray
    charges: np.ndarray
    c: float = C_LIGHT
    lam: float = LAMBDA_DEFAULT

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.centers, dtype=float))
        Zs = np.atleast_1d(np.asarray(self.charges, dtype=float))
        if R.shape[-1] != 3 or R.shape[0] != Zs.size:
            raise ValueError("need one 3-vector center per charge")
        if np.any(Zs < 0):
            raise ValueError("nuclear charges must be nonnegative")
        if R.shape[0] > 1:
            d = np.linalg.norm(R[:, None, :] - R[None, :, :], axis=-1)
            if np.any(d[np.triu_indices(R.shape[0], 1)] <= 0):
                raise ValueError("nuclear positions must be pairwise distinct")
        object.__setattr__(self, "centers", R)
        object.__setattr__(self, "charges", Zs)

    def repulsion(self) -> float:
        R, Zs = self.centers, self.charges
        total = 0.0
        for k in range(len(Zs)):
            for l in range(k + 1, len(Zs)):
                total += Zs[k] * Zs[l] / float(np.linalg.norm(R[k] - R[l]))
        return total


@dataclass
class EnergyBreakdown:
    """TFWD terms in Hartree; ``total = W + TF - X + V_ne + D_ee + U_nn``."""

    W: float
    TF: float
    X: float
    V_ne: float
    D_ee: float
    U_nn: float
    N: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = self.W + self.TF - self.X + self.V_ne + self.D_ee + self.U_nn

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in ("W", "TF", "X", "V_ne", "D_ee", "U_nn", "total", "N")}

    def to_json(self, **kw) -> str:
        return json.dumps({**self.to_dict(), "units": "Hartree"}, **kw)


def _t(rho: RadialDensity, c: float) -> tuple[np.ndarray, np.ndarray]:
    p = radial.fermi_momentum(rho.rho)
    return p, p / c


def weizsacker_energy(rho: RadialDensity, sys: AtomicSystem) -> float:
    """W = int (3 lam / 8 pi^2) (dp/dr)^2 c f(p/c)^2."""
    p, t = _t(rho, sys.c)
    dp = radial.radial_gradient(rho.grid, p)
    dens = 3.0 * sys.lam / (8.0 * math.pi**2) * dp**2 * sys.c * specfun.f_sq(t)
    dens = np.where(rho.rho > 0, dens, 0.0)
    return radial.integrate_radial(rho.grid, dens, origin=True)


def tf_energy(rho: RadialDensity, sys: AtomicSystem) -> float:
    _, t = _t(rho, sys.c)
    dens = sys.c**5 / (8.0 * math.pi**2) * specfun.tf_fn(t)
    return radial.integrate_radial(rho.grid, dens, origin=True)


def exchange_energy(rho: RadialDensity, sys: AtomicSystem) -> float:
    _, t = _t(rho, sys.c)
    dens = sys.c**4 / (8.0 * math.pi**3) * specfun.x_fn(t)
    return radial.integrate_radial(rho.grid, dens, origin=True)


def weizsacker_reference(rho: RadialDensity) -> float:
    """int |grad sqrt(rho)|^2 (no prefactor)."""
    dpsi = radial.radial_gradient(rho.grid, np.sqrt(rho.rho))
    return radial.integrate_radial(rho.grid, dpsi**2, origin=True)


def nonrel_tf_kinetic(rho: RadialDensity) -> float:
    return 0.3 * GAMMA_TF * radial.integrate_radial(rho.grid, rho.rho ** (5.0 / 3.0), origin=True)


def dirac_exchange(rho: RadialDensity) -> float:
    return 0.75 * (3.0 / math.pi) ** (1.0 / 3.0) * radial.integrate_radial(rho.grid, rho.rho ** (4.0 / 3.0), origin=True)


def lemma0_pointwise(rho: RadialDensity, c: float) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of (3/8 pi^2)|p'|^2 c f(p/c)^2 <= |(sqrt rho)'|^2 at each node.

    p' is taken from the differenced sqrt(rho) by the chain rule,
    p' = (2/3) p psi'/psi with psi = sqrt(rho), so both sides share one
    discrete derivative.  Nodes with rho = 0 report 0 on the left.
    """
    psi = np.sqrt(rho.rho)
    dpsi = radial.radial_gradient(rho.grid, psi)
    p = radial.fermi_momentum(rho.rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(psi > 0, 2.0 / 3.0 * p * dpsi / psi, 0.0)
    lhs = 3.0 / (8.0 * math.pi**2) * dp**2 * c * specfun.f_sq(p / c)
    return lhs, dpsi**2


def domain_check(rho: RadialDensity, c: float = C_LIGHT) -> None:
    """Discrete membership test for the functional's natural domain.

    Raises ``specfun.DomainError`` naming the first violated condition.
    """
    grid = rho.grid
    with np.errstate(over="ignore", invalid="ignore"):
        checks = {
            "rho >= 0": bool(np.all(rho.rho >= 0)),
            "int rho^(4/3) finite": math.isfinite(radial.integrate_radial(grid, rho.rho ** (4.0 / 3.0))),
            "D[rho] finite": math.isfinite(radial.coulomb_self_energy(rho)),
        }
        p = radial.fermi_momentum(rho.rho)
        # d/dr F(p/c) = f(p/c) p' / c
        grad_F = specfun.f_sq(p / c) * (radial.radial_gradient(grid, p) / c) ** 2
        checks["int |grad F(p/c)|^2 finite"] = math.isfinite(radial.integrate_radial(grid, grad_F))
    for name, ok in checks.items():
        if not ok:
            raise specfun.DomainError(f"density outside the functional's domain: {name} violated")


def total_energy_atomic(rho: RadialDensity, sys: AtomicSystem) -> EnergyBreakdown:
    domain_check(rho, sys.c)
    phi = radial.hartree_potential(rho)
    return EnergyBreakdown(
        W=weizsacker_energy(rho, sys),
        TF=tf_energy(rho, sys),
        X=exchange_energy(rho, sys),
        V_ne=radial.nuclear_attraction(rho, sys.Z) if sys.Z > 0 else 0.0,
        D_ee=radial.coulomb_self_energy(rho, phi),
        U_nn=0.0,
        N=rho.N,
    )


class _SphericalPart:
    """A spherical density placed at ``center`` with its Hartree data."""

    def __init__(self, rho: RadialDensity, center):
        self.rho = rho
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.phi = radial.hartree_potential(rho)
        self.N = rho.N
        r = rho.grid.nodes
        # G(s) = int_0^s t Phi(t) dt, extended linearly (t Phi = N) beyond the grid
        head = 0.5 * self.phi[0] * r[0] ** 2
        G = head + radial._cumulative(rho.grid, r * self.phi)
        self._G = CubicSpline(np.log(r), G)
        self._G_end = float(G[-1])
        support = r[rho.rho > 0]
        self.support = float(support[-1]) if support.size else 0.0

    def potential(self, d):
        return radial.potential_at(self.rho.grid, self.phi, self.N, d)

    def G(self, s):
        s = np.asarray(s, dtype=float)
        r = self.rho.grid.nodes
        out = np.empty_like(s)
        lo, hi = s < r[0], s > r[-1]
        mid = ~(lo | hi)
        out[mid] = self._G(np.log(s[mid]))
        out[lo] = 0.5 * self.phi[0] * s[lo] ** 2
        out[hi] = self._G_end + self.N * (s[hi] - r[-1])
        return out

    def shell_average(self, r, d: float):
        """Average of this part's potential over a sphere of radius r at distance d."""
        r = np.asarray(r, dtype=float)
        if d == 0.0:
            return self.potential(r)
        out = np.empty_like(r)
        tiny = r < 1e-4 * d
        out[tiny] = self.potential(np.array([d]))[0]
        rr = r[~tiny]
        out[~tiny] = (self.G(rr + d) - self.G(np.abs(rr - d))) / (2.0 * rr * d)
        return out


def total_energy_molecular(
    parts: Sequence[tuple[RadialDensity, Sequence[float]]], sys: MolecularSystem
) -> EnergyBreakdown:
    """TFWD energy of a superposition of spherical densities.

    Electrostatics is exact by Newton's theorem.  The local terms W, TF and X
    are summed part by part, which is exact when the parts do not overlap.
    """
    sph = [_SphericalPart(rho, ctr) for rho, ctr in parts]
    atomic = AtomicSystem(Z=0.0, c=sys.c, lam=sys.lam)
    W = TF = X = 0.0
    D = 0.0
    V = 0.0
    for i, part in enumerate(sph):
        domain_check(part.rho, sys.c)
        W += weizsacker_energy(part.rho, atomic)
        TF += tf_energy(part.rho, atomic)
        X += exchange_energy(part.rho, atomic)
        D += radial.coulomb_self_energy(part.rho, part.phi)
        for Zk, Rk in zip(sys.charges, sys.centers):
            if Zk == 0:
                continue
            d = float(np.linalg.norm(Rk - part.center))
            if d == 0.0:
                V += radial.nuclear_attraction(part.rho, Zk)
            else:
                V -= Zk * float(part.potential(np.array([d]))[0])
        for other in sph[i + 1 :]:
            d = float(np.linalg.norm(other.center - part.center))
            if part.support + other.support > d:
                log.warning("spherical parts overlap; local terms W, TF, X are not additive there")
            g = part.rho.grid
            D += radial.integrate_radial(g, part.rho.rho * other.shell_average(g.nodes, d))
    N = sum(p.N for p in sph)
    return EnergyBreakdown(W=W, TF=TF, X=X, V_ne=V, D_ee=D, U_nn=sys.repulsion(), N=N)
