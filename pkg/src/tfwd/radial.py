"""Radial grids, quadrature and spherically symmetric electrostatics.

Everything lives on a grid uniform in ln r (or, for tests, uniform in r).
Integrals use composite Simpson weights in the uniform coordinate; the
Jacobian dr/du = r is folded into ``RadialGrid.weights``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

__all__ = [
    "RadialGrid",
    "RadialDensity",
    "FermiMomentumField",
    "log_grid",
    "linear_grid",
    "default_grid",
    "simpson_weights",
    "integrate_radial",
    "origin_correction",
    "hartree_potential",
    "potential_at",
    "enclosed_charge",
    "coulomb_self_energy",
    "nuclear_attraction",
    "radial_gradient",
    "fermi_momentum",
    "write_density_csv",
    "read_density_csv",
]


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n equally spaced nodes of spacing h.

    An even node count finishes with Simpson's 3/8 rule on the last three panels.
    """
    if n < 3:
        raise ValueError("Simpson quadrature needs at least 3 nodes")
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 3  # nodes covered by the 1/3 rule
    if m >= 3:
        w[:m:2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m - 1] -= 1.0
        w[:m] *= h / 3.0
    if n % 2 == 0:
        w[n - 4 : n] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radial nodes (Bohr) with quadrature weights for int dr."""

    nodes: np.ndarray
    weights: np.ndarray
    scheme: str = "log"
    step: float = field(default=0.0)

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        if r.ndim != 1 or r.size < 3:
            raise ValueError("a radial grid needs at least 3 nodes")
        if r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise ValueError("grid nodes must be positive and strictly increasing")
        r.setflags(write=False)
        w = np.asarray(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def volume_weights(self) -> np.ndarray:
        """Weights for int 4 pi r^2 dr."""
        return 4.0 * math.pi * self.nodes**2 * self.weights

    def coordinate(self) -> np.ndarray:
        """The uniform integration coordinate (ln r or r)."""
        return np.log(self.nodes) if self.scheme == "log" else self.nodes.copy()


def log_grid(r_min: float, r_max: float, n: int) -> RadialGrid:
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    u = np.linspace(math.log(r_min), math.log(r_max), n)
    h = u[1] - u[0]
    r = np.exp(u)
    return RadialGrid(r, simpson_weights(n, h) * r, "log", h)


def linear_grid(r_min: float, r_max: float, n: int) -> RadialGrid:
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    r = np.linspace(r_min, r_max, n)
    h = r[1] - r[0]
    return RadialGrid(r, simpson_weights(n, h), "linear", h)


def default_grid(Z: float, nodes: int = 4000, r_min_factor: float = 1e-6, r_max_factor: float = 50.0) -> RadialGrid:
    """Log grid resolving both the Coulomb tooth r < 1/Z and the TF scale Z^(-1/3)."""
    Z = max(float(Z), 1e-12)
    r_min = r_min_factor / max(Z, 1.0)
    r_max = r_max_factor * Z ** (-1.0 / 3.0) * max(1.0, Z ** (1.0 / 3.0))
    return log_grid(r_min, r_max, nodes)


def _check_values(grid: RadialGrid, values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.shape != grid.nodes.shape:
        raise ValueError(f"value array of shape {v.shape} does not match grid of {grid.size} nodes")
    return v


def origin_correction(grid: RadialGrid, values) -> float:
    """int_0^{r_1} 4 pi r^2 v dr assuming v ~ v_1 (r/r_1)^k near the origin."""
    v = _check_values(grid, values)
    r1, r2 = grid.nodes[0], grid.nodes[1]
    v1, v2 = v[0], v[1]
    k = 0.0
    if v1 > 0 and v2 > 0:
        k = math.log(v2 / v1) / math.log(r2 / r1)
        k = min(max(k, -2.9), 10.0)
    return 4.0 * math.pi * v1 * r1**3 / (3.0 + k)


def integrate_radial(grid: RadialGrid, values, origin: bool = False) -> float:
    """int 4 pi r^2 v(r) dr over [r_1, r_N]; ``origin`` adds the [0, r_1] piece."""
    v = _check_values(grid, values)
    total = float(np.dot(grid.volume_weights, v))
    if origin:
        total += origin_correction(grid, v)
    return total


def radial_gradient(grid: RadialGrid, values) -> np.ndarray:
    """dv/dr by second-order central differences, one-sided at the ends.

    On a log grid the differences are taken in the uniform coordinate ln r
    and divided by r, which is far more accurate than differencing in r.
    """
    v = _check_values(grid, values)
    if grid.scheme == "log":
        spacing = grid.step if grid.step > 0 else grid.coordinate()
        return np.gradient(v, spacing, edge_order=2) / grid.nodes
    return np.gradient(v, grid.nodes, edge_order=2)


def fermi_momentum(rho) -> np.ndarray:
    """p = (3 pi^2 rho)^(1/3) in 1/Bohr."""
    return np.cbrt(3.0 * math.pi**2 * np.asarray(rho, dtype=float))


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Nonnegative spherically symmetric density (electrons / Bohr^3)."""

    grid: RadialGrid
    rho: np.ndarray
    N: float = field(init=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.shape != self.grid.nodes.shape:
            raise ValueError("density and grid sizes differ")
        if not np.all(np.isfinite(rho)):
            raise ValueError("density contains non-finite values")
        if np.any(rho < 0):
            raise ValueError("density must be nonnegative")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "N", integrate_radial(self.grid, rho, origin=True))

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "RadialDensity":
        return cls(grid, fn(grid.nodes))

    @classmethod
    def zero(cls, grid: RadialGrid) -> "RadialDensity":
        return cls(grid, np.zeros(grid.size))

    def scaled(self, factor: float) -> "RadialDensity":
        return RadialDensity(self.grid, factor * self.rho)

    def fermi_momentum(self) -> "FermiMomentumField":
        return FermiMomentumField(self.grid, fermi_momentum(self.rho))


@dataclass(frozen=True, eq=False)
class FermiMomentumField:
    grid: RadialGrid
    p: np.ndarray

    def density(self) -> np.ndarray:
        return np.asarray(self.p) ** 3 / (3.0 * math.pi**2)


def _cumulative(grid: RadialGrid, integrand_dr: np.ndarray) -> np.ndarray:
    """Running integral int_{r_1}^{r_i} f dr with the grid's Simpson-type rule."""
    x = grid.coordinate()
    y = integrand_dr * grid.nodes if grid.scheme == "log" else integrand_dr
    return cumulative_simpson(y, x=x, initial=0.0)


def enclosed_charge(rho: RadialDensity) -> np.ndarray:
    """Q(r) = int_0^r 4 pi s^2 rho(s) ds at every node."""
    r = rho.grid.nodes
    head = origin_correction(rho.grid, rho.rho)
    return head + _cumulative(rho.grid, 4.0 * math.pi * r**2 * rho.rho)


def hartree_potential(rho: RadialDensity) -> np.ndarray:
    """Phi(r) = Q(r)/r + int_r^inf 4 pi s rho(s) ds (Newton's theorem)."""
    r = rho.grid.nodes
    inner = enclosed_charge(rho)
    run = _cumulative(rho.grid, 4.0 * math.pi * r * rho.rho)
    outer = run[-1] - run
    return inner / r + outer


def potential_at(grid: RadialGrid, phi: np.ndarray, charge: float, r) -> np.ndarray:
    """Evaluate a spherical potential at arbitrary radii.

    Inside the grid r*phi is interpolated in ln r; beyond it phi = charge/r,
    and below the first node the potential is taken as flat.
    """
    r = np.asarray(r, dtype=float)
    nodes = grid.nodes
    spline = CubicSpline(np.log(nodes), nodes * phi)
    out = np.empty_like(r, dtype=float)
    inside = (r >= nodes[0]) & (r <= nodes[-1])
    out[inside] = spline(np.log(r[inside])) / r[inside]
    out[r > nodes[-1]] = charge / r[r > nodes[-1]]
    out[r < nodes[0]] = phi[0]
    return out


def coulomb_self_energy(rho: RadialDensity, phi: np.ndarray | None = None) -> float:
    """D[rho] = 1/2 int rho Phi."""
    if phi is None:
        phi = hartree_potential(rho)
    return 0.5 * integrate_radial(rho.grid, rho.rho * phi, origin=True)


def nuclear_attraction(rho: RadialDensity, Z: float) -> float:
    """-Z int rho / |x|."""
    if Z < 0:
        raise ValueError("nuclear charge must be nonnegative")
    return -Z * integrate_radial(rho.grid, rho.rho / rho.grid.nodes, origin=True)


def write_density_csv(path, density: RadialDensity) -> None:
    """Write columns ``r,rho`` (Bohr, electrons/Bohr^3) with a header row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "rho"])
        for r, v in zip(density.grid.nodes, density.rho):
            w.writerow([repr(float(r)), repr(float(v))])


def read_density_csv(path) -> RadialDensity:
    """Read a ``r,rho`` CSV; the nodes must be uniform in ln r or in r."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["r", "rho"]:
        raise ValueError("density CSV must start with the header 'r,rho'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    r, rho = data[:, 0], data[:, 1]
    if r.size < 3:
        raise ValueError("density CSV needs at least 3 rows")
    lr = np.diff(np.log(r))
    dr = np.diff(r)
    if np.allclose(lr, lr.mean(), rtol=1e-8, atol=0):
        grid = log_grid(r[0], r[-1], r.size)
    elif np.allclose(dr, dr.mean(), rtol=1e-8, atol=0):
        grid = linear_grid(r[0], r[-1], r.size)
    else:
        raise ValueError("density CSV nodes are neither log- nor linearly spaced")
    return RadialDensity(grid, rho)
