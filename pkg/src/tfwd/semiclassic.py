"""Non-relativistic Thomas-Fermi atom and Thomas-Fermi-Weizsaecker minimizer.

The TF screening function y solves y'' = y^(3/2) / sqrt(x), y(0) = 1,
y(inf) = 0.  The initial slope is found by shooting with bisection.  The
forward trajectory is only trustworthy up to x ~ 10^2; the tail is continued
through v = x^3 y as a function of s = ln x, which obeys the autonomous
equation v'' - 7 v' + 12 v = v^(3/2) with the Sommerfeld fixed point v = 144.

TF length scale: r = b Z^(-1/3) x with b = (1/2)(3 pi / 4)^(2/3).
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
from scipy.integrate import solve_bvp, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.sparse.linalg import spsolve

from . import radial
from .edf import GAMMA_TF
from .radial import RadialDensity, RadialGrid

log = logging.getLogger(__name__)

B_TF = 0.5 * (0.75 * math.pi) ** (2.0 / 3.0)
_TAIL_EXPONENT = (math.sqrt(73.0) - 7.0) / 2.0

__all__ = [
    "B_TF",
    "SolverError",
    "TFUniversal",
    "TFSolution",
    "TFWSolution",
    "solve_tf_universal",
    "tf_atom",
    "tf_potential_at",
    "solve_tfw",
    "nonrel_tfw_energy",
]


class SolverError(RuntimeError):
    """A solver failed to bracket a root or to converge."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history or [])


def _tf_series_start(B: float, x0: float) -> list[float]:
    # y = 1 - B x + 4/3 x^(3/2) - 2/5 B x^(5/2) + 1/3 x^3 + ...
    y = 1.0 - B * x0 + 4.0 / 3.0 * x0**1.5 - 0.4 * B * x0**2.5 + x0**3 / 3.0
    dy = -B + 2.0 * x0**0.5 - B * x0**1.5 + x0**2
    return [y, dy]


def _tf_rhs(x, z):
    return [z[1], max(z[0], 0.0) ** 1.5 / math.sqrt(x)]


def _crosses_zero(x, z):
    return z[0]


_crosses_zero.terminal = True
_crosses_zero.direction = -1


def _turns_up(x, z):
    return z[1]


_turns_up.terminal = True
_turns_up.direction = 1


@dataclass(frozen=True, eq=False)
class TFUniversal:
    """Universal TF screening function, interpolated in ln x."""

    slope: float  # y'(0) < 0
    bracket: tuple[float, float]
    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    x_match: float
    _spline: CubicHermiteSpline = field(repr=False, default=None)

    def __post_init__(self):
        lx = np.log(self.x)
        object.__setattr__(self, "_spline", CubicHermiteSpline(lx, self.y, self.x * self.dy))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        lo, hi = x < self.x[0], x > self.x[-1]
        mid = ~(lo | hi)
        out[mid] = self._spline(np.log(x[mid]))
        if np.any(lo):
            out[lo] = [_tf_series_start(-self.slope, float(v))[0] if v > 0 else 1.0 for v in x[lo]]
        out[hi] = self.y[-1] * (self.x[-1] / x[hi]) ** 3
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        lo, hi = x < self.x[0], x > self.x[-1]
        mid = ~(lo | hi)
        out[mid] = self._spline(np.log(x[mid]), 1) / x[mid]
        if np.any(lo):
            out[lo] = [_tf_series_start(-self.slope, float(v))[1] if v > 0 else self.slope for v in x[lo]]
        out[hi] = -3.0 * self.y[-1] * self.x[-1] ** 3 / x[hi] ** 4
        return out


def _shoot(B: float, x0: float, x_end: float, max_step: float, dense: bool = False):
    return solve_ivp(
        _tf_rhs,
        (x0, x_end),
        _tf_series_start(B, x0),
        method="DOP853",
        rtol=1e-13,
        atol=1e-16,
        max_step=max_step,
        events=[_crosses_zero, _turns_up],
        dense_output=dense,
    )


@functools.lru_cache(maxsize=8)
def solve_tf_universal(
    x0: float = 1e-8,
    max_step: float = np.inf,
    bracket: tuple[float, float] = (1.0, 2.0),
    x_max: float = 1e8,
) -> TFUniversal:
    """Shooting with bisection on B = -y'(0), then a tail continuation.

    A trial B that is too large drives y through zero; one that is too small
    makes y turn upward.  Bisection stops when the bracket no longer shrinks.
    """
    lo, hi = bracket
    if _shoot(lo, x0, 1e4, max_step).t_events[1].size == 0 or _shoot(hi, x0, 1e4, max_step).t_events[0].size == 0:
        raise SolverError(f"initial slope bracket [{lo}, {hi}] does not enclose the TF solution")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        sol = _shoot(mid, x0, 1e4, max_step)
        if sol.t_events[0].size:
            hi = mid
        elif sol.t_events[1].size:
            lo = mid
        else:
            lo = hi = mid
            break
    if hi - lo > 1e-10:
        raise SolverError(f"slope bracket only narrowed to [{lo}, {hi}]")
    B = 0.5 * (lo + hi)

    # both bracketing trajectories agree up to x_match
    s_lo = _shoot(lo, x0, 400.0, max_step, dense=True)
    s_hi = _shoot(hi, x0, 400.0, max_step, dense=True)
    x_end = min(s_lo.t[-1], s_hi.t[-1])
    probe = np.geomspace(1.0, x_end, 400)
    ya, yb = s_lo.sol(probe)[0], s_hi.sol(probe)[0]
    ok = np.abs(ya - yb) <= 1e-9 * np.abs(ya)
    x_match = float(min(probe[np.argmin(ok)] if not ok.all() else x_end, 30.0))
    x_match = max(x_match, 5.0)
    z_m = 0.5 * (s_lo.sol(x_match) + s_hi.sol(x_match))

    # tail: v = x^3 y in s = ln x
    s_m, s_max = math.log(x_match), math.log(x_max)
    v_m = x_match**3 * z_m[0]
    vs_m = 3.0 * v_m + x_match**4 * z_m[1]
    s_nodes = np.linspace(s_m, s_max, 2000)
    # the decaying perturbation of v = 144 goes like exp(-0.772 s)
    guess_v = 144.0 + (v_m - 144.0) * np.exp(-_TAIL_EXPONENT * (s_nodes - s_m))
    guess = np.vstack([guess_v, np.gradient(guess_v, s_nodes)])

    def f(s, z):
        return np.vstack([z[1], 7.0 * z[1] - 12.0 * z[0] + np.maximum(z[0], 0.0) ** 1.5])

    def bc(za, zb):
        return np.array([za[0] - v_m, zb[1]])

    tail = solve_bvp(f, bc, s_nodes, guess, tol=1e-8, max_nodes=200000)
    if tail.status != 0:
        raise SolverError(f"TF tail continuation failed: {tail.message}")
    mismatch = abs(tail.sol(s_m)[1] - vs_m) / abs(vs_m)
    if mismatch > 1e-5:
        raise SolverError(f"TF tail does not match the forward slope (relative mismatch {mismatch:.2e})")

    xs_in = np.geomspace(x0, x_match, 3000)[:-1]
    z_in = 0.5 * (s_lo.sol(xs_in) + s_hi.sol(xs_in))
    xs_out = np.exp(np.linspace(s_m, s_max, 3000))
    vz = tail.sol(np.log(xs_out))
    y_out = vz[0] / xs_out**3
    dy_out = (vz[1] - 3.0 * vz[0]) / xs_out**4
    x = np.concatenate([xs_in, xs_out])
    y = np.concatenate([z_in[0], y_out])
    dy = np.concatenate([z_in[1], dy_out])
    return TFUniversal(slope=-B, bracket=(lo, hi), x=x, y=y, dy=dy, x_match=x_match)


@dataclass(frozen=True, eq=False)
class TFSolution:
    Z: float
    universal: TFUniversal
    sigma: RadialDensity
    phi_sigma: np.ndarray
    hartree_sigma: np.ndarray
    D_sigma: float
    E_TF: float
    e_tf_constant: float
    e_tf_slope: float

    @property
    def length_scale(self) -> float:
        return B_TF * self.Z ** (-1.0 / 3.0)

    def potential(self, r):
        return tf_potential_at(self, r)


def _tf_grid(Z: float, nodes: int) -> RadialGrid:
    a = B_TF * Z ** (-1.0 / 3.0)
    return radial.log_grid(a * 1e-10, a * 1e5, nodes)


@functools.lru_cache(maxsize=64)
def tf_atom(Z: float, nodes: int = 6001) -> TFSolution:
    """Neutral TF atom of nuclear charge Z built from the universal function."""
    if Z <= 0:
        raise ValueError("Z must be positive")
    u = solve_tf_universal()
    grid = _tf_grid(Z, nodes)
    a = B_TF * Z ** (-1.0 / 3.0)
    r = grid.nodes
    phi = Z * u(r / a) / r
    sigma = RadialDensity(grid, (2.0 * phi) ** 1.5 / (3.0 * math.pi**2))
    hartree = radial.hartree_potential(sigma)
    D = radial.coulomb_self_energy(sigma, hartree)
    kinetic = 0.3 * GAMMA_TF * radial.integrate_radial(grid, sigma.rho ** (5.0 / 3.0), origin=True)
    E = kinetic + radial.nuclear_attraction(sigma, Z) + D
    # virial + TF equation: E = (3/7) V_ne, and V_ne = -Z * (B/b) Z^(4/3)
    e_slope = 3.0 / 7.0 * (-u.slope) / B_TF
    return TFSolution(
        Z=float(Z),
        universal=u,
        sigma=sigma,
        phi_sigma=phi,
        hartree_sigma=hartree,
        D_sigma=D,
        E_TF=E,
        e_tf_constant=-E / Z ** (7.0 / 3.0),
        e_tf_slope=e_slope,
    )


def tf_potential_at(sol: TFSolution, r) -> np.ndarray | float:
    """phi_sigma(r) = (Z/r) y(r / (b Z^(-1/3)))."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("radius must be positive")
    out = sol.Z * sol.universal(arr / sol.length_scale) / arr
    return float(out) if arr.ndim == 0 else out


# --------------------------------------------------------------------------
# Thomas-Fermi-Weizsaecker


@dataclass(frozen=True, eq=False)
class TFWSolution:
    Z: float
    rho_W: RadialDensity
    beta: float
    energy: float
    discrete_energy: float
    el_residual: float
    iterations: int
    energy_history: tuple[float, ...]

    @property
    def excess_charge(self) -> float:
        return self.rho_W.N - self.Z


def nonrel_tfw_energy(rho: RadialDensity, Z: float, beta: float) -> float:
    """(beta/2) int |grad sqrt rho|^2 + non-relativistic TF functional."""
    from .edf import nonrel_tf_kinetic, weizsacker_reference

    return (
        0.5 * beta * weizsacker_reference(rho)
        + nonrel_tf_kinetic(rho)
        + radial.nuclear_attraction(rho, Z)
        + radial.coulomb_self_energy(rho)
    )


class _DiscreteTFW:
    """Discrete TFW energy in u = sqrt(rho) on a log grid (trapezoid in ln r)."""

    def __init__(self, grid: RadialGrid, Z: float, beta: float):
        r = grid.nodes
        h = math.log(r[1] / r[0])
        w = 4.0 * math.pi * r**3 * h
        w[0] *= 0.5
        w[-1] *= 0.5
        self.r, self.w, self.Z, self.beta = r, w, Z, beta
        rm2 = r[:-1] * r[1:]
        self.a = 4.0 * math.pi * rm2 / np.diff(r)
        n = r.size
        main = np.zeros(n)
        main[:-1] += self.a
        main[1:] += self.a
        self.A = sps.diags([main, -self.a, -self.a], [0, 1, -1], format="csc")
        # 1/max(r_i, r_j) = E diag(c) E^T with E upper-triangular ones
        b = 1.0 / r
        c = b - np.append(b[1:], 0.0)
        Einv = sps.diags([np.ones(n), -np.ones(n - 1)], [0, 1], format="csc")
        self.Kinv = (Einv.T @ sps.diags(1.0 / c) @ Einv).tocsc()

    def hartree(self, u):
        q = self.w * u * u
        inner = np.cumsum(q) / self.r
        outer = np.cumsum((q / self.r)[::-1])[::-1]
        return inner + np.append(outer[1:], 0.0)

    def energy(self, u):
        phi = self.hartree(u)
        q = self.w * u * u
        kin = 0.5 * self.beta * float(np.dot(self.a, np.diff(u) ** 2))
        tf = 0.3 * GAMMA_TF * float(np.dot(self.w, u ** (10.0 / 3.0)))
        return kin + tf - self.Z * float(np.dot(q, 1.0 / self.r)) + 0.5 * float(np.dot(q, phi))

    def gradient(self, u, phi=None):
        if phi is None:
            phi = self.hartree(u)
        parts = (
            self.beta * (self.A @ u),
            self.w * GAMMA_TF * u ** (7.0 / 3.0),
            -2.0 * self.w * self.Z * u / self.r,
            2.0 * self.w * phi * u,
        )
        return sum(parts), parts

    def residual(self, u, g, parts) -> float:
        scale = np.max(sum(np.abs(p) for p in parts))
        active = (u > 0) | (g < 0)
        return float(np.max(np.abs(g[active])) / scale) if scale > 0 else 0.0

    def newton_direction(self, u, g, phi, shift: float):
        n = u.size
        diag = self.w * (7.0 / 3.0 * GAMMA_TF * u ** (4.0 / 3.0) - 2.0 * self.Z / self.r + 2.0 * phi)
        diag = diag + shift * self.w * (1.0 + self.Z / self.r)
        T = self.beta * self.A + sps.diags(diag)
        Dm = sps.diags(self.w * u)
        M = sps.bmat([[T, Dm], [Dm, -0.25 * self.Kinv]], format="csc")
        sol = spsolve(M, np.concatenate([-g, np.zeros(n)]))
        return sol[:n]


def _tfw_initial(grid: RadialGrid, Z: float) -> np.ndarray:
    tf = tf_atom(Z)
    r = grid.nodes
    rc = np.maximum(r, 1.0 / Z)
    phi = tf_potential_at(tf, rc)
    sigma = (2.0 * phi) ** 1.5 / (3.0 * math.pi**2)
    return np.sqrt(sigma)


@functools.lru_cache(maxsize=64)
def solve_tfw(
    Z: float,
    beta: float = 2.0,
    nodes: int = 4000,
    r_min_factor: float = 1e-6,
    r_max_factor: float = 50.0,
    tol: float = 1e-9,
    max_iter: int = 500,
) -> TFWSolution:
    """Minimize the non-relativistic TFW functional over u = sqrt(rho) >= 0.

    Damped descent: each step follows the Newton direction of the discrete
    energy (Levenberg-shifted when it is not a descent direction), projected
    onto u >= 0, with Armijo backtracking, so the energy decreases
    monotonically.  No particle-number constraint is imposed.
    """
    if Z <= 0 or beta <= 0:
        raise ValueError("Z and beta must be positive")
    grid = radial.default_grid(Z, nodes, r_min_factor, r_max_factor)
    prob = _DiscreteTFW(grid, Z, beta)
    u = _tfw_initial(grid, Z)
    E = prob.energy(u)
    history = [E]
    res_hist = []
    shift = 0.0
    for it in range(1, max_iter + 1):
        phi = prob.hartree(u)
        g, parts = prob.gradient(u, phi)
        res = prob.residual(u, g, parts)
        res_hist.append(res)
        if res < tol:
            break
        accepted = False
        for _ in range(30):
            d = prob.newton_direction(u, g, phi, shift)
            slope = float(np.dot(g, d))
            if not np.all(np.isfinite(d)) or slope >= 0:
                shift = max(4.0 * shift, 1e-6)
                continue
            alpha = 1.0
            while alpha > 1e-12:
                u_new = np.maximum(u + alpha * d, 0.0)
                E_new = prob.energy(u_new)
                # Armijo with a roundoff allowance; near convergence the
                # predicted decrease drops below the precision of E itself
                if E_new <= E + 1e-4 * float(np.dot(g, u_new - u)) + 1e-14 * abs(E):
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                break
            shift = max(4.0 * shift, 1e-6)
        if not accepted:
            if E - prob.energy(u) == 0 and res < 1e3 * tol:
                break
            raise SolverError(f"TFW line search failed at iteration {it} (residual {res:.3e})", res_hist)
        shift = shift / 10.0 if alpha == 1.0 else shift
        if shift < 1e-12:
            shift = 0.0
        u, E = u_new, E_new
        history.append(E)
    else:
        raise SolverError(f"TFW minimization did not converge in {max_iter} iterations", res_hist)
    rho = RadialDensity(grid, u * u)
    return TFWSolution(
        Z=float(Z),
        rho_W=rho,
        beta=float(beta),
        energy=nonrel_tfw_energy(rho, Z, beta),
        discrete_energy=E,
        el_residual=res_hist[-1],
        iterations=len(history) - 1,
        energy_history=tuple(history),
    )
