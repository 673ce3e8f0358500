"""Stability-of-matter certificate for the TFWD functional.

Nuclei of charges Z_k sit at R_k; D_k is half the distance from R_k to its
nearest neighbour and B_k the ball of radius D_k about R_k.  The certificate
bounds the energy from below by a sum of per-atom constants, a net
1/D_k term per atom (nonnegative exactly when Z_k <= Z_max(c)) and a term
linear in the electron number N.

Notation: delta = (3 pi^2)^(1/3), kappa_k = Z_k / c,
a = 3^(5/3) lam / (2^7 pi^(2/3)) (Hardy prefactor) and b = (3/8) delta.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.spatial import cKDTree

from . import specfun
from .edf import C_LIGHT, LAMBDA_DEFAULT

DELTA = (3.0 * math.pi**2) ** (1.0 / 3.0)

# the closed form of the critical charge: Z_max = 3 sqrt(1686370 pi) / 48182 * c^(3/2)
_ZMAX_ROOT = 1686370
_ZMAX_DEN = 48182

__all__ = [
    "DELTA",
    "NuclearConfiguration",
    "StabilityCertificate",
    "ElectrostaticCheck",
    "Ball",
    "z_max_closed_form",
    "z_max_rederived",
    "z_max_printed_condition",
    "z_max_coefficient",
    "ball_integral",
    "ball_term_constant",
    "lieb_yau_potential",
    "lieb_yau_switch_radius",
    "tooth_constant_3a",
    "solve_s_stability",
    "square_completion_residual",
    "molecular_certificate",
    "electrostatic_inequality_check",
    "random_ball_measure",
    "random_configuration",
    "worst_case_charges",
    "nearest_neighbor_distance",
    "nearest_neighbor_distance_brute",
]


# --------------------------------------------------------------------------
# geometry


@dataclass(frozen=True, eq=False)
class NuclearConfiguration:
    """Nuclear positions (Bohr) and charges; D_k is half the nearest-neighbour distance."""

    centers: np.ndarray
    charges: np.ndarray
    c: float = C_LIGHT
    lam: float = LAMBDA_DEFAULT
    D: np.ndarray = field(init=False)

    def __post_init__(self):
        R = np.asarray(self.centers, dtype=float)
        if R.size == 0:
            raise ValueError("no nuclei")
        R = np.atleast_2d(R)
        Z = np.atleast_1d(np.asarray(self.charges, dtype=float))
        if R.shape[1] != 3 or R.shape[0] != Z.size:
            raise ValueError("need one 3-vector center per charge")
        if np.any(Z < 0) or not np.all(np.isfinite(Z)):
            raise ValueError("nuclear charges must be finite and nonnegative")
        if self.c <= 0 or self.lam <= 0:
            raise ValueError("c and lambda must be positive")
        object.__setattr__(self, "centers", R)
        object.__setattr__(self, "charges", Z)
        D = 0.5 * nearest_neighbor_distance(R)
        if np.any(D <= 0):
            raise ValueError("nuclear positions must be pairwise distinct")
        object.__setattr__(self, "D", D)

    @property
    def K(self) -> int:
        return self.charges.size

    @property
    def kappa(self) -> np.ndarray:
        return self.charges / self.c

    def repulsion(self) -> float:
        R, Z = self.centers, self.charges
        total = 0.0
        for k in range(self.K):
            d = np.linalg.norm(R[k + 1 :] - R[k], axis=1)
            total += float(np.sum(Z[k] * Z[k + 1 :] / d))
        return total

    def cell_of(self, x) -> int:
        """Index of the Voronoi cell containing x (nearest center, lowest index on ties)."""
        d = np.linalg.norm(self.centers - np.asarray(x, dtype=float), axis=1)
        return int(np.argmin(d))

    def distance_to_cell_boundary(self, x, k: int | None = None) -> float:
        """Distance from x (in cell k) to the boundary of that Voronoi cell."""
        x = np.asarray(x, dtype=float)
        if k is None:
            k = self.cell_of(x)
        if self.K == 1:
            return math.inf
        R = self.centers
        others = np.arange(self.K) != k
        dk = np.sum((x - R[k]) ** 2)
        dl = np.sum((x - R[others]) ** 2, axis=1)
        sep = np.linalg.norm(R[others] - R[k], axis=1)
        return float(np.min((dl - dk) / (2.0 * sep)))

    def scaled(self, factor: float) -> "NuclearConfiguration":
        return NuclearConfiguration(self.centers * factor, self.charges, self.c, self.lam)

    def to_dict(self) -> dict:
        return {"centers": self.centers.tolist(), "charges": self.charges.tolist(), "c": self.c, "lam": self.lam}


def nearest_neighbor_distance(R: np.ndarray) -> np.ndarray:
    """Distance from each point to its nearest neighbour (inf for a single point)."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[0] == 1:
        return np.array([math.inf])
    dist, _ = cKDTree(R).query(R, k=2)
    return dist[:, 1]


def nearest_neighbor_distance_brute(R: np.ndarray) -> np.ndarray:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    d = np.linalg.norm(R[:, None, :] - R[None, :, :], axis=-1)
    np.fill_diagonal(d, math.inf)
    return d.min(axis=1)


def random_configuration(
    rng: np.random.Generator, K: int, Z: float, min_separation: float = 1.0, density: float = 0.05, c: float = C_LIGHT
) -> NuclearConfiguration:
    """K nuclei of charge Z placed uniformly in a cube holding ``density`` nuclei per Bohr^3."""
    side = (K / density) ** (1.0 / 3.0)
    pts: list[np.ndarray] = []
    for _ in range(100000):
        p = rng.uniform(0.0, side, 3)
        if all(np.linalg.norm(p - q) >= min_separation for q in pts):
            pts.append(p)
            if len(pts) == K:
                return NuclearConfiguration(np.array(pts), np.full(K, float(Z)), c)
    raise RuntimeError("could not place nuclei at the requested separation; lower the density")


# --------------------------------------------------------------------------
# constants


def z_max_closed_form(c: float) -> float:
    """Z_max(c) = 3 sqrt(1686370 pi) / 48182 * c^(3/2)."""
    if c <= 0:
        raise ValueError("c must be positive")
    return 3.0 * math.sqrt(_ZMAX_ROOT * math.pi) / _ZMAX_DEN * c**1.5


def ball_integral() -> Fraction:
    """int_0^1 r^2 (1 + r^2/4)^2 dr = 1/3 + 1/10 + 1/112, exactly."""
    # r^2 (1 + r^2/2 + r^4/16) integrated termwise
    coeffs = {2: Fraction(1), 4: Fraction(1, 2), 6: Fraction(1, 16)}
    return sum((cf / (p + 1) for p, cf in coeffs.items()), Fraction(0))


def ball_term_constant() -> Fraction:
    """Rational q with the ball term equal to -q pi kappa^4 / (delta^3 D_k).

    Pointwise, min_rho [(3/8) delta rho^(4/3) - kappa H rho] = -2 kappa^4 H^4 / delta^3,
    and H^4 = 16 Y^2 / D^4, so the ball integral carries 2 * 16 * 4 pi = 128 pi.
    """
    return 128 * ball_integral()


# coefficient of pi kappa^4 / (delta^3 D_k) in the Voronoi-exterior term, from
# min_rho [(3/4) delta rho^(4/3) - kappa rho/r] = -kappa^4 / (4 delta^3 r^4)
# and int_{cell \ ball} |x - R_k|^-4 <= 3 pi / D_k
EXTERIOR_CONSTANT = Fraction(3, 4)
PRINTED_BALL_CONSTANT = Fraction(2972, 105)


def z_max_coefficient(ball: Fraction | None = None) -> Fraction:
    """Rational q with Z_max = sqrt(q pi) c^(3/2).

    Feasibility per atom reads c (ball + 3/4) pi kappa^4 / delta^3 <= Z^2 / 8;
    with delta^3 = 3 pi^2 this is Z^2 <= 3 c^3 / (8 (ball + 3/4)) * pi.
    """
    ball = ball_term_constant() if ball is None else Fraction(ball)
    return Fraction(3, 8) / (ball + EXTERIOR_CONSTANT)


def z_max_rederived(c: float, ball: Fraction | None = None) -> float:
    q = z_max_coefficient(ball)
    return math.sqrt(float(q) * math.pi) * c**1.5


def z_max_printed_condition(c: float) -> float:
    """Critical charge if the ball term carries 2972/105 instead of 5944/105."""
    return z_max_rederived(c, PRINTED_BALL_CONSTANT)


def closed_form_matches(ball: Fraction | None = None) -> bool:
    """Exact test of (3 sqrt(1686370) / 48182)^2 against z_max_coefficient(ball)."""
    return Fraction(9 * _ZMAX_ROOT, _ZMAX_DEN**2) == z_max_coefficient(ball)


def lieb_yau_potential(x, k: int, config: NuclearConfiguration) -> tuple[float, float]:
    """((1/4)|x-R_k|^-2 - D_k^-2 Y(|x-R_k|/D_k))_+ and H_k(x) = 2 sqrt(Y) / D_k, Y(r) = 1 + r^2/4."""
    x = np.asarray(x, dtype=float)
    D = float(config.D[k])
    r = float(np.linalg.norm(x - config.centers[k]))
    if r > D:
        raise specfun.DomainError(f"point at distance {r} lies outside ball {k} of radius {D}")
    Y = 1.0 + (r / D) ** 2 / 4.0
    H = 2.0 * math.sqrt(Y) / D
    if r == 0.0:
        return math.inf, H
    return max(0.25 / r**2 - Y / D**2, 0.0), H


def lieb_yau_switch_radius(D: float = 1.0) -> float:
    """Radius where the Lieb-Yau term switches off, sqrt(sqrt(5) - 2) D."""
    f = lambda u: 0.25 / u**2 - (1.0 + u * u / 4.0)  # noqa: E731
    return D * optimize.brentq(f, 1e-3, 1.0, xtol=1e-15)


def tooth_constant_3a(cap: float = 1.0 / (3.0 * math.pi**2)) -> float:
    """C = -inf over rho <= cap of int (3/4 rho^(4/3) - rho/|x|) dx, by quadrature.

    The pointwise minimizer is rho = min(|x|^-3, cap).  For the default cap
    (p < 1) the value is 2 pi / delta.
    """
    rc = cap ** (-1.0 / 3.0)

    def integrand(r):
        rho = min(r**-3, cap)
        return 4.0 * math.pi * r * r * (0.75 * rho ** (4.0 / 3.0) - rho / r)

    inner, _ = integrate.quad(integrand, 0.0, rc, epsabs=0.0, epsrel=1e-13)
    outer, _ = integrate.quad(integrand, rc, math.inf, epsabs=0.0, epsrel=1e-13)
    return -(inner + outer)


def solve_s_stability(kappa: float, lam: float = LAMBDA_DEFAULT) -> tuple[float, float]:
    """(arsinh s, s) making the per-ball quadratic form a complete square.

    2 sqrt(a b) = kappa / sqrt(arsinh s) gives arsinh s = kappa^2 / (4 a b);
    s overflows to inf beyond arsinh s ~ 710 (kappa >~ 2.9 at lam = 1/9).
    """
    if not kappa > 0:
        raise specfun.DomainError("kappa must be positive")
    a, b = _hardy_a(lam), 0.375 * DELTA
    ash = kappa**2 / (4.0 * a * b)
    s = math.sinh(ash) if ash < 710.0 else math.inf
    return ash, s


def _hardy_a(lam: float) -> float:
    return 3.0 ** (5.0 / 3.0) * lam / (2.0**7 * math.pi ** (2.0 / 3.0))


def square_completion_residual(kappa: float, lam: float = LAMBDA_DEFAULT) -> float:
    """Relative discriminant (k^2 - 4ab)/(4ab) of a H + b T - k sqrt(HT) at the chosen s."""
    ash, _ = solve_s_stability(kappa, lam)
    a, b = _hardy_a(lam), 0.375 * DELTA
    k = kappa / math.sqrt(ash)
    return (k * k - 4.0 * a * b) / (4.0 * a * b)


# --------------------------------------------------------------------------
# certificate


@dataclass
class StabilityCertificate:
    """Per-atom terms (lists over nuclei) and the assembled lower bound in Hartree."""

    K: int
    N: float
    c: float
    term_2: list[float]
    term_3a: list[float]
    term_4a: list[float]
    term_5a: list[float]
    repulsion: list[float]
    linear_N: float
    linear_coefficient: float
    total: float
    uniform_total: float
    per_particle: float
    feasible: bool
    feasible_printed_condition: bool
    violations: list[str]
    s: list[float]
    arsinh_s: list[float]
    z_max_closed_form: float
    z_max_rederived: float
    z_max_printed_condition: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def molecular_certificate(config: NuclearConfiguration, N: float) -> StabilityCertificate:
    """Lower bound on the molecular TFWD energy for any density with int rho = N.

    ``uniform_total`` drops the net 1/D_k terms, which are nonnegative when
    the configuration is feasible; it is then a configuration-independent
    lower bound.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if not np.all(config.charges == config.charges[0]):
        # with nu = 0 the credit would need Z_1 Z_2 / (2D) >= (Z_1^2 + Z_2^2) / (8D)
        raise ValueError("the electrostatic credit Z_k^2/(8 D_k) needs equal nuclear charges")
    c, lam = config.c, config.lam
    ball = float(ball_term_constant())
    ext = float(EXTERIOR_CONSTANT)
    C3a = tooth_constant_3a()
    d3 = DELTA**3
    coef = specfun.exchange_linear_coefficient()
    t2, t3, t4, t5, rep, ss, ash_list, viol = [], [], [], [], [], [], [], []
    feas_printed = True
    for k, (Z, D) in enumerate(zip(config.charges, config.D)):
        kap = Z / c
        if kap == 0:
            t2.append(0.0), t3.append(0.0), t4.append(0.0), t5.append(0.0), rep.append(0.0)
            ss.append(0.0), ash_list.append(0.0)
            continue
        ash, s = solve_s_stability(kap, lam)
        ss.append(s)
        ash_list.append(ash)
        t2.append(0.0)  # complete square by the choice of s
        t3.append(-c * C3a * c * s * kap**3 / DELTA**2 if math.isfinite(s) else -math.inf)
        invD = 1.0 / D
        t4.append(-c * ball * math.pi * kap**4 / d3 * invD)
        t5.append(-c * ext * math.pi * kap**4 / d3 * invD)
        rep.append(Z * Z / 8.0 * invD)
        lhs = c * (ball + ext) * math.pi * kap**4 / d3
        if lhs > Z * Z / 8.0:
            viol.append(
                f"atom {k}: ball and exterior terms c(q + 3/4) pi kappa^4/delta^3 = {lhs:.6g} "
                f"exceed the repulsion credit Z^2/8 = {Z * Z / 8.0:.6g}"
            )
        if c * (float(PRINTED_BALL_CONSTANT) + ext) * math.pi * kap**4 / d3 > Z * Z / 8.0:
            feas_printed = False
    lin = -coef * c * N
    total = float(sum(t3) + sum(t4) + sum(t5) + sum(rep) + lin)
    uniform = float(sum(t3) + lin)
    return StabilityCertificate(
        K=config.K,
        N=float(N),
        c=c,
        term_2=t2,
        term_3a=t3,
        term_4a=t4,
        term_5a=t5,
        repulsion=rep,
        linear_N=lin,
        linear_coefficient=coef * c,
        total=total,
        uniform_total=uniform,
        per_particle=total / (config.K + N),
        feasible=not viol,
        feasible_printed_condition=feas_printed,
        violations=viol,
        s=ss,
        arsinh_s=ash_list,
        z_max_closed_form=z_max_closed_form(c),
        z_max_rederived=z_max_rederived(c),
        z_max_printed_condition=z_max_printed_condition(c),
    )


# --------------------------------------------------------------------------
# electrostatic inequality


@dataclass(frozen=True)
class Ball:
    """Uniformly charged ball: center (Bohr), radius (Bohr), charge q >= 0."""

    center: tuple[float, float, float]
    radius: float
    charge: float


@dataclass
class ElectrostaticCheck:
    holds: bool
    slack: float
    scale: float
    self_energy: float
    potential_term: float
    repulsion: float
    credit: float


def _validate_balls(config: NuclearConfiguration, balls: Sequence[Ball]) -> list[int]:
    cells = []
    for i, b in enumerate(balls):
        if b.radius <= 0 or b.charge < 0:
            raise ValueError("balls need positive radius and nonnegative charge")
        k = config.cell_of(b.center)
        if config.distance_to_cell_boundary(b.center, k) < b.radius:
            raise ValueError(f"ball {i} crosses the boundary of Voronoi cell {k}")
        cells.append(k)
        for j in range(i):
            d = float(np.linalg.norm(np.subtract(b.center, balls[j].center)))
            if d < b.radius + balls[j].radius:
                raise ValueError(f"balls {j} and {i} overlap")
    return cells


def electrostatic_inequality_check(
    config: NuclearConfiguration, balls: Sequence[Ball], form: str = "proof"
) -> ElectrostaticCheck:
    """Evaluate the Lieb-Yau electrostatic inequality for a ball-smeared measure nu.

    ``form="proof"``: D[nu] - int Phi dnu + U >= sum_k Z_k^2 / (8 D_k), where Phi
    at x is the potential of all nuclei except the one owning x's Voronoi cell
    and D[nu] = (1/2) int int dnu dnu / |x - y|.

    ``form="printed"``: (1/2) D[nu] - Z int Phi dnu + Z^2 sum 1/|R_k - R_l|
    >= (Z^2/8) sum 1/D_k with Phi carrying the charge Z already; only for
    equal charges.  Its Z-scaling is inconsistent and it fails for large Z.

    The proof form is only valid for equal charges: with nu = 0 and two
    nuclei it would require 4 Z_1 Z_2 >= Z_1^2 + Z_2^2.

    Each ball must lie inside one cell, where Phi is harmonic, so
    int Phi dnu equals q Phi(center) exactly; balls must not overlap.
    """
    cells = _validate_balls(config, balls)
    R, Z = config.centers, config.charges
    self_e = 0.0
    for i, b in enumerate(balls):
        self_e += 0.6 * b.charge**2 / b.radius
        for j in range(i):
            self_e += b.charge * balls[j].charge / float(np.linalg.norm(np.subtract(b.center, balls[j].center)))
    pot = 0.0
    for b, k in zip(balls, cells):
        d = np.linalg.norm(R - np.asarray(b.center), axis=1)
        mask = np.arange(config.K) != k
        pot += b.charge * float(np.sum(Z[mask] / d[mask]))
    U = config.repulsion()
    credit = float(np.sum(Z**2 / (8.0 * config.D))) if config.K > 1 else 0.0
    if form == "proof":
        lhs = self_e - pot + U
    elif form == "printed":
        if not np.all(Z == Z[0]):
            raise ValueError("the printed form assumes equal charges")
        lhs = 0.5 * self_e - Z[0] * pot + U
    else:
        raise ValueError("form must be 'proof' or 'printed'")
    slack = lhs - credit
    scale = abs(self_e) + abs(pot) + abs(U) + abs(credit)
    return ElectrostaticCheck(
        holds=slack >= -1e-9 * scale,
        slack=slack,
        scale=scale,
        self_energy=self_e,
        potential_term=pot,
        repulsion=U,
        credit=credit,
    )


def random_ball_measure(
    config: NuclearConfiguration, rng: np.random.Generator, n_balls: int, max_charge: float = 5.0
) -> list[Ball]:
    """Non-overlapping balls, each strictly inside a single Voronoi cell."""
    R = config.centers
    span = np.ptp(R, axis=0) if config.K > 1 else np.ones(3)
    lo, hi = R.min(axis=0) - 0.25 * span - 0.5, R.max(axis=0) + 0.25 * span + 0.5
    balls: list[Ball] = []
    for _ in range(200 * n_balls):
        if len(balls) == n_balls:
            break
        p = rng.uniform(lo, hi)
        room = config.distance_to_cell_boundary(p)
        for b in balls:
            room = min(room, float(np.linalg.norm(p - np.asarray(b.center))) - b.radius)
        if not room > 1e-3:
            continue
        room = min(room, 2.0 * float(np.min(config.D)) if config.K > 1 else 1.0)
        radius = rng.uniform(0.1, 0.9) * room
        balls.append(Ball(tuple(float(v) for v in p), float(radius), float(rng.uniform(0.0, max_charge))))
    return balls


def worst_case_charges(config: NuclearConfiguration, balls: Sequence[Ball]) -> list[Ball]:
    """Re-weight the balls' charges to minimize the slack (a convex QP in q >= 0)."""
    cells = _validate_balls(config, balls)
    n = len(balls)
    if n == 0:
        return []
    C = np.array([b.center for b in balls])
    M = np.zeros((n, n))
    for i, b in enumerate(balls):
        M[i, i] = 0.6 / b.radius
        for j in range(i):
            M[i, j] = M[j, i] = 0.5 / float(np.linalg.norm(C[i] - C[j]))
    R, Z = config.centers, config.charges
    phi = np.empty(n)
    for i, k in enumerate(cells):
        d = np.linalg.norm(R - C[i], axis=1)
        mask = np.arange(config.K) != k
        phi[i] = float(np.sum(Z[mask] / d[mask]))
    res = optimize.minimize(
        lambda q: (q @ M @ q - phi @ q, 2.0 * M @ q - phi),
        np.linalg.solve(M, phi / 2.0).clip(0.0),
        jac=True,
        bounds=[(0.0, None)] * n,
        method="L-BFGS-B",
        options={"ftol": 1e-15, "gtol": 1e-12},
    )
    return [Ball(b.center, b.radius, float(q)) for b, q in zip(balls, res.x)]
