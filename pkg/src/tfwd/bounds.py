"""Upper and lower bounds on the TFWD ground-state energy of a heavy atom.

The upper bound evaluates the functional at the TFW minimizer.  The lower
bound is a numeric certificate: a toothless relativistic phase-space energy
in the TF potential, minus D[sigma], minus an explicit Coulomb-tooth term and
minus the linear exchange bound.

Phase-space energies use occupation 2 and the measure d xi / (2 pi)^3.  The
inner momentum integral is done in closed form: for kinetic energy T and
potential phi >= 0,

    2 int dxi/(2pi)^3 (T(xi) - phi)_- = (1/pi^2) int_0^{p_F} xi^2 (T(xi) - phi) dxi.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from . import edf, radial, semiclassic, specfun
from .edf import LAMBDA_DEFAULT, AtomicSystem, EnergyBreakdown

log = logging.getLogger(__name__)

DELTA = (3.0 * math.pi**2) ** (1.0 / 3.0)
# prefactor of the Hardy lower bound on W: 3^(5/3) / (2^7 pi^(2/3))
HARDY_PREFACTOR = 3.0 ** (5.0 / 3.0) / (2.0**7 * math.pi ** (2.0 / 3.0))
# -X(rho) <= EXCHANGE_AUDIT_CONSTANT * int rho^(4/3), from -X(t) <= t^4
EXCHANGE_AUDIT_CONSTANT = (3.0 * math.pi**2) ** (4.0 / 3.0) / (8.0 * math.pi**3)

_SERIES_SWITCH = 0.05  # x = phi/(2c^2) below which the relativistic series is used
_N_SERIES = 30
_BINOM32 = special.binom(1.5, np.arange(_N_SERIES))
_SERIES_DEN = np.arange(_N_SERIES) + 2.5

__all__ = [
    "DELTA",
    "PhaseSpaceSpec",
    "BoundsReport",
    "UpperBound",
    "LowerBound",
    "phase_density",
    "phase_density_quadrature",
    "phase_space_energy",
    "lemma_l_gap",
    "vollquad_lhs",
    "solve_s0",
    "solve_log_s0",
    "upper_bound",
    "lower_bound",
    "bounds_report",
    "asymptotics_sweep",
    "write_sweep_csv",
    "sweep_json",
    "SWEEP_COLUMNS",
]


# --------------------------------------------------------------------------
# phase space


def _nonrel_density(phi: np.ndarray) -> np.ndarray:
    return -(2.0**2.5) * phi**2.5 / (15.0 * math.pi**2)


def _rel_series(phi: np.ndarray, c: float, start: int) -> np.ndarray:
    # -(2^(3/2) phi^(5/2) / 3 pi^2) sum_{k>=start} binom(3/2, k) x^k / (k + 5/2)
    x = phi / (2.0 * c * c)
    acc = np.zeros_like(phi)
    for k in range(_N_SERIES - 1, start - 1, -1):
        acc = acc * x + _BINOM32[k] / _SERIES_DEN[k]
    return -(2.0**1.5) * phi**2.5 * acc * x**start / (3.0 * math.pi**2)


def _rel_closed(phi: np.ndarray, c: float) -> np.ndarray:
    pF = np.sqrt(phi * phi / (c * c) + 2.0 * phi)
    t = pF / c
    return (c**5 * np.asarray(specfun.tf_fn(t)) / 8.0 - phi * pF**3 / 3.0) / math.pi**2


def phase_density(phi, kind: str = "nonrel", c: float = edf.C_LIGHT) -> np.ndarray:
    """Minimized phase-space energy per unit volume at potential phi >= 0.

    ``kind`` is "nonrel" (T = xi^2/2) or "rel" (T = sqrt(c^2 xi^2 + c^4) - c^2).
    """
    phi = np.clip(np.asarray(phi, dtype=float), 0.0, None)
    if kind == "nonrel":
        return _nonrel_density(phi)
    if kind != "rel":
        raise ValueError(f"unknown kinetic kind {kind!r}")
    out = np.empty_like(phi)
    small = phi / (2.0 * c * c) < _SERIES_SWITCH
    out[small] = _rel_series(phi[small], c, 0)
    out[~small] = _rel_closed(phi[~small], c)
    return out


def _gap_density(phi: np.ndarray, c: float) -> np.ndarray:
    """nonrel minus rel phase-space density, free of cancellation at small phi/c^2."""
    phi = np.clip(np.asarray(phi, dtype=float), 0.0, None)
    out = np.empty_like(phi)
    small = phi / (2.0 * c * c) < _SERIES_SWITCH
    out[small] = -_rel_series(phi[small], c, 1)
    out[~small] = _nonrel_density(phi[~small]) - _rel_closed(phi[~small], c)
    return out


def phase_density_quadrature(phi: float, kind: str = "nonrel", c: float = edf.C_LIGHT) -> float:
    """Reference value of ``phase_density`` by direct quadrature over |xi|."""
    if phi <= 0:
        return 0.0
    if kind == "nonrel":
        T = lambda x: 0.5 * x * x  # noqa: E731
        pF = math.sqrt(2.0 * phi)
    else:
        # sqrt(c^2 x^2 + c^4) - c^2 without cancellation
        T = lambda x: c * c * x * x / (math.sqrt(c * c * x * x + c**4) + c * c)  # noqa: E731
        pF = math.sqrt(phi * phi / (c * c) + 2.0 * phi)
    val, _ = integrate.quad(lambda x: x * x * (T(x) - phi), 0.0, pF, epsabs=0.0, epsrel=1e-13, limit=200)
    return val / math.pi**2


@dataclass(frozen=True, eq=False)
class PhaseSpaceSpec:
    """Kinetic kind, inner cutoff and potential for a phase-space energy.

    The relativistic energy over all of space diverges (the density behaves
    like -phi^4 / (12 pi^2 c^3) where phi ~ Z/r), so ``kind="rel"`` needs
    ``r_cut > 0``.
    """

    kind: str
    potential: Callable[[np.ndarray], np.ndarray]
    r_cut: float = 0.0
    c: float = edf.C_LIGHT
    r_max: float = math.inf
    scale: float = 1.0  # typical length of the potential, used to place breakpoints

    def __post_init__(self):
        if self.kind not in ("nonrel", "rel"):
            raise ValueError("kind must be 'nonrel' or 'rel'")
        if self.r_cut < 0:
            raise ValueError("r_cut must be nonnegative")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.kind == "rel" and self.r_cut == 0:
            raise ValueError("the relativistic phase-space energy needs r_cut > 0")

    @classmethod
    def for_tf(cls, sol: semiclassic.TFSolution, kind: str, r_cut: float = 0.0, c: float = edf.C_LIGHT):
        return cls(kind=kind, potential=sol.potential, r_cut=r_cut, c=c, scale=sol.length_scale)


def _radial_integral(density: Callable[[np.ndarray], np.ndarray], spec: PhaseSpaceSpec, rtol: float) -> float:
    """int_{r_cut}^{r_max} 4 pi r^2 density(phi(r)) dr, in s = ln r."""
    a = spec.scale
    lo = math.log(spec.r_cut) if spec.r_cut > 0 else math.log(a * 1e-14)
    hi = math.log(min(spec.r_max, a * 1e7))
    if hi <= lo:
        return 0.0

    def f(s):
        r = math.exp(s)
        return 4.0 * math.pi * r**3 * float(density(spec.potential(np.array([r])))[0])

    pts = [math.log(a) + k for k in (-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0) if lo < math.log(a) + k < hi]
    edges = [lo, *pts, hi]
    total = 0.0
    for x0, x1 in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, x0, x1, epsabs=0.0, epsrel=rtol, limit=200)
        total += val
    if spec.r_cut == 0:
        # phi ~ Z/r below the first node: int_0^r0 4 pi r^2 e(Z/r) dr for e ~ phi^(5/2)
        r0 = math.exp(lo)
        phi0 = float(spec.potential(np.array([r0]))[0])
        total += 4.0 * math.pi * r0**3 * float(density(np.array([phi0]))[0]) * 2.0
    return total


def phase_space_energy(spec: PhaseSpaceSpec, rtol: float = 1e-10) -> float:
    """2 int_{|x| > r_cut} dx int dxi/(2pi)^3 (T(xi) - phi(x))_-  (Hartree)."""
    return _radial_integral(lambda phi: phase_density(phi, spec.kind, spec.c), spec, rtol)


def lemma_l_gap(Z: float, kappa: float, rtol: float = 1e-10) -> float:
    """Non-relativistic minus relativistic toothless phase-space energy in phi_sigma.

    The two integrands are subtracted pointwise, so the result is nonnegative
    by construction up to quadrature error.
    """
    if Z <= 0 or kappa <= 0:
        raise ValueError("Z and kappa must be positive")
    c = Z / kappa
    sol = semiclassic.tf_atom(float(Z))
    spec = PhaseSpaceSpec.for_tf(sol, "rel", r_cut=1.0 / Z, c=c)
    return _radial_integral(lambda phi: _gap_density(phi, c), spec, rtol)


# --------------------------------------------------------------------------
# complete-square parameter


_LOG_S_ASYMPTOTIC = math.log(1e50)


def _vollquad_from_log(sigma: float, lam: float) -> float:
    if sigma < _LOG_S_ASYMPTOTIC:
        s = math.exp(sigma)
        q = float(specfun.tf_fn(s)) / s**4
        ash = math.asinh(s)
    else:
        # tf(s)/s^4 = 2 - 8/(3s) + O(s^-2), arsinh s = ln 2s + O(s^-2)
        q = 2.0 - 8.0 / 3.0 * math.exp(-sigma)
        ash = math.log(2.0) + sigma
    return math.sqrt(lam * HARDY_PREFACTOR * 3.0 * q * DELTA / 8.0) * 2.0 * math.sqrt(ash)


def vollquad_lhs(s, lam: float = LAMBDA_DEFAULT):
    """sqrt(lam * H * 3 tf(s) delta / (8 s^4)) * 2 sqrt(arsinh s), increasing in s.

    H = 3^(5/3) / (2^7 pi^(2/3)).  The complete-square condition reads
    ``vollquad_lhs(s, lam) = kappa``.
    """
    arr = np.asarray(s, dtype=float)
    out = np.array([_vollquad_from_log(math.log(v), lam) for v in arr.ravel()]).reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def solve_log_s0(kappa: float, lam: float = LAMBDA_DEFAULT) -> float:
    """ln s0.  Since tf(s)/s^4 saturates at 2, s0 grows like exp(kappa^2 / (3 lam H delta))."""
    if not kappa > 0:
        raise specfun.DomainError("kappa must be positive")
    if not lam > 0:
        raise specfun.DomainError("lambda must be positive")
    f = lambda sig: _vollquad_from_log(sig, lam) - kappa  # noqa: E731
    # the left side is ~ k1 s at small s
    k1 = _vollquad_from_log(math.log(1e-8), lam) / 1e-8
    lo = hi = math.log(kappa / k1)
    while f(lo) > 0:
        lo -= 1.0
    while f(hi) < 0:
        hi = hi + max(1.0, abs(hi))
    return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_s0(kappa: float, lam: float = LAMBDA_DEFAULT) -> float:
    """Unique root s0 of the complete-square condition; depends on kappa only.

    Returns ``inf`` when s0 exceeds the floating-point range (kappa >~ 4.1 at lam = 1/9).
    """
    sig = solve_log_s0(kappa, lam)
    return math.exp(sig) if sig < 709.0 else math.inf


# --------------------------------------------------------------------------
# bounds


@dataclass
class UpperBound:
    Z: float
    kappa: float
    value: float
    breakdown: EnergyBreakdown
    tfw_energy: float
    tfw_N: float
    exchange_neg: float  # -X(rho_W)
    exchange_rho43: float  # C int rho_W^(4/3)
    exchange_schwarz: float  # C (int rho^(5/3) int rho)^(1/2)
    nonrel_chain: float  # E^nrTFW + C int rho_W^(4/3)


@dataclass
class LowerBound:
    Z: float
    kappa: float
    value: float
    phase_rel: float
    D_sigma: float
    tooth: float
    exchange_linear: float
    exchange_coefficient: float
    N_ref: float
    s0: float


def upper_bound(
    Z: float, kappa: float, lam: float = LAMBDA_DEFAULT, beta: float = 2.0, nodes: int = 4000
) -> UpperBound:
    """TFWD evaluated at the TFW minimizer, with c = Z / kappa."""
    sys = AtomicSystem.from_kappa(float(Z), kappa, lam)
    tfw = semiclassic.solve_tfw(float(Z), beta=beta, nodes=nodes)
    rho = tfw.rho_W
    br = edf.total_energy_atomic(rho, sys)
    i43 = radial.integrate_radial(rho.grid, rho.rho ** (4.0 / 3.0), origin=True)
    i53 = radial.integrate_radial(rho.grid, rho.rho ** (5.0 / 3.0), origin=True)
    return UpperBound(
        Z=float(Z),
        kappa=float(kappa),
        value=br.total,
        breakdown=br,
        tfw_energy=tfw.energy,
        tfw_N=rho.N,
        exchange_neg=-br.X,
        exchange_rho43=EXCHANGE_AUDIT_CONSTANT * i43,
        exchange_schwarz=EXCHANGE_AUDIT_CONSTANT * math.sqrt(i53 * rho.N),
        nonrel_chain=tfw.energy + EXCHANGE_AUDIT_CONSTANT * i43,
    )


def tooth_term(Z: float, kappa: float, s0: float) -> float:
    """Bound on Z int_{|x|<1/Z} rho/|x| when p/c < s0, i.e. rho < (c s0)^3 / (3 pi^2)."""
    c = Z / kappa
    return (c * s0) ** 3 / (3.0 * math.pi**2) * Z * 2.0 * math.pi / Z**2


def lower_bound(
    Z: float, kappa: float, lam: float = LAMBDA_DEFAULT, N_ref: float | None = None, rtol: float = 1e-10
) -> LowerBound:
    """Numeric lower-bound certificate at fixed kappa; every piece is reported."""
    if Z <= 0 or kappa <= 0:
        raise ValueError("Z and kappa must be positive")
    c = Z / kappa
    N = float(Z) if N_ref is None else float(N_ref)
    sol = semiclassic.tf_atom(float(Z))
    s0 = solve_s0(kappa, lam)
    phase = phase_space_energy(PhaseSpaceSpec.for_tf(sol, "rel", r_cut=1.0 / Z, c=c), rtol)
    tooth = tooth_term(Z, kappa, s0)
    coef = specfun.exchange_linear_coefficient()
    xlin = coef * c * N
    return LowerBound(
        Z=float(Z),
        kappa=float(kappa),
        value=phase - sol.D_sigma - tooth - xlin,
        phase_rel=phase,
        D_sigma=sol.D_sigma,
        tooth=tooth,
        exchange_linear=xlin,
        exchange_coefficient=coef,
        N_ref=N,
        s0=s0,
    )


@dataclass
class BoundsReport:
    Z: float
    kappa: float
    upper: float
    lower: float
    E_TF: float
    upper_gap_over_Z2: float
    lower_gap_over_Z2: float
    s0: float
    lemma_l_gap: float
    details: dict = field(default_factory=dict, repr=False)
    error: str = ""

    def row(self) -> dict:
        return {k: getattr(self, k) for k in SWEEP_COLUMNS if k != "error"} | {"error": self.error}


SWEEP_COLUMNS = (
    "Z",
    "kappa",
    "upper",
    "lower",
    "E_TF",
    "upper_gap_over_Z2",
    "lower_gap_over_Z2",
    "s0",
    "lemma_l_gap",
    "error",
)


def bounds_report(Z: float, kappa: float, lam: float = LAMBDA_DEFAULT, beta: float = 2.0, nodes: int = 4000) -> BoundsReport:
    up = upper_bound(Z, kappa, lam, beta, nodes)
    lo = lower_bound(Z, kappa, lam)
    E = semiclassic.tf_atom(float(Z)).E_TF
    gap = lemma_l_gap(Z, kappa)
    details = {
        "upper": {**asdict(up), "breakdown": up.breakdown.to_dict()},
        "lower": asdict(lo),
    }
    return BoundsReport(
        Z=float(Z),
        kappa=float(kappa),
        upper=up.value,
        lower=lo.value,
        E_TF=E,
        upper_gap_over_Z2=(up.value - E) / Z**2,
        lower_gap_over_Z2=(E - lo.value) / Z**2,
        s0=lo.s0,
        lemma_l_gap=gap,
        details=details,
    )


def _safe_report(args) -> BoundsReport:
    Z, kappa, lam, beta, nodes = args
    try:
        return bounds_report(Z, kappa, lam, beta, nodes)
    except (semiclassic.SolverError, specfun.DomainError, ValueError) as exc:
        log.warning("bounds at Z=%s failed: %s", Z, exc)
        nan = math.nan
        return BoundsReport(float(Z), float(kappa), nan, nan, nan, nan, nan, nan, nan, error=f"{type(exc).__name__}: {exc}")


def asymptotics_sweep(
    kappa: float,
    Z_list: Sequence[float],
    lam: float = LAMBDA_DEFAULT,
    beta: float = 2.0,
    nodes: int = 4000,
    jobs: int = 1,
) -> list[BoundsReport]:
    """One report per Z; a failing Z is recorded in ``error`` and the sweep continues."""
    Z_list = [float(z) for z in Z_list]
    if not Z_list:
        raise ValueError("Z_list must be nonempty")
    if any(b <= a for a, b in zip(Z_list, Z_list[1:])):
        raise ValueError("Z_list must be strictly increasing")
    args = [(z, float(kappa), lam, beta, nodes) for z in Z_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_safe_report, args))
    return [_safe_report(a) for a in args]


def write_sweep_csv(reports: Sequence[BoundsReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for rep in reports:
            row = rep.row()
            w.writerow([row[k] if isinstance(row[k], str) else repr(float(row[k])) for k in SWEEP_COLUMNS])


def _slope_with_z2(Z: np.ndarray, E: np.ndarray, p0: float) -> float:
    """Exponent p of the fit E = A Z^p + B Z^2, which absorbs the Z^2 correction."""
    scale = E[-1]
    zs = Z / Z[-1]

    def model(z, A, p, B):
        return A * z**p + B * z**2

    try:
        (_, p, _), _ = optimize.curve_fit(model, zs, E / scale, p0=(1.0, p0, 0.0), maxfev=20000)
    except RuntimeError:
        return math.nan
    return float(p)


def fit_summary(reports: Sequence[BoundsReport]) -> dict:
    """Log-log slope of -upper against Z and statistics of both gap sequences."""
    ok = [r for r in reports if not r.error]
    out: dict = {"n_ok": len(ok), "n_failed": len(reports) - len(ok)}
    if len(ok) >= 2:
        Z = np.array([r.Z for r in ok])
        up = np.array([r.upper for r in ok])
        slope = float(np.polyfit(np.log(Z), np.log(-up), 1)[0]) if np.all(up < 0) else math.nan
        out["slope"] = slope
        if len(ok) >= 4 and math.isfinite(slope):
            out["slope_with_Z2_term"] = _slope_with_z2(Z, -up, slope)
    for name in ("upper_gap_over_Z2", "lower_gap_over_Z2"):
        v = np.array([getattr(r, name) for r in ok])
        if v.size:
            out[name] = {"min": float(v.min()), "max": float(v.max())}
    out["lower_le_upper"] = all(r.lower <= r.upper for r in ok)
    return out


def sweep_json(reports: Sequence[BoundsReport], meta: dict) -> str:
    return json.dumps(
        {
            "meta": meta,
            "fit": fit_summary(reports),
            "rows": [{**r.row(), "details": r.details} for r in reports],
        },
        indent=2,
        sort_keys=True,
        default=float,
    )
