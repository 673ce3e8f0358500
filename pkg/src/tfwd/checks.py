"""Registry of inequality and identity checks run by ``tfwd verify``.

Each check returns a ``CheckResult`` with a measured slack (nonnegative when
the check passes, in the units named by ``detail``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import edf, radial, specfun, stability

T_GRID = np.geomspace(1e-4, 1e4, 10_000)


@dataclass
class CheckContext:
    seed: int = 0
    c: float = edf.C_LIGHT
    lam: float = edf.LAMBDA_DEFAULT
    tf: Callable = specfun.tf_fn  # replaced by the fault-injection hook

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass
class CheckResult:
    name: str
    anchor: str
    passed: bool
    slack: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "passed": bool(self.passed), "slack": float(self.slack), "detail": self.detail}


@dataclass
class _Check:
    name: str
    anchor: str
    fn: Callable[[CheckContext], tuple[float, str]]


REGISTRY: list[_Check] = []


def register(name: str, anchor: str):
    def deco(fn):
        REGISTRY.append(_Check(name, anchor, fn))
        return fn

    return deco


def _min_rel_slack(lhs, rhs) -> float:
    """min over points of (rhs - lhs) / max(|lhs|, |rhs|, tiny): >= 0 iff lhs <= rhs."""
    lhs, rhs = np.asarray(lhs, float), np.asarray(rhs, float)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    return float(np.min((rhs - lhs) / scale))


def random_density(rng: np.random.Generator, grid: radial.RadialGrid) -> radial.RadialDensity:
    """Smooth positive density: a sum of 1-3 Gaussians and exponentials."""
    r = grid.nodes
    rho = np.zeros_like(r)
    for _ in range(int(rng.integers(1, 4))):
        amp = 10 ** rng.uniform(-1, 2)
        w = 10 ** rng.uniform(-0.7, 0.5)
        if rng.random() < 0.5:
            rho += amp * np.exp(-((r / w) ** 2))
        else:
            rho += amp * np.exp(-np.sqrt(r * r + 0.01 * w * w) / w)
    return radial.RadialDensity(grid, rho)


@register("weizsacker_bracket_max", "maximum of the Weizsaecker bracket = 1.658290113")
def _bracket(ctx):
    v = specfun.weizsacker_bracket_max()
    return 1e-8 - abs(v - 1.658290113), f"max = {v:.12f}"


@register("eta0_alpha3", "sup X(t)/t^3 = 1.15 +- 0.01")
def _eta0(ctx):
    v = specfun.eta0(3.0)
    return 0.01 - abs(v - 1.15), f"eta0(3) = {v:.10f}"


@register("F_hardy_lower", "F(t) >= t sqrt(arsinh t)/2")
def _F(ctx):
    F = specfun.F_int_grid(T_GRID)
    return _min_rel_slack(T_GRID * np.sqrt(np.arcsinh(T_GRID)) / 2.0, F), "relative slack on 1e4 log points"


@register("tfls_lower_bound", "tf(t) >= 2 t^4 - 8 t^3 / 3")
def _tfls(ctx):
    t = T_GRID
    return _min_rel_slack(2.0 * t**4 - 8.0 / 3.0 * t**3, ctx.tf(t)), "relative slack on 1e4 log points"


@register("exchange_t4", "-X(t) <= t^4")
def _xt4(ctx):
    return _min_rel_slack(-specfun.x_fn(T_GRID), T_GRID**4), "relative slack on 1e4 log points"


@register("exchange_eta0", "X(t) <= eta0(3) t^3")
def _xeta(ctx):
    e = specfun.eta0(3.0)
    return _min_rel_slack(specfun.x_fn(T_GRID), e * T_GRID**3), "relative slack on 1e4 log points"


@register("tf_over_t4_monotone", "tf(t)/t^4 increasing with limit 2")
def _t4(ctx):
    # tf(t)/t^4 = 2 - 8/(3t) + O(t^-2): the limit is checked at t = 1e6
    q = ctx.tf(T_GRID) / T_GRID**4
    mono = float(np.min(np.diff(q)))
    q6 = float(ctx.tf(1e6)) / 1e24
    limit = min(1e-5 - (2.0 - q6), 2.0 - q6)
    q3 = float(ctx.tf(1e3)) / 1e12
    return min(mono, limit), f"min increment {mono:.3e}, tf(1e6)/1e24 = {q6:.9f}, tf(1e3)/1e12 = {q3:.6f}"


@register("tf_prime_identity", "tf'(t) = 8 t^2 (sqrt(1+t^2) - 1)")
def _tfp(ctx):
    t = 10 ** ctx.rng.uniform(-3, 3, 100)
    h = 1e-5 * t
    fd = (ctx.tf(t + h) - ctx.tf(t - h)) / (2 * h)
    err = np.max(np.abs(fd / specfun.tf_fn_prime(t) - 1.0))
    return 1e-8 - float(err), f"max relative deviation {err:.2e}"


@register("series_branch_agreement", "series and closed forms agree at the crossovers")
def _branch(ctx):
    from .specfun import CROSSOVER, _f_sq_closed, _g_closed, _tf_closed, series

    worst = 0.0
    for name, closed in (("f_sq", _f_sq_closed), ("tf", _tf_closed), ("g", _g_closed)):
        t = np.array([CROSSOVER[name]])
        worst = max(worst, float(abs(series(name, t)[0] / closed(t)[0] - 1.0)))
    return 1e-12 - worst, f"worst relative mismatch {worst:.2e}"


@register("tf_quintic_constant", "sup tf(t)/t^5 = 4/5")
def _quint(ctx):
    C, _ = specfun.tf_quintic_constant()
    return 1e-12 - abs(C - 0.8), f"sup = {C}"


@register("lemma0_pointwise", "(3/8 pi^2)|p'|^2 c f^2 <= |(sqrt rho)'|^2 and W <= lam int |grad sqrt rho|^2")
def _lemma0(ctx):
    rng = ctx.rng
    grid = radial.log_grid(1e-5, 40.0, 3000)
    worst = math.inf
    for _ in range(10):
        rho = random_density(rng, grid)
        c = 10 ** rng.uniform(-1, 3)
        lhs, rhs = edf.lemma0_pointwise(rho, c)
        live = rhs > 0
        worst = min(worst, float(np.min((rhs[live] - lhs[live]) / rhs[live])) + 1e-10)
        sys = edf.AtomicSystem(Z=0.0, c=c, lam=ctx.lam)
        ref = ctx.lam * edf.weizsacker_reference(rho)
        worst = min(worst, (ref - edf.weizsacker_energy(rho, sys)) / ref)
    return worst, "minimum relative slack over 10 random densities"


@register("exchange_linear_bound", "X(rho) <= (3 eta0 / 8 pi) c N")
def _xlin(ctx):
    rng = ctx.rng
    grid = radial.log_grid(1e-5, 40.0, 2000)
    coef = specfun.exchange_linear_coefficient()
    worst = math.inf
    for _ in range(20):
        rho = random_density(rng, grid)
        kappa = float(rng.choice([0.1, 0.5, 1.0, 2.0]))
        c = 10.0 / kappa  # reference charge Z = 10
        sys = edf.AtomicSystem(Z=0.0, c=c)
        worst = min(worst, coef * c * rho.N - edf.exchange_energy(rho, sys))
    return worst, "minimum absolute slack over 20 random densities"


@register("z_max_closed_form", "Z_max(137.037) = 229.9029615")
def _zmax(ctx):
    v = stability.z_max_closed_form(137.037)
    return 1e-4 - abs(v - 229.9029615), f"Z_max = {v:.7f}, rederived = {stability.z_max_rederived(137.037):.7f}"


@register("ball_constant_exact", "int_0^1 r^2 (1 + r^2/4)^2 dr = 743/1680, ball constant 5944/105")
def _ball(ctx):
    ok = stability.ball_integral() == Fraction(743, 1680) and stability.ball_term_constant() == Fraction(5944, 105)
    return (0.0 if ok else -1.0), f"{stability.ball_integral()} and {stability.ball_term_constant()}"


@register("electrostatic_inequality", "Lieb-Yau electrostatic inequality on ball measures")
def _electro(ctx):
    rng = ctx.rng
    worst = math.inf
    for _ in range(20):
        K = int(rng.integers(2, 7))
        cfg = stability.NuclearConfiguration(rng.uniform(0, 6, (K, 3)), np.full(K, rng.uniform(0.1, 5.0)))
        balls = stability.worst_case_charges(cfg, stability.random_ball_measure(cfg, rng, int(rng.integers(1, 10))))
        res = stability.electrostatic_inequality_check(cfg, balls)
        worst = min(worst, res.slack / res.scale)
    return worst + 1e-9, "minimum relative slack over 20 random configurations"


@register("uniform_ball_electrostatics", "uniform ball: D = 3N^2/(5R), V = -3N/(2R)")
def _uball(ctx):
    R, N = 1.3, 2.0
    grid = radial.log_grid(1e-6 * R, R, 4001)
    rho = radial.RadialDensity(grid, np.full(grid.size, N / (4.0 / 3.0 * math.pi * R**3)))
    eD = abs(radial.coulomb_self_energy(rho) / (0.6 * N * N / R) - 1.0)
    eV = abs(radial.nuclear_attraction(rho, 1.0) / (-1.5 * N / R) - 1.0)
    return 1e-7 - max(eD, eV), f"relative errors D {eD:.1e}, V {eV:.1e}"


def run_checks(ctx: CheckContext | None = None, names: list[str] | None = None) -> list[CheckResult]:
    ctx = ctx or CheckContext()
    out = []
    for chk in REGISTRY:
        if names and chk.name not in names:
            continue
        try:
            slack, detail = chk.fn(ctx)
            passed = bool(np.isfinite(slack) and slack >= 0)
        except Exception as exc:  # a crashing check is a failing check
            slack, detail, passed = -math.inf, f"{type(exc).__name__}: {exc}", False
        out.append(CheckResult(chk.name, chk.anchor, passed, float(slack), detail))
    return out


def faulty_tf(t):
    """tf scaled by 1 - 1e-3, used to confirm the suite detects a perturbed constant."""
    return (1.0 - 1e-3) * np.asarray(specfun.tf_fn(t))


FAULTS: dict[str, dict] = {"tf": {"tf": faulty_tf}}


def make_context(seed: int = 0, c: float = edf.C_LIGHT, lam: float = edf.LAMBDA_DEFAULT, fault: str | None = None):
    ctx = CheckContext(seed=seed, c=c, lam=lam)
    if fault:
        for k, v in FAULTS[fault].items():
            setattr(ctx, k, v)
    return ctx


__all__ = ["CheckContext", "CheckResult", "REGISTRY", "run_checks", "make_context", "random_density"]
