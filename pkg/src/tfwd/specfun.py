"""Scalar functions of the dimensionless momentum t = p/c.

Every function accepts a scalar or an array of nonnegative arguments and
returns the same shape (a Python float for scalar input).  The closed forms
of ``tf`` and of the exchange bracket ``g(t) = t*sqrt(1+t^2) - arsinh(t)``
subtract nearly equal quantities at small t; below a crossover they are
replaced by their Taylor series, whose coefficients are generated here in
exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate, optimize

__all__ = [
    "DomainError",
    "arsinh",
    "f_sq",
    "F_int",
    "F_int_grid",
    "tf_fn",
    "tf_fn_prime",
    "g_fn",
    "x_fn",
    "weizsacker_bracket",
    "weizsacker_bracket_max",
    "eta0",
    "exchange_linear_coefficient",
    "tf_quintic_constant",
    "CROSSOVER",
]


class DomainError(ValueError):
    """Argument outside the domain on which a function is defined."""


# crossover t below which the series branch is used
CROSSOVER = {"f_sq": 0.05, "tf": 0.5, "g": 0.5}
_N_TERMS = 40


def _binom(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for j in range(k):
        out *= (a - j) / (j + 1)
    return out


def _series_coefficients(n: int = _N_TERMS) -> dict[str, list[Fraction]]:
    half, mhalf = Fraction(1, 2), Fraction(-1, 2)
    b = [_binom(mhalf, k) for k in range(n)]  # (1+t^2)^(-1/2)
    # tf(t) = 8 * int_0^t s^2 (sqrt(1+s^2) - 1) ds  -> powers t^(2k+5)
    tf = [8 * _binom(half, k + 1) / (2 * k + 5) for k in range(n)]
    # g'(t) = 2 t^2 / sqrt(1+t^2)  -> powers t^(2k+3)
    g = [2 * b[k] / (2 * k + 3) for k in range(n)]
    # f^2(t) = t/sqrt(1+t^2) + 2 t^2 arsinh(t)/(1+t^2)  -> powers t^(2k+1)
    asinh_c = [b[k] / (2 * k + 1) for k in range(n)]
    fsq = []
    for k in range(n):
        acc = Fraction(0)
        for j in range(k):
            acc += (-1) ** (k - 1 - j) * asinh_c[j]
        fsq.append(b[k] + 2 * acc)
    return {"tf": tf, "g": g, "f_sq": fsq}


SERIES = _series_coefficients()
_SERIES_F = {k: np.array([float(c) for c in v]) for k, v in SERIES.items()}
# leading power of t for each series: value = t**lead * sum_k c_k (t^2)^k
_LEAD = {"tf": 5, "g": 3, "f_sq": 1}


def _poly_t2(name: str, t: np.ndarray) -> np.ndarray:
    coeffs = _SERIES_F[name]
    u = t * t
    acc = np.zeros_like(t)
    for c in coeffs[::-1]:
        acc = acc * u + c
    return acc * t ** _LEAD[name]


def series(name: str, t) -> np.ndarray:
    """Evaluate the small-t series branch of ``name`` ("tf", "g" or "f_sq")."""
    return _poly_t2(name, np.asarray(t, dtype=float))


def _checked(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("argument must be a nonnegative real number (t >= 0)")
    return arr, arr.ndim == 0


def _out(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


def arsinh(t):
    """Inverse hyperbolic sine for t >= 0."""
    arr, scalar = _checked(t)
    return _out(np.arcsinh(arr), scalar)


def _branch(name: str, closed: Callable[[np.ndarray], np.ndarray], t) -> np.ndarray:
    arr, scalar = _checked(t)
    flat = np.atleast_1d(arr).astype(float)
    out = np.empty_like(flat)
    small = flat < CROSSOVER[name]
    out[small] = _poly_t2(name, flat[small])
    out[~small] = closed(flat[~small])
    return _out(out.reshape(arr.shape), scalar)


def _f_sq_closed(t: np.ndarray) -> np.ndarray:
    q = 1.0 + t * t
    return t / np.sqrt(q) + 2.0 * t * t * np.arcsinh(t) / q


def _tf_closed(t: np.ndarray) -> np.ndarray:
    q = np.sqrt(1.0 + t * t)
    return t * q * (2.0 * t * t + 1.0) - np.arcsinh(t) - 8.0 / 3.0 * t**3


def _g_closed(t: np.ndarray) -> np.ndarray:
    return t * np.sqrt(1.0 + t * t) - np.arcsinh(t)


def f_sq(t):
    """Square of the relativistic gradient-correction factor, f(t)^2 ~ t near 0."""
    return _branch("f_sq", _f_sq_closed, t)


def tf_fn(t):
    """Relativistic kinetic-energy integrand; tf(t) = 4/5 t^5 + O(t^7)."""
    return _branch("tf", _tf_closed, t)


def tf_fn_prime(t):
    """Derivative of tf, 8 t^2 (sqrt(1+t^2) - 1), written without cancellation."""
    arr, scalar = _checked(t)
    t4 = arr**4
    return _out(8.0 * t4 / (1.0 + np.sqrt(1.0 + arr * arr)), scalar)


def g_fn(t):
    """Exchange bracket g(t) = t sqrt(1+t^2) - arsinh(t) = 2/3 t^3 + O(t^5)."""
    return _branch("g", _g_closed, t)


def x_fn(t):
    """Relativistic exchange integrand X(t) = 2 t^4 - 3 g(t)^2."""
    arr, scalar = _checked(t)
    g = np.asarray(g_fn(arr))
    return _out(2.0 * arr**4 - 3.0 * g * g, scalar)


def weizsacker_bracket(t):
    """(sqrt(1+t^2) + 2 t arsinh t) / (1+t^2), equal to f(t)^2 / t."""
    arr, scalar = _checked(t)
    q = 1.0 + arr * arr
    return _out((np.sqrt(q) + 2.0 * arr * np.arcsinh(arr)) / q, scalar)


def _f_int_scalar(t: float, rtol: float) -> float:
    if t == 0.0:
        return 0.0
    # s = u^2 removes the sqrt(s) behaviour of f at the origin
    val, _ = integrate.quad(
        lambda u: 2.0 * u * math.sqrt(f_sq(u * u)),
        0.0,
        math.sqrt(t),
        epsabs=0.0,
        epsrel=rtol,
        limit=200,
    )
    return val


def F_int(t, rtol: float = 1e-12):
    """F(t) = int_0^t f(s) ds by adaptive quadrature."""
    arr, scalar = _checked(t)
    flat = np.atleast_1d(arr)
    out = np.array([_f_int_scalar(float(v), rtol) for v in flat.ravel()])
    return _out(out.reshape(arr.shape), scalar)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def F_int_grid(t) -> np.ndarray:
    """F at many points at once: 16-point Gauss-Legendre in u = sqrt(s) between
    consecutive sorted arguments, accumulated.  Accurate to ~1e-13 relative on
    grids no coarser than a few percent in t."""
    arr, _ = _checked(t)
    flat = np.atleast_1d(arr).ravel()
    order = np.argsort(flat)
    u = np.sqrt(np.concatenate([[0.0], flat[order]]))
    a, b = u[:-1], u[1:]
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = 2.0 * nodes * np.sqrt(np.asarray(f_sq(nodes * nodes)))
    pieces = half * (vals @ _GL_W)
    out = np.empty_like(flat)
    out[order] = np.cumsum(pieces)
    return out.reshape(arr.shape)


def _maximize_log(fn, lo: float, hi: float, n: int = 4001) -> tuple[float, float]:
    """Coarse log-grid scan followed by bounded refinement; returns (argmax, max)."""
    grid = np.geomspace(lo, hi, n)
    vals = fn(grid)
    i = int(np.argmax(vals))
    if i in (0, n - 1):
        return float(grid[i]), float(vals[i])
    res = optimize.minimize_scalar(
        lambda s: -float(fn(np.exp(s))),
        bounds=(math.log(grid[i - 1]), math.log(grid[i + 1])),
        method="bounded",
        options={"xatol": 1e-13},
    )
    x = float(np.exp(res.x))
    v = float(fn(x))
    return (x, v) if v >= vals[i] else (float(grid[i]), float(vals[i]))


def weizsacker_bracket_max(return_argmax: bool = False):
    """Maximum of the Weizsaecker bracket over t >= 0 (about 1.6582901122)."""
    t, v = _maximize_log(weizsacker_bracket, 1e-4, 1e4)
    return (v, t) if return_argmax else v


def eta0(alpha: float) -> float:
    """sup_{t>0} X(t) / t**alpha for alpha in [0, 4]."""
    if not 0.0 <= alpha <= 4.0:
        raise DomainError("alpha must lie in [0, 4]; the supremum is infinite otherwise")

    def ratio(t):
        t = np.asarray(t, dtype=float)
        return x_fn(t) / t**alpha

    t, v = _maximize_log(ratio, 1e-6, 1e4)
    # X(t)/t^alpha -> 2 t^(4-alpha) as t -> 0
    limit0 = 2.0 if alpha == 4.0 else 0.0
    return max(v, limit0)


def exchange_linear_coefficient(alpha: float = 3.0) -> float:
    """Coefficient e with X(rho) <= e * c * N, from X(t) <= eta0 t^3.

    (c^4 / 8 pi^3) eta0 (p/c)^3 = 3 eta0 c rho / (8 pi), so e = 3 eta0 / (8 pi).
    """
    if alpha != 3.0:
        raise DomainError("a bound linear in N needs alpha = 3")
    return 3.0 * eta0(3.0) / (8.0 * math.pi)


def tf_quintic_constant() -> tuple[float, float]:
    """Sharp constant C in tf(t) <= C t^5, returned as (C, argmax).

    tf(t)/t^5 decreases from its t -> 0 limit 4/5, so the supremum is that limit.
    """
    t, v = _maximize_log(lambda t: tf_fn(t) / np.asarray(t) ** 5, 1e-6, 1e4)
    limit0 = float(SERIES["tf"][0])
    if limit0 >= v:
        return limit0, 0.0
    return v, t
