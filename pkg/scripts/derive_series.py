"""Cross-check the small-t series coefficients against mpmath Taylor expansions.

The package builds the coefficients in exact rational arithmetic; here they are
compared with numerical Taylor coefficients computed at 60 digits.
"""

import mpmath as mp

from tfwd.specfun import SERIES

mp.mp.dps = 60

FUNCS = {
    "tf": (lambda t: t * mp.sqrt(1 + t * t) * (2 * t * t + 1) - mp.asinh(t) - mp.mpf(8) / 3 * t**3, 5),
    "g": (lambda t: t * mp.sqrt(1 + t * t) - mp.asinh(t), 3),
    "f_sq": (lambda t: t / mp.sqrt(1 + t * t) + 2 * t * t * mp.asinh(t) / (1 + t * t), 1),
}


def main(n_terms: int = 8):
    worst = 0.0
    for name, (fn, lead) in FUNCS.items():
        taylor = mp.taylor(fn, 0, lead + 2 * n_terms)
        print(f"{name}: value = t^{lead} * sum c_k t^(2k)")
        for k in range(n_terms):
            exact = SERIES[name][k]
            num = taylor[lead + 2 * k]
            rel = abs(num / mp.mpf(exact.numerator) * exact.denominator - 1)
            worst = max(worst, float(rel))
            print(f"  c_{k} = {str(exact):>24}   mpmath {mp.nstr(num, 20):>26}   rel {float(rel):.1e}")
    print(f"worst relative mismatch {worst:.1e}")


if __name__ == "__main__":
    main()
