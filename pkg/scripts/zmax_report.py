"""Critical nuclear charge for the molecular stability argument.

Compares the closed-form Z_max with the value rebuilt from the ball and
exterior constants, and with the value obtained if the ball constant is
halved (2972/105 in place of 5944/105).
"""

import argparse
import math

from tfwd import stability


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, nargs="+", default=[137.037])
    args = ap.parse_args()

    ball = stability.ball_term_constant()
    print(f"ball integral        = {stability.ball_integral()}")
    print(f"ball constant        = {ball} pi = {float(ball) * math.pi:.6f}")
    print(f"Z_max coefficient    = sqrt({stability.z_max_coefficient()} pi)")
    print(f"closed form matches  = {stability.closed_form_matches()}")
    print(f"{'c':>10} {'closed form':>14} {'rederived':>14} {'halved ball':>14} {'ratio':>8}")
    for c in args.c:
        zp = stability.z_max_closed_form(c)
        zr = stability.z_max_rederived(c)
        zh = stability.z_max_printed_condition(c)
        print(f"{c:10.3f} {zp:14.7f} {zr:14.7f} {zh:14.7f} {zh / zp:8.4f}")


if __name__ == "__main__":
    main()
