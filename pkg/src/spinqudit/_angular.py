"""Exact angular-momentum coefficients: Wigner small-d and Clebsch-Gordan.

All half-integer quantum numbers are passed in doubled-integer form
(two_j = 2j, two_m = 2m) so that sums over factorials stay in exact
integer arithmetic; only the final trigonometric evaluation is floating
point.  Adequate and stable for 2j <= 20, which is far beyond the d=8
desk scale.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, cos, factorial, isqrt, sin, sqrt


def _check_doubled(two_j: int, two_m: int) -> None:
    if (two_j - two_m) % 2 != 0:
        raise ValueError(f"m and j must differ by an integer: 2j={two_j}, 2m={two_m}")
    if abs(two_m) > two_j:
        raise ValueError(f"|m| <= j required: 2j={two_j}, 2m={two_m}")


def wigner_small_d(two_j: int, two_mp: int, two_m: int, beta: float) -> float:
    """d^j_{m',m}(beta) = <j m'| exp(-i beta J_y) |j m>.

    Wigner's explicit sum with exact integer factorials; the cosine and
    sine half-angle powers are the only floating-point inputs.
    """
    _check_doubled(two_j, two_mp)
    _check_doubled(two_j, two_m)
    jpm = (two_j + two_m) // 2
    jmm = (two_j - two_m) // 2
    jpmp = (two_j + two_mp) // 2
    jmmp = (two_j - two_mp) // 2

    c = cos(beta / 2.0)
    s = sin(beta / 2.0)
    norm = sqrt(factorial(jpm) * factorial(jmm) * factorial(jpmp) * factorial(jmmp))

    mp_minus_m = (two_mp - two_m) // 2
    smin = max(0, -mp_minus_m)
    smax = min(jpm, jmmp)
    total = 0.0
    for k in range(smin, smax + 1):
        denom = (
            factorial(jpm - k)
            * factorial(k)
            * factorial(mp_minus_m + k)
            * factorial(jmmp - k)
        )
        sign = -1.0 if (mp_minus_m + k) % 2 else 1.0
        total += sign / denom * c ** (two_j - mp_minus_m - 2 * k) * s ** (mp_minus_m + 2 * k)
    return norm * total


def wigner_small_d_matrix(two_j: int, beta: float) -> list[list[float]]:
    """Full (2j+1)x(2j+1) d-matrix, rows/cols ordered by descending m."""
    ms = list(range(two_j, -two_j - 2, -2))
    return [[wigner_small_d(two_j, tmp, tm, beta) for tm in ms] for tmp in ms]


@lru_cache(maxsize=None)
def clebsch_gordan(
    two_j1: int, two_m1: int, two_j2: int, two_m2: int, two_j: int, two_m: int
) -> float:
    """<j1 m1; j2 m2 | j m> via the Racah formula, exact until the final sqrt."""
    _check_doubled(two_j1, two_m1)
    _check_doubled(two_j2, two_m2)
    _check_doubled(two_j, two_m)
    if two_m1 + two_m2 != two_m:
        return 0.0
    if not (abs(two_j1 - two_j2) <= two_j <= two_j1 + two_j2):
        return 0.0
    if (two_j1 + two_j2 + two_j) % 2 != 0:
        return 0.0

    def f(two_x: int) -> int:
        if two_x % 2 != 0 or two_x < 0:
            raise ValueError("factorial of a non-integer or negative half-sum")
        return factorial(two_x // 2)

    pref = Fraction(two_j + 1) * Fraction(
        f(two_j + two_j1 - two_j2) * f(two_j - two_j1 + two_j2) * f(two_j1 + two_j2 - two_j),
        f(two_j1 + two_j2 + two_j + 2),
    )
    pref *= Fraction(
        f(two_j + two_m) * f(two_j - two_m) * f(two_j1 - two_m1) * f(two_j1 + two_m1)
        * f(two_j2 - two_m2) * f(two_j2 + two_m2),
        1,
    )

    kmin = max(
        0,
        (two_j2 - two_j - two_m1) // 2,
        (two_j1 - two_j + two_m2) // 2,
    )
    kmax = min(
        (two_j1 + two_j2 - two_j) // 2,
        (two_j1 - two_m1) // 2,
        (two_j2 + two_m2) // 2,
    )
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        denom = (
            factorial(k)
            * f(two_j1 + two_j2 - two_j - 2 * k)
            * f(two_j1 - two_m1 - 2 * k)
            * f(two_j2 + two_m2 - 2 * k)
            * f(two_j - two_j2 + two_m1 + 2 * k)
            * f(two_j - two_j1 - two_m2 + 2 * k)
        )
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return 0.0
    # sign(total) * sqrt(pref) * |total|, all exact until the sqrt
    val = pref * total * total
    out = _sqrt_fraction(val)
    return out if total > 0 else -out


def _sqrt_fraction(x: Fraction) -> float:
    """sqrt of a nonnegative Fraction, exact when the operand is a perfect square."""
    num, den = x.numerator, x.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return rn / rd
    return sqrt(num / den)


def binomial(n: int, k: int) -> int:
    return comb(n, k)
