"""Exact arithmetic with real quadratic irrationals (a + b*sqrt(D)) / c.

Axis endpoints of hyperbolic integer matrices live here; comparisons against
rationals and against other points over the same sqrt(D) are exact integer
arithmetic, so interval membership near an axis never suffers float error.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt


def _sign(n: int) -> int:
    return (n > 0) - (n < 0)


@dataclass(frozen=True)
class QuadraticIrrational:
    """(a + b*sqrt(d)) / c with integers a, b, c and d > 0 not a perfect square."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.c == 0:
            raise ZeroDivisionError("zero denominator")
        if self.d <= 0 or isqrt(self.d) ** 2 == self.d:
            raise ValueError("d must be a positive non-square")
        a, b, c = self.a, self.b, self.c
        if c < 0:
            a, b, c = -a, -b, -c
        g = gcd(gcd(abs(a), abs(b)), c)
        object.__setattr__(self, "a", a // g)
        object.__setattr__(self, "b", b // g)
        object.__setattr__(self, "c", c // g)

    def __float__(self) -> float:
        return (self.a + self.b * self.d ** 0.5) / self.c

    def __str__(self) -> str:
        return f"({self.a}{self.b:+d}*sqrt({self.d}))/{self.c}"

    def conjugate(self) -> "QuadraticIrrational":
        return QuadraticIrrational(self.a, -self.b, self.c, self.d)

    # -- exact comparisons --------------------------------------------------

    def _num_sign(self) -> int:
        """Sign of a + b*sqrt(d) (never 0: b != 0 would be rational otherwise)."""
        a, b, d = self.a, self.b, self.d
        if b == 0:
            return _sign(a)
        if a == 0:
            return _sign(b)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        lhs, rhs = a * a, b * b * d
        if a > 0:  # b < 0
            return 1 if lhs > rhs else -1
        return 1 if rhs > lhs else -1  # a < 0, b > 0

    def sign(self) -> int:
        return self._num_sign()  # post-init keeps c > 0

    def cmp_fraction(self, p: int, q: int) -> int:
        """Exact sign of self - p/q for q > 0."""
        if q <= 0:
            raise ValueError("q must be positive")
        # (a*q - p*c) + b*q*sqrt(d), all over c*q > 0
        diff = QuadraticIrrational(self.a * q - p * self.c, self.b * q, self.c * q, self.d) \
            if self.b * q != 0 else None
        if diff is None:
            return _sign(self.a * q - p * self.c)
        return diff.sign()

    def cmp(self, other: "QuadraticIrrational") -> int:
        """Exact sign of self - other; requires the same d."""
        if self.d != other.d:
            raise ValueError("comparison needs matching sqrt(d)")
        a = self.a * other.c - other.a * self.c
        b = self.b * other.c - other.b * self.c
        if b == 0:
            return _sign(a)
        return QuadraticIrrational(a, b, self.c * other.c, self.d).sign()

    def __lt__(self, other):
        return self.cmp(other) < 0

    def floor(self) -> int:
        """Exact floor, via an isqrt candidate corrected by exact comparison."""
        n = (self.a + self.b * isqrt(self.b * self.b * self.d) * _sign(self.b)) // self.c
        while self.cmp_fraction(n + 1, 1) >= 0:
            n += 1
        while self.cmp_fraction(n, 1) < 0:
            n -= 1
        return n

    # -- arithmetic needed by continued fractions ---------------------------

    def minus_int(self, n: int) -> "QuadraticIrrational":
        return QuadraticIrrational(self.a - n * self.c, self.b, self.c, self.d)

    def reciprocal(self) -> "QuadraticIrrational":
        # c / (a + b sqrt d) = c (a - b sqrt d) / (a^2 - b^2 d)
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadraticIrrational(self.c * self.a, -self.c * self.b, norm, self.d)


def continued_fraction_cycle(x: QuadraticIrrational, cap: int = 10_000):
    """Partial quotients of x up to and including its periodic cycle.

    Returns (preperiod, cycle) as lists of ints.  Every real quadratic
    irrational is eventually periodic, so this terminates.
    """
    seen: dict[QuadraticIrrational, int] = {}
    quotients: list[int] = []
    for step in range(cap):
        if x in seen:
            k = seen[x]
            return quotients[:k], quotients[k:]
        seen[x] = step
        a = x.floor()
        quotients.append(a)
        x = x.minus_int(a).reciprocal()
    raise RuntimeError("continued fraction failed to cycle")  # pragma: no cover
