"""Exact q-series for the Tate curve ``y^2 + xy = x^3 + a4(q) x + a6(q)``
and numeric evaluation of its uniformizing functions ``X(z)``, ``Y(z)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NotDivisible, PoleTooClose

#: evaluation refuses z within this distance of q^n
POLE_GUARD = 1e-6


@dataclass(frozen=True)
class IntegerPowerSeries:
    """``c_0 + c_1 q + ... + c_N q^N + O(q^(N+1))`` with Python-int coefficients.

    Binary operations on series of different orders truncate to the smaller one.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a series needs at least the constant term")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @classmethod
    def zero(cls, order: int) -> "IntegerPowerSeries":
        return cls((0,) * (order + 1))

    @classmethod
    def one(cls, order: int) -> "IntegerPowerSeries":
        return cls((1,) + (0,) * order)

    @classmethod
    def monomial(cls, n: int, order: int, c: int = 1) -> "IntegerPowerSeries":
        out = [0] * (order + 1)
        if n <= order:
            out[n] = c
        return cls(tuple(out))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]

    def truncate(self, order: int) -> "IntegerPowerSeries":
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return IntegerPowerSeries(self.coeffs[: order + 1])

    def _lift(self, other) -> "IntegerPowerSeries":
        if isinstance(other, IntegerPowerSeries):
            return other
        if isinstance(other, int):
            return IntegerPowerSeries.monomial(0, self.order, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return IntegerPowerSeries(tuple(a + b for a, b in zip(self.coeffs[: n + 1], other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return IntegerPowerSeries(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return IntegerPowerSeries(tuple(c * other for c in self.coeffs))
        if not isinstance(other, IntegerPowerSeries):
            return NotImplemented
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [0] * (n + 1)
        for i in range(n + 1):
            ai = a[i]
            if ai:
                for j in range(n + 1 - i):
                    out[i + j] += ai * b[j]
        return IntegerPowerSeries(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers need exact_div")
        out = IntegerPowerSeries.one(self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def exact_div(self, other) -> "IntegerPowerSeries":
        """Exact division by an integer or by a series with constant term +-1."""
        if isinstance(other, int):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            bad = [n for n, c in enumerate(self.coeffs) if c % other]
            if bad:
                raise NotDivisible(f"coefficient of q^{bad[0]} is not divisible by {other}")
            return IntegerPowerSeries(tuple(c // other for c in self.coeffs))
        n = min(self.order, other.order)
        u = other.coeffs[0]
        if u not in (1, -1):
            raise NotDivisible(f"series with constant term {u} is not a unit in Z[[q]]")
        b = other.coeffs
        out = [0] * (n + 1)
        for k in range(n + 1):
            acc = self.coeffs[k] - sum(out[j] * b[k - j] for j in range(k))
            out[k] = acc * u  # u is its own inverse
        return IntegerPowerSeries(tuple(out))

    def shift(self, n: int) -> "IntegerPowerSeries":
        """Multiply by ``q^n`` keeping the order."""
        return IntegerPowerSeries(((0,) * n + self.coeffs)[: self.order + 1])

    def __call__(self, q):
        """Numeric value of the truncated polynomial (Horner)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def reduce_mod(self, p: int) -> tuple[int, ...]:
        return tuple(c % p for c in self.coeffs)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "IntegerPowerSeries":
        return cls(tuple(int(x) for x in data))


def divisor_sum(n: int, k: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def s_k_series(k: int, N: int) -> IntegerPowerSeries:
    """``sum_n n^k q^n / (1 - q^n)``: coefficient of ``q^n`` is ``sigma_k(n)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    out = [0] * (N + 1)
    # sieve: each d contributes d^k to every multiple of d
    for d in range(1, N + 1):
        dk = d ** k
        for m in range(d, N + 1, d):
            out[m] += dk
    return IntegerPowerSeries(tuple(out))


def a4_series(N: int) -> IntegerPowerSeries:
    return s_k_series(3, N) * -5


def a6_series(N: int) -> IntegerPowerSeries:
    """``-(5 s_3 + 7 s_5) / 12``, divided exactly."""
    num = s_k_series(3, N) * 5 + s_k_series(5, N) * 7
    return (-num).exact_div(12)


def delta_series(N: int) -> IntegerPowerSeries:
    """``q prod_{m>=1} (1 - q^m)^24`` through ``q^N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    prod = IntegerPowerSeries.one(N)
    for m in range(1, N + 1):
        prod = prod * (IntegerPowerSeries.one(N) - IntegerPowerSeries.monomial(m, N))
    return (prod ** 24).shift(1)


def discriminant_series(N: int) -> IntegerPowerSeries:
    """Discriminant of ``y^2 + xy = x^3 + a4 x + a6`` from the c4, c6 invariants."""
    a4, a6 = a4_series(N), a6_series(N)
    # a1 = 1, a2 = a3 = 0
    b2 = IntegerPowerSeries.monomial(0, N)
    b4 = a4 * 2
    b6 = a6 * 4
    c4 = b2 * b2 - b4 * 24
    c6 = -(b2 * b2 * b2) + b2 * b4 * 36 - b6 * 216
    return (c4 * c4 * c4 - c6 * c6).exact_div(1728)


# ---------------------------------------------------------------------------
# numeric X(z), Y(z)


def _fold(z: complex, q: complex) -> complex:
    """Move ``z`` into ``|q| < |z| < 1/|q|`` (where both sums converge) by powers of q."""
    aq = abs(q)
    while abs(z) >= 1 / aq:
        z *= q
    while abs(z) <= aq:
        z /= q
    return z


def _check(z: complex, q: complex) -> complex:
    """Validate and fold ``z``; the annulus contains 1 and touches q and 1/q."""
    if not 0 < abs(q) < 1:
        raise ValueError(f"need 0 < |q| < 1, got {q!r}")
    if z == 0:
        raise PoleTooClose("z = 0 is not a point of C^*")
    z = _fold(z, q)
    if min(abs(z - 1), abs(z - q), abs(z - 1 / q)) < POLE_GUARD:
        raise PoleTooClose(f"z is within {POLE_GUARD:g} of a point of q^Z")
    return z


def eval_X(z: complex, q: complex, N: int = 60) -> complex:
    """Unilateral form of ``X``::

        z/(1-z)^2 + sum_{n=1}^N [q^n z/(1-q^n z)^2 + q^n z^-1/(1-q^n z^-1)^2 - 2 q^n/(1-q^n)^2]

    Points outside ``|q| < |z| < 1/|q|`` are first moved there (X is q-periodic).
    """
    z, q = complex(z), complex(q)
    z = _check(z, q)
    w = 1 / z
    acc = z / (1 - z) ** 2
    for n in range(1, N + 1):
        qn = q ** n
        u, v = qn * z, qn * w
        acc += u / (1 - u) ** 2 + v / (1 - v) ** 2 - 2 * qn / (1 - qn) ** 2
    return acc


def eval_Y(z: complex, q: complex, N: int = 60) -> complex:
    """Unilateral form of ``Y``::

        z^2/(1-z)^3 + sum_{n=1}^N [(q^n z)^2/(1-q^n z)^3 - q^n z^-1/(1-q^n z^-1)^3 + q^n/(1-q^n)^2]

    The middle term carries a minus sign: it is the ``n -> -n`` half of the
    bilateral sum, since ``u^2/(1-u)^3 = -v/(1-v)^3`` for ``v = 1/u``.
    """
    z, q = complex(z), complex(q)
    z = _check(z, q)
    w = 1 / z
    acc = z * z / (1 - z) ** 3
    for n in range(1, N + 1):
        qn = q ** n
        u, v = qn * z, qn * w
        acc += u * u / (1 - u) ** 3 - v / (1 - v) ** 3 + qn / (1 - qn) ** 2
    return acc


def weierstrass_residual(z: complex, q: complex, N: int = 60) -> float:
    """``|Y^2 + XY - X^3 - a4 X - a6|`` at ``(X(z), Y(z))``."""
    x, y = eval_X(z, q, N), eval_Y(z, q, N)
    a4 = complex(a4_series(N)(q))
    a6 = complex(a6_series(N)(q))
    return abs(y * y + x * y - x ** 3 - a4 * x - a6)


def series_grid_residuals(zs, qs, N: int = 60) -> np.ndarray:
    return np.array([[weierstrass_residual(z, q, N) for z in zs] for q in qs])


__all__ = [
    "IntegerPowerSeries",
    "a4_series",
    "a6_series",
    "delta_series",
    "discriminant_series",
    "divisor_sum",
    "eval_X",
    "eval_Y",
    "s_k_series",
    "weierstrass_residual",
]
