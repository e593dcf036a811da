"""Moebius transformations of the Riemann sphere.

Maps are stored as determinant-1 lifts ``((a, b), (c, d))``. The point at
infinity is the sentinel :data:`INF`; every function that accepts or returns
a point of the sphere understands it.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFixedPoints, FixesInfinity, NotLoxodromic

#: maps whose multiplier is closer than this to the unit circle are rejected
LOXODROMIC_MARGIN = 1e-9


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(z) -> bool:
    return z is INF


def _sqrt_det_branch(w: complex) -> complex:
    """Square root with nonnegative real part; ties broken toward Im >= 0."""
    s = cmath.sqrt(w)
    if s.real < 0 or (s.real == 0 and s.imag < 0):
        s = -s
    return s


@dataclass(frozen=True)
class MoebiusMap:
    """``z -> (a z + b) / (c z + d)`` with ``a d - b c = 1``.

    ``scale`` is the square root that was divided out of the entries passed
    to the constructor, so ``scale * (a, b, c, d)`` reproduces them.
    """

    a: complex
    b: complex
    c: complex
    d: complex
    scale: complex = field(default=1.0, compare=False)

    def __post_init__(self):
        a, b, c, d = (complex(x) for x in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if det == 0 or not cmath.isfinite(det):
            raise ValueError(f"singular or non-finite matrix {(a, b, c, d)}")
        s = _sqrt_det_branch(det)
        if s != 1:
            a, b, c, d = a / s, b / s, c / s, d / s
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "scale", complex(self.scale) * s)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        (a, b), (c, d) = m
        return cls(a, b, c, d)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        if z is INF:
            return INF if self.c == 0 else self.a / self.c
        den = self.c * z + self.d
        # a denominator at rounding level means z is the pole
        if abs(den) <= 4e-16 * (abs(self.c * z) + abs(self.d)):
            return INF
        return (self.a * z + self.b) / den

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def power(self, k: int) -> "MoebiusMap":
        if k < 0:
            return self.inverse().power(-k)
        out = MoebiusMap.identity()
        for _ in range(k):
            out = compose(out, self)
        return out

    def derivative(self, z: complex) -> complex:
        return 1.0 / (self.c * z + self.d) ** 2

    def conjugate_by(self, n: "MoebiusMap") -> "MoebiusMap":
        """Return ``n o self o n^-1``."""
        return compose(compose(n, self), n.inverse())

    def is_close(self, other: "MoebiusMap", tol: float = 1e-12) -> bool:
        """Projective equality of the two lifts (up to sign)."""
        p = np.array([self.a, self.b, self.c, self.d])
        r = np.array([other.a, other.b, other.c, other.d])
        return min(np.max(np.abs(p - r)), np.max(np.abs(p + r))) < tol

    # properties derived from the spectrum
    def eigenvalues(self) -> tuple[complex, complex]:
        """(large, small) eigenvalues of the lift, large first."""
        t = self.trace
        disc = cmath.sqrt(t * t - 4)
        l1 = (t + disc) / 2
        l2 = (t - disc) / 2
        if abs(l2) > abs(l1):
            l1, l2 = l2, l1
        if l1 == 0:
            raise NotLoxodromic("zero eigenvalue")
        return l1, 1.0 / l1

    def multiplier(self) -> complex:
        return multiplier(self)

    def fixed_points(self):
        return fixed_points(self)

    def isometric_circle(self) -> "Circle":
        return isometric_circle(self)


@dataclass(frozen=True)
class Circle:
    """A circle bounding a disk of the sphere.

    ``outside`` marks the bounded side as *not* being the disk, i.e. the
    disk is the exterior and contains infinity. ``orientation`` is the
    orientation that keeps the disk on the left.
    """

    center: complex
    radius: float
    orientation: str = "ccw"
    outside: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")
        if self.orientation not in ("ccw", "cw"):
            raise ValueError(f"bad orientation {self.orientation!r}")

    def contains(self, z) -> bool:
        """Whether ``z`` lies in the (open) disk side."""
        if z is INF:
            return self.outside
        inside = abs(z - self.center) < self.radius
        return inside != self.outside

    def points(self, n: int, offset: float = 0.0) -> np.ndarray:
        theta = 2 * np.pi * (np.arange(n) + offset) / n
        return self.center + self.radius * np.exp(1j * theta)

    def with_radius(self, radius: float) -> "Circle":
        return Circle(self.center, radius, self.orientation, self.outside)


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """The map ``m1 o m2`` (matrix product ``m1 @ m2``)."""
    return MoebiusMap(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def multiplier(m: MoebiusMap) -> complex:
    """Multiplier ``q`` with ``0 < |q| < 1``, so that ``q + 1/q + 2 = trace^2``.

    Computed as ``1 / lambda^2`` for the large eigenvalue ``lambda``; this keeps
    full relative precision when ``q`` is tiny.
    """
    big, _ = m.eigenvalues()
    q = 1.0 / (big * big)
    if not abs(q) < 1 - LOXODROMIC_MARGIN:
        raise NotLoxodromic(f"|q| = {abs(q)!r} is not bounded away from 1")
    return q


def _eigenpoint(m: MoebiusMap, lam: complex):
    v1 = (m.b, lam - m.a)
    v2 = (lam - m.d, m.c)
    n1 = abs(v1[0]) + abs(v1[1])
    n2 = abs(v2[0]) + abs(v2[1])
    x, y = v1 if n1 >= n2 else v2
    if abs(y) <= 1e-15 * abs(x):
        return INF
    return x / y


def fixed_points(m: MoebiusMap):
    """``(attracting, repelling)`` fixed points of a loxodromic map."""
    multiplier(m)  # loxodromic check
    big, small = m.eigenvalues()
    return _eigenpoint(m, big), _eigenpoint(m, small)


def from_fixed_points(alpha, beta, q: complex) -> MoebiusMap:
    """The loxodromic map with attracting point ``alpha``, repelling ``beta``
    and multiplier ``q``.
    """
    q = complex(q)
    if not 0 < abs(q) < 1 - LOXODROMIC_MARGIN:
        raise NotLoxodromic(f"multiplier {q!r} must satisfy 0 < |q| < 1")
    if alpha is INF and beta is INF:
        raise DegenerateFixedPoints("alpha == beta == INF")
    if alpha is INF:
        beta = complex(beta)
        return MoebiusMap(1, beta * (q - 1), 0, q)
    if beta is INF:
        alpha = complex(alpha)
        return MoebiusMap(q, alpha * (1 - q), 0, 1)
    alpha, beta = complex(alpha), complex(beta)
    if alpha == beta:
        raise DegenerateFixedPoints(f"alpha == beta == {alpha!r}")
    return MoebiusMap(
        alpha - q * beta,
        alpha * beta * (q - 1),
        1 - q,
        q * alpha - beta,
    )


def isometric_circle(m: MoebiusMap) -> Circle:
    """The circle ``|c z + d| = 1``; ``m`` maps its exterior onto the interior
    of ``isometric_circle(m.inverse())``.
    """
    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
    if abs(m.c) <= 1e-15 * scale:
        raise FixesInfinity("map fixes infinity; no isometric circle")
    return Circle(-m.d / m.c, 1.0 / abs(m.c))


def three_point_map(z1, z2, z3) -> MoebiusMap:
    """The map sending ``z1, z2, z3`` to ``0, INF, 1``."""
    pts = (z1, z2, z3)
    if sum(p is INF for p in pts) > 1:
        raise DegenerateFixedPoints("more than one point at infinity")
    if z1 is INF:
        return MoebiusMap(0, z3 - z2, 1, -z2)
    if z2 is INF:
        return MoebiusMap(1, -z1, 0, z3 - z1)
    if z3 is INF:
        return MoebiusMap(1, -z1, 1, -z2)
    if len({complex(z1), complex(z2), complex(z3)}) < 3:
        raise DegenerateFixedPoints("points must be distinct")
    return MoebiusMap(z3 - z2, -z1 * (z3 - z2), z3 - z1, -z2 * (z3 - z1))


def points_close(z, w, tol: float = 1e-10) -> bool:
    if z is INF or w is INF:
        return z is w
    return abs(z - w) <= tol * max(1.0, abs(z), abs(w))


__all__ = [
    "INF",
    "Circle",
    "MoebiusMap",
    "compose",
    "fixed_points",
    "from_fixed_points",
    "is_inf",
    "isometric_circle",
    "multiplier",
    "points_close",
    "three_point_map",
]
