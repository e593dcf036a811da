"""Holomorphic 1-forms as Poincare series, contour quadrature on the
fundamental circles, the Eichler pairing for quadratic differentials and
the period determinants built from them.

Densities are plain functions of ``z`` (``omega_i = f_i(z) dz``); a product
``omega_a omega_b`` is the 2-differential with density ``f_a f_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CirclesRequired,
    DimensionMismatch,
    FitFailed,
    GenusTooSmall,
    NoConvergence,
    PoleTooClose,
    SingularPairing,
)
from .moebius import INF, Circle
from .schottky import SchottkyGroup, build_from_fixed_points, disjointness_margin
from .zetaprod import TruncationPolicy, zograf_F1

#: density evaluation refuses points closer than this to a pole
POLE_GUARD = 1e-6
#: circles with a pole closer than this fraction of the radius get moved
CIRCLE_GUARD = 1e-3
MAX_NODES = 2 ** 16
START_NODES = 16
SINGULAR_COND = 1e12


# ---------------------------------------------------------------------------
# Poincare series for omega_i


def _coset_matrices(group: SchottkyGroup, i: int, max_len: int) -> np.ndarray:
    """Matrices of the reduced words of length <= max_len not ending in +-i.

    Built level by level by prepending letters, so each level is a single
    batched matrix product.
    """
    stack = group.generator_stack()
    k = 2 * group.genus
    banned = {2 * (i - 1), 2 * (i - 1) + 1}
    mats = [np.eye(2, dtype=complex)[None]]
    level_m = None
    level_first = None
    for n in range(1, max_len + 1):
        if n == 1:
            letters = np.array([r for r in range(k) if r not in banned], dtype=int)
            level_m = stack[letters]
            level_first = letters
        else:
            new_m, new_first = [], []
            for r in range(k):
                keep = level_first != (r ^ 1)
                if keep.any():
                    new_m.append(np.einsum("ij,njk->nik", stack[r], level_m[keep]))
                    new_first.append(np.full(int(keep.sum()), r))
            level_m = np.concatenate(new_m)
            level_first = np.concatenate(new_first)
        if len(level_m) == 0:
            break
        mats.append(level_m)
    return np.concatenate(mats)


def _proj(p) -> tuple[complex, complex]:
    return (1 + 0j, 0j) if p is INF else (complex(p), 1 + 0j)


@dataclass(frozen=True)
class OneFormSeries:
    """Truncated coset series for ``omega_i``.

    Each coset ``phi <gamma_i>`` contributes ``1/(z - phi(x_i)) - 1/(z - phi(x_-i))``;
    a pair of finite images is stored as ``(p, p - m)`` with the difference
    computed in closed form so nearby images do not cancel. Terms with an
    image at infinity contribute only their finite half.
    """

    group: SchottkyGroup
    i: int
    max_len: int
    plus: np.ndarray = field(repr=False)
    diff: np.ndarray = field(repr=False)
    lone_plus: np.ndarray = field(repr=False)
    lone_minus: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, group: SchottkyGroup, i: int, max_len: int) -> "OneFormSeries":
        return _series(group, i, max_len)

    def poles(self) -> np.ndarray:
        return np.concatenate([self.plus, self.plus - self.diff, self.lone_plus, self.lone_minus])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        poles = self.poles()
        if poles.size:
            nearest = np.min(np.abs(flat[:, None] - poles[None, :]), axis=1)
            if nearest.min() < POLE_GUARD:
                raise PoleTooClose(f"evaluation point within {nearest.min():.2e} of a pole")
        out = np.zeros(flat.shape, dtype=complex)
        for lo in range(0, flat.size, 256):
            zz = flat[lo : lo + 256, None]
            zp = zz - self.plus[None, :]
            acc = (self.diff[None, :] / (zp * (zp + self.diff[None, :]))).sum(axis=1)
            if self.lone_plus.size:
                acc += (1 / (zz - self.lone_plus[None, :])).sum(axis=1)
            if self.lone_minus.size:
                acc -= (1 / (zz - self.lone_minus[None, :])).sum(axis=1)
            out[lo : lo + 256] = acc
        return out.reshape(z.shape) if z.ndim else complex(out[0])


@lru_cache(maxsize=64)
def _series(group: SchottkyGroup, i: int, max_len: int) -> OneFormSeries:
    if not 1 <= i <= group.genus:
        raise ValueError(f"generator index {i} not in 1..{group.genus}")
    mats = _coset_matrices(group, i, max_len)
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    u1, u2 = _proj(group.alphas[i - 1])
    v1, v2 = _proj(group.betas[i - 1])
    den_u = c * u1 + d * u2
    den_v = c * v1 + d * v2
    scale = np.maximum(np.abs(c), np.abs(d))
    fin_u = np.abs(den_u) > 1e-300 * scale
    fin_v = np.abs(den_v) > 1e-300 * scale
    both = fin_u & fin_v
    with np.errstate(divide="ignore", invalid="ignore"):
        img_u = (a * u1 + b * u2) / den_u
        img_v = (a * v1 + b * v2) / den_v
        # phi(u) - phi(v) = det (u1 v2 - u2 v1) / (den_u den_v), det = 1
        diff = (u1 * v2 - u2 * v1) / (den_u * den_v)
    return OneFormSeries(
        group,
        i,
        max_len,
        plus=img_u[both],
        diff=diff[both],
        lone_plus=img_u[fin_u & ~fin_v],
        lone_minus=img_v[fin_v & ~fin_u],
    )


def omega_eval(group: SchottkyGroup, i: int, z, max_len: int):
    """Density ``f_i(z)`` of the truncated series for ``omega_i``."""
    return _series(group, i, max_len)(z)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class Quadrature:
    value: complex | np.ndarray
    nodes: int
    change: float


def contour_quadrature(f: Callable, circle: Circle, tol: float = 1e-10,
                       max_nodes: int = MAX_NODES) -> Quadrature:
    """``(1/2 pi i) oint f dz`` over ``circle`` by the periodic trapezoid rule.

    Nodes are doubled (reusing the previous ones) until two successive
    values differ by less than ``tol``. ``f`` may return an array per node
    (trailing axes are integrated componentwise). The circle is traversed
    with its disk on the left.
    """
    sign = 1.0 if circle.orientation == "ccw" else -1.0
    c = circle.center

    def weighted_sum(n: int, offset: float):
        z = circle.points(n, offset)
        vals = np.asarray(f(z))
        w = (z - c).reshape((-1,) + (1,) * (vals.ndim - 1))
        return (vals * w).sum(axis=0)

    n = START_NODES
    total = weighted_sum(n, 0.0)
    value = sign * total / n
    while n < max_nodes:
        # the new nodes sit halfway between the old ones
        total = total + weighted_sum(n, 0.5)
        n *= 2
        new = sign * total / n
        change = float(np.max(np.abs(new - value)))
        value = new
        if change < tol:
            return Quadrature(value, n, change)
    raise NoConvergence(f"quadrature did not reach tol {tol:g} with {max_nodes} nodes")


def contour_integral(f: Callable, circle: Circle, tol: float = 1e-10):
    """``(1/2 pi i) oint_circle f(z) dz``."""
    return contour_quadrature(f, circle, tol).value


def _outward(circle: Circle) -> float:
    # radius change that moves the circle away from its own disk
    return -1.0 if circle.outside else 1.0


def guarded_circle(circle: Circle, poles: np.ndarray, room: float) -> Circle:
    """Move ``circle`` off nearby poles by changing its radius.

    Only radii between the original circle and ``room`` further out (toward
    the complement of its disk) are tried, so the circle keeps enclosing the
    same poles as long as ``room`` stays inside the disjointness margin.
    """
    if poles.size == 0:
        return circle
    dist = np.abs(poles - circle.center)

    def clearance(r):
        return float(np.min(np.abs(dist - r)))

    if clearance(circle.radius) >= CIRCLE_GUARD * circle.radius:
        return circle
    step = _outward(circle)
    best_r, best = circle.radius, clearance(circle.radius)
    for s in np.linspace(0, 1, 65)[1:]:
        r = circle.radius + step * s * room
        if r <= 0:
            break
        cl = clearance(r)
        if cl > best:
            best_r, best = r, cl
    return circle.with_radius(best_r)


def _quadrature_circles(group: SchottkyGroup, series: Sequence[OneFormSeries]) -> list[Circle]:
    if group.circles is None:
        raise CirclesRequired("quadrature needs fundamental circles")
    poles = np.concatenate([s.poles() for s in series]) if series else np.zeros(0)
    room = 0.45 * disjointness_margin(group.circles)
    return [guarded_circle(group.circle(i), poles, room) for i in range(1, group.genus + 1)]


# ---------------------------------------------------------------------------
# normalization


def normalization_matrix(group: SchottkyGroup, max_len: int = 8, tol: float = 1e-10) -> np.ndarray:
    """``M[i, j] = (1/2 pi i) oint_{C_i} omega_j``; the identity for normalized forms."""
    g = group.genus
    series = [_series(group, j, max_len) for j in range(1, g + 1)]
    circles = _quadrature_circles(group, series)
    out = np.empty((g, g), dtype=complex)
    for i, circ in enumerate(circles):
        out[i] = contour_integral(lambda z: np.stack([s(z) for s in series], axis=-1), circ, tol)
    return out


# ---------------------------------------------------------------------------
# Eichler cocycles and the pairing


@dataclass(frozen=True)
class EichlerCocycle:
    """Cocycle with ``xi(gamma_l) = delta_{il} (z - anchor)^j`` (weight k = 2)."""

    i: int
    j: int
    anchor: complex = 0j
    k: int = 2

    def __post_init__(self):
        if not 0 <= self.j <= 2 * self.k - 2:
            raise ValueError(f"degree {self.j} exceeds 2k - 2 = {2 * self.k - 2}")

    def value(self, l: int, z):
        z = np.asarray(z, dtype=complex)
        if l != self.i:
            return np.zeros(z.shape, dtype=complex)
        return (z - self.anchor) ** self.j


def cocycle_labels(genus: int) -> list[tuple[int, int]]:
    """Column order ``(1,1), (2,1), (2,2), (i,0), (i,1), (i,2) for i >= 3``."""
    out = [(1, 1), (2, 1), (2, 2)]
    for i in range(3, genus + 1):
        out += [(i, 0), (i, 1), (i, 2)]
    return out


def product_labels(genus: int) -> list[tuple[int, int]]:
    """Row order ``w_l^2 (l <= g), w_1 w_l (l >= 2), w_2 w_l (l >= 3)``."""
    out = [(l, l) for l in range(1, genus + 1)]
    out += [(1, l) for l in range(2, genus + 1)]
    out += [(2, l) for l in range(3, genus + 1)]
    return out


def _is_normalized(group: SchottkyGroup, tol: float = 1e-12) -> bool:
    if group.betas[0] is not INF or group.alphas[0] is INF or abs(group.alphas[0]) > tol:
        return False
    return group.genus < 2 or (group.alphas[1] is not INF and abs(group.alphas[1] - 1) <= tol)


def cocycles(group: SchottkyGroup, convention: str = "zeta") -> list[EichlerCocycle]:
    """The 3g - 3 cocycles in :func:`cocycle_labels` order.

    ``"zeta"`` anchors ``(z - x_i)^j`` at the attracting fixed point of each
    generator and works for any marking; ``"xi"`` uses ``z^j`` except
    ``(z - 1)^j`` for ``i = 2`` and requires a normalized group.
    """
    if convention == "zeta":
        anchors = {}
        for i in range(1, group.genus + 1):
            a = group.alphas[i - 1]
            if a is INF:
                raise ValueError(f"zeta convention needs a finite x_{i}")
            anchors[i] = complex(a)
    elif convention == "xi":
        if not _is_normalized(group):
            raise ValueError("xi convention needs a normalized group (alpha_1=0, alpha_-1=inf, alpha_2=1)")
        anchors = {i: (1 + 0j if i == 2 else 0j) for i in range(1, group.genus + 1)}
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return [EichlerCocycle(i, j, anchors[i]) for i, j in cocycle_labels(group.genus)]


def pairing(group: SchottkyGroup, phi: Callable, xi: EichlerCocycle, tol: float = 1e-10,
            circles: Sequence[Circle] | None = None) -> complex:
    """``(1/2 pi i) sum_l oint_{C_l} phi(z) xi(gamma_l)(z) dz`` for one 2-differential density."""
    if circles is None:
        if group.circles is None:
            raise CirclesRequired("pairing needs fundamental circles")
        circles = [group.circle(l) for l in range(1, group.genus + 1)]
    total = 0j
    for l in range(1, group.genus + 1):
        if l != xi.i:
            continue  # the cocycle vanishes on the other generators
        total += contour_integral(lambda z: phi(z) * xi.value(l, z), circles[l - 1], tol)
    return complex(total)


@dataclass(frozen=True)
class PairingMatrix:
    matrix: np.ndarray
    rows: tuple[tuple[int, int], ...]
    cols: tuple[tuple[int, int], ...]
    convention: str
    max_len: int
    tol: float
    nodes: int
    cond: float

    @property
    def singular(self) -> bool:
        return not self.cond < SINGULAR_COND

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))


def pairing_matrix_k2(group: SchottkyGroup, max_len: int = 8, tol: float = 1e-10,
                      convention: str = "zeta") -> PairingMatrix:
    """Pairings between the products of 1-forms and the cocycles (k = 2)."""
    g = group.genus
    if g < 2:
        raise GenusTooSmall("the k = 2 pairing needs genus >= 2")
    rows = product_labels(g)
    cols = cocycle_labels(g)
    cocs = cocycles(group, convention)
    series = [_series(group, j, max_len) for j in range(1, g + 1)]
    circles = _quadrature_circles(group, series)
    mat = np.zeros((len(rows), len(cols)), dtype=complex)
    nodes = 0
    for l in range(1, g + 1):
        idx = [c for c, coc in enumerate(cocs) if coc.i == l]
        if not idx:
            continue
        anchor = cocs[idx[0]].anchor
        degs = np.array([cocs[c].j for c in idx])

        def integrand(z):
            f = np.stack([s(z) for s in series], axis=-1)
            prods = np.stack([f[:, a - 1] * f[:, b - 1] for a, b in rows], axis=-1)
            powers = (z[:, None] - anchor) ** degs[None, :]
            return prods[:, :, None] * powers[:, None, :]

        res = contour_quadrature(integrand, circles[l - 1], tol)
        nodes = max(nodes, res.nodes)
        mat[:, idx] = res.value
    cond = float(np.linalg.cond(mat))
    return PairingMatrix(mat, tuple(rows), tuple(cols), convention, max_len, tol, nodes, cond)


@dataclass(frozen=True)
class BasisChange:
    B: np.ndarray
    detB: complex
    residual: float
    pairing: PairingMatrix

    def density(self, group: SchottkyGroup, c: int) -> Callable:
        """Density of the ``c``-th normalized basis element."""
        rows = self.pairing.rows
        series = [_series(group, j, self.pairing.max_len) for j in range(1, group.genus + 1)]
        coeffs = self.B[c]

        def phi(z):
            f = [s(z) for s in series]
            return sum(coeffs[r] * f[a - 1] * f[b - 1] for r, (a, b) in enumerate(rows))

        return phi


def normalized_basis_change(group: SchottkyGroup, max_len: int = 8, tol: float = 1e-10,
                            convention: str = "zeta") -> BasisChange:
    """``B = P^-1``; row ``c`` of ``B`` expresses the basis element dual to column ``c``
    in terms of the products ``omega_a omega_b``.
    """
    pm = pairing_matrix_k2(group, max_len, tol, convention)
    if pm.singular:
        raise SingularPairing(f"pairing matrix condition number {pm.cond:.3g}")
    B = np.linalg.inv(pm.matrix)
    resid = float(np.max(np.abs(pm.matrix @ B - np.eye(len(B)))))
    return BasisChange(B, complex(np.linalg.det(B)), resid, pm)


# ---------------------------------------------------------------------------
# periods


def period_determinants(coeff_1, coeff_k, norm_matrix=None) -> tuple[complex, complex]:
    """``(Omega_1, Omega_k)`` for bases ``u = coeff_1 . omega`` and
    ``v = coeff_k . (normalized basis)``.

    ``norm_matrix`` is the computed :func:`normalization_matrix` (the identity
    when omitted).
    """
    c1 = np.atleast_2d(np.asarray(coeff_1, dtype=complex))
    ck = np.atleast_2d(np.asarray(coeff_k, dtype=complex))
    if c1.shape[0] != c1.shape[1] or ck.shape[0] != ck.shape[1]:
        raise DimensionMismatch("coefficient matrices must be square")
    if norm_matrix is None:
        norm_matrix = np.eye(len(c1))
    norm_matrix = np.asarray(norm_matrix, dtype=complex)
    if norm_matrix.shape != c1.shape:
        raise DimensionMismatch(f"coeff_1 is {c1.shape}, normalization matrix is {norm_matrix.shape}")
    g = len(c1)
    if g >= 2 and len(ck) != 3 * g - 3:
        raise DimensionMismatch(f"coeff_k must be {3 * g - 3}x{3 * g - 3} for genus {g}")
    omega1 = complex(np.linalg.det(c1) * np.linalg.det(norm_matrix))
    omegak = complex(np.linalg.det(ck))
    return omega1, omegak


def c_gamma(group: SchottkyGroup, coeff_1, policy: TruncationPolicy = TruncationPolicy(),
            max_len: int = 8, tol: float = 1e-10) -> complex:
    """``F(1) / Omega_1`` for the basis ``u = coeff_1 . omega``."""
    c1 = np.atleast_2d(np.asarray(coeff_1, dtype=complex))
    if c1.shape != (group.genus, group.genus):
        raise DimensionMismatch(f"coeff_1 must be {group.genus}x{group.genus}")
    m = normalization_matrix(group, max_len, tol)
    omega1 = complex(np.linalg.det(c1) * np.linalg.det(m))
    return zograf_F1(group, policy).value / omega1


# ---------------------------------------------------------------------------
# degenerating families


def scaled_family(triples, t: float) -> SchottkyGroup:
    """Group with fixed points from ``triples`` and multipliers ``t * q_hat``."""
    return build_from_fixed_points([(a, b, t * q) for a, b, q in triples])


def sigma_tau_product(triples) -> complex:
    """``prod_{k>=3} sigma_k prod_{k>=2} tau_k`` with every ``y_k`` set to ``q_hat_k``.

    For the family ``q_k = t q_hat_k`` the determinant's lowest term is this
    value times ``t^(g-1)``. All fixed points must be finite.
    """
    g = len(triples)
    if g < 2:
        raise GenusTooSmall("needs genus >= 2")
    xp = {}
    xm = {}
    y = {}
    for k, (a, b, q) in enumerate(triples, start=1):
        if a is INF or b is INF:
            raise ValueError("sigma/tau product needs finite fixed points")
        xp[k], xm[k], y[k] = complex(a), complex(b), complex(q)
    out = (xp[1] - xm[1]) * (xp[2] - xm[2]) ** 2 / ((xm[2] - xp[1]) * (xm[2] - xm[1])) * y[2]
    for k in range(3, g + 1):
        sigma = (xp[2] - xm[2]) / ((xp[k] - xp[2]) * (xp[k] - xm[2]))
        bracket = 1 / ((xm[k] - xp[1]) * (xm[k] - xm[1])) - (xp[k] - xp[2]) * (xp[k] - xm[2]) / (
            (xm[k] - xp[2]) * (xm[k] - xm[2]) * (xp[k] - xp[1]) * (xp[k] - xm[1])
        )
        tau = bracket * (xp[1] - xm[1]) * (xp[k] - xm[k]) ** 2 * y[k]
        out *= sigma * tau
    return out


@dataclass(frozen=True)
class LeadingOrderFit:
    exponent: float
    coefficient: complex
    predicted: complex
    ts: tuple[float, ...]
    dets: tuple[complex, ...]

    @property
    def rel_error(self) -> float:
        """Relative mismatch of the coefficient, up to an overall sign."""
        c, p = self.coefficient, self.predicted
        return min(abs(c - p), abs(c + p)) / abs(p)


def det_leading_order(triples, ts: Sequence[float] = (1e-3, 5e-4, 2.5e-4),
                      max_len: int = 4, tol: float = 1e-13) -> LeadingOrderFit:
    """Fit ``det P(t) ~ C t^e`` over the family ``q_k = t q_hat_k``.

    The exponent is the least-squares slope of ``log|det|`` against ``log t``;
    ``C`` is ``det / t^(g-1)`` extrapolated linearly to ``t = 0``.
    """
    g = len(triples)
    if g < 2:
        raise GenusTooSmall("needs genus >= 2")
    if len(ts) < 2:
        raise FitFailed("need at least two values of t")
    dets = []
    for t in ts:
        grp = scaled_family(triples, t)
        if grp.circles is None or not grp.circle_report.valid:
            raise FitFailed(f"no valid circles at t = {t}")
        dets.append(pairing_matrix_k2(grp, max_len, tol).det)
    dets = np.array(dets)
    if np.any(dets == 0) or not np.all(np.isfinite(dets)):
        raise FitFailed("determinant vanished or is not finite")
    lt = np.log(np.asarray(ts, dtype=float))
    exponent = float(np.polyfit(lt, np.log(np.abs(dets)), 1)[0])
    scaled = dets / np.asarray(ts) ** (g - 1)
    re = np.polyfit(ts, scaled.real, 1)[1]
    im = np.polyfit(ts, scaled.imag, 1)[1]
    return LeadingOrderFit(
        exponent, complex(re, im), sigma_tau_product(triples), tuple(ts), tuple(complex(d) for d in dets)
    )


@dataclass(frozen=True)
class Congruence:
    """Known lowest-order value of a pairing entry on a degenerating family.

    ``order`` is 0 when the entry tends to ``value`` (error ``O(t)``) and 1
    when it equals ``value * t`` up to ``O(t^2)``.
    """

    row: tuple[int, int]
    col: tuple[int, int]
    value: complex
    order: int


def congruence_table(triples) -> list[Congruence]:
    """Every entry of the k = 2 pairing matrix with a known lowest-order term."""
    g = len(triples)
    xp = {k: complex(a) for k, (a, _, _) in enumerate(triples, start=1)}
    xm = {k: complex(b) for k, (_, b, _) in enumerate(triples, start=1)}
    y = {k: complex(q) for k, (_, _, q) in enumerate(triples, start=1)}
    out = []
    rows = product_labels(g)
    for row in rows:
        a, l = row
        for i in range(1, g + 1):
            # Psi(w_l^2, zeta_i1) -> delta_il ; mixed products -> 0
            val = (1.0 if i == l else 0.0) if a == l else 0.0
            out.append(Congruence(row, (i, 1), val, 0))
        for i in range(3, g + 1):
            if a == l:
                continue
            val = 0j
            if i == l:
                val = (xp[a] - xm[a]) / ((xp[i] - xp[a]) * (xp[i] - xm[a]))
            out.append(Congruence(row, (i, 0), val, 0))
        for i in range(2, g + 1):
            if a == l:
                continue
            if a == 1:
                val = 0j
                if i == l:
                    val = (xp[1] - xm[1]) * (xp[i] - xm[i]) ** 2 / ((xm[i] - xp[1]) * (xm[i] - xm[1])) * y[i]
            elif i == 2:
                val = (xp[l] - xm[l]) * (xp[2] - xm[2]) ** 2 / ((xp[l] - xm[2]) * (xm[l] - xm[2])) * y[2]
            else:
                val = 0j
                if i == l:
                    val = (xp[2] - xm[2]) * (xp[i] - xm[i]) ** 2 / ((xm[i] - xp[2]) * (xm[i] - xm[2])) * y[i]
            out.append(Congruence(row, (i, 2), val, 1))
    return out


__all__ = [
    "BasisChange",
    "Congruence",
    "EichlerCocycle",
    "LeadingOrderFit",
    "OneFormSeries",
    "PairingMatrix",
    "c_gamma",
    "cocycle_labels",
    "cocycles",
    "congruence_table",
    "contour_integral",
    "contour_quadrature",
    "det_leading_order",
    "normalization_matrix",
    "normalized_basis_change",
    "omega_eval",
    "pairing",
    "pairing_matrix_k2",
    "period_determinants",
    "product_labels",
    "scaled_family",
    "sigma_tau_product",
]

