"""Marked Schottky groups: construction, normalization, word evaluation,
fundamental circles and a heuristic exponent of convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import brentq

from . import freegroup
from .errors import (
    CirclesOverlap,
    CirclesRequired,
    DegenerateFixedPoints,
    FixesInfinity,
    NoValidRadius,
    SpecError,
)
from .freegroup import ConjClass, ReducedWord, letter_to_rank
from .moebius import (
    INF,
    Circle,
    MoebiusMap,
    fixed_points,
    from_fixed_points,
    isometric_circle,
    multiplier,
    three_point_map,
)

SCHEMA = "schottky-zeta/1"

#: boundary samples and tolerance for the circle mapping check
MAPPING_SAMPLES = 32
MAPPING_TOL = 1e-9
#: size of the geometric radius grid for concentric circle pairs
RADIUS_GRID = 32

REAL_TOL = 1e-12


# ---------------------------------------------------------------------------
# spec ingestion

def parse_complex(v) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SpecError(f"cannot read complex number from {v!r}")


def parse_point(v):
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity", "oo"):
            return INF
        raise SpecError(f"unknown point {v!r}")
    return parse_complex(v)


def dump_complex(z) -> Any:
    if z is INF:
        return "inf"
    z = complex(z)
    return [z.real, z.imag]


def parse_matrix(m) -> np.ndarray:
    try:
        rows = [[parse_complex(x) for x in row] for row in m]
        arr = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad matrix {m!r}") from exc
    if arr.ndim != 2:
        raise SpecError(f"bad matrix {m!r}")
    return arr


@dataclass
class GroupSpec:
    """User-level description of a marked Schottky group.

    Each generator is either ``{"matrix": [[a, b], [c, d]]}`` or
    ``{"alpha": .., "beta": .., "q": ..}``. Complex numbers are ``[re, im]``
    pairs (plain numbers are accepted); the point at infinity is ``"inf"``.
    """

    genus: int
    generators: list[dict]
    circles: list[dict] | None = None
    normalize: bool = False
    strict: bool = False
    real: bool = False
    name: str = ""
    note: str = ""
    periods: dict | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "GroupSpec":
        if not isinstance(d, dict):
            raise SpecError("group spec must be a JSON object")
        schema = d.get("schema", SCHEMA)
        if schema != SCHEMA:
            raise SpecError(f"unsupported schema {schema!r} (expected {SCHEMA!r})")
        try:
            genus = int(d["genus"])
            gens = list(d["generators"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"spec needs 'genus' and 'generators': {exc}") from exc
        if genus < 1 or len(gens) != genus:
            raise SpecError(f"genus {genus} but {len(gens)} generators")
        for gspec in gens:
            if not isinstance(gspec, dict) or not (
                "matrix" in gspec or {"alpha", "beta", "q"} <= set(gspec)
            ):
                raise SpecError(f"generator must give 'matrix' or 'alpha','beta','q': {gspec!r}")
        circles = d.get("circles")
        if circles is not None and len(circles) != 2 * genus:
            raise SpecError(f"expected {2 * genus} circles, got {len(circles)}")
        flags = d.get("flags", {})
        return cls(
            genus=genus,
            generators=gens,
            circles=circles,
            normalize=bool(flags.get("normalize", d.get("normalize", False))),
            strict=bool(flags.get("strict", d.get("strict", False))),
            real=bool(flags.get("real", d.get("real", False))),
            name=str(d.get("name", "")),
            note=str(d.get("note", "")),
            periods=d.get("periods"),
        )

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "name": self.name,
            "genus": self.genus,
            "generators": self.generators,
            "flags": {"normalize": self.normalize, "strict": self.strict, "real": self.real},
        }
        if self.note:
            out["note"] = self.note
        if self.circles is not None:
            out["circles"] = self.circles
        if self.periods is not None:
            out["periods"] = self.periods
        return out

    @classmethod
    def from_fixed_points(cls, triples, **kw) -> "GroupSpec":
        gens = [
            {"alpha": dump_complex(a), "beta": dump_complex(b), "q": dump_complex(q)}
            for a, b, q in triples
        ]
        return cls(genus=len(gens), generators=gens, **kw)


# ---------------------------------------------------------------------------
# the group


@dataclass(frozen=True)
class CircleReport:
    valid: bool
    margin: float
    mapping_residual: float
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "margin": self.margin,
            "mapping_residual": self.mapping_residual,
            "message": self.message,
        }


@dataclass(frozen=True)
class SchottkyGroup:
    """Marked Schottky group ``(Gamma; gamma_1, ..., gamma_g)``.

    ``alphas[i-1]`` / ``betas[i-1]`` are the attracting / repelling fixed points
    of generator ``i`` (``alpha_i`` and ``alpha_{-i}``).
    ``circles`` is ordered ``C_1, C_-1, C_2, C_-2, ...``; the disk ``D_x`` of
    letter ``x`` is bounded by ``circles[letter_to_rank(x)]``.
    """

    alphas: tuple
    betas: tuple
    qs: tuple[complex, ...]
    generators: tuple[MoebiusMap, ...]
    circles: tuple[Circle, ...] | None = None
    circle_report: CircleReport | None = field(default=None, compare=False)
    is_real: bool = False

    @property
    def genus(self) -> int:
        return len(self.generators)

    def generator(self, x: int) -> MoebiusMap:
        m = self.generators[abs(x) - 1]
        return m if x > 0 else m.inverse()

    def circle(self, x: int) -> Circle:
        if self.circles is None:
            raise CirclesRequired("group has no fundamental circles")
        return self.circles[letter_to_rank(x)]

    def fixed_point(self, x: int):
        return self.alphas[x - 1] if x > 0 else self.betas[-x - 1]

    def generator_stack(self) -> np.ndarray:
        """``(2g, 2, 2)`` array of generator matrices indexed by letter rank."""
        out = np.empty((2 * self.genus, 2, 2), dtype=complex)
        for i, m in enumerate(self.generators):
            out[2 * i] = m.matrix
            out[2 * i + 1] = m.inverse().matrix
        return out

    def key(self) -> tuple:
        return tuple((m.a, m.b, m.c, m.d) for m in self.generators)

    def __hash__(self):
        return hash(self.key())

    def with_multipliers(self, qs: Sequence[complex]) -> "SchottkyGroup":
        """Same fixed points, new multipliers; circles rebuilt."""
        return build_from_fixed_points(list(zip(self.alphas, self.betas, qs)))

    def resolved_generators(self) -> list[dict]:
        return [
            {"alpha": dump_complex(a), "beta": dump_complex(b), "q": dump_complex(q)}
            for a, b, q in zip(self.alphas, self.betas, self.qs)
        ]


def _is_real_point(z) -> bool:
    return z is INF or abs(complex(z).imag) <= REAL_TOL * max(1.0, abs(z))


def _check_distinct(points) -> None:
    n_inf = sum(p is INF for p in points)
    if n_inf > 1:
        raise DegenerateFixedPoints("two fixed points at infinity")
    finite = [complex(p) for p in points if p is not INF]
    for i in range(len(finite)):
        for j in range(i + 1, len(finite)):
            if abs(finite[i] - finite[j]) <= 1e-12 * max(1.0, abs(finite[i])):
                raise DegenerateFixedPoints(f"fixed points coincide near {finite[i]!r}")


def _assemble(alphas, betas, qs, gens, circles=None, strict=False) -> SchottkyGroup:
    _check_distinct(list(alphas) + list(betas))
    is_real = all(_is_real_point(p) for p in list(alphas) + list(betas)) and all(
        abs(q.imag) <= REAL_TOL and q.real > 0 for q in qs
    )
    group = SchottkyGroup(tuple(alphas), tuple(betas), tuple(qs), tuple(gens), is_real=is_real)
    if circles is None:
        try:
            circles, report = fundamental_circles(group)
        except NoValidRadius as exc:
            if strict:
                raise CirclesOverlap(str(exc)) from exc
            return SchottkyGroup(
                group.alphas, group.betas, group.qs, group.generators,
                None, CircleReport(False, -math.inf, math.inf, str(exc)), is_real,
            )
    else:
        report = check_circles(group, circles)
    if strict and not report.valid:
        raise CirclesOverlap(report.message or f"circle margin {report.margin:.3g}")
    return SchottkyGroup(
        group.alphas, group.betas, group.qs, group.generators, tuple(circles), report, is_real
    )


def build_from_fixed_points(triples, strict: bool = False) -> SchottkyGroup:
    alphas, betas, qs, gens = [], [], [], []
    for a, b, q in triples:
        m = from_fixed_points(a, b, q)
        alphas.append(a if a is INF else complex(a))
        betas.append(b if b is INF else complex(b))
        qs.append(complex(q))
        gens.append(m)
    return _assemble(alphas, betas, qs, gens, strict=strict)


def build(spec: GroupSpec | dict, strict: bool | None = None) -> SchottkyGroup:
    """Validated group from a spec; circles built unless supplied."""
    if not isinstance(spec, GroupSpec):
        spec = GroupSpec.from_dict(spec)
    strict = spec.strict if strict is None else strict
    alphas, betas, qs, gens = [], [], [], []
    for gspec in spec.generators:
        if "matrix" in gspec:
            mat = parse_matrix(gspec["matrix"])
            if mat.shape != (2, 2):
                raise SpecError(f"generator matrix must be 2x2, got {mat.shape}")
            m = MoebiusMap.from_matrix(mat)
            q = multiplier(m)
            a, b = fixed_points(m)
        else:
            a = parse_point(gspec["alpha"])
            b = parse_point(gspec["beta"])
            q = parse_complex(gspec["q"])
            m = from_fixed_points(a, b, q)
        alphas.append(a)
        betas.append(b)
        qs.append(complex(q))
        gens.append(m)
    circles = None
    if spec.circles is not None:
        circles = [_parse_circle(c, x) for c, x in zip(spec.circles, _letters(spec.genus))]
    group = _assemble(alphas, betas, qs, gens, circles=circles, strict=strict)
    if spec.real and not group.is_real:
        raise SpecError("spec is flagged real but the generators are not real")
    if spec.normalize:
        group, _ = normalize(group)
        if strict and not (group.circle_report and group.circle_report.valid):
            raise CirclesOverlap("no valid circles after normalization")
    return group


def _letters(genus: int) -> list[int]:
    return [x for i in range(1, genus + 1) for x in (i, -i)]


def _parse_circle(c: dict, letter: int) -> Circle:
    try:
        outside = bool(c.get("outside", False))
        return Circle(
            parse_complex(c["center"]),
            float(c["radius"]),
            "cw" if outside else "ccw",
            outside,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"bad circle for letter {letter}: {c!r}") from exc


def normalize(group: SchottkyGroup) -> tuple[SchottkyGroup, MoebiusMap]:
    """Conjugate so that ``alpha_1 = 0``, ``alpha_-1 = INF`` and (g >= 2) ``alpha_2 = 1``.

    Returns the normalized group and the conjugating map ``N``; the new
    generators are ``N gamma_i N^-1``.
    """
    a1, b1 = group.alphas[0], group.betas[0]
    if group.genus >= 2:
        n = three_point_map(a1, b1, group.alphas[1])
    else:
        n = _two_point_map(a1, b1)
    if n.is_close(MoebiusMap.identity(), 1e-15):
        return group, MoebiusMap.identity()
    alphas = [n(a) for a in group.alphas]
    betas = [n(b) for b in group.betas]
    # pin the exact images; rounding in n() would blur 0, INF and 1
    alphas[0], betas[0] = 0j, INF
    if group.genus >= 2:
        alphas[1] = 1 + 0j
    triples = list(zip(alphas, betas, group.qs))
    gens = [from_fixed_points(a, b, q) for a, b, q in triples]
    out = _assemble(alphas, betas, list(group.qs), gens)
    return out, n


def _two_point_map(z1, z2) -> MoebiusMap:
    """A map sending ``z1 -> 0`` and ``z2 -> INF``."""
    if z1 is INF:
        return MoebiusMap(0, 1, 1, -z2)
    if z2 is INF:
        return MoebiusMap(1, -z1, 0, 1)
    return MoebiusMap(1, -z1, 1, -z2)


def evaluate_word(group: SchottkyGroup, w) -> MoebiusMap:
    """Product of generator maps along the word (empty word gives the identity)."""
    letters = w.letters if isinstance(w, (ReducedWord, ConjClass)) else tuple(w)
    out = MoebiusMap.identity()
    for x in letters:
        if x == 0 or abs(x) > group.genus:
            raise freegroup.BadLetter(f"letter {x} out of range for genus {group.genus}")
        out = out @ group.generator(x)
    return out


def class_multiplier(group: SchottkyGroup, c) -> complex:
    return multiplier(evaluate_word(group, c))


# ---------------------------------------------------------------------------
# vectorized word evaluation


def word_matrices(group: SchottkyGroup, words: np.ndarray):
    """Entries ``(a, b, c, d)`` of the products for an ``(N, n)`` array of letter ranks."""
    stack = group.generator_stack()
    words = np.asarray(words)
    if words.ndim != 2 or words.shape[1] == 0:
        raise ValueError("words must be a nonempty (N, n) array")
    g = stack[words[:, 0]]
    a, b, c, d = g[:, 0, 0].copy(), g[:, 0, 1].copy(), g[:, 1, 0].copy(), g[:, 1, 1].copy()
    for j in range(1, words.shape[1]):
        g = stack[words[:, j]]
        ga, gb, gc, gd = g[:, 0, 0], g[:, 0, 1], g[:, 1, 0], g[:, 1, 1]
        a, b, c, d = a * ga + b * gc, a * gb + b * gd, c * ga + d * gc, c * gb + d * gd
    return a, b, c, d


def multipliers_from_trace(t: np.ndarray) -> np.ndarray:
    """Vectorized ``q = 1/lambda^2`` for the large root of ``lambda + 1/lambda = t``."""
    t = np.asarray(t, dtype=complex)
    disc = np.sqrt(t * t - 4)
    # pick the sign that avoids cancellation
    flip = (t.real * disc.real + t.imag * disc.imag) < 0
    disc = np.where(flip, -disc, disc)
    lam = (t + disc) / 2
    return 1.0 / (lam * lam)


def word_multipliers(group: SchottkyGroup, words: np.ndarray) -> np.ndarray:
    a, _, _, d = word_matrices(group, words)
    return multipliers_from_trace(a + d)


# ---------------------------------------------------------------------------
# fundamental circles


def _disk_gap(c1: Circle, c2: Circle) -> float:
    dist = abs(c1.center - c2.center)
    if c1.outside and c2.outside:
        return -math.inf
    if c1.outside:
        c1, c2 = c2, c1
    if c2.outside:
        return c2.radius - dist - c1.radius
    return dist - c1.radius - c2.radius


def disjointness_margin(circles: Sequence[Circle]) -> float:
    margin = math.inf
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            margin = min(margin, _disk_gap(circles[i], circles[j]))
    return margin


def _interior_point(c: Circle):
    return c.center if not c.outside else INF


def _exterior_point(c: Circle):
    return INF if not c.outside else c.center


def mapping_residual(group: SchottkyGroup, circles: Sequence[Circle]) -> tuple[float, bool]:
    """Max relative deviation of ``gamma_i(C_-i)`` from ``C_i`` on sample points,
    and whether ``gamma_i`` sends the complement of ``D_-i`` into ``D_i``.
    """
    worst = 0.0
    sides_ok = True
    for i in range(1, group.genus + 1):
        m = group.generator(i)
        src = circles[letter_to_rank(-i)]
        dst = circles[letter_to_rank(i)]
        for z in src.points(MAPPING_SAMPLES):
            w = m(z)
            if w is INF:
                worst = math.inf
                continue
            worst = max(worst, abs(abs(w - dst.center) - dst.radius) / dst.radius)
        probe = m(_exterior_point(src))
        sides_ok &= dst.contains(probe)
    return worst, sides_ok


def check_circles(group: SchottkyGroup, circles: Sequence[Circle]) -> CircleReport:
    margin = disjointness_margin(circles)
    resid, sides_ok = mapping_residual(group, circles)
    msgs = []
    if not margin > 0:
        msgs.append(f"disks overlap (margin {margin:.3g})")
    if not resid < MAPPING_TOL:
        msgs.append(f"mapping condition violated (residual {resid:.3g})")
    if not sides_ok:
        msgs.append("generator maps the wrong side of C_-i")
    return CircleReport(not msgs, margin, resid, "; ".join(msgs))


def _concentric_pair(center: complex, q: complex, r: float, attracting_at_center: bool):
    inner = Circle(center, r, "ccw", False)
    outer = Circle(center, r / abs(q), "cw", True)
    return (inner, outer) if attracting_at_center else (outer, inner)


def fundamental_circles(group: SchottkyGroup) -> tuple[list[Circle], CircleReport]:
    """Circles ``C_1, C_-1, ..., C_g, C_-g`` and their validity report.

    Generators with both fixed points finite use isometric circles
    (``C_-i`` from ``gamma_i``, ``C_i`` from ``gamma_i^-1``). A generator fixing
    infinity gets a concentric pair about its finite fixed point with radius
    chosen on a geometric grid to maximize the disjointness margin.
    """
    circles: list[Circle | None] = [None] * (2 * group.genus)
    special = None
    for i, m in enumerate(group.generators):
        a, b = group.alphas[i], group.betas[i]
        if a is INF or b is INF:
            special = i
            continue
        try:
            circles[2 * i + 1] = isometric_circle(m)
            circles[2 * i] = isometric_circle(m.inverse())
        except FixesInfinity as exc:  # pragma: no cover - guarded by the INF test
            raise NoValidRadius(str(exc)) from exc
    if special is not None:
        i = special
        a, b, q = group.alphas[i], group.betas[i], group.qs[i]
        center = b if a is INF else a
        attracting = a is not INF
        others = [
            abs(p - center)
            for j in range(group.genus)
            if j != i
            for p in (group.alphas[j], group.betas[j])
            if p is not INF
        ]
        if not others:
            pair = _concentric_pair(center, q, abs(q) ** 0.75, attracting)
        else:
            scale = min(others)
            best, best_margin = None, -math.inf
            for r in scale * np.geomspace(abs(q), 1.0, RADIUS_GRID):
                pair = _concentric_pair(center, q, float(r), attracting)
                trial = list(circles)
                trial[2 * i], trial[2 * i + 1] = pair
                margin = disjointness_margin(trial)
                if margin > best_margin:
                    best, best_margin = pair, margin
            if not best_margin > 0:
                raise NoValidRadius(
                    f"no concentric radius separates the disks (best margin {best_margin:.3g})"
                )
            pair = best
        circles[2 * i], circles[2 * i + 1] = pair
    report = check_circles(group, circles)
    return list(circles), report


# ---------------------------------------------------------------------------
# exponent of convergence


def _circumradius(z1, z2, z3):
    a = np.abs(z2 - z3)
    b = np.abs(z3 - z1)
    c = np.abs(z1 - z2)
    area2 = np.abs(((z2 - z1) * np.conj(z3 - z1)).imag)
    with np.errstate(divide="ignore", invalid="ignore"):
        return a * b * c / (2 * area2)


def _all_reduced_words(genus: int, length: int) -> np.ndarray:
    k = 2 * genus
    words = np.arange(k).reshape(-1, 1)
    for _ in range(length - 1):
        last = words[:, -1]
        nxt = np.arange(k)
        cand = np.repeat(words, k, axis=0)
        ext = np.tile(nxt, len(words))
        keep = ext != (np.repeat(last, k) ^ 1)
        words = np.concatenate([cand[keep], ext[keep].reshape(-1, 1)], axis=1)
    return words


def _fundamental_point(circles: Sequence[Circle]) -> complex:
    """A finite point outside every closed disk, as far from them as a grid allows."""
    outer = [c for c in circles if c.outside]
    if outer:
        center, radius = outer[0].center, outer[0].radius
    else:
        centers = np.array([c.center for c in circles])
        center = centers.mean()
        radius = 2 * max(abs(c.center - center) + c.radius for c in circles)
    xs = np.linspace(-radius, radius, 81)
    grid = (center + xs[:, None] + 1j * xs[None, :]).ravel()
    clearance = np.full(grid.shape, np.inf)
    for c in circles:
        d = np.abs(grid - c.center)
        clearance = np.minimum(clearance, c.radius - d if c.outside else d - c.radius)
    best = int(np.argmax(clearance))
    if not clearance[best] > 0:
        raise CirclesRequired("could not find a point outside all disks")
    return complex(grid[best])


def _circle_through(z1, z2, z3) -> tuple[complex, float]:
    w = (z3 - z1) / (z2 - z1)
    center = (z2 - z1) * (w - abs(w) ** 2) / (2j * w.imag) + z1
    return center, abs(center - z1)


def bounded_chart(group: SchottkyGroup) -> tuple[np.ndarray, list[Circle]]:
    """Generator stack and circles conjugated by ``z -> 1/(z - c)`` so that
    every disk is bounded; the identity chart when that already holds.
    """
    circles = list(group.circles)
    stack = group.generator_stack()
    if not any(c.outside for c in circles):
        return stack, circles
    c0 = _fundamental_point(circles)
    chart = MoebiusMap(0, 1, 1, -c0)
    inv = chart.inverse()
    stack = np.array([chart.matrix @ m @ inv.matrix for m in stack])
    moved = []
    for c in circles:
        pts = [chart(z) for z in c.points(3)]
        center, radius = _circle_through(*pts)
        moved.append(Circle(center, radius))
    return stack, moved


def image_disk_radii(group: SchottkyGroup, length: int) -> np.ndarray:
    """Radii of the nested disks ``w_1 ... w_{n-1}(D_{w_n})`` over reduced words,
    measured in a chart where all fundamental disks are bounded.
    """
    if group.circles is None:
        raise CirclesRequired("delta_estimate needs fundamental circles")
    stack, circles = bounded_chart(group)
    words = _all_reduced_words(group.genus, length)
    last = words[:, -1]
    centers = np.array([c.center for c in circles])[last]
    radii = np.array([c.radius for c in circles])[last]
    if length == 1:
        return radii
    g = stack[words[:, 0]]
    a, b, c, d = g[:, 0, 0], g[:, 0, 1], g[:, 1, 0], g[:, 1, 1]
    for j in range(1, length - 1):
        h = stack[words[:, j]]
        a, b, c, d = (
            a * h[:, 0, 0] + b * h[:, 1, 0],
            a * h[:, 0, 1] + b * h[:, 1, 1],
            c * h[:, 0, 0] + d * h[:, 1, 0],
            c * h[:, 0, 1] + d * h[:, 1, 1],
        )
    pts = [centers + radii * np.exp(2j * np.pi * k / 3) for k in range(3)]
    imgs = [(a * p + b) / (c * p + d) for p in pts]
    r = _circumradius(*imgs)
    # tiny images can underflow to 0 or to a degenerate triangle
    return r[np.isfinite(r) & (r > 0)]


def delta_estimate(group: SchottkyGroup, max_len: int = 8) -> float:
    """Heuristic exponent of convergence.

    With ``Z_l(s) = sum r(w)^s`` over the nested disks of word length ``l``,
    the growth rate of ``log Z_l(s)`` in ``l`` is fitted by least squares and
    the root in ``s`` of that rate is returned (0 when there is no growth at
    ``s = 0``, 2 when there is still growth at ``s = 2``).
    """
    if group.circles is None:
        raise CirclesRequired("delta_estimate needs fundamental circles")
    lengths, logr = [], []
    for n in range(2, max(max_len, 3) + 1):
        r = image_disk_radii(group, n)
        if len(r):
            lengths.append(n)
            logr.append(np.log(r))
    if len(lengths) < 2:
        return 0.0

    def rate(s: float) -> float:
        ys = []
        for lr in logr:
            m = lr.max() * s
            ys.append(m + np.log(np.exp(lr * s - m).sum()))
        return float(np.polyfit(lengths, ys, 1)[0])

    if rate(0.0) <= 1e-12:
        return 0.0
    if rate(2.0) > 0:
        return 2.0
    return float(brentq(rate, 0.0, 2.0, xtol=1e-10))
