"""Truncated infinite products over primitive conjugacy classes.

Every product is accumulated as a sum of principal logarithms of factors
``1 - q^m`` (each close to 1) and exponentiated once at the end. Truncation
is by word length of the class representative (``max_word_len``) and by a
term floor on the inner index (factors with ``|q^m| < term_floor`` are
dropped).
"""

from __future__ import annotations

import cmath
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import freegroup
from .errors import GenusTooSmall, NotLoxodromic
from .schottky import SchottkyGroup, delta_estimate, word_multipliers

log = logging.getLogger(__name__)

THREADS_ENV = "SCHOTTKY_ZETA_THREADS"


def d_k(k: int) -> int:
    """Mumford's exponent ``6k^2 - 6k + 1``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return 6 * k * k - 6 * k + 1


@dataclass(frozen=True)
class TruncationPolicy:
    max_word_len: int = 10
    term_floor: float = 1e-18
    tol: float = 1e-10
    threads: int = 1

    def __post_init__(self):
        if self.max_word_len < 1:
            raise ValueError("max_word_len must be >= 1")
        if not 0 < self.term_floor < 1:
            raise ValueError("term_floor must lie in (0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @classmethod
    def from_env(cls, **kw) -> "TruncationPolicy":
        if "threads" not in kw and os.environ.get(THREADS_ENV):
            kw["threads"] = int(os.environ[THREADS_ENV])
        return cls(**kw)


@dataclass(frozen=True)
class ProductValue:
    value: complex
    max_word_len: int
    inner_cutoff: int
    terms_used: int
    tail_estimate: float
    converged: bool
    log_value: complex = 0j
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "max_word_len": self.max_word_len,
            "inner_cutoff": self.inner_cutoff,
            "terms_used": self.terms_used,
            "tail_estimate": self.tail_estimate,
            "converged": self.converged,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# multiplier spectrum


def _partition_words(args):
    rank, max_len, first = args
    return [freegroup.class_words(rank, n, first) for n in range(1, max_len + 1)]


def class_word_arrays(rank: int, max_len: int, threads: int = 1) -> list[np.ndarray]:
    """Canonical class words by length as ``(N_n, n)`` rank arrays.

    With ``threads > 1`` the search is split by first letter over worker
    processes; partitions are concatenated in letter order, which reproduces
    the sequential order exactly.
    """
    if threads > 1 and 2 * rank > 1:
        jobs = [(rank, max_len, first) for first in range(2 * rank)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_partition_words, jobs))
        by_len = [[w for part in parts for w in part[n]] for n in range(max_len)]
    else:
        by_len = [freegroup.class_words(rank, n) for n in range(1, max_len + 1)]
    return [np.array(ws, dtype=np.int8).reshape(len(ws), n + 1) for n, ws in enumerate(by_len)]


@dataclass(frozen=True)
class ClassSpectrum:
    """Multipliers of all primitive classes up to a word length."""

    q: np.ndarray
    lengths: np.ndarray
    max_len: int
    rank: int

    def upto(self, n: int) -> np.ndarray:
        return self.lengths <= n

    def max_abs_at(self, n: int) -> float:
        sel = self.lengths == n
        return float(np.abs(self.q[sel]).max()) if sel.any() else 0.0


@lru_cache(maxsize=32)
def _spectrum(group: SchottkyGroup, max_len: int) -> ClassSpectrum:
    return _build_spectrum(group, max_len, 1)


def _build_spectrum(group: SchottkyGroup, max_len: int, threads: int) -> ClassSpectrum:
    arrays = class_word_arrays(group.genus, max_len, threads)
    qs, lens = [], []
    for n, words in enumerate(arrays, start=1):
        if len(words) == 0:
            continue
        qs.append(word_multipliers(group, words))
        lens.append(np.full(len(words), n, dtype=np.int16))
    q = np.concatenate(qs) if qs else np.zeros(0, complex)
    lengths = np.concatenate(lens) if lens else np.zeros(0, np.int16)
    return ClassSpectrum(q, lengths, max_len, group.genus)


def class_spectrum(group: SchottkyGroup, max_len: int, threads: int = 1) -> ClassSpectrum:
    if threads > 1:
        return _build_spectrum(group, max_len, threads)
    return _spectrum(group, max_len)


# ---------------------------------------------------------------------------
# core accumulation


def _log1m(z: np.ndarray) -> np.ndarray:
    """``log(1 - z)`` with full relative accuracy for small ``z``."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    out = np.empty_like(z)
    zs = z[small]
    out[small] = -zs * (1 + zs * (0.5 + zs * (1 / 3 + zs * 0.25)))
    out[~small] = np.log(1 - z[~small])
    return out


def _inner_logs(q: np.ndarray, m_start: int, floor: float, power: float | None = None):
    """Per-class ``sum_{m >= m_start} log(1 - q^m)`` with the term floor.

    With ``power`` set, computes the single factor ``log(1 - |q|^power)``
    instead (Ruelle factors). Returns (per-class logs, largest m, factor count).
    """
    out = np.zeros(q.shape, dtype=complex)
    if q.size == 0:
        return out, 0, 0
    aq = np.abs(q)
    if not np.isfinite(aq).all():
        raise NotLoxodromic("non-finite class multiplier")
    if power is not None:
        x = aq ** power
        keep = x >= floor
        out[keep] = _log1m(x[keep])
        return out, 1, int(keep.sum())
    if not (aq < 1).all():
        raise NotLoxodromic(
            f"class multiplier with |q| = {aq.max():.6g} >= 1; the group is not Schottky"
        )
    with np.errstate(divide="ignore"):
        m_max = np.floor(np.log(floor) / np.log(aq)).astype(np.int64)
    terms = 0
    top = int(m_max.max()) if m_max.size else 0
    for m in range(m_start, top + 1):
        act = m_max >= m
        if not act.any():
            break
        out[act] += _log1m(q[act] ** m)
        terms += int(act.sum())
    return out, max(top, 0), terms


def _tail(spec: ClassSpectrum, lowest_power: float, weight: float = 1.0) -> float:
    """Heuristic size of the omitted classes of length ``L + 1``."""
    L = spec.max_len
    top = spec.max_abs_at(L)
    if top == 0.0:
        return 0.0
    rho = top ** (1.0 / L)
    n_next = freegroup.primitive_class_count(spec.rank, L + 1)
    return float(abs(weight) * n_next * rho ** ((L + 1) * lowest_power))


def _finish(per_class, spec, policy, inner, terms, lowest_power, weight=1.0,
            extra_log=0j, warnings=()) -> ProductValue:
    L = spec.max_len
    total = complex(per_class.sum()) + extra_log
    prev_len = max(L - 2, 0)
    prev = complex(per_class[spec.lengths <= prev_len].sum()) + extra_log
    value = cmath.exp(total)
    prev_value = cmath.exp(prev)
    converged = abs(value - prev_value) <= policy.tol
    warnings = list(warnings)
    if not converged:
        warnings.append(
            f"values at word length {L} and {prev_len} differ by {abs(value - prev_value):.3g}"
        )
    return ProductValue(
        value=value,
        max_word_len=L,
        inner_cutoff=inner,
        terms_used=terms,
        tail_estimate=_tail(spec, lowest_power, weight),
        converged=converged,
        log_value=total,
        warnings=tuple(warnings),
    )


_delta_cache: dict = {}


def _delta_warning(group: SchottkyGroup) -> list[str]:
    if group.circles is None:
        return ["no fundamental circles; delta(Gamma) < 1 not checked"]
    key = group
    if key not in _delta_cache:
        _delta_cache[key] = delta_estimate(group, 6)
    delta = _delta_cache[key]
    if delta >= 1:
        return [f"delta estimate {delta:.3f} >= 1; product may not converge"]
    return []


def _spec_for(group: SchottkyGroup, policy: TruncationPolicy) -> ClassSpectrum:
    return class_spectrum(group, policy.max_word_len, policy.threads)


# ---------------------------------------------------------------------------
# products


def zograf_F1(group: SchottkyGroup, policy: TruncationPolicy = TruncationPolicy()) -> ProductValue:
    """``prod_{gamma} prod_{m >= 1} (1 - q_gamma^m)`` over primitive classes."""
    spec = _spec_for(group, policy)
    logs, inner, terms = _inner_logs(spec.q, 1, policy.term_floor)
    return _finish(logs, spec, policy, inner, terms, 1, warnings=_delta_warning(group))


def _require_genus2(group: SchottkyGroup) -> None:
    if group.genus < 2:
        raise GenusTooSmall("this product needs genus >= 2 (it uses gamma_2)")


def mt_prefactor_log(group: SchottkyGroup, k: int) -> complex:
    """log of ``(1 - q_1)^2 ... (1 - q_1^{k-1})^2 (1 - q_2^{k-1})``."""
    _require_genus2(group)
    q1, q2 = group.qs[0], group.qs[1]
    out = sum(2 * cmath.log(1 - q1 ** m) for m in range(1, k))
    return out + cmath.log(1 - q2 ** (k - 1))


def mt_double_product(group: SchottkyGroup, k: int,
                      policy: TruncationPolicy = TruncationPolicy()) -> ProductValue:
    """The marking-independent factor ``prod_{gamma} prod_{m >= k} (1 - q_gamma^m)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    spec = _spec_for(group, policy)
    logs, inner, terms = _inner_logs(spec.q, k, policy.term_floor)
    return _finish(logs, spec, policy, inner, terms, k)


def mt_Fk(group: SchottkyGroup, k: int,
          policy: TruncationPolicy = TruncationPolicy()) -> ProductValue:
    """Prefactor times ``prod_{gamma} prod_{m >= k} (1 - q_gamma^m)``; genus >= 2."""
    _require_genus2(group)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    spec = _spec_for(group, policy)
    logs, inner, terms = _inner_logs(spec.q, k, policy.term_floor)
    return _finish(logs, spec, policy, inner, terms, k, extra_log=mt_prefactor_log(group, k))


def ruelle(group: SchottkyGroup, s: float,
           policy: TruncationPolicy = TruncationPolicy()) -> ProductValue:
    """``prod_{gamma} (1 - |q_gamma|^s)^{-1}``."""
    spec = _spec_for(group, policy)
    logs, inner, terms = _inner_logs(spec.q, 1, policy.term_floor, power=s)
    warnings = []
    if s < 2:
        warnings.append(f"s = {s} < 2: outside the region of absolute convergence")
    return _finish(-logs, spec, policy, inner, terms, s, warnings=warnings)


def modified_ruelle(group: SchottkyGroup, k: int,
                    policy: TruncationPolicy = TruncationPolicy()) -> ProductValue:
    """``R(k) (1 - q_1^k)^2 (1 - q_2^k) / (1 - q_2^{k-1})``; genus >= 2."""
    _require_genus2(group)
    q1, q2 = group.qs[0], group.qs[1]
    spec = _spec_for(group, policy)
    logs, inner, terms = _inner_logs(spec.q, 1, policy.term_floor, power=k)
    extra = 2 * cmath.log(1 - q1 ** k) + cmath.log(1 - q2 ** k) - cmath.log(1 - q2 ** (k - 1))
    warnings = []
    if not group.is_real:
        warnings.append("group is not real; the identity with F(k+1)/F(k) is not expected")
    return _finish(-logs, spec, policy, inner, terms, k, extra_log=extra, warnings=warnings)


def intro_product(group: SchottkyGroup, k: int,
                  policy: TruncationPolicy = TruncationPolicy(),
                  allow_genus1: bool = False) -> ProductValue:
    """Direct class-by-class evaluation of

        prod_{gamma} [prod_{m<k} (1-q^m)^{d_k} prod_{m>=k} (1-q^m)^{d_k - 1}]
        / [(1-q_1)^2 ... (1-q_1^{k-1})^2 (1-q_2^{k-1})]

    With ``allow_genus1`` a genus-1 group is accepted and the ``q_2`` factor
    is omitted.
    """
    if group.genus < 2 and not allow_genus1:
        raise GenusTooSmall("intro product needs genus >= 2 (pass allow_genus1)")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    dk = d_k(k)
    spec = _spec_for(group, policy)
    floor = policy.term_floor
    per_class = np.zeros(spec.q.shape, dtype=complex)
    inner_max, terms = 0, 0
    for idx, q in enumerate(spec.q.tolist()):
        aq = abs(q)
        acc = 0j
        m = 1
        qm = q
        while aq ** m >= floor:
            w = dk if m < k else dk - 1
            acc += w * _scalar_log1m(qm)
            terms += 1
            m += 1
            qm *= q
        inner_max = max(inner_max, m - 1)
        per_class[idx] = acc
    q1 = group.qs[0]
    den = sum(2 * cmath.log(1 - q1 ** m) for m in range(1, k))
    if group.genus >= 2:
        den += cmath.log(1 - group.qs[1] ** (k - 1))
    return _finish(per_class, spec, policy, inner_max, terms, 1, weight=dk, extra_log=-den)


def _scalar_log1m(z: complex) -> complex:
    if abs(z) < 1e-4:
        return -z * (1 + z * (0.5 + z * (1 / 3 + z * 0.25)))
    return cmath.log(1 - z)


@dataclass(frozen=True)
class MumfordRatio:
    via_F: ProductValue
    via_intro: ProductValue

    @property
    def residual(self) -> float:
        return abs(self.via_F.value - self.via_intro.value)


def mumford_ratio(group: SchottkyGroup, k: int,
                  policy: TruncationPolicy = TruncationPolicy()) -> MumfordRatio:
    """``F(1)^{d_k} / F(k)`` next to the direct evaluation of the same product."""
    _require_genus2(group)
    dk = d_k(k)
    f1 = zograf_F1(group, policy)
    fk = mt_Fk(group, k, policy)
    spec = _spec_for(group, policy)
    log_ratio = dk * f1.log_value - fk.log_value
    prev_len = max(policy.max_word_len - 2, 0)
    l1, _, _ = _inner_logs(spec.q, 1, policy.term_floor)
    lk, _, _ = _inner_logs(spec.q, k, policy.term_floor)
    sel = spec.lengths <= prev_len
    prev_log = dk * complex(l1[sel].sum()) - complex(lk[sel].sum()) - mt_prefactor_log(group, k)
    value = cmath.exp(log_ratio)
    diff = abs(value - cmath.exp(prev_log))
    via_F = ProductValue(
        value=value,
        max_word_len=policy.max_word_len,
        inner_cutoff=max(f1.inner_cutoff, fk.inner_cutoff),
        terms_used=f1.terms_used + fk.terms_used,
        tail_estimate=dk * f1.tail_estimate + fk.tail_estimate,
        converged=diff <= policy.tol,
        log_value=log_ratio,
        warnings=f1.warnings,
    )
    return MumfordRatio(via_F, intro_product(group, k, policy))


def exact_genus1_F1(q: complex, floor: float = 1e-18) -> complex:
    """``prod_{m >= 1} (1 - q^m)^2``: the genus-1 product in closed form."""
    out = 1 + 0j
    m = 1
    while abs(q) ** m >= floor:
        out *= (1 - q ** m) ** 2
        m += 1
    return out


__all__ = [
    "ClassSpectrum",
    "MumfordRatio",
    "ProductValue",
    "TruncationPolicy",
    "class_spectrum",
    "d_k",
    "intro_product",
    "modified_ruelle",
    "mt_Fk",
    "mt_double_product",
    "mt_prefactor_log",
    "mumford_ratio",
    "ruelle",
    "zograf_F1",
]

