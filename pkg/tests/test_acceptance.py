"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; the
collected lines are repeated in the terminal summary.
"""

import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, load_corpus
from schottky_zeta import INF, MoebiusMap
from schottky_zeta import differentials as D
from schottky_zeta import freegroup as F
from schottky_zeta import schottky as S
from schottky_zeta import tate as T
from schottky_zeta import zetaprod as Z
from schottky_zeta.moebius import from_fixed_points, multiplier

FAM2 = [(0, 3, 1.0), (1 + 1.5j, 2.5 - 1j, 0.8)]
FAM3 = FAM2 + [(-1.5 + 0.5j, -0.5 - 2j, 0.6)]


def record(n, ok, what, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {what} ({elapsed:.2f}s, budget {budget:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# -- 1 ------------------------------------------------------------------------

def _reduced_words(g, n):
    letters = [x for i in range(1, g + 1) for x in (i, -i)]
    words = [(x,) for x in letters]
    for _ in range(n - 1):
        words = [w + (x,) for w in words for x in letters if x != -w[-1]]
    return words


def brute_primitive_classes(g, n):
    """Count by collecting rotation orbits of cyclically reduced, non-power words."""
    reps = set()
    for w in _reduced_words(g, n):
        if n > 1 and w[0] == -w[-1]:
            continue
        if any(n % d == 0 and w[:d] * (n // d) == w for d in range(1, n)):
            continue
        reps.add(min(w[r:] + w[:r] for r in range(n)))
    return len(reps)


def test_criterion_01_free_group_counts():
    t0 = time.perf_counter()
    mismatches = []
    for g in (2, 3):
        ours = {}
        for c in F.enumerate_classes(g, 8):
            ours[c.length] = ours.get(c.length, 0) + 1
        for n in range(1, 9):
            brute = brute_primitive_classes(g, n)
            if ours.get(n, 0) != brute:
                mismatches.append((g, n, ours.get(n), brute))
    dt = time.perf_counter() - t0
    record(1, not mismatches, f"class counts g=2,3 length<=8 match brute force, mismatches={mismatches}",
           dt, 10)


# -- 2 ------------------------------------------------------------------------

def test_criterion_02_multiplier_laws():
    rng = np.random.default_rng(20240501)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        q = rng.uniform(0.05, 0.9) * np.exp(2j * np.pi * rng.uniform())
        m = from_fixed_points(a, b, q)
        n = MoebiusMap(*(rng.normal(size=4) + 1j * rng.normal(size=4)))
        k = int(rng.integers(2, 5))
        q0 = multiplier(m)
        worst = max(worst,
                    abs(multiplier(m.conjugate_by(n)) - q0),
                    abs(multiplier(m.inverse()) - q0),
                    abs(multiplier(m.power(k)) - q0 ** k),
                    abs(q0 - q))
    dt = time.perf_counter() - t0
    record(2, worst < 1e-10, f"conjugation/inverse/power laws on 200 maps, max error {worst:.2e}", dt, 1)


# -- 3 ------------------------------------------------------------------------

def test_criterion_03_normalization():
    t0 = time.perf_counter()
    devs = {}
    for name in ("genus2_real", "genus2_complex"):
        m = D.normalization_matrix(load_corpus(name), 8, 1e-10)
        devs[name] = float(np.max(np.abs(m - np.eye(2))))
    dt = time.perf_counter() - t0
    record(3, max(devs.values()) < 1e-6,
           "normalization matrix = I at L=8: " + ", ".join(f"{k} {v:.1e}" for k, v in devs.items()), dt, 30)


# -- 4 ------------------------------------------------------------------------

def test_criterion_04_product_identity():
    t0 = time.perf_counter()
    pol = Z.TruncationPolicy(max_word_len=10)
    res = {}
    for name in ("genus2_real", "genus2_complex"):
        g = load_corpus(name)
        for k in (2, 3):
            res[(name, k)] = Z.mumford_ratio(g, k, pol).residual
    dt = time.perf_counter() - t0
    worst = max(res.values())
    record(4, worst < 1e-9, f"F(1)^d_k/F(k) vs direct product, k=2,3, L=10, max residual {worst:.1e}", dt, 60)


# -- 5 ------------------------------------------------------------------------

def test_criterion_05_genus1_reduction():
    q = 0.05
    t0 = time.perf_counter()
    g = S.build_from_fixed_points([(0, INF, q)])
    v = Z.intro_product(g, 2, allow_genus1=True).value
    direct = np.prod([(1 - q ** m) ** 24 for m in range(1, 80)])
    via_delta = T.delta_series(40)(q) / q
    err = max(abs(v - direct), abs(v - via_delta))
    dt = time.perf_counter() - t0
    record(5, err < 1e-10, f"genus-1 product = prod(1-q^m)^24 = Delta/q at q=0.05, error {err:.1e}", dt, 5)


# -- 6 ------------------------------------------------------------------------

def test_criterion_06_ruelle_identity():
    t0 = time.perf_counter()
    g = load_corpus("genus2_real")
    pol = Z.TruncationPolicy(max_word_len=10)
    errs = []
    for k in (2, 3):
        r = Z.modified_ruelle(g, k, pol).value
        ratio = Z.mt_Fk(g, k + 1, pol).value / Z.mt_Fk(g, k, pol).value
        errs.append(abs(r - ratio))
    dt = time.perf_counter() - t0
    record(6, max(errs) < 1e-9, f"modified Ruelle = F(k+1)/F(k), k=2,3, max error {max(errs):.1e}", dt, 60)


# -- 7 ------------------------------------------------------------------------

def test_criterion_07_degeneration_limit():
    q1 = 0.1
    ts = np.array([1e-2, 1e-3, 1e-4])
    t0 = time.perf_counter()
    target = Z.exact_genus1_F1(q1)
    errs = []
    for t in ts:
        g = S.build_from_fixed_points([(0, INF, q1), (1, 2, t)])
        errs.append(abs(Z.zograf_F1(g, Z.TruncationPolicy(max_word_len=10)).value - target))
    slope = float(np.polyfit(np.log(ts), np.log(errs), 1)[0])
    dt = time.perf_counter() - t0
    record(7, abs(slope - 1) < 0.2, f"F(1)(t) -> prod(1-q_1^m)^2 with slope {slope:.3f} (errors "
           + ", ".join(f"{e:.1e}" for e in errs) + ")", dt, 60)


# -- 8 ------------------------------------------------------------------------

def test_criterion_08_vanishing_order():
    t = 1e-3
    t0 = time.perf_counter()
    ga = D.scaled_family(FAM2, t)
    gb = D.scaled_family(FAM2, t / 2)
    worst = 0.0
    for n in range(1, 5):
        w = np.array(F.class_words(2, n))
        ratio = np.abs(S.word_multipliers(ga, w) / S.word_multipliers(gb, w))
        worst = max(worst, float(np.max(np.abs(ratio / 2 ** n - 1))))
    dt = time.perf_counter() - t0
    record(8, worst < 0.1, f"|q(t)/q(t/2)| = 2^l for l<=4, max relative deviation {worst:.1e}", dt, 30)


# -- 9 ------------------------------------------------------------------------

def _entry_errors(triples, t):
    pm = D.pairing_matrix_k2(D.scaled_family(triples, t), 4, 1e-13)
    rows, cols = list(pm.rows), list(pm.cols)
    out = {}
    for c in D.congruence_table(triples):
        want = c.value * (t if c.order else 1)
        out[(c.row, c.col)] = (abs(pm.matrix[rows.index(c.row), cols.index(c.col)] - want), c.order)
    return out


def test_criterion_09_congruences_and_determinant():
    t0 = time.perf_counter()
    problems = []
    summary = []
    for triples in (FAM2, FAM3):
        g = len(triples)
        e1, e2 = _entry_errors(triples, 2e-3), _entry_errors(triples, 5e-4)
        slopes = []
        for key, (err1, order) in e1.items():
            err2 = e2[key][0]
            if err1 < 1e-11:
                continue
            slope = np.log(err1 / err2) / np.log(4)
            slopes.append(slope - order)
            if slope < order + 1 - 0.2:
                problems.append((g, key, slope))
        fit = D.det_leading_order(triples)
        if abs(fit.exponent - (g - 1)) >= 0.05:
            problems.append((g, "exponent", fit.exponent))
        if fit.rel_error >= 0.01:
            problems.append((g, "coefficient", fit.rel_error))
        summary.append(f"g={g}: min rate {min(slopes):.2f}, exponent {fit.exponent:.3f}, "
                       f"coefficient error {fit.rel_error:.1e}")
    dt = time.perf_counter() - t0
    record(9, not problems, "congruence limits and det lowest term; " + "; ".join(summary)
           + (f"; problems {problems}" if problems else ""), dt, 300)


# -- 10 -----------------------------------------------------------------------

def test_criterion_10_tate_exactness():
    t0 = time.perf_counter()
    N = 50
    rel = T.a6_series(N) * 12 + T.s_k_series(3, N) * 5 + T.s_k_series(5, N) * 7
    exact_a6 = rel == T.IntegerPowerSeries.zero(N)
    disc = T.discriminant_series(N) == T.delta_series(N)
    zs = [0.3 + 0.2j, -0.5 + 0.7j, 0.9 - 0.1j, 1.6 + 1.1j, -2.5 - 0.4j]
    qs = [0.1, 0.05, 0.01, 0.08j, -0.03 + 0.04j]
    resid = float(T.series_grid_residuals(zs, qs).max())
    dt = time.perf_counter() - t0
    record(10, exact_a6 and disc and resid < 1e-8,
           f"12a6+5s3+7s5=0 {exact_a6}, disc=Delta through q^50 {disc}, grid residual {resid:.1e}", dt, 30)


# -- 11 -----------------------------------------------------------------------

def test_criterion_11_performance():
    t0 = time.perf_counter()
    n_classes = sum(1 for _ in F.enumerate_classes(2, 12))
    t_enum = time.perf_counter() - t0
    g = load_corpus("genus2_complex")
    Z._spectrum.cache_clear()
    t1 = time.perf_counter()
    seq = Z.zograf_F1(g, Z.TruncationPolicy(max_word_len=12)).value
    t_prod = time.perf_counter() - t1
    Z._spectrum.cache_clear()
    par = Z.zograf_F1(g, Z.TruncationPolicy(max_word_len=12, threads=4)).value
    diff = abs(seq - par)
    ok = t_enum < 2 and t_prod < 2 * t_enum and diff < 1e-12
    record(11, ok, f"{n_classes} classes in {t_enum:.2f}s, F(1) at L=12 in {t_prod:.2f}s, "
           f"parallel-sequential {diff:.1e}", time.perf_counter() - t0, 30)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
