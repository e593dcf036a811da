import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schottky_zeta import INF, build, normalize
from schottky_zeta import freegroup as F
from schottky_zeta import schottky as S
from schottky_zeta import tate
from schottky_zeta import zetaprod as Z
from schottky_zeta.errors import GenusTooSmall
from schottky_zeta.schottky import build_from_fixed_points

P10 = Z.TruncationPolicy(max_word_len=10)


def tiny_g2(q=1e-14):
    return build_from_fixed_points([(0, INF, q), (1, 2, q)])


def scalar_spectrum(group, L):
    """Class multipliers by slow per-class evaluation (second code path)."""
    return [S.class_multiplier(group, c) for c in F.enumerate_classes(group.genus, L)]


@pytest.mark.parametrize("k,want", [(1, 1), (2, 13), (3, 37)])
def test_d_k(k, want):
    assert Z.d_k(k) == want


def test_policy_validation():
    for kw in ({"max_word_len": 0}, {"term_floor": 0}, {"term_floor": 1}, {"threads": 0}):
        with pytest.raises(ValueError):
            Z.TruncationPolicy(**kw)


def test_policy_env(monkeypatch):
    monkeypatch.setenv(Z.THREADS_ENV, "3")
    assert Z.TruncationPolicy.from_env().threads == 3
    assert Z.TruncationPolicy.from_env(threads=2).threads == 2


def test_F1_genus1(corpus):
    v = Z.zograf_F1(corpus["genus1"])
    # 30-digit value from mpmath; 0.792117977 is the same number truncated
    assert abs(v.value - 0.7921179781002282) < 1e-14
    assert abs(v.value - Z.exact_genus1_F1(0.1)) < 1e-14
    assert v.converged


def test_F1_tiny_multipliers_is_one():
    g = tiny_g2()
    assert abs(Z.zograf_F1(g, P10).value - 1) < 1e-12
    assert abs(Z.mt_Fk(g, 2, P10).value - 1) < 1e-12
    r = Z.mumford_ratio(g, 2, P10)
    assert abs(r.via_F.value - 1) < 1e-12 and abs(r.via_intro.value - 1) < 1e-12
    assert abs(Z.ruelle(g, 2, P10).value - 1) < 1e-12
    assert abs(Z.modified_ruelle(g, 2, P10).value - 1) < 1e-12


def test_F1_self_consistent(g2_real):
    a = Z.zograf_F1(g2_real, Z.TruncationPolicy(max_word_len=10)).value
    b = Z.zograf_F1(g2_real, Z.TruncationPolicy(max_word_len=12)).value
    assert abs(a - b) < 1e-10


def test_ruelle_self_consistent(g2_real):
    a = Z.ruelle(g2_real, 2, Z.TruncationPolicy(max_word_len=10)).value
    b = Z.ruelle(g2_real, 2, Z.TruncationPolicy(max_word_len=12)).value
    assert abs(a - b) < 1e-10


def test_prefactor_example():
    g = build_from_fixed_points([(0, INF, 0.1), (1, 2, 0.2)])
    assert abs(cmath.exp(Z.mt_prefactor_log(g, 3)) - 0.81 * 0.9801 * 0.96) < 1e-14


def test_ruelle_genus1(corpus):
    v = Z.ruelle(corpus["genus1"], 2)
    assert abs(v.value - (1 - 0.01) ** -2) < 1e-14
    assert not v.warnings


def test_ruelle_warns_below_two(g2_real):
    v = Z.ruelle(g2_real, 1.5, Z.TruncationPolicy(max_word_len=6))
    assert any("s = 1.5" in w for w in v.warnings)


def test_genus_too_small(corpus):
    g1 = corpus["genus1"]
    for fn in (Z.mt_Fk, Z.modified_ruelle, Z.mumford_ratio, Z.intro_product):
        with pytest.raises(GenusTooSmall):
            fn(g1, 2)
    with pytest.raises(ValueError):
        Z.mt_Fk(tiny_g2(), 1)


@pytest.mark.parametrize("k", [2, 3])
def test_modified_ruelle_identity(g2_real, k):
    r = Z.modified_ruelle(g2_real, k, P10).value
    ratio = Z.mt_Fk(g2_real, k + 1, P10).value / Z.mt_Fk(g2_real, k, P10).value
    assert abs(r - ratio) < 1e-9


def test_modified_ruelle_term_by_term(g2_real):
    L, k = 8, 2
    q1, q2 = g2_real.qs[:2]
    acc = 1.0
    for q in scalar_spectrum(g2_real, L):
        acc /= 1 - abs(q) ** k
    acc *= (1 - q1 ** k) ** 2 * (1 - q2 ** k) / (1 - q2 ** (k - 1))
    got = Z.modified_ruelle(g2_real, k, Z.TruncationPolicy(max_word_len=L)).value
    assert abs(got - acc) < 1e-10


def test_F1_term_by_term(g2_complex):
    L = 7
    acc = 1 + 0j
    for q in scalar_spectrum(g2_complex, L):
        m = 1
        while abs(q) ** m > 1e-18:
            acc *= 1 - q ** m
            m += 1
    got = Z.zograf_F1(g2_complex, Z.TruncationPolicy(max_word_len=L)).value
    assert abs(got - acc) < 1e-12


def test_modified_ruelle_warns_if_complex(g2_complex):
    v = Z.modified_ruelle(g2_complex, 2, Z.TruncationPolicy(max_word_len=6))
    assert any("not real" in w for w in v.warnings)


@pytest.mark.parametrize("name", ["g2_real", "g2_complex"])
@pytest.mark.parametrize("k", [2, 3])
def test_mumford_ratio(name, k, request):
    g = request.getfixturevalue(name)
    r = Z.mumford_ratio(g, k, P10)
    assert r.residual < 1e-9 * max(1, abs(r.via_F.value))


def test_mumford_ratio_genus3(g3_real):
    r = Z.mumford_ratio(g3_real, 2, Z.TruncationPolicy(max_word_len=6))
    assert r.residual < 1e-9 * abs(r.via_F.value)


@pytest.mark.parametrize("name", ["g2_real", "g2_complex", "g3_real"])
def test_marking_invariance(name, request):
    g = request.getfixturevalue(name)
    moved = build_from_fixed_points(
        [(a if a is INF else 2 * a - 1j, b if b is INF else 2 * b - 1j, q)
         for a, b, q in zip(g.alphas, g.betas, g.qs)]
    )
    n, _ = normalize(moved)
    pol = Z.TruncationPolicy(max_word_len=7)
    assert abs(Z.zograf_F1(g, pol).value - Z.zograf_F1(n, pol).value) < 1e-10
    assert abs(Z.ruelle(g, 2, pol).value - Z.ruelle(n, 2, pol).value) < 1e-10


@pytest.mark.parametrize("k", [2, 3])
def test_permutation_covariance(g2_complex, k):
    g = g2_complex
    swapped = build_from_fixed_points(list(zip(g.alphas, g.betas, g.qs))[::-1])
    pol = Z.TruncationPolicy(max_word_len=8)
    a = Z.mt_double_product(g, k, pol).value
    b = Z.mt_double_product(swapped, k, pol).value
    assert abs(a - b) < 1e-12
    fa, fb = Z.mt_Fk(g, k, pol).value, Z.mt_Fk(swapped, k, pol).value
    pa = cmath.exp(Z.mt_prefactor_log(g, k))
    pb = cmath.exp(Z.mt_prefactor_log(swapped, k))
    assert abs(fa / pa - fb / pb) < 1e-12


@pytest.mark.parametrize("name", ["g2_real", "g2_complex", "g3_real"])
def test_monotone_truncation(name, request):
    g = request.getfixturevalue(name)
    top = 9 if g.genus == 2 else 7
    vals = {L: Z.zograf_F1(g, Z.TruncationPolicy(max_word_len=L)) for L in range(2, top + 1)}
    diffs = [abs(vals[L + 2].value - vals[L].value) for L in range(2, top - 1)]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))
    tails = [vals[L].tail_estimate for L in range(2, top + 1)]
    assert all(b < a for a, b in zip(tails, tails[1:]))


def test_convergence_flag(g2_real):
    assert not Z.zograf_F1(g2_real, Z.TruncationPolicy(max_word_len=3)).converged
    v = Z.zograf_F1(g2_real, Z.TruncationPolicy(max_word_len=3))
    assert any("differ" in w for w in v.warnings)
    assert Z.zograf_F1(g2_real, Z.TruncationPolicy(max_word_len=12)).converged


def test_genus1_reduction():
    q = 0.05
    g = build_from_fixed_points([(0, INF, q)])
    v = Z.intro_product(g, 2, allow_genus1=True)
    direct = 1.0
    for m in range(1, 200):
        direct *= (1 - q ** m) ** 24
    assert abs(v.value - direct) < 1e-12
    assert abs(v.value - tate.delta_series(40)(q) / q) < 1e-10


def test_parallel_matches_sequential(g2_complex):
    seq = Z.zograf_F1(g2_complex, Z.TruncationPolicy(max_word_len=9))
    Z._spectrum.cache_clear()
    par = Z.zograf_F1(g2_complex, Z.TruncationPolicy(max_word_len=9, threads=3))
    assert abs(seq.value - par.value) < 1e-12


def test_class_word_arrays_parallel_identical():
    seq = Z.class_word_arrays(2, 7)
    par = Z.class_word_arrays(2, 7, threads=2)
    assert all(np.array_equal(a, b) for a, b in zip(seq, par))
    assert [len(a) for a in seq] == [F.primitive_class_count(2, n) for n in range(1, 8)]


def test_product_value_dict(g2_real):
    d = Z.zograf_F1(g2_real, Z.TruncationPolicy(max_word_len=4)).to_dict()
    assert set(d) >= {"value", "max_word_len", "inner_cutoff", "terms_used",
                      "tail_estimate", "converged"}
    assert d["max_word_len"] == 4 and d["inner_cutoff"] >= 1


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-4, 0.04), st.floats(1e-4, 0.04))
def test_identities_random_real_groups(q1, q2):
    g = build_from_fixed_points([(0, INF, q1), (1, 2.5, q2)])
    pol = Z.TruncationPolicy(max_word_len=6)
    r = Z.mumford_ratio(g, 2, pol)
    assert r.residual < 1e-9
    mr = Z.modified_ruelle(g, 2, pol).value
    assert abs(mr - Z.mt_Fk(g, 3, pol).value / Z.mt_Fk(g, 2, pol).value) < 1e-10
