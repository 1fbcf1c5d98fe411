import math
import random

import numpy as np
import pytest

from detnorm.analysis import (
    ComplexityProfile,
    block_complexity,
    block_normality,
    classical_normality_along,
    counting_census,
    default_tolerance,
    eps_complexity,
    interval_domains,
    level_set,
    orbit_normality,
    preservation_experiment,
    rate_profile,
    shannon_entropy,
    simple_normality,
    tile_entropy,
)
from detnorm.group_core import (
    EmptyWindowError,
    FiniteSet,
    SubsetPredicate,
    everything,
    initial_intervals,
    integers,
    naturals,
    permutations,
    residue_class,
    standard_intervals,
    symmetric_groups,
)
from detnorm.generators import perm_incr_indicator, prng_uniform, squarefree_indicator, thue_morse
from detnorm.symbolic import Block, constant, indicator, periodic
from detnorm.tilings import interval_tiling, perm_monotiling

import oracles

N0 = naturals()
Z = integers()
SEED = 0
WINDOW = 10 ** 6


@pytest.fixture(scope="module")
def y():
    return prng_uniform(SEED, N0)


def squares():
    return SubsetPredicate(lambda n: math.isqrt(n) ** 2 == n, "squares",
                           mask=lambda a: np.isin(a, np.arange(math.isqrt(int(a.max())) + 2) ** 2))


# --- normality tests


def test_simple_prng_passes(y):
    r = simple_normality(y, everything(), standard_intervals(), WINDOW, tol=1e-3)
    assert r.verdict and r.anchor_count == WINDOW


def test_simple_constant_selection_fails(y):
    r = simple_normality(y, level_set(y, 1), standard_intervals(), 10 ** 4, tol=0.1)
    assert not r.verdict and r.max_deviation == 0.5


def test_simple_evens_indicator():
    x = indicator(residue_class(0, 2), N0)
    r = simple_normality(x, everything(), standard_intervals(), 10 ** 4, tol=1e-2)
    assert r.verdict


def test_simple_empty_intersection(y):
    with pytest.raises(EmptyWindowError):
        simple_normality(y, SubsetPredicate(lambda g: False, "none", mask=lambda a: a < -1),
                         standard_intervals(), 100)


def test_orbit_prng_along_evens(y):
    r = orbit_normality(y, residue_class(0, 2), standard_intervals(), WINDOW,
                        interval_domains(N0, 6), tol=2e-3)
    assert r.verdict


def test_orbit_identity_catalog_is_simple(y):
    A = residue_class(1, 3)
    a = orbit_normality(y, A, standard_intervals(), 5000, [FiniteSet(N0, [0])])
    b = simple_normality(y, A, standard_intervals(), 5000)
    assert a.max_deviation == b.max_deviation


def test_orbit_constant_fails():
    x = constant(N0, 0)
    r = orbit_normality(x, everything(), standard_intervals(), 1000, interval_domains(N0, 3), tol=0.01)
    assert not r.verdict
    assert [t["deviation"] for t in r.tests] == [1 - 2 ** -k for k in (1, 2, 3)]


def test_block_visibility_skips(y):
    K = FiniteSet(N0, [1, 2])
    r = block_normality(y, residue_class(0, 2), standard_intervals(), 10 ** 4, [K])
    assert r.tests[0]["skipped"] and r.tests[0]["visibility"] == 0 and r.verdict


def test_block_squares_only_singletons_visible(y):
    cat = [FiniteSet(N0, [0]), FiniteSet(N0, [0, 1]), FiniteSet(N0, [0, 3])]
    r = block_normality(y, squares(), standard_intervals(), 10 ** 5, cat)
    skipped = [t["skipped"] for t in r.tests]
    assert skipped == [False, True, True]


def test_block_everything_matches_orbit_on_core(y):
    cat = interval_domains(N0, 4)
    b = block_normality(y, everything(), standard_intervals(), 10 ** 5, cat)
    o = orbit_normality(y, everything(), standard_intervals(), 10 ** 5, cat)
    assert all(t["visibility"] == 1.0 for t in b.tests)
    assert b.deviations() == o.deviations()


def test_block_on_permutations():
    P = permutations()
    x = prng_uniform(2, P)
    A = perm_incr_indicator(2)
    r = block_normality(x, A, symmetric_groups(), 7, [FiniteSet(P, [()]), FiniteSet(P, [(), (1, 3, 2)])], tol=0.05)
    assert r.anchor_count == 5040 // 2
    assert all(0 <= t["visibility"] <= 1 for t in r.tests)


def test_classical_prng_along_evens(y):
    r = classical_normality_along(y, residue_class(0, 2), 6, WINDOW, tol=2e-3)
    assert r.verdict and r.anchor_count >= 3 * 10 ** 5


def test_classical_constant_subsequence_fails(y):
    r = classical_normality_along(y, level_set(y, 1), 3, 10 ** 4, tol=0.01)
    assert not r.verdict


def test_classical_and_orbit_agree_on_everything(y):
    H, m = 20000, 5
    c = classical_normality_along(y, everything(), m, H)
    o = orbit_normality(y, everything(), standard_intervals(), H - m + 1, interval_domains(N0, m))
    assert c.deviations() == o.deviations()
    assert c.anchor_count == o.anchor_count


def test_classical_too_short(y):
    with pytest.raises(EmptyWindowError):
        classical_normality_along(y, residue_class(0, 1000), 8, 3000)


def test_report_json_shape(y):
    import json
    r = orbit_normality(y, residue_class(0, 2), standard_intervals(), 1000, interval_domains(N0, 2))
    d = json.loads(r.to_json())
    assert set(d) == {"mode", "window", "anchor_count", "tests", "verdict", "tolerance"}
    assert {"domain", "deviation", "reference"} <= set(d["tests"][0])


def test_default_tolerance():
    assert default_tolerance(0.5, 10 ** 9) == 5e-3
    assert default_tolerance(0.5, 100) == pytest.approx(4 * 0.05)


# --- complexity


def test_block_complexity_examples(y):
    W = FiniteSet.interval(N0, 0, 1000)
    assert block_complexity(constant(N0, 1), FiniteSet.interval(N0, 0, 5), W) == 1
    assert block_complexity(thue_morse(N0), FiniteSet.interval(N0, 0, 3), W) == 10
    assert block_complexity(y, FiniteSet.interval(N0, 0, 3), FiniteSet.interval(N0, 0, 10 ** 5)) == 16
    with pytest.raises(EmptyWindowError):
        block_complexity(y, FiniteSet.interval(N0, 0, 3), FiniteSet(N0, []))


def test_block_complexity_restricted_to_a():
    x = indicator(residue_class(0, 3), N0)
    W = FiniteSet.interval(N0, 0, 300)
    assert block_complexity(x, FiniteSet.interval(N0, 0, 4), W, residue_class(0, 3)) == 1


def test_thue_morse_complexity_matches_formula():
    x = thue_morse(N0)
    prof = rate_profile(x, interval_domains(N0, 40), FiniteSet.interval(N0, 0, 10 ** 5))
    assert prof.counts == [oracles.tm_complexity(m) for m in range(1, 41)]


def test_eps_complexity_periodic():
    x = periodic(N0, [0, 1, 1, 0, 1])
    for eps in (0.0, 0.05, 0.3):
        c, d = eps_complexity(x, FiniteSet.interval(N0, 0, 9), initial_intervals(), 5000, eps)
        assert c <= 5 and d >= 1 - eps


def test_eps_complexity_prng_matches_poisson_oracle(y):
    c, d = eps_complexity(y, FiniteSet.interval(N0, 0, 15), initial_intervals(), WINDOW, 0.1)
    ref = oracles.poisson_greedy_survivors(2 ** 16, WINDOW, 0.1)
    assert abs(c - ref) <= 0.005 * ref and d >= 0.9


@pytest.mark.xfail(strict=True, reason="an unbiased source keeps about 0.841·2^16 blocks; 0.85 is out of reach")
def test_eps_complexity_prng_085_threshold(y):
    c, _ = eps_complexity(y, FiniteSet.interval(N0, 0, 15), initial_intervals(), WINDOW, 0.1)
    assert c >= 0.85 * 2 ** 16


def test_eps_complexity_squarefree_golden_pair():
    x = indicator(squarefree_indicator(WINDOW + 64), N0)
    K = FiniteSet.interval(N0, 0, 23)
    c5, d5 = eps_complexity(x, K, standard_intervals(), WINDOW, 0.05)
    c0, d0 = eps_complexity(x, K, standard_intervals(), WINDOW, 0.0)
    assert (c5, c0) == (13203, 36839)
    assert c5 < c0 and d0 == 1.0 and d5 >= 0.95


def test_eps_complexity_rejects_bad_eps(y):
    with pytest.raises(ValueError):
        eps_complexity(y, FiniteSet.interval(N0, 0, 2), initial_intervals(), 10, 1.0)


def test_rate_profile_examples(y):
    W = FiniteSet.interval(N0, 0, WINDOW - 1)
    c = rate_profile(constant(N0, 0), interval_domains(N0, 8), W)
    assert c.ratios == [0.0] * 8
    p = rate_profile(y, interval_domains(N0, 16), W)
    assert min(p.ratios) >= 0.95
    assert p.estimate == min(p.ratios)
    with pytest.raises(ValueError):
        rate_profile(y, [FiniteSet.interval(N0, 0, 3), FiniteSet.interval(N0, 0, 3)], W)


def test_profile_csv_and_eps():
    x = periodic(N0, [0, 0, 1])
    prof = rate_profile(x, interval_domains(N0, 4), FiniteSet.interval(N0, 0, 999), eps=0.1)
    lines = prof.to_csv().splitlines()
    assert lines[0] == "m,size,count,ratio"
    assert len(lines) == 5 and prof.surviving is not None
    assert "lower bound" in prof.as_dict()["note"]


# --- entropy


def test_shannon_examples():
    assert shannon_entropy([1]) == 0
    assert shannon_entropy([0.5, 0.5]) == 1
    assert shannon_entropy([0.25] * 4) == 2
    assert shannon_entropy({"a": 3, "b": 1, "c": 0}) == pytest.approx(oracles.entropy_bits([3, 1]))
    with pytest.raises(ValueError):
        shannon_entropy([0.5, -0.1])


def test_tile_entropy_examples(y):
    assert tile_entropy(Block.from_word(Z, "0" * 8), interval_tiling(0, 7, 2)) == 0
    assert tile_entropy(Block.from_word(Z, "0110"), interval_tiling(0, 3, 2)) == 0.5
    B = y.restrict(FiniteSet.interval(N0, 0, WINDOW - 1))
    h = tile_entropy(B, interval_tiling(0, WINDOW - 1, 4, N0))
    assert abs(h - 1.0) <= 0.02
    with pytest.raises(ValueError):
        tile_entropy(Block.from_word(Z, "0110"), interval_tiling(0, 5, 2))


def test_tile_entropy_matches_naive():
    rng = random.Random(4)
    for _ in range(20):
        L = rng.choice([1, 2, 3, 4])
        t = rng.randint(1, 6)
        word = [rng.randint(0, 2) for _ in range(L * t)]
        tally = {}
        for j in range(0, L * t, L):
            key = tuple(word[j:j + L])
            tally[key] = tally.get(key, 0) + 1
        ref = oracles.entropy_bits(list(tally.values())) / L
        got = tile_entropy(Block.from_word(Z, word), interval_tiling(0, L * t - 1, L))
        assert got == pytest.approx(ref, abs=1e-12)


def test_tile_entropy_on_permutations():
    P = permutations()
    x = prng_uniform(1, P)
    t = perm_monotiling(2, 5)
    B = x.restrict(t.window)
    h = tile_entropy(B, t)
    assert 0 < h <= 1.0


def test_tile_entropy_periodic_levels():
    p = 6
    x = periodic(Z, [0, 1, 1, 0, 1, 0])
    W = FiniteSet.interval(Z, 0, 4 * p * 25 - 1)
    B = x.restrict(W)
    hs = [tile_entropy(B, interval_tiling(0, 4 * p * 25 - 1, L)) for L in (p, 2 * p, 4 * p)]
    assert hs == [0.0, 0.0, 0.0]


def test_counting_census_examples():
    assert counting_census(2, 8, 2, 1.0) == (256, 1.0)
    assert counting_census(2, 4, 2, 0)[0] == 4
    for size, L, c in [(8, 2, 0.3), (9, 3, 0.4), (12, 3, 0.5), (10, 5, 0.1)]:
        assert counting_census(2, size, L, c)[0] == oracles.census_naive(size, L, c)
    with pytest.raises(ValueError):
        counting_census(2, 21, 3, 0.5)


# --- preservation experiment


def test_preservation_evens(y):
    b = preservation_experiment(y, residue_class(0, 2), standard_intervals(), WINDOW,
                                interval_domains(N0, 6), tol=5e-3)
    assert b["verdict"] == "pass"
    assert b["density"]["lower"] == pytest.approx(0.5, abs=1e-5)
    rows = b["rate"]["rows"]
    assert all(r["count"] == 2 for r in rows)


def test_preservation_squarefree(y):
    A = squarefree_indicator(WINDOW + 64)
    b = preservation_experiment(y, A, standard_intervals(), WINDOW, interval_domains(N0, 6), tol=5e-3)
    assert b["simple"]["verdict"] == b["orbit"]["verdict"] == b["block"]["verdict"] == "pass"
    assert b["density"]["lower"] > 0.6


def test_preservation_self_selection(y):
    b = preservation_experiment(y, level_set(y, 1), standard_intervals(), 10 ** 5,
                                interval_domains(N0, 4))
    assert b["simple"]["verdict"] == "fail" and b["verdict"] == "fail"
    assert b["rate"]["rate_estimate"] >= 0.95
