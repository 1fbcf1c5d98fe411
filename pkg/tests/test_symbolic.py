from fractions import Fraction
import io

import numpy as np
import pytest

from detnorm.group_core import FiniteSet, integers, lattice, naturals, residue_class, everything
from detnorm.generators import prng_uniform, thue_morse
from detnorm.symbolic import (
    Block,
    BlockDistribution,
    DistCatalog,
    EmpiricalSource,
    SymbolicFunction,
    UniformBernoulli,
    block_counts,
    block_measure,
    concat,
    constant,
    dist,
    empirical_measure,
    equal_mod_shift,
    frequency,
    indicator,
    occurs_at,
    periodic,
    read_stream,
    shift,
    write_stream,
)

import oracles

Z = integers()
N0 = naturals()


def test_shift_examples():
    ev = indicator(residue_class(0, 2), Z)
    od = shift(ev, 1)
    assert [od(n) for n in range(-3, 4)] == [int(n % 2 == 1) for n in range(-3, 4)]
    same = shift(ev, 0)
    assert all(same(n) == ev(n) for n in range(-5, 5))
    assert shift(thue_morse(N0), 1)(0) == 1


def test_shift_vector_path_agrees():
    x = thue_morse(N0)
    s = shift(x, 5)
    a = np.arange(0, 200)
    assert list(s.values(a)) == [s(int(v)) for v in a]


def test_occurs_at_examples():
    x = thue_morse(N0)
    B = Block.from_word(N0, "011")
    assert occurs_at(x, B, 0)
    assert not occurs_at(x, B, 1)
    empty = Block(FiniteSet(N0, []), ())
    assert all(occurs_at(x, empty, g) for g in range(20))


def test_frequency_examples():
    B0 = Block.from_word(N0, "0110", start=1)
    assert frequency(B0, Block.from_word(N0, "1")) == Fraction(2, 4)
    C0 = Block.from_word(Z, "0110")
    assert frequency(C0, Block.from_word(Z, "01")) == Fraction(1, 4)
    assert frequency(C0, Block.from_word(Z, "01101")) == 0


def test_equal_mod_shift():
    B = Block.from_word(Z, "011")
    assert equal_mod_shift(B, Block.from_word(Z, "011", start=7))
    assert not equal_mod_shift(B, Block.from_word(Z, "010", start=7))
    P = lattice(2)
    b1 = Block.from_mapping(P, {(0, 0): 1, (1, 0): 0})
    b2 = Block.from_mapping(P, {(3, 4): 1, (4, 4): 0})
    assert equal_mod_shift(b1, b2)


def test_concat_examples():
    c = concat([Block.from_word(Z, "01"), Block.from_word(Z, "10", start=2)])
    assert c == Block.from_word(Z, "0110")
    one = Block.from_word(Z, "101")
    assert concat([one]) == one
    with pytest.raises(ValueError):
        concat([Block.from_word(Z, "01"), Block.from_word(Z, "10", start=1)])


def test_empirical_measure_constant():
    x = constant(Z, 0)
    W = FiniteSet.interval(Z, 0, 99)
    K = FiniteSet.interval(Z, 0, 4)
    m = empirical_measure(x, W, K)
    assert m.weights == {(0,) * 5: Fraction(96, 100)}
    assert m.core_fraction == Fraction(96, 100)


def test_empirical_measure_evens():
    x = indicator(residue_class(0, 2), N0)
    m = empirical_measure(x, FiniteSet.interval(N0, 1, 10 ** 4), FiniteSet(N0, [0, 1]))
    assert set(m.weights) == {(0, 1), (1, 0)}
    assert all(abs(float(w) - 0.5) < 1e-3 for w in m.weights.values())


def test_empirical_measure_prng_blocks():
    x = prng_uniform(0, N0)
    K = FiniteSet.interval(N0, 0, 7)
    m = empirical_measure(x, FiniteSet.interval(N0, 1, 10 ** 6), K)
    cf = float(m.core_fraction)
    assert len(m.weights) == 256
    assert max(abs(float(w) - cf / 256) for w in m.weights.values()) <= 1e-3


def test_block_measure_matches_frequency():
    B0 = Block.from_word(Z, "0110100110")
    K = FiniteSet.interval(Z, 0, 2)
    m = block_measure(B0, K, (0, 1))
    for vals, w in m.weights.items():
        assert w == frequency(B0, Block(K, vals))


def test_dist_examples():
    K = FiniteSet.interval(Z, 0, 0)
    cat = DistCatalog([K])
    uni = UniformBernoulli(2)
    assert dist(uni, uni, cat) == 0
    point = {K.elements: BlockDistribution({(0,): Fraction(1)}, Fraction(0), 2)}
    assert dist(uni, point, cat) == Fraction(1, 2)


def test_dist_prng_close_to_uniform():
    x = prng_uniform(0, N0)
    src = EmpiricalSource(x, FiniteSet.interval(N0, 1, 10 ** 6))
    # renormalized by anchors the weights would be closer; raw weights lose the core fraction
    assert float(dist(src, UniformBernoulli(2), DistCatalog.intervals(N0, 8))) < 1e-2


def test_catalog_weights_decrease():
    cat = DistCatalog.intervals(Z, 5)
    ws = [u for u, _ in cat]
    assert ws[0] == 1 and all(a > b > 0 for a, b in zip(ws, ws[1:]))


def test_block_counts_workers_and_chunks_agree():
    x = prng_uniform(3, Z)
    K = FiniteSet(Z, [0, 2, 5])
    anchors = np.arange(-40000, 60000)
    ref = block_counts(x, K, anchors, chunk=1 << 20)
    for workers, chunk in [(1, 997), (2, 4096), (4, 10000)]:
        bc = block_counts(x, K, anchors, workers=workers, chunk=chunk)
        assert np.array_equal(bc.rows, ref.rows) and np.array_equal(bc.counts, ref.counts)


def test_block_counts_generic_group():
    P = lattice(2)
    x = prng_uniform(1, P)
    K = FiniteSet(P, [(0, 0), (1, 0)])
    anchors = FiniteSet.box(P, [0, 0], [9, 9])
    bc = block_counts(x, K, anchors)
    brute = {}
    for g in anchors:
        key = tuple(x.index(P.multiply(k, g)) for k in K)
        brute[key] = brute.get(key, 0) + 1
    assert bc.as_dict() == brute


def test_thue_morse_block_counts_match_oracle():
    x = thue_morse(N0)
    anchors = np.arange(0, 1001)
    assert block_counts(x, FiniteSet.interval(N0, 0, 3), anchors).distinct == 10
    assert block_counts(x, FiniteSet.interval(N0, 0, 3), anchors).distinct == oracles.tm_complexity(4)


def test_cache_and_uncached_agree():
    x = prng_uniform(9, lattice(2))
    pts = [(i, -i) for i in range(50)]
    assert [x(p) for p in pts] == [x.eval_uncached(p) for p in pts]


def test_stream_roundtrip():
    buf = io.BytesIO()
    write_stream(buf, np.array([0, 1, 1, 0, 2], dtype=np.uint8), 3)
    buf.seek(0)
    s, data = read_stream(buf)
    assert s == 3 and list(data) == [0, 1, 1, 0, 2]
    assert buf.getvalue()[:4] == b"SYM1"
