"""Symbolic functions x: G -> Λ, blocks, anchored occurrences and empirical measures."""

from __future__ import annotations

import functools
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import BinaryIO, Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .group_core import EmptyWindowError, FiniteSet, GroupContext, k_core


class SymbolicFunction:
    """A lazily evaluated x: G -> Λ with a bounded, thread-safe cache.

    ``vector_fn`` (vector groups only) maps an int64 array of elements to the
    array of symbol *indices*; it must agree with ``fn`` pointwise.
    """

    def __init__(self, group: GroupContext, alphabet: Sequence, fn: Callable[[object], object], *,
                 vector_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 name: str = "x", cache_size: int = 1 << 16):
        if not alphabet:
            raise ValueError("alphabet must be nonempty")
        self.group = group
        self.alphabet = tuple(alphabet)
        self.name = name
        self._fn = fn
        self._cached = functools.lru_cache(maxsize=cache_size)(fn)
        self._vector_fn = vector_fn if group.vector else None
        self._index = {a: i for i, a in enumerate(self.alphabet)}

    def __call__(self, g):
        return self._cached(g)

    def eval_uncached(self, g):
        return self._fn(g)

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)

    @property
    def vectorized(self) -> bool:
        return self._vector_fn is not None

    def index(self, g) -> int:
        return self._index[self(g)]

    def values(self, elements) -> np.ndarray:
        """Symbol indices at the given elements (uint8 when |Λ| <= 256)."""
        dtype = np.uint8 if len(self.alphabet) <= 256 else np.int64
        if self._vector_fn is not None and isinstance(elements, np.ndarray):
            return np.asarray(self._vector_fn(elements)).astype(dtype, copy=False)
        idx = self._index
        return np.fromiter((idx[self(g)] for g in elements), dtype=dtype)

    def restrict(self, window: FiniteSet) -> "Block":
        vals = self.values(window.array if window.group.vector else window.elements)
        return Block(window, tuple(self.alphabet[i] for i in vals))

    def __repr__(self) -> str:
        return f"SymbolicFunction({self.name} on {self.group.name}, |Λ|={len(self.alphabet)})"


def shift(x: SymbolicFunction, g) -> SymbolicFunction:
    """g(x)(h) = x(hg)."""
    mul = x.group.multiply
    vec = None
    if x.vectorized:
        vec = lambda arr: x.values(arr + g)  # noqa: E731
    return SymbolicFunction(x.group, x.alphabet, lambda h: x(mul(h, g)), vector_fn=vec,
                            name=f"{x.name}@{x.group.format(g)}")


def constant(group: GroupContext, symbol=0, alphabet: Sequence = (0, 1)) -> SymbolicFunction:
    i = tuple(alphabet).index(symbol)
    return SymbolicFunction(group, alphabet, lambda g: symbol,
                            vector_fn=lambda a: np.full(len(a), i, dtype=np.uint8),
                            name=f"const{symbol}")


def indicator(pred, group: GroupContext) -> SymbolicFunction:
    """1_A as a {0,1}-valued symbolic function."""
    return SymbolicFunction(group, (0, 1), lambda g: int(pred.contains(g)),
                            vector_fn=lambda a: pred.mask(a).astype(np.uint8),
                            name=f"1[{pred.descriptor}]")


def periodic(group: GroupContext, pattern: Sequence[int], alphabet: Optional[Sequence] = None) -> SymbolicFunction:
    """x(n) = pattern[n mod p] on a 1-d integer group."""
    pat = np.asarray(pattern, dtype=np.int64)
    p = len(pat)
    alphabet = tuple(alphabet) if alphabet is not None else tuple(range(int(pat.max()) + 1))
    return SymbolicFunction(group, alphabet, lambda n: int(pat[n % p]),
                            vector_fn=lambda a: pat[a % p],
                            name=f"periodic{''.join(map(str, pattern))}")


# --------------------------------------------------------------------------
# blocks


@dataclass(frozen=True)
class Block:
    """B ∈ Λ^K; ``values`` is aligned with the canonical order of ``domain``."""

    domain: FiniteSet
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.domain):
            raise ValueError("block values must cover exactly the domain")

    @classmethod
    def from_mapping(cls, group: GroupContext, mapping: Mapping) -> "Block":
        dom = FiniteSet(group, list(mapping))
        return cls(dom, tuple(mapping[g] for g in dom))

    @classmethod
    def from_word(cls, group: GroupContext, word: Union[str, Sequence[int]], start: int = 0) -> "Block":
        """Block on [start, start+len-1] of a 1-d group; a str is read digit by digit."""
        vals = tuple(int(c) for c in word) if isinstance(word, str) else tuple(word)
        return cls(FiniteSet.interval(group, start, start + len(vals) - 1), vals)

    @property
    def group(self) -> GroupContext:
        return self.domain.group

    def as_dict(self) -> dict:
        return dict(zip(self.domain, self.values))

    def __getitem__(self, h):
        if self.domain.group.vector:
            arr = self.domain.array
            i = int(np.searchsorted(arr, h))
            if i < len(arr) and arr[i] == h:
                return self.values[i]
            raise KeyError(h)
        return self.as_dict()[h]

    def translate(self, g) -> "Block":
        """The block C on Kg with C(hg) = B(h)."""
        mul = self.group.multiply
        return Block.from_mapping(self.group, {mul(h, g): v for h, v in zip(self.domain, self.values)})

    def restrict(self, sub: FiniteSet) -> "Block":
        d = self.as_dict()
        return Block(sub, tuple(d[h] for h in sub))

    def word(self) -> str:
        return "".join(str(v) for v in self.values)


def equal_mod_shift(B: Block, C: Block) -> bool:
    """B ≈ C: C lives on Kg for some g and C(hg) = B(h) for all h in K."""
    if len(B.domain) != len(C.domain):
        return False
    if len(B.domain) == 0:
        return True
    group = B.group
    c0 = C.domain.elements[0]
    cd = C.as_dict()
    for k in B.domain:
        g = group.divide(k, c0)
        if g is None:
            continue
        if all(cd.get(group.multiply(h, g), _MISSING) == v for h, v in zip(B.domain, B.values)):
            return True
    return False


_MISSING = object()


def occurs_at(x: SymbolicFunction, B: Block, g) -> bool:
    """x|_{Kg} ≈ B."""
    mul = x.group.multiply
    return all(x(mul(h, g)) == v for h, v in zip(B.domain, B.values))


def frequency(B0: Block, B: Block) -> Fraction:
    """Fr_{B0}(B) = |{g ∈ (K0)_K : B0|_{Kg} ≈ B}| / |K0|."""
    K0, K = B0.domain, B.domain
    if len(K0) == 0:
        raise EmptyWindowError("empty window")
    core = k_core(K0, K)
    if len(core) == 0:
        return Fraction(0)
    mul = K0.group.multiply
    d0 = B0.as_dict()
    hits = sum(1 for g in core if all(d0[mul(h, g)] == v for h, v in zip(K, B.values)))
    return Fraction(hits, len(K0))


def concat(blocks: Sequence[Block]) -> Block:
    """Concatenation of blocks with pairwise disjoint domains."""
    if not blocks:
        raise ValueError("nothing to concatenate")
    merged: dict = {}
    for b in blocks:
        for h, v in zip(b.domain, b.values):
            if h in merged:
                raise ValueError(f"overlapping domains at {b.group.format(h)}")
            merged[h] = v
    return Block.from_mapping(blocks[0].group, merged)


# --------------------------------------------------------------------------
# block counting engine


@dataclass
class BlockCounts:
    """Distinct blocks (rows of symbol indices, lexicographic order) with anchor counts."""

    K: FiniteSet
    alphabet_size: int
    rows: np.ndarray
    counts: np.ndarray

    @property
    def distinct(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def items(self) -> Iterable[tuple[tuple, int]]:
        for r, c in zip(self.rows, self.counts):
            yield tuple(int(v) for v in r), int(c)

    def as_dict(self) -> dict[tuple, int]:
        return dict(self.items())


def _fits(s: int, L: int) -> bool:
    return L == 0 or s ** L < 2 ** 62


def _unique_rows(rows: np.ndarray, s: int, weights: Optional[np.ndarray] = None):
    n, L = rows.shape
    if n == 0:
        return rows, np.zeros(0, dtype=np.int64)
    if _fits(s, L):
        codes = np.zeros(n, dtype=np.int64)
        for j in range(L):
            codes = codes * s + rows[:, j].astype(np.int64)
        uniq, first, inv = np.unique(codes, return_index=True, return_inverse=True)
        counts = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
        return rows[first], counts.astype(np.int64)
    uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    counts = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
    return uniq, counts.astype(np.int64)


def _rows(x: SymbolicFunction, K: FiniteSet, anchors) -> np.ndarray:
    if x.group.vector and isinstance(anchors, np.ndarray):
        if len(K) == 0:
            return np.zeros((len(anchors), 0), dtype=np.uint8)
        n = len(anchors)
        ks = K.array
        span = int(ks[-1] - ks[0])
        if n and int(anchors[-1] - anchors[0]) == n - 1 and span <= 4 * n + 64:
            # contiguous anchors: evaluate x once on the covering run
            base = x.values(np.arange(anchors[0] + ks[0], anchors[-1] + ks[-1] + 1, dtype=np.int64))
            off = ks - ks[0]
            return np.stack([base[o:o + n] for o in off], axis=1)
        return np.stack([x.values(anchors + k) for k in ks], axis=1)
    mul = x.group.multiply
    idx = x._index
    data = [[idx[x(mul(k, g))] for k in K] for g in anchors]
    return np.asarray(data, dtype=np.uint8 if x.alphabet_size <= 256 else np.int64).reshape(len(data), len(K))


def _anchor_seq(anchors):
    if isinstance(anchors, FiniteSet):
        return anchors.array if anchors.group.vector else list(anchors.elements)
    return anchors


def block_counts(x: SymbolicFunction, K: FiniteSet, anchors, workers: int = 1,
                 chunk: int = 1 << 18) -> BlockCounts:
    """Count the blocks x|_{Kg} over anchors g.

    Work is split into fixed-size chunks independent of ``workers`` and the
    partial counts are merged by exact integer addition, so the result does
    not depend on the number of workers.
    """
    seq = _anchor_seq(anchors)
    s = x.alphabet_size
    n = len(seq)
    pieces = [seq[i:i + chunk] for i in range(0, n, chunk)] or [seq[:0]]

    def work(piece):
        return _unique_rows(_rows(x, K, piece), s)

    if workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, pieces))
    else:
        parts = [work(p) for p in pieces]
    if len(parts) == 1:
        rows, counts = parts[0]
    else:
        rows = np.concatenate([p[0] for p in parts])
        w = np.concatenate([p[1] for p in parts]).astype(np.float64)
        rows, counts = _unique_rows(rows, s, weights=w)
    return BlockCounts(K, s, rows, counts)


# --------------------------------------------------------------------------
# empirical measures and dist


@dataclass(frozen=True)
class BlockDistribution:
    """Weights on Λ^K; blocks not listed get ``default``."""

    weights: Mapping[tuple, Fraction]
    default: Fraction
    total_blocks: int


@dataclass
class EmpiricalMeasure:
    """Frequencies Fr_{x|window}(B) of blocks B ∈ Λ^K.

    Weights divide by |window|; ``core_fraction`` = anchor_count/|window| lets
    callers renormalize by the anchor count instead.
    """

    test_domain: FiniteSet
    weights: dict
    anchor_count: int
    window_size: int
    alphabet_size: int

    @property
    def core_fraction(self) -> Fraction:
        return Fraction(self.anchor_count, self.window_size)

    def weight(self, values: tuple) -> Fraction:
        return self.weights.get(tuple(values), Fraction(0))

    def distribution(self, K: Optional[FiniteSet] = None) -> BlockDistribution:
        if K is not None and K != self.test_domain:
            raise ValueError("empirical measure evaluated off its test domain")
        return BlockDistribution(self.weights, Fraction(0), self.alphabet_size ** len(self.test_domain))

    def __call__(self, K: FiniteSet) -> BlockDistribution:
        return self.distribution(K)


def empirical_measure(x: SymbolicFunction, window: FiniteSet, K: FiniteSet, workers: int = 1) -> EmpiricalMeasure:
    """B̂ for B = x|window, restricted to blocks over K."""
    if len(window) == 0:
        raise EmptyWindowError("empty window")
    core = k_core(window, K)
    bc = block_counts(x, K, core, workers=workers)
    N = len(window)
    weights = {vals: Fraction(c, N) for vals, c in bc.items()}
    return EmpiricalMeasure(K, weights, len(core), N, x.alphabet_size)


def block_measure(B0: Block, K: FiniteSet, alphabet: Sequence) -> EmpiricalMeasure:
    """B̂0 over K for an explicit block."""
    group = B0.group
    d = B0.as_dict()
    x = SymbolicFunction(group, alphabet, lambda g: d[g], name="B0")
    core = k_core(B0.domain, K)
    counts: dict = {}
    mul = group.multiply
    for g in core:
        vals = tuple(d[mul(k, g)] for k in K)
        counts[vals] = counts.get(vals, 0) + 1
    N = len(B0.domain)
    return EmpiricalMeasure(K, {v: Fraction(c, N) for v, c in counts.items()}, len(core), N, x.alphabet_size)


class UniformBernoulli:
    """The uniform Bernoulli reference: every B ∈ Λ^K has weight |Λ|^-|K|."""

    def __init__(self, alphabet_size: int):
        self.alphabet_size = alphabet_size

    def __call__(self, K: FiniteSet) -> BlockDistribution:
        L = len(K)
        return BlockDistribution({}, Fraction(1, self.alphabet_size ** L), self.alphabet_size ** L)


class EmpiricalSource:
    """K -> empirical measure of x inside a fixed window (memoized)."""

    def __init__(self, x: SymbolicFunction, window: FiniteSet, workers: int = 1):
        self.x, self.window, self.workers = x, window, workers
        self._memo: dict = {}

    def __call__(self, K: FiniteSet) -> BlockDistribution:
        key = K.elements
        if key not in self._memo:
            self._memo[key] = empirical_measure(self.x, self.window, K, self.workers)
        return self._memo[key].distribution()


@dataclass
class DistCatalog:
    """Ordered test sets with weights 1, 1/2, 1/4, ... (the first set weighs 1)."""

    test_sets: list

    def weight(self, i: int) -> Fraction:
        return Fraction(1, 2 ** i)

    def __iter__(self):
        for i, K in enumerate(self.test_sets):
            yield self.weight(i), K

    @classmethod
    def intervals(cls, group: GroupContext, m_max: int) -> "DistCatalog":
        return cls([FiniteSet.interval(group, 0, m - 1) for m in range(1, m_max + 1)])


def _as_distribution(m, K: FiniteSet) -> BlockDistribution:
    if isinstance(m, BlockDistribution):
        return m
    if isinstance(m, Mapping):
        return _as_distribution(m[K.elements], K)
    return m(K)


def sup_difference(p: BlockDistribution, q: BlockDistribution) -> Fraction:
    """sup over B ∈ Λ^K of |p(B) - q(B)|."""
    keys = set(p.weights) | set(q.weights)
    best = Fraction(0)
    for k in keys:
        a = p.weights.get(k, p.default)
        b = q.weights.get(k, q.default)
        best = max(best, abs(a - b))
    if len(keys) < max(p.total_blocks, q.total_blocks):
        best = max(best, abs(p.default - q.default))
    return best


def dist(m1, m2, catalog: DistCatalog) -> Fraction:
    """max over catalog entries of u(K_i) · sup_B |m1(B) - m2(B)|.

    ``m1``/``m2`` are callables K -> BlockDistribution (EmpiricalSource,
    UniformBernoulli, EmpiricalMeasure) or mappings keyed by ``K.elements``.
    """
    best = Fraction(0)
    for u, K in catalog:
        best = max(best, u * sup_difference(_as_distribution(m1, K), _as_distribution(m2, K)))
    return best


# --------------------------------------------------------------------------
# raw symbol streams

STREAM_MAGIC = b"SYM1"


def write_stream(fh: BinaryIO, symbols: np.ndarray, alphabet_size: int) -> None:
    """Header ``SYM1`` + uint16 alphabet size + uint64 count (little endian), then one byte per symbol."""
    if alphabet_size > 256:
        raise ValueError("stream format holds at most 256 symbols")
    data = np.asarray(symbols, dtype=np.uint8)
    fh.write(STREAM_MAGIC + struct.pack("<HQ", alphabet_size, len(data)))
    fh.write(data.tobytes())


def read_stream(fh: BinaryIO) -> tuple[int, np.ndarray]:
    head = fh.read(14)
    if head[:4] != STREAM_MAGIC:
        raise ValueError("not a symbol stream")
    s, n = struct.unpack("<HQ", head[4:])
    data = np.frombuffer(fh.read(n), dtype=np.uint8)
    if len(data) != n:
        raise ValueError("truncated stream")
    return s, data
