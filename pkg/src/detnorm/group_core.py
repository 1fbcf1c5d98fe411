"""Countable cancellative (semi)groups, finite windows, Følner sequences and densities.

Elements are plain hashable Python values (ints, tuples) that are already in
canonical form, so the canonical key of an element is the element itself and
``encode`` only has to turn it into bytes.  Groups whose elements are ints and
whose operation is addition are flagged ``vector=True``; for those, finite sets
keep a sorted ``int64`` array and translations are done with numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np


class EmptyWindowError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupContext:
    """A cancellative semigroup with identity.

    ``left_divide(k, c)`` returns ``g`` with ``multiply(k, g) == c`` or None; it
    is derived from ``invert`` when that exists.
    """

    name: str
    identity: object
    multiply: Callable[[object, object], object]
    encode: Callable[[object], bytes]
    enumerate: Callable[[int], object]
    invert: Optional[Callable[[object], object]] = None
    left_divide: Optional[Callable[[object, object], object]] = None
    parse: Optional[Callable[[str], object]] = None
    format: Callable[[object], str] = str
    vector: bool = False
    dim: int = 1
    sort_key: Callable[[object], object] = field(default=lambda g: g)

    def divide(self, k, c):
        """Solve ``k * g = c`` for g (None if no solution)."""
        if self.left_divide is not None:
            return self.left_divide(k, c)
        if self.invert is not None:
            return self.multiply(self.invert(k), c)
        raise TypeError(f"{self.name}: no left division available")

    def power(self, g, n: int):
        out = self.identity
        for _ in range(n):
            out = self.multiply(out, g)
        return out

    def __repr__(self) -> str:
        return f"GroupContext({self.name})"


# --------------------------------------------------------------------------
# concrete instances


def _int_encode(g: int) -> bytes:
    return str(int(g)).encode()


def _zigzag_inv(i: int) -> int:
    return (i + 1) // 2 if i % 2 else -(i // 2)


def integers() -> GroupContext:
    """(Z, +); enumeration 0, 1, -1, 2, -2, ..."""
    return GroupContext(
        name="Z",
        identity=0,
        multiply=lambda a, b: a + b,
        invert=lambda a: -a,
        encode=_int_encode,
        enumerate=_zigzag_inv,
        parse=int,
        vector=True,
    )


def naturals() -> GroupContext:
    """(N0, +) as a semigroup with unit 0 and no inverses."""

    def div(k, c):
        return c - k if c >= k else None

    def enum(i):
        if i < 0:
            raise ValueError("negative index")
        return i

    return GroupContext(
        name="N",
        identity=0,
        multiply=lambda a, b: a + b,
        left_divide=div,
        encode=_int_encode,
        enumerate=enum,
        parse=int,
        vector=True,
    )


def _unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    t = w * (w + 1) // 2
    y = z - t
    return w - y, y


def _tuple_parse(s: str) -> tuple:
    s = s.strip().strip("()")
    return tuple(int(p) for p in s.split(",") if p.strip())


def _tuple_format(g: tuple) -> str:
    return ",".join(str(c) for c in g)


def lattice(d: int) -> GroupContext:
    """(Z^d, +) with tuple elements."""
    if d < 1:
        raise ValueError("dimension must be >= 1")

    def enum(i: int) -> tuple:
        coords = []
        rest = i
        for _ in range(d - 1):
            a, rest = _unpair(rest)
            coords.append(_zigzag_inv(a))
        coords.append(_zigzag_inv(rest))
        return tuple(coords)

    return GroupContext(
        name=f"Z{d}",
        identity=(0,) * d,
        multiply=lambda a, b: tuple(x + y for x, y in zip(a, b)),
        invert=lambda a: tuple(-x for x in a),
        encode=lambda g: _tuple_format(g).encode(),
        enumerate=enum,
        parse=_tuple_parse,
        format=_tuple_format,
        dim=d,
    )


# (N, x) as finitely supported exponent vectors


def _trim(v: Sequence[int]) -> tuple:
    v = list(v)
    while v and v[-1] == 0:
        v.pop()
    return tuple(v)


_PRIMES: list[int] = [2, 3, 5, 7, 11, 13]


def nth_prime(j: int) -> int:
    """j-th prime, 0-based (nth_prime(0) == 2)."""
    while len(_PRIMES) <= j:
        c = _PRIMES[-1] + 2
        while any(c % p == 0 for p in _PRIMES if p * p <= c):
            c += 2
        _PRIMES.append(c)
    return _PRIMES[j]


def factor_exponents(n: int) -> tuple:
    """Exponent vector (e_2, e_3, e_5, ...) of a positive integer."""
    if n < 1:
        raise ValueError("(N, x) elements are positive integers")
    exps = []
    j = 0
    while n > 1:
        p = nth_prime(j)
        if p * p > n:
            # n is prime now
            while nth_prime(j) != n:
                exps.append(0)
                j += 1
            exps.append(1)
            break
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        exps.append(e)
        j += 1
    return _trim(exps)


def exponents_to_int(v: Sequence[int]) -> int:
    out = 1
    for j, e in enumerate(v):
        out *= nth_prime(j) ** e
    return out


def multiplicative() -> GroupContext:
    """(N, x) via prime-exponent vectors; enumeration by integer value."""

    def mul(a, b):
        n = max(len(a), len(b))
        return _trim(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
        )

    def div(k, c):
        n = max(len(k), len(c))
        out = [(c[i] if i < len(c) else 0) - (k[i] if i < len(k) else 0) for i in range(n)]
        if any(e < 0 for e in out):
            return None
        return _trim(out)

    return GroupContext(
        name="Nmul",
        identity=(),
        multiply=mul,
        left_divide=div,
        encode=lambda g: str(exponents_to_int(g)).encode(),
        enumerate=lambda i: factor_exponents(i + 1),
        parse=lambda s: factor_exponents(int(s)),
        format=lambda g: str(exponents_to_int(g)),
        sort_key=exponents_to_int,
    )


# finite permutations of {1, 2, ...}; g is stored as (g(1), ..., g(n_g))


def perm_trim(arr: Sequence[int]) -> tuple:
    v = list(arr)
    while v and v[-1] == len(v):
        v.pop()
    return tuple(v)


def perm_apply(g: tuple, i: int) -> int:
    return g[i - 1] if i <= len(g) else i


def perm_compose(g: tuple, h: tuple) -> tuple:
    """The product gh, defined as h after g: (gh)(i) = h(g(i))."""
    n = max(len(g), len(h))
    return perm_trim(perm_apply(h, perm_apply(g, i)) for i in range(1, n + 1))


def perm_inverse(g: tuple) -> tuple:
    out = [0] * len(g)
    for i, v in enumerate(g, start=1):
        out[v - 1] = i
    return tuple(out)


def perm_from_index(i: int) -> tuple:
    """Bijection N0 -> finite permutations with indices [0, k!) covering S_k."""
    if i < 0:
        raise ValueError("negative index")
    arr = [1]
    j = 1
    while i:
        j += 1
        i, c = divmod(i, j)
        arr.append(j)
        arr[j - 1], arr[j - 1 - c] = arr[j - 1 - c], arr[j - 1]
    return perm_trim(arr)


def permutations() -> GroupContext:
    return GroupContext(
        name="Perm",
        identity=(),
        multiply=perm_compose,
        invert=perm_inverse,
        encode=lambda g: _tuple_format(g).encode(),
        enumerate=perm_from_index,
        parse=lambda s: perm_trim(_tuple_parse(s)),
        format=lambda g: "(" + " ".join(map(str, g)) + ")",
        sort_key=lambda g: (len(g), g),
    )


def symmetric_group(k: int) -> list[tuple]:
    """All elements of S_k, in index order."""
    return [perm_from_index(i) for i in range(math.factorial(k))]


GROUPS: dict[str, Callable[[], GroupContext]] = {
    "Z": integers,
    "N": naturals,
    "Z2": lambda: lattice(2),
    "Z3": lambda: lattice(3),
    "Nmul": multiplicative,
    "Perm": permutations,
}


def get_group(name: str) -> GroupContext:
    if name in GROUPS:
        return GROUPS[name]()
    if name.startswith("Z") and name[1:].isdigit():
        return lattice(int(name[1:]))
    raise KeyError(f"unknown group {name!r}")


# --------------------------------------------------------------------------
# finite sets


class FiniteSet:
    """Finite subset of a group, deduplicated and held in canonical order."""

    __slots__ = ("group", "_elements", "_array", "_keys")

    def __init__(self, group: GroupContext, elements: Iterable = (), *, _sorted_unique=False):
        self.group = group
        self._keys = None
        if group.vector:
            arr = np.asarray(list(elements) if not isinstance(elements, np.ndarray) else elements,
                             dtype=np.int64).ravel()
            self._array = arr if _sorted_unique else np.unique(arr)
            self._elements = None
        else:
            uniq = dict.fromkeys(elements)
            self._elements = tuple(sorted(uniq, key=group.sort_key))
            self._array = None

    @classmethod
    def interval(cls, group: GroupContext, lo: int, hi: int) -> "FiniteSet":
        """[lo, hi] in a vector group (empty if hi < lo)."""
        if not group.vector:
            raise TypeError("interval needs a 1-d integer group")
        return cls(group, np.arange(lo, hi + 1, dtype=np.int64), _sorted_unique=True)

    @classmethod
    def box(cls, group: GroupContext, lows: Sequence[int], highs: Sequence[int]) -> "FiniteSet":
        if group.vector:
            return cls.interval(group, lows[0], highs[0])
        axes = [range(lo, hi + 1) for lo, hi in zip(lows, highs)]
        return cls(group, product(*axes))

    @property
    def array(self) -> np.ndarray:
        if self._array is None:
            raise TypeError(f"{self.group.name} sets have no array form")
        return self._array

    @property
    def elements(self) -> tuple:
        if self._elements is None:
            self._elements = tuple(int(v) for v in self._array)
        return self._elements

    @property
    def size(self) -> int:
        return len(self)

    def __len__(self) -> int:
        return len(self._array) if self._array is not None else len(self._elements)

    def __iter__(self) -> Iterator:
        return iter(self.elements)

    def __contains__(self, g) -> bool:
        if self._array is not None:
            i = np.searchsorted(self._array, g)
            return bool(i < len(self._array) and self._array[i] == g)
        if self._keys is None:
            self._keys = frozenset(self._elements)
        return g in self._keys

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteSet):
            return NotImplemented
        if self._array is not None and other._array is not None:
            return np.array_equal(self._array, other._array)
        return self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self) -> str:
        if len(self) > 8:
            return f"FiniteSet({self.group.name}, size={len(self)})"
        return f"FiniteSet({self.group.name}, {[self.group.format(g) for g in self]})"

    # set algebra -------------------------------------------------------

    def _new(self, elements) -> "FiniteSet":
        return FiniteSet(self.group, elements)

    def union(self, other: "FiniteSet") -> "FiniteSet":
        if self._array is not None:
            return FiniteSet(self.group, np.union1d(self._array, other.array), _sorted_unique=True)
        return self._new(self.elements + other.elements)

    def intersection(self, other: "FiniteSet") -> "FiniteSet":
        if self._array is not None:
            return FiniteSet(self.group, np.intersect1d(self._array, other.array), _sorted_unique=True)
        return self._new(g for g in self.elements if g in other)

    def difference(self, other: "FiniteSet") -> "FiniteSet":
        if self._array is not None:
            return FiniteSet(self.group, np.setdiff1d(self._array, other.array), _sorted_unique=True)
        return self._new(g for g in self.elements if g not in other)

    def symmetric_difference(self, other: "FiniteSet") -> "FiniteSet":
        return self.difference(other).union(other.difference(self))

    def issubset(self, other: "FiniteSet") -> bool:
        if self._array is not None:
            return bool(np.isin(self._array, other.array).all())
        return all(g in other for g in self.elements)

    def isdisjoint(self, other: "FiniteSet") -> bool:
        return len(self.intersection(other)) == 0

    def translate(self, g) -> "FiniteSet":
        """Right translate Fg = {f g : f in F}."""
        if self._array is not None:
            return FiniteSet(self.group, self._array + g, _sorted_unique=True)
        return self._new(self.group.multiply(f, g) for f in self.elements)

    def left_translate(self, k) -> "FiniteSet":
        """kF = {k f : f in F}."""
        if self._array is not None:
            return FiniteSet(self.group, self._array + k, _sorted_unique=True)
        return self._new(self.group.multiply(k, f) for f in self.elements)

    def filter(self, pred: "SubsetPredicate") -> "FiniteSet":
        if self._array is not None:
            return FiniteSet(self.group, self._array[pred.mask(self._array)], _sorted_unique=True)
        return self._new(g for g in self.elements if pred.contains(g))


def product_set(K: FiniteSet, F: FiniteSet) -> FiniteSet:
    """KF = {k f : k in K, f in F}."""
    if F.group.vector:
        if len(K) == 0 or len(F) == 0:
            return FiniteSet(F.group, [])
        return FiniteSet(F.group, np.concatenate([F.array + k for k in K.array]))
    mul = F.group.multiply
    return FiniteSet(F.group, (mul(k, f) for k in K for f in F))


# --------------------------------------------------------------------------
# predicates and Følner sequences


class SubsetPredicate:
    """A subset A of G given by membership.

    ``mask`` evaluates membership on an int64 array (vector groups) and
    ``count_interval(lo, hi)`` counts |A ∩ [lo, hi]| exactly for arbitrary
    Python ints; both are optional accelerations.
    """

    def __init__(self, contains: Callable[[object], bool], descriptor: str = "A", *,
                 mask: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 count_interval: Optional[Callable[[int, int], int]] = None):
        self._contains = contains
        self.descriptor = descriptor
        self._mask = mask
        self.count_interval = count_interval

    def contains(self, g) -> bool:
        return bool(self._contains(g))

    __call__ = contains

    def mask(self, arr: np.ndarray) -> np.ndarray:
        if self._mask is not None:
            return np.asarray(self._mask(arr), dtype=bool)
        return np.fromiter((self._contains(int(v)) for v in arr), dtype=bool, count=len(arr))

    def __repr__(self) -> str:
        return f"SubsetPredicate({self.descriptor})"


def everything(descriptor: str = "G") -> SubsetPredicate:
    return SubsetPredicate(lambda g: True, descriptor,
                           mask=lambda a: np.ones(len(a), dtype=bool),
                           count_interval=lambda lo, hi: max(0, hi - lo + 1))


def residue_class(r: int, m: int) -> SubsetPredicate:
    """{n : n = r mod m} in Z or N0."""
    r %= m

    def count(lo, hi):
        if hi < lo:
            return 0
        return (hi - r) // m - (lo - 1 - r) // m

    return SubsetPredicate(lambda n: n % m == r, f"{r} mod {m}",
                           mask=lambda a: a % m == r, count_interval=count)


def interval_union(intervals: Callable[[int], Iterable[tuple[int, int]]] | Sequence[tuple[int, int]],
                   descriptor: str = "intervals") -> SubsetPredicate:
    """Union of disjoint integer intervals.

    ``intervals`` may be a finite list or a callable ``hi -> iterable`` giving
    every interval that meets ``(-inf, hi]`` in increasing order.
    """
    if callable(intervals):
        gen = intervals
    else:
        ivs = sorted(intervals)
        gen = lambda hi: (iv for iv in ivs if iv[0] <= hi)  # noqa: E731

    def count(lo, hi):
        total = 0
        for a, b in gen(hi):
            a2, b2 = max(a, lo), min(b, hi)
            if b2 >= a2:
                total += b2 - a2 + 1
        return total

    def contains(n):
        return count(n, n) == 1

    def mask(arr):
        out = np.zeros(len(arr), dtype=bool)
        if len(arr) == 0:
            return out
        for a, b in gen(int(arr.max())):
            out |= (arr >= a) & (arr <= b)
        return out

    return SubsetPredicate(contains, descriptor, mask=mask, count_interval=count)


def factorial_intervals() -> SubsetPredicate:
    """The union over k >= 1 of [(2k)! + 1, (2k+1)!]."""

    def gen(hi):
        k = 1
        while math.factorial(2 * k) + 1 <= hi:
            yield math.factorial(2 * k) + 1, math.factorial(2 * k + 1)
            k += 1

    return interval_union(gen, "factorial-intervals")


@dataclass
class FolnerSequence:
    """n -> F_n, indexed from 1.

    ``interval(n)`` gives (lo, hi) for sequences of integer intervals, which
    lets densities be computed by exact counting rather than enumeration.
    """

    group: GroupContext
    at_fn: Callable[[int], FiniteSet]
    descriptor: str
    nested: Optional[bool] = None
    centered: Optional[bool] = None
    disjoint: Optional[bool] = None
    interval: Optional[Callable[[int], tuple[int, int]]] = None
    size_fn: Optional[Callable[[int], int]] = None

    def at(self, n: int) -> FiniteSet:
        if n < 1:
            raise ValueError("Følner index starts at 1")
        return self.at_fn(n)

    def size(self, n: int) -> int:
        if self.size_fn is not None:
            return self.size_fn(n)
        if self.interval is not None:
            lo, hi = self.interval(n)
            return hi - lo + 1
        return len(self.at(n))

    def __repr__(self) -> str:
        return f"FolnerSequence({self.descriptor})"


def _interval_folner(group, interval, descriptor, **flags) -> FolnerSequence:
    return FolnerSequence(
        group,
        lambda n: FiniteSet.interval(group, *interval(n)),
        descriptor,
        interval=interval,
        **flags,
    )


def standard_intervals(group: Optional[GroupContext] = None) -> FolnerSequence:
    """F_n = {1, ..., n} in N0 (or Z)."""
    group = group or naturals()
    return _interval_folner(group, lambda n: (1, n), "[1,n]",
                            nested=True, centered=False, disjoint=False)


def initial_intervals(group: Optional[GroupContext] = None) -> FolnerSequence:
    """F_n = {0, ..., n-1}."""
    group = group or naturals()
    return _interval_folner(group, lambda n: (0, n - 1), "[0,n-1]",
                            nested=True, centered=True, disjoint=False)


def centered_intervals(group: Optional[GroupContext] = None) -> FolnerSequence:
    """F_n = [-n, n] in Z."""
    group = group or integers()
    return _interval_folner(group, lambda n: (-n, n), "[-n,n]",
                            nested=True, centered=True, disjoint=False)


def factorial_folner(group: Optional[GroupContext] = None) -> FolnerSequence:
    """F_n = [1, n!]."""
    group = group or naturals()
    return _interval_folner(group, lambda n: (1, math.factorial(n)), "[1,n!]",
                            nested=True, centered=False, disjoint=False)


def centered_cubes(group: GroupContext) -> FolnerSequence:
    """F_n = [-n, n]^d."""
    d = group.dim
    if group.vector:
        return centered_intervals(group)
    return FolnerSequence(
        group,
        lambda n: FiniteSet.box(group, [-n] * d, [n] * d),
        f"[-n,n]^{d}",
        nested=True, centered=True, disjoint=False,
        size_fn=lambda n: (2 * n + 1) ** d,
    )


def symmetric_groups(group: Optional[GroupContext] = None) -> FolnerSequence:
    """F_n = S_n inside the finite permutations."""
    group = group or permutations()
    return FolnerSequence(
        group,
        lambda n: FiniteSet(group, symmetric_group(n)),
        "S_n",
        nested=True, centered=True, disjoint=False,
        size_fn=math.factorial,
    )


def exponent_boxes(group: Optional[GroupContext] = None) -> FolnerSequence:
    """F_n = {p_1^e_1 ... p_n^e_n : 0 <= e_j <= n} in (N, x); divisor closed."""
    group = group or multiplicative()
    return FolnerSequence(
        group,
        lambda n: FiniteSet(group, (_trim(v) for v in product(range(n + 1), repeat=n))),
        "exponent boxes [0,n]^n",
        nested=True, centered=True, disjoint=False,
        size_fn=lambda n: (n + 1) ** n,
    )


# --------------------------------------------------------------------------
# operations


def invariance_defect(F: FiniteSet, K: FiniteSet) -> Fraction:
    """|KF △ F| / |F| as an exact rational."""
    if len(F) == 0:
        raise EmptyWindowError("empty window")
    KF = product_set(K, F)
    return Fraction(len(KF.symmetric_difference(F)), len(F))


def k_core(F: FiniteSet, K: FiniteSet) -> FiniteSet:
    """F_K = {g in F : Kg ⊆ F}."""
    if F.group.vector:
        arr = F.array
        keep = np.ones(len(arr), dtype=bool)
        for k in K.array:
            keep &= np.isin(arr + k, arr, assume_unique=True)
        return FiniteSet(F.group, arr[keep], _sorted_unique=True)
    mul = F.group.multiply
    return FiniteSet(F.group, (g for g in F if all(mul(k, g) in F for k in K)))


def intersection_count(A: SubsetPredicate, folner: FolnerSequence, n: int) -> int:
    """|F_n ∩ A|."""
    if folner.interval is not None and A.count_interval is not None:
        lo, hi = folner.interval(n)
        return A.count_interval(lo, hi)
    return len(folner.at(n).filter(A))


def density_ratios(A: SubsetPredicate, folner: FolnerSequence, ns: Sequence[int]) -> list[Fraction]:
    """Exact |F_n ∩ A| / |F_n| for each n in ``ns``."""
    ns = list(ns)
    if folner.interval is not None and A.count_interval is None:
        bounds = [folner.interval(n) for n in ns]
        lo = min(b[0] for b in bounds)
        hi = max(b[1] for b in bounds)
        if hi - lo <= 50_000_000:
            m = A.mask(np.arange(lo, hi + 1, dtype=np.int64))
            cs = np.concatenate([[0], np.cumsum(m, dtype=np.int64)])
            return [Fraction(int(cs[b - lo + 1] - cs[a - lo]), b - a + 1) for a, b in bounds]
    return [Fraction(intersection_count(A, folner, n), folner.size(n)) for n in ns]


def density(A: SubsetPredicate, folner: FolnerSequence, n_max: int, mode: str = "lower") -> float:
    """Finite-horizon lower/upper density: min/max of |F_n ∩ A|/|F_n| over n in [ceil(n_max/2), n_max]."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if mode not in ("lower", "upper"):
        raise ValueError(f"mode must be 'lower' or 'upper', got {mode!r}")
    ratios = density_ratios(A, folner, range(math.ceil(n_max / 2), n_max + 1))
    r = min(ratios) if mode == "lower" else max(ratios)
    return float(r)


def density_bounds(A: SubsetPredicate, folner: FolnerSequence, n_max: int) -> tuple[float, float]:
    ratios = density_ratios(A, folner, range(math.ceil(n_max / 2), n_max + 1))
    return float(min(ratios)), float(max(ratios))


def check_nested(folner: FolnerSequence, n_max: int) -> bool:
    """F_n ⊆ F_{n+1} for all n < n_max."""
    if folner.interval is not None:
        bs = [folner.interval(n) for n in range(1, n_max + 1)]
        return all(a2 <= a1 and b1 <= b2 for (a1, b1), (a2, b2) in zip(bs, bs[1:]))
    prev = folner.at(1)
    for n in range(2, n_max + 1):
        cur = folner.at(n)
        if not prev.issubset(cur):
            return False
        prev = cur
    return True


def slow_growth_hypothesis(folner: FolnerSequence, n_max: int, tol: float = 0.05) -> dict:
    """Nested and |F_{n+1}|/|F_n| -> 1, checked on the horizon.

    Under this hypothesis preserving simple normality forces positive lower
    density.  The growth condition is judged on the tail ratio.
    """
    nested = check_nested(folner, n_max)
    tail = folner.size(n_max) / folner.size(n_max - 1) if n_max > 1 else float("inf")
    return {"nested": nested, "tail_growth_ratio": tail,
            "satisfied": bool(nested and abs(tail - 1.0) <= tol)}
