"""Example symbolic functions and subsets: PRNG surrogates for normal points,
automatic sequences over digit systems and over (N, x), B-free and k-free sets,
generalized polynomials, and sets of permutations."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .group_core import (
    FiniteSet,
    GroupContext,
    SubsetPredicate,
    exponents_to_int,
    factor_exponents,
    integers,
    lattice,
    naturals,
    perm_apply,
    perm_compose,
    perm_trim,
)
from .symbolic import SymbolicFunction

# --------------------------------------------------------------------------
# counter-mode PRNG

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix_arr(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


class CounterPRNG:
    """Random-access generator: word(ctr) depends only on (seed, ctr)."""

    def __init__(self, seed: int):
        self.seed = seed
        self.key = _mix(seed & _MASK)
        self.key2 = _mix(self.key ^ _GAMMA)

    def word(self, ctr: int) -> int:
        return _mix(_mix((self.key + (ctr + 1) * _GAMMA) & _MASK) ^ self.key2)

    def words(self, ctr: np.ndarray) -> np.ndarray:
        c = ctr.astype(np.uint64, copy=False)
        with np.errstate(over="ignore"):
            z = np.uint64(self.key) + (c + np.uint64(1)) * np.uint64(_GAMMA)
            return _mix_arr(_mix_arr(z) ^ np.uint64(self.key2))

    def counter_of(self, encoded: bytes) -> int:
        digest = hashlib.blake2b(encoded, digest_size=8, key=self.seed.to_bytes(16, "little", signed=True))
        return int.from_bytes(digest.digest(), "little")


def _zigzag(g: int) -> int:
    return ((g << 1) ^ (g >> 63)) & _MASK


def _zigzag_arr(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64, copy=False)
    return (a.astype(np.uint64) << np.uint64(1)) ^ (a >> np.int64(63)).astype(np.uint64)


def prng_uniform(seed: int, group: GroupContext, alphabet: Sequence = (0, 1)) -> SymbolicFunction:
    """Pseudo-random x(g) keyed by (seed, encode(g)); evaluation order does not matter.

    Integer elements use their zigzag code as the counter; other elements are
    hashed with a seed-keyed BLAKE2b first.
    """
    alphabet = tuple(alphabet)
    if not alphabet:
        raise ValueError("alphabet must be nonempty")
    s = len(alphabet)
    gen = CounterPRNG(seed)

    def sym_index(w: int) -> int:
        return ((w >> 32) * s) >> 32

    if group.vector:
        def fn(g):
            return alphabet[sym_index(gen.word(_zigzag(int(g))))]

        def vec(arr):
            w = gen.words(_zigzag_arr(arr))
            with np.errstate(over="ignore"):
                return ((w >> np.uint64(32)) * np.uint64(s)) >> np.uint64(32)
    else:
        def fn(g):
            return alphabet[sym_index(gen.word(gen.counter_of(group.encode(g))))]
        vec = None
    return SymbolicFunction(group, alphabet, fn, vector_fn=vec, name=f"prng[{seed}]")


# --------------------------------------------------------------------------
# Thue–Morse


def _popcount_arr(a: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(a)
    a = a.astype(np.uint64)
    out = np.zeros(a.shape, dtype=np.uint64)
    while a.any():
        out += a & np.uint64(1)
        a = a >> np.uint64(1)
    return out


def thue_morse(group: Optional[GroupContext] = None) -> SymbolicFunction:
    """x(n) = parity of the binary digit sum of n; on Z, x(-n) = x(n-1)."""
    group = group or naturals()

    def fn(n):
        n = int(n)
        if n < 0:
            n = -n - 1
        return bin(n).count("1") & 1

    def vec(a):
        a = np.where(a < 0, -a - 1, a)
        return (_popcount_arr(a) & 1).astype(np.uint8)

    return SymbolicFunction(group, (0, 1), fn, vector_fn=vec, name="thue-morse")


# --------------------------------------------------------------------------
# automata and digit systems


class DigitSystemError(ValueError):
    pass


@dataclass
class Automaton:
    """States S, initial s0, maps α_v: S -> S (``transitions[(v, s)]``) and output ω."""

    states: tuple
    initial: object
    transitions: dict
    output: dict
    digits: tuple = ()

    def __post_init__(self):
        self.states = tuple(self.states)
        if self.initial not in self.states:
            raise ValueError("initial state not among states")
        if not self.digits:
            self.digits = tuple(dict.fromkeys(v for v, _ in self.transitions))
        for v in self.digits:
            for s in self.states:
                if (v, s) not in self.transitions:
                    raise ValueError(f"transition for digit {v!r} from state {s!r} missing")
        for s in self.states:
            if s not in self.output:
                raise ValueError(f"no output for state {s!r}")

    @property
    def alphabet(self) -> tuple:
        return tuple(sorted(set(self.output.values())))

    def run(self, word: Sequence) -> object:
        """ω(α_{w[0]} ∘ α_{w[1]} ∘ ... ∘ α_{w[-1]}(s0)); the last letter acts first."""
        s = self.initial
        for v in reversed(word):
            s = self.transitions[(v, s)]
        return self.output[s]


def parity_automaton(digits: Iterable, counted: Callable[[object], bool]) -> Automaton:
    """Two states tracking the parity of the number of digits with ``counted(v)``."""
    digits = tuple(digits)
    trans = {}
    for v in digits:
        for s in (0, 1):
            trans[(v, s)] = 1 - s if counted(v) else s
    return Automaton((0, 1), 0, trans, {0: 0, 1: 1}, digits)


@dataclass
class DigitSystem:
    """Endomorphism H with digit set V: g = v · H(g') uniquely.

    ``split(g)`` returns that (v, g').
    """

    group: GroupContext
    endo: Callable[[object], object]
    digits: FiniteSet
    split: Callable[[object], tuple]
    good_constant: Optional[int] = None
    scale: Optional[int] = None
    descriptor: str = ""


def scale_digit_system(group: GroupContext, scale: int, digits: Iterable, good_constant: Optional[int] = None) -> DigitSystem:
    """H(g) = scale·g on Z^d or N0 with V a complete residue system mod scale."""
    digits = list(digits)
    if scale < 2:
        raise DigitSystemError("scale must be >= 2")
    if group.identity not in digits:
        raise DigitSystemError("digit set must contain the identity")

    def residue(g):
        return g % scale if group.vector else tuple(c % scale for c in g)

    table = {}
    for v in digits:
        r = residue(v)
        if r in table:
            raise DigitSystemError("digits are not distinct residues")
        table[r] = v
    if len(table) != scale ** group.dim:
        raise DigitSystemError("digits do not form a complete residue system")

    if group.vector:
        def endo(g):
            return scale * g

        def split(g):
            v = table[g % scale]
            q = g - v
            if q < 0 and group.name == "N":
                raise DigitSystemError("negative quotient in N0")
            return v, q // scale
    else:
        def endo(g):
            return tuple(scale * c for c in g)

        def split(g):
            v = table[residue(g)]
            return v, tuple((c - w) // scale for c, w in zip(g, v))

    return DigitSystem(group, endo, FiniteSet(group, digits), split, good_constant, scale,
                       f"{group.name} scale {scale}")


def balanced_ternary() -> DigitSystem:
    """Z with H(j) = 3j and V = {-1, 0, 1}."""
    return scale_digit_system(integers(), 3, (-1, 0, 1), good_constant=1)


def balanced_ternary_plane() -> DigitSystem:
    """Z^2 with H = 3·id and V = {-1, 0, 1}^2."""
    g = lattice(2)
    return scale_digit_system(g, 3, [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)], good_constant=1)


def base_b_naturals(b: int) -> DigitSystem:
    """N0 with H(j) = b·j and V = {0, ..., b-1}."""
    return scale_digit_system(naturals(), b, range(b))


MAX_DIGIT_LEVELS = 64


def digit_representation(g, ds: DigitSystem, cap: int = MAX_DIGIT_LEVELS) -> tuple[list, int]:
    """Digits (v_0, v_1, ..., v_n) with g = v_0 H(v_1) H^2(v_2) ... and the order n."""
    e = ds.group.identity
    digits = []
    while g != e:
        if len(digits) >= cap:
            raise DigitSystemError("digit system not complete for input")
        v, g = ds.split(g)
        digits.append(v)
    return digits, max(len(digits) - 1, 0)


def order(g, ds: DigitSystem) -> int:
    return digit_representation(g, ds)[1]


def reassemble(digits: Sequence, ds: DigitSystem):
    """v_0 · H(v_1) · H^2(v_2) ..."""
    mul = ds.group.multiply
    out = ds.group.identity
    for i, v in enumerate(digits):
        w = v
        for _ in range(i):
            w = ds.endo(w)
        out = mul(out, w)
    return out


def elements_of_order_at_most(ds: DigitSystem, n: int) -> list:
    """All g with Ord(g) <= n (digit words of length n+1)."""
    from itertools import product as _product
    words = _product(ds.digits.elements, repeat=n + 1)
    return [reassemble(w, ds) for w in words]


def measure_good_constant(ds: DigitSystem, n: int) -> int:
    """max over Ord(g), Ord(g') <= n of Ord(g g') - n (exhaustive over pairs)."""
    elems = elements_of_order_at_most(ds, n)
    mul = ds.group.multiply
    worst = 0
    for a in elems:
        for b in elems:
            worst = max(worst, order(mul(a, b), ds) - n)
    return worst


def vh_automatic(aut: Automaton, ds: DigitSystem) -> SymbolicFunction:
    """x(g) = ω(α_{v_0} ∘ ... ∘ α_{v_n}(s0)) along the digit representation of g."""
    for v in ds.digits:
        if v not in aut.digits:
            raise ValueError(f"automaton has no transitions for digit {ds.group.format(v)}")

    def fn(g):
        digits, _ = digit_representation(g, ds)
        return aut.run(digits)

    vec = None
    if ds.group.vector and ds.scale is not None:
        vec = _vector_scale_automaton(aut, ds)
    return SymbolicFunction(ds.group, aut.alphabet, fn, vector_fn=vec, name="vh-automatic")


def _vector_scale_automaton(aut: Automaton, ds: DigitSystem):
    b = ds.scale
    dig = list(ds.digits.elements)
    table = np.zeros(b, dtype=np.int64)
    for i, v in enumerate(dig):
        table[v % b] = i
    dvals = np.asarray(dig, dtype=np.int64)
    st_index = {s: i for i, s in enumerate(aut.states)}
    trans = np.zeros((len(dig), len(aut.states)), dtype=np.int64)
    for i, v in enumerate(dig):
        for s in aut.states:
            trans[i, st_index[s]] = st_index[aut.transitions[(v, s)]]
    alpha = aut.alphabet
    out = np.asarray([alpha.index(aut.output[s]) for s in aut.states], dtype=np.int64)
    s0 = st_index[aut.initial]

    def vec(arr):
        g = arr.astype(np.int64, copy=True)
        cols = []
        alive = []
        for _ in range(MAX_DIGIT_LEVELS):
            nz = g != 0
            if not nz.any():
                break
            di = table[g % b]
            cols.append(di)
            alive.append(nz)
            g = np.where(nz, (g - dvals[di]) // b, 0)
        else:
            if (g != 0).any():
                raise DigitSystemError("digit system not complete for input")
        state = np.full(len(arr), s0, dtype=np.int64)
        for di, nz in zip(reversed(cols), reversed(alive)):
            state = np.where(nz, trans[di, state], state)
        return out[state]

    return vec


# --------------------------------------------------------------------------
# (N, x): the φ map and multiplicative automatic sequences

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _exponents(N) -> tuple:
    if isinstance(N, tuple):
        return N
    if N < 1:
        raise ValueError("phi is defined for N >= 1")
    return factor_exponents(N)


def _base_digits(e: int, b: int) -> list[int]:
    out = []
    while e:
        e, r = divmod(e, b)
        out.append(r)
    return out[::-1]


def phi_digits(N, b: int) -> list[int]:
    """φ(N) as digits, most significant first: ē_J ... ē_2 ē_1 (exponent 0 gives nothing)."""
    if b < 2:
        raise ValueError("base must be >= 2")
    word: list[int] = []
    for e in reversed(_exponents(N)):
        word.extend(_base_digits(e, b))
    return word


def phi(N, b: int) -> str:
    """φ(N) written with the characters 0-9a-z (base <= 36)."""
    if b > len(_DIGITS):
        raise ValueError("string form needs base <= 36; use phi_digits")
    return "".join(_DIGITS[d] for d in phi_digits(N, b))


def mult_automatic(aut: Automaton, b: int) -> SymbolicFunction:
    """x(N) = ω(α_{v_0} ∘ ... ∘ α_{v_n}(s0)) for φ(N) = v_n ... v_0, on (N, x)."""
    from .group_core import multiplicative

    if set(aut.digits) != set(range(b)):
        raise ValueError("automaton digits must be {0, ..., b-1}")
    group = multiplicative()

    def fn(N):
        # run() applies the last letter first; φ is written v_n ... v_0
        return aut.run(phi_digits(N, b)[::-1])

    return SymbolicFunction(group, aut.alphabet, fn, name=f"mult-automatic[b={b}]")


def mult_thue_morse() -> SymbolicFunction:
    """x(N) = 1 iff φ(N) in base 2 has an odd number of 1s."""
    x = mult_automatic(parity_automaton((0, 1), lambda v: v == 1), 2)
    x.name = "mult-thue-morse"
    return x


# --------------------------------------------------------------------------
# B-free integers and k-free lattice points


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def _divisor_mask(arr: np.ndarray, moduli: Sequence[int]) -> np.ndarray:
    """True where no modulus divides the entry."""
    out = np.ones(len(arr), dtype=bool)
    if len(arr) == 0:
        return out
    lo = int(arr[0])
    contiguous = int(arr[-1]) - lo + 1 == len(arr) and (len(arr) < 2 or bool((np.diff(arr) == 1).all()))
    for b in moduli:
        if contiguous:
            out[(-lo) % b::b] = False
        else:
            out &= arr % b != 0
    return out


def bfree_indicator(B: Sequence[int], descriptor: Optional[str] = None) -> SubsetPredicate:
    """{n : no b in B divides n} on N."""
    B = sorted(set(int(b) for b in B))
    if not B or B[0] < 2:
        raise ValueError("B must be nonempty with entries >= 2")

    def contains(n):
        return all(n % b for b in B)

    return SubsetPredicate(contains, descriptor or f"B-free{B[:4]}", mask=lambda a: _divisor_mask(a, B))


def squarefree_indicator(horizon: int) -> SubsetPredicate:
    """B-free with B = {p^2 : p prime, p^2 <= horizon}; exact on [1, horizon]."""
    B = [p * p for p in primes_upto(math.isqrt(max(horizon, 4)))]
    return bfree_indicator(B, "squarefree")


def is_kfree(n: int, k: int) -> bool:
    """No c >= 2 with c^k | n (n >= 1)."""
    n = abs(n)
    if n == 0:
        return False
    p = 2
    while p ** k <= n:
        if n % (p ** k) == 0:
            return False
        p += 1 if p == 2 else 2
    return True


def lattice_kfree_indicator(m: int, k: int) -> SubsetPredicate:
    """k-free points of Z^m: gcd of the coordinates is k-free; 0 is excluded."""
    if m < 1 or k < 2:
        raise ValueError("need m >= 1 and k >= 2")

    def contains(ell):
        coords = (ell,) if isinstance(ell, (int, np.integer)) else tuple(ell)
        g = 0
        for c in coords:
            g = math.gcd(g, int(c))
        return g != 0 and is_kfree(g, k)

    mask = None
    if m == 1:
        def mask(a):
            if len(a) == 0:
                return np.zeros(0, dtype=bool)
            top = int(np.abs(a).max())
            mods = [p ** k for p in primes_upto(int(round(top ** (1.0 / k))) + 1) if p ** k <= max(top, 1)]
            return (a != 0) & _divisor_mask(np.abs(a), mods) if _is_run(a) else (a != 0) & _nonrun_mask(a, mods)
    return SubsetPredicate(contains, f"{k}-free points of Z^{m}", mask=mask)


def _is_run(a: np.ndarray) -> bool:
    return bool(len(a) < 2 or ((np.diff(a) == 1).all() and a[0] >= 0))


def _nonrun_mask(a: np.ndarray, mods: Sequence[int]) -> np.ndarray:
    out = np.ones(len(a), dtype=bool)
    for q in mods:
        out &= a % q != 0
    return out


# --------------------------------------------------------------------------
# generalized polynomials


class GeneralizedPolynomial:
    """Expression over coordinates, rational constants, +, ×, floor; exact evaluation."""

    def evaluate(self, n: Sequence[int]) -> Fraction:
        raise NotImplementedError

    def arity(self) -> int:
        raise NotImplementedError

    def __call__(self, n) -> Fraction:
        if isinstance(n, (int, np.integer)):
            n = (int(n),)
        return self.evaluate(n)

    def __add__(self, other):
        return Add(self, lift(other))

    __radd__ = __add__

    def __mul__(self, other):
        return Mul(self, lift(other))

    def __rmul__(self, other):
        return Mul(lift(other), self)

    def __neg__(self):
        return Mul(Const(-1), self)

    def __sub__(self, other):
        return Add(self, -lift(other))

    def __rsub__(self, other):
        return Add(lift(other), -self)

    def floor(self) -> "GeneralizedPolynomial":
        return Floor(self)

    def frac(self) -> "GeneralizedPolynomial":
        return self - Floor(self)


@dataclass(frozen=True)
class Coord(GeneralizedPolynomial):
    index: int

    def evaluate(self, n):
        return Fraction(n[self.index])

    def arity(self):
        return self.index + 1

    def __repr__(self):
        return f"n{self.index}"


@dataclass(frozen=True)
class Const(GeneralizedPolynomial):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def evaluate(self, n):
        return self.value

    def arity(self):
        return 0

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True)
class Add(GeneralizedPolynomial):
    a: GeneralizedPolynomial
    b: GeneralizedPolynomial

    def evaluate(self, n):
        return self.a.evaluate(n) + self.b.evaluate(n)

    def arity(self):
        return max(self.a.arity(), self.b.arity())

    def __repr__(self):
        return f"({self.a!r} + {self.b!r})"


@dataclass(frozen=True)
class Mul(GeneralizedPolynomial):
    a: GeneralizedPolynomial
    b: GeneralizedPolynomial

    def evaluate(self, n):
        return self.a.evaluate(n) * self.b.evaluate(n)

    def arity(self):
        return max(self.a.arity(), self.b.arity())

    def __repr__(self):
        return f"{self.a!r}*{self.b!r}"


@dataclass(frozen=True)
class Floor(GeneralizedPolynomial):
    a: GeneralizedPolynomial

    def evaluate(self, n):
        return Fraction(math.floor(self.a.evaluate(n)))

    def arity(self):
        return self.a.arity()

    def __repr__(self):
        return f"⌊{self.a!r}⌋"


def lift(v) -> GeneralizedPolynomial:
    if isinstance(v, GeneralizedPolynomial):
        return v
    return Const(Fraction(v))


def coords(d: int) -> list[Coord]:
    return [Coord(i) for i in range(d)]


def sqrt_convergent(n: int, max_denominator: int) -> Fraction:
    """Last continued-fraction convergent of sqrt(n) with denominator <= max_denominator."""
    a0 = math.isqrt(n)
    if a0 * a0 == n:
        return Fraction(a0)
    m, d, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while True:
        m = d * a - m
        d = (n - m * m) // d
        a = (a0 + m) // d
        p_next, q_next = a * p + p_prev, a * q + q_prev
        if q_next > max_denominator:
            return Fraction(p, q)
        p_prev, p, q_prev, q = p, p_next, q, q_next


Box = Sequence[tuple]  # ((lo_1, hi_1), ..., (lo_l, hi_l)), half-open


def gp_indicator(u: Sequence[GeneralizedPolynomial], W: Sequence[Box], d: int = 1) -> SubsetPredicate:
    """{n in Z^d : ({u_1(n)}, ..., {u_l(n)}) in W}, W a finite union of half-open boxes."""
    u = list(u)
    for ui in u:
        if ui.arity() > d:
            raise ValueError("polynomial uses more coordinates than the dimension")
    boxes = [tuple((Fraction(lo), Fraction(hi)) for lo, hi in box) for box in W]
    for box in boxes:
        if len(box) != len(u):
            raise ValueError("box dimension must match the number of polynomials")

    def contains(n):
        if isinstance(n, (int, np.integer)):
            n = (int(n),)
        v = [ui.evaluate(n) for ui in u]
        v = [t - math.floor(t) for t in v]
        return any(all(lo <= t < hi for t, (lo, hi) in zip(v, box)) for box in boxes)

    return SubsetPredicate(contains, f"gp{u!r}")


# --------------------------------------------------------------------------
# finite permutations


def perm_incr_indicator(k: int) -> SubsetPredicate:
    """C_k^incr = {g : g(1) < g(2) < ... < g(k)}."""
    if k < 2:
        raise ValueError("k must be >= 2")

    def contains(g):
        vals = [perm_apply(g, i) for i in range(1, k + 1)]
        return all(a < b for a, b in zip(vals, vals[1:]))

    return SubsetPredicate(contains, f"C_{k}^incr")


def perm_center_decompose(c: tuple, k: int) -> tuple[tuple, tuple]:
    """The unique s in S_k with s·c in C_k^incr, and that center s·c."""
    if k < 2:
        raise ValueError("k must be >= 2")
    args = sorted(range(1, k + 1), key=lambda i: perm_apply(c, i))
    s = perm_trim(args)
    return s, perm_compose(s, c)


# --------------------------------------------------------------------------
# declarative text formats
#
# Automaton files:
#     states: s0 s1 ...
#     initial: s0
#     digits: v v' ...            (group elements in the instance encoding)
#     output: s0=a s1=b ...
#     delta: v s -> t             (one line per digit and state)
# Digit-system files:
#     group: Z | N | Z2 | ...
#     scale: b
#     digits: v v' ...
#     good_constant: n0           (optional)
# Blank lines and text after '#' are ignored.


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            key, _, rest = line.partition(":")
            if not _:
                raise ValueError(f"malformed line: {raw!r}")
            yield key.strip().lower(), rest.strip()


def _symbol(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_automaton(text: str, group: Optional[GroupContext] = None) -> Automaton:
    parse = group.parse if group is not None and group.parse is not None else int
    states, initial, digits, output, trans = None, None, None, {}, {}
    for key, rest in _lines(text):
        if key == "states":
            states = tuple(rest.split())
        elif key == "initial":
            initial = rest
        elif key == "digits":
            digits = tuple(parse(t) for t in rest.split())
        elif key == "output":
            for item in rest.split():
                s, _, a = item.partition("=")
                output[s] = _symbol(a)
        elif key == "delta":
            lhs, arrow, t = rest.partition("->")
            parts = lhs.split()
            if not arrow or len(parts) != 2:
                raise ValueError(f"malformed transition: {rest!r}")
            trans[(parse(parts[0]), parts[1])] = t.strip()
        else:
            raise ValueError(f"unknown key {key!r}")
    if states is None or initial is None:
        raise ValueError("automaton needs states and initial")
    return Automaton(states, initial, trans, output, digits or ())


def parse_digit_system(text: str) -> DigitSystem:
    from .group_core import get_group

    fields = dict(_lines(text))
    for need in ("group", "scale", "digits"):
        if need not in fields:
            raise ValueError(f"digit system needs {need!r}")
    group = get_group(fields["group"])
    digits = [group.parse(t) for t in fields["digits"].split()]
    n0 = int(fields["good_constant"]) if "good_constant" in fields else None
    return scale_digit_system(group, int(fields["scale"]), digits, n0)


def _data_path(name: str) -> str:
    import os
    return os.path.join(os.path.dirname(__file__), "data", name)


def load_automaton(path: str, group: Optional[GroupContext] = None) -> Automaton:
    with open(path, encoding="utf-8") as fh:
        return parse_automaton(fh.read(), group)


def load_digit_system(path: str) -> DigitSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_digit_system(fh.read())


def balanced_parity() -> SymbolicFunction:
    """Parity of the nonzero balanced-ternary digits, built from the shipped files."""
    ds = load_digit_system(_data_path("balanced_ternary.digits"))
    aut = load_automaton(_data_path("nonzero_parity.aut"), ds.group)
    x = vh_automatic(aut, ds)
    x.name = "balanced-parity"
    return x
