"""Normality along a set, block complexity, (F,ε)-complexity, rate estimates,
Shannon and tile-entropy, the counting census, and the preservation experiment."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .group_core import (
    EmptyWindowError,
    FiniteSet,
    FolnerSequence,
    GroupContext,
    SubsetPredicate,
    density_bounds,
    everything,
    naturals,
)
from .symbolic import BlockCounts, Block, SymbolicFunction, _unique_rows, block_counts, indicator
from .tilings import WindowTiling, right_divide

VISIBILITY_FLOOR = 0.01
RATE_NOTE = "canonical domain sequence only; the estimate is a lower bound on the rate"


def sig(v: float, digits: int = 12) -> float:
    """Round to ``digits`` significant digits (stable text output)."""
    return float(f"{float(v):.{digits}g}")


def default_tolerance(p: float, N: int) -> float:
    """max(5e-3, 4 sqrt(p(1-p)/N))."""
    if N <= 0:
        return 1.0
    return max(5e-3, 4.0 * math.sqrt(p * (1.0 - p) / N))


def level_set(y: SymbolicFunction, symbol) -> SubsetPredicate:
    """{g : y(g) = symbol}."""
    i = y.alphabet.index(symbol)
    return SubsetPredicate(lambda g: y(g) == symbol, f"{{{y.name} = {symbol}}}",
                           mask=(lambda a: y.values(a) == i) if y.vectorized else None)


# --------------------------------------------------------------------------
# normality reports


@dataclass
class NormalityReport:
    mode: str
    window: str
    anchor_count: int
    tests: list
    verdict: bool
    tolerance: Optional[float]

    @property
    def passed(self) -> bool:
        return self.verdict

    @property
    def max_deviation(self) -> float:
        devs = [t["deviation"] for t in self.tests if not t.get("skipped")]
        return max(devs) if devs else 0.0

    def deviations(self) -> dict:
        return {t["domain"]: t["deviation"] for t in self.tests if not t.get("skipped")}

    def as_dict(self) -> dict:
        tests = []
        for t in self.tests:
            d = dict(t)
            for key in ("deviation", "reference", "tolerance", "visibility"):
                if key in d and d[key] is not None:
                    d[key] = sig(d[key])
            tests.append(d)
        return {"mode": self.mode, "window": self.window, "anchor_count": self.anchor_count,
                "tests": tests, "verdict": "pass" if self.verdict else "fail",
                "tolerance": None if self.tolerance is None else sig(self.tolerance)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False)


def _domain_label(K: FiniteSet) -> str:
    return "{" + ", ".join(K.group.format(g) for g in K) + "}"


def _window_label(folner: FolnerSequence, n: int) -> str:
    if folner.interval is not None:
        lo, hi = folner.interval(n)
        return f"[{lo}, {hi}]"
    return f"{folner.descriptor} at n={n}"


def _selected(folner: FolnerSequence, n: int, A: SubsetPredicate) -> FiniteSet:
    F = folner.at(n)
    sel = F.filter(A)
    if len(sel) == 0:
        raise EmptyWindowError("empty intersection of F_n and A")
    return sel


def _anchors(S: FiniteSet):
    return S.array if S.group.vector else list(S.elements)


def _block_test(bc: BlockCounts, N: int, s: int, L: int, tol: Optional[float], alphabet) -> dict:
    ref = float(s) ** -L
    counts = bc.counts
    dev, worst = 0.0, None
    if len(counts):
        d = np.abs(counts / N - ref)
        j = int(np.argmax(d))
        dev, worst = float(d[j]), tuple(int(v) for v in bc.rows[j])
    if len(counts) < s ** L and ref > dev:
        dev, worst = ref, _first_missing(bc, s, L)
    t = tol if tol is not None else default_tolerance(ref, N)
    return {"deviation": dev, "reference": ref, "tolerance": t, "anchors": N,
            "worst_block": None if worst is None else "".join(str(alphabet[v]) for v in worst),
            "pass": bool(dev <= t)}


def _first_missing(bc: BlockCounts, s: int, L: int) -> tuple:
    seen = {tuple(int(v) for v in r) for r in bc.rows}
    for code in range(s ** L):
        w = []
        c = code
        for _ in range(L):
            c, r = divmod(c, s)
            w.append(r)
        w = tuple(reversed(w))
        if w not in seen:
            return w
    return ()


def simple_normality(y: SymbolicFunction, A: SubsetPredicate, folner: FolnerSequence, n: int,
                     tol: Optional[float] = None, workers: int = 1) -> NormalityReport:
    """Symbol frequencies of y over F_n ∩ A against 1/|Λ|."""
    sel = _selected(folner, n, A)
    N = len(sel)
    s = y.alphabet_size
    vals = y.values(_anchors(sel))
    counts = np.bincount(vals, minlength=s)
    ref = 1.0 / s
    tests = []
    for a, c in zip(y.alphabet, counts):
        dev = abs(int(c) / N - ref)
        t = tol if tol is not None else default_tolerance(ref, N)
        tests.append({"domain": "{" + y.group.format(y.group.identity) + "}", "block": str(a),
                      "deviation": dev, "reference": ref, "tolerance": t, "anchors": N,
                      "pass": bool(dev <= t)})
    return NormalityReport("simple", _window_label(folner, n), N, tests,
                           all(t["pass"] for t in tests), tol)


def orbit_normality(y: SymbolicFunction, A: SubsetPredicate, folner: FolnerSequence, n: int,
                    catalog: Sequence[FiniteSet], tol: Optional[float] = None, workers: int = 1) -> NormalityReport:
    """Frequencies of y|_{Kg} over g in F_n ∩ A against |Λ|^-|K|, for each K in the catalog."""
    sel = _selected(folner, n, A)
    N = len(sel)
    anchors = _anchors(sel)
    s = y.alphabet_size
    tests = []
    for K in catalog:
        bc = block_counts(y, K, anchors, workers=workers)
        t = _block_test(bc, N, s, len(K), tol, y.alphabet)
        tests.append({"domain": _domain_label(K), **t})
    return NormalityReport("orbit", _window_label(folner, n), N, tests,
                           all(t["pass"] for t in tests), tol)


def visible_core(A: SubsetPredicate, K: FiniteSet, S: FiniteSet) -> FiniteSet:
    """S ∩ A_K with A_K = {g : Kg ⊆ A}."""
    group = S.group
    if group.vector:
        arr = S.array
        keep = np.ones(len(arr), dtype=bool)
        for k in K.array:
            keep &= A.mask(arr + k)
        return FiniteSet(group, arr[keep], _sorted_unique=True)
    mul = group.multiply
    return FiniteSet(group, (g for g in S if all(A.contains(mul(k, g)) for k in K)))


def block_normality(y: SymbolicFunction, A: SubsetPredicate, folner: FolnerSequence, n: int,
                    catalog: Sequence[FiniteSet], tol: Optional[float] = None,
                    visibility_floor: float = VISIBILITY_FLOOR, workers: int = 1) -> NormalityReport:
    """Frequencies over anchors g in F_n ∩ A_K; K with visibility below the floor are skipped."""
    sel = _selected(folner, n, A)
    N = len(sel)
    s = y.alphabet_size
    tests = []
    for K in catalog:
        core = visible_core(A, K, sel)
        vis = len(core) / N
        label = _domain_label(K)
        if vis < visibility_floor or len(core) == 0:
            tests.append({"domain": label, "deviation": None, "reference": float(s) ** -len(K),
                          "tolerance": None, "anchors": len(core), "visibility": vis,
                          "skipped": True, "pass": True})
            continue
        bc = block_counts(y, K, _anchors(core), workers=workers)
        t = _block_test(bc, len(core), s, len(K), tol, y.alphabet)
        tests.append({"domain": label, **t, "visibility": vis, "skipped": False})
    return NormalityReport("block", _window_label(folner, n), N, tests,
                           all(t["pass"] for t in tests), tol)


def subsequence(y: SymbolicFunction, A: SubsetPredicate, horizon: int) -> np.ndarray:
    """Symbol indices y(a_1), y(a_2), ... along the increasing enumeration of A ∩ [1, horizon]."""
    if y.group.name not in ("N", "Z"):
        raise TypeError("subsequence needs y on N0 or Z")
    arr = np.arange(1, horizon + 1, dtype=np.int64)
    sel = arr[A.mask(arr)]
    return y.values(sel)


def classical_normality_along(y: SymbolicFunction, A: SubsetPredicate, m_max: int, horizon: int,
                              tol: Optional[float] = None, workers: int = 1) -> NormalityReport:
    """Classical block frequencies of the subsequence (y(a_k)) for lengths 1..m_max.

    Every length uses the same N - m_max + 1 starting positions, so the result
    matches the orbit test on F_n = [1, n] when A is everything.
    """
    z = subsequence(y, A, horizon)
    if len(z) < m_max:
        raise EmptyWindowError("fewer selected terms than the block length")
    N = len(z) - m_max + 1
    seq = SymbolicFunction(naturals(), tuple(range(y.alphabet_size)), lambda i: int(z[i]),
                           vector_fn=lambda a: z[a], name=f"{y.name}|A")
    anchors = np.arange(N, dtype=np.int64)
    tests = []
    for m in range(1, m_max + 1):
        K = FiniteSet.interval(seq.group, 0, m - 1)
        bc = block_counts(seq, K, anchors, workers=workers)
        t = _block_test(bc, N, y.alphabet_size, m, tol, y.alphabet)
        tests.append({"domain": _domain_label(K), **t})
    return NormalityReport("classical", f"{A.descriptor} within [1, {horizon}]", N, tests,
                           all(t["pass"] for t in tests), tol)


def normality(mode: str, y, A, folner, n, catalog, tol=None, workers=1, m_max=None,
              visibility_floor=VISIBILITY_FLOOR) -> NormalityReport:
    if mode == "simple":
        return simple_normality(y, A, folner, n, tol, workers)
    if mode == "orbit":
        return orbit_normality(y, A, folner, n, catalog, tol, workers)
    if mode == "block":
        return block_normality(y, A, folner, n, catalog, tol, visibility_floor, workers)
    if mode == "classical":
        lo, hi = folner.interval(n) if folner.interval is not None else (1, n)
        return classical_normality_along(y, A, m_max or max(len(K) for K in catalog), hi, tol, workers)
    raise ValueError(f"unknown mode {mode!r}")


# --------------------------------------------------------------------------
# complexity


def block_complexity(x: SymbolicFunction, K: FiniteSet, anchors: FiniteSet,
                     A: Optional[SubsetPredicate] = None, workers: int = 1) -> int:
    """C_x(K|A): distinct blocks x|_{Kg} over anchors g in A."""
    sel = anchors.filter(A) if A is not None else anchors
    if len(sel) == 0:
        raise EmptyWindowError("empty anchor set")
    return block_counts(x, K, _anchors(sel), workers=workers).distinct


def greedy_discard(bc: BlockCounts, budget: float) -> tuple[int, int]:
    """Drop blocks in ascending anchor count (ties: lexicographic) while the dropped mass <= budget.

    Returns (surviving distinct blocks, dropped anchor mass).
    """
    counts = bc.counts
    order = np.argsort(counts, kind="stable")  # rows are already lexicographic
    cum = np.cumsum(counts[order])
    dropped = int(np.searchsorted(cum, budget, side="right"))
    mass = int(cum[dropped - 1]) if dropped else 0
    return len(counts) - dropped, mass


def eps_complexity(x: SymbolicFunction, K: FiniteSet, folner: FolnerSequence, n: int, eps: float,
                   workers: int = 1) -> tuple[int, float]:
    """Windowed (F,ε)-complexity: fewest blocks left after dropping anchors of mass <= ε|F_n|.

    Returns (count, surviving anchor density).
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    F = folner.at(n)
    return _eps_on_window(x, K, F, eps, workers)


def _eps_on_window(x, K, F: FiniteSet, eps: float, workers: int = 1) -> tuple[int, float]:
    if len(F) == 0:
        raise EmptyWindowError("empty window")
    bc = block_counts(x, K, _anchors(F), workers=workers)
    N = len(F)
    count, mass = greedy_discard(bc, eps * N)
    return count, (N - mass) / N


@dataclass
class ComplexityProfile:
    sizes: list
    counts: list
    eps: Optional[float] = None
    surviving: Optional[list] = None
    alphabet_size: int = 2
    note: str = RATE_NOTE

    @property
    def ratios(self) -> list[float]:
        return [math.log2(c) / k if k else 0.0 for c, k in zip(self.counts, self.sizes)]

    @property
    def estimate(self) -> float:
        """Infimum of the ratios (the limit equals the infimum along nested domains)."""
        return min(self.ratios) if self.counts else 0.0

    def rows(self) -> list[tuple]:
        return [(m, k, c, r) for m, (k, c, r) in enumerate(zip(self.sizes, self.counts, self.ratios), start=1)]

    def to_csv(self) -> str:
        lines = ["m,size,count,ratio"]
        for m, k, c, r in self.rows():
            lines.append(f"{m},{k},{c},{sig(r)!r}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {"eps": self.eps, "rate_estimate": sig(self.estimate), "note": self.note,
                "rows": [{"m": m, "size": k, "count": c, "ratio": sig(r)} for m, k, c, r in self.rows()],
                "surviving": None if self.surviving is None else [sig(v) for v in self.surviving]}


def rate_profile(x: SymbolicFunction, domains: Sequence[FiniteSet], anchors: FiniteSet,
                 eps: Optional[float] = None, workers: int = 1) -> ComplexityProfile:
    """log2 C(K_m)/|K_m| along growing domains, optionally with the ε-greedy count."""
    sizes = [len(K) for K in domains]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("domains must be strictly growing")
    if len(anchors) == 0:
        raise EmptyWindowError("empty anchor set")
    counts, surv = [], []
    for K in domains:
        if eps is None:
            counts.append(block_counts(x, K, _anchors(anchors), workers=workers).distinct)
        else:
            c, d = _eps_on_window(x, K, anchors, eps, workers)
            counts.append(c)
            surv.append(d)
    return ComplexityProfile(sizes, counts, eps, surv if eps is not None else None, x.alphabet_size)


def interval_domains(group: GroupContext, m_max: int) -> list[FiniteSet]:
    return [FiniteSet.interval(group, 0, m - 1) for m in range(1, m_max + 1)]


def cube_domains(group: GroupContext, m_max: int) -> list[FiniteSet]:
    if group.vector:
        return interval_domains(group, m_max)
    d = group.dim
    return [FiniteSet.box(group, [0] * d, [m - 1] * d) for m in range(1, m_max + 1)]


# --------------------------------------------------------------------------
# entropy


def shannon_entropy(weights) -> float:
    """-Σ p log2 p after renormalizing the weights; 0 log 0 = 0."""
    if isinstance(weights, Mapping):
        weights = list(weights.values())
    w = np.asarray([float(v) for v in weights], dtype=np.float64)
    if (w < 0).any():
        raise ValueError("negative weight")
    total = w.sum()
    if total <= 0:
        return 0.0
    p = w[w > 0] / total
    h = float(-(p * np.log2(p)).sum())
    return max(h, 0.0)


def _subtile_patterns(B: Block, tiling: WindowTiling) -> dict:
    """shape -> (number of centers, Counter of relative subtile patterns)."""
    group = B.group
    out = {}
    if group.vector:
        dom = B.domain.array
        uniq, vals = np.unique(np.asarray(B.values), return_inverse=True)
        vals = vals.ravel()
        for key, (shape, centers) in tiling.centers_by_shape().items():
            c = np.asarray(centers, dtype=np.int64)
            pos = c[:, None] + shape.cells.array[None, :]
            rows = vals[np.searchsorted(dom, pos)]
            _, cnt = _unique_rows(rows, max(len(uniq), 1))
            out[key] = (len(centers), cnt)
        return out
    d = B.as_dict()
    mul = group.multiply
    for key, (shape, centers) in tiling.centers_by_shape().items():
        tally: dict = {}
        for c in centers:
            pat = tuple(d[mul(s, c)] for s in shape.cells)
            tally[pat] = tally.get(pat, 0) + 1
        out[key] = (len(centers), np.asarray(list(tally.values())))
    return out


def tile_entropy(B: Block, tiling: WindowTiling) -> float:
    """Σ_S (|C_S| / |window|) · H(distribution of B over the shape-S subtiles)."""
    if tiling.window != B.domain:
        raise ValueError("window mismatch between block and tiling")
    n = len(B.domain)
    total = 0.0
    for key, (ncent, cnt) in _subtile_patterns(B, tiling).items():
        total += ncent / n * shannon_entropy(cnt)
    return total


def counting_census(alphabet_size: int, size: int, subtile_length: int, c: float,
                    slack: float = 1e-12) -> tuple[int, float]:
    """Blocks on an interval of ``size`` whose tile-entropy (subtiles of the given length) is <= c.

    Exhaustive over all |Λ|^size blocks; returns (count, log2(count)/size).
    """
    s = alphabet_size
    if s < 1 or size < 1:
        raise ValueError("need a nonempty alphabet and size")
    if s ** size > 1 << 20:
        raise ValueError("size too large for exhaustive census")
    if size % subtile_length:
        raise ValueError("subtile length must divide the size")
    t = size // subtile_length
    codes = np.arange(s ** size, dtype=np.int64)
    digits = np.stack([(codes // s ** (size - 1 - j)) % s for j in range(size)], axis=1)
    weights = s ** np.arange(subtile_length - 1, -1, -1, dtype=np.int64)
    sub = digits.reshape(-1, t, subtile_length) @ weights
    # H = log2 t - (1/t) Σ_j log2 (multiplicity of the j-th subtile pattern)
    mult = np.zeros(sub.shape, dtype=np.int64)
    for j in range(t):
        mult[:, j] = (sub == sub[:, j:j + 1]).sum(axis=1)
    H = math.log2(t) - np.log2(mult).sum(axis=1) / t
    ent = np.maximum(H, 0.0) / subtile_length
    count = int((ent <= c + slack).sum())
    return count, (math.log2(count) / size if count else float("-inf"))


# --------------------------------------------------------------------------
# preservation experiment


def preservation_experiment(y: SymbolicFunction, A: SubsetPredicate, folner: FolnerSequence, n: int,
                            catalog: Sequence[FiniteSet], tol: Optional[float] = None,
                            rate_m_max: int = 8, workers: int = 1) -> dict:
    """Simple, orbit and block tests of y along A with the density and complexity of A."""
    simple = simple_normality(y, A, folner, n, tol, workers)
    orbit = orbit_normality(y, A, folner, n, catalog, tol, workers)
    block = block_normality(y, A, folner, n, catalog, tol, workers=workers)
    lower, upper = density_bounds(A, folner, n) if folner.interval is not None else (None, None)
    one_a = indicator(A, y.group)
    prof = rate_profile(one_a, cube_domains(y.group, rate_m_max), folner.at(n), workers=workers)
    return {
        "set": A.descriptor,
        "window": _window_label(folner, n),
        "simple": simple.as_dict(),
        "orbit": orbit.as_dict(),
        "block": block.as_dict(),
        "density": {"lower": None if lower is None else sig(lower),
                    "upper": None if upper is None else sig(upper)},
        "rate": prof.as_dict(),
        "verdict": "pass" if (simple.verdict and orbit.verdict and block.verdict) else "fail",
    }
