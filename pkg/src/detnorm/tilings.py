"""Proper tilings of finite windows: interval, cube and permutation monotilings,
nested families, saturations and a validator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .group_core import (
    FiniteSet,
    GroupContext,
    integers,
    lattice,
    permutations,
    symmetric_group,
)
from .generators import perm_incr_indicator


class TilingError(ValueError):
    pass


@dataclass(frozen=True)
class Shape:
    """A finite set of cells containing the identity."""

    cells: FiniteSet

    def __post_init__(self):
        if self.cells.group.identity not in self.cells:
            raise TilingError("shape must contain the identity")

    def __len__(self) -> int:
        return len(self.cells)


def right_divide(group: GroupContext, a, c):
    """r with r·c = a."""
    if group.invert is not None:
        return group.multiply(a, group.invert(c))
    return group.divide(c, a)  # commutative instances


@dataclass
class WindowTiling:
    """Tiles S·c = {s c : s in S} covering ``window``.

    Construction does not check the partition property; see ``validate``.
    """

    window: FiniteSet
    tiles: list  # (Shape, center)
    _sets: Optional[list] = field(default=None, repr=False)
    _owner: Optional[dict] = field(default=None, repr=False)

    @property
    def group(self) -> GroupContext:
        return self.window.group

    def tile_set(self, i: int) -> FiniteSet:
        return self.tile_sets()[i]

    def tile_sets(self) -> list[FiniteSet]:
        if self._sets is None:
            self._sets = [shape.cells.translate(c) for shape, c in self.tiles]
        return self._sets

    def owner(self) -> dict:
        """cell -> index of the (first) tile containing it."""
        if self._owner is None:
            own: dict = {}
            for i, T in enumerate(self.tile_sets()):
                for g in T:
                    own.setdefault(g, i)
            self._owner = own
        return self._owner

    def shapes(self) -> list[Shape]:
        seen: dict = {}
        for shape, _ in self.tiles:
            seen.setdefault(shape.cells.elements, shape)
        return list(seen.values())

    def centers_by_shape(self) -> dict:
        out: dict = {}
        for shape, c in self.tiles:
            out.setdefault(shape.cells.elements, (shape, []))[1].append(c)
        return out

    def __len__(self) -> int:
        return len(self.tiles)


@dataclass
class NestedTilingFamily:
    """Tilings T_1, T_2, ... of the same window; level k+1 should refine into level k."""

    levels: list

    def level(self, k: int) -> WindowTiling:
        return self.levels[k - 1]

    def __len__(self) -> int:
        return len(self.levels)


def interval_tiling(lo: int, hi: int, length: int, group: Optional[GroupContext] = None) -> WindowTiling:
    """[lo, hi] cut into consecutive intervals of ``length``, centers at left ends."""
    group = group or integers()
    n = hi - lo + 1
    if length < 1 or n < 1 or n % length:
        raise TilingError(f"tile length {length} does not divide window length {n}")
    shape = Shape(FiniteSet.interval(group, 0, length - 1))
    return WindowTiling(FiniteSet.interval(group, lo, hi), [(shape, c) for c in range(lo, hi + 1, length)])


def cube_tiling(lows: Sequence[int], highs: Sequence[int], side: int, group: Optional[GroupContext] = None) -> WindowTiling:
    """Box prod [lo_i, hi_i] in Z^d cut into cubes of ``side``; centers at least corners."""
    d = len(lows)
    group = group or lattice(d)
    for lo, hi in zip(lows, highs):
        if side < 1 or (hi - lo + 1) % side or hi < lo:
            raise TilingError(f"cube side {side} does not divide axis length {hi - lo + 1}")
    if group.vector:
        return interval_tiling(lows[0], highs[0], side, group)
    shape = Shape(FiniteSet.box(group, [0] * d, [side - 1] * d))
    centers = product(*[range(lo, hi + 1, side) for lo, hi in zip(lows, highs)])
    return WindowTiling(FiniteSet.box(group, lows, highs), [(shape, c) for c in centers])


def perm_monotiling(k: int, n: int) -> WindowTiling:
    """S_n tiled by S_k·c for c in C_k^incr ∩ S_n; n!/k! tiles."""
    if k < 2 or k > n:
        raise TilingError("need 2 <= k <= n")
    group = permutations()
    incr = perm_incr_indicator(k)
    window = symmetric_group(n)
    shape = Shape(FiniteSet(group, symmetric_group(k)))
    centers = [c for c in window if incr.contains(c)]
    return WindowTiling(FiniteSet(group, window), [(shape, c) for c in centers])


def nested_interval_family(lo: int, hi: int, lengths: Sequence[int]) -> NestedTilingFamily:
    return NestedTilingFamily([interval_tiling(lo, hi, L) for L in lengths])


def perm_family(n: int, ks: Sequence[int]) -> NestedTilingFamily:
    return NestedTilingFamily([perm_monotiling(k, n) for k in ks])


def saturation(F: FiniteSet, theta: WindowTiling) -> FiniteSet:
    """Union of the tiles of theta that meet F."""
    if len(F) == 0:
        return FiniteSet(F.group, [])
    if F.group.vector and _regular_intervals(theta):
        lo = int(theta.window.array[0])
        hi = int(theta.window.array[-1])
        a = F.array
        if a[0] < lo or a[-1] > hi:
            raise TilingError("F escapes the tiled window")
        L = len(theta.tiles[0][0])
        idx = np.unique((a - lo) // L)
        cells = (lo + idx[:, None] * L + np.arange(L)[None, :]).ravel()
        return FiniteSet(F.group, cells)
    own = theta.owner()
    hit = set()
    for g in F:
        if g not in own:
            raise TilingError("F escapes the tiled window")
        hit.add(own[g])
    sets = theta.tile_sets()
    out = FiniteSet(F.group, [])
    for i in sorted(hit):
        out = out.union(sets[i])
    return out


def _regular_intervals(theta: WindowTiling) -> bool:
    """Consecutive equal-length interval tiles starting at the window's left end."""
    if not theta.tiles or not theta.group.vector:
        return False
    shape = theta.tiles[0][0]
    L = len(shape)
    if not np.array_equal(shape.cells.array, np.arange(L)):
        return False
    lo = int(theta.window.array[0])
    n = len(theta.window)
    if n != L * len(theta.tiles) or int(theta.window.array[-1]) != lo + n - 1:
        return False
    return all(s is shape or s.cells == shape.cells for s, _ in theta.tiles) and \
        [c for _, c in theta.tiles] == list(range(lo, lo + n, L))


@dataclass
class TilingReport:
    partition: list = field(default_factory=list)
    identity: list = field(default_factory=list)
    congruence: list = field(default_factory=list)
    unique_congruence: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.partition or self.identity or self.congruence or self.unique_congruence)

    def as_dict(self) -> dict:
        return {"partition": self.partition, "identity": self.identity,
                "congruence": self.congruence, "unique_congruence": self.unique_congruence}


def _check_partition(theta: WindowTiling, level: int, report: TilingReport) -> None:
    group = theta.group
    seen: dict = {}
    for i, ((shape, c), T) in enumerate(zip(theta.tiles, theta.tile_sets())):
        if group.identity not in shape.cells:
            report.identity.append(f"level {level} tile {i}: shape lacks the identity")
        if c not in T:
            report.identity.append(f"level {level} tile {i}: center outside its tile")
        for g in T:
            if g in seen:
                report.partition.append(
                    f"level {level}: tiles {seen[g]} and {i} overlap at {group.format(g)}")
                break
            seen[g] = i
        if not T.issubset(theta.window):
            report.partition.append(f"level {level} tile {i}: leaves the window")
    if len(seen) != len(theta.window) or any(g not in seen for g in theta.window):
        missing = [g for g in theta.window if g not in seen]
        if missing:
            report.partition.append(
                f"level {level}: {len(missing)} window cells uncovered, e.g. {group.format(missing[0])}")


def _check_congruence(lower: WindowTiling, upper: WindowTiling, level: int, report: TilingReport) -> None:
    group = upper.group
    own = lower.owner()
    low_sets = lower.tile_sets()
    patterns: dict = {}
    for j, ((shape, c), T) in enumerate(zip(upper.tiles, upper.tile_sets())):
        subs = sorted({own[g] for g in T if g in own})
        bad = [i for i in subs if not low_sets[i].issubset(T)]
        if bad or any(g not in own for g in T):
            report.congruence.append(f"level {level + 1} tile {j} is not a union of level {level} tiles")
            continue
        rel = tuple(sorted((lower.tiles[i][0].cells.elements, group.encode(right_divide(group, lower.tiles[i][1], c)))
                           for i in subs))
        key = shape.cells.elements
        if key in patterns and patterns[key] != rel:
            report.unique_congruence.append(
                f"level {level + 1} tile {j}: same shape as an earlier tile but different subtile pattern")
        patterns.setdefault(key, rel)


def validate(family) -> TilingReport:
    """Partition, identity-in-shape, congruence and unique congruence violations."""
    if isinstance(family, WindowTiling):
        family = NestedTilingFamily([family])
    report = TilingReport()
    for k, theta in enumerate(family.levels, start=1):
        _check_partition(theta, k, report)
    for k in range(1, len(family.levels)):
        lower, upper = family.levels[k - 1], family.levels[k]
        if lower.window != upper.window:
            report.congruence.append(f"levels {k} and {k + 1} tile different windows")
            continue
        _check_congruence(lower, upper, k, report)
    return report


def expected_perm_tiles(k: int, n: int) -> int:
    return math.factorial(n) // math.factorial(k)
