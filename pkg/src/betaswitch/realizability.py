"""Which sequences of return times can be realized, by nested interval
propagation.

Level i of a :class:`RealizationTree` holds the points of S whose first i
returns have the prescribed times (and, for a fixed omega, use the prescribed
digits).  Each leaf is an interval of such points together with the composed
affine word that carries it into S.  Leaves whose images coincide have the
same future, so by default they are merged into one class with a
multiplicity; ``explicit=True`` keeps every leaf separate, which is what
:meth:`RealizationTree.components` needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .dynamics import BetaCtx
from .errors import CapExceeded
from .numeric import CertReal
from .return_map import Itv, MapWord, Piece, iter_returns, start_piece, switch_region

DEFAULT_TIME_CAP = 64
DEFAULT_DEPTH = 16


@dataclass(frozen=True)
class Leaf:
    """Points of S that follow one composed word through the prescribed returns.

    ``count`` > 1 means this is a class of leaves sharing ``image``; ``word``
    and ``omega_prefix`` then describe the member with the leftmost domain.
    """

    image: Itv
    word: tuple[int, ...]
    scale: CertReal
    offset: CertReal
    omega_prefix: tuple[int, ...]
    count: int = 1

    @property
    def composed(self) -> MapWord:
        return MapWord(self.word)

    @property
    def domain(self) -> Itv:
        return self.image.pull_affine(self.scale, self.offset)

    def witness(self) -> CertReal:
        """A point of the domain: the preimage of the image midpoint."""
        return (self.image.midpoint + self.offset) / self.scale


@dataclass
class Level:
    leaves: list[Leaf]
    covering: bool

    @property
    def leaf_count(self) -> int:
        return sum(leaf.count for leaf in self.leaves)


@dataclass
class RealizationTree:
    times: tuple[int, ...]
    levels: list[Level] = field(default_factory=list)
    explicit: bool = False

    @property
    def level(self) -> int:
        return len(self.levels)

    @property
    def leaves(self) -> list[Leaf]:
        return self.levels[-1].leaves if self.levels else []

    @property
    def covering(self) -> bool:
        return self.levels[-1].covering if self.levels else True

    @property
    def nonempty(self) -> bool:
        return bool(self.leaves) or not self.times

    def leaf_counts(self) -> list[int]:
        return [lv.leaf_count for lv in self.levels]

    def witness(self) -> tuple[CertReal, tuple[int, ...]] | None:
        """``(x, omega_prefix)`` realizing every prescribed time, or None."""
        if not self.leaves:
            return None
        leaf = self.leaves[0]
        return leaf.witness(), leaf.omega_prefix

    def components(self, ctx: BetaCtx) -> list[Itv]:
        """The solution set as a sorted list of disjoint intervals."""
        if not self.times:
            return [switch_region(ctx)]
        if not self.explicit:
            raise ValueError("components need a tree built with explicit=True")
        return union_components([leaf.domain for leaf in self.leaves])


def union_components(itvs: Sequence[Itv]) -> list[Itv]:
    """Merge intervals into connected components (touching closed ends join)."""
    ordered = sorted(itvs, key=lambda i: (float(i.lo), not i.lo_closed))
    out: list[Itv] = []
    for itv in ordered:
        if out:
            last = out[-1]
            c = itv.lo.compare(last.hi)
            if c < 0 or (c == 0 and (itv.lo_closed or last.hi_closed)):
                c_hi = itv.hi.compare(last.hi)
                if c_hi > 0 or (c_hi == 0 and itv.hi_closed and not last.hi_closed):
                    out[-1] = Itv(last.lo, itv.hi, last.lo_closed, itv.hi_closed)
                continue
        out.append(itv)
    return out


def covers_switch(ctx: BetaCtx, images: Sequence[Itv]) -> bool:
    """Whether the images cover S up to finitely many points."""
    if not images:
        return False
    ordered = sorted(images, key=lambda i: float(i.lo))
    if ordered[0].lo.compare(ctx.switch_lo) > 0:
        return False
    reach = ordered[0].hi
    for itv in ordered[1:]:
        if itv.lo.compare(reach) > 0:
            return False
        if itv.hi.compare(reach) > 0:
            reach = itv.hi
    return reach.compare(ctx.switch_hi) >= 0


def _children(ctx: BetaCtx, image: Itv, digit: int, time: int, merge: bool) -> list[Piece]:
    """Pieces of ``image`` returning with exactly ``time`` steps when the first
    digit is ``digit``; words and maps are relative to ``image``."""
    key = image.key
    ckey = ("children", key, digit, time, merge)
    if key is not None and ckey in ctx._cache:
        return ctx._cache[ckey]
    out: list[Piece] = []
    for t, closing, _ in iter_returns(ctx, start_piece(image), digit, time, merge=merge):
        if t == time:
            out = closing
    if key is not None:
        ctx._cache[ckey] = out
    return out


def _merge_leaves(leaves: list[Leaf]) -> list[Leaf]:
    slots: dict = {}
    out: list[Leaf] = []
    for leaf in leaves:
        key = leaf.image.key
        if key is None:
            out.append(leaf)
            continue
        idx = slots.get(key)
        if idx is None:
            slots[key] = len(out)
            out.append(leaf)
            continue
        cur = out[idx]
        keep = leaf if leaf.domain.lo.compare(cur.domain.lo) < 0 else cur
        out[idx] = Leaf(keep.image, keep.word, keep.scale, keep.offset, keep.omega_prefix,
                        cur.count + leaf.count)
    return out


def _extend(ctx: BetaCtx, leaves: list[Leaf], digits: Sequence[int], time: int,
            explicit: bool) -> list[Leaf]:
    nxt: list[Leaf] = []
    for leaf in leaves:
        for d in digits:
            for rel in _children(ctx, leaf.image, d, time, not explicit):
                nxt.append(Leaf(
                    image=rel.image,
                    word=leaf.word + rel.word,
                    scale=rel.scale * leaf.scale,
                    offset=rel.scale * leaf.offset + rel.offset,
                    omega_prefix=leaf.omega_prefix + (d,),
                    count=leaf.count * rel.count,
                ))
    return nxt if explicit else _merge_leaves(nxt)


def _root(ctx: BetaCtx) -> Leaf:
    one, zero = CertReal(Fraction(1)), CertReal(Fraction(0))
    return Leaf(switch_region(ctx), (), one, zero, ())


def _check_times(times: Sequence[int], cap: int) -> tuple[int, ...]:
    times = tuple(int(j) for j in times)
    if any(j < 1 for j in times):
        raise ValueError("return times must be >= 1")
    over = [j for j in times if j > cap]
    if over:
        raise CapExceeded(f"return time {over[0]} exceeds the cap {cap}")
    return times


def _build(ctx: BetaCtx, digit_choices: Sequence[Sequence[int]], times: tuple[int, ...],
           explicit: bool) -> RealizationTree:
    tree = RealizationTree(times, explicit=explicit)
    leaves = [_root(ctx)]
    for digits, j in zip(digit_choices, times):
        leaves = _extend(ctx, leaves, digits, j, explicit)
        tree.levels.append(Level(leaves, covers_switch(ctx, [lf.image for lf in leaves])))
        if not leaves:
            # later levels stay empty
            for _ in range(len(times) - tree.level):
                tree.levels.append(Level([], False))
            break
    return tree


def realize_fixed_omega(ctx: BetaCtx, omega_prefix: Sequence[int], times: Sequence[int],
                        cap: int = DEFAULT_TIME_CAP, explicit: bool = False) -> RealizationTree:
    """Points x in S with r_i(omega, x) = times[i] for the given omega prefix."""
    times = _check_times(times, cap)
    omega_prefix = tuple(omega_prefix)
    if len(omega_prefix) != len(times):
        raise ValueError("omega prefix and times must have the same length")
    if any(d not in (0, 1) for d in omega_prefix):
        raise ValueError("omega digits must be 0 or 1")
    return _build(ctx, [(d,) for d in omega_prefix], times, explicit)


def realize_exists_omega(ctx: BetaCtx, times: Sequence[int], cap: int = DEFAULT_TIME_CAP,
                         explicit: bool = False) -> RealizationTree:
    """Points x in S for which some omega gives return times ``times``."""
    times = _check_times(times, cap)
    return _build(ctx, [(0, 1)] * len(times), times, explicit)


@dataclass(frozen=True)
class ImpossibilityVerdict:
    """``tag`` is ImpossibleAtDepth (no point survives ``depth`` returns) or
    SurvivesToCap (some point survives ``depth`` = cap returns)."""

    tag: str
    depth: int

    @property
    def impossible(self) -> bool:
        return self.tag == "ImpossibleAtDepth"


def certify_impossible_constant(ctx: BetaCtx, j: int, omega_digit: int,
                                cap: int = DEFAULT_DEPTH) -> ImpossibilityVerdict:
    """Look for the first depth d at which no x has r_1 = ... = r_d = j under
    the constant sequence omega = (omega_digit)^inf."""
    _check_times([j], DEFAULT_TIME_CAP)
    if omega_digit not in (0, 1):
        raise ValueError("omega digit must be 0 or 1")
    leaves = [_root(ctx)]
    for depth in range(1, cap + 1):
        leaves = _extend(ctx, leaves, (omega_digit,), j, explicit=False)
        if not leaves:
            return ImpossibilityVerdict("ImpossibleAtDepth", depth)
    return ImpossibilityVerdict("SurvivesToCap", cap)
