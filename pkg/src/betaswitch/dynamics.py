"""Base dynamics on I_beta = [0, 1/(beta-1)]: the maps T0/T1, the switch region,
greedy and lazy maps, the random map K_beta and forced orbits."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import OutOfDomain, UnresolvableAtPrecision
from .numeric import CertReal

DEFAULT_STEP_CAP = 10_000


@dataclass(frozen=True, eq=False)
class BetaCtx:
    """A base beta in (1, 2) and the constants derived from it.

    Build with :meth:`BetaCtx.of`; the instance also carries a private cache
    that downstream modules use for branch tables.
    """

    beta: CertReal
    inv_beta: CertReal
    right_end: CertReal
    switch_lo: CertReal
    switch_hi: CertReal
    switch_mid: CertReal
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def of(cls, beta) -> "BetaCtx":
        beta = CertReal.of(beta)
        if not (beta > 1 and beta < 2):
            raise ValueError(f"beta must lie in (1, 2), got {beta!r}")
        inv = 1 / beta
        right = 1 / (beta - 1)
        return cls(beta=beta, inv_beta=inv, right_end=right, switch_lo=inv,
                   switch_hi=inv * right, switch_mid=right / 2)

    @property
    def switch_width(self) -> CertReal:
        return self.switch_hi - self.switch_lo

    def __repr__(self):
        return f"BetaCtx(beta={self.beta!r})"


class Region(enum.Enum):
    LEFT_OF_S = "LeftOfS"
    INTERIOR_S = "InteriorS"
    BOUNDARY_LO = "SwitchBoundaryLo"
    BOUNDARY_HI = "SwitchBoundaryHi"
    RIGHT_OF_S = "RightOfS"
    OUTSIDE = "OutsideDomain"

    @property
    def in_switch(self) -> bool:
        return self in (Region.INTERIOR_S, Region.BOUNDARY_LO, Region.BOUNDARY_HI)


class OmegaSource:
    """A deterministic 0/1 sequence omega, read by index.

    >>> OmegaSource.fixed([1, 0]).digits(4)
    (1, 0, 0, 0)
    >>> OmegaSource.periodic([0, 1]).digits(3)
    (0, 1, 0)
    """

    def __init__(self, kind: str, word: Sequence[int] = (), tail: int = 0,
                 stream: Iterable[int] | None = None):
        if any(d not in (0, 1) for d in word) or tail not in (0, 1):
            raise ValueError("omega digits must be 0 or 1")
        if kind == "periodic" and not word:
            raise ValueError("periodic omega needs a nonempty word")
        self.kind = kind
        self.word = tuple(word)
        self.tail = tail
        self._stream = iter(stream) if stream is not None else None
        self._seen: list[int] = []

    @classmethod
    def zeros(cls) -> "OmegaSource":
        return cls("zeros", tail=0)

    @classmethod
    def ones(cls) -> "OmegaSource":
        return cls("ones", tail=1)

    @classmethod
    def constant(cls, digit: int) -> "OmegaSource":
        return cls.ones() if digit else cls.zeros()

    @classmethod
    def fixed(cls, word: Sequence[int], tail: int = 0) -> "OmegaSource":
        return cls("fixed", word, tail)

    @classmethod
    def periodic(cls, word: Sequence[int]) -> "OmegaSource":
        return cls("periodic", word)

    @classmethod
    def stream(cls, digits: Iterable[int]) -> "OmegaSource":
        return cls("stream", stream=digits)

    def digit(self, idx: int) -> int:
        if idx < 0:
            raise IndexError("omega index must be >= 0")
        if self.kind == "periodic":
            return self.word[idx % len(self.word)]
        if self.kind == "stream":
            while len(self._seen) <= idx:
                d = next(self._stream)
                if d not in (0, 1):
                    raise ValueError(f"omega stream produced {d!r}")
                self._seen.append(d)
            return self._seen[idx]
        if idx < len(self.word):
            return self.word[idx]
        return self.tail

    def digits(self, n: int, start: int = 0) -> tuple[int, ...]:
        return tuple(self.digit(i) for i in range(start, start + n))

    def __repr__(self):
        if self.kind in ("zeros", "ones"):
            return f"OmegaSource.{self.kind}()"
        return f"OmegaSource({self.kind!r}, word={self.word}, tail={self.tail})"


def in_domain(ctx: BetaCtx, x: CertReal) -> bool:
    return x.compare(0) >= 0 and x.compare(ctx.right_end) <= 0


def apply_digit(ctx: BetaCtx, d: int, x, check: bool = False) -> CertReal:
    """``T_d(x) = beta*x - d``."""
    if d not in (0, 1):
        raise ValueError("digit must be 0 or 1")
    y = ctx.beta * CertReal.of(x) - d
    if check and not in_domain(ctx, y):
        raise OutOfDomain(f"T{d}({x!r}) = {y!r} left [0, 1/(beta-1)]")
    return y


def classify_point(ctx: BetaCtx, x) -> Region:
    x = CertReal.of(x)
    try:
        if x.compare(0) < 0 or x.compare(ctx.right_end) > 0:
            return Region.OUTSIDE
        c_lo = x.compare(ctx.switch_lo)
        if c_lo < 0:
            return Region.LEFT_OF_S
        if c_lo == 0:
            return Region.BOUNDARY_LO
        c_hi = x.compare(ctx.switch_hi)
    except UnresolvableAtPrecision as exc:
        raise UnresolvableAtPrecision(f"cannot place {x!r} relative to S: {exc}") from None
    if c_hi < 0:
        return Region.INTERIOR_S
    if c_hi == 0:
        return Region.BOUNDARY_HI
    return Region.RIGHT_OF_S


def kbeta_step(ctx: BetaCtx, omega: OmegaSource, idx: int, x) -> tuple[CertReal, bool]:
    """One step of K_beta; ``idx`` counts omega digits consumed so far."""
    region = classify_point(ctx, x)
    if region is Region.OUTSIDE:
        raise OutOfDomain(f"{x!r} is outside [0, 1/(beta-1)]")
    if region is Region.LEFT_OF_S:
        return apply_digit(ctx, 0, x), False
    if region is Region.RIGHT_OF_S:
        return apply_digit(ctx, 1, x), False
    return apply_digit(ctx, omega.digit(idx), x), True


def greedy_step(ctx: BetaCtx, x) -> CertReal:
    x = CertReal.of(x)
    return apply_digit(ctx, 1 if x.compare(ctx.switch_lo) >= 0 else 0, x)


def lazy_step(ctx: BetaCtx, x) -> CertReal:
    x = CertReal.of(x)
    return apply_digit(ctx, 1 if x.compare(ctx.switch_hi) >= 0 else 0, x)


def greedy_digits(ctx: BetaCtx, x, n: int) -> list[int]:
    """First ``n`` digits of the greedy expansion of ``x``."""
    x = CertReal.of(x)
    out = []
    for _ in range(n):
        d = 1 if x.compare(ctx.switch_lo) >= 0 else 0
        out.append(d)
        x = apply_digit(ctx, d, x)
    return out


def reflect(ctx: BetaCtx, x) -> CertReal:
    """The involution ``x -> 1/(beta-1) - x``; it conjugates T0 and T1."""
    return ctx.right_end - CertReal.of(x)


class OrbitStop(enum.Enum):
    HIT_INTERIOR = "HitInterior"
    HIT_BOUNDARY_LO = "HitBoundaryLo"
    HIT_BOUNDARY_HI = "HitBoundaryHi"
    ESCAPED = "Escaped"
    STEP_CAP = "StepCapReached"


@dataclass
class ForcedOrbit:
    trajectory: list[CertReal]
    stop: OrbitStop
    word: tuple[int, ...]

    @property
    def steps(self) -> int:
        return len(self.word)


_STOPS = {
    Region.INTERIOR_S: OrbitStop.HIT_INTERIOR,
    Region.BOUNDARY_LO: OrbitStop.HIT_BOUNDARY_LO,
    Region.BOUNDARY_HI: OrbitStop.HIT_BOUNDARY_HI,
}


def forced_orbit(ctx: BetaCtx, x0, max_steps: int = DEFAULT_STEP_CAP) -> ForcedOrbit:
    """Iterate the forced map (T0 left of S, T1 right of S) until S is reached.

    ``word`` lists the forced digits applied; ``trajectory`` includes ``x0``.
    """
    x = CertReal.of(x0)
    traj, word = [x], []
    for _ in range(max_steps + 1):
        region = classify_point(ctx, x)
        if region in _STOPS:
            return ForcedOrbit(traj, _STOPS[region], tuple(word))
        if region is Region.OUTSIDE:
            return ForcedOrbit(traj, OrbitStop.ESCAPED, tuple(word))
        if len(word) == max_steps:
            break
        d = 0 if region is Region.LEFT_OF_S else 1
        x = apply_digit(ctx, d, x)
        word.append(d)
        traj.append(x)
    return ForcedOrbit(traj, OrbitStop.STEP_CAP, tuple(word))


def beta_value(x: CertReal | Fraction | int | str) -> CertReal:
    """Coerce user input (decimal strings included) to a CertReal."""
    if isinstance(x, str):
        return CertReal(Fraction(x))
    return CertReal.of(x)
