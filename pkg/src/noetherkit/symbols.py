"""Variable alphabet for mechanics on a time-fibred configuration space.

Symbols are the leaves of every expression: time, coordinates q^i, velocities
q^i_t, accelerations q^i_tt, momenta p_i, the homogeneous momentum p, named
parameters, and the formal phase jets p_i_t that only appear transiently in
phase-space total derivatives.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class SymbolKind(enum.IntEnum):
    # Enum value doubles as the sort rank inside products/sums.
    PARAMETER = 0
    TIME = 1
    COORD = 2
    VELOCITY = 3
    ACCELERATION = 4
    MOMENTUM = 5
    MOMENTUM_DOT = 6  # formal jet p_i_t, internal only (not parseable)
    HOMOGENEOUS_MOMENTUM = 7


_INDEXED = {
    SymbolKind.COORD,
    SymbolKind.VELOCITY,
    SymbolKind.ACCELERATION,
    SymbolKind.MOMENTUM,
    SymbolKind.MOMENTUM_DOT,
}

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
# identifier shapes reserved for the coordinate alphabet
_RESERVED_RE = re.compile(r"^(t|p|q[0-9]+(_t|_tt)?|p[0-9]+(_t)?)$")


@dataclass(frozen=True, slots=True)
class Symbol:
    kind: SymbolKind
    index: int = 0  # 1-based coordinate index, 0 for unindexed kinds
    name: str = ""  # parameter name, empty otherwise

    def __post_init__(self):
        if self.kind in _INDEXED:
            if self.index < 1:
                raise ValueError(f"{self.kind.name} symbol needs a 1-based index")
        elif self.index != 0:
            raise ValueError(f"{self.kind.name} symbol takes no index")
        if self.kind is SymbolKind.PARAMETER:
            if not _NAME_RE.fullmatch(self.name):
                raise ValueError(f"invalid parameter name {self.name!r}")
            if _RESERVED_RE.match(self.name):
                raise ValueError(f"parameter name {self.name!r} collides with a coordinate symbol")
        elif self.name:
            raise ValueError(f"{self.kind.name} symbol takes no name")

    @property
    def sort_key(self) -> tuple:
        return (int(self.kind), self.index, self.name)

    def __str__(self) -> str:
        k = self.kind
        if k is SymbolKind.PARAMETER:
            return self.name
        if k is SymbolKind.TIME:
            return "t"
        if k is SymbolKind.COORD:
            return f"q{self.index}"
        if k is SymbolKind.VELOCITY:
            return f"q{self.index}_t"
        if k is SymbolKind.ACCELERATION:
            return f"q{self.index}_tt"
        if k is SymbolKind.MOMENTUM:
            return f"p{self.index}"
        if k is SymbolKind.MOMENTUM_DOT:
            return f"p{self.index}_t"
        return "p"

    __repr__ = __str__


TIME = Symbol(SymbolKind.TIME)
HOMOGENEOUS_MOMENTUM = Symbol(SymbolKind.HOMOGENEOUS_MOMENTUM)


def coord(i: int) -> Symbol:
    return Symbol(SymbolKind.COORD, i)


def velocity(i: int) -> Symbol:
    return Symbol(SymbolKind.VELOCITY, i)


def acceleration(i: int) -> Symbol:
    return Symbol(SymbolKind.ACCELERATION, i)


def momentum(i: int) -> Symbol:
    return Symbol(SymbolKind.MOMENTUM, i)


def momentum_dot(i: int) -> Symbol:
    return Symbol(SymbolKind.MOMENTUM_DOT, i)


def parameter(name: str) -> Symbol:
    return Symbol(SymbolKind.PARAMETER, name=name)
