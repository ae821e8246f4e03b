"""Exact arithmetic in the Euler ring U(SO(2)).

An element is a sequence of integers indexed by the closed subgroups of
SO(2): the coordinate at SO(2) itself followed by coordinates at the
cyclic groups Z_1, Z_2, ...  Only finitely many coordinates are ever
nonzero for the elements this package produces, so they are stored as an
integer ``a0`` plus a sparse ``{k: coefficient}`` map.

Addition is coordinate-wise; the product is

    (a * b)_SO(2) = a0 * b0,
    (a * b)_Z_k   = a0 * b_k + b0 * a_k.

Coordinate index 0 is used for the SO(2) coordinate throughout the
package (it is the first entry of the sequence), index k >= 1 for Z_k.

Python integers do not overflow, so no overflow detection is needed.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

__all__ = [
    "EulerElement",
    "PartialEulerElement",
    "NotInvertible",
    "TriState",
    "UNIT",
    "ZERO",
    "add",
    "sub",
    "star",
    "scalar_mul",
    "is_invertible",
    "invert",
    "product",
    "parse_element",
    "partial_add",
    "partial_sub",
    "partial_is_nonzero",
]


class NotInvertible(ArithmeticError):
    """Raised when inverting an element whose SO(2)-coordinate is not +-1."""


def _canonical_torus(items: Iterable[tuple[int, int]]) -> Mapping[int, int]:
    torus: dict[int, int] = {}
    for k, c in items:
        k = int(k)
        if k < 1:
            raise ValueError(f"torus modes must be positive, got {k}")
        torus[k] = torus.get(k, 0) + int(c)
    return MappingProxyType({k: torus[k] for k in sorted(torus) if torus[k] != 0})


@dataclass(frozen=True, init=False)
class EulerElement:
    a0: int
    torus: Mapping[int, int] = field(compare=False)

    def __init__(self, a0: int = 0, torus: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = torus.items() if isinstance(torus, Mapping) else torus
        object.__setattr__(self, "a0", int(a0))
        object.__setattr__(self, "torus", _canonical_torus(items))

    def __eq__(self, other):
        if not isinstance(other, EulerElement):
            return NotImplemented
        return self.a0 == other.a0 and dict(self.torus) == dict(other.torus)

    def __hash__(self):
        return hash((self.a0, tuple(self.torus.items())))

    def __getitem__(self, k: int) -> int:
        """Coordinate at SO(2) for ``k == 0``, at Z_k otherwise."""
        if k == 0:
            return self.a0
        return self.torus.get(k, 0)

    def coords(self) -> dict[int, int]:
        out = {0: self.a0}
        out.update(self.torus)
        return out

    def is_zero(self) -> bool:
        return self.a0 == 0 and not self.torus

    def __add__(self, other: EulerElement) -> EulerElement:
        return add(self, other)

    def __sub__(self, other: EulerElement) -> EulerElement:
        return sub(self, other)

    def __neg__(self) -> EulerElement:
        return scalar_mul(-1, self)

    def __mul__(self, other):
        if isinstance(other, EulerElement):
            return star(self, other)
        if isinstance(other, int):
            return scalar_mul(other, self)
        return NotImplemented

    __rmul__ = __mul__

    def __str__(self) -> str:
        body = ", ".join(f"{k}:{c}" for k, c in self.torus.items())
        return f"({self.a0}; {body})" if body else f"({self.a0};)"

    def __repr__(self) -> str:
        return f"EulerElement{self}"


UNIT = EulerElement(1)
ZERO = EulerElement(0)


def add(a: EulerElement, b: EulerElement) -> EulerElement:
    return EulerElement(a.a0 + b.a0, list(a.torus.items()) + list(b.torus.items()))


def sub(a: EulerElement, b: EulerElement) -> EulerElement:
    return add(a, scalar_mul(-1, b))


def star(a: EulerElement, b: EulerElement) -> EulerElement:
    items = [(k, a.a0 * c) for k, c in b.torus.items()]
    items += [(k, b.a0 * c) for k, c in a.torus.items()]
    return EulerElement(a.a0 * b.a0, items)


def scalar_mul(g: int, a: EulerElement) -> EulerElement:
    g = int(g)
    return EulerElement(g * a.a0, [(k, g * c) for k, c in a.torus.items()])


def is_invertible(a: EulerElement) -> bool:
    return a.a0 in (-1, 1)


def invert(a: EulerElement) -> EulerElement:
    # a0^2 = 1, so the Z_k equation a0*b_k + b0*a_k = 0 with b0 = a0 gives b_k = -a_k.
    if not is_invertible(a):
        raise NotInvertible(f"{a} is not invertible: SO(2)-coordinate is {a.a0}")
    return EulerElement(a.a0, [(k, -c) for k, c in a.torus.items()])


def product(elements: Iterable[EulerElement]) -> EulerElement:
    """Star product of a sequence; the empty product is the unit."""
    out = UNIT
    for e in elements:
        out = star(out, e)
    return out


_ELEMENT_RE = re.compile(r"^\(\s*(-?\d+)\s*;(.*)\)$")


def parse_element(text: str) -> EulerElement:
    """Parse the ``(a0; k1:c1, k2:c2)`` form produced by ``str``."""
    m = _ELEMENT_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse Euler ring element {text!r}")
    items = []
    body = m.group(2).strip()
    if body:
        for part in body.split(","):
            k, _, c = part.partition(":")
            if not _:
                raise ValueError(f"bad coordinate {part!r} in {text!r}")
            items.append((int(k), int(c)))
    return EulerElement(int(m.group(1)), items)


# --------------------------------------------------------------------------
# partially known elements


class TriState(enum.Enum):
    YES = "yes"
    NO = "no"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True, init=False)
class PartialEulerElement:
    """An element of U(SO(2)) some of whose coordinates are not known.

    The status of coordinate ``c`` is: Known(known[c]) if listed in
    ``known``; Unknown if listed in ``unknown``; otherwise Known(0) when
    ``tail_known_zero`` holds and Unknown when it does not.
    """

    known: Mapping[int, int] = field(compare=False)
    unknown: frozenset[int]
    tail_known_zero: bool

    def __init__(
        self,
        known: Mapping[int, int] | None = None,
        unknown: Iterable[int] = (),
        tail_known_zero: bool = True,
    ):
        unknown = frozenset(int(c) for c in unknown)
        known = {int(c): int(v) for c, v in (known or {}).items()}
        if unknown & known.keys():
            raise ValueError("known and unknown coordinates overlap")
        if tail_known_zero:
            known = {c: v for c, v in known.items() if v != 0}
        object.__setattr__(self, "known", MappingProxyType(dict(sorted(known.items()))))
        object.__setattr__(self, "unknown", unknown)
        object.__setattr__(self, "tail_known_zero", bool(tail_known_zero))

    @classmethod
    def from_element(cls, a: EulerElement) -> PartialEulerElement:
        return cls(a.coords(), (), True)

    def __eq__(self, other):
        if not isinstance(other, PartialEulerElement):
            return NotImplemented
        return (
            dict(self.known) == dict(other.known)
            and self.unknown == other.unknown
            and self.tail_known_zero == other.tail_known_zero
        )

    def __hash__(self):
        return hash((tuple(self.known.items()), self.unknown, self.tail_known_zero))

    def get(self, c: int) -> int | None:
        """Value of coordinate ``c`` or ``None`` when it is unknown."""
        if c in self.known:
            return self.known[c]
        if c in self.unknown or not self.tail_known_zero:
            return None
        return 0

    def is_fully_known(self) -> bool:
        return self.tail_known_zero and not self.unknown

    def to_element(self) -> EulerElement:
        if not self.is_fully_known():
            raise ValueError(f"{self} has unknown coordinates")
        return EulerElement(self.known.get(0, 0), {c: v for c, v in self.known.items() if c != 0})

    def listed(self) -> set[int]:
        return set(self.known) | set(self.unknown)

    def __add__(self, other):
        return partial_add(self, other)

    def __sub__(self, other):
        return partial_sub(self, other)

    def __str__(self) -> str:
        def fmt(c):
            v = self.get(c)
            return "?" if v is None else str(v)

        torus = sorted(c for c in self.listed() if c != 0)
        body = ", ".join(f"{k}:{fmt(k)}" for k in torus)
        if not self.tail_known_zero:
            body = f"{body}, ..." if body else "..."
        return f"({fmt(0)}; {body})" if body else f"({fmt(0)};)"


def _combine(a: PartialEulerElement, b: PartialEulerElement, sign: int) -> PartialEulerElement:
    known: dict[int, int] = {}
    unknown: set[int] = set()
    tail = a.tail_known_zero and b.tail_known_zero
    # coordinates unlisted in both operands stay unlisted: Known(0) if both
    # tails are zero, Unknown otherwise, which is what ``tail`` encodes
    for c in a.listed() | b.listed() | {0}:
        x, y = a.get(c), b.get(c)
        if x is None or y is None:
            unknown.add(c)
        else:
            known[c] = x + sign * y
    return PartialEulerElement(known, unknown, tail)


def partial_add(a: PartialEulerElement, b: PartialEulerElement) -> PartialEulerElement:
    return _combine(a, b, 1)


def partial_sub(a: PartialEulerElement, b: PartialEulerElement) -> PartialEulerElement:
    return _combine(a, b, -1)


def partial_is_nonzero(a: PartialEulerElement) -> TriState:
    if any(v != 0 for v in a.known.values()):
        return TriState.YES
    if a.is_fully_known():
        return TriState.NO
    return TriState.UNDETERMINED
