"""Finite-dimensional SO(2)-representations as isotypic multiplicity vectors.

``SO2Rep({0: j0, k1: j1, ...})`` stands for R[j0,0] + R[j1,k1] + ...,
where R[j,k] is j copies of the plane rotated at speed k (each copy is
two-dimensional) and R[j,0] is the j-dimensional trivial representation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd
from types import MappingProxyType
from typing import Iterable, Mapping

__all__ = [
    "SO2Rep",
    "ZERO_REP",
    "direct_sum",
    "fixed_subspace",
    "is_nontrivial",
    "contains_mode",
    "has_isotropy_exactly",
    "isotropy_modes",
    "parse_rep",
]


@dataclass(frozen=True, init=False)
class SO2Rep:
    mult: Mapping[int, int] = field(compare=False)

    def __init__(self, mult: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = mult.items() if isinstance(mult, Mapping) else mult
        acc: dict[int, int] = {}
        for k, j in items:
            k, j = int(k), int(j)
            if k < 0 or j < 0:
                raise ValueError(f"mode and multiplicity must be nonnegative, got R[{j},{k}]")
            acc[k] = acc.get(k, 0) + j
        object.__setattr__(
            self, "mult", MappingProxyType({k: acc[k] for k in sorted(acc) if acc[k]})
        )

    @classmethod
    def block(cls, j: int, k: int) -> SO2Rep:
        """The representation R[j,k]."""
        return cls({k: j})

    def __eq__(self, other):
        if not isinstance(other, SO2Rep):
            return NotImplemented
        return dict(self.mult) == dict(other.mult)

    def __hash__(self):
        return hash(tuple(self.mult.items()))

    def __add__(self, other: SO2Rep) -> SO2Rep:
        return direct_sum(self, other)

    def __getitem__(self, k: int) -> int:
        return self.mult.get(k, 0)

    @property
    def dimension(self) -> int:
        return sum(j if k == 0 else 2 * j for k, j in self.mult.items())

    @property
    def modes(self) -> tuple[int, ...]:
        """Nonzero modes present, ascending."""
        return tuple(k for k in self.mult if k >= 1)

    def __str__(self) -> str:
        if not self.mult:
            return "0"
        return "+".join(f"R[{j},{k}]" for k, j in self.mult.items())

    def __repr__(self) -> str:
        return f"SO2Rep({self})"


ZERO_REP = SO2Rep()


def direct_sum(*reps: SO2Rep) -> SO2Rep:
    return SO2Rep([item for r in reps for item in r.mult.items()])


def fixed_subspace(v: SO2Rep) -> SO2Rep:
    return SO2Rep({0: v[0]})


def is_nontrivial(v: SO2Rep) -> bool:
    return bool(v.modes)


def contains_mode(v: SO2Rep, k: int) -> bool:
    if k < 1:
        raise ValueError(f"mode must be positive, got {k}")
    return v[k] >= 1


def isotropy_modes(v: SO2Rep) -> frozenset[int]:
    """All k for which some vector of ``v`` has isotropy group exactly Z_k.

    These are the gcds of nonempty subsets of the nonzero modes.  Built
    incrementally: the set of subset-gcds of S + {m} is the old set, {m},
    and gcd(m, g) for every old g.
    """
    out: set[int] = set()
    for m in v.modes:
        out |= {gcd(m, g) for g in out} | {m}
    return frozenset(out)


def has_isotropy_exactly(v: SO2Rep, k: int) -> bool:
    if k < 1:
        raise ValueError(f"mode must be positive, got {k}")
    return k in isotropy_modes(v)


_BLOCK_RE = re.compile(r"^R\[\s*(\d+)\s*,\s*(\d+)\s*\]$")


def parse_rep(text: str) -> SO2Rep:
    """Parse ``R[j1,k1]+R[j2,k2]`` (or ``0`` for the zero representation)."""
    text = text.strip()
    if text == "0":
        return ZERO_REP
    items = []
    for part in text.split("+"):
        m = _BLOCK_RE.match(part.strip())
        if not m:
            raise ValueError(f"cannot parse representation block {part!r}")
        items.append((int(m.group(2)), int(m.group(1))))
    return SO2Rep(items)
