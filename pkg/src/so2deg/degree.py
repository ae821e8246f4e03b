"""Closed-form Leray-Schauder and SO(2)-equivariant gradient degrees.

Everything here is computed from spectral data alone: the linearisation
at a constant zero ``z`` (or at infinity) acts on the eigenspace of
eigenvalue ``lam_i`` as multiplication by ``1 - slope/(1 + lam_i)`` up to
a positive factor, so it is negative exactly on the lines below the slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Hashable, Mapping, Sequence

from .euler_ring import (
    UNIT,
    EulerElement,
    PartialEulerElement,
    partial_sub,
    product,
)
from .reps import SO2Rep, fixed_subspace, isotropy_modes
from .spectra import (
    RESONANCE_TOL,
    DomainSpec,
    nu,
    rep_below,
    resonant_line,
    spectrum,
)

__all__ = [
    "INFINITY",
    "OddMorseIndex",
    "ResonantSlope",
    "MissingDegenerateInfo",
    "MorseBlockData",
    "SlopeData",
    "LocalIndex",
    "IndexReport",
    "deg_neg_id",
    "deg_linear_iso",
    "ls_linear_degree",
    "grad_linear_degree",
    "make_slope",
    "local_index",
    "total_index",
]


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    __str__ = lambda self: "inf"  # noqa: E731

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


class OddMorseIndex(ValueError):
    """A Morse index on a nontrivial isotypic block is odd."""


class ResonantSlope(ValueError):
    """A slope coincides with an eigenvalue where a non-degenerate formula is needed."""


class MissingDegenerateInfo(ValueError):
    """A resonant slope was given without its eigenspace."""


@dataclass(frozen=True)
class MorseBlockData:
    """Morse index of each isotypic block L_k of a self-adjoint isomorphism."""

    blocks: Mapping[int, int]

    def __post_init__(self):
        clean = {}
        for k, m in dict(self.blocks).items():
            k, m = int(k), int(m)
            if k < 0 or m < 0:
                raise ValueError(f"invalid Morse block {k}: {m}")
            clean[k] = m
        object.__setattr__(self, "blocks", MappingProxyType(dict(sorted(clean.items()))))


def deg_neg_id(v: SO2Rep) -> EulerElement:
    """Gradient degree of -Id on the unit ball of ``v``."""
    sign = -1 if v[0] % 2 else 1
    return EulerElement(sign, {k: sign * v[k] for k in v.modes})


def deg_linear_iso(m: MorseBlockData) -> EulerElement:
    """Gradient degree of a linear isomorphism given its block Morse indices."""
    sign = -1 if m.blocks.get(0, 0) % 2 else 1
    torus = {}
    for k, idx in m.blocks.items():
        if k == 0:
            continue
        if idx % 2:
            raise OddMorseIndex(f"Morse index {idx} at mode {k} is odd")
        torus[k] = sign * (idx // 2)
    return EulerElement(sign, torus)


def _require_nonresonant(domain: DomainSpec, lam: float) -> None:
    if resonant_line(domain, lam) is not None:
        raise ResonantSlope(f"{lam} is an eigenvalue of {domain}")


def ls_linear_degree(domain: DomainSpec, lam: float) -> int:
    """(-1)^nu(lam)."""
    _require_nonresonant(domain, lam)
    return -1 if nu(domain, lam) % 2 else 1


def grad_linear_degree(domain: DomainSpec, lam: float) -> EulerElement:
    """Star product of deg(-Id) over every eigenspace below ``lam``."""
    _require_nonresonant(domain, lam)
    if lam <= 0:
        return UNIT
    return product(deg_neg_id(line.rep) for line in spectrum(domain, lam) if line.eigenvalue < lam)


@dataclass(frozen=True)
class SlopeData:
    value: float
    location: Hashable = None
    resonant: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"slope must be finite, got {self.value}")


def make_slope(domain: DomainSpec, value: float, location: Hashable = None) -> SlopeData:
    """SlopeData with the resonance flag taken from the spectrum."""
    return SlopeData(float(value), location, resonant_line(domain, value) is not None)


@dataclass(frozen=True)
class LocalIndex:
    ls: int | None
    grad: PartialEulerElement


def _degenerate_grad(eigenspace: SO2Rep, below: SO2Rep) -> PartialEulerElement:
    """What the splitting of a degenerate zero determines about its index.

    ``eigenspace`` is the kernel direction V(slope) and ``below`` the sum of
    the eigenspaces under the slope.  Z_k is zero when k is neither a mode of
    ``below`` nor an isotropy of ``eigenspace``; when the kernel has no fixed
    vectors, every coordinate other than the kernel isotropies equals that of
    deg(-Id) over ``below``.
    """
    iso = isotropy_modes(eigenspace)
    base = deg_neg_id(below)
    no_fixed = fixed_subspace(eigenspace).dimension == 0
    known: dict[int, int] = {}
    unknown: set[int] = set(iso)
    if no_fixed:
        known[0] = base.a0
    else:
        unknown.add(0)
    for k in set(below.modes) - iso:
        if no_fixed:
            known[k] = base[k]
        else:
            unknown.add(k)
    # any other coordinate is neither a mode below nor an isotropy: Known 0
    return PartialEulerElement(known, unknown, tail_known_zero=True)


def local_index(
    domain: DomainSpec, s: SlopeData, degenerate_info: SO2Rep | None = None
) -> LocalIndex:
    """LS and gradient index of the constant zero (or infinity) with slope ``s``."""
    if not s.resonant:
        grad = grad_linear_degree(domain, s.value)
        return LocalIndex(grad.a0, PartialEulerElement.from_element(grad))
    if degenerate_info is None:
        raise MissingDegenerateInfo(f"slope {s.value} at {s.location} is resonant")
    below = rep_below(domain, s.value, RESONANCE_TOL)
    return LocalIndex(None, _degenerate_grad(degenerate_info, below))


@dataclass(frozen=True)
class IndexReport:
    ls_at_infinity: int | None
    ls_locals: Mapping[Hashable, int | None]
    ls_total: int | None
    grad_at_infinity: PartialEulerElement
    grad_locals: Mapping[Hashable, PartialEulerElement]
    grad_total: PartialEulerElement
    notes: tuple[str, ...] = field(default=())

    @property
    def fully_known(self) -> bool:
        return self.ls_total is not None and self.grad_total.is_fully_known()


def _auto_local(domain: DomainSpec, s: SlopeData) -> LocalIndex:
    line = resonant_line(domain, s.value)
    if s.resonant != (line is not None):
        s = SlopeData(s.value, s.location, line is not None)
    return local_index(domain, s, line.rep if line is not None else None)


def total_index(
    domain: DomainSpec, slopes: Sequence[SlopeData], slope_inf: SlopeData
) -> IndexReport:
    """Index at infinity minus the sum of the local indices at the zeros.

    Resonant slopes (including at infinity) are handled by the degenerate
    rules with the eigenspace taken from the spectrum; their LS index is
    unknown, which makes ``ls_total`` unknown too.
    """
    at_inf = _auto_local(domain, slope_inf)
    ls_locals: dict[Hashable, int | None] = {}
    grad_locals: dict[Hashable, PartialEulerElement] = {}
    ls_total = at_inf.ls
    grad_total = at_inf.grad
    notes = []
    for i, s in enumerate(slopes):
        key = s.location if s.location is not None else i
        if key in grad_locals:
            raise ValueError(f"duplicate zero location {key!r}")
        loc = _auto_local(domain, s)
        if loc.ls is None:
            notes.append(f"slope {s.value} at {key} is resonant; LS index unknown")
        ls_locals[key] = loc.ls
        grad_locals[key] = loc.grad
        ls_total = None if ls_total is None or loc.ls is None else ls_total - loc.ls
        grad_total = partial_sub(grad_total, loc.grad)
    return IndexReport(
        at_inf.ls,
        MappingProxyType(ls_locals),
        ls_total,
        at_inf.grad,
        MappingProxyType(grad_locals),
        grad_total,
        tuple(notes),
    )
