"""Neumann-Laplacian spectra with SO(2)-isotypic eigenspace decompositions.

Built-in domains are an interval (0, L), the unit disc and the cylinder
disc x (0, 1).  On the disc the eigenvalues are x_{kn}^2 where x_{kn} is
the n-th zero of J_k'; each pair (k, n) contributes a copy of R[1,k] to
the eigenspace.  On the cylinder they are (pi n)^2 + x_{kj}^2.  A
``Custom`` domain takes a hand-entered list of lines.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .bessel import bessel_prime_zero, bessel_prime_zeros_below
from .reps import SO2Rep, direct_sum, is_nontrivial

__all__ = [
    "GROUPING_TOL",
    "RESONANCE_TOL",
    "Interval",
    "Disc",
    "Cylinder",
    "Custom",
    "DomainSpec",
    "SpectralLine",
    "NotFound",
    "ResonanceWarning",
    "spectrum",
    "nu",
    "resonant_line",
    "is_resonant",
    "rep_below",
    "lines_between",
    "lambda0",
    "check_lambda_k1_bounds",
]

GROUPING_TOL = 1e-9
RESONANCE_TOL = 1e-7


class NotFound(LookupError):
    """The domain has no eigenvalue with a nontrivial eigenspace."""


class ResonanceWarning(UserWarning):
    """A value lies within the resonance tolerance of an eigenvalue."""


@dataclass(frozen=True)
class SpectralLine:
    eigenvalue: float
    rep: SO2Rep
    labels: tuple = ()

    @property
    def dimension(self) -> int:
        return self.rep.dimension


@dataclass(frozen=True)
class Interval:
    length: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"interval length must be positive, got {self.length}")


@dataclass(frozen=True)
class Disc:
    pass


@dataclass(frozen=True)
class Cylinder:
    pass


@dataclass(frozen=True)
class Custom:
    lines: tuple[SpectralLine, ...]

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        prev = -math.inf
        for line in self.lines:
            if line.eigenvalue < 0 or line.rep.dimension < 1:
                raise ValueError(f"invalid spectral line {line}")
            if line.eigenvalue <= prev:
                raise ValueError("custom eigenvalues must be strictly increasing")
            prev = line.eigenvalue


DomainSpec = Union[Interval, Disc, Cylinder, Custom]


def _group(entries: list[tuple[float, int, tuple]]) -> list[SpectralLine]:
    """Merge (eigenvalue, mode, label) entries closer than GROUPING_TOL."""
    entries.sort(key=lambda e: e[0])
    lines: list[SpectralLine] = []
    group: list[tuple[float, int, tuple]] = []
    for e in entries:
        if group and e[0] - group[0][0] > GROUPING_TOL:
            lines.append(_line(group))
            group = []
        group.append(e)
    if group:
        lines.append(_line(group))
    return lines


def _line(group):
    return SpectralLine(
        eigenvalue=group[0][0],
        rep=SO2Rep([(k, 1) for _, k, _ in group]),
        labels=tuple(label for _, _, label in group),
    )


def _disc_zeros_below(xmax: float) -> dict[int, list[float]]:
    """All x_{kn} < xmax keyed by k (x_{00} = 0 included for k = 0)."""
    out: dict[int, list[float]] = {}
    k = 0
    while True:
        zeros = list(bessel_prime_zeros_below(k, xmax))
        if k == 0:
            zeros = [0.0] + zeros
        if not zeros:
            # x_{k1} increases with k, so nothing further lies below xmax
            return out
        out[k] = zeros
        k += 1


@lru_cache(maxsize=256)
def _spectrum(domain: DomainSpec, lambda_max: float) -> tuple[SpectralLine, ...]:
    if isinstance(domain, Custom):
        return tuple(line for line in domain.lines if line.eigenvalue < lambda_max)
    entries: list[tuple[float, int, tuple]] = []
    if isinstance(domain, Interval):
        n = 0
        while True:
            lam = (n * math.pi / domain.length) ** 2
            if lam >= lambda_max:
                break
            entries.append((lam, 0, (n,)))
            n += 1
    elif isinstance(domain, Disc):
        for k, zeros in _disc_zeros_below(math.sqrt(lambda_max)).items():
            for n, x in enumerate(zeros, start=0 if k == 0 else 1):
                entries.append((float(x * x), k, (k, n)))
    elif isinstance(domain, Cylinder):
        nz = 0
        while (nz * math.pi) ** 2 < lambda_max:
            axial = (nz * math.pi) ** 2
            for k, zeros in _disc_zeros_below(math.sqrt(lambda_max - axial)).items():
                for j, x in enumerate(zeros, start=0 if k == 0 else 1):
                    entries.append((float(axial + x * x), k, (k, nz, j)))
            nz += 1
    else:
        raise TypeError(f"unknown domain {domain!r}")
    return tuple(_group(entries))


def spectrum(domain: DomainSpec, lambda_max: float) -> list[SpectralLine]:
    """Distinct eigenvalues below ``lambda_max``, ascending, with eigenspaces."""
    if not lambda_max > 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    # compute on a power-of-two bucket so nearby requests share one cache entry
    bucket = 2.0 ** max(4, math.ceil(math.log2(lambda_max)))
    return [line for line in _spectrum(domain, bucket) if line.eigenvalue < lambda_max]


def _lines_upto(domain: DomainSpec, a: float) -> list[SpectralLine]:
    return spectrum(domain, max(a, 0.0) + 1.0)


def resonant_line(domain: DomainSpec, a: float, tol: float = RESONANCE_TOL) -> SpectralLine | None:
    """The line whose eigenvalue is within ``tol`` of ``a``, if any."""
    if a < -tol:
        return None
    for line in _lines_upto(domain, a):
        if abs(line.eigenvalue - a) <= tol:
            return line
    return None


def is_resonant(domain: DomainSpec, a: float, tol: float = RESONANCE_TOL) -> bool:
    return resonant_line(domain, a, tol) is not None


def _below(domain: DomainSpec, a: float, tol: float) -> list[SpectralLine]:
    # a value resonant with an eigenvalue does not count that eigenvalue as below it
    return [line for line in _lines_upto(domain, a) if line.eigenvalue < a - tol]


def nu(domain: DomainSpec, a: float, tol: float = RESONANCE_TOL) -> int:
    """Total dimension of eigenspaces with eigenvalue strictly below ``a``.

    Warns with ``ResonanceWarning`` when ``a`` is within ``tol`` of an
    eigenvalue; the count then excludes that eigenvalue.
    """
    if a <= 0:
        return 0
    if resonant_line(domain, a, tol) is not None:
        warnings.warn(f"{a} is resonant with the spectrum of {domain}", ResonanceWarning, stacklevel=2)
    return sum(line.dimension for line in _below(domain, a, tol))


def rep_below(domain: DomainSpec, a: float, tol: float = RESONANCE_TOL) -> SO2Rep:
    """Direct sum of the eigenspaces with eigenvalue strictly below ``a``."""
    return direct_sum(*(line.rep for line in _below(domain, a, tol)))


def lines_between(domain: DomainSpec, lo: float, hi: float) -> list[SpectralLine]:
    """Lines with lo < eigenvalue < hi (order of the bounds does not matter)."""
    lo, hi = min(lo, hi), max(lo, hi)
    return [line for line in _lines_upto(domain, hi) if lo < line.eigenvalue < hi]


def lambda0(domain: DomainSpec) -> float:
    """Smallest eigenvalue whose eigenspace is a nontrivial representation."""
    if isinstance(domain, Interval):
        raise NotFound(f"{domain} has only trivial eigenspaces")
    if isinstance(domain, Custom):
        for line in domain.lines:
            if is_nontrivial(line.rep):
                return line.eigenvalue
        raise NotFound(f"{domain} has only trivial eigenspaces")
    # on the disc and the cylinder it is x_{11}^2
    return bessel_prime_zero(1, 1) ** 2


def check_lambda_k1_bounds(k_max: int) -> bool:
    """Whether k(k+2) < x_{k1}^2 < 2k(k+1) for every 1 <= k <= k_max."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    for k in range(1, k_max + 1):
        lam = bessel_prime_zero(k, 1) ** 2
        if not k * (k + 2) < lam < 2 * k * (k + 1):
            return False
    return True
