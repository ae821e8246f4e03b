"""Hypothesis checkers for the existence, continuation and bifurcation theorems.

Every checker evaluates the theorem's hypotheses literally and, separately,
computes the relevant degree.  The two must agree: a theorem whose
hypotheses hold but whose degree vanishes indicates a bug somewhere in the
stack and raises ``ConsistencyError`` from ``check_all``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .degree import (
    INFINITY,
    IndexReport,
    ResonantSlope,
    grad_linear_degree,
    make_slope,
    total_index,
)
from .euler_ring import EulerElement, TriState, partial_is_nonzero
from .reps import SO2Rep, contains_mode, direct_sum, fixed_subspace, has_isotropy_exactly, is_nontrivial
from .spectra import (
    DomainSpec,
    NotFound,
    SpectralLine,
    lambda0,
    lines_between,
    nu,
    rep_below,
    resonant_line,
    spectrum,
)

__all__ = [
    "Zero",
    "Family",
    "ProblemSpec",
    "Verdict",
    "ConsistencyError",
    "NoNontrivialLambda0",
    "MultipleCrossings",
    "check_ls",
    "check_so2_1",
    "check_so2_2",
    "check_so2_3",
    "check_degenerate",
    "check_continuation",
    "bif_index",
    "check_bif_infinity",
    "check_bif_meets",
    "check_all",
    "problem_index",
    "configuration_notes",
]


class ConsistencyError(AssertionError):
    """A theorem applies but the degree it rests on vanishes."""


class NoNontrivialLambda0(ValueError):
    """The domain has no eigenspace with a nontrivial SO(2)-action."""


class MultipleCrossings(ValueError):
    """f'(inf, lambda) meets the spectrum more than once on the sampled range."""


@dataclass(frozen=True)
class Zero:
    """A constant solution z with f(z) = 0 and slope f'(z).

    ``rep`` optionally overrides the eigenspace at a resonant slope;
    by default it is read off the spectrum.
    """

    value: float
    slope: float
    rep: SO2Rep | None = None


@dataclass(frozen=True)
class Family:
    """Parameter family data for the bifurcation checks.

    ``slope_fn`` maps lambda to f'(inf, lambda); if absent, the isolated
    crossing ``lambda0`` must be attested directly.
    """

    lambda_minus: float
    lambda_plus: float
    slope_minus: float
    slope_plus: float
    slope_fn: Callable[[float], float] | None = field(default=None, compare=False)
    lambda0: float | None = None
    samples: int = 1001


@dataclass(frozen=True)
class ProblemSpec:
    domain: DomainSpec
    zeros: tuple[Zero, ...]
    slope_inf: float
    family: Family | None = None
    expr: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(self.zeros))
        for z in self.zeros:
            if not (math.isfinite(z.value) and math.isfinite(z.slope)):
                raise ValueError(f"zero {z} is not finite")
        if not math.isfinite(self.slope_inf):
            raise ValueError("slope at infinity must be finite")


@dataclass(frozen=True)
class Verdict:
    theorem_id: str
    applies: bool
    witness: dict[str, Any] = field(default_factory=dict)
    index_crosscheck: TriState = TriState.UNDETERMINED
    notes: tuple[str, ...] = ()
    report: IndexReport | None = field(default=None, compare=False)


# --------------------------------------------------------------------------
# shared helpers


def _resonant_points(p: ProblemSpec) -> list[str]:
    out = [f"z={z.value:g} (slope {z.slope:g})" for z in p.zeros if resonant_line(p.domain, z.slope)]
    if resonant_line(p.domain, p.slope_inf):
        out.append(f"infinity (slope {p.slope_inf:g})")
    return out


def _require_nonresonant(p: ProblemSpec) -> None:
    bad = _resonant_points(p)
    if bad:
        raise ResonantSlope("resonant slopes: " + ", ".join(bad))


def _require_lambda0(domain: DomainSpec) -> float:
    try:
        return lambda0(domain)
    except NotFound as exc:
        raise NoNontrivialLambda0(str(exc)) from exc


def _nu_even(domain: DomainSpec, a: float) -> bool:
    return nu(domain, a) % 2 == 0


def problem_index(p: ProblemSpec) -> IndexReport:
    slopes = [make_slope(p.domain, z.slope, i) for i, z in enumerate(p.zeros)]
    return total_index(p.domain, slopes, make_slope(p.domain, p.slope_inf, INFINITY))


def _ls_crosscheck(report: IndexReport) -> TriState:
    if report.ls_total is None:
        return TriState.UNDETERMINED
    return TriState.YES if report.ls_total != 0 else TriState.NO


def _grad_crosscheck(report: IndexReport) -> TriState:
    return partial_is_nonzero(report.grad_total)


def _new_mode_lines(domain: DomainSpec, upper: float) -> list[tuple[SpectralLine, int]]:
    """(line, k') with lam_line < upper, k' a mode of the line absent below it."""
    out = []
    seen: set[int] = set()
    for line in spectrum(domain, max(upper, 0.0) + 1.0):
        if line.eigenvalue >= upper:
            break
        for k in line.rep.modes:
            if k not in seen:
                out.append((line, k))
        seen.update(line.rep.modes)
    return out


def _zplus(p: ProblemSpec) -> list[int]:
    return [i for i, z in enumerate(p.zeros) if z.slope > 0]


# --------------------------------------------------------------------------
# existence in the non-degenerate case


def check_ls(p: ProblemSpec) -> Verdict:
    """Leray-Schauder existence theorem."""
    _require_nonresonant(p)
    d = p.domain
    zplus = _zplus(p)
    even = [i for i in zplus if _nu_even(d, p.zeros[i].slope)]
    witness: dict[str, Any]
    if p.slope_inf < 0:
        applies, witness = bool(even), {"hypothesis": 1}
    elif not _nu_even(d, p.slope_inf):
        applies, witness = bool(even), {"hypothesis": 2}
    else:
        applies, witness = len(even) != 1, {"hypothesis": 3, "even_count": len(even)}
    if applies and even and witness["hypothesis"] != 3:
        witness["z0"] = p.zeros[even[0]].value
        witness["z0_slope"] = p.zeros[even[0]].slope
        witness["nu"] = nu(d, p.zeros[even[0]].slope)
    report = problem_index(p)
    return Verdict("LS-existence", applies, witness, _ls_crosscheck(report), (), report)


def _strict_between_nontrivial(d: DomainSpec, a: float, b: float) -> SpectralLine | None:
    for line in lines_between(d, a, b):
        if is_nontrivial(line.rep):
            return line
    return None


def _so2_alternatives(
    p: ProblemSpec, lam0: float, anchor: float, pool: Sequence[tuple[Any, float]]
) -> dict[str, Any] | None:
    """Alternatives (1)-(3) shared by the two theorems with f'(inf) > 0.

    ``anchor`` is the slope playing the part of f'(inf) in the first of the
    two theorems (and of f'(z0) in the second); ``pool`` lists the
    (label, slope) candidates that the alternatives quantify over.
    """
    d = p.domain
    # (1) two distinct members above lam0, the larger one above the anchor
    for (la, sa), (lb, sb) in combinations(pool, 2):
        hi, lo = ((la, sa), (lb, sb)) if sa >= sb else ((lb, sb), (la, sa))
        if lo[1] > lam0 and hi[1] > anchor:
            return {"alternative": 1, "z0": hi[0], "z0_slope": hi[1], "z1": lo[0], "z1_slope": lo[1]}
    # (2) exactly one member above lam0 and a nontrivial line between it and the anchor
    above = [(lab, s) for lab, s in pool if s > lam0]
    if len(above) == 1:
        lab, s = above[0]
        line = _strict_between_nontrivial(d, s, anchor)
        if line is not None:
            return {
                "alternative": 2,
                "z0": lab,
                "z0_slope": s,
                "lambda_i0": line.eigenvalue,
                "rep": str(line.rep),
            }
    # (3) a line above every member and below the anchor carrying a new mode k'
    top = max((s for _, s in pool), default=-math.inf)
    for line, k in _new_mode_lines(d, anchor):
        if line.eigenvalue > top:
            return {"alternative": 3, "lambda_i0": line.eigenvalue, "k_prime": k, "rep": str(line.rep)}
    return None


def check_so2_1(p: ProblemSpec) -> Verdict:
    """SO(2)-degree existence theorem for f'(inf) < 0."""
    _require_nonresonant(p)
    lam0 = _require_lambda0(p.domain)
    applies, witness = False, {}
    if p.slope_inf < 0:
        for i in _zplus(p):
            if p.zeros[i].slope > lam0:
                applies = True
                witness = {"z0": p.zeros[i].value, "z0_slope": p.zeros[i].slope, "lambda0": lam0}
                break
    notes = () if p.slope_inf < 0 else ("requires f'(inf) < 0",)
    report = problem_index(p)
    return Verdict("SO2-existence-1", applies, witness, _grad_crosscheck(report), notes, report)


def check_so2_2(p: ProblemSpec) -> Verdict:
    """SO(2)-degree existence theorem for f'(inf) > 0 with nu(f'(inf)) odd."""
    _require_nonresonant(p)
    lam0 = _require_lambda0(p.domain)
    applies, witness, notes = False, {}, ()
    if p.slope_inf > 0 and not _nu_even(p.domain, p.slope_inf):
        pool = [(p.zeros[i].value, p.zeros[i].slope) for i in _zplus(p)]
        w = _so2_alternatives(p, lam0, p.slope_inf, pool)
        if w is not None:
            applies, witness = True, dict(w, lambda0=lam0)
    else:
        notes = ("requires f'(inf) > 0 and nu(f'(inf)) odd",)
    report = problem_index(p)
    return Verdict("SO2-existence-2", applies, witness, _grad_crosscheck(report), notes, report)


def check_so2_3(p: ProblemSpec) -> Verdict:
    """SO(2)-degree existence theorem for f'(inf) > 0 with nu(f'(inf)) even."""
    _require_nonresonant(p)
    lam0 = _require_lambda0(p.domain)
    applies, witness, notes = False, {}, ()
    if p.slope_inf > 0 and _nu_even(p.domain, p.slope_inf):
        zplus = _zplus(p)
        for i in zplus:
            z0 = p.zeros[i]
            if not _nu_even(p.domain, z0.slope):
                continue
            pool = [(p.zeros[j].value, p.zeros[j].slope) for j in zplus if j != i]
            pool.append(("inf", p.slope_inf))
            w = _so2_alternatives(p, lam0, z0.slope, pool)
            if w is not None:
                # rename so that z0 is the even zero and z1, z2 the pool members
                renamed = {"alternative": w["alternative"], "z0": z0.value, "z0_slope": z0.slope}
                for src, dst in (("z0", "z1"), ("z1", "z2")):
                    if src in w:
                        renamed[dst] = w[src]
                        renamed[dst + "_slope"] = w[src + "_slope"]
                for key in ("lambda_i0", "k_prime", "rep"):
                    if key in w:
                        renamed[key] = w[key]
                applies, witness = True, dict(renamed, lambda0=lam0)
                break
    else:
        notes = ("requires f'(inf) > 0 and nu(f'(inf)) even",)
    report = problem_index(p)
    return Verdict("SO2-existence-3", applies, witness, _grad_crosscheck(report), notes, report)


# --------------------------------------------------------------------------
# existence in the degenerate case


def _eigenspace(d: DomainSpec, slope: float, override: SO2Rep | None) -> SO2Rep | None:
    line = resonant_line(d, slope)
    if line is None:
        return None
    return override if override is not None else line.rep


def check_degenerate(p: ProblemSpec) -> Verdict:
    """Existence theorem allowing resonant slopes, plus its remark variant."""
    d = p.domain
    points = [(z.value, z.slope, _eigenspace(d, z.slope, z.rep)) for z in p.zeros]
    points.append(("inf", p.slope_inf, _eigenspace(d, p.slope_inf, None)))
    diagnostics: list[str] = []
    witness = None
    for idx, (label, s0, e0) in enumerate(points):
        others = [pt for j, pt in enumerate(points) if j != idx]
        top_other = max((s for _, s, _ in others), default=-math.inf)
        for line, k in _candidates(d, s0, top_other):
            # (1) z0 non-resonant, or its kernel has no fixed vectors and no isotropy k'
            if e0 is not None and (fixed_subspace(e0).dimension or has_isotropy_exactly(e0, k)):
                diagnostics.append(f"z0={label}: condition (1) fails for k'={k}")
                continue
            below = rep_below(d, line.eigenvalue)
            below_lines = lines_between(d, -1.0, line.eigenvalue)
            cond4 = not any(has_isotropy_exactly(ln.rep, k) for ln in below_lines)
            if cond4:
                witness = {"conditions": "theorem", "z0": label, "z0_slope": s0}
            elif not contains_mode(below, k):
                # the remark: k' absent below and no isotropy k' at resonant points
                resonant_ok = all(
                    e is None or not has_isotropy_exactly(e, k) for _, _, e in others
                )
                if resonant_ok:
                    witness = {"conditions": "remark", "z0": label, "z0_slope": s0}
            if witness is not None:
                witness.update(lambda_i0=line.eigenvalue, k_prime=k, rep=str(line.rep))
                break
        if witness is not None:
            break
    report = problem_index(p)
    if witness is None:
        return Verdict(
            "degenerate-existence", False, {}, _grad_crosscheck(report), tuple(dict.fromkeys(diagnostics)), report
        )
    k = witness["k_prime"]
    cross = _coordinate_crosscheck(report, k)
    return Verdict("degenerate-existence", True, witness, cross, (), report)


def _candidates(d: DomainSpec, s0: float, top_other: float):
    """Lines strictly between the other slopes and s0, with each of their modes."""
    if s0 <= 0:
        return
    for line in lines_between(d, top_other, s0):
        if line.eigenvalue <= top_other:
            continue
        for k in line.rep.modes:
            yield line, k


def _coordinate_crosscheck(report: IndexReport, k: int) -> TriState:
    v = report.grad_total.get(k)
    if v is None:
        return partial_is_nonzero(report.grad_total)
    return TriState.YES if v != 0 else partial_is_nonzero(report.grad_total)


# --------------------------------------------------------------------------
# continuation


def check_continuation(p: ProblemSpec, existence: Sequence[Verdict] | None = None) -> Verdict:
    """Continuation of the nonconstant solutions of f(., 0) into a family.

    Holds whenever one of the existence theorems holds for f(., 0); the
    witness names which one.
    """
    if existence is None:
        existence = _existence_verdicts(p)
    for v in existence:
        if v.applies:
            return Verdict("continuation", True, {"via": v.theorem_id}, v.index_crosscheck, (), v.report)
    return Verdict("continuation", False, {}, TriState.UNDETERMINED, ("no existence theorem applies at lambda = 0",))


# --------------------------------------------------------------------------
# bifurcation from infinity


def bif_index(p: ProblemSpec) -> tuple[EulerElement, bool, dict[str, Any]]:
    """BIF(inf, [lambda-, lambda+]) with the nontriviality criterion trace."""
    fam = p.family
    if fam is None:
        raise ValueError("problem has no parameter family")
    d = p.domain
    for s in (fam.slope_minus, fam.slope_plus):
        if resonant_line(d, s):
            raise ResonantSlope(f"slope {s} at an endpoint of the parameter range is resonant")
    element = grad_linear_degree(d, fam.slope_plus) - grad_linear_degree(d, fam.slope_minus)
    between = lines_between(d, fam.slope_minus, fam.slope_plus)
    rep = direct_sum(*(ln.rep for ln in between))
    nontrivial = next((ln for ln in between if is_nontrivial(ln.rep)), None)
    criterion = nontrivial is not None or rep.dimension % 2 == 1
    nonzero = not element.is_zero()
    if nonzero != criterion:
        raise ConsistencyError(f"BIF = {element} disagrees with the eigenspace criterion over {rep}")
    witness = {
        "lines_between": [ln.eigenvalue for ln in between],
        "rep_between": str(rep),
        "dimension_between": rep.dimension,
        "nontrivial_line": nontrivial.eigenvalue if nontrivial is not None else None,
        "odd_dimension": rep.dimension % 2 == 1,
    }
    return element, nonzero, witness


def check_bif_infinity(p: ProblemSpec) -> Verdict:
    element, nonzero, witness = bif_index(p)
    witness = dict(witness, bif=str(element))
    cross = TriState.YES if nonzero else TriState.NO
    return Verdict("bif-infinity", nonzero, witness, cross)


def _crossings(d: DomainSpec, fam: Family) -> list[tuple[float, SpectralLine]]:
    """Sampled crossings of f'(inf, lambda) with the spectrum on the range."""
    lams = np.linspace(fam.lambda_minus, fam.lambda_plus, max(fam.samples, 2))
    vals = np.array([fam.slope_fn(float(x)) for x in lams])
    if not np.all(np.isfinite(vals)):
        raise ValueError("slope at infinity is not finite on the parameter range")
    lines = spectrum(d, float(np.max(vals)) + 1.0) if np.max(vals) > 0 else spectrum(d, 1.0)
    hits: list[tuple[int, SpectralLine]] = []
    for line in lines:
        e = line.eigenvalue
        lo = np.minimum(vals[:-1], vals[1:])
        hi = np.maximum(vals[:-1], vals[1:])
        cells = np.nonzero((lo <= e) & (e <= hi))[0]
        if cells.size == 0:
            continue
        # a crossing at a grid node touches two adjacent cells; more is not isolated
        groups = np.split(cells, np.nonzero(np.diff(cells) > 1)[0] + 1)
        for g in groups:
            if g.size > 2:
                raise MultipleCrossings(f"f'(inf, lambda) stays at {e:g} on a whole interval")
            hits.append((int(g[0]), line))
    out = []
    for cell, line in hits:
        a, b = float(lams[cell]), float(lams[cell + 1])
        g = lambda x: fam.slope_fn(x) - line.eigenvalue  # noqa: E731
        ga, gb = g(a), g(b)
        if ga == 0.0:
            root = a
        elif gb == 0.0:
            root = b
        elif ga * gb < 0:
            root = brentq(g, a, b, xtol=1e-14)
        else:
            # the slope touches the eigenvalue inside the cell without crossing
            root = a if abs(ga) < abs(gb) else b
        out.append((root, line))
    return out


def check_bif_meets(p: ProblemSpec) -> Verdict:
    """Unbounded continuum meeting (inf, lambda0) at an isolated crossing."""
    fam = p.family
    if fam is None:
        raise ValueError("problem has no parameter family")
    d = p.domain
    notes: list[str] = []
    if fam.slope_fn is not None:
        found = _crossings(d, fam)
        distinct = {round(r, 9) for r, _ in found}
        if len(distinct) > 1:
            raise MultipleCrossings(
                "f'(inf, lambda) meets the spectrum at lambda = "
                + ", ".join(f"{r:g}" for r in sorted(distinct))
            )
        if not found:
            return Verdict("bif-meets", False, {}, TriState.NO, ("no crossing on the parameter range",))
        lam_0, line = found[0]
    else:
        if fam.lambda0 is None:
            return Verdict(
                "bif-meets", False, {}, TriState.UNDETERMINED, ("no slope function and no attested crossing",)
            )
        between = lines_between(d, fam.slope_minus, fam.slope_plus)
        if len(between) != 1:
            raise MultipleCrossings(f"{len(between)} eigenvalues lie between the endpoint slopes")
        lam_0, line = fam.lambda0, between[0]
        notes.append("isolated crossing attested, not sampled")
    e = line.rep
    applies = is_nontrivial(e) or e.dimension % 2 == 1
    witness = {
        "lambda0": lam_0,
        "eigenvalue": line.eigenvalue,
        "rep": str(e),
        "nontrivial": is_nontrivial(e),
        "odd_dimension": e.dimension % 2 == 1,
    }
    cross = TriState.UNDETERMINED
    if not (resonant_line(d, fam.slope_minus) or resonant_line(d, fam.slope_plus)):
        element, nonzero, _ = bif_index(p)
        witness["bif"] = str(element)
        cross = TriState.YES if nonzero else TriState.NO
    else:
        notes.append("endpoint slope resonant; BIF not computed")
    return Verdict("bif-meets", applies, witness, cross, tuple(notes))


# --------------------------------------------------------------------------
# driver


def configuration_notes(p: ProblemSpec) -> list[str]:
    """Diagnostics for zero sets that no asymptotically linear f can produce.

    A C^1 function with only simple zeros changes sign at each of them, so
    their slopes alternate in sign, and the outermost ones share the sign
    of f'(inf) when it is nonzero.
    """
    notes = []
    slopes = [z.slope for z in sorted(p.zeros, key=lambda z: z.value)]
    if p.slope_inf != 0 and not slopes:
        notes.append("f'(inf) != 0 forces a sign change of f, but no zeros were given")
    if any(s == 0 for s in slopes):
        return notes
    signs = [1 if s > 0 else -1 for s in slopes]
    if any(a == b for a, b in zip(signs, signs[1:])):
        notes.append("consecutive zeros have slopes of the same sign")
    if signs and p.slope_inf != 0:
        want = 1 if p.slope_inf > 0 else -1
        if signs[0] != want or signs[-1] != want:
            notes.append("outermost zeros do not share the sign of f'(inf)")
    return notes


def _existence_verdicts(p: ProblemSpec) -> list[Verdict]:
    out: list[Verdict] = []
    resonant = _resonant_points(p)
    if resonant:
        note = ("resonant slopes: " + ", ".join(resonant),)
        out.append(Verdict("LS-existence", False, {}, TriState.UNDETERMINED, note))
    else:
        out.append(check_ls(p))
    try:
        lambda0(p.domain)
        has_lam0 = True
    except NotFound:
        has_lam0 = False
    for tid, fn in (
        ("SO2-existence-1", check_so2_1),
        ("SO2-existence-2", check_so2_2),
        ("SO2-existence-3", check_so2_3),
    ):
        if not has_lam0:
            out.append(Verdict(tid, False, {}, TriState.UNDETERMINED, ("domain has only trivial eigenspaces",)))
        elif resonant:
            out.append(Verdict(tid, False, {}, TriState.UNDETERMINED, ("resonant slopes: " + ", ".join(resonant),)))
        else:
            out.append(fn(p))
    out.append(check_degenerate(p))
    return out


def check_all(p: ProblemSpec) -> list[Verdict]:
    """Run every checker that applies to ``p`` and verify them against the indices."""
    extra = tuple(configuration_notes(p))
    verdicts = _existence_verdicts(p)
    verdicts.append(check_continuation(p, verdicts))
    if p.family is not None:
        fam = p.family
        if resonant_line(p.domain, fam.slope_minus) or resonant_line(p.domain, fam.slope_plus):
            verdicts.append(
                Verdict("bif-infinity", False, {}, TriState.UNDETERMINED, ("endpoint slope resonant",))
            )
        else:
            verdicts.append(check_bif_infinity(p))
        if fam.slope_fn is not None or fam.lambda0 is not None:
            try:
                verdicts.append(check_bif_meets(p))
            except MultipleCrossings as exc:
                verdicts.append(Verdict("bif-meets", False, {}, TriState.UNDETERMINED, (str(exc),)))
    out = []
    for v in verdicts:
        notes = v.notes + extra
        if v.applies and v.index_crosscheck is TriState.NO:
            msg = f"{v.theorem_id} applies with witness {v.witness} but its degree vanishes"
            if not extra:
                raise ConsistencyError(msg)
            # the zero set is not realisable, so the degree identity need not hold
            notes += (msg,)
        out.append(Verdict(v.theorem_id, v.applies, v.witness, v.index_crosscheck, notes, v.report))
    return out
