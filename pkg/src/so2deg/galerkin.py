"""Spectral-Galerkin discretisation of -Lap u = f(u, lambda) with Neumann conditions.

The unknown is expanded in the L2-orthonormal Neumann eigenfunctions
phi_m, so the stiffness is diagonal.  The nonlinearity is handled
pseudo-spectrally: u is synthesised on quadrature nodes, f is applied
pointwise and the result projected back:

    R_m(c) = lambda_m c_m - sum_i w_i f(u_i) phi_m(x_i),
    J(c)   = diag(lambda_m) - Phi^T diag(w f_u(u)) Phi.

R is the exact gradient of the discrete energy
1/2 sum lambda_m c_m^2 - sum_i w_i F(u_i) with F(t) = int_0^t f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bessel import bessel_j, bessel_prime_zero, bessel_prime_zeros_below
from .exprlang import Expr, diff, evaluate, parse
from .spectra import Disc, DomainSpec, Interval

__all__ = [
    "UnsupportedDomain",
    "NoConvergence",
    "SingularJacobian",
    "StepUnderflow",
    "GalerkinBasis",
    "BranchPoint",
    "Branch",
    "build_basis",
    "synthesize",
    "residual",
    "jacobian",
    "residual_lambda",
    "energy",
    "newton_solve",
    "constant_coeffs",
    "find_nonconstant",
    "continue_branch",
    "detect_blowup",
    "smallest_singular_value",
    "scan_singular",
    "rotate",
    "angular_content",
]


class UnsupportedDomain(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


class SingularJacobian(RuntimeError):
    pass


class StepUnderflow(RuntimeError):
    def __init__(self, message: str, branch: "Branch | None" = None):
        super().__init__(message)
        self.branch = branch


# --------------------------------------------------------------------------
# basis


@dataclass(frozen=True, eq=False)
class GalerkinBasis:
    domain: DomainSpec
    eigenvalues: np.ndarray
    labels: tuple
    nodes: np.ndarray  # (n_nodes, dim): x on the interval, (r, theta) on the disc
    weights: np.ndarray
    phi: np.ndarray  # (n_nodes, n_modes) basis values at the nodes
    norms: np.ndarray  # normalisation constant of each mode
    measure: float  # |Omega|

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    def gram(self) -> np.ndarray:
        return self.phi.T @ (self.phi * self.weights[:, None])


def _composite_gauss(a: float, b: float, n_points: int, per_panel: int = 16):
    panels = max(1, math.ceil(n_points / per_panel))
    x, w = leggauss(per_panel)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _interval_basis(domain: Interval, n_modes: int, quad_order: int | None) -> GalerkinBasis:
    L = domain.length
    if quad_order is None:
        quad_order = 8 * n_modes + 16
    if quad_order < 2 * n_modes:
        raise ValueError("quad_order must be at least twice the number of modes")
    x, w = _composite_gauss(0.0, L, quad_order)
    n = np.arange(n_modes)
    norms = np.where(n == 0, math.sqrt(1.0 / L), math.sqrt(2.0 / L))
    phi = norms[None, :] * np.cos(np.pi * x[:, None] * n[None, :] / L)
    eig = (n * math.pi / L) ** 2
    return GalerkinBasis(domain, eig, tuple((int(k),) for k in n), x[:, None], w, phi, norms, L)


def _disc_modes(n_modes, lambda_max, k_max, n_max) -> list[tuple[int, int, float]]:
    """(k, n, x_kn) for the retained radial/angular pairs, ascending in x."""
    if k_max is not None or n_max is not None:
        if k_max is None or n_max is None:
            raise ValueError("k_max and n_max go together")
        out = [(0, n, bessel_prime_zero(0, n)) for n in range(n_max + 1)]
        out += [(k, n, bessel_prime_zero(k, n)) for k in range(1, k_max + 1) for n in range(1, n_max + 1)]
    else:
        if lambda_max is None:
            if n_modes is None:
                raise ValueError("give n_modes, lambda_max or (k_max, n_max)")
            # grow the cutoff until enough functions are below it
            lambda_max = 16.0
            while True:
                cand = _disc_modes(None, lambda_max, None, None)
                if sum(1 if k == 0 else 2 for k, _, _ in cand) >= n_modes:
                    break
                lambda_max *= 2
            cand.sort(key=lambda t: t[2])
            out, count = [], 0
            for item in cand:
                if count >= n_modes:
                    break
                out.append(item)
                count += 1 if item[0] == 0 else 2
            return out
        xmax = math.sqrt(lambda_max)
        out = [(0, 0, 0.0)]
        k = 0
        while True:
            zs = bessel_prime_zeros_below(k, xmax)
            if zs.size == 0 and k > 0:
                break
            out += [(k, n, float(x)) for n, x in enumerate(zs, start=1)]
            k += 1
    out.sort(key=lambda t: (t[2], t[0]))
    return out


def _disc_basis(
    n_modes, quad_order, lambda_max, k_max, n_max, radial_points, angular_points
) -> GalerkinBasis:
    pairs = _disc_modes(n_modes, lambda_max, k_max, n_max)
    kmax = max(k for k, _, _ in pairs)
    nmax = max(n for _, n, _ in pairs)
    xmax = max(x for _, _, x in pairs)
    if radial_points is None:
        radial_points = max(2 * nmax + 8, int(1.5 * xmax) + 24)
        if quad_order is not None:
            radial_points = max(radial_points, quad_order)
    if angular_points is None:
        angular_points = max(4 * kmax + 4, 64)
    t, wt = leggauss(radial_points)
    r = 0.5 * (t + 1.0)
    wr = 0.5 * wt * r
    theta = 2.0 * np.pi * np.arange(angular_points) / angular_points
    wtheta = 2.0 * np.pi / angular_points
    R, TH = np.meshgrid(r, theta, indexing="ij")
    nodes = np.column_stack([R.ravel(), TH.ravel()])
    weights = (wr[:, None] * np.full(angular_points, wtheta)[None, :]).ravel()
    cols, eig, labels, norms = [], [], [], []
    for k, n, x in pairs:
        radial = bessel_j(k, x * r) if x > 0 else np.ones_like(r)
        if x > 0:
            jx = bessel_j(k, x)
            radial_norm2 = 0.5 * (1.0 - (k * k) / (x * x)) * jx * jx
        else:
            radial_norm2 = 0.5
        if k == 0:
            c = 1.0 / math.sqrt(2.0 * math.pi * radial_norm2)
            cols.append(c * np.repeat(radial, angular_points))
            eig.append(x * x)
            labels.append((0, n, "c"))
            norms.append(c)
        else:
            c = 1.0 / math.sqrt(math.pi * radial_norm2)
            for kind, trig in (("c", np.cos), ("s", np.sin)):
                cols.append(c * (radial[:, None] * trig(k * theta)[None, :]).ravel())
                eig.append(x * x)
                labels.append((k, n, kind))
                norms.append(c)
    phi = np.column_stack(cols)
    return GalerkinBasis(
        Disc(), np.array(eig), tuple(labels), nodes, weights, phi, np.array(norms), math.pi
    )


def build_basis(
    domain: DomainSpec,
    n_modes: int | None = None,
    quad_order: int | None = None,
    *,
    lambda_max: float | None = None,
    k_max: int | None = None,
    n_max: int | None = None,
    radial_points: int | None = None,
    angular_points: int | None = None,
) -> GalerkinBasis:
    """Orthonormal Neumann eigenbasis with its quadrature.

    On the interval ``n_modes`` cosines are used.  On the disc the modes
    are chosen by ``n_modes`` (rounded up to whole cos/sin pairs), by an
    eigenvalue cutoff ``lambda_max`` or by index bounds ``k_max``/``n_max``.
    """
    if isinstance(domain, Interval):
        if n_modes is None or n_modes < 1:
            raise ValueError("n_modes must be a positive integer on the interval")
        return _interval_basis(domain, n_modes, quad_order)
    if isinstance(domain, Disc):
        return _disc_basis(n_modes, quad_order, lambda_max, k_max, n_max, radial_points, angular_points)
    raise UnsupportedDomain(f"no Galerkin solver for {domain}")


# --------------------------------------------------------------------------
# discrete operators


@dataclass(frozen=True, eq=False)
class _Nonlinearity:
    f: Expr
    fu: Expr
    flam: Expr


_nl_cache: dict[Expr, _Nonlinearity] = {}


def _nl(f: Expr | str) -> _Nonlinearity:
    e = parse(f) if isinstance(f, str) else f
    got = _nl_cache.get(e)
    if got is None:
        got = _Nonlinearity(e, diff(e, "u"), diff(e, "lambda"))
        _nl_cache[e] = got
    return got


def _field(e: Expr, u: np.ndarray, lam: float) -> np.ndarray:
    return np.broadcast_to(evaluate(e, u, lam), u.shape)


def synthesize(basis: GalerkinBasis, coeffs) -> np.ndarray:
    return basis.phi @ np.asarray(coeffs, dtype=float)


def _project(basis: GalerkinBasis, values: np.ndarray) -> np.ndarray:
    return basis.phi.T @ (basis.weights * values)


def residual(basis: GalerkinBasis, coeffs, lam: float, f: Expr | str) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    u = synthesize(basis, c)
    return basis.eigenvalues * c - _project(basis, _field(_nl(f).f, u, lam))


def jacobian(basis: GalerkinBasis, coeffs, lam: float, f: Expr | str) -> np.ndarray:
    u = synthesize(basis, coeffs)
    fu = _field(_nl(f).fu, u, lam)
    return np.diag(basis.eigenvalues) - basis.phi.T @ (basis.phi * (basis.weights * fu)[:, None])


def residual_lambda(basis: GalerkinBasis, coeffs, lam: float, f: Expr | str) -> np.ndarray:
    """Partial derivative of the residual in lambda."""
    u = synthesize(basis, coeffs)
    return -_project(basis, _field(_nl(f).flam, u, lam))


_GL_X, _GL_W = leggauss(48)


def _antiderivative(e: Expr, u: np.ndarray, lam: float) -> np.ndarray:
    """F(u) = int_0^u f(s) ds per node by 48-point Gauss-Legendre on [0, u]."""
    s = 0.5 * u[:, None] * (_GL_X[None, :] + 1.0)
    vals = _field(e, s.ravel(), lam).reshape(s.shape)
    return 0.5 * u * (vals @ _GL_W)


def energy(basis: GalerkinBasis, coeffs, lam: float, f: Expr | str) -> float:
    c = np.asarray(coeffs, dtype=float)
    u = synthesize(basis, c)
    return float(0.5 * np.sum(basis.eigenvalues * c * c) - basis.weights @ _antiderivative(_nl(f).f, u, lam))


def constant_coeffs(basis: GalerkinBasis, z: float) -> np.ndarray:
    """Coefficients of the constant function z."""
    c = np.zeros(basis.size)
    c[0] = z * math.sqrt(basis.measure)
    return c


# --------------------------------------------------------------------------
# Newton


@dataclass(frozen=True, eq=False)
class BranchPoint:
    lam: float
    coeffs: np.ndarray
    l2_norm: float
    h1_norm: float
    residual_inf: float
    newton_iters: int


def _point(basis, c, lam, res, iters) -> BranchPoint:
    return BranchPoint(
        float(lam),
        np.array(c, dtype=float),
        float(np.linalg.norm(c)),
        float(np.sqrt(np.sum((1.0 + basis.eigenvalues) * c * c))),
        float(np.max(np.abs(res))),
        int(iters),
    )


def _solve(J: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # least squares copes with the rotation null direction of nonradial disc states
    if not np.all(np.isfinite(J)):
        raise SingularJacobian("Jacobian has non-finite entries")
    step, *_ = np.linalg.lstsq(J, rhs, rcond=1e-13)
    return step


def newton_solve(
    basis: GalerkinBasis,
    coeffs0,
    lam: float,
    f: Expr | str,
    tol: float = 1e-10,
    max_iters: int = 25,
    deflate: Sequence[np.ndarray] = (),
    deflate_power: float = 2.0,
    deflate_shift: float = 1.0,
) -> BranchPoint:
    """Damped Newton iteration, optionally deflated away from known solutions.

    Deflation multiplies the residual by prod_j (|c - d_j|^-p + shift), which
    keeps the iteration from converging back to each ``d_j``; convergence is
    still judged on the undeflated residual.
    """
    c = np.array(coeffs0, dtype=float)
    deflate = [np.asarray(d, dtype=float) for d in deflate]
    res = residual(basis, c, lam, f)
    rnorm = np.max(np.abs(res))
    for it in range(max_iters + 1):
        if rnorm <= tol:
            return _point(basis, c, lam, res, it)
        if it == max_iters:
            break
        J = jacobian(basis, c, lam, f)
        step = _solve(J, -res)
        if deflate:
            # Sherman-Morrison form of the deflated Newton step
            g = np.zeros_like(c)
            for d in deflate:
                diff_ = c - d
                dist2 = float(diff_ @ diff_)
                if dist2 == 0.0:
                    raise NoConvergence("iterate coincides with a deflated solution")
                m = dist2 ** (-deflate_power / 2) + deflate_shift
                g += -deflate_power * dist2 ** (-deflate_power / 2 - 1) * diff_ / m
            denom = 1.0 - float(g @ step)
            if abs(denom) > 1e-12:
                step = step / denom
        # backtracking on the residual norm
        t = 1.0
        while True:
            trial = c + t * step
            try:
                tres = residual(basis, trial, lam, f)
                tnorm = np.max(np.abs(tres))
            except ArithmeticError:
                tnorm = np.inf
            if tnorm < rnorm or t < 1e-3 or (deflate and t <= 0.25 and np.isfinite(tnorm)):
                break
            t *= 0.5
        if not np.isfinite(tnorm):
            raise NoConvergence("residual became non-finite")
        c, res, rnorm = trial, tres, tnorm
    raise NoConvergence(f"residual {rnorm:.3e} after {max_iters} iterations")


# --------------------------------------------------------------------------
# nonconstant solutions


def find_nonconstant(
    basis: GalerkinBasis,
    p,
    seeds: Iterable | None = None,
    eps: Sequence[float] = (0.1, 0.02, 0.5),
    tol: float = 1e-10,
    max_iters: int = 60,
) -> list[BranchPoint]:
    """Look for nonconstant solutions near the constant zeros of ``p``.

    ``p`` is a checker ProblemSpec carrying ``expr``.  By default every
    constant zero z is perturbed along each mode with 0 < lambda_m < f'(z)
    (cosine modes only on the disc, the sine ones being rotations);
    ``seeds`` may instead list (zero_index, mode_index) pairs or explicit
    coefficient vectors.  Newton runs deflated against the constants.
    """
    if p.expr is None:
        raise ValueError("problem has no expression")
    f = parse(p.expr)
    consts = [constant_coeffs(basis, z.value) for z in p.zeros]
    starts: list[np.ndarray] = []
    if seeds is None:
        for zi, z in enumerate(p.zeros):
            for m in range(basis.size):
                lam_m = basis.eigenvalues[m]
                if not 0 < lam_m < z.slope:
                    continue
                if isinstance(basis.domain, Disc) and basis.labels[m][2] == "s":
                    continue
                for e in eps:
                    starts.append(consts[zi] + e * np.eye(basis.size)[m])
    else:
        for s in seeds:
            if isinstance(s, tuple) and len(s) == 2 and all(isinstance(v, (int, np.integer)) for v in s):
                zi, m = s
                for e in eps:
                    starts.append(consts[zi] + e * np.eye(basis.size)[m])
            else:
                starts.append(np.asarray(s, dtype=float))
    found: list[BranchPoint] = []
    for c0 in starts:
        try:
            pt = newton_solve(basis, c0, 0.0, f, tol=tol, max_iters=max_iters, deflate=consts)
        except (NoConvergence, SingularJacobian, ArithmeticError):
            continue
        if any(np.linalg.norm(pt.coeffs - c) <= 1e-3 for c in consts):
            continue
        if any(np.linalg.norm(pt.coeffs - q.coeffs) <= 1e-4 for q in found):
            continue
        found.append(pt)
    return found


# --------------------------------------------------------------------------
# continuation


class Branch(list):
    """Ordered BranchPoints with the reason the continuation stopped."""

    def __init__(self, points=(), termination: str = "", events=()):
        super().__init__(points)
        self.termination = termination
        self.events = list(events)


def _augmented(basis, y, lam, f):
    J = jacobian(basis, y, lam, f)
    Rl = residual_lambda(basis, y, lam, f)
    return np.column_stack([J, Rl])


def _tangent(A: np.ndarray, prev: np.ndarray | None, direction: float):
    _, s, vt = np.linalg.svd(A)
    t = vt[-1]
    if prev is not None:
        if t @ prev < 0:
            t = -t
    elif t[-1] * direction < 0 or (t[-1] == 0 and direction < 0):
        t = -t
    # s has n entries for the n x (n+1) matrix; a second small one means a
    # two-dimensional kernel, i.e. the branch is not locally a curve
    degenerate = s.size >= 1 and s[-1] < 1e-8 * max(1.0, s[0])
    return t, degenerate


def continue_branch(
    basis: GalerkinBasis,
    f: Expr | str,
    start: BranchPoint,
    lambda_range: tuple[float, float],
    step: float,
    tol: float = 1e-10,
    relative_tol: bool = False,
    norm_cap: float = math.inf,
    max_points: int = 2000,
    max_corrector: int = 12,
    min_step: float = 1e-6,
) -> Branch:
    """Pseudo-arclength continuation from ``start`` toward ``lambda_range[1]``.

    Stops when lambda leaves the range, the H1 norm passes ``norm_cap``, the
    step underflows ``min_step`` or ``max_points`` is reached.  With
    ``relative_tol`` the corrector tolerance is ``tol * max(1, |c|)``, which
    large-norm branches need because the residual carries the scale of f.
    """
    f = _nl(f).f
    lo, hi = sorted(lambda_range)
    direction = 1.0 if lambda_range[1] >= lambda_range[0] else -1.0
    h_max = step
    h = step
    y = np.append(start.coeffs, start.lam)
    branch = Branch([start])
    tangent, degenerate = _tangent(_augmented(basis, start.coeffs, start.lam, f), None, direction)
    if degenerate:
        branch.termination = "degenerate"
        branch.events.append(("degenerate", start.lam))
        return branch
    n = basis.size
    while len(branch) < max_points:
        pred = y + h * tangent
        z = pred.copy()
        ok = False
        for it in range(1, max_corrector + 1):
            c, lam = z[:n], z[n]
            try:
                R = residual(basis, c, lam, f)
                A = _augmented(basis, c, lam, f)
            except ArithmeticError:
                break
            arc = tangent @ (z - pred)
            F = np.append(R, arc)
            scale = tol * max(1.0, float(np.linalg.norm(c))) if relative_tol else tol
            if np.max(np.abs(R)) <= scale and abs(arc) <= 1e-8 * max(1.0, h):
                ok = True
                break
            M = np.vstack([A, tangent])
            try:
                dz = np.linalg.solve(M, -F)
            except np.linalg.LinAlgError:
                break
            z = z + dz
            if not np.all(np.isfinite(z)):
                break
        if not ok:
            h *= 0.5
            if h < min_step:
                branch.termination = "step_underflow"
                if len(branch) == 1:
                    raise StepUnderflow("no continuation step succeeded", branch)
                return branch
            continue
        c, lam = z[:n], z[n]
        pt = _point(basis, c, lam, residual(basis, c, lam, f), it)
        if pt.lam < lo or pt.lam > hi:
            branch.termination = "range"
            return branch
        branch.append(pt)
        if pt.h1_norm > norm_cap:
            branch.termination = "norm_cap"
            return branch
        new_t, degenerate = _tangent(A, tangent, direction)
        if degenerate:
            branch.events.append(("degenerate", pt.lam))
            branch.termination = "degenerate"
            return branch
        tangent = new_t
        y = z
        if it <= 3:
            h = min(h * 1.3, h_max)
    branch.termination = "max_points"
    return branch


def detect_blowup(branch: Sequence[BranchPoint], norm_cap: float = 1e3) -> float | None:
    """Extrapolate lambda where 1/|u|_H1 reaches 0 once the branch passes ``norm_cap``."""
    if not branch:
        raise ValueError("empty branch")
    big = [i for i, pt in enumerate(branch) if pt.h1_norm > norm_cap]
    if not big:
        return None
    i = big[0]
    if i == 0:
        return branch[0].lam
    a, b = branch[i - 1], branch[i]
    ia, ib = 1.0 / a.h1_norm, 1.0 / b.h1_norm
    if ia == ib:
        return b.lam
    return b.lam - ib * (b.lam - a.lam) / (ib - ia)


# --------------------------------------------------------------------------
# linear spectrum and symmetry


def smallest_singular_value(basis: GalerkinBasis, coeffs, lam: float, f: Expr | str) -> float:
    return float(np.linalg.svd(jacobian(basis, coeffs, lam, f), compute_uv=False)[-1])


def _inertia(basis, coeffs, lam, f) -> int:
    J = jacobian(basis, coeffs, lam, f)
    return int(np.sum(np.linalg.eigvalsh(0.5 * (J + J.T)) < 0))


def scan_singular(
    basis: GalerkinBasis,
    f: Expr | str,
    coeffs,
    lam_range: tuple[float, float],
    grid: int = 200,
    xtol: float = 1e-12,
) -> list[tuple[float, int]]:
    """Parameters where J(coeffs, lambda) is singular, with kernel dimension.

    Located as jumps of the Jacobian inertia (negative-eigenvalue count),
    refined by bisection.
    """
    lams = np.linspace(lam_range[0], lam_range[1], grid + 1)
    counts = [_inertia(basis, coeffs, x, f) for x in lams]
    out = []
    for i in range(grid):
        if counts[i] == counts[i + 1]:
            continue
        a, b, ca = lams[i], lams[i + 1], counts[i]
        while b - a > xtol * max(1.0, abs(a)):
            m = 0.5 * (a + b)
            if _inertia(basis, coeffs, m, f) == ca:
                a = m
            else:
                b = m
        out.append((0.5 * (a + b), abs(counts[i + 1] - ca)))
    return out


def rotate(basis: GalerkinBasis, coeffs, alpha: float) -> np.ndarray:
    """Coefficients of u(r, theta - alpha) on the disc."""
    if not isinstance(basis.domain, Disc):
        raise UnsupportedDomain("rotation is defined on the disc only")
    c = np.array(coeffs, dtype=float)
    out = c.copy()
    index = {lab: i for i, lab in enumerate(basis.labels)}
    for (k, n, kind), i in index.items():
        if k == 0 or kind != "c":
            continue
        j = index[(k, n, "s")]
        a, b = c[i], c[j]
        ca, sa = math.cos(k * alpha), math.sin(k * alpha)
        out[i] = a * ca - b * sa
        out[j] = a * sa + b * ca
    return out


def angular_content(basis: GalerkinBasis, coeffs) -> dict[int, float]:
    """L2 norm of the part of u at each angular mode k."""
    if not isinstance(basis.domain, Disc):
        raise UnsupportedDomain("angular content is defined on the disc only")
    c = np.asarray(coeffs, dtype=float)
    acc: dict[int, float] = {}
    for (k, _, _), v in zip(basis.labels, c):
        acc[k] = acc.get(k, 0.0) + v * v
    return {k: math.sqrt(v) for k, v in sorted(acc.items())}
