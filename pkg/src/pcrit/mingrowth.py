"""Minimal growth at the far end of the domain: exhaustion limits with
prescribed inner traces, point-singularity profiles and their exponents,
removability tests, and the variational certificate that a positive
solution has minimal growth.

The objects here are limits over a growing family of levels.  u^K is the
monotone limit of Dirichlet solves that hold a trace on the boundary of a
compact interval and vanish at the level edge; the point-singularity
profile concentrates a unit forcing bump against a shrinking puncture and
rescales by (p-1)-homogeneity; the certificate minimizes the nonnegative
Picone density of a candidate solution over compactly supported fields
with unit mass on a fixed window, and its decay (or not) along the levels
is the variational signature of minimal growth.

All per-level solves on one side of the compact set share a single master
grid (levels are prefixes of it), so monotonicity in the level is a
nodewise statement about identical unknowns, not an interpolation
artifact.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .energy import phi_p
from .errors import DomainError, PreconditionError, StateError
from .model import (
    CompactSetSpec,
    ExhaustionSchedule,
    Field,
    Grid,
    PotentialSpec,
    RadialProblem,
    build_graded_grid,
)
from .solver import (
    DEFAULT_CONFIG,
    SolverConfig,
    _core_residual,
    classify_sign,
    principal_eigenpair,
    residual_scale,
    smallest_generalized_eigen,
    solve_dirichlet,
    weak_residual,
)

logger = logging.getLogger(__name__)

__all__ = [
    "MinimalGrowthRun",
    "PointSingularityRun",
    "CertificateRun",
    "RemovabilityReport",
    "ComparisonResult",
    "uK_limit",
    "point_singularity_solution",
    "singularity_exponent",
    "removability_test",
    "minimal_growth_certificate",
    "comparison_check",
]


@dataclass(frozen=True)
class MinimalGrowthRun:
    compact: CompactSetSpec
    trace: tuple[float, float]
    levels: tuple[tuple[float, float], ...]
    fields: tuple[Field, ...]  # per level, on the shared master grid
    limit: Field
    monotonicity_log: tuple[float, ...]  # max(u_N - u_{N+1}) per step
    window_gaps: tuple[float, ...]  # max|u_{N+1} - u_N| on the fixed window
    window: tuple[float, float]
    converged: bool
    lambda_1: tuple[float, ...]


@dataclass(frozen=True)
class PointSingularityRun:
    x0: float
    x1: float
    levels: tuple[tuple[float, float], ...]
    fields: tuple[Field, ...]
    limit: Field
    window_gaps: tuple[float, ...]
    converged: bool


@dataclass(frozen=True)
class CertificateRun:
    omega2: CompactSetSpec
    window: tuple[float, float]  # the unit-mass window B
    levels: tuple[tuple[float, float], ...]
    mus: tuple[float, ...]
    masses: tuple[float, ...]  # recorded unit masses of the minimizers
    minimizers: tuple[Field, ...]
    verdict: str  # "decaying-to-zero" | "bounded-away"


@dataclass(frozen=True)
class RemovabilityReport:
    verdict: str  # "removable" | "nonremovable-blowup" | "nonremovable-flux" | "undetermined"
    window_sups: tuple[float, ...]
    flux_residual: float
    residual_scale: float
    gate: float


@dataclass(frozen=True)
class ComparisonResult:
    ok: bool
    max_violation: float


# ---------------------------------------------------------------------------
# u^K limits
# ---------------------------------------------------------------------------

def _master_side(
    problem: RadialProblem,
    inner: float,
    outers: tuple[float, ...],
    resolution: int,
    toward_zero: bool,
) -> Grid:
    """Master grid for one side of the compact set, containing every level
    endpoint as a node so per-level solves are prefix restrictions."""
    far = min(outers) if toward_zero else max(outers)
    near_first = max(outers) if toward_zero else min(outers)
    span = abs(near_first - inner)
    lo, hi = (far, inner) if toward_zero else (inner, far)
    focus = (max(lo, inner - span), inner) if toward_zero else (inner, min(hi, inner + span))
    base = build_graded_grid(problem, (lo, hi), focus, resolution)
    nodes = np.union1d(base.nodes, np.asarray(outers, dtype=float))
    return Grid(nodes, "explicit", problem.weight_exponent)


def _sub_solve(
    problem: RadialProblem,
    master: Grid,
    stop: float,
    boundary: tuple[float | None, float],
    config: SolverConfig,
    from_right: bool,
    initial: np.ndarray | None = None,
):
    """Dirichlet solve on the master-grid prefix (or suffix) ending at
    ``stop``; returns (values on the subgrid, index range, report)."""
    nodes = master.nodes
    if from_right:
        i0 = int(np.searchsorted(nodes, stop))
        sub_nodes = nodes[i0:]
    else:
        i1 = int(np.searchsorted(nodes, stop))
        sub_nodes = nodes[: i1 + 1]
        i0 = 0
    sub = Grid(sub_nodes, "explicit", master.weight_exponent)
    init = None
    if initial is not None:
        vals = initial[i0 : i0 + sub.n]
        init = Field(sub, vals)
    rep = solve_dirichlet(problem, sub, boundary, config=config, initial=init)
    return sub, i0, rep


def uK_limit(
    problem: RadialProblem,
    compact: CompactSetSpec,
    trace: tuple[float, float],
    exhaustion: ExhaustionSchedule,
    resolution: int = 601,
    cauchy_tol: float = 1e-5,
    config: SolverConfig = DEFAULT_CONFIG,
) -> MinimalGrowthRun:
    """Monotone exhaustion limit of Dirichlet solves holding ``trace`` on
    the compact interval's boundary and zero at the level edges.

    All levels on a side live on one master grid, so the per-level fields
    (extended by zero beyond their level and by the trace interpolant
    across the set) are nodewise comparable; the log records the worst
    monotonicity violation at each step.  The principal eigenvalue of each
    level component is checked positive first.
    """
    exhaustion.validate(problem)
    compact.validate(problem)
    k_lo, k_hi = compact.k_lo, compact.k_hi
    t_lo, t_hi = float(trace[0]), float(trace[1])
    if t_lo <= 0 or t_hi <= 0:
        raise ValueError("trace values must be positive")
    levels = exhaustion.levels
    for a, b in levels:
        center_touch = k_lo == a == 0.0 and problem.d > 1
        if not ((a < k_lo or center_touch) and k_hi < b):
            raise DomainError(
                f"compact set [{k_lo}, {k_hi}] must sit strictly inside level ({a}, {b})"
            )

    has_left = levels[0][0] < k_lo
    right_master = _master_side(
        problem, k_hi, tuple(b for _, b in levels), resolution, toward_zero=False
    )
    left_master = None
    if has_left:
        left_master = _master_side(
            problem, k_lo, tuple(a for a, _ in levels), resolution, toward_zero=True
        )

    n_set = max(resolution // 4, 9)
    set_nodes = np.linspace(k_lo, k_hi, n_set)
    pieces = [set_nodes, right_master.nodes[1:]]
    if left_master is not None:
        pieces.insert(0, left_master.nodes[:-1])
    full_nodes = np.concatenate(pieces)
    full = Grid(full_nodes, "explicit", problem.weight_exponent)
    set_start = left_master.n - 1 if left_master is not None else 0
    set_vals = t_lo + (set_nodes - k_lo) / max(k_hi - k_lo, 1e-300) * (t_hi - t_lo)

    fields: list[Field] = []
    lam1s: list[float] = []
    mono: list[float] = []
    gaps: list[float] = []
    window = (k_hi, levels[0][1])
    win_mask = (full.nodes >= window[0]) & (full.nodes <= window[1])
    prev_right = None
    prev_left = None
    for a, b in levels:
        sub_r, i0_r, rep_r = _sub_solve(
            problem, right_master, b, (t_hi, 0.0), config, from_right=False,
            initial=prev_right,
        )
        if not rep_r.converged:
            logger.warning("level (%g, %g): right solve failed, truncating", a, b)
            break
        lam = principal_eigenpair(problem, sub_r, config).lam
        vals_left = None
        if left_master is not None:
            sub_l, i0_l, rep_l = _sub_solve(
                problem, left_master, a, (0.0, t_lo), config, from_right=True,
                initial=prev_left,
            )
            if not rep_l.converged:
                logger.warning("level (%g, %g): left solve failed, truncating", a, b)
                break
            lam = min(lam, principal_eigenpair(problem, sub_l, config).lam)
            vals_left = np.zeros(left_master.n)
            vals_left[i0_l:] = rep_l.solution.values
            prev_left = vals_left
        if not lam > 0:
            raise PreconditionError(
                f"principal eigenvalue on level ({a}, {b}) minus the set is {lam:.3e} <= 0"
            )
        lam1s.append(lam)
        vals_right = np.zeros(right_master.n)
        vals_right[: sub_r.n] = rep_r.solution.values
        prev_right = vals_right

        u_full = np.empty(full.n)
        if left_master is not None:
            u_full[: left_master.n] = vals_left
        u_full[set_start : set_start + n_set] = set_vals
        u_full[set_start + n_set - 1 :] = vals_right
        field = Field(full, u_full)
        if fields:
            diff = fields[-1].values - u_full
            mono.append(float(diff.max()))
            gaps.append(float(np.max(np.abs(diff[win_mask]))))
        fields.append(field)

    if not fields:
        raise StateError("no level solved; cannot form the exhaustion limit")
    converged = bool(gaps) and gaps[-1] <= cauchy_tol
    return MinimalGrowthRun(
        compact=compact,
        trace=(t_lo, t_hi),
        levels=tuple(levels[: len(fields)]),
        fields=tuple(fields),
        limit=fields[-1],
        monotonicity_log=tuple(mono),
        window_gaps=tuple(gaps),
        window=window,
        converged=converged,
        lambda_1=tuple(lam1s),
    )


# ---------------------------------------------------------------------------
# point singularities
# ---------------------------------------------------------------------------

def point_singularity_solution(
    problem: RadialProblem,
    x0: float,
    exhaustion: ExhaustionSchedule,
    x1: float | None = None,
    resolution: int = 801,
    config: SolverConfig = DEFAULT_CONFIG,
    return_run: bool = False,
):
    """Positive solution of the unforced equation away from an isolated
    point, built as a limit of punctured solves.

    Level (a_N, b_N) is read as the component to the right of the
    singularity: the puncture radius is a_N - x0 (strictly decreasing), the
    forcing is a unit bump on the annulus between one and two puncture
    radii, boundary data is zero at both ends, and the solve is rescaled to
    equal 1 at x1 afterwards (exact by degree-(p-1) homogeneity).  The
    limit carries the singularity profile on windows between the final
    puncture and x1.
    """
    exhaustion.validate(problem)
    levels = exhaustion.levels
    deltas = [a - x0 for a, _ in levels]
    if any(d <= 0 for d in deltas):
        raise ValueError("level left endpoints must lie strictly right of x0")
    if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError("puncture radii (a_N - x0) must be strictly decreasing")
    if x1 is None:
        x1 = exhaustion.x1 if exhaustion.x1 is not None else exhaustion.x0
    if not levels[0][0] < x1 < levels[0][1]:
        raise ValueError(f"normalization point {x1} must lie inside the first level")

    fields: list[Field] = []
    gaps: list[float] = []
    for (a, b), delta in zip(levels, deltas):
        focus = (a, min(x0 + 2.0 * delta, b))
        grid = build_graded_grid(problem, (a, b), focus, resolution)
        bump = PotentialSpec.bump(x0 + 1.5 * delta, 0.5 * delta, 1.0)
        fvals = bump.sample(grid.nodes)
        mass = float(np.sum(grid.node_w * fvals))
        if mass <= 0:
            raise StateError(f"forcing bump unresolved on level ({a}, {b})")
        f = Field(grid, fvals / mass)  # unit weighted mass, concentrating
        rep = solve_dirichlet(problem, grid, (0.0, 0.0), f=f, config=config)
        if not rep.converged:
            logger.warning("puncture level (%g, %g): solve failed, truncating", a, b)
            break
        ref = rep.solution.at(x1)
        if not ref > 0:
            logger.warning("puncture level (%g, %g): vanished at x1, truncating", a, b)
            break
        field = rep.solution.scaled(1.0 / ref)
        if fields:
            w = np.linspace(x1, levels[0][1], 201)
            prev_w = np.interp(w, fields[-1].grid.nodes, fields[-1].values)
            cur_w = np.interp(w, field.grid.nodes, field.values)
            gaps.append(float(np.max(np.abs(cur_w - prev_w))))
        fields.append(field)
    if not fields:
        raise StateError("no puncture level solved")
    run = PointSingularityRun(
        x0=x0,
        x1=float(x1),
        levels=tuple(levels[: len(fields)]),
        fields=tuple(fields),
        limit=fields[-1],
        window_gaps=tuple(gaps),
        converged=bool(gaps) and gaps[-1] <= 1e-4,
    )
    return run if return_run else run.limit


def singularity_exponent(
    u: Field,
    x0: float,
    fit_window: tuple[float, float],
    mode: str = "power",
) -> tuple[float, float]:
    """Least-squares singularity exponent of u near x0 over the window.

    mode "power" fits log u against log(r - x0) (slope = the growth
    exponent); mode "loglog" fits log u against log(-log(r - x0)), the
    profile shape at the borderline p = d, where a slope of 1 identifies
    the logarithmic blowup.  Returns (slope, rms residual of the fit).
    """
    lo, hi = fit_window
    nodes = u.grid.nodes
    if not (nodes[0] <= lo < hi <= nodes[-1]):
        raise ValueError(f"fit window {fit_window} outside the field's grid")
    mask = (nodes >= lo) & (nodes <= hi)
    if mask.sum() < 3:
        raise ValueError("fit window contains fewer than 3 nodes")
    r = nodes[mask] - x0
    vals = u.values[mask]
    if np.any(vals <= 0):
        raise ValueError("field must be strictly positive on the fit window")
    if np.any(r <= 0):
        raise ValueError("fit window must lie strictly right of x0")
    if mode == "power":
        x = np.log(r)
    elif mode == "loglog":
        if np.any(r >= 1):
            raise ValueError("loglog mode needs the window inside r - x0 < 1")
        x = np.log(-np.log(r))
    else:
        raise ValueError(f"unknown fit mode {mode!r}")
    y = np.log(vals)
    coeffs, residuals, _, _ = np.linalg.lstsq(
        np.column_stack([x, np.ones_like(x)]), y, rcond=None
    )
    slope = float(coeffs[0])
    fitted = coeffs[0] * x + coeffs[1]
    rms = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return slope, rms


# ---------------------------------------------------------------------------
# removability
# ---------------------------------------------------------------------------

def removability_test(
    problem: RadialProblem,
    u: Field,
    x0: float,
    tol: float = 1e-8,
    growth_factor: float = 5.0,
    classify_tol: float = 1e-6,
) -> RemovabilityReport:
    """Decide whether an isolated singular point of a positive solution is
    removable.

    First the sup of u is probed on dyadic windows shrinking onto x0 from
    the right: sustained growth by more than ``growth_factor`` overall is a
    blowup (nonremovable).  A bounded u is extended continuously across x0
    and the weak residual paired with the hat function at x0 is measured:
    above 10 * tol * scale it is a concentrated flux (nonremovable), below
    it the point is removable.  Solutions that neither settle nor grow are
    reported undetermined.  classify_sign must pass away from x0 first.
    """
    nodes = u.grid.nodes
    if x0 >= nodes[-1]:
        raise ValueError("x0 must lie left of the grid's right edge")
    offset = nodes - x0
    right = offset > 0

    # dyadic sup windows approaching x0 from the right
    span = nodes[-1] - x0
    first = span * 0.25
    sups = []
    k = 0
    while True:
        w_hi = first * 0.5**k
        w_lo = w_hi * 0.5
        m = right & (offset > w_lo) & (offset <= w_hi)
        if not np.any(m):
            break
        sups.append(float(np.max(u.values[m])))
        k += 1
        if k > 60:
            break
    if len(sups) < 4:
        raise ValueError("grid resolves too few dyadic windows near x0")

    away = nodes >= x0 + first
    away_grid = Grid(nodes[away], "explicit", u.grid.weight_exponent)
    away_field = Field(away_grid, u.values[away])
    cls = classify_sign(away_field, problem, classify_tol)
    if cls.kind not in ("solution",):
        raise PreconditionError(
            f"field does not solve the equation away from x0 (classified {cls.kind!r})"
        )

    steps = np.array(sups[1:]) / np.array(sups[:-1])
    total_growth = sups[-1] / sups[0]
    growing = total_growth > growth_factor and float(np.median(steps[-4:])) > 1.1
    settled = abs(sups[-1] / sups[-2] - 1.0) < 0.05 and total_growth < growth_factor

    if growing:
        return RemovabilityReport("nonremovable-blowup", tuple(sups), math.nan, math.nan, math.nan)
    if not settled:
        return RemovabilityReport("undetermined", tuple(sups), math.nan, math.nan, math.nan)

    # extend continuously across x0 and measure the concentrated residual
    if nodes[0] < x0:
        ext = u
        j0 = int(np.argmin(np.abs(nodes - x0)))
    else:
        first_right = int(np.argmax(right))
        val0 = float(u.values[first_right])  # continuous extension value
        ext_nodes = np.concatenate(([x0], nodes[right]))
        ext_vals = np.concatenate(([val0], u.values[right]))
        ext = Field(
            Grid(ext_nodes, "explicit", u.grid.weight_exponent), ext_vals
        )
        j0 = 0
    r_ext = weak_residual(ext, problem).values
    if j0 == 0:
        # the extension is flat on its first cell, so the pairing that sees
        # the incoming flux is the hat at the first real node
        j0 = 1
    # hats at end nodes are zeroed rows; the nearest interior hat is the one
    # that can carry a concentrated residual
    j0 = min(max(j0, 1), ext.grid.n - 2)
    flux = float(r_ext[j0])
    # floor at the rounding level of the flux terms so that fields with
    # vanishing residual scale (constants with V = 0) still get a sane gate
    hard = float(np.max(ext.grid.cell_w / ext.grid.h)) * float(np.max(np.abs(ext.values)))
    scale = max(residual_scale(ext, problem), 1e-6 * hard, 1e-300)
    gate = 10.0 * tol * scale
    verdict = "nonremovable-flux" if abs(flux) > gate else "removable"
    return RemovabilityReport(verdict, tuple(sups), flux, scale, gate)


# ---------------------------------------------------------------------------
# minimal-growth certificates
# ---------------------------------------------------------------------------

def _certificate_level(
    problem: RadialProblem,
    grid: Grid,
    uvals: np.ndarray,
    mass_mask: np.ndarray,
    config: SolverConfig,
) -> tuple[float, np.ndarray, float]:
    """One level of the certificate: minimize the Picone density of u over
    nonnegative w vanishing at the outer edge with unit p-mass on the
    window.  Returns (mu, w, recorded mass)."""
    p = problem.p
    if np.any(uvals <= 0):
        raise PreconditionError("candidate solution must be positive on the region")
    us = np.diff(uvals) / grid.h
    um = 0.5 * (uvals[:-1] + uvals[1:])

    # p = 2 seed (exact answer at p = 2): substitute w = u * phi
    k = um**2 * grid.cell_w / grid.h**2
    n = grid.n
    diag = np.zeros(n)
    diag[:-1] += k
    diag[1:] += k
    free = slice(0, n - 1)  # inner edge free, outer edge Dirichlet
    d = diag[free]
    off = -k[free.start : free.stop - 1]
    mass = (grid.node_w * uvals**2 * mass_mask)[free]
    lam, phi = smallest_generalized_eigen(d, off, mass)
    phi_full = np.zeros(n)
    phi_full[free] = phi
    if phi_full[np.argmax(np.abs(phi_full))] < 0:
        phi_full = -phi_full
    w = np.maximum(uvals * phi_full, 0.0)
    w[-1] = 0.0

    def mass_of(wv: np.ndarray) -> float:
        return float(np.sum(grid.node_w * mass_mask * wv**p))

    def objective(wv: np.ndarray) -> float:
        return _picone_total(grid, p, wv, uvals, us, um)

    m = mass_of(w)
    if m <= 0:
        raise StateError("certificate seed lost its window mass")
    w = w / m ** (1.0 / p)
    mu = objective(w)

    if p != 2.0:
        if np.any(us == 0.0):
            raise PreconditionError(
                "candidate solution has a critical point on the region; the"
                " certificate needs a nonvanishing slope for p != 2"
            )
        w, mu = _irls_minimize(grid, p, w, uvals, us, um, mass_mask, mass_of, objective)
        w, mu = _polish_descent(grid, p, w, uvals, us, um, mass_of, objective)
    return mu, w, mass_of(w)


def _irls_minimize(grid, p, w, uvals, us, um, mass_mask, mass_of, objective, rounds: int = 40):
    """Reweighted quadratic relaxations of the Picone objective.

    Each round freezes the degree-(p-2) factors of the density at the
    current iterate, leaving a tridiagonal quadratic form whose smallest
    generalized eigenvector (against the similarly frozen window mass) is
    the next profile.  Iterates stay feasible, so the best objective seen
    is always a valid upper bound.
    """
    n = grid.n
    q = us / um
    cp = 1.0 / grid.h - 0.5 * q
    cm = -(1.0 / grid.h + 0.5 * q)
    best_w, best = w.copy(), objective(w)
    for _ in range(rounds):
        ws = np.diff(w) / grid.h
        wm = 0.5 * (w[:-1] + w[1:])
        z = wm / um * us
        # floor built from w-scale quantities keeps the whole iteration
        # exactly invariant under rescaling the candidate u
        slope_floor = 1e-10 * float(np.max(np.abs(ws)) + np.max(np.abs(z)))
        om = (np.abs(ws) + np.abs(z) + slope_floor) ** (p - 2.0)
        wcell = om * grid.cell_w
        diag = np.zeros(n)
        diag[:-1] += wcell * cm**2
        diag[1:] += wcell * cp**2
        off = (wcell * cm * cp)[: n - 2]
        wfloor = np.maximum(w, 1e-14 * float(np.max(w)))
        msur = grid.node_w * mass_mask * wfloor ** (p - 2.0)
        try:
            _, vec = smallest_generalized_eigen(diag[:-1], off, msur[:-1])
        except (PreconditionError, np.linalg.LinAlgError):
            break
        wn = np.zeros(n)
        wn[:-1] = vec
        if wn[np.argmax(np.abs(wn))] < 0:
            wn = -wn
        wn = np.maximum(wn, 0.0)
        wn[-1] = 0.0
        m = mass_of(wn)
        if m <= 0:
            break
        wn = wn / m ** (1.0 / p)
        fn = objective(wn)
        if fn < best:
            best, best_w = fn, wn.copy()
        elif fn > best * (1.0 + 1e-10):
            # relaxation stopped improving; damp once then give up next time
            wn = 0.5 * (w + wn)
            m = mass_of(wn)
            if m <= 0:
                break
            wn = wn / m ** (1.0 / p)
            if objective(wn) >= best * (1.0 + 1e-10):
                break
        w = wn
    return best_w, best


def _polish_descent(grid, p, w, uvals, us, um, mass_of, objective, iters: int = 200):
    """Short projected-descent polish after the reweighted rounds."""
    mu = objective(w)
    step = 1.0
    for _ in range(iters):
        g = _picone_grad(grid, p, w, uvals, us, um)
        g[-1] = 0.0
        gnorm = float(np.max(np.abs(g)))
        if gnorm == 0.0:
            break
        improved = False
        while step > 1e-16:
            w_try = np.maximum(w - step * g / gnorm, 0.0)
            w_try[-1] = 0.0
            m_try = mass_of(w_try)
            if m_try > 0:
                w_try = w_try / m_try ** (1.0 / p)
                mu_try = objective(w_try)
                if mu_try < mu - 1e-16 * max(1.0, abs(mu)):
                    w, mu = w_try, mu_try
                    improved = True
                    step *= 1.5
                    break
            step *= 0.5
        if not improved:
            break
    return w, mu


def _picone_total(grid, p, w, uvals, us, um) -> float:
    ws = np.diff(w) / grid.h
    wm = 0.5 * (w[:-1] + w[1:])
    ratio = wm / um
    cells = (
        np.abs(ws) ** p
        + (p - 1.0) * ratio**p * np.abs(us) ** p
        - p * ratio ** (p - 1.0) * ws * phi_p(us, p)
    ) / p
    return float(np.sum(cells * grid.cell_w))


def _picone_grad(grid, p, w, uvals, us, um) -> np.ndarray:
    ws = np.diff(w) / grid.h
    wm = 0.5 * (w[:-1] + w[1:])
    ratio = wm / um
    with np.errstate(divide="ignore", invalid="ignore"):
        rpm2 = np.where(ratio > 0, ratio ** (p - 2.0), 0.0)
    d_ws = phi_p(ws, p) - ratio ** (p - 1.0) * phi_p(us, p)
    d_wm = (p - 1.0) * rpm2 / um * (ratio * np.abs(us) ** p - ws * phi_p(us, p))
    g = np.zeros_like(w)
    contrib_slope = d_ws * grid.cell_w / grid.h
    contrib_mid = 0.5 * d_wm * grid.cell_w
    g[:-1] += -contrib_slope + contrib_mid
    g[1:] += contrib_slope + contrib_mid
    return g


def minimal_growth_certificate(
    problem: RadialProblem,
    u: Field,
    omega2: CompactSetSpec,
    window: tuple[float, float],
    exhaustion: ExhaustionSchedule,
    resolution: int = 601,
    config: SolverConfig = DEFAULT_CONFIG,
) -> CertificateRun:
    """Per-level infima of the candidate's Picone density over unit-mass
    fields, and the trend verdict.

    mu_N = inf { integral of L(w, u) over (level minus omega2) : w >= 0,
    w = 0 at the level edge, integral of w^p over the window = 1 }.  At
    p = 2 this is a generalized eigenvalue (solved directly); otherwise
    projected descent from the p = 2 minimizer, which still yields sound
    upper bounds, so a decaying trend is conclusive while "bounded-away"
    is empirical.  u enters only through ratios, so rescaling u leaves
    every mu_N unchanged.
    """
    exhaustion.validate(problem)
    omega2.validate(problem)
    b_lo, b_hi = window
    edge = omega2.k_hi
    if not edge < b_lo < b_hi:
        raise ValueError("window must lie strictly beyond omega2")
    levels = exhaustion.levels
    if any(b <= b_hi for _, b in levels):
        raise DomainError("every level must extend beyond the mass window")

    mus: list[float] = []
    masses: list[float] = []
    mins: list[Field] = []
    for _, b in levels:
        grid = _certificate_grid(problem, edge, b, window, resolution)
        uvals = np.asarray(u.at(grid.nodes))
        mass_mask = ((grid.nodes >= b_lo) & (grid.nodes <= b_hi)).astype(float)
        mu, w, m = _certificate_level(problem, grid, uvals, mass_mask, config)
        mus.append(mu)
        masses.append(m)
        mins.append(Field(grid, w))
    verdict = (
        "decaying-to-zero" if mus[-1] <= 1e-3 * mus[0] else "bounded-away"
    )
    return CertificateRun(
        omega2=omega2,
        window=(float(b_lo), float(b_hi)),
        levels=tuple(levels),
        mus=tuple(mus),
        masses=tuple(masses),
        minimizers=tuple(mins),
        verdict=verdict,
    )


def _certificate_grid(
    problem: RadialProblem,
    edge: float,
    outer: float,
    window: tuple[float, float],
    resolution: int,
) -> Grid:
    focus = (edge, window[1])
    base = build_graded_grid(problem, (edge, outer), focus, resolution)
    nodes = np.union1d(base.nodes, np.asarray([window[0], window[1]], dtype=float))
    return Grid(nodes, "explicit", problem.weight_exponent)


def comparison_check(
    problem: RadialProblem,
    u_sub: Field,
    v_super: Field,
    omega2: CompactSetSpec,
    certificate: CertificateRun,
    tol: float = 1e-8,
    classify_tol: float = 1e-6,
) -> ComparisonResult:
    """Comparison beyond omega2 for a certified-minimal subsolution: checks
    u_sub <= v_super + tol nodewise outside the set, after verifying the
    hypotheses (sign classifications, boundary ordering at the set's edge,
    and a decaying certificate)."""
    if certificate.verdict != "decaying-to-zero":
        raise PreconditionError(
            "comparison needs a decaying-to-zero certificate for the subsolution"
        )
    grid = u_sub.grid
    if v_super.grid is not grid and not np.array_equal(v_super.grid.nodes, grid.nodes):
        raise ValueError("fields must share a grid")
    edge = omega2.k_hi
    region = grid.nodes >= edge
    if not np.any(region):
        raise ValueError("grid does not reach beyond omega2")
    sub_grid = Grid(grid.nodes[region], "explicit", grid.weight_exponent)
    u_r = Field(sub_grid, u_sub.values[region])
    v_r = Field(sub_grid, v_super.values[region])
    cls_u = classify_sign(u_r, problem, classify_tol)
    if cls_u.kind not in ("subsolution", "solution"):
        raise PreconditionError(f"u_sub classifies as {cls_u.kind!r} on the region")
    cls_v = classify_sign(v_r, problem, classify_tol)
    if cls_v.kind not in ("supersolution", "solution"):
        raise PreconditionError(f"v_super classifies as {cls_v.kind!r} on the region")
    edge_u = float(u_r.values[0])
    edge_v = float(v_r.values[0])
    if edge_u > edge_v + tol:
        raise PreconditionError(
            f"u_sub exceeds v_super at the set's edge: {edge_u:.6g} > {edge_v:.6g}"
        )
    viol = float(np.max(u_r.values - v_r.values))
    return ComparisonResult(viol <= tol, max(viol, 0.0))
