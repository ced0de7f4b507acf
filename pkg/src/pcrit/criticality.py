"""Criticality analysis through exhaustions: probe thresholds, null
sequences, ground states, capacities, and strict-positivity weights.

The central quantity is the probe threshold on a bounded level: for a
nonnegative probe weight W supported near the reference point,

    t_N = inf { p Q(u) / integral(W |u|^p) : u vanishing at the level edge },

the largest coupling for which the functional with potential V - t W stays
nonnegative on the level.  The infimum is computed as the principal
eigenvalue of the weighted pencil (direct tridiagonal algebra at p = 2,
weighted inverse power iteration otherwise); bisection on the sign of the
shifted principal eigenvalue is kept as an independent cross-check method.
Minimizers of the quotient are the null-sequence elements: normalizing them
at the reference point turns a decaying t_N into a locally uniform limit,
the ground state.

As the levels exhaust the domain, t_N decreases.  Two regimes are told
apart: t_N sinking below an absolute cut (critical: the functional admits
a null sequence and a ground state) and t_N stalling on a plateau
(subcritical: a strict-positivity weight exists, and t*/2 times the probe
certifies it).  Slow undecided decay is reported as undetermined rather
than forced.

When d equals p and the domain reaches the origin, all computations run in
log-radius coordinates, where the degenerate weight |r|^(d-1) becomes
constant and the levels stay numerically representable; energies,
thresholds and eigenvalues are invariant under this substitution.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .energy import energy_Q, phi_p
from .errors import DomainError, PreconditionError, StateError
from .model import (
    CompactSetSpec,
    ExhaustionSchedule,
    Field,
    Grid,
    PotentialSpec,
    RadialProblem,
    build_graded_grid,
    build_grid,
    log_reduced_level,
    log_reduced_problem,
)
from .solver import (
    DEFAULT_CONFIG,
    SolverConfig,
    _core_residual,
    _core_scale,
    _free_slice,
    _newton_core,
    _p2_stiffness,
    principal_eigenpair,
    smallest_generalized_eigen,
    solve_dirichlet,
)

logger = logging.getLogger(__name__)

__all__ = [
    "LevelThreshold",
    "NullSequenceRun",
    "CriticalityReport",
    "PositivityCertificate",
    "CapacityReport",
    "default_probe",
    "threshold_tN",
    "null_sequence",
    "criticality_verdict",
    "ground_state",
    "positivity_weight",
    "q_capacity",
]


@dataclass(frozen=True)
class LevelThreshold:
    index: int
    level: tuple[float, float]
    t: float
    minimizer: Field  # normalized to 1 at the reference point
    energy: float  # Q at the normalized minimizer
    weighted_mass: float  # integral of W |v|^p at the normalized minimizer
    converged: bool


@dataclass(frozen=True)
class NullSequenceRun:
    entries: tuple[LevelThreshold, ...]
    x0: float
    coordinates: str  # "radial" | "log"
    weight: PotentialSpec
    failures: tuple[int, ...]  # level indices whose eigensolve failed


@dataclass(frozen=True)
class CriticalityReport:
    thresholds: tuple[tuple[int, float], ...]
    verdict: str  # "critical" | "subcritical" | "undetermined"
    t_star_estimate: float
    ground_state: Field | None
    positivity_weight: tuple[PotentialSpec, float] | None
    energies: tuple[float, ...]
    levels: tuple[tuple[float, float], ...]
    coordinates: str
    weight: PotentialSpec
    x0: float
    run: NullSequenceRun


@dataclass(frozen=True)
class PositivityCertificate:
    weight: PotentialSpec
    margin: float  # smallest principal eigenvalue of the discounted form
    margins: tuple[float, ...]  # one per level, largest level last
    coordinates: str


@dataclass(frozen=True)
class CapacityReport:
    value: float
    minimizer: Field
    active_set: np.ndarray  # node indices held at 1
    min_multiplier: float
    max_off_residual: float
    residual_scale: float
    converged: bool
    iterations: int


# ---------------------------------------------------------------------------
# probes and working coordinates
# ---------------------------------------------------------------------------

def default_probe(level: tuple[float, float]) -> PotentialSpec:
    """Unit-height smooth bump supported on the middle third of the level."""
    a, b = level
    span = b - a
    if not (math.isfinite(span) and span > 0):
        raise ValueError(f"level {level} is not a bounded interval")
    return PotentialSpec.bump(center=a + 0.5 * span, radius=span / 6.0, height=1.0)


def _should_reduce(problem: RadialProblem) -> bool:
    return problem.d == problem.p and problem.domain[0] == 0.0


def _working_frame(
    problem: RadialProblem,
    levels: tuple[tuple[float, float], ...],
    x0: float | None,
    weight: PotentialSpec | None,
    frame: str,
):
    """Resolve the working coordinates for an exhaustion computation.

    frame "auto": levels and x0 are radial; they are mapped to log-radius
    coordinates when d == p, the domain reaches 0, and every level stays
    away from 0 (the substitution removes the degenerate weight there).
    frame "radial": never map.  frame "log": the problem must be reducible
    and levels, x0 and the probe weight are ALREADY in log-radius
    coordinates; this is the only way to reach level sizes whose radial
    endpoints would underflow.

    Returns (problem, levels, x0, weight, coordinates); a None weight is
    replaced by the default probe on the first working-frame level.
    """
    if frame == "log":
        if not _should_reduce(problem):
            raise ValueError("log frame requires d == p with the domain reaching 0")
        wp = log_reduced_problem(problem)
        if weight is None:
            weight = default_probe(levels[0])
        return wp, levels, x0, weight, "log"
    if frame == "radial" or not (
        _should_reduce(problem) and all(lv[0] > 0.0 for lv in levels)
    ):
        if frame not in ("radial", "auto"):
            raise ValueError(f"unknown frame {frame!r}")
        if weight is None:
            weight = default_probe(levels[0])
        return problem, levels, x0, weight, "radial"
    wp = log_reduced_problem(problem)
    wl = tuple(log_reduced_level(lv) for lv in levels)
    wx0 = None
    if x0 is not None:
        if x0 <= 0:
            raise ValueError("reference point must be positive for log reduction")
        wx0 = math.log(x0)
    if weight is None:
        ww = default_probe(wl[0])
    else:
        ww = PotentialSpec.log_reduced(weight, problem.p)
    return wp, wl, wx0, ww, "log"


def _level_grid(
    problem: RadialProblem,
    level: tuple[float, float],
    weight: PotentialSpec,
    resolution: int,
) -> Grid:
    """Grid for one level: fine around the probe support, coarse outward."""
    a, b = level
    hint = weight.support_hint()
    if hint is None:
        return build_grid(problem, level, resolution)
    width = hint[1] - hint[0]
    fa = max(a, hint[0] - 0.5 * width)
    fb = min(b, hint[1] + 0.5 * width)
    if not fa < fb or (fb - fa) >= 0.6 * (b - a):
        return build_grid(problem, level, resolution)
    return build_graded_grid(problem, level, (fa, fb), resolution)


def _check_weight(grid: Grid, weight: PotentialSpec) -> np.ndarray:
    wvals = weight.sample(grid.nodes)
    if np.any(wvals < 0):
        raise PreconditionError("probe weight must be nonnegative")
    free = _free_slice(grid)
    if not np.any(wvals[free] > 0):
        raise PreconditionError("probe weight vanishes at every interior node")
    return wvals


def _lambda1(problem: RadialProblem, grid: Grid, config: SolverConfig) -> float:
    return principal_eigenpair(problem, grid, config).lam


def _require_nonnegative_form(
    problem: RadialProblem, grid: Grid, config: SolverConfig
) -> float:
    lam = _lambda1(problem, grid, config)
    if lam < -1e-9:
        raise PreconditionError(
            f"functional is not nonnegative on the level: principal eigenvalue {lam:.3e} < 0"
        )
    return lam


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def _weighted_quotient(
    grid: Grid, p: float, vvals: np.ndarray, wvals: np.ndarray, u: np.ndarray
) -> tuple[float, float]:
    """(p * Q(u) / weighted mass, weighted mass)."""
    s = np.diff(u) / grid.h
    num = float(np.sum(np.abs(s) ** p * grid.cell_w)) + float(
        np.sum(vvals * np.abs(u) ** p * grid.node_w)
    )
    mass = float(np.sum(wvals * np.abs(u) ** p * grid.node_w))
    return num / mass, mass


def _threshold_minimizer(
    problem: RadialProblem,
    grid: Grid,
    wvals: np.ndarray,
    config: SolverConfig,
) -> tuple[float, np.ndarray, bool]:
    """Smallest t with lambda_1(V - t W) = 0 on the grid, with its minimizer.

    p = 2: generalized tridiagonal eigenproblem against the (possibly
    partially supported) weight mass.  p != 2: weighted inverse power
    iteration, each step a coercive Dirichlet solve.
    """
    p = problem.p
    vvals = problem.potential.sample(grid.nodes)
    free = _free_slice(grid)

    if p == 2.0:
        d, off = _p2_stiffness(grid, vvals, free)
        mass = (grid.node_w * wvals)[free]
        t_val, vec = smallest_generalized_eigen(d, off, mass)
        full = np.zeros(grid.n)
        full[free] = vec
        if full[np.argmax(np.abs(full))] < 0:
            full = -full
        t_rq, _ = _weighted_quotient(grid, p, vvals, wvals, full)
        return t_rq, full, True

    a, b = grid.interval
    if grid.natural_left:
        u = (b - grid.nodes) / (b - a)
    else:
        u = np.minimum(grid.nodes - a, b - grid.nodes) / (b - a)
    u[grid.dirichlet_mask] = 0.0
    t_val, mass = _weighted_quotient(grid, p, vvals, wvals, u)
    u = u / mass ** (1.0 / p)

    converged = False
    for _ in range(config.eigen_max_iter):
        load = grid.node_w * wvals * phi_p(u, p)
        w0 = u * t_val ** (-1.0 / (p - 1.0))
        w, _, _, _, ok = _newton_core(grid, p, vvals, load, w0, config)
        if not ok:
            logger.debug("threshold iteration: inner solve failed")
            break
        w = np.maximum(w, 0.0)
        t_new, mass = _weighted_quotient(grid, p, vvals, wvals, w)
        if mass <= 0 or not math.isfinite(t_new):
            logger.debug("threshold iteration: iterate lost the weight mass")
            break
        u = w / mass ** (1.0 / p)
        if abs(t_new - t_val) <= config.eigen_rtol * max(abs(t_new), 1e-300):
            t_val = t_new
            converged = True
            break
        t_val = t_new
    return t_val, u, converged


def _bisect_threshold(
    problem: RadialProblem,
    grid: Grid,
    weight: PotentialSpec,
    config: SolverConfig,
    abs_tol: float = 1e-8,
) -> float:
    """Root of t -> lambda_1(V - t W) on the grid by bracketed bisection."""

    def lam_at(t: float) -> float:
        shifted = RadialProblem(
            problem.p,
            problem.d,
            problem.domain,
            _combined_potential(problem.potential, weight, -t),
        )
        return _lambda1(shifted, grid, config)

    lam0 = lam_at(0.0)
    if lam0 < -1e-9:
        raise PreconditionError(
            f"functional is not nonnegative on the level: principal eigenvalue {lam0:.3e} < 0"
        )
    hi = 1.0
    for _ in range(200):
        if lam_at(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise PreconditionError("no finite threshold: lambda_1 stayed nonnegative")
    lo = 0.0
    while hi - lo > abs_tol:
        mid = 0.5 * (lo + hi)
        if lam_at(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _combined_potential(
    base: PotentialSpec, weight: PotentialSpec, coefficient: float
) -> PotentialSpec:
    """Spec evaluating base + coefficient * weight."""
    return PotentialSpec.combination(base, weight, coefficient)


def threshold_tN(
    problem: RadialProblem,
    level: tuple[float, float],
    weight: PotentialSpec,
    resolution: int = 801,
    method: str = "eigen",
    config: SolverConfig = DEFAULT_CONFIG,
    frame: str = "auto",
) -> float:
    """Largest t keeping the functional with potential V - t W nonnegative
    on the level.

    ``method`` "eigen" computes it as the weighted principal eigenvalue
    (exact algebra at p = 2, inverse iteration otherwise); "bisect" locates
    the sign change of the shifted principal eigenvalue, an independent and
    slower route kept for cross-checking.
    """
    wp, (wl,), _, ww, _ = _working_frame(problem, (tuple(level),), None, weight, frame)
    grid = _level_grid(wp, wl, ww, resolution)
    wvals = _check_weight(grid, ww)
    _require_nonnegative_form(wp, grid, config)
    if method == "eigen":
        t, _, ok = _threshold_minimizer(wp, grid, wvals, config)
        if not ok:
            raise StateError("threshold iteration did not converge on the level")
        return t
    if method == "bisect":
        return _bisect_threshold(wp, grid, ww, config)
    raise ValueError(f"unknown threshold method {method!r}")


# ---------------------------------------------------------------------------
# null sequences and verdicts
# ---------------------------------------------------------------------------

def null_sequence(
    problem: RadialProblem,
    exhaustion: ExhaustionSchedule,
    weight: PotentialSpec | None = None,
    resolution: int = 801,
    config: SolverConfig = DEFAULT_CONFIG,
    frame: str = "auto",
) -> NullSequenceRun:
    """Per-level thresholds t_N with minimizers normalized to 1 at the
    reference point.

    Each minimizer solves the level's weighted eigenproblem at eigenvalue
    t_N, so its energy satisfies Q(v_N) = (t_N / p) * integral(W |v_N|^p)
    identically.  Levels whose eigensolve fails are recorded in ``failures``
    and the sequence is truncated there.
    """
    wp, wlevels, wx0, ww, coords = _working_frame(
        problem, exhaustion.levels, exhaustion.x0, weight, frame
    )
    exhaustion.validate(wp if frame == "log" else problem)

    # nonnegativity on the largest level covers every smaller one
    last_grid = _level_grid(wp, wlevels[-1], ww, resolution)
    _require_nonnegative_form(wp, last_grid, config)

    entries: list[LevelThreshold] = []
    failures: list[int] = []
    for idx, lv in enumerate(wlevels, start=1):
        grid = _level_grid(wp, lv, ww, resolution)
        wvals = _check_weight(grid, ww)
        t, v, ok = _threshold_minimizer(wp, grid, wvals, config)
        if not ok:
            failures.append(idx)
            logger.warning("level %d: threshold eigensolve failed, truncating", idx)
            break
        ref_val = float(np.interp(wx0, grid.nodes, v))
        if not ref_val > 0:
            failures.append(idx)
            logger.warning("level %d: minimizer vanishes at the reference point", idx)
            break
        v = v / ref_val
        field = Field(grid, v)
        energy = energy_Q(field, wp).total
        vvals_w = wvals * np.abs(v) ** wp.p * grid.node_w
        mass = float(np.sum(vvals_w))
        entries.append(LevelThreshold(idx, lv, t, field, energy, mass, ok))
    return NullSequenceRun(tuple(entries), wx0, coords, ww, tuple(failures))


def criticality_verdict(
    problem: RadialProblem,
    exhaustion: ExhaustionSchedule,
    weight: PotentialSpec | None = None,
    resolution: int = 801,
    eps_crit: float = 1e-4,
    plateau_rtol: float = 0.01,
    config: SolverConfig = DEFAULT_CONFIG,
    frame: str = "auto",
) -> CriticalityReport:
    """Classify the functional on the exhausted domain by the trend of the
    probe thresholds.

    critical: t_N fell below ``eps_crit`` while still decreasing; the last
    normalized minimizer is reported as the ground state.  subcritical: the
    last three thresholds agree to ``plateau_rtol`` relative and sit above
    10 * eps_crit; half the plateau value times the probe is reported as a
    strict-positivity weight with its eigenvalue margin.  Anything else is
    undetermined.
    """
    run = null_sequence(problem, exhaustion, weight, resolution, config, frame)
    if not run.entries:
        raise StateError("no level produced a threshold; cannot classify")
    ts = [e.t for e in run.entries]
    t_last = ts[-1]

    decreasing = len(ts) >= 2 and t_last <= ts[0]
    plateau = (
        len(ts) >= 3
        and all(
            abs(ts[-i] - ts[-i - 1]) <= plateau_rtol * max(abs(ts[-i - 1]), 1e-300)
            for i in (1, 2)
        )
    )

    verdict = "undetermined"
    if t_last <= eps_crit and decreasing:
        verdict = "critical"
    elif plateau and t_last > 10.0 * eps_crit:
        verdict = "subcritical"

    gs = run.entries[-1].minimizer if verdict == "critical" else None
    t_star = 0.0 if verdict == "critical" else t_last

    pos_weight = None
    if verdict == "subcritical":
        cert = _positivity_margins(problem, run, t_star, resolution, config)
        pos_weight = (cert.weight, cert.margin)

    return CriticalityReport(
        thresholds=tuple((e.index, e.t) for e in run.entries),
        verdict=verdict,
        t_star_estimate=t_star,
        ground_state=gs,
        positivity_weight=pos_weight,
        energies=tuple(e.energy for e in run.entries),
        levels=tuple(e.level for e in run.entries),
        coordinates=run.coordinates,
        weight=run.weight,
        x0=run.x0,
        run=run,
    )


def _positivity_margins(
    problem: RadialProblem,
    run: NullSequenceRun,
    t_star: float,
    resolution: int,
    config: SolverConfig,
) -> PositivityCertificate:
    """Margins of the discounted form V - (t*/2) W across the run's levels."""
    scaled = run.weight.scaled(0.5 * t_star)
    wp = log_reduced_problem(problem) if run.coordinates == "log" else problem
    discounted = RadialProblem(
        wp.p, wp.d, wp.domain, _combined_potential(wp.potential, run.weight, -0.5 * t_star)
    )
    margins = []
    for entry in run.entries:
        grid = _level_grid(wp, entry.level, run.weight, resolution)
        margins.append(_lambda1(discounted, grid, config))
    margin = min(margins)
    if margin < -1e-8:
        logger.warning("positivity margin is negative: %g", margin)
    return PositivityCertificate(scaled, margin, tuple(margins), run.coordinates)


def ground_state(
    problem: RadialProblem,
    exhaustion: ExhaustionSchedule,
    weight: PotentialSpec | None = None,
    resolution: int = 801,
    config: SolverConfig = DEFAULT_CONFIG,
    frame: str = "auto",
    report: CriticalityReport | None = None,
) -> Field:
    """Limit profile of the normalized null sequence in the critical case.

    Recomputes the last level at doubled resolution and reports the limit
    from the finer grid; a StateError is raised when the verdict is not
    critical.  The returned field is 1 at the reference point and lives in
    the run's working coordinates (log-radius when the reduction applies).
    """
    if report is None:
        report = criticality_verdict(
            problem, exhaustion, weight, resolution, config=config, frame=frame
        )
    if report.verdict != "critical":
        raise StateError(
            f"ground state requires a critical verdict, got {report.verdict!r}"
        )
    run = report.run
    last = run.entries[-1]
    wp = log_reduced_problem(problem) if run.coordinates == "log" else problem
    grid2 = _level_grid(wp, last.level, run.weight, 2 * resolution)
    wvals2 = _check_weight(grid2, run.weight)
    _, v2, ok = _threshold_minimizer(wp, grid2, wvals2, config)
    if not ok:
        logger.warning("refinement solve failed; returning the coarse ground state")
        return last.minimizer
    return _normalized(grid2, v2, run.x0)


def _normalized(grid: Grid, v: np.ndarray, x0: float) -> Field:
    ref = float(np.interp(x0, grid.nodes, v))
    if not ref > 0:
        raise StateError("minimizer vanishes at the reference point")
    return Field(grid, v / ref)


def positivity_weight(
    problem: RadialProblem,
    exhaustion: ExhaustionSchedule,
    weight: PotentialSpec | None = None,
    resolution: int = 801,
    config: SolverConfig = DEFAULT_CONFIG,
    frame: str = "auto",
    report: CriticalityReport | None = None,
) -> PositivityCertificate:
    """Certified strict-positivity weight in the subcritical case: half the
    plateau threshold times the probe, with the discounted form's principal
    eigenvalue margin on every level (smallest margin reported first).

    Pass a precomputed ``report`` to skip rerunning the exhaustion.  A
    critical or undetermined verdict raises StateError.
    """
    if report is None:
        report = criticality_verdict(
            problem, exhaustion, weight, resolution, config=config, frame=frame
        )
    if report.verdict != "subcritical":
        raise StateError(
            f"positivity weight requires a subcritical verdict, got {report.verdict!r}"
        )
    return _positivity_margins(
        problem, report.run, report.t_star_estimate, resolution, config
    )


# ---------------------------------------------------------------------------
# capacity
# ---------------------------------------------------------------------------

def q_capacity(
    problem: RadialProblem,
    compact: CompactSetSpec,
    level: tuple[float, float],
    resolution: int = 1201,
    config: SolverConfig = DEFAULT_CONFIG,
) -> CapacityReport:
    """Capacity of the compact interval inside the level: the least energy
    among fields vanishing at the level edge with values >= 1 on the set.

    Solved with the constraint active (u = 1) on the whole set first; the
    constraint multipliers (weak residuals at pinned nodes) are then checked
    for the inequality's first-order conditions, and the active interval is
    adjusted outward/inward until they hold.  The report carries the least
    multiplier and the largest off-set residual for inspection.
    """
    a, b = problem.require_level(level)
    compact.validate(problem)
    k_lo, k_hi = compact.k_lo, compact.k_hi
    center_touch = k_lo == a == 0.0 and problem.d > 1
    if not ((k_lo > a or center_touch) and k_hi < b):
        raise DomainError(
            f"compact set [{k_lo}, {k_hi}] must sit strictly inside the level ({a}, {b})"
        )

    grid = _capacity_grid(problem, (a, b), (k_lo, k_hi), resolution)
    vvals = problem.potential.sample(grid.nodes)
    _require_nonnegative_form(problem, grid, config)

    nodes = grid.nodes
    in_set = (nodes >= k_lo - 1e-14 * max(1.0, abs(k_lo))) & (
        nodes <= k_hi + 1e-14 * max(1.0, abs(k_hi))
    )
    base_lo = int(np.argmax(in_set))
    base_hi = int(grid.n - 1 - np.argmax(in_set[::-1]))

    act_lo, act_hi = base_lo, base_hi
    u = np.zeros(grid.n)
    tol_gate = 1e-8
    converged = False
    iterations = 0
    for iterations in range(1, 31):
        u = _capacity_solve(problem, grid, act_lo, act_hi, config)
        if u is None:
            break
        r = _core_residual(grid, problem.p, vvals, np.zeros(grid.n), u)
        scale = max(_core_scale(grid, problem.p, vvals, np.zeros(grid.n), u), 1e-300)
        mult_gate = tol_gate * scale
        # multipliers on pinned nodes added beyond the set may not be negative
        bad_left = act_lo < base_lo and r[act_lo] < -mult_gate
        bad_right = act_hi > base_hi and r[act_hi] < -mult_gate
        # feasibility off the pinned interval
        over = u > 1.0 + 1e-10
        over[act_lo : act_hi + 1] = False
        if bad_left:
            act_lo += 1
            continue
        if bad_right:
            act_hi -= 1
            continue
        if np.any(over):
            idx = np.flatnonzero(over)
            grew = False
            if idx[0] < act_lo:
                act_lo = idx[idx < act_lo][0]
                grew = True
            if idx[-1] > act_hi:
                act_hi = idx[idx > act_hi][-1]
                grew = True
            if grew:
                continue
        converged = True
        break

    if u is None:
        raise StateError("capacity segment solve failed to converge")

    field = Field(grid, u)
    r = _core_residual(grid, problem.p, vvals, np.zeros(grid.n), u)
    scale = max(_core_scale(grid, problem.p, vvals, np.zeros(grid.n), u), 1e-300)
    active = np.arange(act_lo, act_hi + 1)
    free_mask = np.ones(grid.n, dtype=bool)
    free_mask[active] = False
    free_mask[grid.dirichlet_mask] = False
    min_mult = float(r[active].min()) if active.size else 0.0
    max_off = float(np.max(np.abs(r[free_mask]))) if np.any(free_mask) else 0.0
    value = energy_Q(field, problem).total
    return CapacityReport(
        value=value,
        minimizer=field,
        active_set=active,
        min_multiplier=min_mult,
        max_off_residual=max_off,
        residual_scale=scale,
        converged=converged,
        iterations=iterations,
    )


def _capacity_grid(
    problem: RadialProblem,
    level: tuple[float, float],
    kset: tuple[float, float],
    resolution: int,
) -> Grid:
    """Level grid with the compact set's endpoints as exact nodes."""
    a, b = level
    k_lo, k_hi = kset
    pieces = []
    n_set = max(resolution // 4, 9)
    if k_lo > a:
        pieces.append(_segment_nodes(problem, a, k_lo, resolution)[:-1])
    pieces.append(np.linspace(k_lo, k_hi, n_set))
    if k_hi < b:
        pieces.append(_segment_nodes(problem, k_hi, b, resolution)[1:])
    return Grid(np.concatenate(pieces), "explicit", problem.weight_exponent)


def _segment_nodes(problem: RadialProblem, a: float, b: float, resolution: int) -> np.ndarray:
    seg = RadialProblem(problem.p, problem.d, problem.domain, problem.potential)
    return build_grid(seg, (a, b), resolution).nodes


def _capacity_solve(
    problem: RadialProblem,
    grid: Grid,
    act_lo: int,
    act_hi: int,
    config: SolverConfig,
) -> np.ndarray | None:
    """Equality-constrained capacity profile for a pinned interval: each
    side of the pinned run is an unforced Dirichlet solve on its subgrid."""
    u = np.zeros(grid.n)
    u[act_lo : act_hi + 1] = 1.0
    nodes = grid.nodes
    if act_lo > 0:
        sub = Grid(nodes[: act_lo + 1], "explicit", grid.weight_exponent)
        left_bc = None if sub.natural_left else 0.0
        rep = solve_dirichlet(problem, sub, (left_bc, 1.0), config=config)
        if not rep.converged:
            return None
        u[: act_lo + 1] = rep.solution.values
    if act_hi < grid.n - 1:
        sub = Grid(nodes[act_hi:], "explicit", grid.weight_exponent)
        rep = solve_dirichlet(problem, sub, (1.0, 0.0), config=config)
        if not rep.converged:
            return None
        u[act_hi:] = rep.solution.values
    u[act_lo : act_hi + 1] = 1.0
    return u
