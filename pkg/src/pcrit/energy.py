"""Energy forms: the functional Q, Picone densities, simplified energies,
and the elementary vector inequality behind them.

For a problem with exponent p and potential V the functional is

    Q(u) = (1/p) * integral of (|u'|^p + V |u|^p) |r|^(d-1) dr.

Against a positive function v the nonnegative Picone density is

    L(u, v) = (1/p) [ |u'|^p + (p-1) (u/v)^p |v'|^p
                      - p (u/v)^(p-1) u' |v'|^(p-2) v' ],

with Q(u) = integral of L(u, v) whenever v solves Q'(v) = 0, and
Q(u) <= integral of L(u, v) when v is merely a subsolution.  The density is
pointwise nonnegative by Young's inequality, cell by cell in the discrete
form used here (midpoint values and slopes), so its nonnegativity holds up
to roundoff at every resolution while the integral identity emerges under
refinement.

The two-sided "simplified energy" comparison for products u = v * w uses

    E(v, w) = integral of v^2 |w'|^2 (w |v'| + v |w'|)^(p-2),

which is comparable to Q(vw) with constants depending only on p; for p >= 2
the split form integral of (v^p |w'|^p + v^2 |v'|^(p-2) w^(p-2) |w'|^2) is
comparable as well.  Comparability constants are reported by tests, never
assumed by the code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PreconditionError
from .model import Field, PotentialSpec, RadialProblem

__all__ = [
    "phi_p",
    "EnergyBreakdown",
    "LagrangianField",
    "SimplifiedEnergy",
    "VectorIneqRatio",
    "EnvelopeReport",
    "energy_Q",
    "picone_density",
    "picone_gap",
    "simplified_energy",
    "vector_inequality_ratio",
    "vector_inequality_envelope",
    "poincare_residual",
]


def phi_p(x, p: float):
    """The odd power map |x|^(p-2) x, with phi_p(0) = 0 for every p > 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0.0
    out[nz] = np.sign(x[nz]) * np.abs(x[nz]) ** (p - 1.0)
    return out if out.ndim else float(out)


def _slopes(field: Field) -> np.ndarray:
    return np.diff(field.values) / field.grid.h


def _midvals(field: Field) -> np.ndarray:
    return 0.5 * (field.values[1:] + field.values[:-1])


def _check_same_grid(*fields: Field) -> None:
    g0 = fields[0].grid
    for f in fields[1:]:
        if f.grid is not g0 and not np.array_equal(f.grid.nodes, g0.nodes):
            raise ValueError("fields must live on the same grid")


# ---------------------------------------------------------------------------
# the functional
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyBreakdown:
    """Q(u) split into its gradient and potential parts.

    total == (gradient_term + potential_term) / p by construction; the
    parts are the raw weighted integrals without the 1/p factor.
    """

    gradient_term: float
    potential_term: float
    total: float


def energy_Q(u: Field, problem: RadialProblem, free_boundary: bool = False) -> EnergyBreakdown:
    """Evaluate Q(u) on u's grid.

    u must be compactly supported (zero at the Dirichlet ends of its grid)
    unless ``free_boundary`` is set; energies of fields with free traces are
    meaningful for capacity minimizers and exhaustion limits but should be
    requested explicitly.
    """
    if not free_boundary and not u.is_compactly_supported():
        raise PreconditionError(
            "energy_Q needs a compactly supported field; pass free_boundary=True"
            " to evaluate a field with nonzero boundary trace"
        )
    g = u.grid
    p = problem.p
    vvals = problem.potential.sample(g.nodes)
    grad = float(np.sum(np.abs(_slopes(u)) ** p * g.cell_w))
    pot = float(np.sum(vvals * np.abs(u.values) ** p * g.node_w))
    return EnergyBreakdown(grad, pot, (grad + pot) / p)


# ---------------------------------------------------------------------------
# Picone density
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LagrangianField:
    """Per-cell Picone density values and their weighted integral."""

    grid: object
    cell_values: np.ndarray
    total: float

    def __post_init__(self):
        vals = np.asarray(self.cell_values, dtype=float).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "cell_values", vals)


def picone_density(u: Field, v: Field, problem: RadialProblem) -> LagrangianField:
    """Cellwise density L(u, v) >= 0 for u >= 0 against v > 0.

    Cell values use midpoint values and slopes of both fields.  Nonnegativity
    is exact cell by cell (scalar Young inequality), up to roundoff.
    """
    _check_same_grid(u, v)
    if np.any(v.values <= 0.0):
        raise PreconditionError("picone_density needs v > 0 at every node")
    if np.any(u.values < 0.0):
        raise PreconditionError("picone_density needs u >= 0 at every node")
    p = problem.p
    g = u.grid
    us, vs = _slopes(u), _slopes(v)
    um, vm = _midvals(u), _midvals(v)
    ratio = um / vm
    cells = (
        np.abs(us) ** p
        + (p - 1.0) * ratio**p * np.abs(vs) ** p
        - p * ratio ** (p - 1.0) * us * phi_p(vs, p)
    ) / p
    total = float(np.sum(cells * g.cell_w))
    return LagrangianField(g, cells, total)


def picone_gap(u: Field, v: Field, problem: RadialProblem) -> float:
    """Q(u) minus the integrated Picone density against v.

    Tends to 0 under refinement when v is a discrete solution; stays
    below +o(1) when v is a discrete subsolution (then Q(u) <= integral).
    """
    q = energy_Q(u, problem).total
    lag = picone_density(u, v, problem)
    return q - lag.total


# ---------------------------------------------------------------------------
# simplified energy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplifiedEnergy:
    """The universal comparison integral, plus the split form for p >= 2."""

    universal: float
    split: float | None


def simplified_energy(v: Field, w: Field, problem: RadialProblem) -> SimplifiedEnergy:
    """Comparison integrals for Q(v*w) with v > 0 and w >= 0 compactly supported."""
    _check_same_grid(v, w)
    if np.any(v.values <= 0.0):
        raise PreconditionError("simplified_energy needs v > 0 at every node")
    if np.any(w.values < 0.0):
        raise PreconditionError("simplified_energy needs w >= 0 at every node")
    if not w.is_compactly_supported():
        raise PreconditionError("simplified_energy needs w compactly supported")
    p = problem.p
    g = v.grid
    vs, ws = _slopes(v), _slopes(w)
    vm, wm = _midvals(v), _midvals(w)
    mix = wm * np.abs(vs) + vm * np.abs(ws)
    universal = float(np.sum(vm**2 * ws**2 * _pow_safe(mix, p - 2.0) * g.cell_w))
    split = None
    if p >= 2.0:
        split_cells = (
            vm**p * np.abs(ws) ** p
            + vm**2 * _pow_safe(np.abs(vs), p - 2.0) * _pow_safe(wm, p - 2.0) * ws**2
        )
        split = float(np.sum(split_cells * g.cell_w))
    return SimplifiedEnergy(universal, split)


def _pow_safe(base: np.ndarray, expo: float) -> np.ndarray:
    """base**expo with the 0**0-and-negative-exponent corner pinned to 0.

    The comparison integrands carry factors like (w|v'| + v|w'|)**(p-2)
    multiplied by |w'|^2; where the first factor vanishes the whole product
    is zero for every p > 1, so defining 0**negative as 0 here keeps the
    integrand exact without spurious infinities.
    """
    if expo == 0.0:
        return np.ones_like(base)
    out = np.zeros_like(base)
    nz = base != 0.0
    out[nz] = base[nz] ** expo
    return out


# ---------------------------------------------------------------------------
# elementary vector inequality
# ---------------------------------------------------------------------------

class VectorIneqRatio(NamedTuple):
    """Ratio of the second order Taylor defect of |.|^p to its comparator.

    ``degenerate`` marks the b = 0 convention, where the ratio is returned
    as exactly 1 (both sides vanish).
    """

    ratio: float
    degenerate: bool


def vector_inequality_ratio(a, b, p: float) -> VectorIneqRatio:
    """(|a+b|^p - |a|^p - p|a|^(p-2) a.b) / (|b|^2 (|a|+|b|)^(p-2)).

    Both sides vanish at b = 0; that case returns ratio 1 with the
    degenerate flag set.  a = b = 0 is rejected.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be 1D vectors of equal length")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 and nb == 0.0:
        raise ValueError("vector_inequality_ratio is undefined at a = b = 0")
    if nb == 0.0:
        return VectorIneqRatio(1.0, True)
    # the numerator is a difference of nearly equal quantities when |b| is
    # far below |a|; evaluate it in extended precision so the ratio keeps
    # meaning over wide magnitude spreads
    al = a.astype(np.longdouble)
    bl = b.astype(np.longdouble)
    nal = np.sqrt(np.dot(al, al))
    nbl = np.sqrt(np.dot(bl, bl))
    abl = np.dot(al, bl)
    nabl = np.sqrt(np.dot(al + bl, al + bl))
    numer = nabl**p - nal**p - p * nal ** (p - 2.0) * abl if na > 0 else nabl**p
    denom = nbl**2 * (nal + nbl) ** (p - 2.0)
    return VectorIneqRatio(float(numer / denom), False)


@dataclass(frozen=True)
class EnvelopeReport:
    """Observed extreme ratios over a random sample of vector pairs."""

    p: float
    samples: int
    c_min: float
    c_max: float


def vector_inequality_envelope(
    p: float,
    samples: int,
    rng: np.random.Generator,
    dim: int = 3,
    mag_range: tuple[float, float] = (1e-3, 1e3),
) -> EnvelopeReport:
    """Vectorized sweep of the inequality's ratio over random pairs.

    Directions are uniform on the sphere and magnitudes log-uniform over
    ``mag_range`` relative to |a| = 1 (the ratio is scale invariant).
    """
    n = int(samples)
    a = rng.normal(size=(n, dim))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    bdir = rng.normal(size=(n, dim))
    bdir /= np.linalg.norm(bdir, axis=1, keepdims=True)
    lo, hi = mag_range
    mags = np.exp(rng.uniform(math.log(lo), math.log(hi), size=n))
    # when |b| << |a| the numerator loses ~ (|a+b|/|b|)^2 relative digits to
    # cancellation, which at the bottom of mag_range swamps the p = 2
    # constancy of the ratio; extended precision keeps the sweep honest
    al = a.astype(np.longdouble)
    bl = (bdir * mags[:, None]).astype(np.longdouble)
    na = np.sqrt(np.einsum("ij,ij->i", al, al))
    nb = np.sqrt(np.einsum("ij,ij->i", bl, bl))
    ab = al + bl
    nab = np.sqrt(np.einsum("ij,ij->i", ab, ab))
    numer = nab**p - na**p - p * np.einsum("ij,ij->i", al, bl)
    denom = nb**2 * (na + nb) ** (p - 2.0)
    ratios = (numer / denom).astype(float)
    if not np.all(np.isfinite(ratios)):
        raise FloatingPointError("non-finite ratio encountered in envelope sweep")
    return EnvelopeReport(p, n, float(ratios.min()), float(ratios.max()))


# ---------------------------------------------------------------------------
# Poincare-type residual
# ---------------------------------------------------------------------------

def poincare_residual(
    u: Field,
    v_ground: Field,
    weight: PotentialSpec,
    psi: Field,
    C: float,
    problem: RadialProblem,
) -> float:
    """Residual of the ground-state Poincare inequality at constant C:

        Q(u) + C |integral of psi u|^p - (1/C) integral of W |u|^p.

    Nonnegative residuals over a family of test functions witness the
    inequality with that C.  psi must pair nontrivially with the ground
    state (the functional on the left otherwise degenerates on multiples
    of v_ground).
    """
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    _check_same_grid(u, v_ground, psi)
    g = u.grid
    p = problem.p
    pairing_ground = float(np.sum(psi.values * v_ground.values * g.node_w))
    if pairing_ground == 0.0 or not np.isfinite(pairing_ground):
        raise PreconditionError("psi must satisfy integral(psi * v_ground) != 0")
    wvals = weight.sample(g.nodes)
    if np.any(wvals < 0.0):
        raise PreconditionError("the weight W must be nonnegative")
    q = energy_Q(u, problem).total
    pairing = float(np.sum(psi.values * u.values * g.node_w))
    mass = float(np.sum(wvals * np.abs(u.values) ** p * g.node_w))
    return q + C * abs(pairing) ** p - mass / C
