"""Classical limit: mean-field Hamiltonian, trajectories and Poincare sections.

Phase space is (q1, p1, q2, p2) with the qubit pair confined to the disk
q1^2 + p1^2 <= 2; the square root sqrt(4 - 2(q1^2 + p1^2)) appearing in the
Hamiltonian is singular on the rim, so trajectory integration requires the
strict interior and aborts on boundary contact.

The classical Hamiltonian (coherent-state expectation of the effective
Hamiltonian) reads

    H = (delta_a/2)(q1^2 + p1^2 - 1) + (Omega_c/2)(q2^2 + p2^2)
        + g_tilde q1 q2 F - (g/2) e^{-r} p1 p2 F,     F = sqrt(4 - 2(q1^2+p1^2))

Sections are taken on q2 = 0 with p2 > 0.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import BlochDomainError, NumericalConvergenceError, PhysicsPreconditionError
from .hilbert import PhasePoint
from .model import SystemParams, derive_params

BOUNDARY_GUARD = 1e-6   # trajectories abort when q1^2+p1^2 reaches 2 - this
Q2_REFINE_TOL = 1e-10   # |q2| bound every stored crossing must satisfy


def _coefficients(p: SystemParams):
    d = derive_params(p)
    return p.delta_a, d.omega_c_eff, d.g_tilde, -0.5 * p.g * math.exp(-p.r)


def _as_array(pt) -> np.ndarray:
    if isinstance(pt, PhasePoint):
        return pt.as_array()
    return np.asarray(pt, dtype=float)


def classical_energy(pt, p: SystemParams) -> float:
    """Mean-field energy of a phase point (scalar or batched on axis 0)."""
    y = _as_array(pt)
    q1, p1, q2, p2 = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
    rho2 = q1 ** 2 + p1 ** 2
    if np.any(rho2 > 2.0 + 1e-12):
        raise BlochDomainError("q1^2 + p1^2 > 2: outside the qubit phase disk")
    da, omc, c1, c2 = _coefficients(p)
    f = np.sqrt(np.maximum(4.0 - 2.0 * rho2, 0.0))
    h = (0.5 * da * (rho2 - 1.0) + 0.5 * omc * (q2 ** 2 + p2 ** 2)
         + (c1 * q1 * q2 + c2 * p1 * p2) * f)
    return float(h) if h.ndim == 0 else h


def classical_gradient(pt, p: SystemParams) -> np.ndarray:
    """(dH/dq1, dH/dp1, dH/dq2, dH/dp2); needs the strict interior because
    the gradient of F diverges on the rim."""
    q1, p1, q2, p2 = _as_array(pt)
    rho2 = q1 ** 2 + p1 ** 2
    if rho2 > 2.0 - 1e-9:
        raise BlochDomainError(
            f"q1^2 + p1^2 = {rho2:.9g} too close to the rim for a gradient")
    da, omc, c1, c2 = _coefficients(p)
    f = math.sqrt(4.0 - 2.0 * rho2)
    mix = c1 * q1 * q2 + c2 * p1 * p2
    return np.array([
        da * q1 + c1 * q2 * f - 2.0 * q1 * mix / f,
        da * p1 + c2 * p2 * f - 2.0 * p1 * mix / f,
        omc * q2 + c1 * q1 * f,
        omc * p2 + c2 * p1 * f,
    ])


def hamiltons_rhs(p: SystemParams):
    """Right-hand side (dq1, dp1, dq2, dp2)/dt of Hamilton's equations."""
    da, omc, c1, c2 = _coefficients(p)

    def rhs(t, y):
        q1, p1, q2, p2 = y
        rho2 = q1 * q1 + p1 * p1
        f = math.sqrt(max(4.0 - 2.0 * rho2, 1e-300))
        mix = c1 * q1 * q2 + c2 * p1 * p2
        dh_q1 = da * q1 + c1 * q2 * f - 2.0 * q1 * mix / f
        dh_p1 = da * p1 + c2 * p2 * f - 2.0 * p1 * mix / f
        dh_q2 = omc * q2 + c1 * q1 * f
        dh_p2 = omc * p2 + c2 * p1 * f
        return (dh_p1, -dh_q1, dh_p2, -dh_q2)

    return rhs


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    points: np.ndarray          # shape (n, 4)
    energy_drift: float         # max |H(t) - H(0)| / max(|H(0)|, 1e-30)


def _boundary_event():
    def ev(t, y):
        return (2.0 - BOUNDARY_GUARD) - (y[0] * y[0] + y[1] * y[1])
    ev.terminal = True
    ev.direction = -1
    return ev


def integrate_trajectory(pt0, p: SystemParams, t_end: float, tol: float = 1e-12,
                         n_samples: int = 2000, drift_tol: float = 1e-8) -> Trajectory:
    """Integrate Hamilton's equations with an adaptive high-order Runge-Kutta
    pair; aborts on boundary contact and enforces the energy-drift budget."""
    y0 = _as_array(pt0)
    if y0[0] ** 2 + y0[1] ** 2 >= 2.0 - BOUNDARY_GUARD:
        raise BlochDomainError("initial point too close to the qubit phase-disk rim")
    times = np.linspace(0.0, t_end, n_samples)
    sol = solve_ivp(hamiltons_rhs(p), (0.0, t_end), y0, method="DOP853",
                    t_eval=times, rtol=tol, atol=tol * 1e-2,
                    events=[_boundary_event()])
    if sol.status == 1:
        raise BlochDomainError(
            f"trajectory reached q1^2+p1^2 = 2 - {BOUNDARY_GUARD} at t = {sol.t_events[0][0]:.6g}")
    if not sol.success:
        raise NumericalConvergenceError(f"trajectory integration failed: {sol.message}")
    pts = sol.y.T
    e = classical_energy(pts, p)
    e0 = classical_energy(y0, p)
    drift = float(np.max(np.abs(e - e0)) / max(abs(e0), 1e-30))
    if drift >= drift_tol:
        raise NumericalConvergenceError(
            f"energy drift {drift:.3e} exceeds the budget {drift_tol:.1e}; tighten tol")
    return Trajectory(times=times, points=pts, energy_drift=drift)


@dataclass(frozen=True)
class PoincareSection:
    """Crossings of q2 = 0 with p2 > 0 collected from one or more seeds."""

    crossings: np.ndarray        # shape (m, 2): (q1, p1) at each crossing
    energy: float
    params: SystemParams
    complete: bool               # found the requested number of crossings
    seed_indices: np.ndarray     # provenance: which seed produced each crossing
    energy_drift: float


def poincare_section(pt0, p: SystemParams, max_crossings: int = 500,
                     t_max: float = None, tol: float = 1e-12,
                     drift_tol: float = 1e-8, _seed_index: int = 0) -> PoincareSection:
    """Collect up to max_crossings section points from a single trajectory.

    Integration proceeds in windows so a fast-crossing orbit stops early;
    every crossing is located by root refinement on the dense interpolant
    until |q2| < 1e-10.  Too few crossings within t_max flags the section as
    incomplete rather than failing.
    """
    y0 = _as_array(pt0)
    if y0[0] ** 2 + y0[1] ** 2 >= 2.0 - BOUNDARY_GUARD:
        raise BlochDomainError("initial point too close to the qubit phase-disk rim")
    d = derive_params(p)
    if t_max is None:
        # one upward q2-crossing per field cycle, times a generous factor
        t_max = max_crossings * (2.0 * math.pi / d.omega_c_eff) * 4.0

    rhs = hamiltons_rhs(p)
    e0 = classical_energy(y0, p)

    def ev_cross(t, y):
        return y[2]
    ev_cross.terminal = False
    ev_cross.direction = 0

    crossings = []
    drift_max = 0.0
    t0, y = 0.0, y0
    window = t_max / 40.0
    while t0 < t_max and len(crossings) < max_crossings:
        t1 = min(t0 + window, t_max)
        sol = solve_ivp(rhs, (t0, t1), y, method="DOP853", rtol=tol, atol=tol * 1e-2,
                        events=[ev_cross, _boundary_event()], dense_output=True)
        if sol.status == 1:
            raise BlochDomainError(
                f"trajectory reached the qubit phase-disk rim at t = {sol.t_events[1][0]:.6g}")
        if not sol.success:
            raise NumericalConvergenceError(f"section integration failed: {sol.message}")
        for te in sol.t_events[0]:
            ye = sol.sol(te)
            if abs(ye[2]) > Q2_REFINE_TOL:
                te = _refine_crossing(sol.sol, te, sol.t, p)
                ye = sol.sol(te)
            if ye[3] > 0.0 and abs(ye[2]) <= Q2_REFINE_TOL:
                crossings.append((ye[0], ye[1]))
                drift_max = max(drift_max, abs(classical_energy(ye, p) - e0))
                if len(crossings) >= max_crossings:
                    break
        # drift check at window boundaries as well
        drift_max = max(drift_max, abs(classical_energy(sol.y[:, -1], p) - e0))
        t0, y = sol.t[-1], sol.y[:, -1]

    drift = drift_max / max(abs(e0), 1e-30)
    if drift >= drift_tol:
        raise NumericalConvergenceError(
            f"energy drift {drift:.3e} exceeds the budget {drift_tol:.1e}; tighten tol")
    arr = np.array(crossings) if crossings else np.empty((0, 2))
    return PoincareSection(
        crossings=arr, energy=e0, params=p,
        complete=len(crossings) >= max_crossings,
        seed_indices=np.full(len(crossings), _seed_index, dtype=int),
        energy_drift=drift,
    )


def _refine_crossing(dense, te, t_grid, p) -> float:
    """Bracket the sign change around a coarse event time and bisect with
    brentq on the dense interpolant."""
    dt = max((t_grid[-1] - t_grid[0]) * 1e-6, 1e-12)
    lo, hi = te - dt, te + dt
    f = lambda t: dense(t)[2]
    flo, fhi = f(lo), f(hi)
    k = 0
    while flo * fhi > 0 and k < 60:
        dt *= 2.0
        lo, hi = te - dt, te + dt
        flo, fhi = f(lo), f(hi)
        k += 1
    if flo * fhi > 0:
        return te
    return brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16)


@dataclass(frozen=True)
class ShellSolution:
    p2: float
    ambiguous: bool   # two positive roots existed; the larger one is returned


def solve_p2_on_shell(q1: float, p1: float, energy: float,
                      p: SystemParams) -> Optional[ShellSolution]:
    """Positive p2 placing (q1, p1, q2=0, p2) on the energy shell, if any.

    With q2 = 0 the shell condition is quadratic in p2:
        (Omega_c/2) p2^2 + c2 p1 F p2 + [(delta_a/2)(q1^2+p1^2-1) - E] = 0.
    """
    rho2 = q1 ** 2 + p1 ** 2
    if rho2 > 2.0:
        raise BlochDomainError("q1^2 + p1^2 > 2: outside the qubit phase disk")
    da, omc, _, c2 = _coefficients(p)
    f = math.sqrt(max(4.0 - 2.0 * rho2, 0.0))
    a = 0.5 * omc
    b = c2 * p1 * f
    c = 0.5 * da * (rho2 - 1.0) - energy
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    roots = [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
    pos = [r for r in roots if r > 0.0]
    if not pos:
        return None
    return ShellSolution(p2=max(pos), ambiguous=len(pos) == 2)


def _section_worker(args):
    seed_index, q1, p1, p2, p, max_crossings, t_max, tol, drift_tol = args
    return poincare_section((q1, p1, 0.0, p2), p, max_crossings, t_max,
                            tol, drift_tol, _seed_index=seed_index)


def section_scan(seeds, p: SystemParams, energy: float, crossings_per_seed: int = 300,
                 t_max: float = None, tol: float = 1e-12, drift_tol: float = 1e-8,
                 n_jobs: int = 1) -> PoincareSection:
    """Merge sections from many (q1, p1) seeds placed on one energy shell.

    Inadmissible seeds (no positive shell root) are skipped; it is an error
    if none remain.  The merge is deterministic: crossings are concatenated
    in seed order with per-seed provenance retained.
    """
    tasks = []
    for i, (q1, p1) in enumerate(seeds):
        if q1 ** 2 + p1 ** 2 >= 2.0 - BOUNDARY_GUARD:
            continue
        root = solve_p2_on_shell(q1, p1, energy, p)
        if root is None:
            continue
        tasks.append((i, q1, p1, root.p2, p, crossings_per_seed, t_max, tol, drift_tol))
    if not tasks:
        raise PhysicsPreconditionError(
            f"no admissible seeds on the shell E = {energy:.6g}")
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            sections = list(pool.map(_section_worker, tasks))
    else:
        sections = [_section_worker(t) for t in tasks]
    crossings = np.concatenate([s.crossings for s in sections])
    seed_idx = np.concatenate([s.seed_indices for s in sections])
    return PoincareSection(
        crossings=crossings, energy=energy, params=p,
        complete=all(s.complete for s in sections),
        seed_indices=seed_idx,
        energy_drift=max(s.energy_drift for s in sections),
    )


def default_seed_grid(n_ring: int = 12, ring_radius: float = 1.0,
                      n_radial: int = 5) -> list:
    """Ring plus radial lattice of (q1, p1) seeds inside the phase disk."""
    seeds = []
    for k in range(n_ring):
        th = 2.0 * math.pi * k / n_ring
        seeds.append((ring_radius * math.cos(th), ring_radius * math.sin(th)))
    for k in range(1, n_radial + 1):
        x = k * math.sqrt(2.0) * 0.9 / (n_radial + 1)
        seeds.append((x, 0.0))
        seeds.append((0.0, x))
    return seeds


def closed_curve_statistic(crossings: np.ndarray) -> float:
    """Gap-uniformity statistic for section points: max consecutive gap over
    median gap after sorting by angle about the centroid.  Well-ordered rings
    score low; scattered chaotic clouds score high."""
    pts = np.asarray(crossings)
    if len(pts) < 8:
        raise ValueError("need at least 8 crossings for the closed-curve statistic")
    center = pts.mean(axis=0)
    rel = pts - center
    order = np.argsort(np.arctan2(rel[:, 1], rel[:, 0]))
    ring = pts[order]
    diffs = np.diff(np.vstack([ring, ring[:1]]), axis=0)
    gaps = np.hypot(diffs[:, 0], diffs[:, 1])
    med = np.median(gaps)
    if med <= 0:
        return float("inf")
    return float(gaps.max() / med)
