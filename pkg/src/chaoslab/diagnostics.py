"""Quantum chaos indicators: echoes, correlators, entropies, phase-space maps.

Every diagnostic is a pure function of (params, initial state, sample times)
and evolves states spectrally under the static squeezed-frame Hamiltonians.
Summation orders are fixed, so identical inputs produce identical outputs.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GridCoverageError, NumericalConvergenceError, PhysicsPreconditionError
from .hilbert import (FockTruncation, PhasePoint, build_operators,
                      check_density_matrix, partial_trace_cavity,
                      phase_to_labels, product_state)
from .model import SystemParams, build_h_eff, build_h_rabi
from .propagation import SpectralPropagator, diagonalize
from .semiclassical import solve_p2_on_shell

OTOC_EPSILON_WARN = 0.1


@dataclass(frozen=True)
class TimeSeries:
    """Sampled scalar diagnostic; times in units 1/delta_c, strictly increasing."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values))
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


def time_average(series: TimeSeries, t_end: float = None) -> float:
    """Trapezoidal time average of a series over [t0, t_end]."""
    t, v = series.times, series.values
    if t_end is None:
        t_end = t[-1]
    if t[-1] < t_end - 1e-12:
        raise ValueError(f"series ends at {t[-1]:.6g}, before t_end = {t_end:.6g}")
    mask = t <= t_end
    tt, vv = t[mask], v[mask]
    if tt[-1] < t_end:  # close the interval on the interpolated endpoint
        tt = np.append(tt, t_end)
        vv = np.append(vv, np.interp(t_end, t, v))
    return float(np.trapezoid(vv, tt) / (tt[-1] - tt[0]))


def _propagator(p: SystemParams, trunc: FockTruncation, hamiltonian: str,
                err_scale: float = 1.0) -> SpectralPropagator:
    ops = build_operators(trunc)
    if hamiltonian == "eff":
        h = build_h_eff(p, trunc, ops, err_scale=err_scale)
    elif hamiltonian == "rabi":
        h = build_h_rabi(p, trunc, ops)
    else:
        raise ValueError(f"hamiltonian must be 'eff' or 'rabi', got {hamiltonian!r}")
    return diagonalize(h)


# ---------------------------------------------------------------------------
# fidelity / Loschmidt echo
# ---------------------------------------------------------------------------

def fidelity(psi_a: np.ndarray, psi_b: np.ndarray) -> float:
    """|<a|b>|^2 for two kets of equal dimension."""
    psi_a, psi_b = np.asarray(psi_a), np.asarray(psi_b)
    if psi_a.shape != psi_b.shape:
        raise ValueError(f"state dims differ: {psi_a.shape} vs {psi_b.shape}")
    return float(abs(np.vdot(psi_a, psi_b)) ** 2)


def loschmidt_echo(p: SystemParams, psi0: np.ndarray, times,
                   trunc: FockTruncation, err_scale: float = 1.0) -> TimeSeries:
    """Overlap of evolution with and without the enhancement error term.

    L(t) = |<psi0| e^{+i H_rabi t} e^{-i H_eff t} |psi0>|^2, evaluated as the
    fidelity between the two forward evolutions (algebraically identical).
    """
    times = np.asarray(times, dtype=float)
    states_rabi = _propagator(p, trunc, "rabi").evolve_series(psi0, times)
    states_eff = _propagator(p, trunc, "eff", err_scale).evolve_series(psi0, times)
    amp = np.sum(states_rabi.conj() * states_eff, axis=1)
    return TimeSeries(times=times, values=np.abs(amp) ** 2, label="loschmidt_echo")


def fidelity_vs_r_scan(p_base: SystemParams, tau: complex, beta: complex,
                       t_end: float, r_values, trunc: FockTruncation,
                       n_jobs: int = 1) -> TimeSeries:
    """Long-time echo L(t_end) as a function of the squeezing parameter.

    Each r rebuilds the squeezed-frame Hamiltonians (the effective cavity
    frequency, enhanced coupling and error prefactor all change) while the
    initial coherent-state labels stay fixed.
    """
    r_values = np.sort(np.asarray(r_values, dtype=float))
    psi0 = product_state(tau, beta, trunc)
    ops = build_operators(trunc)

    def at_r(r):
        p = p_base.with_r(float(r))
        prop_rabi = diagonalize(build_h_rabi(p, trunc, ops))
        prop_eff = diagonalize(build_h_eff(p, trunc, ops))
        return fidelity(prop_rabi.evolve(psi0, t_end), prop_eff.evolve(psi0, t_end))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            vals = list(pool.map(at_r, r_values))
    else:
        vals = [at_r(r) for r in r_values]
    return TimeSeries(times=r_values, values=np.array(vals),
                      label=f"echo_at_T={t_end:g}_vs_r")


# ---------------------------------------------------------------------------
# out-of-time-order correlator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OtocConfig:
    """Perturbation strength and sample grid for the correlator."""

    epsilon: float
    times: np.ndarray
    generator: str = "quadrature"   # or "sigma_x" (hook, not exercised by defaults)

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.epsilon > OTOC_EPSILON_WARN:
            warnings.warn(f"epsilon = {self.epsilon} is large; the variance "
                          f"expansion assumes eps^2 var[G] << 1", stacklevel=2)


def _generator_matrix(ops, which: str) -> np.ndarray:
    if which == "quadrature":
        return 0.5 * (ops.a + ops.adag)
    if which == "sigma_x":
        return ops.sigma_plus + ops.sigma_minus
    raise ValueError(f"unknown generator {which!r}")


def otoc_variance(p: SystemParams, psi0: np.ndarray, times, trunc: FockTruncation,
                  generator: str = "quadrature") -> TimeSeries:
    """var[G(t)] in the effectively-evolved state (Heisenberg expectation
    values equal Schroedinger ones, so G is applied to the evolved state)."""
    times = np.asarray(times, dtype=float)
    ops = build_operators(trunc)
    g = _generator_matrix(ops, generator)
    states = diagonalize(build_h_eff(p, trunc, ops)).evolve_series(psi0, times)
    gpsi = states @ g.T          # row i is (G psi_i)^T; G is symmetric here
    mean = np.sum(states.conj() * gpsi, axis=1).real
    second = np.sum(np.abs(gpsi) ** 2, axis=1)
    return TimeSeries(times=times, values=second - mean ** 2, label="var_G")


def otoc_direct(p: SystemParams, psi0: np.ndarray, cfg: OtocConfig,
                trunc: FockTruncation) -> TimeSeries:
    """Correlator F(t) = <phi| W^dag(t) V^dag W(t) V |phi> with the projector
    choice V = |phi><phi| and W = e^{i eps G}.

    With that V the four-point function collapses to a two-point form:
    W(t)V|phi> = e^{iHt} W |phi(t)>, then projecting with V^dag leaves
    c(t) = <phi(t)|W|phi(t)> twice, so F(t) = |<phi(t)| e^{i eps G} |phi(t)>|^2.
    """
    ops = build_operators(trunc)
    g = _generator_matrix(ops, cfg.generator)
    # unitary perturbation via the spectral decomposition of the Hermitian G
    wg, vg = np.linalg.eigh(g)
    w_op = (vg * np.exp(1j * cfg.epsilon * wg)) @ vg.conj().T
    states = diagonalize(build_h_eff(p, trunc, ops)).evolve_series(psi0, cfg.times)
    amp = np.sum(states.conj() * (states @ w_op.T), axis=1)
    return TimeSeries(times=cfg.times, values=np.abs(amp) ** 2, label="otoc_F")


def scrambling_time(series: TimeSeries, rel_tol: float = 1e-9) -> float:
    """Earliest sample time at which the series attains its global maximum
    (ties within rel_tol resolve to the earliest sample).  Warns when the
    maximum sits on the last sample: the horizon was probably too short."""
    if len(series.values) == 0:
        raise ValueError("empty series")
    vmax = float(np.max(series.values))
    idx = int(np.argmax(series.values >= vmax - rel_tol * abs(vmax)))
    if idx == len(series.times) - 1 and len(series.times) > 1:
        warnings.warn("series maximum sits at the horizon; scrambling time "
                      "may be underestimated", stacklevel=2)
    return float(series.times[idx])


def lyapunov_fit(series: TimeSeries, window) -> tuple:
    """Least-squares slope of ln(values) on a time window; returns
    (rate, r_squared).  Fits with r_squared < 0.9 should be treated as
    unreliable by callers."""
    t_lo, t_hi = window
    mask = (series.times >= t_lo) & (series.times <= t_hi)
    if not np.any(mask):
        raise ValueError(f"window [{t_lo}, {t_hi}] contains no samples")
    t = series.times[mask]
    v = series.values[mask]
    if np.any(v <= 0):
        raise ValueError("log-linear fit requires positive values on the window")
    y = np.log(v)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - ss_res / ss_tot
    return float(slope), r2


# ---------------------------------------------------------------------------
# entanglement entropy
# ---------------------------------------------------------------------------

def linear_entropy(rho_full: np.ndarray) -> float:
    """S = 1 - Tr[rho_qubit^2] of the qubit reduced state."""
    rho1 = partial_trace_cavity(check_density_matrix(rho_full), validate=False)
    return float(1.0 - np.trace(rho1 @ rho1).real)


def _entropy_of_states(states: np.ndarray) -> np.ndarray:
    """Linear entropy of the qubit for each pure full-space state (rows)."""
    nc = states.shape[1] // 2
    blocks = states.reshape(len(states), 2, nc)
    rho1 = np.einsum("tan,tbn->tab", blocks, blocks.conj())
    purity = np.einsum("tab,tba->t", rho1, rho1).real
    return 1.0 - purity


def entropy_series(p: SystemParams, psi0: np.ndarray, times, trunc: FockTruncation,
                   hamiltonian: str = "eff", err_scale: float = 1.0) -> TimeSeries:
    """Qubit linear entropy along the evolution under H_eff or H_rabi."""
    times = np.asarray(times, dtype=float)
    states = _propagator(p, trunc, hamiltonian, err_scale).evolve_series(psi0, times)
    return TimeSeries(times=times, values=_entropy_of_states(states),
                      label=f"linear_entropy_{hamiltonian}")


def average_entropy(series: TimeSeries, t_end: float) -> float:
    """Trapezoidal time average of an entropy series over [0, t_end]."""
    if series.times[0] > 1e-12:
        raise ValueError("series must start at t = 0")
    return time_average(series, t_end)


def average_entropy_converged(p: SystemParams, psi0: np.ndarray, t_end: float,
                              trunc: FockTruncation, hamiltonian: str = "eff",
                              err_scale: float = 1.0, n_samples: int = 2000,
                              rel_tol: float = 1e-4, max_doublings: int = 6):
    """Time-averaged entropy with the sample density doubled until the
    average stabilizes to rel_tol; returns (s_bar, samples_used)."""
    prop = _propagator(p, trunc, hamiltonian, err_scale)

    def s_bar(n):
        times = np.linspace(0.0, t_end, n)
        states = prop.evolve_series(psi0, times)
        return time_average(TimeSeries(times, _entropy_of_states(states)), t_end)

    n = n_samples
    prev = s_bar(n)
    for _ in range(max_doublings):
        n *= 2
        cur = s_bar(n)
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-30):
            return cur, n
        prev = cur
    raise NumericalConvergenceError(
        f"time-averaged entropy did not stabilize to {rel_tol:g} "
        f"within {max_doublings} doublings")


@dataclass(frozen=True)
class EntropyMap:
    """Time-averaged entropy over a (q1, p1) grid on one energy shell."""

    q1_axis: np.ndarray
    p1_axis: np.ndarray
    s_bar: np.ndarray        # shape (len(p1_axis), len(q1_axis)); NaN = masked
    p2: np.ndarray           # shell root used per cell; NaN = masked
    energy: float
    t_end: float


def entropy_map(p: SystemParams, energy: float, q1_axis, p1_axis, t_end: float,
                trunc: FockTruncation, n_samples: int = 2000,
                n_jobs: int = 1) -> EntropyMap:
    """Average entanglement entropy of shell-constrained product states.

    Each grid cell (q1, p1) is lifted to the energy shell by solving for
    p2 > 0 at q2 = 0; cells outside the qubit disk or with no positive shell
    root are masked.  Unmasked cells evolve under the effective Hamiltonian.
    """
    q1_axis = np.asarray(q1_axis, dtype=float)
    p1_axis = np.asarray(p1_axis, dtype=float)
    prop = _propagator(p, trunc, "eff")
    times = np.linspace(0.0, t_end, n_samples)

    cells = []
    p2_grid = np.full((len(p1_axis), len(q1_axis)), np.nan)
    for i, p1v in enumerate(p1_axis):
        for j, q1v in enumerate(q1_axis):
            if q1v ** 2 + p1v ** 2 >= 2.0:
                continue
            root = solve_p2_on_shell(q1v, p1v, energy, p)
            if root is None:
                continue
            p2_grid[i, j] = root.p2
            cells.append((i, j, q1v, p1v, root.p2))
    if not cells:
        raise PhysicsPreconditionError(
            f"no grid cell reaches the energy shell E = {energy:.6g}")

    def cell_average(cell):
        i, j, q1v, p1v, p2v = cell
        tau, beta = phase_to_labels(PhasePoint(q1v, p1v, 0.0, p2v))
        psi0 = product_state(tau, beta, trunc)
        states = prop.evolve_series(psi0, times)
        return time_average(TimeSeries(times, _entropy_of_states(states)), t_end)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            averages = list(pool.map(cell_average, cells))
    else:
        averages = [cell_average(c) for c in cells]

    s_grid = np.full((len(p1_axis), len(q1_axis)), np.nan)
    for (i, j, *_), val in zip(cells, averages):
        s_grid[i, j] = val
    return EntropyMap(q1_axis=q1_axis, p1_axis=p1_axis, s_bar=s_grid,
                      p2=p2_grid, energy=energy, t_end=t_end)


# ---------------------------------------------------------------------------
# recurrence probability
# ---------------------------------------------------------------------------

def recurrence(psi0: np.ndarray, p: SystemParams, times,
               trunc: FockTruncation) -> TimeSeries:
    """P(t) = |<psi0|psi(t)>|^2 under the effective Hamiltonian."""
    times = np.asarray(times, dtype=float)
    prop = _propagator(p, trunc, "eff")
    weights = np.abs(prop.coefficients(psi0)) ** 2
    phases = np.exp(-1j * np.outer(times, prop.eigenvalues))
    amp = phases @ weights
    return TimeSeries(times=times, values=np.abs(amp) ** 2, label="recurrence")


# ---------------------------------------------------------------------------
# Husimi distribution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HusimiGrid:
    """Cavity Husimi distribution Q(beta) sampled on a rectangular grid.

    q_values[i, j] corresponds to beta = re_beta_axis[j] + 1i*im_beta_axis[i].
    """

    re_beta_axis: np.ndarray
    im_beta_axis: np.ndarray
    q_values: np.ndarray
    snapshot_time: float

    def cell_area(self) -> float:
        dre = self.re_beta_axis[1] - self.re_beta_axis[0]
        dim_ = self.im_beta_axis[1] - self.im_beta_axis[0]
        return float(dre * dim_)

    def normalization(self) -> float:
        """Riemann sum of Q over the grid; 1 when the grid covers the state."""
        return float(np.sum(self.q_values) * self.cell_area())

    def centroid(self) -> complex:
        re, im = np.meshgrid(self.re_beta_axis, self.im_beta_axis)
        w = self.q_values * self.cell_area()
        m0 = np.sum(w)
        return complex(np.sum(w * re) / m0 + 1j * np.sum(w * im) / m0)

    def spread(self) -> float:
        """Second moment of Q about its centroid (phase-space variance)."""
        re, im = np.meshgrid(self.re_beta_axis, self.im_beta_axis)
        w = self.q_values * self.cell_area()
        c = self.centroid()
        return float(np.sum(w * ((re - c.real) ** 2 + (im - c.imag) ** 2)) / np.sum(w))


def coherent_projection_matrix(re_axis, im_axis, dim_cavity: int) -> np.ndarray:
    """Truncated coherent-state amplitudes for every grid point, shape
    (dim_cavity, n_points).  Amplitudes are the infinite-space ones (no
    renormalization): truncation loss is part of the coverage budget."""
    re, im = np.meshgrid(re_axis, im_axis)
    betas = (re + 1j * im).ravel()
    n = np.arange(dim_cavity)
    absb = np.abs(betas)
    absb_safe = np.where(absb > 0, absb, 1.0)
    logmag = (np.outer(n, np.log(absb_safe)) - 0.5 * np.outer(
        np.array([math.lgamma(k + 1) for k in n]), np.ones_like(absb))
        - 0.5 * absb ** 2)
    mat = np.exp(logmag) * np.exp(1j * np.outer(n, np.angle(betas)))
    zero = absb == 0
    if np.any(zero):
        mat[:, zero] = 0.0
        mat[0, zero] = 1.0
    return mat


def husimi_of_density(rho_cavity: np.ndarray, re_axis, im_axis,
                      snapshot_time: float = 0.0,
                      coverage_tol: float = 0.05) -> HusimiGrid:
    """Q(beta) = <beta| rho_cavity |beta> / pi over the grid, with a post-hoc
    normalization check that flags an undersized grid."""
    re_axis = np.asarray(re_axis, dtype=float)
    im_axis = np.asarray(im_axis, dtype=float)
    c = coherent_projection_matrix(re_axis, im_axis, rho_cavity.shape[0])
    q = np.einsum("np,np->p", c.conj(), rho_cavity @ c).real / math.pi
    grid = HusimiGrid(re_beta_axis=re_axis, im_beta_axis=im_axis,
                      q_values=q.reshape(len(im_axis), len(re_axis)),
                      snapshot_time=snapshot_time)
    norm = grid.normalization()
    if abs(norm - 1.0) > coverage_tol:
        raise GridCoverageError(
            f"Husimi grid captures mass {norm:.4f}; enlarge or refine the grid")
    return grid


def default_husimi_axes(rho_cavity: np.ndarray, points: int = 201,
                        pad: float = 1.5):
    """Symmetric axes covering pad * sqrt(n_support) of the cavity state."""
    pops = np.diag(rho_cavity).real
    cum = np.cumsum(pops) / np.sum(pops)
    n_support = int(np.searchsorted(cum, 1.0 - 1e-6)) + 1
    radius = pad * math.sqrt(n_support + 1.0)
    ax = np.linspace(-radius, radius, points)
    return ax, ax.copy()


def husimi_snapshot(p: SystemParams, psi0: np.ndarray, t: float,
                    trunc: FockTruncation, re_axis=None, im_axis=None,
                    points: int = 201, hamiltonian: str = "eff") -> HusimiGrid:
    """Husimi distribution of the cavity reduced state at one evolution time."""
    psi_t = _propagator(p, trunc, hamiltonian).evolve(psi0, t)
    blocks = psi_t.reshape(2, trunc.dim_cavity)
    rho2 = blocks.T @ blocks.conj()
    if re_axis is None or im_axis is None:
        re_axis, im_axis = default_husimi_axes(rho2, points)
    return husimi_of_density(rho2, re_axis, im_axis, snapshot_time=t)
