"""Physical parameters, Hamiltonian builders and frame transformations.

Works in units delta_c = 1 (so time is measured in 1/delta_c).  The drive
amplitude lam and the squeezing parameter r are locked together through
tanh(2r) = lam/delta_c; r is the primary input and lam is derived unless
the caller supplies lam instead.

Hamiltonians (squeezed frame, dimension 2*(n_max+1)):

    H_rabi = (delta_a/2) sz + Omega_c(r) adag a + g_tilde (adag + a)(sp + sm)
    H_err  = -(g/2) e^{-r} (adag - a)(sp - sm)
    H_eff  = H_rabi + H_err

Rotated frame (static):

    H_rot = (delta_a/2) sz + delta_c adag a + g(adag sm + a sp)
            - (lam/2)(adag^2 + a^2)

Laboratory frame (time dependent through the drive phase):

    H_lab(t) = (omega_a/2) sz + omega_c adag a + g(adag sm + a sp)
               - (lam/2)(e^{-i omega_p t} adag^2 + e^{+i omega_p t} a^2)

All constant energy shifts generated by the squeezing transformation are
dropped; they only contribute a global phase, and every comparison made
here goes through |overlap|^2.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import PhysicsPreconditionError, TruncationError
from .hilbert import (FockTruncation, OperatorSet, assert_hermitian,
                      build_operators, tensor)
from .propagation import diagonalize, integrate_schrodinger

# Ratio of qubit detuning to effective cavity frequency above which the
# model admits a semiclassical many-body description.
ETA_SEMICLASSICAL_THRESHOLD = 18.0

# Mass the squeezed vacuum may carry above (n_max - margin) before the
# squeeze unitary is considered unrepresentable at this cutoff.
SQUEEZED_TAIL_TOL = 1e-6
SQUEEZED_TAIL_MARGIN = 20


@dataclass(frozen=True)
class SystemParams:
    """Frequencies and couplings in units delta_c = 1.

    Exactly one of r / lam may be given; the other follows from
    tanh(2r) = lam/delta_c.  omega_p only matters in the laboratory frame;
    the lab frequencies are omega_{a,c} = delta_{a,c} + omega_p/2.
    """

    delta_a: float
    g: float
    r: float = None
    lam: float = None
    omega_p: float = 0.0
    delta_c: float = 1.0

    def __post_init__(self):
        if self.g < 0:
            raise PhysicsPreconditionError(f"coupling g must be >= 0, got {self.g}")
        if self.r is None and self.lam is None:
            raise PhysicsPreconditionError("one of r or lam must be given")
        if self.r is not None and self.r < 0:
            raise PhysicsPreconditionError(f"squeezing parameter r must be >= 0, got {self.r}")
        if self.lam is not None and abs(self.lam) >= abs(self.delta_c):
            raise PhysicsPreconditionError(
                f"|lam| = {abs(self.lam):.6g} reaches the instability threshold "
                f"|delta_c| = {abs(self.delta_c):.6g}")
        if self.r is None:
            object.__setattr__(self, "r", 0.5 * math.atanh(self.lam / self.delta_c))
        elif self.lam is None:
            object.__setattr__(self, "lam", self.delta_c * math.tanh(2.0 * self.r))
        else:
            expected = 0.5 * math.atanh(self.lam / self.delta_c)
            if abs(expected - self.r) > 1e-12:
                raise PhysicsPreconditionError(
                    f"r = {self.r} inconsistent with lam = {self.lam} "
                    f"(tanh(2r) = lam/delta_c requires r = {expected})")

    @property
    def omega_a(self) -> float:
        return self.delta_a + 0.5 * self.omega_p

    @property
    def omega_c(self) -> float:
        return self.delta_c + 0.5 * self.omega_p

    def with_r(self, r: float) -> "SystemParams":
        """Same detunings and bare coupling, different squeezing."""
        return SystemParams(delta_a=self.delta_a, g=self.g, r=r,
                            omega_p=self.omega_p, delta_c=self.delta_c)


@dataclass(frozen=True)
class DerivedParams:
    """Squeezed-frame quantities derived from SystemParams in closed form."""

    g_tilde: float
    omega_c_eff: float
    eta: float
    g_crit: float
    phase: str  # "normal" | "superradiant"
    eta_semiclassical: bool


def derive_params(p: SystemParams) -> DerivedParams:
    """Enhanced coupling, effective cavity frequency, frequency ratio and
    critical coupling; classifies the phase by g_tilde vs g_crit."""
    g_tilde = 0.5 * p.g * math.exp(p.r)
    omega_c_eff = p.delta_c / math.cosh(2.0 * p.r)
    eta = (p.delta_a / p.delta_c) * math.cosh(2.0 * p.r)
    g_crit = 0.5 * math.sqrt(p.delta_a * omega_c_eff)
    return DerivedParams(
        g_tilde=g_tilde,
        omega_c_eff=omega_c_eff,
        eta=eta,
        g_crit=g_crit,
        phase="superradiant" if g_tilde > g_crit else "normal",
        eta_semiclassical=eta > ETA_SEMICLASSICAL_THRESHOLD,
    )


def _ops(trunc: FockTruncation, ops: OperatorSet = None) -> OperatorSet:
    return ops if ops is not None else build_operators(trunc)


def build_h_rabi(p: SystemParams, trunc: FockTruncation, ops: OperatorSet = None) -> np.ndarray:
    d = derive_params(p)
    o = _ops(trunc, ops)
    h = (0.5 * p.delta_a * o.sigma_z
         + d.omega_c_eff * o.number
         + d.g_tilde * (o.adag + o.a) @ (o.sigma_plus + o.sigma_minus))
    assert_hermitian(h, name="H_rabi")
    return h


def build_h_err(p: SystemParams, trunc: FockTruncation, ops: OperatorSet = None) -> np.ndarray:
    o = _ops(trunc, ops)
    h = -0.5 * p.g * math.exp(-p.r) * (o.adag - o.a) @ (o.sigma_plus - o.sigma_minus)
    assert_hermitian(h, name="H_err")
    return h


def build_h_eff(p: SystemParams, trunc: FockTruncation, ops: OperatorSet = None,
                err_scale: float = 1.0) -> np.ndarray:
    """H_rabi + err_scale * H_err; err_scale != 1 supports perturbation studies."""
    o = _ops(trunc, ops)
    return build_h_rabi(p, trunc, o) + err_scale * build_h_err(p, trunc, o)


def build_h_rotated(p: SystemParams, trunc: FockTruncation, ops: OperatorSet = None) -> np.ndarray:
    o = _ops(trunc, ops)
    h = (0.5 * p.delta_a * o.sigma_z
         + p.delta_c * o.number
         + p.g * (o.adag @ o.sigma_minus + o.a @ o.sigma_plus)
         - 0.5 * p.lam * (o.adag @ o.adag + o.a @ o.a))
    assert_hermitian(h, name="H_rotated")
    return h


def build_h_lab(p: SystemParams, t: float, trunc: FockTruncation,
                ops: OperatorSet = None) -> np.ndarray:
    o = _ops(trunc, ops)
    h0, drive = lab_hamiltonian_parts(p, trunc, o)
    phase = np.exp(-1j * p.omega_p * t)
    h = h0 + phase * drive + np.conj(phase) * drive.conj().T
    assert_hermitian(h, name="H_lab(t)")
    return h


def lab_hamiltonian_parts(p: SystemParams, trunc: FockTruncation,
                          ops: OperatorSet = None):
    """Static part and drive part D of H_lab(t) = H0 + e^{-i w_p t} D + h.c."""
    o = _ops(trunc, ops)
    h0 = (0.5 * p.omega_a * o.sigma_z
          + p.omega_c * o.number
          + p.g * (o.adag @ o.sigma_minus + o.a @ o.sigma_plus))
    drive = -0.5 * p.lam * (o.adag @ o.adag)
    return h0, drive


def squeezed_vacuum_tail_mass(r: float, n_above: int) -> float:
    """Photon-number mass of the squeezed vacuum above n_above (log-space sum)."""
    if r == 0.0:
        return 0.0
    log_tanh = math.log(math.tanh(abs(r)))
    log_cosh = math.log(math.cosh(abs(r)))
    # P(2k) = (2k)! / (4^k k!^2) * tanh(r)^{2k} / cosh(r); sum the retained mass
    kept = 0.0
    k = 0
    while 2 * k <= n_above:
        logp = (lgamma_cached(2 * k + 1) - 2 * lgamma_cached(k + 1)
                - k * math.log(4.0) + 2 * k * log_tanh - log_cosh)
        kept += math.exp(logp)
        k += 1
    return max(0.0, 1.0 - kept)


_LGAMMA_CACHE: dict = {}


def lgamma_cached(x: int) -> float:
    v = _LGAMMA_CACHE.get(x)
    if v is None:
        v = math.lgamma(x)
        _LGAMMA_CACHE[x] = v
    return v


def squeeze_unitary(r: float, trunc: FockTruncation,
                    margin: int = SQUEEZED_TAIL_MARGIN) -> np.ndarray:
    """Full-space squeeze unitary U_S = exp[r (a^2 - adag^2)/2] (x) qubit identity.

    Computed by exact matrix exponential of the generator on an enlarged
    working truncation (n_max + margin), then projected back, so the edge
    error stays confined near the cutoff.  Fails when the squeezed vacuum
    cannot be represented below n_max - margin.
    """
    tail = squeezed_vacuum_tail_mass(r, trunc.n_max - SQUEEZED_TAIL_MARGIN)
    if tail >= SQUEEZED_TAIL_TOL:
        raise TruncationError(
            f"squeezed vacuum at r={r:.4g} leaves mass {tail:.3e} above "
            f"n_max-{SQUEEZED_TAIL_MARGIN}={trunc.n_max - SQUEEZED_TAIL_MARGIN}; "
            f"increase n_max or reduce r")
    u_cav = squeeze_unitary_cavity(r, trunc, margin)
    return tensor(np.eye(2), u_cav)


def squeeze_unitary_cavity(r: float, trunc: FockTruncation,
                           margin: int = SQUEEZED_TAIL_MARGIN) -> np.ndarray:
    """Cavity-only block of the squeeze unitary (no tail precondition)."""
    n_work = trunc.dim_cavity + margin
    a = np.diag(np.sqrt(np.arange(1, n_work, dtype=float)), k=1)
    gen = 0.5 * (a @ a - a.T @ a.T)  # real antisymmetric -> expm is orthogonal
    u_work = expm(r * gen)
    return u_work[:trunc.dim_cavity, :trunc.dim_cavity].astype(complex)


def rotation_phases(p: SystemParams, t: float, trunc: FockTruncation) -> np.ndarray:
    """Diagonal of U_R(t) = exp[i (omega_p/2)(adag a + sz/2) t]."""
    n = np.arange(trunc.dim_cavity)
    gen = np.concatenate([n - 0.5, n + 0.5])  # sz/2 eigenvalues: -1/2 on |G>, +1/2 on |E>
    return np.exp(1j * 0.5 * p.omega_p * t * gen)


def rotation_unitary(p: SystemParams, t: float, trunc: FockTruncation) -> np.ndarray:
    """Rotating-frame unitary as a full-space (diagonal) matrix."""
    return np.diag(rotation_phases(p, t, trunc))


def bogoliubov_residual(r: float, trunc: FockTruncation, interior_dim: int,
                        margin: int = SQUEEZED_TAIL_MARGIN) -> float:
    """Max deviation of U_S a U_S^dag from a cosh r + adag sinh r on the
    leading interior_dim x interior_dim block of the cavity space."""
    u = squeeze_unitary_cavity(r, trunc, margin)
    nc = trunc.dim_cavity
    a = np.diag(np.sqrt(np.arange(1, nc, dtype=float)), k=1).astype(complex)
    lhs = u @ a @ u.conj().T
    rhs = a * math.cosh(r) + a.conj().T * math.sinh(r)
    m = interior_dim
    return float(np.max(np.abs(lhs[:m, :m] - rhs[:m, :m])))


def verify_frame_equivalence(p: SystemParams, psi0_squeezed: np.ndarray, t_end: float,
                             steps: int, trunc: FockTruncation,
                             margin: int = SQUEEZED_TAIL_MARGIN,
                             integrator_tol: float = 1e-10):
    """Propagate the same initial condition in the laboratory frame and in the
    squeezed frame and return the squared overlap at sampled times.

    The lab state starts from U_S^dag psi0 and evolves under the (generally
    time-dependent) lab Hamiltonian; the squeezed-frame state evolves under
    the static effective Hamiltonian.  The overlap compares the lab state
    against U_R^dag(t) U_S^dag psi_S(t); constant energy shifts dropped from
    the effective Hamiltonian only affect the global phase, to which the
    squared overlap is insensitive.  Requires constant r (no drive-amplitude
    ramp term).

    Returns (times, overlaps, trunc_loss) where trunc_loss is the norm lost
    when preparing the lab initial state (a truncation-error budget).
    """
    from .diagnostics import TimeSeries  # local import avoids a cycle

    psi0_squeezed = np.asarray(psi0_squeezed, dtype=complex)
    if psi0_squeezed.shape[0] != trunc.dim:
        raise ValueError("initial state dimension does not match truncation")

    u_s = squeeze_unitary(p.r, trunc, margin)
    psi_lab0 = u_s.conj().T @ psi0_squeezed
    trunc_loss = 1.0 - float(np.vdot(psi_lab0, psi_lab0).real)
    psi_lab0 = psi_lab0 / np.linalg.norm(psi_lab0)

    times = np.linspace(0.0, t_end, steps + 1)
    ops = build_operators(trunc)

    # squeezed-frame side: static H_eff, spectral evolution
    prop_eff = diagonalize(build_h_eff(p, trunc, ops))
    states_s = prop_eff.evolve_series(psi0_squeezed, times)

    # lab side: spectral when the drive phase is static, stepped otherwise
    if p.omega_p == 0.0:
        prop_lab = diagonalize(build_h_lab(p, 0.0, trunc, ops))
        states_lab = prop_lab.evolve_series(psi_lab0, times)
    else:
        h0, drive = lab_hamiltonian_parts(p, trunc, ops)
        drive_dag = drive.conj().T

        def rhs(t, y):
            phase = np.exp(-1j * p.omega_p * t)
            return -1j * (h0 @ y + phase * (drive @ y) + np.conj(phase) * (drive_dag @ y))

        states_lab = integrate_schrodinger(rhs, psi_lab0, times, tol=integrator_tol)

    # overlap(t) = |<psi_lab(t)| U_R^dag(t) U_S^dag |psi_S(t)>|^2
    back = states_s @ u_s.conj()  # rows are U_S^dag psi_S(t)
    overlaps = np.empty(len(times))
    for i, t in enumerate(times):
        pred = np.conj(rotation_phases(p, t, trunc)) * back[i]
        overlaps[i] = abs(np.vdot(states_lab[i], pred)) ** 2
    return TimeSeries(times=times, values=overlaps, label="frame_overlap"), trunc_loss
