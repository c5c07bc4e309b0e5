"""Truncated qubit (x) Fock Hilbert space: operators, states, reductions.

Basis convention (pinned by tests): the flat index of a product basis state
is k = s*(n_max+1) + n, where s = 0 labels the qubit ground state |G>,
s = 1 the excited state |E>, and n in [0, n_max] the photon number.  The
qubit index varies slowest, so full-space embeddings are
np.kron(qubit_op, cavity_op).

Truncation is a hard cutoff: adag|n_max> = 0.  Validity is enforced by
tail-mass preconditions on coherent-state constructors and by convergence
checks downstream, never by the operator algebra itself.
"""

from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy.special import gammainc

from .errors import BlochDomainError, TruncationError

# Mass a coherent state may carry above the cutoff before construction fails.
COHERENT_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class FockTruncation:
    """Hard Fock cutoff |0> ... |n_max>; full dimension 2*(n_max+1)."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim_cavity(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def flat_index(self, s: int, n: int) -> int:
        if s not in (0, 1) or not 0 <= n <= self.n_max:
            raise ValueError(f"invalid basis labels (s={s}, n={n})")
        return s * (self.n_max + 1) + n


def assert_hermitian(m: np.ndarray, tol: float = 1e-12, name: str = "operator"):
    """Raise if max |M - M^dag| exceeds tol."""
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise ValueError(f"{name} is not Hermitian (max deviation {dev:.3e})")


def check_ket(psi: np.ndarray, tol: float = 1e-9, name: str = "state") -> np.ndarray:
    """Validate a state vector's norm; returns the array unchanged."""
    psi = np.asarray(psi)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"{name} is not normalized (|norm - 1| = {abs(nrm - 1.0):.3e})")
    return psi


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-12,
                         trace_tol: float = 1e-9, eig_tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho)
    assert_hermitian(rho, herm_tol, "density matrix")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace deviates from 1 by {abs(tr - 1.0):.3e}")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {w.min():.3e}")
    return rho


@dataclass(frozen=True)
class OperatorSet:
    """Cavity/qubit operators and their embeddings on the full space."""

    trunc: FockTruncation
    # cavity-only blocks, dimension n_max+1
    a_cav: np.ndarray = field(repr=False)
    adag_cav: np.ndarray = field(repr=False)
    n_cav: np.ndarray = field(repr=False)
    id_cav: np.ndarray = field(repr=False)
    # qubit-only blocks, dimension 2
    sz_q: np.ndarray = field(repr=False)
    sp_q: np.ndarray = field(repr=False)
    sm_q: np.ndarray = field(repr=False)
    id_q: np.ndarray = field(repr=False)
    # embeddings on the full space, dimension 2*(n_max+1)
    a: np.ndarray = field(repr=False)
    adag: np.ndarray = field(repr=False)
    number: np.ndarray = field(repr=False)
    sigma_z: np.ndarray = field(repr=False)
    sigma_plus: np.ndarray = field(repr=False)
    sigma_minus: np.ndarray = field(repr=False)
    identity: np.ndarray = field(repr=False)

    @property
    def quadrature(self) -> np.ndarray:
        """Field quadrature (a + adag)/2 on the full space."""
        return 0.5 * (self.a + self.adag)


def build_operators(trunc: FockTruncation) -> OperatorSet:
    """Construct ladder/Pauli operators and their full-space embeddings.

    a|n> = sqrt(n)|n-1>, adag|n> = sqrt(n+1)|n+1> with adag|n_max> = 0
    (hard truncation).  sigma_z|E> = +|E>, sigma_z|G> = -|G>,
    sigma_plus|G> = |E>.
    """
    nc = trunc.dim_cavity
    a_cav = np.diag(np.sqrt(np.arange(1, nc, dtype=float)), k=1).astype(complex)
    adag_cav = a_cav.conj().T
    n_cav = adag_cav @ a_cav
    id_cav = np.eye(nc, dtype=complex)

    # qubit basis ordering (|G>, |E>)
    sz_q = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
    sp_q = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    sm_q = sp_q.conj().T
    id_q = np.eye(2, dtype=complex)

    return OperatorSet(
        trunc=trunc,
        a_cav=a_cav, adag_cav=adag_cav, n_cav=n_cav, id_cav=id_cav,
        sz_q=sz_q, sp_q=sp_q, sm_q=sm_q, id_q=id_q,
        a=tensor(id_q, a_cav),
        adag=tensor(id_q, adag_cav),
        number=tensor(id_q, n_cav),
        sigma_z=tensor(sz_q, id_cav),
        sigma_plus=tensor(sp_q, id_cav),
        sigma_minus=tensor(sm_q, id_cav),
        identity=np.eye(2 * nc, dtype=complex),
    )


def tensor(qubit_op: np.ndarray, cavity_op: np.ndarray) -> np.ndarray:
    """Qubit (x) cavity product in the qubit-major flat-index convention."""
    qubit_op = np.asarray(qubit_op)
    cavity_op = np.asarray(cavity_op)
    if qubit_op.shape[0] != 2 or qubit_op.shape[0] != qubit_op.shape[1]:
        raise ValueError(f"qubit operator must be 2x2, got {qubit_op.shape}")
    if cavity_op.shape[0] != cavity_op.shape[1]:
        raise ValueError(f"cavity operator must be square, got {cavity_op.shape}")
    return np.kron(qubit_op, cavity_op)


def _split_dims(rho: np.ndarray):
    d = rho.shape[0]
    if rho.shape != (d, d) or d % 2 != 0:
        raise ValueError(f"expected a square matrix on a 2*(n_max+1) space, got {rho.shape}")
    return 2, d // 2


def partial_trace_cavity(rho: np.ndarray, validate: bool = True) -> np.ndarray:
    """Trace out the cavity; returns the 2x2 qubit reduced matrix."""
    dq, nc = _split_dims(rho)
    if validate:
        check_density_matrix(rho)
    return np.einsum("anbn->ab", rho.reshape(dq, nc, dq, nc))


def partial_trace_qubit(rho: np.ndarray, validate: bool = True) -> np.ndarray:
    """Trace out the qubit; returns the (n_max+1)-dimensional cavity reduced matrix."""
    dq, nc = _split_dims(rho)
    if validate:
        check_density_matrix(rho)
    return np.einsum("snsm->nm", rho.reshape(dq, nc, dq, nc))


def reduced_qubit_from_ket(psi: np.ndarray) -> np.ndarray:
    """Qubit reduced density matrix of a pure full-space state."""
    a = np.asarray(psi).reshape(2, -1)
    return a @ a.conj().T


def reduced_cavity_from_ket(psi: np.ndarray) -> np.ndarray:
    """Cavity reduced density matrix of a pure full-space state."""
    a = np.asarray(psi).reshape(2, -1)
    return a.T @ a.conj()


def coherent_tail_mass(beta: complex, n_max: int) -> float:
    """Poisson mass of |beta|^2 above photon number n_max (exact)."""
    mu = abs(beta) ** 2
    if mu == 0.0:
        return 0.0
    # survival function of Poisson(mu) at n_max via the regularized gamma
    return float(gammainc(n_max + 1, mu))


def glauber_state(beta: complex, trunc: FockTruncation) -> np.ndarray:
    """Cavity coherent state with amplitudes e^{-|b|^2/2} b^n / sqrt(n!).

    Fails if the truncated tail mass exceeds COHERENT_TAIL_TOL; the result
    is renormalized on the kept amplitudes.
    """
    tail = coherent_tail_mass(beta, trunc.n_max)
    if tail >= COHERENT_TAIL_TOL:
        raise TruncationError(
            f"coherent state |beta|={abs(beta):.4g} leaves mass {tail:.3e} above "
            f"n_max={trunc.n_max}; increase the cutoff")
    n = np.arange(trunc.dim_cavity)
    if beta == 0:
        amps = np.zeros(trunc.dim_cavity, dtype=complex)
        amps[0] = 1.0
        return amps
    # log-magnitudes avoid overflow of beta^n for large |beta|
    logmag = n * np.log(abs(beta)) - 0.5 * np.array([lgamma(k + 1) for k in n]) \
        - 0.5 * abs(beta) ** 2
    amps = np.exp(logmag) * np.exp(1j * n * np.angle(beta))
    return amps / np.linalg.norm(amps)


def bloch_state(tau: complex) -> np.ndarray:
    """Qubit spin coherent state (|G> + tau |E>)/sqrt(1 + |tau|^2)."""
    v = np.array([1.0, tau], dtype=complex)
    return v / np.sqrt(1.0 + abs(tau) ** 2)


def product_state(tau: complex, beta: complex, trunc: FockTruncation) -> np.ndarray:
    """Full-space product of a qubit and a cavity coherent state."""
    return np.kron(bloch_state(tau), glauber_state(beta, trunc))


@dataclass(frozen=True)
class PhasePoint:
    """Semiclassical coordinates; (q1, p1) live on the disk q1^2 + p1^2 <= 2."""

    q1: float
    p1: float
    q2: float
    p2: float

    def __post_init__(self):
        r2 = self.q1 ** 2 + self.p1 ** 2
        if r2 > 2.0 + 1e-12:
            raise BlochDomainError(
                f"q1^2 + p1^2 = {r2:.6g} > 2; point leaves the qubit phase disk")

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.p1, self.q2, self.p2])


def labels_to_phase(tau: complex, beta: complex) -> PhasePoint:
    """Map coherent-state labels to phase-space coordinates."""
    scale = np.sqrt(2.0 / (1.0 + abs(tau) ** 2))
    return PhasePoint(
        q1=scale * tau.real,
        p1=scale * tau.imag,
        q2=np.sqrt(2.0) * complex(beta).real,
        p2=np.sqrt(2.0) * complex(beta).imag,
    )


def phase_to_labels(point: PhasePoint):
    """Inverse coordinate map; requires the strict interior q1^2 + p1^2 < 2."""
    r2 = point.q1 ** 2 + point.p1 ** 2
    if r2 >= 2.0:
        raise BlochDomainError(
            f"q1^2 + p1^2 = {r2:.6g} is not inside the disk; tau is undefined")
    tau = (point.q1 + 1j * point.p1) / np.sqrt(2.0 - r2)
    beta = (point.q2 + 1j * point.p2) / np.sqrt(2.0)
    return tau, beta


def expectation(op: np.ndarray, psi: np.ndarray) -> complex:
    """<psi| op |psi> with a dimension check."""
    psi = np.asarray(psi)
    if op.shape[1] != psi.shape[0]:
        raise ValueError(f"operator dim {op.shape} does not match state dim {psi.shape}")
    return complex(np.vdot(psi, op @ psi))


def variance(op: np.ndarray, psi: np.ndarray) -> float:
    """var[op] = <op^2> - <op>^2 for Hermitian op; nonnegative up to rounding."""
    psi = np.asarray(psi)
    if op.shape[1] != psi.shape[0]:
        raise ValueError(f"operator dim {op.shape} does not match state dim {psi.shape}")
    w = op @ psi
    # <op^2> = ||op psi||^2 keeps the result real and >= -1e-12 by construction
    return float(np.vdot(w, w).real - np.vdot(psi, w).real ** 2)
