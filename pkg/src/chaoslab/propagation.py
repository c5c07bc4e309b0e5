"""Time evolution: spectral propagator for static Hamiltonians, adaptive
Runge-Kutta stepping for time-dependent ones.

Every static-Hamiltonian diagnostic in this package runs through the
spectral route: at these dimensions (<= ~1200) a full diagonalization is
cheap and each sample of exp(-iHt) is then exact to floating point, which
matters for horizons as long as 4e5 time units.  The stepped route exists
only for genuinely time-dependent Hamiltonians; it never renormalizes the
state, so norm drift stays visible as the error monitor.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh

from .errors import NumericalConvergenceError
from .hilbert import assert_hermitian


@dataclass(frozen=True)
class SpectralPropagator:
    """Eigendecomposition H = V diag(w) V^dag reused across evolution calls."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    dim: int

    def coefficients(self, psi0: np.ndarray) -> np.ndarray:
        """Eigenbasis coefficients V^dag psi0."""
        psi0 = np.asarray(psi0, dtype=complex)
        if psi0.shape[0] != self.dim:
            raise ValueError(f"state dim {psi0.shape[0]} != propagator dim {self.dim}")
        return self.eigenvectors.conj().T @ psi0

    def evolve(self, psi0: np.ndarray, t: float) -> np.ndarray:
        """psi(t) = V e^{-i w t} V^dag psi0."""
        c = self.coefficients(psi0)
        return self.eigenvectors @ (np.exp(-1j * self.eigenvalues * t) * c)

    def evolve_series(self, psi0: np.ndarray, times) -> np.ndarray:
        """States at all sample times; returns an array of shape (len(times), dim)."""
        times = np.asarray(times, dtype=float)
        c = self.coefficients(psi0)
        phases = np.exp(-1j * np.outer(times, self.eigenvalues))
        return (phases * c) @ self.eigenvectors.T


def diagonalize(h: np.ndarray, herm_tol: float = 1e-12,
                check: bool = True) -> SpectralPropagator:
    """Diagonalize a Hermitian matrix and verify the reconstruction.

    Raises on non-Hermitian input; the reconstruction residual must stay
    below 1e-9 * max|H| and the eigenvector frame must be orthonormal to
    1e-10 (LAPACK guarantees far better in practice).
    """
    h = np.asarray(h)
    assert_hermitian(h, herm_tol, "Hamiltonian")
    w, v = eigh(h)
    prop = SpectralPropagator(eigenvalues=w, eigenvectors=v, dim=h.shape[0])
    if check:
        scale = max(np.max(np.abs(h)), 1e-300)
        resid = np.max(np.abs((v * w) @ v.conj().T - h))
        if resid > 1e-9 * scale:
            raise NumericalConvergenceError(
                f"eigendecomposition residual {resid:.3e} exceeds 1e-9 * max|H|")
        ortho = np.max(np.abs(v.conj().T @ v - np.eye(h.shape[0])))
        if ortho > 1e-10:
            raise NumericalConvergenceError(
                f"eigenvector frame not orthonormal (deviation {ortho:.3e})")
    return prop


def evolve(prop: SpectralPropagator, psi0: np.ndarray, t: float) -> np.ndarray:
    return prop.evolve(psi0, t)


def evolve_series(prop: SpectralPropagator, psi0: np.ndarray, times) -> np.ndarray:
    return prop.evolve_series(psi0, times)


def integrate_schrodinger(rhs, psi0: np.ndarray, times, tol: float = 1e-9,
                          method: str = "DOP853") -> np.ndarray:
    """Integrate dpsi/dt = rhs(t, psi) through the sample times.

    The right-hand side must already include the -iH factor.  Norm drift
    above tol is treated as non-convergence (no renormalization is applied,
    hiding the drift would hide the error).
    """
    times = np.asarray(times, dtype=float)
    psi0 = np.asarray(psi0, dtype=complex)
    # run the solver two decades below the requested drift budget
    rtol = max(1e-2 * tol, 2.3e-14)
    sol = solve_ivp(rhs, (times[0], times[-1]), psi0, method=method,
                    t_eval=times, rtol=rtol, atol=rtol * 1e-3, dense_output=False)
    if not sol.success:
        raise NumericalConvergenceError(f"time-dependent propagation failed: {sol.message}")
    states = sol.y.T
    norms = np.linalg.norm(states, axis=1)
    drift = np.max(np.abs(norms - 1.0))
    if drift >= tol:
        raise NumericalConvergenceError(
            f"norm drift {drift:.3e} exceeds the requested tolerance {tol:.1e}")
    return states


def evolve_time_dependent(h_builder, psi0: np.ndarray, t_end: float,
                          tol: float = 1e-9, t_eval=None,
                          method: str = "DOP853") -> np.ndarray:
    """Propagate under a time-dependent Hamiltonian h_builder(t).

    Returns the final state, or the full (len(t_eval), dim) series when
    t_eval is given.
    """
    def rhs(t, y):
        return -1j * (h_builder(t) @ y)

    if t_eval is None:
        states = integrate_schrodinger(rhs, psi0, [0.0, t_end], tol, method)
        return states[-1]
    return integrate_schrodinger(rhs, psi0, t_eval, tol, method)
