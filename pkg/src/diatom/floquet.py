"""Non-perturbative field-dressed electronic states on the truncated basis.

dc limit: diagonalize E_n(R) delta_nn' - [M D_nn']_z E_z.
ac limit: Floquet quasienergies from the Fourier-extended matrix, with an
independent check from the eigenphases of the one-period propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .electronic import ElectronicModel
from .errors import ConfigError, DomainError, PropagationError, TrackingError
from .fields import projected_dipole

TIE_THRESHOLD = 0.01
DEFAULT_FOURIER_CUTOFF = 8
MAX_FOURIER_CUTOFF = 64
FOURIER_TOL = 1e-11


def coupling_matrix(model: ElectronicModel, R: float, theta: float) -> np.ndarray:
    """Matrix K with W = K * E_z: K_nn' = -[M(theta, phi) D_nn']_z.

    The diagonal includes the nuclear dipole kappa R, which is common to
    every electronic state.
    """
    D = model.dipole_tensor(R)
    K = -projected_dipole(D, theta)
    K -= math.cos(theta) * model.nuclear_dipole_z(R) * np.eye(model.n_states)
    return K


def fold(energy, omega: float, center: float):
    """Map quasienergies into (center - omega/2, center + omega/2]."""
    x = np.asarray(energy, dtype=float) - center
    k = np.ceil(x / omega - 0.5)
    return (x - k * omega + center)[()]


@dataclass
class DressedSpectrum:
    R: float
    theta: float
    phi: float
    E_z: float
    energies: np.ndarray
    vectors: np.ndarray
    tracking: dict
    weights: np.ndarray

    def tracked_energy(self, n: int) -> float:
        return float(self.energies[self.tracking[n]])


def _assign(overlap):
    """Field-free index -> dressed index maximising total |overlap|^2."""
    rows, cols = linear_sum_assignment(-overlap)
    return {int(r): int(c) for r, c in zip(rows, cols)}


def dc_adiabatic_states(
    model: ElectronicModel,
    R: float,
    theta: float,
    phi: float,
    E_z: float,
    reference: np.ndarray | None = None,
) -> DressedSpectrum:
    """Eigenstates of the dc-dressed electronic Hamiltonian at fixed geometry.

    ``reference`` (columns = previous dressed vectors, in field-free order)
    lets a sweep continue labels smoothly; by default states are matched to
    the field-free basis.
    """
    if model.n_states < 2:
        raise ConfigError("dc adiabatic states need at least two electronic states")
    H = np.diag(model.energies(R)) + coupling_matrix(model, R, theta) * E_z
    evals, evecs = np.linalg.eigh(H)
    ref = np.eye(model.n_states) if reference is None else np.asarray(reference)
    overlap = np.abs(ref.T @ evecs) ** 2
    tracking = _assign(overlap)
    weights = np.array([overlap[n, tracking[n]] for n in range(model.n_states)])
    return DressedSpectrum(float(R), float(theta), float(phi), float(E_z), evals, evecs, tracking, weights)


def floquet_matrix(
    model: ElectronicModel, R: float, theta: float, E_amp: float, omega: float, M: int
) -> np.ndarray:
    """Real symmetric Floquet matrix over Fourier blocks m = -M..M.

    Diagonal blocks diag(E_n) + m omega; neighbouring blocks are coupled
    by V/2 with V = K E_amp (carrier cos(omega t) = (e^{iwt} + e^{-iwt})/2).
    Row index of (m, n) is (m + M) * N + n.
    """
    if int(M) != M or M < 1:
        raise ConfigError(f"Fourier cutoff M must be an integer >= 1, got {M}")
    if not omega > 0:
        raise DomainError("Floquet matrix needs omega_L > 0")
    M = int(M)
    E = model.energies(R)
    N = len(E)
    half_v = 0.5 * E_amp * coupling_matrix(model, R, theta)
    size = N * (2 * M + 1)
    F = np.zeros((size, size))
    for b, m in enumerate(range(-M, M + 1)):
        s = slice(b * N, (b + 1) * N)
        F[s, s] = np.diag(E + m * omega)
        if b > 0:
            p = slice((b - 1) * N, b * N)
            F[p, s] = half_v
            F[s, p] = half_v
    return F


@dataclass
class FloquetResult:
    omega: float
    M: int
    R: float
    theta: float
    E_amp: float
    state: int
    quasienergy: float
    weight: float
    all_quasienergies: np.ndarray
    vectors: np.ndarray
    tracking: dict
    weights: dict
    converged: bool = True
    history: list = field(default_factory=list)

    @property
    def n_states(self):
        return self.vectors.shape[1]

    def coefficients(self, k: int) -> np.ndarray:
        """C_{m n'} of eigenvector ``k`` as an array indexed [m + M, n']."""
        return self.vectors[:, :, k]

    def folded(self, center: float | None = None) -> np.ndarray:
        """All quasienergies reduced to the zone centred on ``center`` (default: tracked field-free energy)."""
        c = self.quasienergy if center is None else center
        return np.sort(fold(self.all_quasienergies, self.omega, c))

    def tracked_quasienergies(self) -> np.ndarray:
        """Unfolded quasienergy continuing each field-free state n (index order)."""
        return np.array([self.all_quasienergies[self.tracking[n]] for n in range(self.n_states)])


def _solve_floquet(model, R, theta, E_amp, omega, M, state):
    F = floquet_matrix(model, R, theta, E_amp, omega, M)
    N = model.n_states
    evals, evecs = np.linalg.eigh(F)
    C = evecs.reshape(2 * M + 1, N, -1)
    w0 = np.abs(C[M]) ** 2  # weights of the m = 0 block, [n, k]
    tracking, weights = {}, {}
    for n in range(N):
        order = np.argsort(w0[n])[::-1]
        tracking[n] = int(order[0])
        weights[n] = float(w0[n, order[0]])
        if n == state and w0[n, order[0]] - w0[n, order[1]] < TIE_THRESHOLD:
            raise TrackingError(
                f"ambiguous Floquet tracking of state {n} at R={R}, theta={theta}, "
                f"E_amp={E_amp}, omega={omega}: top m=0 weights "
                f"{w0[n, order[0]]:.4f} (quasienergy {evals[order[0]]:.10g}) and "
                f"{w0[n, order[1]]:.4f} (quasienergy {evals[order[1]]:.10g})"
            )
    return FloquetResult(
        float(omega), M, float(R), float(theta), float(E_amp), state,
        float(evals[tracking[state]]), weights[state], evals, C, tracking, weights,
    )


def quasienergies(
    model: ElectronicModel,
    R: float,
    theta: float,
    E_amp: float,
    omega: float,
    M: int | None = None,
    state: int | None = None,
    tol: float = FOURIER_TOL,
    max_M: int = MAX_FOURIER_CUTOFF,
) -> FloquetResult:
    """Floquet quasienergy of the dressed state continuing ``state`` (default: ground).

    With ``M=None`` the Fourier cutoff starts at 8 and doubles until the
    tracked quasienergy moves by less than ``tol`` (at most ``max_M``);
    ``converged`` is False if the cap is hit first.
    """
    state = model.ground_index if state is None else state
    model._state(state)
    if M is not None:
        return _solve_floquet(model, R, theta, E_amp, omega, M, state)
    M = DEFAULT_FOURIER_CUTOFF
    prev = _solve_floquet(model, R, theta, E_amp, omega, M, state)
    history = [(M, prev.quasienergy)]
    while True:
        M *= 2
        if M > max_M:
            prev.converged = False
            prev.history = history
            return prev
        cur = _solve_floquet(model, R, theta, E_amp, omega, M, state)
        history.append((M, cur.quasienergy))
        if abs(cur.quasienergy - prev.quasienergy) < tol:
            cur.history = history
            return cur
        prev = cur


def one_period_propagator(
    model: ElectronicModel, R: float, theta: float, E_amp: float, omega: float, steps: int = 4000
) -> np.ndarray:
    """U(T, 0) for H(t) = diag(E_n) + V cos(omega t), midpoint-sampled exponential steps."""
    if not omega > 0:
        raise DomainError("monodromy needs omega_L > 0")
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    E = model.energies(R)
    V = E_amp * coupling_matrix(model, R, theta)
    T = 2 * math.pi / omega
    dt = T / steps
    U = np.eye(len(E), dtype=complex)
    H0 = np.diag(E)
    for k in range(steps):
        t = (k + 0.5) * dt
        w, v = np.linalg.eigh(H0 + V * math.cos(omega * t))
        U = (v * np.exp(-1j * w * dt)) @ v.T @ U
    return U


def monodromy_quasienergies(
    model: ElectronicModel,
    R: float,
    theta: float,
    E_amp: float,
    omega: float,
    steps: int = 4000,
    center: float | None = None,
) -> np.ndarray:
    """Quasienergies -(1/T) arg(lambda) of the one-period propagator, folded around ``center``.

    ``center`` defaults to the field-free ground energy. Sorted ascending.
    """
    U = one_period_propagator(model, R, theta, E_amp, omega, steps)
    err = np.max(np.abs(U.conj().T @ U - np.eye(len(U))))
    if err > 1e-8:
        raise PropagationError(f"one-period propagator not unitary (|U^dag U - I| = {err:.2e}); use more steps")
    T = 2 * math.pi / omega
    lam = np.linalg.eigvals(U)
    eps = -np.angle(lam) / T
    if center is None:
        center = float(model.potential(model.ground_index, R))
    return np.sort(fold(eps, omega, center))


def monodromy_tracked_quasienergy(
    model: ElectronicModel,
    R: float,
    theta: float,
    E_amp: float,
    omega: float,
    steps: int = 4000,
    state: int | None = None,
) -> tuple[float, float]:
    """(quasienergy, weight) of the monodromy eigenvector with the largest overlap on ``state``.

    The quasienergy is folded into the zone centred on E_state(R), where the
    extended-matrix method reports its tracked value.
    """
    state = model.ground_index if state is None else state
    U = one_period_propagator(model, R, theta, E_amp, omega, steps)
    lam, vec = np.linalg.eig(U)
    w = np.abs(vec[state]) ** 2 / np.sum(np.abs(vec) ** 2, axis=0)
    k = int(np.argmax(w))
    T = 2 * math.pi / omega
    center = float(model.potential(state, R))
    return float(fold(-np.angle(lam[k]) / T, omega, center)), float(w[k])
