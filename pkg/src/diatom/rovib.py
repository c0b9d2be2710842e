"""Effective nuclear Hamiltonians of the field-dressed ground state and their dynamics.

Three reduced modes:

``rotor``
    rigid rotor at R = R_e, basis |j, m> with fixed m.
``rovib``
    rotor basis times a sine-DVR radial grid, centrifugal term L^2/(2 mu R^2).
``com``
    1-D centre-of-mass motion in the ponderomotive potential of a focused beam.

In the dc limit the potential is -E(t) mu_perm(R) cos(theta)
- (1/2) E(t)^2 [a_par cos^2 + a_perp sin^2]; in the ac limit only the
envelope amplitude enters, with a factor 1/4 and no cos(theta) term.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .electronic import ElectronicModel
from .errors import ConfigError, DomainError, PropagationError
from .fields import FieldSpec
from .perturbation import PolarizabilityCurve, dynamic_polarizability, static_polarizability

NORM_TOL = 1e-9
STEP_UNITARITY_TOL = 1e-12
TRUNCATION_TOL = 1e-10
EDGE_TOL = 1e-6


# --------------------------------------------------------------------------
# bases and grids
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RotorBasis:
    j_max: int = 40
    m: int = 0

    def __post_init__(self):
        if self.j_max < 0:
            raise ConfigError("j_max must be >= 0")
        if abs(self.m) > self.j_max:
            raise ConfigError(f"|m| = {abs(self.m)} exceeds j_max = {self.j_max}")

    @property
    def j(self) -> np.ndarray:
        return np.arange(abs(self.m), self.j_max + 1)

    @property
    def size(self) -> int:
        return self.j_max - abs(self.m) + 1

    def index(self, j: int) -> int:
        if not abs(self.m) <= j <= self.j_max:
            raise IndexError(f"j = {j} not in basis [{abs(self.m)}, {self.j_max}]")
        return j - abs(self.m)


def _cos_coupling(j, m):
    """<j+1, m| cos(theta) |j, m>."""
    return np.sqrt(((j + 1.0) ** 2 - m * m) / ((2.0 * j + 1.0) * (2.0 * j + 3.0)))


def _cos_matrix(j_lo, j_hi, m):
    j = np.arange(j_lo, j_hi)
    off = _cos_coupling(j, m)
    return np.diag(off, 1) + np.diag(off, -1)


def cos_theta_matrix(basis: RotorBasis) -> np.ndarray:
    return _cos_matrix(abs(basis.m), basis.j_max, basis.m)


def cos2_theta_matrix(basis: RotorBasis) -> np.ndarray:
    # square in a basis one j larger so the top-left block is exact
    c = _cos_matrix(abs(basis.m), basis.j_max + 1, basis.m)
    n = basis.size
    c2 = (c @ c)[:n, :n]
    return 0.5 * (c2 + c2.T)


def sine_dvr_kinetic(n: int, length: float, mass: float) -> np.ndarray:
    """-(1/2 mass) d^2/dx^2 on n interior points of a box of the given length (sine basis)."""
    k = np.arange(1, n + 1)
    S = math.sqrt(2.0 / (n + 1)) * np.sin(np.outer(k, k) * math.pi / (n + 1))
    kin = (k * math.pi / length) ** 2 / (2.0 * mass)
    T = (S * kin) @ S
    return 0.5 * (T + T.T)


@dataclass(frozen=True)
class RadialGrid:
    """Interior points R_min + i h, i = 1..N, h = (R_max - R_min)/(N + 1); psi vanishes at both ends."""

    R_min: float
    R_max: float
    N: int

    def __post_init__(self):
        if self.N < 32:
            raise ConfigError(f"radial grid needs N >= 32 points, got {self.N}")
        if not 0 < self.R_min < self.R_max:
            raise ConfigError("radial grid needs 0 < R_min < R_max")

    @property
    def spacing(self) -> float:
        return (self.R_max - self.R_min) / (self.N + 1)

    @property
    def points(self) -> np.ndarray:
        return self.R_min + self.spacing * np.arange(1, self.N + 1)

    def kinetic(self, mass: float) -> np.ndarray:
        return sine_dvr_kinetic(self.N, self.R_max - self.R_min, mass)

    def refined(self) -> "RadialGrid":
        return RadialGrid(self.R_min, self.R_max, 2 * self.N + 1)


@dataclass(frozen=True)
class LineGrid:
    """Periodic uniform grid for centre-of-mass motion (FFT kinetic energy)."""

    X_min: float
    X_max: float
    N: int

    def __post_init__(self):
        if self.N < 32:
            raise ConfigError("centre-of-mass grid needs N >= 32 points")
        if not self.X_max > self.X_min:
            raise ConfigError("centre-of-mass grid needs X_max > X_min")

    @property
    def spacing(self) -> float:
        return (self.X_max - self.X_min) / self.N

    @property
    def points(self) -> np.ndarray:
        return self.X_min + self.spacing * np.arange(self.N)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * math.pi * np.fft.fftfreq(self.N, d=self.spacing)

    def kinetic(self, mass: float) -> np.ndarray:
        """Dense matrix of the FFT kinetic operator (exactly the propagator's)."""
        k2 = self.wavenumbers ** 2 / (2.0 * mass)
        T = np.fft.ifft(k2[:, None] * np.fft.fft(np.eye(self.N), axis=0), axis=0).real
        return 0.5 * (T + T.T)


# --------------------------------------------------------------------------
# wavepackets
# --------------------------------------------------------------------------


@dataclass
class Wavepacket:
    """Coefficients over the mode's basis: rotor [j], rovib [j, R_i], com [X_i].

    Grid amplitudes use the discrete normalisation sum |c|^2 = 1.
    """

    mode: str
    coefficients: np.ndarray
    time: float = 0.0
    basis: RotorBasis | None = None
    grid: RadialGrid | LineGrid | None = None
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in ("rotor", "rovib", "com"):
            raise ConfigError(f"unknown wavepacket mode {self.mode!r}")
        self.coefficients = np.asarray(self.coefficients, dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.coefficients, self.coefficients).real))

    def normalized(self) -> "Wavepacket":
        n = self.norm
        if n == 0:
            raise DomainError("cannot normalize a zero wavepacket")
        return Wavepacket(self.mode, self.coefficients / n, self.time, self.basis, self.grid, list(self.warnings))

    def copy(self) -> "Wavepacket":
        return Wavepacket(self.mode, self.coefficients.copy(), self.time, self.basis, self.grid, list(self.warnings))


def rotor_state(basis: RotorBasis, amplitudes: dict | int) -> Wavepacket:
    """Normalized rotor wavepacket from ``{j: amplitude}`` (or a single j)."""
    if isinstance(amplitudes, (int, np.integer)):
        amplitudes = {int(amplitudes): 1.0}
    c = np.zeros(basis.size, dtype=complex)
    for j, a in amplitudes.items():
        c[basis.index(j)] = a
    return Wavepacket("rotor", c, basis=basis).normalized()


def rovib_state(basis: RotorBasis, grid: RadialGrid, radial, j: int = 0) -> Wavepacket:
    """Product of a radial grid function and a single |j, m>."""
    radial = np.asarray(radial, dtype=complex)
    if radial.shape != (grid.N,):
        raise ConfigError("radial function must live on the grid points")
    c = np.zeros((basis.size, grid.N), dtype=complex)
    c[basis.index(j)] = radial
    return Wavepacket("rovib", c, basis=basis, grid=grid).normalized()


def gaussian_packet(grid: LineGrid, x0: float, sigma: float, p0: float = 0.0) -> Wavepacket:
    """Minimal-uncertainty packet with <(X - x0)^2> = sigma^2."""
    X = grid.points
    psi = np.exp(-((X - x0) ** 2) / (4 * sigma * sigma) + 1j * p0 * X)
    return Wavepacket("com", psi, grid=grid).normalized()


# --------------------------------------------------------------------------
# effective Hamiltonian
# --------------------------------------------------------------------------


class EffectiveHamiltonian:
    """Field-dressed nuclear Hamiltonian of the electronic ground state in one reduced mode.

    Time enters only through the field strength s(t) (dc instantaneous
    strength or ac envelope amplitude, at the beam centre for rotor/rovib):

        c1(R, t) = -s mu_perm(R)                    (dc only)
        c2(R, t) = -f s^2 (a_par - a_perp)(R)
        offset   = -f s^2 a_perp(R)

    with f = 1/2 (dc) or 1/4 (ac).
    """

    def __init__(self, mode, limit, field_spec, *, basis=None, grid=None, mass=None,
                 R=None, potential=None, mu_perm=None, a_par=None, a_perp=None, alpha_bar=None):
        self.mode = mode
        self.limit = limit
        self.field = field_spec
        self.basis = basis
        self.grid = grid
        self.mass = mass
        self.R = R
        self.potential = potential
        self.mu_perm = mu_perm
        self.a_par = a_par
        self.a_perp = a_perp
        self.alpha_bar = alpha_bar
        self.factor = 0.5 if limit == "dc" else 0.25
        if mode in ("rotor", "rovib"):
            self._C1 = cos_theta_matrix(basis)
            self._C2 = cos2_theta_matrix(basis)
            self._L2 = (basis.j * (basis.j + 1.0)).astype(float)
        if mode == "rotor":
            self.B = 1.0 / (2.0 * mass * R * R)
        if mode == "rovib":
            self._T = grid.kinetic(mass)
        if mode == "com":
            self._X = grid.points

    @property
    def is_static(self) -> bool:
        return self.field is None or self.field.is_static

    def strength(self, t: float) -> float:
        if self.field is None:
            return 0.0
        return float(self.field.strength(0.0, t))

    def coefficients(self, t: float):
        """(c1, c2, offset) at time t; arrays over the grid in rovib mode."""
        s = self.strength(t)
        c1 = -s * self.mu_perm if self.limit == "dc" else 0.0 * self.mu_perm
        pref = -self.factor * s * s
        return c1, pref * (self.a_par - self.a_perp), pref * self.a_perp

    # rotor ------------------------------------------------------------------

    def matrix(self, t: float = 0.0) -> np.ndarray:
        """Dense rotor-mode matrix B L^2 + offset + c1 cos + c2 cos^2."""
        if self.mode != "rotor":
            raise ConfigError("matrix() is only defined in rotor mode")
        c1, c2, off = self.coefficients(t)
        H = c1 * self._C1 + c2 * self._C2
        H[np.diag_indices_from(H)] += self.B * self._L2 + off
        return H

    # rovib ------------------------------------------------------------------

    def angular_blocks(self, t: float) -> np.ndarray:
        """Potential + centrifugal part as one (j x j) matrix per grid point, shape (N_R, nj, nj)."""
        c1, c2, off = self.coefficients(t)
        R = self.grid.points
        blocks = c1[:, None, None] * self._C1 + c2[:, None, None] * self._C2
        diag = self.potential[:, None] + off[:, None] + self._L2[None, :] / (2.0 * self.mass * R[:, None] ** 2)
        idx = np.arange(len(self._L2))
        blocks[:, idx, idx] += diag
        return blocks

    # com --------------------------------------------------------------------

    def trap_potential(self, t: float) -> np.ndarray:
        s = self.field.strength(self._X, t) if self.field is not None else 0.0 * self._X
        return -self.factor * self.alpha_bar * s * s

    # shared -----------------------------------------------------------------

    def apply(self, c: np.ndarray, t: float) -> np.ndarray:
        if self.mode == "rotor":
            return self.matrix(t) @ c
        if self.mode == "rovib":
            blocks = self.angular_blocks(t)
            return np.einsum("rjk,kr->jr", blocks, c) + c @ self._T.T
        T = self.grid.wavenumbers ** 2 / (2.0 * self.mass)
        return np.fft.ifft(T * np.fft.fft(c)) + self.trap_potential(t) * c

    def energy(self, psi: Wavepacket, t: float | None = None) -> float:
        t = psi.time if t is None else t
        return float(np.vdot(psi.coefficients, self.apply(psi.coefficients, t)).real)

    def rotation_period(self) -> float:
        """Full revival time pi/B of the rigid rotor."""
        B = self.B if self.mode == "rotor" else 1.0 / (2.0 * self.mass * self.R ** 2)
        return math.pi / B

    def diagnostics(self) -> dict:
        out = {"mode": self.mode, "limit": self.limit}
        if self.mode in ("rotor", "rovib"):
            out["j_max"] = self.basis.j_max
            if self.R is not None:
                out["rotational_constant"] = 1.0 / (2.0 * self.mass * self.R ** 2)
            if self.limit == "ac" and self.field is not None and self.R is not None:
                # omega_L * T_rot: small values mean the cycle-averaged picture is doubtful
                out["omega_times_T_rot"] = self.field.omega * self.rotation_period()
        return out


def _curve_values(curve, model, R, omega, limit):
    if curve is None:
        vals = [
            static_polarizability(model, model.ground_index, r) if limit == "dc"
            else dynamic_polarizability(model, model.ground_index, r, omega, "length")
            for r in np.atleast_1d(R)
        ]
        a = np.array(vals)
        return a[:, 0], a[:, 1]
    if not isinstance(curve, PolarizabilityCurve):
        raise ConfigError("polarizabilities must be a PolarizabilityCurve or None")
    if curve.gauge != "length":
        raise ConfigError("effective Hamiltonians require length-gauge polarizabilities")
    if curve.state != model.ground_index:
        raise ConfigError("polarizability curve belongs to a different electronic state")
    want = 0.0 if limit == "dc" else omega
    if not math.isclose(curve.omega, want, rel_tol=1e-12, abs_tol=1e-15):
        raise ConfigError(f"polarizability curve frequency {curve.omega} does not match field frequency {want}")
    par, perp = curve.at(np.atleast_1d(R))
    return np.atleast_1d(par), np.atleast_1d(perp)


def build_effective(
    model: ElectronicModel,
    polarizabilities: PolarizabilityCurve | None,
    field_spec: FieldSpec | None,
    mode: str,
    limit: str,
    *,
    basis: RotorBasis | None = None,
    grid=None,
    R_rigid: float | None = None,
    alpha_bar: float | None = None,
) -> EffectiveHamiltonian:
    """Assemble the effective Hamiltonian for ``mode`` in the ``limit`` ("dc"/"ac").

    ``polarizabilities=None`` computes them from the model (length gauge,
    static for dc, at the field frequency for ac). ``field_spec=None``
    gives the field-free Hamiltonian.
    """
    if mode not in ("rotor", "rovib", "com"):
        raise ConfigError(f"mode must be rotor, rovib or com, got {mode!r}")
    if limit not in ("dc", "ac"):
        raise ConfigError(f"limit must be dc or ac, got {limit!r}")
    if field_spec is not None and field_spec.kind != limit:
        raise ConfigError(f"{field_spec.kind} field supplied for the {limit} limit")
    omega = field_spec.omega if (field_spec is not None and limit == "ac") else 0.0
    g = model.ground_index

    if mode == "com":
        if grid is None or not isinstance(grid, LineGrid):
            raise ConfigError("com mode needs a LineGrid")
        if alpha_bar is None:
            par, perp = _curve_values(polarizabilities, model, model.r_eq, omega, limit)
            alpha_bar = float((par[0] + 2.0 * perp[0]) / 3.0)
        return EffectiveHamiltonian("com", limit, field_spec, grid=grid, mass=model.nuclear.total_mass,
                                    alpha_bar=float(alpha_bar))

    basis = basis or RotorBasis()
    mu = model.nuclear.reduced_mass
    if mode == "rotor":
        R = model.r_eq if R_rigid is None else R_rigid
        if R is None:
            raise ConfigError("rigid rotor needs R_rigid (model has no equilibrium distance)")
        par, perp = (np.zeros(1), np.zeros(1)) if field_spec is None else _curve_values(
            polarizabilities, model, R, omega, limit)
        return EffectiveHamiltonian("rotor", limit, field_spec, basis=basis, mass=mu, R=float(R),
                                    mu_perm=model.permanent_dipole_z(R), a_par=float(par[0]),
                                    a_perp=float(perp[0]))

    if grid is None or not isinstance(grid, RadialGrid):
        raise ConfigError("rovib mode needs a RadialGrid")
    Rg = grid.points
    if field_spec is None:
        par = perp = np.zeros_like(Rg)
    else:
        par, perp = _curve_values(polarizabilities, model, Rg, omega, limit)
    V = np.asarray(model.potential(g, Rg), dtype=float)
    mu_perm = np.array([model.permanent_dipole_z(r) for r in Rg])
    return EffectiveHamiltonian("rovib", limit, field_spec, basis=basis, grid=grid, mass=mu,
                                R=model.r_eq, potential=V, mu_perm=mu_perm, a_par=par, a_perp=perp)


# --------------------------------------------------------------------------
# observables
# --------------------------------------------------------------------------


def expectation(psi: Wavepacket, observable: str):
    """<psi|O|psi> for cos_theta, cos2_theta, j_populations, norm, x_mean, x2_mean."""
    c = psi.coefficients
    if observable == "norm":
        return psi.norm
    if psi.mode in ("rotor", "rovib"):
        if observable in ("cos_theta", "cos2_theta"):
            mat = cos_theta_matrix(psi.basis) if observable == "cos_theta" else cos2_theta_matrix(psi.basis)
            return float(np.vdot(c, mat @ c).real)
        if observable == "j_populations":
            p = np.abs(c) ** 2
            return p if p.ndim == 1 else p.sum(axis=1)
    if psi.mode == "com" and observable in ("x_mean", "x2_mean"):
        X = psi.grid.points
        w = np.abs(c) ** 2
        return float(w @ X) if observable == "x_mean" else float(w @ (X * X))
    raise ConfigError(f"observable {observable!r} not available in {psi.mode} mode")


# --------------------------------------------------------------------------
# propagation
# --------------------------------------------------------------------------


def _check_compatible(psi, H):
    if psi.mode != H.mode:
        raise ConfigError(f"{psi.mode} wavepacket cannot be propagated with a {H.mode} Hamiltonian")
    if psi.mode in ("rotor", "rovib") and psi.basis != H.basis:
        raise ConfigError("wavepacket and Hamiltonian use different rotor bases")
    if psi.mode in ("rovib", "com") and psi.grid != H.grid:
        raise ConfigError("wavepacket and Hamiltonian use different grids")


def _expm_herm(H, dt):
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def _expm_herm_batched(blocks, dt):
    w, v = np.linalg.eigh(blocks)
    return np.einsum("rij,rj,rkj->rik", v, np.exp(-1j * w * dt), v.conj())


def propagate(
    psi: Wavepacket,
    H: EffectiveHamiltonian,
    t0: float,
    t1: float,
    dt: float,
    callback=None,
    norm_tol: float = NORM_TOL,
    truncation_tol: float | None = TRUNCATION_TOL,
) -> Wavepacket:
    """Evolve i d psi/dt = H(t) psi from t0 to t1.

    Rotor mode uses exact exponentials of the midpoint Hamiltonian (a single
    diagonalization when H is time independent); rovib and com use Strang
    splitting between kinetic and potential parts. ``callback(psi)`` is
    called at t0 and after every step. The step is shrunk so that an
    integer number of steps lands exactly on t1.

    Raises PropagationError if the norm drifts by more than
    ``norm_tol * (t - t0)`` plus 1e-12 per step, or if the two highest rotor
    levels hold more than ``truncation_tol`` population at the end.
    """
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if t1 < t0:
        raise DomainError("t1 must be >= t0")
    _check_compatible(psi, H)
    n = max(1, math.ceil((t1 - t0) / dt - 1e-9)) if t1 > t0 else 0
    h = (t1 - t0) / n if n else 0.0
    out = psi.copy()
    out.time = t0
    c = out.coefficients
    norm0 = out.norm
    if callback is not None:
        callback(out)

    step = _stepper(H, h)
    for k in range(n):
        t_mid = t0 + (k + 0.5) * h
        c = step(c, t_mid)
        out.coefficients = c
        out.time = t0 + (k + 1) * h
        drift = abs(out.norm - norm0)
        if drift > norm_tol * (out.time - t0) + STEP_UNITARITY_TOL * (k + 1):
            raise PropagationError(
                f"norm drift {drift:.3e} at t = {out.time:.6g} exceeds tolerance; try dt < {h / 2:.4g}"
            )
        if callback is not None:
            callback(out)

    if psi.mode in ("rotor", "rovib") and truncation_tol is not None and psi.basis.size > 2:
        pops = expectation(out, "j_populations")
        top = float(pops[-2:].max())
        if top > truncation_tol:
            raise PropagationError(
                f"rotor basis truncated: population {top:.2e} in j >= {psi.basis.j_max - 1}; increase j_max"
            )
    if psi.mode == "com":
        edge = _edge_population(c)
        if edge > EDGE_TOL:
            msg = f"wavepacket reached the grid edge (edge population {edge:.2e}); results may be affected"
            out.warnings.append(msg)
            _warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return out


def _edge_population(c, frac=0.05):
    n = max(1, int(len(c) * frac))
    p = np.abs(c) ** 2
    return float(p[:n].sum() + p[-n:].sum())


def _stepper(H: EffectiveHamiltonian, h: float):
    if H.mode == "rotor":
        if H.is_static:
            U = _expm_herm(H.matrix(0.0), h)
            return lambda c, t: U @ c
        return lambda c, t: _expm_herm(H.matrix(t), h) @ c

    if H.mode == "rovib":
        w, v = np.linalg.eigh(H._T)
        K_half = (v * np.exp(-0.5j * w * h)) @ v.T
        if H.is_static:
            P = _expm_herm_batched(H.angular_blocks(0.0), h)

            def step(c, t):
                c = c @ K_half.T
                c = np.einsum("rjk,kr->jr", P, c)
                return c @ K_half.T
        else:
            def step(c, t):
                c = c @ K_half.T
                c = np.einsum("rjk,kr->jr", _expm_herm_batched(H.angular_blocks(t), h), c)
                return c @ K_half.T
        return step

    kin = np.exp(-1j * h * H.grid.wavenumbers ** 2 / (2.0 * H.mass))
    if H.is_static:
        half = np.exp(-0.5j * h * H.trap_potential(0.0))
        return lambda c, t: half * np.fft.ifft(kin * np.fft.fft(half * c))

    def step(c, t):
        half = np.exp(-0.5j * h * H.trap_potential(t))
        return half * np.fft.ifft(kin * np.fft.fft(half * c))

    return step


# --------------------------------------------------------------------------
# bound vibrational levels
# --------------------------------------------------------------------------


@dataclass
class VibrationalLevels:
    energies: np.ndarray
    functions: np.ndarray
    grid: RadialGrid
    refinement_change: np.ndarray | None = None
    warnings: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.refinement_change is not None and bool(np.all(self.refinement_change <= 1e-8))


def _radial_levels(model, grid, state, j, n_levels):
    mu = model.nuclear.reduced_mass
    R = grid.points
    V = np.asarray(model.potential(state, R), dtype=float) + j * (j + 1) / (2 * mu * R * R)
    H = grid.kinetic(mu)
    H[np.diag_indices_from(H)] += V
    return eigh(H, subset_by_index=[0, n_levels - 1])


def vibrational_eigenstates(
    model: ElectronicModel,
    grid: RadialGrid,
    n_levels: int,
    state: int | None = None,
    j: int = 0,
    check_convergence: bool = True,
) -> VibrationalLevels:
    """Lowest ``n_levels`` eigenpairs of -(1/2 mu) d^2/dR^2 + E_state(R) + j(j+1)/(2 mu R^2).

    Functions are grid amplitudes with sum |f|^2 = 1. With
    ``check_convergence`` the grid is refined (N -> 2N + 1) and levels that
    move by more than 1e-8 Ha are reported in ``warnings``.
    """
    state = model.ground_index if state is None else state
    if not 1 <= n_levels <= grid.N:
        raise ConfigError(f"n_levels must be in [1, {grid.N}]")
    warn = _grid_warnings(model, grid, state)
    E, F = _radial_levels(model, grid, state, j, n_levels)
    change = None
    if check_convergence:
        E2, _ = _radial_levels(model, grid.refined(), state, j, n_levels)
        change = np.abs(E2 - E)
        bad = np.nonzero(change > 1e-8)[0]
        if len(bad):
            warn.append(f"levels {bad.tolist()} changed by up to {change.max():.2e} Ha under grid refinement")
    return VibrationalLevels(E, F, grid, change, warn)


def _grid_warnings(model, grid, state):
    out = []
    mu = model.nuclear.reduced_mass
    R = grid.points
    V = np.asarray(model.potential(state, R), dtype=float)
    vmin = V.min()
    depth = V[-1] - vmin
    if depth > 0 and V[0] - vmin < 10 * depth:
        out.append("inner grid edge lies less than 10 well depths above the potential minimum")
    curve = model.states[state].potential
    if hasattr(curve, "D_e") and hasattr(curve, "a"):
        omega_e = curve.a * math.sqrt(2 * curve.D_e / mu)
        # de Broglie wavelength of the zero-point motion at the well bottom
        lam = 2 * math.pi / math.sqrt(mu * omega_e)
        if grid.spacing > lam / 8:
            out.append(f"grid spacing {grid.spacing:.3g} bohr exceeds 1/8 of the zero-point de Broglie wavelength")
    return out


# --------------------------------------------------------------------------
# centre-of-mass trapping
# --------------------------------------------------------------------------


@dataclass
class TrapTrajectory:
    t: np.ndarray
    x_mean: np.ndarray
    x2_mean: np.ndarray
    norm: np.ndarray
    final: Wavepacket
    warnings: list = field(default_factory=list)

    def rows(self):
        for row in zip(self.t, self.x_mean, self.x2_mean, self.norm):
            yield tuple(float(v) for v in row)


def com_trap_dynamics(
    model: ElectronicModel,
    alpha_bar: float,
    field_spec: FieldSpec,
    psi0: Wavepacket,
    t0: float,
    t1: float,
    dt: float,
    record_every: int = 1,
) -> TrapTrajectory:
    """Propagate a centre-of-mass packet in U(X, t) = -(1/4) alpha_bar E(X, t)^2 (ac) and record <X>, <X^2>."""
    if not alpha_bar > 0:
        raise DomainError("alpha_bar must be > 0 (red-detuned trapping)")
    if psi0.mode != "com":
        raise ConfigError("com_trap_dynamics needs a com-mode wavepacket")
    H = build_effective(model, None, field_spec, "com", field_spec.kind, grid=psi0.grid, alpha_bar=alpha_bar)
    rec = {"t": [], "x": [], "x2": [], "n": []}
    count = [0]

    def observe(p):
        if count[0] % record_every == 0:
            rec["t"].append(p.time)
            rec["x"].append(expectation(p, "x_mean"))
            rec["x2"].append(expectation(p, "x2_mean"))
            rec["n"].append(p.norm)
        count[0] += 1

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", RuntimeWarning)
        final = propagate(psi0, H, t0, t1, dt, callback=observe)
    if rec["t"][-1] != final.time:
        count[0] = 0
        observe(final)
    return TrapTrajectory(np.array(rec["t"]), np.array(rec["x"]), np.array(rec["x2"]), np.array(rec["n"]),
                          final, list(final.warnings))


def trap_frequency(model: ElectronicModel, alpha_bar: float, field_spec: FieldSpec) -> float:
    """Harmonic frequency sqrt(alpha_bar E0^2 / (M w0^2)) at the centre of a Gaussian-beam ac trap."""
    prof = field_spec.profile
    if not hasattr(prof, "waist"):
        raise ConfigError("trap frequency needs a gaussian_beam profile")
    f = 4.0 * (0.25 if field_spec.kind == "ac" else 0.5)
    return math.sqrt(f * alpha_bar * field_spec.amplitude ** 2 / (model.nuclear.total_mass * prof.waist ** 2))


def trap_ground_state(model: ElectronicModel, alpha_bar: float, field_spec: FieldSpec, grid: LineGrid,
                      t: float = 0.0) -> tuple[float, Wavepacket]:
    """Lowest eigenstate of the trap at time ``t`` on the grid (variational)."""
    H = build_effective(model, None, field_spec, "com", field_spec.kind, grid=grid, alpha_bar=alpha_bar)
    K = grid.kinetic(H.mass)
    K[np.diag_indices_from(K)] += H.trap_potential(t)
    w, v = eigh(K, subset_by_index=[0, 0])
    return float(w[0]), Wavepacket("com", v[:, 0], t, grid=grid).normalized()


def oscillation_frequency(t, x) -> float:
    """Angular frequency from the spacing of upward zero crossings of x - mean(x) (linear interpolation)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(x, dtype=float) - np.mean(x)
    idx = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    if len(idx) < 2:
        raise ConfigError("need at least two upward zero crossings to measure a frequency")
    tc = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    period = (tc[-1] - tc[0]) / (len(tc) - 1)
    return 2 * math.pi / period
