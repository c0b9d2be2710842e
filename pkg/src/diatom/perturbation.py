"""Sum-over-states response of a Sigma electronic state.

Static and dynamic (length or momentum gauge) polarizabilities, the
first/second order field corrections to the Born-Oppenheimer surface in
the dc and ac limits, and a diagnostic comparing the two gauges term by
term against the Thomas-Reiche-Kuhn sum.

Sign convention: omega_{g n'} = (E_g - E_n') / hbar, negative for
excitations from the ground state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .electronic import ElectronicModel, Symmetry
from .errors import ConfigError, DegeneracyError, DomainError, ResonanceError

DEGENERACY_TOL = 1e-12
RESONANCE_TOL = 1e-9

GAUGES = ("length", "momentum")


def _check_state(model: ElectronicModel, g: int):
    model._state(g)
    if model.states[g].symmetry != Symmetry.SIGMA:
        raise ConfigError(f"state {g} is not of Sigma symmetry")
    if model.n_states < 2:
        raise ConfigError("sum over states needs at least two electronic states")


def _couplings(model: ElectronicModel, g: int, R: float, n_max: int | None = None):
    """Yield (n', d_{g n'} (3-vector), omega_{g n'}) for n' != g that carry a dipole."""
    E = model.energies(R)
    D = model.dipole_tensor(R)
    last = model.n_states - 1 if n_max is None else n_max
    for n in range(last + 1):
        if n == g or not np.any(D[g, n]):
            continue
        yield n, D[g, n], E[g] - E[n]


def polarizability_tensor(
    model: ElectronicModel,
    g: int,
    R: float,
    omega: float = 0.0,
    gauge: str = "length",
    resonance_tol: float = RESONANCE_TOL,
) -> np.ndarray:
    """Body-fixed 3x3 polarizability tensor of state ``g`` at distance ``R``.

    ``omega == 0`` in the length gauge is the static tensor
    2 sum d d / (E_n' - E_g); otherwise the dynamic form
    (2/hbar) sum d d w_{gn'} / (omega^2 - w_{gn'}^2), multiplied by
    (w_{gn'}/omega)^2 in the momentum gauge.
    """
    _check_state(model, g)
    if gauge not in GAUGES:
        raise ConfigError(f"gauge must be one of {GAUGES}, got {gauge!r}")
    if omega < 0:
        raise DomainError("omega_L must be >= 0")
    if gauge == "momentum" and omega == 0:
        raise DomainError("momentum-gauge polarizability diverges at omega_L = 0")
    alpha = np.zeros((3, 3))
    for n, d, w in _couplings(model, g, R):
        if abs(w) < DEGENERACY_TOL:
            raise DegeneracyError(g, n, abs(w))
        if omega > 0 and abs(omega - abs(w)) < resonance_tol:
            raise ResonanceError(g, n, omega, abs(w))
        alpha += _term(d, w, omega, gauge)
    return alpha


def _term(d, w, omega, gauge):
    dd = np.outer(d, d)
    if omega == 0:
        return 2.0 * dd / -w
    t = 2.0 * dd * w / (omega * omega - w * w)
    if gauge == "momentum":
        t = t * (w / omega) ** 2
    return t


def _par_perp(alpha):
    # x is the only perpendicular axis that reaches a z-polarized field
    return float(alpha[2, 2]), float(alpha[0, 0])


def static_polarizability(model: ElectronicModel, g: int, R: float) -> tuple[float, float]:
    """(alpha_par, alpha_perp) in bohr^3 for the Sigma state ``g``."""
    return _par_perp(polarizability_tensor(model, g, R))


def dynamic_polarizability(
    model: ElectronicModel,
    g: int,
    R: float,
    omega: float,
    gauge: str = "length",
    resonance_tol: float = RESONANCE_TOL,
) -> tuple[float, float]:
    """(alpha_par, alpha_perp) at drive frequency ``omega`` (Hartree).

    Momentum-gauge values from a truncated basis are not trustworthy on
    their own; see :func:`gauge_discrepancy_report`.
    """
    return _par_perp(polarizability_tensor(model, g, R, omega, gauge, resonance_tol))


@dataclass
class PolarizabilityCurve:
    state: int
    gauge: str
    omega: float
    R: np.ndarray
    alpha_par: np.ndarray
    alpha_perp: np.ndarray
    reliable: bool = True

    def at(self, R):
        """Polarizabilities at ``R``; exact sample values or cubic interpolation between them."""
        if len(self.R) == 1:
            if not np.allclose(R, self.R[0], rtol=0, atol=1e-12):
                raise DomainError(f"curve sampled only at R = {self.R[0]}")
            return (
                np.broadcast_to(self.alpha_par[0], np.shape(R))[()],
                np.broadcast_to(self.alpha_perp[0], np.shape(R))[()],
            )
        from scipy.interpolate import CubicSpline

        R = np.asarray(R, dtype=float)
        if np.any(R < self.R[0] - 1e-12) or np.any(R > self.R[-1] + 1e-12):
            raise DomainError(f"R outside sampled range [{self.R[0]}, {self.R[-1]}]")
        par = CubicSpline(self.R, self.alpha_par, bc_type="natural")(R)
        perp = CubicSpline(self.R, self.alpha_perp, bc_type="natural")(R)
        return par[()], perp[()]

    def rows(self):
        for R, a, b in zip(self.R, self.alpha_par, self.alpha_perp):
            yield float(R), float(a), float(b), self.gauge, float(self.omega)


def polarizability_curve(model, g, R_values, omega=0.0, gauge="length", resonance_tol=RESONANCE_TOL):
    R = np.asarray(R_values, dtype=float)
    if R.ndim != 1 or len(R) == 0 or np.any(np.diff(R) <= 0):
        raise ConfigError("R_values must be a non-empty strictly increasing sequence")
    vals = np.array(
        [_par_perp(polarizability_tensor(model, g, r, omega, gauge, resonance_tol)) for r in R]
    )
    return PolarizabilityCurve(g, gauge, float(omega), R, vals[:, 0], vals[:, 1], gauge == "length")


@dataclass(frozen=True)
class SurfaceCorrection:
    order1: float
    order2: float
    total: float
    cos2_coeff: float
    sin2_coeff: float
    cos_coeff: float

    @property
    def components(self):
        return self.cos2_coeff, self.sin2_coeff, self.cos_coeff


def dc_surface_correction(model: ElectronicModel, g: int, R: float, theta: float, E_dc: float) -> SurfaceCorrection:
    if not math.isfinite(E_dc):
        raise DomainError("E_dc must be finite")
    a_par, a_perp = static_polarizability(model, g, R)
    mu = model.nuclear_dipole_z(R) + model.transition_dipole(g, g, R)[2]
    c = math.cos(theta)
    s = math.sin(theta)
    cos_coeff = -E_dc * mu
    cos2 = -0.5 * E_dc * E_dc * a_par
    sin2 = -0.5 * E_dc * E_dc * a_perp
    order1 = cos_coeff * c
    order2 = cos2 * c * c + sin2 * s * s
    return SurfaceCorrection(order1, order2, order1 + order2, cos2, sin2, cos_coeff)


def ac_surface_correction(
    model: ElectronicModel,
    g: int,
    R: float,
    theta: float,
    E_amp: float,
    omega: float,
    resonance_tol: float = RESONANCE_TOL,
) -> SurfaceCorrection:
    """Cycle-averaged second-order shift -(1/4) E^2 [a_par cos^2 + a_perp sin^2]; no first order term."""
    if not omega > 0:
        raise DomainError("ac surface needs omega_L > 0")
    a_par, a_perp = dynamic_polarizability(model, g, R, omega, "length", resonance_tol)
    c = math.cos(theta)
    s = math.sin(theta)
    cos2 = -0.25 * E_amp * E_amp * a_par
    sin2 = -0.25 * E_amp * E_amp * a_perp
    order2 = cos2 * c * c + sin2 * s * s
    return SurfaceCorrection(0.0, order2, order2, cos2, sin2, 0.0)


@dataclass
class GaugeReport:
    state: int
    R: float
    omega: float
    n_max: int
    component: str
    transitions: list = field(default_factory=list)
    length_terms: list = field(default_factory=list)
    momentum_terms: list = field(default_factory=list)
    differences: list = field(default_factory=list)
    summed_difference: float = 0.0
    trk_sum: float = 0.0
    ponderomotive_constant: float = 0.0

    def to_dict(self) -> dict:
        return {
            "state": self.state,
            "R": self.R,
            "omega": self.omega,
            "n_max": self.n_max,
            "component": self.component,
            "terms": [
                {"n": n, "length": a, "momentum": b, "difference": c}
                for n, a, b, c in zip(self.transitions, self.length_terms, self.momentum_terms, self.differences)
            ],
            "summed_difference": self.summed_difference,
            "length_total": float(sum(self.length_terms)),
            "momentum_total": float(sum(self.momentum_terms)),
            "trk_sum": self.trk_sum,
            "ponderomotive_constant": self.ponderomotive_constant,
            "momentum_gauge_reliable": False,
        }


def gauge_discrepancy_report(
    model: ElectronicModel,
    g: int,
    R: float,
    omega: float,
    n_max: int | None = None,
    component: str = "par",
    resonance_tol: float = RESONANCE_TOL,
) -> GaugeReport:
    """Term-by-term momentum minus length polarizability for transitions g -> n' <= n_max.

    Each difference should equal -(2/omega^2) |d|^2 w_{gn'}; their sum is
    (2/omega^2) times the TRK sum sum |d|^2 w_{n'g}.
    """
    _check_state(model, g)
    if not omega > 0:
        raise DomainError("gauge comparison needs omega_L > 0")
    if n_max is None:
        n_max = model.n_states - 1
    if not 0 <= n_max < model.n_states:
        raise ConfigError(f"n_max {n_max} exceeds model truncation {model.n_states - 1}")
    if component not in ("par", "perp"):
        raise ConfigError("component must be 'par' or 'perp'")
    axis = 2 if component == "par" else 0
    rep = GaugeReport(g, float(R), float(omega), n_max, component)
    trk = 0.0
    for n, d, w in _couplings(model, g, R, n_max):
        if abs(w) < DEGENERACY_TOL:
            raise DegeneracyError(g, n, abs(w))
        if abs(omega - abs(w)) < resonance_tol:
            raise ResonanceError(g, n, omega, abs(w))
        d2 = d[axis] * d[axis]
        if d2 == 0:
            continue
        a_len = 2.0 * d2 * w / (omega * omega - w * w)
        a_mom = a_len * (w / omega) ** 2
        rep.transitions.append(n)
        rep.length_terms.append(a_len)
        rep.momentum_terms.append(a_mom)
        rep.differences.append(a_mom - a_len)
        trk += d2 * -w
    rep.summed_difference = float(sum(rep.differences))
    rep.trk_sum = trk
    rep.ponderomotive_constant = 2.0 * trk / (omega * omega)
    return rep
