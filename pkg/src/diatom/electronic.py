"""Field-free electronic structure of a diatomic molecule.

A model is a finite list of electronic states, each with a potential curve
E_n(R), a table of body-fixed dipole matrix elements between them, and the
nuclear charges/masses that produce the isotope ("permanent-like") dipole
kappa * R along the molecular axis.

Everything is in atomic units: Hartree, bohr, e*bohr, electron masses.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DomainError, ExtrapolationError, SelectionRuleError

PROTON_MASS = 1836.15
"""Nuclear mass unit used by the built-in fixtures (electron masses)."""

AXES = "xyz"


class Symmetry(str, enum.Enum):
    SIGMA = "Sigma"
    PI = "Pi"


def _check_positive(R):
    R = np.asarray(R, dtype=float)
    if np.any(~(R > 0)):
        raise DomainError(f"internuclear distance must be > 0 bohr, got {R}")
    return R


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


# --------------------------------------------------------------------------
# radial curves
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Morse:
    """V(R) = D_e [(1 - exp(-a (R - R_e)))^2 - 1] + asymptote."""

    D_e: float
    a: float
    R_e: float
    asymptote: float = 0.0
    kind = "morse"

    def __post_init__(self):
        if not (self.D_e > 0 and self.a > 0 and self.R_e > 0):
            raise ConfigError(f"Morse parameters must be positive: {self}")

    def __call__(self, R):
        y = 1.0 - np.exp(-self.a * (R - self.R_e))
        return _scalar(self.D_e * (y * y - 1.0) + self.asymptote)

    def derivative(self, R):
        e = np.exp(-self.a * (R - self.R_e))
        return _scalar(2.0 * self.D_e * self.a * (1.0 - e) * e)

    @property
    def minimum(self):
        return self.R_e

    def params(self):
        return {"D_e": self.D_e, "a": self.a, "R_e": self.R_e, "asymptote": self.asymptote}


@dataclass(frozen=True)
class Harmonic:
    """V(R) = k/2 (R - R_e)^2 + offset."""

    k: float
    R_e: float
    offset: float = 0.0
    kind = "harmonic"

    def __call__(self, R):
        return _scalar(0.5 * self.k * (np.asarray(R, dtype=float) - self.R_e) ** 2 + self.offset)

    def derivative(self, R):
        return _scalar(self.k * (np.asarray(R, dtype=float) - self.R_e))

    @property
    def minimum(self):
        return self.R_e

    def params(self):
        return {"k": self.k, "R_e": self.R_e, "offset": self.offset}


@dataclass(frozen=True)
class Constant:
    value: float
    kind = "constant"

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        return _scalar(np.full(R.shape, float(self.value)))

    def derivative(self, R):
        R = np.asarray(R, dtype=float)
        return _scalar(np.zeros(R.shape))

    minimum = None

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True)
class Gaussian:
    """f(R) = amplitude * exp(-(R - center)^2 / (2 sigma^2))."""

    amplitude: float
    center: float
    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError("gaussian sigma must be > 0")

    def __call__(self, R):
        x = (np.asarray(R, dtype=float) - self.center) / self.sigma
        return _scalar(self.amplitude * np.exp(-0.5 * x * x))

    def derivative(self, R):
        x = (np.asarray(R, dtype=float) - self.center) / self.sigma
        return _scalar(-self.amplitude * x / self.sigma * np.exp(-0.5 * x * x))

    minimum = None

    def params(self):
        return {"amplitude": self.amplitude, "center": self.center, "sigma": self.sigma}


class Tabulated:
    """Natural cubic spline through (R, value) samples; no extrapolation."""

    kind = "table"

    def __init__(self, R: Sequence[float], values: Sequence[float]):
        R = np.asarray(R, dtype=float)
        values = np.asarray(values, dtype=float)
        if R.ndim != 1 or R.shape != values.shape:
            raise ConfigError("table R and values must be 1-D arrays of equal length")
        if len(R) < 4:
            raise ConfigError(f"table needs at least 4 points, got {len(R)}")
        if np.any(np.diff(R) <= 0):
            raise ConfigError("table R grid must be strictly increasing")
        if R[0] <= 0:
            raise ConfigError("table R grid must be positive")
        self.R = R
        self.values = values
        self._spline = CubicSpline(R, values, bc_type="natural", extrapolate=False)
        self._dspline = self._spline.derivative()

    def _check(self, R):
        R = np.asarray(R, dtype=float)
        if np.any(R < self.R[0]) or np.any(R > self.R[-1]):
            raise ExtrapolationError(
                f"R = {R} outside tabulated range [{self.R[0]}, {self.R[-1]}] bohr"
            )
        return R

    def __call__(self, R):
        return _scalar(self._spline(self._check(R)))

    def derivative(self, R):
        return _scalar(self._dspline(self._check(R)))

    @property
    def minimum(self):
        return float(self.R[np.argmin(self.values)])

    def params(self):
        return {"R": self.R.tolist(), "values": self.values.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self.R, other.R)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.R.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return f"Tabulated(n={len(self.R)}, R=[{self.R[0]}, {self.R[-1]}])"


_CURVE_KINDS = {"morse": Morse, "harmonic": Harmonic, "constant": Constant, "gaussian": Gaussian}


def curve_from_dict(spec: Mapping):
    """Build a curve from ``{"kind": ..., "params": {...}}`` or ``{"kind": "table", "table": {"R": [...], "values": [...]}}``."""
    kind = spec.get("kind")
    if kind == "table":
        table = spec.get("table")
        if not isinstance(table, Mapping) or "R" not in table or "values" not in table:
            raise ConfigError("table curve requires table{R, values}")
        return Tabulated(table["R"], table["values"])
    if kind not in _CURVE_KINDS:
        raise ConfigError(f"unknown curve kind {kind!r}")
    try:
        return _CURVE_KINDS[kind](**spec.get("params", {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind} curve: {exc}") from None


def curve_to_dict(curve) -> dict:
    if isinstance(curve, Tabulated):
        return {"kind": "table", "table": curve.params()}
    return {"kind": curve.kind, "params": curve.params()}


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ElectronicState:
    index: int
    symmetry: Symmetry
    potential: object


@dataclass(frozen=True)
class NuclearData:
    Z_A: int
    Z_B: int
    m_A: float
    m_B: float

    def __post_init__(self):
        if self.Z_A <= 0 or self.Z_B <= 0:
            raise ConfigError("nuclear charges must be positive integers")
        if not (self.m_A > 0 and self.m_B > 0):
            raise ConfigError("nuclear masses must be positive")

    @property
    def reduced_mass(self) -> float:
        return self.m_A * self.m_B / (self.m_A + self.m_B)

    @property
    def total_mass(self) -> float:
        return self.m_A + self.m_B

    @property
    def kappa(self) -> float:
        """Charge/mass asymmetry factor (Z_A m_B - Z_B m_A) / (m_A + m_B)."""
        return (self.Z_A * self.m_B - self.Z_B * self.m_A) / (self.m_A + self.m_B)


def _allowed_axes(s1: Symmetry, s2: Symmetry) -> str:
    # Sigma-Sigma and Pi-Pi couple along the axis; Sigma-Pi perpendicular to it.
    return "z" if s1 == s2 else "xy"


@dataclass(frozen=True)
class ElectronicModel:
    """Truncated set of field-free electronic states.

    ``dipoles`` maps an unordered pair ``(i, j)`` with ``i <= j`` to a dict
    ``{axis: curve}`` of body-fixed components (``axis`` in ``"xyz"``).
    Diagonal pairs ``(n, n)`` hold the electronic permanent dipole of state n;
    the nuclear contribution is separate (:meth:`nuclear_dipole_z`).
    """

    states: tuple
    dipoles: Mapping
    nuclear: NuclearData
    ground_index: int = 0
    r_eq: float | None = None
    name: str = "custom"

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 1:
            raise ConfigError("model needs at least one electronic state")
        for k, st in enumerate(states):
            if st.index != k:
                raise ConfigError(f"state at position {k} has index {st.index}")
        if not 0 <= self.ground_index < len(states):
            raise ConfigError(f"ground_index {self.ground_index} out of range")
        if states[self.ground_index].symmetry != Symmetry.SIGMA:
            raise ConfigError("ground state must have Sigma symmetry")
        clean = {}
        for (i, j), comps in self.dipoles.items():
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if not (0 <= i < len(states) and 0 <= j < len(states)):
                raise ConfigError(f"dipole pair ({i}, {j}) references a missing state")
            if (i, j) in clean:
                raise ConfigError(f"dipole pair ({i}, {j}) given twice")
            allowed = _allowed_axes(states[i].symmetry, states[j].symmetry)
            for axis in comps:
                if axis not in AXES:
                    raise ConfigError(f"unknown dipole axis {axis!r}")
                if axis not in allowed:
                    raise SelectionRuleError(
                        f"{axis}-component forbidden between {states[i].symmetry.value} "
                        f"state {i} and {states[j].symmetry.value} state {j}"
                    )
            clean[(i, j)] = dict(comps)
        object.__setattr__(self, "dipoles", clean)
        if self.r_eq is None:
            object.__setattr__(self, "r_eq", states[self.ground_index].potential.minimum)

    def __hash__(self):
        return id(self)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def _state(self, n):
        if not (isinstance(n, (int, np.integer)) and 0 <= n < len(self.states)):
            raise IndexError(f"state index {n} out of range 0..{len(self.states) - 1}")
        return self.states[n]

    def potential(self, n: int, R):
        """Field-free energy E_n(R) in Hartree."""
        st = self._state(n)
        return st.potential(_check_positive(R))

    def potential_derivative(self, n: int, R):
        st = self._state(n)
        return st.potential.derivative(_check_positive(R))

    def energies(self, R: float) -> np.ndarray:
        R = float(_check_positive(R))
        return np.array([st.potential(R) for st in self.states])

    def transition_dipole(self, n: int, n2: int, R: float) -> np.ndarray:
        """Body-fixed <n| e sum r_j |n2> as a 3-vector (e*bohr).

        Selection-rule zeros are exact zeros.
        """
        self._state(n)
        self._state(n2)
        R = float(_check_positive(R))
        key = (n, n2) if n <= n2 else (n2, n)
        out = np.zeros(3)
        for axis, curve in self.dipoles.get(key, {}).items():
            out[AXES.index(axis)] = curve(R)
        return out

    def dipole_tensor(self, R: float) -> np.ndarray:
        """All electronic dipole matrix elements at R, shape (N, N, 3), symmetric in (n, n2)."""
        R = float(_check_positive(R))
        N = len(self.states)
        D = np.zeros((N, N, 3))
        for (i, j), comps in self.dipoles.items():
            for axis, curve in comps.items():
                v = curve(R)
                D[i, j, AXES.index(axis)] = v
                D[j, i, AXES.index(axis)] = v
        return D

    def nuclear_dipole_z(self, R):
        """Isotope/charge-asymmetry dipole kappa * R along the body-fixed z axis."""
        return _scalar(self.nuclear.kappa * _check_positive(R))

    def permanent_dipole_z(self, R: float) -> float:
        """Total z-dipole of the ground state: kappa R + <g|d_z|g>."""
        g = self.ground_index
        return self.nuclear_dipole_z(R) + self.transition_dipole(g, g, R)[2]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "nuclear": {
                "Z_A": self.nuclear.Z_A,
                "Z_B": self.nuclear.Z_B,
                "m_A": self.nuclear.m_A,
                "m_B": self.nuclear.m_B,
            },
            "states": [
                {"symmetry": st.symmetry.value, "potential": curve_to_dict(st.potential)}
                for st in self.states
            ],
            "dipoles": [
                {"i": i, "j": j, "component": axis, **curve_to_dict(curve)}
                for (i, j), comps in sorted(self.dipoles.items())
                for axis, curve in sorted(comps.items())
            ],
            "ground_index": self.ground_index,
            "r_eq": self.r_eq,
        }


def model_from_dict(data: Mapping) -> ElectronicModel:
    """Build a model from the JSON model-definition layout."""
    try:
        nuc = data["nuclear"]
        nuclear = NuclearData(int(nuc["Z_A"]), int(nuc["Z_B"]), float(nuc["m_A"]), float(nuc["m_B"]))
        states = []
        for k, st in enumerate(data["states"]):
            try:
                sym = Symmetry(st.get("symmetry", "Sigma"))
            except ValueError:
                raise ConfigError(f"states[{k}].symmetry must be Sigma or Pi") from None
            states.append(ElectronicState(k, sym, curve_from_dict(st["potential"])))
        dipoles: dict = {}
        for k, d in enumerate(data.get("dipoles", [])):
            key = (int(d["i"]), int(d["j"]))
            key = key if key[0] <= key[1] else key[::-1]
            axis = d.get("component", "z")
            comps = dipoles.setdefault(key, {})
            if axis in comps:
                raise ConfigError(f"dipoles[{k}]: component {axis} of pair {key} repeated")
            comps[axis] = curve_from_dict(d)
    except KeyError as exc:
        raise ConfigError(f"model definition missing key {exc}") from None
    return ElectronicModel(
        tuple(states),
        dipoles,
        nuclear,
        int(data.get("ground_index", 0)),
        data.get("r_eq"),
        data.get("name", "custom"),
    )


def load_model(path) -> ElectronicModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


# --------------------------------------------------------------------------
# built-in fixtures (invented parameters, one verification axis each)
# --------------------------------------------------------------------------

H2_NUCLEI = NuclearData(1, 1, PROTON_MASS, PROTON_MASS)
HD_NUCLEI = NuclearData(1, 1, PROTON_MASS, 2 * PROTON_MASS)


def two_level(gap=0.2, dipole=1.0, r_eq=1.4, nuclear=H2_NUCLEI) -> ElectronicModel:
    """Two Sigma states with R-independent gap and z transition dipole."""
    states = (
        ElectronicState(0, Symmetry.SIGMA, Constant(0.0)),
        ElectronicState(1, Symmetry.SIGMA, Constant(gap)),
    )
    return ElectronicModel(states, {(0, 1): {"z": Constant(dipole)}}, nuclear, 0, r_eq, "two_level")


def drude_harmonic(n_excited=10, omega0=0.5, r_eq=1.4, nuclear=H2_NUCLEI) -> ElectronicModel:
    """Harmonically bound "electron": levels omega0 (v + 1/2), <v|x|v+1> = sqrt((v+1)/(2 omega0)).

    The dipole sum rules of this model are saturated by the truncated basis,
    which makes it the reference for gauge and sum-rule checks.
    """
    if n_excited < 1:
        raise ConfigError("drude_harmonic needs at least one excited level")
    states = tuple(
        ElectronicState(v, Symmetry.SIGMA, Constant(omega0 * (v + 0.5))) for v in range(n_excited + 1)
    )
    dipoles = {
        (v, v + 1): {"z": Constant(math.sqrt((v + 1) / (2 * omega0)))} for v in range(n_excited)
    }
    return ElectronicModel(states, dipoles, nuclear, 0, r_eq, "drude_harmonic")


def morse_pair(nuclear=HD_NUCLEI) -> ElectronicModel:
    """Bound ground Morse curve plus one excited Morse curve; HD-like nuclei."""
    states = (
        ElectronicState(0, Symmetry.SIGMA, Morse(0.17, 0.85, 3.0, 0.0)),
        ElectronicState(1, Symmetry.SIGMA, Morse(0.10, 0.80, 3.3, 0.12)),
    )
    dipoles = {(0, 1): {"z": Gaussian(1.5, 3.0, 2.0)}}
    return ElectronicModel(states, dipoles, nuclear, 0, None, "morse_pair")


def sigma_pi(gap=0.2, dipole=1.0, pi_gap=0.3, pi_dipole=0.7, r_eq=1.4, nuclear=H2_NUCLEI) -> ElectronicModel:
    """two_level plus a Pi state; its x and y components are stored as two degenerate states."""
    states = (
        ElectronicState(0, Symmetry.SIGMA, Constant(0.0)),
        ElectronicState(1, Symmetry.SIGMA, Constant(gap)),
        ElectronicState(2, Symmetry.PI, Constant(pi_gap)),
        ElectronicState(3, Symmetry.PI, Constant(pi_gap)),
    )
    dipoles = {
        (0, 1): {"z": Constant(dipole)},
        (0, 2): {"x": Constant(pi_dipole)},
        (0, 3): {"y": Constant(pi_dipole)},
    }
    return ElectronicModel(states, dipoles, nuclear, 0, r_eq, "sigma_pi")


BUILTIN_MODELS = {
    "two_level": two_level,
    "drude_harmonic": drude_harmonic,
    "morse_pair": morse_pair,
    "sigma_pi": sigma_pi,
}


def builtin_model(name: str, **kwargs) -> ElectronicModel:
    try:
        factory = BUILTIN_MODELS[name]
    except KeyError:
        raise ConfigError(
            f"unknown built-in model {name!r}; choose from {sorted(BUILTIN_MODELS)}"
        ) from None
    return factory(**kwargs)


def resolve_model(ref, base_dir: Path | None = None) -> ElectronicModel:
    """Accept a model object, a built-in name, a path to a JSON file, or an inline dict."""
    if isinstance(ref, ElectronicModel):
        return ref
    if isinstance(ref, Mapping):
        if "builtin" in ref:
            return builtin_model(ref["builtin"], **ref.get("params", {}))
        if "file" in ref:
            return resolve_model(ref["file"], base_dir)
        return model_from_dict(ref)
    if isinstance(ref, str):
        if ref in BUILTIN_MODELS:
            return builtin_model(ref)
        path = Path(ref)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_model(path)
    raise ConfigError(f"cannot interpret model reference {ref!r}")
