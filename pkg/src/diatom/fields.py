"""Body-fixed/space-fixed rotation and linearly z-polarized dc/ac fields.

Real-field convention for ac driving: E(X, t) = E0 * profile(X) * eta(t) * cos(omega t),
i.e. a complex carrier exp(+i omega t)/2 plus its complex conjugate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigError


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """Rotation taking body-fixed vectors to the space-fixed frame.

    R_z(phi) @ R_y(theta); the third column is the molecular axis
    (sin theta cos phi, sin theta sin phi, cos theta).
    """
    theta = math.fmod(float(theta), 2 * math.pi)
    phi = math.fmod(float(phi), 2 * math.pi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [ct * cp, -sp, st * cp],
            [ct * sp, cp, st * sp],
            [-st, 0.0, ct],
        ]
    )


def interaction_energy(M: np.ndarray, D_bf, E_z) -> float:
    """Dipole energy -[M D_bf]_z E_z for a field along space-fixed z."""
    D_bf = np.asarray(D_bf, dtype=float)
    return -float(M[2] @ D_bf) * E_z


def projected_dipole(D_bf, theta: float):
    """Space-fixed z projection of body-fixed dipole(s), ``D[..., 3] -> D[...]``.

    Only the third row of the rotation enters, which does not depend on phi.
    """
    D_bf = np.asarray(D_bf, dtype=float)
    return -math.sin(theta) * D_bf[..., 0] + math.cos(theta) * D_bf[..., 2]


# --------------------------------------------------------------------------
# envelopes eta(t) in [0, 1]
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantEnvelope:
    kind = "constant"

    def __call__(self, t):
        return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0

    def params(self):
        return {}


@dataclass(frozen=True)
class GaussianEnvelope:
    """eta(t) = exp(-sigma (t - t0)^2); sigma in 1/time^2."""

    sigma: float
    t0: float = 0.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError("envelope.params.sigma must be > 0")

    def __call__(self, t):
        return np.exp(-self.sigma * (np.asarray(t, dtype=float) - self.t0) ** 2) if np.ndim(t) else math.exp(
            -self.sigma * (t - self.t0) ** 2
        )

    def params(self):
        return {"sigma": self.sigma, "t0": self.t0}


@dataclass(frozen=True)
class LinearRamp:
    """0 before t_on, linear rise to 1 at t_off, 1 afterwards."""

    t_on: float
    t_off: float
    kind = "linear_ramp"

    def __post_init__(self):
        if not self.t_off > self.t_on:
            raise ConfigError("envelope.params.t_off must exceed t_on")

    def __call__(self, t):
        x = (np.asarray(t, dtype=float) - self.t_on) / (self.t_off - self.t_on)
        out = np.clip(x, 0.0, 1.0)
        return float(out) if np.ndim(t) == 0 else out

    def params(self):
        return {"t_on": self.t_on, "t_off": self.t_off}


# --------------------------------------------------------------------------
# spatial profiles along the centre-of-mass coordinate X
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformProfile:
    kind = "uniform"

    def __call__(self, X):
        return np.ones_like(np.asarray(X, dtype=float)) if np.ndim(X) else 1.0

    def params(self):
        return {}


@dataclass(frozen=True)
class GaussianBeam:
    """Field amplitude profile exp(-((X - center) / waist)^2)."""

    waist: float
    center: float = 0.0
    kind = "gaussian_beam"

    def __post_init__(self):
        if not self.waist > 0:
            raise ConfigError("profile.params.waist must be > 0")

    def __call__(self, X):
        x = (np.asarray(X, dtype=float) - self.center) / self.waist
        out = np.exp(-x * x)
        return float(out) if np.ndim(X) == 0 else out

    def params(self):
        return {"waist": self.waist, "center": self.center}


_ENVELOPES = {"constant": ConstantEnvelope, "gaussian": GaussianEnvelope, "linear_ramp": LinearRamp}
_PROFILES = {"uniform": UniformProfile, "gaussian_beam": GaussianBeam}


def _build(table, spec, what):
    if spec is None:
        spec = {"kind": "constant" if what == "envelope" else "uniform"}
    kind = spec.get("kind")
    if kind not in table:
        raise ConfigError(f"{what}.kind must be one of {sorted(table)}, got {kind!r}")
    try:
        return table[kind](**spec.get("params", {}))
    except TypeError as exc:
        raise ConfigError(f"bad {what}.params for {kind}: {exc}") from None


@dataclass(frozen=True)
class FieldSample:
    E_z: float
    instantaneous: float


@dataclass(frozen=True)
class FieldSpec:
    """Field polarized along space-fixed z.

    For ``kind="dc"`` the amplitude times envelope is the instantaneous
    strength. For ``kind="ac"`` it is the carrier amplitude; the carrier
    itself is cos(omega t).
    """

    kind: str
    amplitude: float
    omega: float | None = None
    envelope: object = field(default_factory=ConstantEnvelope)
    profile: object = field(default_factory=UniformProfile)

    def __post_init__(self):
        if self.kind not in ("dc", "ac"):
            raise ConfigError(f"field.kind must be 'dc' or 'ac', got {self.kind!r}")
        if not math.isfinite(self.amplitude):
            raise ConfigError("field.amplitude must be finite")
        if self.kind == "ac":
            if self.omega is None or not self.omega > 0:
                raise ConfigError("field.omega must be > 0 for an ac field")

    @classmethod
    def from_dict(cls, data: Mapping) -> "FieldSpec":
        if "kind" not in data or "amplitude" not in data:
            raise ConfigError("field requires kind and amplitude")
        return cls(
            data["kind"],
            float(data["amplitude"]),
            None if data.get("omega") is None else float(data["omega"]),
            _build(_ENVELOPES, data.get("envelope"), "envelope"),
            _build(_PROFILES, data.get("profile"), "profile"),
        )

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "envelope": {"kind": self.envelope.kind, "params": self.envelope.params()},
            "profile": {"kind": self.profile.kind, "params": self.profile.params()},
        }
        if self.omega is not None:
            out["omega"] = self.omega
        return out

    @property
    def is_static(self) -> bool:
        """True when the (dc strength / ac amplitude) never changes in time."""
        return isinstance(self.envelope, ConstantEnvelope)

    def strength(self, X=0.0, t=0.0):
        """dc strength or ac envelope amplitude at centre-of-mass X, time t."""
        return self.amplitude * self.envelope(t) * self.profile(X)

    def instantaneous(self, X=0.0, t=0.0):
        s = self.strength(X, t)
        if self.kind == "ac":
            return s * np.cos(self.omega * np.asarray(t, dtype=float)) if np.ndim(t) else s * math.cos(self.omega * t)
        return s


def field_at(spec: FieldSpec, X_c: float, t: float) -> FieldSample:
    return FieldSample(float(spec.strength(X_c, t)), float(spec.instantaneous(X_c, t)))
