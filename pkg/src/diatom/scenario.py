"""Scenario files: validation and the task runners behind the CLI.

A scenario is a JSON object; see docs/scenario_schema.md for every key and
its default. Validation never computes anything; it collects every
violation it finds so a user can fix a file in one pass.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import floquet, perturbation, rovib
from .electronic import resolve_model
from .errors import ConfigError
from .fields import FieldSpec

TASKS = (
    "polarizability",
    "surface_dc",
    "surface_ac",
    "floquet",
    "align",
    "orient",
    "vib",
    "trap",
    "gauge_compare",
)

DEFAULT_NUMERICS = {
    "resonance_tol": perturbation.RESONANCE_TOL,
    "fourier_cutoff": None,
    "fourier_tol": floquet.FOURIER_TOL,
    "max_fourier_cutoff": floquet.MAX_FOURIER_CUTOFF,
    "gauge": "length",
    "n_max": None,
    "j_max": 40,
    "m": 0,
    "norm_tol": rovib.NORM_TOL,
    "truncation_tol": rovib.TRUNCATION_TOL,
    "record_every": 1,
    "method": None,
    "n_levels": 3,
    "j": 0,
    "grid": None,
    "state": None,
}

_SWEEP_KEYS = ("R", "theta", "omega", "E")


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_axis(name, spec, errors):
    if _is_number(spec):
        return
    if isinstance(spec, list):
        if not spec:
            errors.append(f"sweep.{name} must not be empty")
        elif not all(_is_number(v) for v in spec):
            errors.append(f"sweep.{name} must contain only finite numbers")
        return
    if isinstance(spec, Mapping):
        missing = [k for k in ("start", "stop", "num") if k not in spec]
        if missing:
            errors.append(f"sweep.{name} range requires {', '.join(missing)}")
            return
        if not (_is_number(spec["start"]) and _is_number(spec["stop"])):
            errors.append(f"sweep.{name}.start/stop must be finite numbers")
        if not (isinstance(spec["num"], int) and spec["num"] >= 1):
            errors.append(f"sweep.{name}.num must be an integer >= 1")
        return
    errors.append(f"sweep.{name} must be a number, a list or a {{start, stop, num}} range")


def _field_errors(data, task, errors, need_kind=None, need_omega=False, need_beam=False):
    f = data.get("field")
    if f is None:
        errors.append(f"field required for {task}")
        return
    if not isinstance(f, Mapping):
        errors.append("field must be an object")
        return
    if need_kind and f.get("kind") != need_kind:
        errors.append(f"field.kind must be '{need_kind}' for {task}")
    if need_omega and f.get("omega") is None:
        errors.append(f"field.omega required for {task}")
    if need_beam and (f.get("profile") or {}).get("kind") != "gaussian_beam":
        errors.append(f"field.profile.kind must be 'gaussian_beam' for {task}")
    try:
        FieldSpec.from_dict(f)
    except ConfigError as exc:
        errors.append(f"field: {exc}")
    except (TypeError, ValueError) as exc:
        errors.append(f"field: {exc}")


def validate_scenario(data, task: str | None = None, base_dir: Path | None = None) -> list[str]:
    """Return every schema violation in ``data`` (empty list when clean)."""
    errors: list[str] = []
    if not isinstance(data, Mapping):
        return ["scenario must be a JSON object"]
    file_task = data.get("task")
    if task is None:
        task = file_task
    elif file_task is not None and file_task != task:
        errors.append(f"task mismatch: command line says {task!r}, scenario says {file_task!r}")
    if task not in TASKS:
        errors.append(f"task must be one of {list(TASKS)}, got {task!r}")
        return errors

    if "model" not in data:
        errors.append("model required")
    else:
        try:
            resolve_model(data["model"], base_dir)
        except (ConfigError, OSError, ValueError, TypeError, KeyError) as exc:
            errors.append(f"model: {exc}")

    sweep = data.get("sweep", {})
    if not isinstance(sweep, Mapping):
        errors.append("sweep must be an object")
        sweep = {}
    for key in _SWEEP_KEYS:
        if key in sweep:
            _check_axis(key, sweep[key], errors)
    if "R" in sweep and not errors_in(errors, "sweep.R"):
        if np.any(_axis(sweep["R"]) <= 0):
            errors.append("sweep.R values must be > 0")
    if "omega" in sweep and not errors_in(errors, "sweep.omega"):
        if np.any(_axis(sweep["omega"]) < 0):
            errors.append("sweep.omega values must be >= 0")

    numerics = data.get("numerics", {})
    if not isinstance(numerics, Mapping):
        errors.append("numerics must be an object")
        numerics = {}
    unknown = sorted(set(numerics) - set(DEFAULT_NUMERICS))
    if unknown:
        errors.append(f"numerics: unknown keys {unknown}")
    for key, val in numerics.items():
        if key.endswith("tol") and not (_is_number(val) and val > 0):
            errors.append(f"numerics.{key} must be a positive number")
    for key in ("j_max", "n_levels", "record_every", "fourier_cutoff", "max_fourier_cutoff", "n_max"):
        val = numerics.get(key)
        if val is None:
            continue
        lo = 0 if key in ("j_max", "n_max") else 1
        if not (isinstance(val, int) and not isinstance(val, bool) and val >= lo):
            errors.append(f"numerics.{key} must be an integer >= {lo}, got {val!r}")
    if "gauge" in numerics:
        g = numerics["gauge"]
        gs = g if isinstance(g, list) else [g]
        if not gs or any(x not in perturbation.GAUGES for x in gs):
            errors.append(f"numerics.gauge must be 'length', 'momentum' or a list of them")
    if numerics.get("method") not in (None, "exact", "perturbative"):
        errors.append("numerics.method must be 'exact' or 'perturbative'")

    if "output" in data and not isinstance(data["output"], str):
        errors.append("output must be a string path prefix")

    _task_errors(task, data, sweep, numerics, errors)
    return errors


def errors_in(errors, prefix):
    return any(e.startswith(prefix) for e in errors)


def _need_sweep(sweep, key, task, errors):
    if key not in sweep:
        errors.append(f"sweep.{key} required for {task}")


def _time_errors(sweep, task, errors):
    t = sweep.get("t")
    if t is None:
        errors.append(f"sweep.t required for {task}")
        return
    if not isinstance(t, Mapping) or any(k not in t for k in ("start", "stop", "dt")):
        errors.append("sweep.t must be {start, stop, dt}")
        return
    if not all(_is_number(t[k]) for k in ("start", "stop", "dt")):
        errors.append("sweep.t start/stop/dt must be finite numbers")
        return
    if not t["dt"] > 0:
        errors.append("sweep.t.dt must be > 0")
    if not t["stop"] > t["start"]:
        errors.append("sweep.t.stop must exceed sweep.t.start")


def _grid_errors(numerics, task, errors, keys):
    g = numerics.get("grid")
    if g is None:
        errors.append(f"numerics.grid required for {task}")
        return
    if not isinstance(g, Mapping) or any(k not in g for k in keys):
        errors.append(f"numerics.grid must provide {', '.join(keys)}")
        return
    try:
        if task == "vib":
            rovib.RadialGrid(float(g["R_min"]), float(g["R_max"]), int(g["N"]))
        else:
            rovib.LineGrid(float(g["X_min"]), float(g["X_max"]), int(g["N"]))
    except (ConfigError, TypeError, ValueError) as exc:
        errors.append(f"numerics.grid: {exc}")


def _task_errors(task, data, sweep, numerics, errors):
    if task in ("polarizability", "gauge_compare", "surface_dc", "surface_ac", "floquet"):
        _need_sweep(sweep, "R", task, errors)
    if task == "gauge_compare":
        _need_sweep(sweep, "omega", task, errors)
        if "omega" in sweep and not errors_in(errors, "sweep.omega") and np.any(_axis(sweep["omega"]) <= 0):
            errors.append("sweep.omega values must be > 0 for gauge_compare")
    if task == "polarizability":
        gauges = numerics.get("gauge", "length")
        gauges = gauges if isinstance(gauges, list) else [gauges]
        if "momentum" in gauges and "omega" in sweep and not errors_in(errors, "sweep.omega"):
            if np.any(_axis(sweep["omega"]) == 0):
                errors.append("sweep.omega must be > 0 when the momentum gauge is requested")
    if task == "surface_dc":
        if "E" not in sweep:
            if "field" not in data:
                errors.append("sweep.E or field required for surface_dc")
            else:
                _field_errors(data, task, errors, need_kind="dc")
        elif "field" in data:
            _field_errors(data, task, errors, need_kind="dc")
    if task in ("surface_ac", "floquet"):
        _field_errors(data, task, errors, need_kind="ac", need_omega=True)
    if task == "align":
        _field_errors(data, task, errors, need_kind="ac", need_omega=True)
        _time_errors(sweep, task, errors)
    if task == "orient":
        _field_errors(data, task, errors, need_kind="dc")
        _time_errors(sweep, task, errors)
    if task == "trap":
        _field_errors(data, task, errors, need_kind="ac", need_omega=True, need_beam=True)
        _time_errors(sweep, task, errors)
        _grid_errors(numerics, task, errors, ("X_min", "X_max", "N"))
        ab = data.get("alpha_bar")
        if ab is not None and not (_is_number(ab) and ab > 0):
            errors.append("alpha_bar must be a positive number")
    if task == "vib":
        _grid_errors(numerics, task, errors, ("R_min", "R_max", "N"))
    if task in ("align", "orient", "trap"):
        init = data.get("initial", {})
        if not isinstance(init, Mapping):
            errors.append("initial must be an object")
        elif task == "trap":
            for k in ("x0", "sigma"):
                if k in init and not _is_number(init[k]):
                    errors.append(f"initial.{k} must be a finite number")
            if "sigma" in init and _is_number(init["sigma"]) and init["sigma"] <= 0:
                errors.append("initial.sigma must be > 0")
        elif "j" in init and not (isinstance(init["j"], int) and init["j"] >= 0):
            errors.append("initial.j must be an integer >= 0")


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------


def _axis(spec) -> np.ndarray:
    if _is_number(spec):
        return np.array([float(spec)])
    if isinstance(spec, Mapping):
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
    return np.asarray(spec, dtype=float)


@dataclass
class TaskResult:
    header: list
    rows: list
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    extra_json: dict | None = None
    checkpoint: object = None


class Scenario:
    def __init__(self, data: Mapping, task: str | None = None, base_dir: Path | None = None):
        self.data = dict(data)
        self.task = task or data.get("task")
        self.base_dir = base_dir
        self.numerics = {**DEFAULT_NUMERICS, **data.get("numerics", {})}
        self.sweep = data.get("sweep", {})
        self.model = resolve_model(data["model"], base_dir)
        self.field = FieldSpec.from_dict(data["field"]) if data.get("field") else None

    def axis(self, key, default=None):
        if key in self.sweep:
            return _axis(self.sweep[key])
        if default is None:
            raise ConfigError(f"sweep.{key} missing")
        return np.asarray(default, dtype=float)

    @property
    def state(self):
        s = self.numerics["state"]
        return self.model.ground_index if s is None else int(s)

    def run(self, threads: int = 1) -> TaskResult:
        return getattr(self, f"_run_{self.task}")(threads)

    # sweeps -----------------------------------------------------------------

    def _map(self, fn, points, threads):
        if threads > 1 and len(points) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(fn, points))  # preserves sweep order
        return [fn(p) for p in points]

    def _run_polarizability(self, threads):
        g = self.state
        tol = self.numerics["resonance_tol"]
        gauges = self.numerics["gauge"]
        gauges = gauges if isinstance(gauges, list) else [gauges]
        points = [(R, w, ga) for ga in gauges for w in self.axis("omega", [0.0]) for R in self.axis("R")]

        def one(p):
            R, w, ga = p
            if w == 0 and ga == "length":
                a, b = perturbation.static_polarizability(self.model, g, R)
            else:
                a, b = perturbation.dynamic_polarizability(self.model, g, R, w, ga, tol)
            return (R, a, b, ga, w)

        rows = self._map(one, points, threads)
        warns = []
        if "momentum" in gauges:
            warns.append("momentum-gauge polarizabilities from a truncated basis are unreliable")
        return TaskResult(["R", "alpha_par", "alpha_perp", "gauge", "omega"], rows, warnings=warns)

    def _run_gauge_compare(self, threads):
        g = self.state
        points = [(R, w) for w in self.axis("omega") for R in self.axis("R")]

        def one(p):
            return perturbation.gauge_discrepancy_report(
                self.model, g, p[0], p[1], self.numerics["n_max"], resonance_tol=self.numerics["resonance_tol"]
            )

        reports = self._map(one, points, threads)
        rows = [
            (r.R, r.omega, r.n_max, float(sum(r.length_terms)), float(sum(r.momentum_terms)),
             r.summed_difference, r.trk_sum, r.ponderomotive_constant)
            for r in reports
        ]
        header = ["R", "omega", "n_max", "alpha_par_length", "alpha_par_momentum",
                  "summed_difference", "trk_sum", "ponderomotive_constant"]
        return TaskResult(header, rows, extra_json={"reports": [r.to_dict() for r in reports]},
                          warnings=["momentum-gauge sums are reported, not asserted equal to length gauge"])

    def _surface_points(self):
        Es = self.axis("E", [self.field.amplitude] if self.field is not None else None)
        return [(R, th, E) for E in Es for th in self.axis("theta", [0.0]) for R in self.axis("R")]

    _SURFACE_HEADER = ["R", "theta", "E_amp_or_Edc", "omega", "quasienergy_or_energy", "tracked_weight", "M_used"]

    def _run_surface_dc(self, threads):
        g = self.state
        method = self.numerics["method"] or "exact"

        def one(p):
            R, th, E = p
            if method == "exact":
                sp = floquet.dc_adiabatic_states(self.model, R, th, 0.0, E)
                return (R, th, E, 0.0, sp.tracked_energy(g), float(sp.weights[g]), 0)
            corr = perturbation.dc_surface_correction(self.model, g, R, th, E)
            return (R, th, E, 0.0, float(self.model.potential(g, R)) + corr.total, 1.0, 0)

        return TaskResult(self._SURFACE_HEADER, self._map(one, self._surface_points(), threads),
                          diagnostics={"method": method})

    def _ac_rows(self, threads, method):
        g = self.state
        omegas = self.axis("omega", [self.field.omega])
        points = [(R, th, E, w) for w in omegas for (R, th, E) in self._surface_points()]
        nm = self.numerics

        def one(p):
            R, th, E, w = p
            if method == "perturbative":
                corr = perturbation.ac_surface_correction(self.model, g, R, th, E, w, nm["resonance_tol"])
                return (R, th, E, w, float(self.model.potential(g, R)) + corr.total, 1.0, 0), True
            res = floquet.quasienergies(self.model, R, th, E, w, nm["fourier_cutoff"], g,
                                        nm["fourier_tol"], nm["max_fourier_cutoff"])
            return (R, th, E, w, res.quasienergy, res.weight, res.M), res.converged

        out = self._map(one, points, threads)
        rows = [r for r, _ in out]
        warns = []
        bad = sum(1 for _, ok in out if not ok)
        if bad:
            warns.append(f"{bad} Floquet points hit max_fourier_cutoff before converging")
        diag = {"method": method}
        if method == "exact":
            diag["M_used_max"] = max(r[-1] for r in rows)
        return TaskResult(self._SURFACE_HEADER, rows, diagnostics=diag, warnings=warns)

    def _run_surface_ac(self, threads):
        return self._ac_rows(threads, self.numerics["method"] or "perturbative")

    def _run_floquet(self, threads):
        return self._ac_rows(threads, "exact")

    # dynamics ---------------------------------------------------------------

    def _time(self):
        t = self.sweep["t"]
        return float(t["start"]), float(t["stop"]), float(t["dt"])

    def _rotor_run(self, limit):
        nm = self.numerics
        basis = rovib.RotorBasis(int(nm["j_max"]), int(nm["m"]))
        H = rovib.build_effective(self.model, None, self.field, "rotor", limit, basis=basis)
        init = self.data.get("initial", {})
        psi = rovib.rotor_state(basis, int(init.get("j", abs(basis.m))))
        t0, t1, dt = self._time()
        rows = []
        count = [0]
        every = int(nm["record_every"])

        def record(p):
            if count[0] % every == 0 or p.time == t1:
                pops = rovib.expectation(p, "j_populations")
                rows.append((p.time, rovib.expectation(p, "cos2_theta"), rovib.expectation(p, "cos_theta"),
                             p.norm, H.energy(p), *pops))
            count[0] += 1

        final = rovib.propagate(psi, H, t0, t1, dt, callback=record, norm_tol=nm["norm_tol"],
                                truncation_tol=nm["truncation_tol"])
        header = ["t", "cos2_exp", "cos_exp", "norm", "energy_exp"] + [f"pop_j{j}" for j in basis.j]
        drift = max(abs(r[3] - 1.0) for r in rows)
        diag = {**H.diagnostics(), "j_max_used": basis.j_max, "norm_drift": drift,
                "top_j_population": float(rovib.expectation(final, "j_populations")[-2:].max())}
        return TaskResult(header, rows, diagnostics=diag, checkpoint=final)

    def _run_align(self, threads):
        return self._rotor_run("ac")

    def _run_orient(self, threads):
        return self._rotor_run("dc")

    def _run_vib(self, threads):
        nm = self.numerics
        g = nm["grid"]
        grid = rovib.RadialGrid(float(g["R_min"]), float(g["R_max"]), int(g["N"]))
        lv = rovib.vibrational_eigenstates(self.model, grid, int(nm["n_levels"]), self.state, int(nm["j"]))
        rows = [(v, e, d) for v, (e, d) in enumerate(zip(lv.energies, lv.refinement_change))]
        return TaskResult(["v", "energy", "refinement_change"], rows,
                          diagnostics={"grid_N": grid.N, "converged": lv.converged}, warnings=lv.warnings)

    def _run_trap(self, threads):
        nm = self.numerics
        g = nm["grid"]
        grid = rovib.LineGrid(float(g["X_min"]), float(g["X_max"]), int(g["N"]))
        ab = self.data.get("alpha_bar")
        if ab is None:
            a, b = perturbation.dynamic_polarizability(self.model, self.state, self.model.r_eq, self.field.omega)
            ab = (a + 2 * b) / 3
        omega_trap = rovib.trap_frequency(self.model, ab, self.field)
        init = self.data.get("initial", {})
        sigma = init.get("sigma") or math.sqrt(1.0 / (2.0 * self.model.nuclear.total_mass * omega_trap))
        psi = rovib.gaussian_packet(grid, float(init.get("x0", 0.0)), float(sigma))
        t0, t1, dt = self._time()
        tr = rovib.com_trap_dynamics(self.model, ab, self.field, psi, t0, t1, dt, int(nm["record_every"]))
        diag = {"alpha_bar": ab, "harmonic_trap_frequency": omega_trap,
                "norm_drift": float(np.max(np.abs(tr.norm - 1.0)))}
        return TaskResult(["t", "X_mean", "X2_mean", "norm"], list(tr.rows()), diagnostics=diag,
                          warnings=tr.warnings, checkpoint=tr.final)
