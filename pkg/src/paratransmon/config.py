"""JSON device configuration: transmons, coupling, flux pulse and solver settings."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .coupling import CoupledPair
from .modulation.pulse import FluxPulse
from .series import DEFAULT_ORDER
from .tunable import TransmonSpec

FLUX_UNITS = ("radians", "flux_quanta")
TOP_KEYS = {"transmons", "g_C", "flux", "flux_units", "pulse", "solver"}
TRANSMON_KEYS = {"label", "E_C", "E_J", "E_J1", "E_J2", "xi", "xi_max", "xi_min"}
PULSE_KEYS = {"phi_bar_p", "phi_tilde_p", "omega_p", "theta_p"}
SOLVER_KEYS = {"order", "dimension", "K_max", "grid_size", "tolerance"}


class ConfigError(ValueError):
    """Schema or value problem in a device configuration."""


@dataclass(frozen=True)
class SolverSettings:
    order: int = DEFAULT_ORDER
    dimension: int = 30
    K_max: int = 50
    grid_size: int = 4096
    tolerance: float = 1e-10


@dataclass(frozen=True)
class PulseSettings:
    """Pulse block in radians; ``omega_p = None`` asks for the activation frequency."""

    phi_bar_p: float = 0.0
    phi_tilde_p: float = 0.0
    omega_p: float | None = None
    theta_p: float = 0.0

    def pulse(self, omega_p: float | None = None) -> FluxPulse:
        w = omega_p if omega_p is not None else self.omega_p
        if w is None:
            raise ConfigError("pulse.omega_p is required here")
        return FluxPulse(self.phi_bar_p, self.phi_tilde_p, w, self.theta_p)


@dataclass(frozen=True)
class DeviceConfig:
    transmons: tuple[TransmonSpec, ...]
    g_C: float = 0.0
    flux: float = 0.0  # radians
    pulse: PulseSettings = field(default_factory=PulseSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)

    @property
    def tunable(self) -> TransmonSpec:
        """The tunable transmon (the second one of a pair, else the first tunable one)."""
        if len(self.transmons) == 2:
            return self.transmons[1]
        return self.transmons[0]

    def pair(self) -> CoupledPair:
        if len(self.transmons) != 2:
            raise ConfigError("this command needs two transmons in 'transmons'")
        return CoupledPair(self.transmons[0], self.transmons[1], self.g_C, self.pulse.phi_bar_p)

    def with_solver(self, **changes) -> "DeviceConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, solver=replace(self.solver, **changes))


def _unknown(where: str, given: dict, allowed: set[str]) -> list[str]:
    return [f"{where}.{k}" if where else k for k in sorted(set(given) - allowed)]


def _number(value, key: str, problems: list[str]) -> float | None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        problems.append(f"{key} (expected a finite number)")
        return None
    return float(value)


def _transmon(raw, where: str, problems: list[str]) -> TransmonSpec | None:
    if not isinstance(raw, dict):
        problems.append(f"{where} (expected an object)")
        return None
    problems.extend(_unknown(where, raw, TRANSMON_KEYS))
    if "E_C" not in raw:
        problems.append(f"{where}.E_C (missing)")
        return None
    vals = {k: _number(raw[k], f"{where}.{k}", problems) for k in TRANSMON_KEYS - {"label"} if k in raw}
    if any(v is None for v in vals.values()):
        return None
    label = str(raw.get("label", ""))
    forms = [
        ("E_J",) if "E_J" in vals else None,
        ("E_J1",) if "E_J1" in vals else None,
        ("xi",) if "xi" in vals else None,
        ("xi_max",) if ("xi_max" in vals or "xi_min" in vals) else None,
    ]
    chosen = [f[0] for f in forms if f]
    if len(chosen) != 1:
        keys = ", ".join(f"{where}.{k}" for k in chosen) or f"{where}.E_J / {where}.xi"
        problems.append(f"{keys} (give exactly one of E_J, E_J1[+E_J2], xi, xi_max+xi_min)")
        return None
    if "E_J2" in vals and chosen[0] != "E_J1":
        problems.append(f"{where}.E_J2 (only allowed together with E_J1)")
        return None
    E_C = vals["E_C"]
    try:
        match chosen[0]:
            case "E_J":
                return TransmonSpec(E_C, vals["E_J"], 0.0, label)
            case "E_J1":
                return TransmonSpec(E_C, vals["E_J1"], vals.get("E_J2", 0.0), label)
            case "xi":
                return TransmonSpec.fixed(E_C, vals["xi"], label)
            case _:
                missing = [k for k in ("xi_max", "xi_min") if k not in vals]
                if missing:
                    problems.extend(f"{where}.{k} (missing)" for k in missing)
                    return None
                return TransmonSpec.from_xi_range(E_C, vals["xi_max"], vals["xi_min"], label)
    except ValueError as exc:
        problems.append(f"{where} ({exc})")
        return None


def config_from_dict(raw) -> DeviceConfig:
    """Validate a decoded JSON object; all problems are reported together."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    problems = _unknown("", raw, TOP_KEYS)
    units = raw.get("flux_units", "radians")
    if units not in FLUX_UNITS:
        problems.append(f"flux_units (expected one of {', '.join(FLUX_UNITS)})")
        units = "radians"
    to_rad = 2 * math.pi if units == "flux_quanta" else 1.0

    transmons = raw.get("transmons")
    specs: list[TransmonSpec] = []
    if not isinstance(transmons, list) or not 1 <= len(transmons) <= 2:
        problems.append("transmons (missing or not a list of one or two transmon objects)")
    else:
        for i, t in enumerate(transmons):
            spec = _transmon(t, f"transmons[{i}]", problems)
            if spec is not None:
                specs.append(spec)

    g_C = _number(raw.get("g_C", 0.0), "g_C", problems)
    if g_C is not None and g_C < 0:
        problems.append("g_C (must be non-negative)")
    flux = _number(raw.get("flux", 0.0), "flux", problems)

    pulse_raw = raw.get("pulse", {})
    pulse = PulseSettings()
    if not isinstance(pulse_raw, dict):
        problems.append("pulse (expected an object)")
    else:
        problems.extend(_unknown("pulse", pulse_raw, PULSE_KEYS))
        p = {k: _number(v, f"pulse.{k}", problems) for k, v in pulse_raw.items() if k in PULSE_KEYS}
        if all(v is not None for v in p.values()):
            for k in ("phi_bar_p", "phi_tilde_p"):
                if k in p:
                    p[k] *= to_rad
            if p.get("phi_tilde_p", 0.0) < 0:
                problems.append("pulse.phi_tilde_p (must be non-negative)")
            if "omega_p" in p and not p["omega_p"] > 0:
                problems.append("pulse.omega_p (must be positive)")
            pulse = PulseSettings(**p)

    solver_raw = raw.get("solver", {})
    solver = SolverSettings()
    if not isinstance(solver_raw, dict):
        problems.append("solver (expected an object)")
    else:
        problems.extend(_unknown("solver", solver_raw, SOLVER_KEYS))
        s = {}
        for k, v in solver_raw.items():
            if k not in SOLVER_KEYS:
                continue
            if k == "tolerance":
                x = _number(v, "solver.tolerance", problems)
                if x is not None and not x > 0:
                    problems.append("solver.tolerance (must be positive)")
                s[k] = x
            elif isinstance(v, bool) or not isinstance(v, int) or v < 1:
                problems.append(f"solver.{k} (expected a positive integer)")
            else:
                s[k] = v
        if not problems:
            solver = SolverSettings(**s)

    if problems:
        raise ConfigError("invalid configuration: " + "; ".join(problems))
    return DeviceConfig(tuple(specs), g_C, flux * to_rad, pulse, solver)


def parse_config(path: str | Path) -> DeviceConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(raw)
