"""Scenario files: YAML with unit-suffixed keys, converted to SI once at load.

Every field records where its value came from: the scenario file, a
published constant, or a shipped default that has no published source.
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

from .atmosphere import AtmosphereConstants
from .energy import PlatformSpec
from .errors import ConfigError
from .platform import MissionGeometry
from .sensing import SPEED_OF_LIGHT, CommSpec, RadarSpec

PUBLISHED = "published"
SHIPPED = "shipped-default"
FILE = "file"


def _ident(v):
    return float(v)


def _deg(v):
    return math.radians(float(v))


def _db(v):
    return 10 ** (float(v) / 10)


def _dbm(v):
    return 10 ** (float(v) / 10) / 1000.0


def _per_km(v):
    return float(v) / 1000.0


def _int(v):
    if float(v) != int(float(v)):
        raise ValueError(f"{v} is not an integer")
    return int(float(v))


def _vec3(v):
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ValueError("expected three coordinates")
    return tuple(float(c) for c in v)


def _str(v):
    return str(v)


# section -> key -> (target field, converter, default in file units, source of the default)
SCHEMA = {
    "mission": {
        "sweeps": ("M", _int, 3, PUBLISHED),
        "slot_duration_s": ("delta_t", _ident, 10.0, SHIPPED),
        "look_angle_deg": ("beta", _deg, 25.0, PUBLISHED),
        "beam_width_deg": ("alpha", _deg, 15.0, PUBLISHED),
        "slot_cap": ("N_cap", _int, 720, SHIPPED),
    },
    "radar": {
        "bandwidth_hz": ("B_w", _ident, 100e6, PUBLISHED),
        "pulse_duration_s": ("T_p", _ident, 1e-6, PUBLISHED),
        "prf_hz": ("PRF", _ident, 1000.0, PUBLISHED),
        "tx_gain_db": ("G_t", _db, 20.0, PUBLISHED),
        "rx_gain_db": ("G_r", _db, 20.0, PUBLISHED),
        "carrier_hz": ("wavelength", lambda f: SPEED_OF_LIGHT / float(f), 2e9, PUBLISHED),
        "backscatter_db": ("sigma_b", _db, 0.0, SHIPPED),
        "system_temperature_k": ("T_sys", _ident, 290.0, SHIPPED),
        "noise_figure_db": ("F_n", _db, 3.0, SHIPPED),
        "system_loss_db": ("L_s", _db, 3.0, SHIPPED),
        "snr_min_db": ("snr_min", _db, -10.0, PUBLISHED),
        "max_power_dbm": ("P_rad_max", _dbm, 46.0, PUBLISHED),
        "snr_margin": ("snr_margin", _ident, 1e-6, SHIPPED),
    },
    "comm": {
        "bandwidth_hz": ("B_c", _ident, 100e6, PUBLISHED),
        "reference_gain_db": ("rho_0", _db, -60.0, SHIPPED),
        "noise_power_dbm": ("noise_power", _dbm, -95.0, SHIPPED),
        "base_station_m": ("bs_position", _vec3, [0.0, 0.0, 0.0], PUBLISHED),
        "max_power_dbm": ("P_com_max", _dbm, 40.0, PUBLISHED),
        "rate_margin_bps": ("rate_margin", _ident, 1.0, SHIPPED),
    },
    "platform": {
        "weight_n": ("W", _ident, 4410.0, SHIPPED),
        "wing_area_m2": ("S_wing", _ident, 45.0, SHIPPED),
        "zero_lift_drag": ("C_d0", _ident, 0.02, SHIPPED),
        "oswald_efficiency": ("e_osw", _ident, 0.9, SHIPPED),
        "aspect_ratio": ("R_wing", _ident, 20.0, SHIPPED),
        "bank_angle_deg": ("zeta", _deg, 10.0, SHIPPED),
        "max_lift_coefficient": ("C_L_max", _ident, 1.5, SHIPPED),
        "propeller_efficiency": ("eta_p", _ident, 0.8, SHIPPED),
        "motor_efficiency": ("eta_e", _ident, 0.9, SHIPPED),
        "charge_efficiency": ("eta_b", _ident, 0.9, SHIPPED),
        "discharge_efficiency": ("eta_c", _ident, 0.95, SHIPPED),
        "discharge_mode": ("discharge_mode", _str, "multiply", SHIPPED),
        "initial_energy_j": ("E_ini", _ident, 50e6, SHIPPED),
        "energy_floor_fraction": ("floor_fraction", _ident, 1e-3, SHIPPED),
        "harvest_efficiency": ("eta_h", _ident, 0.2, SHIPPED),
        "panel_area_m2": ("A_panel", _ident, 50.0, SHIPPED),
        "altitude_min_m": ("z_min", _ident, 20000.0, PUBLISHED),
        "altitude_max_m": ("z_max", _ident, 32000.0, PUBLISHED),
        "speed_max_mps": ("V_max", _ident, 240.0, SHIPPED),
    },
    "atmosphere": {
        "base_pressure_pa": ("p_b1", _ident, 5474.889, PUBLISHED),
        "gravity_mps2": ("g", _ident, 9.8, PUBLISHED),
        "molar_mass_kg_per_mol": ("M_air", _ident, 0.0289644, PUBLISHED),
        "base_temperature_k": ("T_b", _ident, 216.65, PUBLISHED),
        "lapse_rate_k_per_km": ("L_b", _per_km, 6.7, PUBLISHED),
        "gas_constant_j_per_mol_k": ("R_univ", _ident, 8.31432, PUBLISHED),
        "specific_gas_constant_j_per_kg_k": ("R_spec", _ident, 287.052, PUBLISHED),
        "layer_bottom_m": ("H1", _ident, 20000.0, PUBLISHED),
        "layer_top_m": ("H2", _ident, 32000.0, PUBLISHED),
        "ground_pressure_pa": ("p_0", _ident, 101325.0, PUBLISHED),
        "solar_constant_w_per_m2": ("I_0", _ident, 1367.0, PUBLISHED),
        "extinction_coefficient": ("alpha_ext", _ident, 0.32, PUBLISHED),
    },
    "solver": {
        "delta_1": ("delta_1", _ident, 1e-3, SHIPPED),
        "delta_2": ("delta_2", _ident, 1e-3, SHIPPED),
        "max_inner_iterations": ("max_inner", _int, 50, SHIPPED),
        "max_outer_iterations": ("max_outer", _int, 50, SHIPPED),
        "backend": ("backend", _str, "ipm", SHIPPED),
        "breakpoints": ("breakpoints", _int, 24, SHIPPED),
        "seed": ("seed", _int, 0, SHIPPED),
    },
}


@dataclass(frozen=True)
class MissionSpec:
    M: int = 3
    delta_t: float = 10.0
    beta: float = math.radians(25.0)
    alpha: float = math.radians(15.0)
    N_cap: int = 720

    def __post_init__(self):
        if self.N_cap < 2:
            raise ConfigError(f"mission.slot_cap must be >= 2, got {self.N_cap}")


@dataclass(frozen=True)
class SolverSpec:
    delta_1: float = 1e-3
    delta_2: float = 1e-3
    max_inner: int = 50
    max_outer: int = 50
    backend: str = "ipm"
    breakpoints: int = 24
    seed: int = 0

    def __post_init__(self):
        if not (self.delta_1 > 0 and self.delta_2 > 0):
            raise ConfigError("solver tolerances must be positive")
        if self.max_inner < 1 or self.max_outer < 1:
            raise ConfigError("iteration caps must be >= 1")
        if self.breakpoints < 2:
            raise ConfigError("solver.breakpoints must be >= 2")


@dataclass(frozen=True)
class ScenarioConfig:
    mission: MissionSpec = field(default_factory=MissionSpec)
    radar: RadarSpec = field(default_factory=RadarSpec)
    comm: CommSpec = field(default_factory=CommSpec)
    platform: PlatformSpec = field(default_factory=PlatformSpec)
    atmosphere: AtmosphereConstants = field(default_factory=AtmosphereConstants)
    solver: SolverSpec = field(default_factory=SolverSpec)
    modes: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    name: str = "scenario"

    def __post_init__(self):
        atm, pf = self.atmosphere, self.platform
        if pf.z_min < atm.H1 or pf.z_max > atm.H2:
            raise ConfigError(
                f"altitude box [{pf.z_min}, {pf.z_max}] m leaves the atmosphere layer [{atm.H1}, {atm.H2}] m")
        # geometry checks (beta, alpha, zeta) fire here rather than at first use
        self.geometry(2)

    @property
    def M(self):
        return self.mission.M

    def geometry(self, N):
        m = self.mission
        return MissionGeometry(m.M, N, m.delta_t, m.beta, m.alpha, self.platform.zeta, self.atmosphere.g)

    def with_overrides(self, **sections):
        """Copy with some sections' fields replaced, e.g. platform={'z_max': 25000}."""
        kw = {}
        for sec, values in sections.items():
            kw[sec] = replace(getattr(self, sec), **values)
        return replace(self, **kw)

    def digest(self):
        blob = json.dumps(_as_plain(self), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _as_plain(cfg):
    out = {}
    for sec in ("mission", "radar", "comm", "platform", "atmosphere", "solver"):
        out[sec] = asdict(getattr(cfg, sec))
    return out


_SECTION_TYPES = {
    "mission": MissionSpec,
    "radar": RadarSpec,
    "comm": CommSpec,
    "platform": PlatformSpec,
    "atmosphere": AtmosphereConstants,
    "solver": SolverSpec,
}


def scenario_from_dict(data, name="scenario"):
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping of sections")
    unknown = set(data) - set(SCHEMA) - {"modes", "name"}
    if unknown:
        raise ConfigError(f"unknown scenario section(s): {sorted(unknown)}")
    sections = {}
    provenance = {}
    for sec, table in SCHEMA.items():
        raw = data.get(sec) or {}
        if not isinstance(raw, dict):
            raise ConfigError(f"section {sec!r} must be a mapping")
        extra = set(raw) - set(table)
        if extra:
            raise ConfigError(f"unknown key(s) in {sec}: {sorted(extra)}")
        kw = {}
        for key, (target, conv, default, source) in table.items():
            given = key in raw
            value = raw[key] if given else default
            try:
                kw[target] = conv(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{sec}.{key}: cannot interpret {value!r} ({exc})") from None
            provenance[f"{sec}.{key}"] = FILE if given else source
        try:
            sections[sec] = _SECTION_TYPES[sec](**kw)
        except ConfigError as exc:
            raise ConfigError(f"{sec}: {exc}") from None
    modes = dict(data.get("modes") or {})
    return ScenarioConfig(modes=modes, provenance=provenance, name=str(data.get("name", name)), **sections)


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from None
    return loads_scenario(text, name=path.stem)


def loads_scenario(text, name="scenario"):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"scenario parse error{where}: {getattr(exc, 'problem', exc)}") from None
    return scenario_from_dict(data, name=name)


def shipped_scenario_path(name="paper_table2"):
    return Path(str(resources.files("hapsar") / "scenarios" / f"{name}.yaml"))


def shipped_scenario(name="paper_table2"):
    return load_scenario(shipped_scenario_path(name))
