import math
import logging
import configparser
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, Iterable, List, Optional

from decouple import Csv, config, strtobool

from .dynamics import INTEGRATORS, METHODS, EvolutionSettings
from .errors import ConfigError
from .hamiltonian import BAND_HALF_WIDTH, DEFAULT_N_MAX, BasisSpec
from .model import DEFAULT_X_S, N_MAX_SUPPORTED, GaussianPacketSpec, PhysicalParams, SpatialGrid, WellShape

logger = logging.getLogger(__name__)

# Process-level settings from the environment
DWELL_THREADS = config("DWELL_THREADS", default=0, cast=int)
DWELL_LOG_LEVEL = config("DWELL_LOG_LEVEL", default="INFO")
DWELL_OUTPUT_DIR = config("DWELL_OUTPUT_DIR", default="results")

VERSION = "1.0.0"

# d values of the published spectrum table
TABLE_D_VALUES = [0.0, 0.01, -0.01, 0.02, -0.02, 0.033, -0.033, 0.04, -0.04, 0.05, -0.05, 0.066, -0.066]

PACKET_KINDS = ("gaussian", "two_level")
OUTPUT_FORMATS = ("csv", "json")
# E_0 .. E_10
MAX_REPORTED_LEVELS = 11


@dataclass
class PhysicalSection:
    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0


@dataclass
class WellSection:
    x_s: float = DEFAULT_X_S
    d: float = 0.0


@dataclass
class BasisSection:
    n_max: int = DEFAULT_N_MAX


@dataclass
class PacketSection:
    kind: str = "gaussian"
    x0: float = -DEFAULT_X_S
    p0: float = 0.0
    mu: float = 0.1
    alpha: float = 0.0
    level_i: int = 0
    level_j: int = 1
    a_i: float = 1.0 / math.sqrt(2.0)
    a_j: float = -1.0 / math.sqrt(2.0)


@dataclass
class EvolutionSection:
    t_max: float = 1000.0
    dt_out: float = 0.25
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    method: str = "B"
    integrator: str = "DOP853"


@dataclass
class ScanSection:
    d: List[float] = field(default_factory=lambda: list(TABLE_D_VALUES))


@dataclass
class GridSection:
    x_min: float = -8.0
    x_max: float = 8.0
    n_points: int = 401


@dataclass
class OutputSection:
    directory: str = DWELL_OUTPUT_DIR
    formats: List[str] = field(default_factory=lambda: ["csv"])
    levels: int = MAX_REPORTED_LEVELS
    eigenfunctions: bool = False
    wavefunction: bool = False
    wavefunction_stride: int = 4
    classical_dt: float = 1.0


SECTIONS = {
    "physical": PhysicalSection,
    "well": WellSection,
    "basis": BasisSection,
    "packet": PacketSection,
    "evolution": EvolutionSection,
    "scan": ScanSection,
    "grid": GridSection,
    "output": OutputSection,
}


@dataclass
class RunConfig:
    physical: PhysicalSection = field(default_factory=PhysicalSection)
    well: WellSection = field(default_factory=WellSection)
    basis: BasisSection = field(default_factory=BasisSection)
    packet: PacketSection = field(default_factory=PacketSection)
    evolution: EvolutionSection = field(default_factory=EvolutionSection)
    scan: ScanSection = field(default_factory=ScanSection)
    grid: GridSection = field(default_factory=GridSection)
    output: OutputSection = field(default_factory=OutputSection)

    def params(self) -> PhysicalParams:
        return PhysicalParams(m=self.physical.m, omega=self.physical.omega, hbar=self.physical.hbar)

    def well_shape(self, d: Optional[float] = None) -> WellShape:
        return WellShape(x_s=self.well.x_s, d=self.well.d if d is None else d)

    def basis_spec(self) -> BasisSpec:
        return BasisSpec.for_params(self.params(), self.basis.n_max)

    def packet_spec(self) -> GaussianPacketSpec:
        p = self.packet
        return GaussianPacketSpec(x0=p.x0, p0=p.p0, mu=p.mu, alpha=p.alpha, params=self.params())

    def settings(self) -> EvolutionSettings:
        e = self.evolution
        return EvolutionSettings(t_max=e.t_max, dt_out=e.dt_out, rel_tol=e.rel_tol,
                                 abs_tol=e.abs_tol, method=e.method, integrator=e.integrator)

    def spatial_grid(self) -> SpatialGrid:
        return SpatialGrid(x_min=self.grid.x_min, x_max=self.grid.x_max, n_points=self.grid.n_points)

    def to_dict(self) -> Dict:
        return asdict(self)


def _cast(raw: str, default, key: str):
    """Cast a raw text value to the type of the field default"""
    if isinstance(default, bool):
        return bool(strtobool(raw.strip()))
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, list):
        item = float if key == "scan.d" else str
        return Csv(cast=item)(raw)
    return raw.strip()


def apply_value(run: RunConfig, key: str, raw: str) -> None:
    """Set `section.key` from its text form"""
    section_name, _, name = key.partition(".")
    if section_name not in SECTIONS:
        raise ConfigError([f"{key}: unknown section '{section_name}'"])
    section = getattr(run, section_name)
    known = {f.name for f in fields(section)}
    if name not in known:
        raise ConfigError([f"{key}: unknown key"])
    try:
        value = _cast(raw, getattr(section, name), key)
    except ValueError as e:
        raise ConfigError([f"{key}: cannot parse {raw!r} ({e})"]) from e
    setattr(section, name, value)


def load_run_config(path: Optional[str] = None, overrides: Iterable[str] = ()) -> RunConfig:
    """Defaults, then the INI file, then `section.key=value` overrides"""
    run = RunConfig()
    if path:
        parser = configparser.ConfigParser()
        try:
            with open(path, "r", encoding="utf-8") as f:
                parser.read_file(f)
        except OSError as e:
            raise ConfigError([f"config: cannot read {path}: {e}"]) from e
        except configparser.Error as e:
            raise ConfigError([f"config: malformed file {path}: {e}"]) from e
        for section_name in parser.sections():
            for name, raw in parser.items(section_name):
                apply_value(run, f"{section_name}.{name}", raw)
        logger.debug(f"📊 Loaded run configuration from {path}")

    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError([f"--set {item}: expected section.key=value"])
        apply_value(run, key.strip(), raw)
    return run


def _asymmetry_problem(key: str, d: float, run: RunConfig) -> Optional[str]:
    p = run.physical
    if not (p.m > 0 and p.omega > 0 and run.well.x_s > 0):
        return None
    d_c = p.m * p.omega ** 2 / (2.0 * run.well.x_s)
    if not abs(d) < d_c:
        return f"{key}: |d|={abs(d):g} must stay below d_c={d_c:.4f}"
    return None


def validate_config(run: RunConfig, need_scan: bool = False) -> RunConfig:
    """Collect every invalid field and raise them together"""
    problems = []
    for name in ("m", "omega", "hbar"):
        if not getattr(run.physical, name) > 0:
            problems.append(f"physical.{name}: must be positive")
    if not run.well.x_s > 0:
        problems.append("well.x_s: must be positive")

    problem = _asymmetry_problem("well.d", run.well.d, run)
    if problem:
        problems.append(problem)
    if need_scan and not run.scan.d:
        problems.append("scan.d: needs at least one d value")
    for d in run.scan.d:
        problem = _asymmetry_problem("scan.d", d, run)
        if problem:
            problems.append(problem)

    if not BAND_HALF_WIDTH <= run.basis.n_max <= N_MAX_SUPPORTED:
        problems.append(f"basis.n_max: must be within {BAND_HALF_WIDTH}..{N_MAX_SUPPORTED}")

    packet = run.packet
    if packet.kind not in PACKET_KINDS:
        problems.append(f"packet.kind: must be one of {', '.join(PACKET_KINDS)}")
    if not packet.mu > 0:
        problems.append("packet.mu: must be positive")
    if packet.kind == "two_level":
        if not math.isclose(packet.a_i ** 2 + packet.a_j ** 2, 1.0, rel_tol=1e-9):
            problems.append("packet.a_i/a_j: need a_i^2 + a_j^2 = 1")
        if packet.level_i == packet.level_j:
            problems.append("packet.level_j: must differ from level_i")
        for name in ("level_i", "level_j"):
            if not 0 <= getattr(packet, name) <= run.basis.n_max:
                problems.append(f"packet.{name}: must be within 0..basis.n_max")

    e = run.evolution
    if not e.t_max > 0:
        problems.append("evolution.t_max: must be positive")
    if not e.dt_out > 0:
        problems.append("evolution.dt_out: must be positive")
    if not (e.rel_tol > 0 and e.abs_tol > 0):
        problems.append("evolution.rel_tol/abs_tol: must be positive")
    if e.method not in METHODS:
        problems.append(f"evolution.method: must be one of {', '.join(METHODS)}")
    if e.integrator not in INTEGRATORS:
        problems.append(f"evolution.integrator: must be one of {', '.join(INTEGRATORS)}")

    if not run.grid.x_max > run.grid.x_min:
        problems.append("grid.x_max: must exceed grid.x_min")
    if run.grid.n_points < 2:
        problems.append("grid.n_points: needs at least 2 points")

    out = run.output
    if not out.formats or any(f not in OUTPUT_FORMATS for f in out.formats):
        problems.append(f"output.formats: choose from {', '.join(OUTPUT_FORMATS)}")
    if not 1 <= out.levels <= MAX_REPORTED_LEVELS:
        problems.append(f"output.levels: must be within 1..{MAX_REPORTED_LEVELS}")
    if out.wavefunction_stride < 1:
        problems.append("output.wavefunction_stride: must be at least 1")
    if not out.classical_dt > 0:
        problems.append("output.classical_dt: must be positive")

    if problems:
        for problem in problems:
            logger.error(f"❌ {problem}")
        raise ConfigError(problems)
    logger.debug("✅ Run configuration valid")
    return run
