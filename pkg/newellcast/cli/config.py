"""Run configuration loaded from a YAML document"""

import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
import yaml
from loguru import logger

from ..core import SectionGeometry, TriangularFD, large_section, make_triangular_fd, small_section
from ..errors import ConfigError, NewellcastError
from ..harness import DEFAULT_HORIZONS, SCENARIO_IDS
from ..newell import FeatureVariant
from ..nn import ARCHITECTURES, TRAINING_PRESETS, TrainConfig

GAP_POLICIES = ("fill", "reject")
GEOMETRY_PRESETS: Dict[str, Callable[[float], SectionGeometry]] = {"small": small_section, "large": large_section}
SIMULATION_PRESETS = ("case_study", "free_flow", "bottleneck", "shock")
SECTIONS = ("inputs", "ingest", "geometry", "fd", "simulation", "variants", "scenarios", "fc_extension",
            "architecture", "train", "horizons", "seed", "jobs", "out")
SECTION_KEYS: Dict[str, Tuple[str, ...]] = {
    "inputs": ("detectors",),
    "ingest": ("gap_policy", "max_gap"),
    "geometry": ("preset", "origin", "stations"),
    "fd": ("estimate", "vf", "w", "kj", "w_assumed"),
    "simulation": ("preset", "days", "noise"),
    "train": ("lag", "batch_size", "epochs", "lr", "rho", "eps", "split"),
}
STATION_KEYS = ("id", "position")

Mapping = Dict[str, Any]


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _known(section: Mapping, path: str, keys: Tuple[str, ...]) -> None:
    unknown = sorted(set(section) - set(keys), key=str)
    if unknown:
        raise ConfigError(_join(path, str(unknown[0])), f"unknown key, expected one of {list(keys)}")


def _section(data: Mapping, key: str) -> Mapping:
    value = data.get(key) or {}
    if not isinstance(value, dict):
        raise ConfigError(key, "expected a mapping")
    _known(value, key, SECTION_KEYS[key])
    return value


def _number(section: Mapping, key: str, path: str, default: Any, kind: type = float,
            minimum: Optional[float] = None, exclusive: bool = False) -> Any:
    value = section.get(key, default)
    where = _join(path, key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(where, f"expected an integer, got {value!r}")
    value = kind(value)
    if minimum is not None and (value <= minimum if exclusive else value < minimum):
        raise ConfigError(where, f"must be {'>' if exclusive else '>='} {minimum}, got {value}")
    return value


def _flag(section: Mapping, key: str, path: str, default: bool) -> bool:
    value = section.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(_join(path, key), f"expected true or false, got {value!r}")
    return value


def _choice(section: Mapping, key: str, path: str, default: str, choices: Tuple[str, ...]) -> str:
    value = section.get(key, default)
    if value not in choices:
        raise ConfigError(_join(path, key), f"must be one of {list(choices)}, got {value!r}")
    return value


@dataclass(frozen=True)
class IngestSettings:
    gap_policy: str = "fill"
    max_gap: int = 2


@dataclass(frozen=True)
class FdSettings:
    """Fixed diagram parameters, or estimation from the detector data"""
    estimate: bool = False
    vf: float = 65.0
    w: float = 14.0
    kj: float = 150.0
    w_assumed: float = 14.0

    def diagram(self) -> TriangularFD:
        return make_triangular_fd(self.vf, self.w, self.kj)


@dataclass(frozen=True)
class SimulationSettings:
    preset: str = "case_study"
    days: int = 30
    noise: float = 0.02


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; see config.example.yaml for the schema and defaults"""
    detectors: Optional[Path] = None
    ingest: IngestSettings = field(default_factory=IngestSettings)
    geometry: SectionGeometry = field(default_factory=small_section)
    fd: FdSettings = field(default_factory=FdSettings)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    variants: Tuple[FeatureVariant, ...] = tuple(FeatureVariant)
    scenarios: Tuple[str, ...] = SCENARIO_IDS
    fc_extension: bool = False
    architecture: str = "dataset1"
    train: TrainConfig = field(default_factory=lambda: TrainConfig(batch_size=TRAINING_PRESETS["dataset1"][0]))
    lag: int = TRAINING_PRESETS["dataset1"][1]
    horizons: Tuple[int, ...] = DEFAULT_HORIZONS
    seed: int = 0
    jobs: int = 1
    out: Path = Path("runs/default")

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: Path = Path(".")) -> "RunConfig":
        """Validate a parsed document; errors name the dotted field path"""
        if not isinstance(data, dict):
            raise ConfigError("", "configuration must be a mapping")
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(unknown[0], "unknown section")

        inputs = _section(data, "inputs")
        detectors = inputs.get("detectors")
        if detectors is not None and not isinstance(detectors, str):
            raise ConfigError("inputs.detectors", "expected a file path")

        ingest_data = _section(data, "ingest")
        ingest = IngestSettings(
            gap_policy=_choice(ingest_data, "gap_policy", "ingest", "fill", GAP_POLICIES),
            max_gap=_number(ingest_data, "max_gap", "ingest", 2, int, minimum=0),
        )

        fd_data = _section(data, "fd")
        fd = FdSettings(
            estimate=_flag(fd_data, "estimate", "fd", False),
            vf=_number(fd_data, "vf", "fd", 65.0, minimum=0, exclusive=True),
            w=_number(fd_data, "w", "fd", 14.0, minimum=0, exclusive=True),
            kj=_number(fd_data, "kj", "fd", 150.0, minimum=0, exclusive=True),
            w_assumed=_number(fd_data, "w_assumed", "fd", 14.0, minimum=0, exclusive=True),
        )

        sim_data = _section(data, "simulation")
        simulation = SimulationSettings(
            preset=_choice(sim_data, "preset", "simulation", "case_study", SIMULATION_PRESETS),
            days=_number(sim_data, "days", "simulation", 30, int, minimum=1),
            noise=_number(sim_data, "noise", "simulation", 0.02, minimum=0),
        )

        architecture = _choice(data, "architecture", "", "dataset1", tuple(ARCHITECTURES))
        preset_batch, preset_lag = TRAINING_PRESETS[architecture]
        train_data = _section(data, "train")
        lag = _number(train_data, "lag", "train", None, int, minimum=1) or preset_lag
        split = train_data.get("split", [0.60, 0.15, 0.25])
        if (not isinstance(split, list) or len(split) != 3
                or not all(isinstance(f, (int, float)) and not isinstance(f, bool) and f >= 0 for f in split)
                or not np.isclose(sum(split), 1.0)):
            raise ConfigError("train.split", f"three non-negative fractions summing to 1 required, got {split!r}")
        seed = _number(data, "seed", "", 0, int, minimum=0)
        train = TrainConfig(
            batch_size=_number(train_data, "batch_size", "train", None, int, minimum=1) or preset_batch,
            epochs=_number(train_data, "epochs", "train", 50, int, minimum=0),
            lr=_number(train_data, "lr", "train", 0.10, minimum=0, exclusive=True),
            rho=_number(train_data, "rho", "train", 0.95, minimum=0, exclusive=True),
            eps=_number(train_data, "eps", "train", 1e-7, minimum=0, exclusive=True),
            seed=seed,
            split=tuple(split),
        )
        if train.rho >= 1:
            raise ConfigError("train.rho", f"must be below 1, got {train.rho}")

        horizons = data.get("horizons", list(DEFAULT_HORIZONS))
        if (not isinstance(horizons, list) or not horizons
                or not all(isinstance(h, int) and not isinstance(h, bool) and h >= 1 for h in horizons)):
            raise ConfigError("horizons", f"expected a list of positive step counts, got {horizons!r}")

        out = data.get("out", "runs/default")
        if not isinstance(out, str):
            raise ConfigError("out", "expected a directory path")

        return cls(
            detectors=(base_dir / detectors) if detectors else None,
            ingest=ingest,
            geometry=_geometry(_section(data, "geometry")),
            fd=fd,
            simulation=simulation,
            variants=_variants(data.get("variants", [v.value for v in FeatureVariant])),
            scenarios=_scenarios(data.get("scenarios", list(SCENARIO_IDS))),
            fc_extension=_flag(data, "fc_extension", "", False),
            architecture=architecture,
            train=train,
            lag=lag,
            horizons=tuple(horizons),
            seed=seed,
            jobs=_number(data, "jobs", "", 1, int, minimum=1),
            out=base_dir / out,
        )

    def with_overrides(self, out: Optional[str] = None, seed: Optional[int] = None,
                       jobs: Optional[int] = None) -> "RunConfig":
        """Apply command-line overrides"""
        changes: Dict[str, Any] = {}
        if out is not None:
            changes["out"] = Path(out)
        if seed is not None:
            if seed < 0:
                raise ConfigError("seed", f"must be >= 0, got {seed}")
            changes["seed"] = seed
            changes["train"] = replace(self.train, seed=seed)
        if jobs is not None:
            if jobs < 1:
                raise ConfigError("jobs", f"must be >= 1, got {jobs}")
            changes["jobs"] = jobs
        return replace(self, **changes)

    def component_seed(self, name: str) -> int:
        return component_seed(self.seed, name)


def _geometry(section: Mapping) -> SectionGeometry:
    stations = section.get("stations")
    if stations is None:
        preset = _choice(section, "preset", "geometry", "small", tuple(GEOMETRY_PRESETS))
        origin = _number(section, "origin", "geometry", 0.5)
        return GEOMETRY_PRESETS[preset](origin)
    if not isinstance(stations, list):
        raise ConfigError("geometry.stations", "expected a list of {id, position}")
    pairs = []
    for i, entry in enumerate(stations):
        path = f"geometry.stations[{i}]"
        if not isinstance(entry, dict) or "id" not in entry:
            raise ConfigError(path, "expected a mapping with id and position")
        _known(entry, path, STATION_KEYS)
        pairs.append((str(entry["id"]), _number(entry, "position", path, None)))
        if pairs[-1][1] is None:
            raise ConfigError(f"{path}.position", "required")
    try:
        geometry = SectionGeometry(tuple(pairs))
    except NewellcastError as exc:
        raise ConfigError("geometry.stations", exc.message) from exc
    if len(geometry) != 4:
        raise ConfigError("geometry.stations", f"scenarios need exactly 4 stations, got {len(geometry)}")
    return geometry


def _variants(values: Any) -> Tuple[FeatureVariant, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError("variants", "expected a non-empty list")
    known = {v.value: v for v in FeatureVariant}
    result = []
    for i, value in enumerate(values):
        if value not in known:
            raise ConfigError(f"variants[{i}]", f"unknown variant {value!r}, expected one of {list(known)}")
        result.append(known[value])
    return tuple(result)


def _scenarios(values: Any) -> Tuple[str, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError("scenarios", "expected a non-empty list")
    for i, value in enumerate(values):
        if value not in SCENARIO_IDS:
            raise ConfigError(f"scenarios[{i}]", f"unknown scenario {value!r}")
    return tuple(values)


def component_seed(seed: int, name: str) -> int:
    """Seed for one named job, derived from the run seed independently of scheduling order"""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(zlib.crc32(name.encode("utf-8")),))
    return int(sequence.generate_state(1)[0])


def load_config(path: Optional[Union[str, Path]]) -> RunConfig:
    """Read a YAML run configuration; no path gives the defaults

    Relative paths inside the document resolve against the working directory.
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError("--config", f"{path} does not exist")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError("", f"{path} is not valid YAML: {exc}") from exc
    logger.info(f"Loaded configuration from {path}")
    return RunConfig.from_dict(data)

