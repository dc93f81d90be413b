"""Pipeline configuration: one JSON document collecting every solver's
hyperparameters, with explicit defaults and a lossless file round-trip."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .electronics import ElectronicsSpec
from .errors import InvalidDimension, MalformedFile
from .morphology import JointClearanceParams
from .motor import MotorSolverParams, MotorSpec
from .scoring import ScoringParams
from .wires import DEFAULT_SMOOTH_WINDOW, DEFAULT_WIRE_RADIUS


@dataclass(frozen=True)
class WireParams:
    r_wire: float = DEFAULT_WIRE_RADIUS
    window: int = DEFAULT_SMOOTH_WINDOW

    def __post_init__(self):
        if self.r_wire <= 0:
            raise InvalidDimension("wire radius must be positive")
        if self.window < 1 or self.window % 2 == 0:
            raise InvalidDimension("smoothing window must be odd and >= 1")


@dataclass(frozen=True)
class FabricationInfo:
    """Passthrough metadata for the printing step; never interpreted."""

    rigid_material: str = "PLA"
    soft_material: str = "TPU"
    interlock_depth_mm: float = 0.63


@dataclass(frozen=True)
class PipelineConfig:
    clearance: JointClearanceParams
    motor: MotorSpec
    motor_solver: MotorSolverParams
    electronics: ElectronicsSpec
    scoring: ScoringParams
    wire: WireParams
    fabrication: FabricationInfo
    cell_size: float | None = None      # None: half the grid's voxel size
    shell_thickness_mm: float = 8.0

    def __post_init__(self):
        if self.cell_size is not None and self.cell_size <= 0:
            raise InvalidDimension("cell size must be positive")
        if self.shell_thickness_mm <= 0:
            raise InvalidDimension("shell thickness must be positive")


def default_config() -> PipelineConfig:
    """Defaults sized around the stock motor: the joint clearance cylinder
    wraps the motor body with margin (1.6 r, 1.2 L/2 ... lengths in mm)."""
    motor = MotorSpec()
    clearance = JointClearanceParams(
        cylinder_radius=1.6 * motor.body_radius,
        cylinder_half_length=1.2 * motor.body_length,
        soft_sphere_radius=1.6 * motor.body_radius + 8.0,
        opening_radius_voxels=1,
    )
    return PipelineConfig(
        clearance=clearance,
        motor=motor,
        motor_solver=MotorSolverParams(),
        electronics=ElectronicsSpec(),
        scoring=ScoringParams(),
        wire=WireParams(),
        fabrication=FabricationInfo(),
    )


def config_to_dict(cfg: PipelineConfig) -> dict:
    return dataclasses.asdict(cfg)


_SECTIONS = {
    "clearance": JointClearanceParams,
    "motor": MotorSpec,
    "motor_solver": MotorSolverParams,
    "electronics": ElectronicsSpec,
    "scoring": ScoringParams,
    "wire": WireParams,
    "fabrication": FabricationInfo,
}

_TUPLE_FIELDS = {
    "scan_range", "controller_box", "battery_box", "insertion_axis",
    "motor_bounds", "elec_bounds", "cable_bounds",
}


def config_from_dict(data: dict) -> PipelineConfig:
    if not isinstance(data, dict):
        raise MalformedFile("config must be a JSON object")
    defaults = default_config()
    kwargs = {}
    try:
        for name, cls in _SECTIONS.items():
            if name not in data:
                kwargs[name] = getattr(defaults, name)
                continue
            section = data[name]
            if not isinstance(section, dict):
                raise MalformedFile(f"config section {name!r} must be an "
                                    "object")
            coerced = {k: tuple(v) if k in _TUPLE_FIELDS else v
                       for k, v in section.items()}
            base = dataclasses.asdict(getattr(defaults, name))
            base.update(coerced)
            kwargs[name] = cls(**base)
        kwargs["cell_size"] = data.get("cell_size")
        kwargs["shell_thickness_mm"] = data.get("shell_thickness_mm", 8.0)
        return PipelineConfig(**kwargs)
    except TypeError as exc:       # unknown or missing field names
        raise MalformedFile(f"bad config field: {exc}") from exc


def save_config(cfg: PipelineConfig, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
                    + "\n")
    return path


def load_config(path: str | Path) -> PipelineConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)
