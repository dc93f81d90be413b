"""voxfab: compile voxel robot morphologies into assembly-ready blueprints.

The pipeline walks a morphology through four representations: the abstract
voxel grid, a jointed multi-part mesh body, a body with motors, electronics
and wiring resolved, and finally printable mesh files plus a
manufacturability score.
"""

__version__ = "0.1.0"

from .config import PipelineConfig, default_config, load_config, save_config
from .errors import StageFailure, VoxfabError
from .morphology import (JointAnnotation, JointClearanceParams, MaterialGrid,
                         MaterialLabel, MorphologySpec, parse_morphology,
                         serialize_morphology)
from .pipeline import (Blueprint, PipelineResult, SolverReport, batch_run,
                       export_blueprint, run_pipeline)
from .scoring import BatchStats, DesignRecord, ScoreBundle, batch_stats

__all__ = [
    "BatchStats", "Blueprint", "DesignRecord", "JointAnnotation",
    "JointClearanceParams", "MaterialGrid", "MaterialLabel",
    "MorphologySpec", "PipelineConfig", "PipelineResult", "ScoreBundle",
    "SolverReport", "StageFailure", "VoxfabError", "batch_run",
    "batch_stats", "default_config", "export_blueprint", "load_config",
    "parse_morphology", "run_pipeline", "save_config",
    "serialize_morphology", "__version__",
]
