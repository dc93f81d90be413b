"""Error taxonomy shared across the package.

Input and geometry errors are raised as exceptions; solver-stage failures are
raised as StageFailure carrying a closed-enum reason code so the pipeline can
turn them into structured reports instead of tracebacks.
"""

from __future__ import annotations


class VoxfabError(Exception):
    """Base class for every error raised by this package."""


class MalformedFile(VoxfabError):
    """Input bytes are not a well-formed morphology document."""


class InvariantViolation(VoxfabError):
    """A well-formed document violates a semantic invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class EmptySurface(VoxfabError):
    """Isosurface extraction found no crossing of the iso level."""


class NonWatertight(VoxfabError):
    """Operation requires a closed, edge-manifold mesh."""


class DegenerateGeometry(VoxfabError):
    """Geometry has too little extent for the requested operation."""


class NoInterior(VoxfabError):
    """Field has no interior cell to measure."""


class InvalidDimension(VoxfabError):
    """A primitive dimension is nonpositive or otherwise unusable."""


class NoRigidSegments(VoxfabError):
    """Morphology contains no rigid material after segmentation."""


class InconsistentLayers(VoxfabError):
    """Layered body components disagree about which parts exist."""


class NoHostMesh(VoxfabError):
    """A routing endpoint has no surface to snap to."""


class Disconnected(VoxfabError):
    """No path exists between the requested surface points."""


class EmptyBatch(VoxfabError):
    """Batch statistics requested over zero designs."""


class NoJoints(VoxfabError):
    """Motor scoring requested for a design without joints."""


# Closed enum of stage-failure reason codes. Reports must only ever carry
# one of these strings.
REASON_INVALID_TREE = "invalid_tree"
REASON_NO_RIGID_SEGMENTS = "no_rigid_segments"
REASON_ZERO_FEASIBLE_RANGE = "zero_feasible_range"
REASON_NO_FEASIBLE_OFFSET = "no_feasible_offset"
REASON_GEOMETRY_FAILURE = "geometry_failure"
REASON_NO_CONTROLLER_HOST = "no_segment_hosts_controller"
REASON_NO_BATTERY_HOST = "no_segment_hosts_battery"
REASON_DISCONNECTED_ROUTE = "disconnected_route"

FAILURE_REASONS = frozenset(
    {
        REASON_INVALID_TREE,
        REASON_NO_RIGID_SEGMENTS,
        REASON_ZERO_FEASIBLE_RANGE,
        REASON_NO_FEASIBLE_OFFSET,
        REASON_GEOMETRY_FAILURE,
        REASON_NO_CONTROLLER_HOST,
        REASON_NO_BATTERY_HOST,
        REASON_DISCONNECTED_ROUTE,
    }
)


class StageFailure(VoxfabError):
    """A solver stage could not produce a feasible result.

    Carries the stage name, a reason code from FAILURE_REASONS, and an
    optional joint id plus free-text detail for the report.
    """

    def __init__(self, stage: str, reason: str, joint_id: int | None = None,
                 detail: str = ""):
        if reason not in FAILURE_REASONS:
            raise ValueError(f"unknown failure reason: {reason}")
        self.stage = stage
        self.reason = reason
        self.joint_id = joint_id
        self.detail = detail
        msg = f"[{stage}] {reason}"
        if joint_id is not None:
            msg += f" (joint {joint_id})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ZeroFeasibleRange(StageFailure):
    """Joint cannot move at all without part interpenetration."""

    def __init__(self, joint_id: int, detail: str = ""):
        super().__init__("motor", REASON_ZERO_FEASIBLE_RANGE, joint_id, detail)


class NoFeasibleOffset(StageFailure):
    """No motor offset satisfies the volume gate on both sides."""

    def __init__(self, joint_id: int, detail: str = ""):
        super().__init__("motor", REASON_NO_FEASIBLE_OFFSET, joint_id, detail)


class GeometryFailure(StageFailure):
    """A carve or embed step produced unusable geometry."""

    def __init__(self, joint_id: int | None = None, detail: str = "",
                 stage: str = "motor"):
        super().__init__(stage, REASON_GEOMETRY_FAILURE, joint_id, detail)


class InvalidTree(StageFailure):
    """Segments and joints do not form a single connected tree."""

    def __init__(self, detail: str = ""):
        super().__init__("tree", REASON_INVALID_TREE, None, detail)
