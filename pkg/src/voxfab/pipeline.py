"""Per-design orchestration and batch campaigns.

One design flows through a fixed stage sequence: tree validation,
semi-virtual processing, then the motor, electronics, and wire solvers,
then scoring. Each stage appends a SolverReport; the first failure stops
the run, so a report list is always a prefix of the full sequence. A
Blueprint exists only when every stage succeeded. Failed designs still get
a DesignRecord whose raw scores are zero from the failed stage onward,
which keeps defective designs rankable in batch statistics.
"""

from __future__ import annotations

import multiprocessing
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .body import SemiVirtualBody, process_body
from .config import PipelineConfig, default_config
from .electronics import CONTROLLER, ElectronicsPlacement, place_electronics
from .errors import (REASON_GEOMETRY_FAILURE, REASON_INVALID_TREE,
                     REASON_NO_RIGID_SEGMENTS, EmptyBatch, InvariantViolation,
                     NoInterior, NoJoints, StageFailure, VoxfabError)
from .geometry import (OrientedBox, max_interior_clearance,
                       oriented_bounding_box, signed_distance)
from .morphology import MorphologySpec, build_kinematic_tree, label_segments
from .motor import MotorSolution, solve_all_motors
from .scoring import (STAGE_ELEC, STAGE_MOTOR, STAGE_TREE, STAGE_WIRE,
                      DesignRecord, RawScores, ScoreBundle, aggregate,
                      score_cable, score_electronics, score_installability,
                      score_motor)
from .wires import WireSolution, route_wires, routing_endpoints

STAGES = ("tree", "processors", "motor", "electronics", "wire", "scoring")

# Report stage -> batch bucket. Everything that dies before the motor
# solver counts as a tree-class failure in the stage partition.
_RECORD_STAGE = {
    "tree": STAGE_TREE,
    "processors": STAGE_TREE,
    "motor": STAGE_MOTOR,
    "electronics": STAGE_ELEC,
    "wire": STAGE_WIRE,
}


@dataclass
class SolverReport:
    """Outcome of one stage. wall_time_s never enters the serialized
    report (outputs must be byte-stable across runs); the report writer
    keeps timings in a separate file."""

    stage: str
    status: str                    # "success" | "failure"
    wall_time_s: float
    reason: str | None = None
    joint_id: int | None = None
    detail: str = ""
    metrics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"stage": self.stage, "status": self.status,
             "metrics": self.metrics}
        if self.status == "failure":
            d["reason"] = self.reason
            d["joint_id"] = self.joint_id
            d["detail"] = self.detail
        return d


@dataclass
class Blueprint:
    """Everything needed to fabricate one design. Exists iff all stages
    passed; meshes carry motor mounts, cavities, and wire tunnels."""

    body: SemiVirtualBody
    motors: MotorSolution
    electronics: list[ElectronicsPlacement]
    wires: WireSolution
    bundle: ScoreBundle
    reports: list[SolverReport]


@dataclass
class PipelineResult:
    design_id: str
    reports: list[SolverReport]
    record: DesignRecord
    blueprint: Blueprint | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    @property
    def failure(self) -> SolverReport | None:
        for rep in self.reports:
            if rep.status == "failure":
                return rep
        return None


def _placement_metrics(motors: MotorSolution) -> dict:
    return {
        "placements": [
            {"joint_id": p.joint_id, "offset_mm": p.offset,
             "configuration": p.configuration, "score": p.score,
             "v_holder_mm3": p.v_h, "v_connector_mm3": p.v_c}
            for p in motors.placements
        ],
        "phi_feasible_rad": {str(j): list(iv)
                             for j, iv in sorted(motors.phi_feasible.items())},
        "carved_mm3": {str(s): v
                       for s, v in sorted(motors.carved_mm3.items())},
        "body_overlap_mm3": motors.body_overlap_mm3,
    }


def _electronics_metrics(placements: list[ElectronicsPlacement]) -> dict:
    return {
        "placements": [
            {"component": p.component, "segment": p.segment,
             "position_mm": [float(x) for x in p.position],
             "box_center_mm": [float(x) for x in p.box_center],
             "rotation": [[float(x) for x in row] for row in p.rotation],
             "v_insert_mm3": p.v_insert_mm3}
            for p in placements
        ],
    }


def _wire_metrics(wires: WireSolution) -> dict:
    return {
        "routes": [
            {"joint_id": r.joint_id, "length_mm": r.length_mm,
             "max_curvature_per_mm": r.max_curvature,
             "touched_parts": list(r.touched_parts or []),
             "waypoints": int(len(r.path.waypoints))}
            for r in wires.routes
        ],
        "l_tot_mm": wires.l_tot_mm,
        "kappa_max_per_mm": wires.kappa_max,
    }


def _clearance_snapshot(body: SemiVirtualBody,
                        ) -> tuple[list, OrientedBox | None]:
    """Segment SDFs and the OBB of the roomiest segment, taken after the
    motor stage and before cavities are carved. These feed S_elec."""
    sdfs = []
    best = None
    host = None
    for sid in sorted(body.rigid_fields):
        f = body.rigid_fields[sid]
        if not f.values.any():
            continue
        sdf = signed_distance(f)
        sdfs.append(sdf)
        try:
            d, _ = max_interior_clearance(sdf)
        except NoInterior:
            continue
        if best is None or d > best:
            best, host = d, sid
    obb = (oriented_bounding_box(body.rigid_parts[host])
           if host is not None else None)
    return sdfs, obb


def run_pipeline(spec: MorphologySpec,
                 config: PipelineConfig | None = None,
                 design_id: str | None = None,
                 keep_blueprint: bool = True) -> PipelineResult:
    """Run one design through every stage.

    Always returns a PipelineResult: on success it carries a Blueprint (can
    be suppressed with keep_blueprint=False to save memory in batches), on
    failure the report list ends with the failing stage. Only genuinely
    malformed inputs raise."""
    config = config or default_config()
    if design_id is None:
        design_id = str(spec.meta.get("design_id",
                                      spec.meta.get("name", "design")))
    if not spec.grid.labels.any():
        raise InvariantViolation("grid", "no non-empty voxels")

    reports: list[SolverReport] = []
    raw: dict[str, float] = {}

    def fail(stage: str, reason: str, joint_id, detail: str,
             t0: float) -> PipelineResult:
        reports.append(SolverReport(
            stage=stage, status="failure",
            wall_time_s=time.perf_counter() - t0, reason=reason,
            joint_id=joint_id, detail=detail))
        bundle = aggregate(RawScores(**raw), config.scoring)
        record = DesignRecord(design_id, _RECORD_STAGE[stage], reason, bundle)
        return PipelineResult(design_id, reports, record)

    def ok(stage: str, t0: float, metrics: dict) -> None:
        reports.append(SolverReport(
            stage=stage, status="success",
            wall_time_s=time.perf_counter() - t0, metrics=metrics))

    # --- tree ------------------------------------------------------------
    t0 = time.perf_counter()
    labeling = label_segments(spec.grid, spec.joints, config.clearance)
    if labeling.segment_count == 0:
        return fail("tree", REASON_NO_RIGID_SEGMENTS, None,
                    "morphology has no rigid segments", t0)
    tree = build_kinematic_tree(spec.grid, labeling, spec.joints,
                                config.clearance)
    if not tree.valid:
        return fail("tree", REASON_INVALID_TREE, None,
                    tree.invalid_reason or "", t0)
    ok("tree", t0, {"segments": labeling.segment_count,
                    "joints": len(spec.joints),
                    "edges": [[int(j), int(a), int(b)]
                              for j, a, b in tree.edges],
                    "root": tree.root})

    # --- processors -------------------------------------------------------
    t0 = time.perf_counter()
    try:
        body = process_body(spec, config.clearance,
                            config.shell_thickness_mm,
                            cell_size=config.cell_size,
                            labeling=labeling, tree=tree)
    except VoxfabError as exc:
        return fail("processors", REASON_GEOMETRY_FAILURE, None,
                    str(exc), t0)
    ok("processors", t0, {
        "cell_size_mm": body.provenance.get("cell_size_mm"),
        "part_volume_mm3": {
            str(s): float(np.count_nonzero(f.values)) * f.cell_size ** 3
            for s, f in sorted(body.rigid_fields.items())},
        "skin_triangles": 0 if body.skin is None
        else int(len(body.skin.triangles)),
    })

    # --- motor -------------------------------------------------------------
    t0 = time.perf_counter()
    try:
        motors = solve_all_motors(body, config.motor, config.motor_solver)
    except StageFailure as exc:
        return fail("motor", exc.reason, exc.joint_id,
                    exc.detail or str(exc), t0)
    try:
        raw["s_motor"] = score_motor(motors.placements)
    except NoJoints:
        raw["s_motor"] = 0.0       # jointless body: nothing to average
    raw["s_body_inst"] = score_installability(
        motors.body_overlap_mm3, config.scoring.inst_lambda)
    ok("motor", t0, _placement_metrics(motors))

    # S_elec inputs are frozen here: interior clearance of the post-motor
    # segments, before the cavities themselves eat into the clearance.
    seg_sdfs, obb = _clearance_snapshot(body)

    # --- electronics --------------------------------------------------------
    t0 = time.perf_counter()
    try:
        placements = place_electronics(body, config.electronics)
    except StageFailure as exc:
        return fail("electronics", exc.reason, exc.joint_id,
                    exc.detail or str(exc), t0)
    try:
        raw["s_elec"] = (score_electronics(seg_sdfs, obb, config.scoring)
                         if obb is not None else 0.0)
    except NoInterior:             # cannot happen after a placement; belt
        raw["s_elec"] = 0.0        # and braces for custom spec subtypes
    raw["s_elec_inst"] = score_installability(
        sum(p.v_insert_mm3 or 0.0 for p in placements),
        config.scoring.inst_lambda)
    ok("electronics", t0, _electronics_metrics(placements))

    # --- wire ---------------------------------------------------------------
    t0 = time.perf_counter()
    controller = next(p for p in placements if p.component == CONTROLLER)
    try:
        endpoints = routing_endpoints(body, motors.placements, controller,
                                      config.motor, config.electronics)
        wires = route_wires(body, endpoints, config.wire.r_wire,
                            config.wire.window)
    except StageFailure as exc:
        return fail("wire", exc.reason, exc.joint_id,
                    exc.detail or str(exc), t0)
    raw["s_cable"] = score_cable(wires.l_tot_mm, wires.kappa_max,
                                 config.scoring)
    ok("wire", t0, _wire_metrics(wires))

    # --- scoring ------------------------------------------------------------
    t0 = time.perf_counter()
    bundle = aggregate(RawScores(**raw), config.scoring)
    ok("scoring", t0, {
        "raw": {k: getattr(bundle.raw, k) for k in RawScores.__annotations__},
        "normalized": {k: getattr(bundle.normalized, k)
                       for k in RawScores.__annotations__},
        "s_mfg": bundle.s_mfg,
    })
    record = DesignRecord(design_id, None, None, bundle)
    blueprint = None
    if keep_blueprint:
        blueprint = Blueprint(body=body, motors=motors,
                              electronics=placements, wires=wires,
                              bundle=bundle, reports=reports)
    return PipelineResult(design_id, reports, record, blueprint)


def export_blueprint(bp: Blueprint, out_dir: str | Path,
                     design_id: str = "design") -> list[Path]:
    """Write the fabrication files for one complete blueprint: a binary STL
    per rigid part plus the skin, the canonical report pair, the score CSV,
    and per-joint motor scan curves (CSV and figure)."""
    from . import report as report_mod
    return report_mod.write_blueprint_files(bp, out_dir, design_id)


def _run_one(args) -> PipelineResult:
    spec, config, design_id = args
    return run_pipeline(spec, config, design_id=design_id,
                        keep_blueprint=False)


def batch_run(specs: list[MorphologySpec],
              config: PipelineConfig | None = None,
              jobs: int = 1) -> list[PipelineResult]:
    """Run many designs independently and return results sorted by design
    id, so the output is identical at any parallelism level."""
    if not specs:
        raise EmptyBatch("batch needs at least one design")
    config = config or default_config()
    ids = []
    for i, spec in enumerate(specs):
        ids.append(str(spec.meta.get("design_id",
                                     spec.meta.get("name", f"d{i:04d}"))))
    if len(set(ids)) != len(ids):
        raise InvariantViolation("design_id", "batch ids must be unique")
    work = list(zip(specs, [config] * len(specs), ids))
    if jobs <= 1:
        results = [_run_one(w) for w in work]
    else:
        with multiprocessing.Pool(processes=jobs) as pool:
            results = pool.map(_run_one, work)
    return sorted(results, key=lambda r: r.design_id)
