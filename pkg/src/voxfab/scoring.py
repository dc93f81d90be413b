"""Manufacturability scoring and batch statistics.

Raw per-stage scores follow the solver formulas; the aggregate maps each raw
value into [0,1] by clamped min-max against configured bounds and sums the
five terms, so s_mfg lives in [0,5]. A failed stage contributes a raw score
of zero instead of aborting scoring, which lets defective designs still be
ranked. Batch statistics count failures per stage and expose the remaining
ratio in every convention under the sun (cumulative, per-stage share,
conditional survival), each labeled explicitly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBatch, InvalidDimension, NoInterior, NoJoints
from .geometry import OrientedBox, VolumeField, max_interior_clearance
from .motor import MotorPlacement

STAGE_TREE = "tree"
STAGE_MOTOR = "motor"
STAGE_ELEC = "electronics"
STAGE_WIRE = "wire"

FAILURE_LABELS = {
    STAGE_TREE: "invalid_tree",
    STAGE_MOTOR: "motor_fail",
    STAGE_ELEC: "elec_fail",
    STAGE_WIRE: "wire_fail",
    None: "success",
}

SCORE_NAMES = ("s_motor", "s_elec", "s_cable", "s_elec_inst", "s_body_inst")


@dataclass(frozen=True)
class ScoringParams:
    lambda_l: float = 0.01          # 1/mm, wire length decay
    lambda_kappa: float = 10.0      # mm, wire curvature decay
    cable_alpha: float = 0.5        # curvature term weight
    inst_lambda: float = 1000.0     # mm^3, installability decay
    obb_threshold: float = 200.0    # mm, printable extent before penalty
    obb_decay: float = 0.01         # 1/mm past the threshold
    # clamped min-max bounds for the three open-scale scores
    motor_bounds: tuple[float, float] = (0.0, 10000.0)
    elec_bounds: tuple[float, float] = (0.0, 30.0)
    cable_bounds: tuple[float, float] = (0.0, 1.5)
    histogram_bin_width: float = 0.25

    def __post_init__(self):
        for name in ("lambda_l", "lambda_kappa", "inst_lambda", "obb_decay",
                     "histogram_bin_width"):
            if getattr(self, name) <= 0:
                raise InvalidDimension(f"{name} must be positive")
        if self.cable_alpha < 0 or self.obb_threshold < 0:
            raise InvalidDimension("weights must be non-negative")
        for name in ("motor_bounds", "elec_bounds", "cable_bounds"):
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise InvalidDimension(f"{name} must satisfy hi > lo")


@dataclass(frozen=True)
class RawScores:
    s_motor: float = 0.0
    s_elec: float = 0.0
    s_cable: float = 0.0
    s_elec_inst: float = 0.0
    s_body_inst: float = 0.0


@dataclass(frozen=True)
class ScoreBundle:
    raw: RawScores
    normalized: RawScores           # each component in [0, 1]
    s_mfg: float

    def __post_init__(self):
        vals = [getattr(self.normalized, n) for n in SCORE_NAMES]
        if any(v < -1e-12 or v > 1.0 + 1e-12 for v in vals):
            raise InvalidDimension("normalized scores must lie in [0,1]")
        if abs(self.s_mfg - sum(vals)) > 1e-12:
            raise InvalidDimension("s_mfg must equal the normalized sum")


def score_motor(placements: list[MotorPlacement]) -> float:
    """Mean of the per-joint optimal scores."""
    if not placements:
        raise NoJoints("motor score needs at least one joint placement")
    return float(np.mean([p.score for p in placements]))


def score_electronics(segment_sdfs: list[VolumeField], obb: OrientedBox,
                      params: ScoringParams) -> float:
    """Deepest interior clearance across segments, shrunk by the size
    penalty p_obb once the host's largest extent exceeds the printable
    threshold."""
    best = None
    for sdf in segment_sdfs:
        try:
            d, _ = max_interior_clearance(sdf)
        except NoInterior:
            continue
        best = d if best is None else max(best, d)
    if best is None:
        raise NoInterior("no segment has interior clearance")
    extent = obb.max_extent
    if extent <= params.obb_threshold:
        p_obb = 1.0
    else:
        p_obb = float(np.exp(-params.obb_decay
                             * (extent - params.obb_threshold)))
    return best * p_obb


def score_cable(l_tot: float, kappa_max: float,
                params: ScoringParams) -> float:
    """exp(-lambda_L L) + alpha exp(-lambda_kappa kappa)."""
    if l_tot < 0 or kappa_max < 0:
        raise InvalidDimension("cable metrics must be non-negative")
    return float(np.exp(-params.lambda_l * l_tot)
                 + params.cable_alpha
                 * np.exp(-params.lambda_kappa * kappa_max))


def score_installability(volume_mm3: float, lam: float) -> float:
    """exp(-V / lambda): 1 at zero interference, decaying with volume."""
    if volume_mm3 < 0:
        raise InvalidDimension("interference volume must be non-negative")
    if lam <= 0:
        raise InvalidDimension("lambda must be positive")
    return float(np.exp(-volume_mm3 / lam))


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def aggregate(raw: RawScores, params: ScoringParams) -> ScoreBundle:
    """Clamped min-max normalization per score, installability terms pass
    through untouched (their raw form is already exp(-V/lambda) in (0,1])."""
    def minmax(x, bounds):
        lo, hi = bounds
        return _clamp01((x - lo) / (hi - lo))

    normalized = RawScores(
        s_motor=minmax(raw.s_motor, params.motor_bounds),
        s_elec=minmax(raw.s_elec, params.elec_bounds),
        s_cable=minmax(raw.s_cable, params.cable_bounds),
        s_elec_inst=raw.s_elec_inst,
        s_body_inst=raw.s_body_inst,
    )
    s_mfg = float(sum(getattr(normalized, n) for n in SCORE_NAMES))
    return ScoreBundle(raw=raw, normalized=normalized, s_mfg=s_mfg)


# ---------------------------------------------------------------------------
# Batch statistics

@dataclass(frozen=True)
class DesignRecord:
    """One design's outcome as batch statistics see it. failure_stage is
    None for a full pass, otherwise the stage that aborted the run."""

    design_id: str
    failure_stage: str | None
    failure_reason: str | None
    bundle: ScoreBundle

    def __post_init__(self):
        if self.failure_stage not in FAILURE_LABELS:
            raise InvalidDimension(
                f"unknown failure stage {self.failure_stage!r}")

    @property
    def label(self) -> str:
        return FAILURE_LABELS[self.failure_stage]


@dataclass(frozen=True)
class BatchStats:
    n_tot: int
    n_succ: int
    n_fail_tree: int
    n_fail_motor: int
    n_fail_elec: int
    n_fail_cable: int
    r_pass: float
    remaining_after: dict[str, float] = field(default_factory=dict)
    histogram_edges: np.ndarray = field(default_factory=lambda: np.zeros(0))
    histogram_counts: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        parts = (self.n_succ + self.n_fail_tree + self.n_fail_motor
                 + self.n_fail_elec + self.n_fail_cable)
        if parts != self.n_tot:
            raise InvalidDimension(
                f"failure counts {parts} do not partition n_tot {self.n_tot}")


_STAGE_ORDER = (STAGE_TREE, STAGE_MOTOR, STAGE_ELEC, STAGE_WIRE)


def batch_stats(records: list[DesignRecord],
                params: ScoringParams | None = None) -> BatchStats:
    """Counts, pass-through ratio, cumulative remaining ratios, and the
    s_mfg histogram over successful designs."""
    if not records:
        raise EmptyBatch("batch statistics need at least one design")
    params = params or ScoringParams()
    fails = {stage: 0 for stage in _STAGE_ORDER}
    succ = 0
    for rec in records:
        if rec.failure_stage is None:
            succ += 1
        else:
            fails[rec.failure_stage] += 1
    n_tot = len(records)
    remaining = {}
    alive = n_tot
    for stage in _STAGE_ORDER:
        alive -= fails[stage]
        remaining[stage] = alive / n_tot
    scores = [rec.bundle.s_mfg for rec in records
              if rec.failure_stage is None]
    width = params.histogram_bin_width
    edges = np.arange(0.0, 5.0 + width / 2, width)
    counts, _ = np.histogram(scores, bins=edges)
    return BatchStats(
        n_tot=n_tot, n_succ=succ, n_fail_tree=fails[STAGE_TREE],
        n_fail_motor=fails[STAGE_MOTOR], n_fail_elec=fails[STAGE_ELEC],
        n_fail_cable=fails[STAGE_WIRE], r_pass=succ / n_tot,
        remaining_after=remaining, histogram_edges=edges,
        histogram_counts=counts)


def stats_summary(stats: BatchStats) -> dict:
    """JSON-ready summary. Ratios come in three labeled conventions since
    'remaining ratio after a stage' is ambiguous: per-stage share
    (1 - n_fail_stage/n_tot), cumulative survival, and survival conditional
    on reaching the stage."""
    share = {}
    conditional = {}
    alive_before = {
        STAGE_TREE: stats.n_tot,
        STAGE_MOTOR: stats.n_tot - stats.n_fail_tree,
        STAGE_ELEC: stats.n_tot - stats.n_fail_tree - stats.n_fail_motor,
        STAGE_WIRE: stats.n_succ + stats.n_fail_cable,
    }
    fails = {
        STAGE_TREE: stats.n_fail_tree,
        STAGE_MOTOR: stats.n_fail_motor,
        STAGE_ELEC: stats.n_fail_elec,
        STAGE_WIRE: stats.n_fail_cable,
    }
    for stage in _STAGE_ORDER:
        share[stage] = 1.0 - fails[stage] / stats.n_tot
        before = alive_before[stage]
        conditional[stage] = ((before - fails[stage]) / before
                              if before else 0.0)
    return {
        "n_tot": stats.n_tot,
        "n_succ": stats.n_succ,
        "n_fail": {
            "tree": stats.n_fail_tree,
            "motor": stats.n_fail_motor,
            "electronics": stats.n_fail_elec,
            "cable": stats.n_fail_cable,
        },
        "r_pass": stats.r_pass,
        "remaining_ratio": {
            "stage_share": share,
            "cumulative": dict(stats.remaining_after),
            "conditional": conditional,
        },
        "histogram": {
            "bin_edges": [float(e) for e in stats.histogram_edges],
            "counts": [int(c) for c in stats.histogram_counts],
        },
    }


_TABLE_ROWS = (
    (STAGE_TREE, "Tree validation"),
    (STAGE_MOTOR, "Motor solver"),
    (STAGE_ELEC, "Electronics solver"),
    (STAGE_WIRE, "Cable routing"),
)


def render_stage_table(stats: BatchStats) -> str:
    """Stage table: each row reports the share of all designs that did not
    fail at that stage (1 - n_fail/n_tot); the last row is the final
    pass-through rate."""
    fails = {
        STAGE_TREE: stats.n_fail_tree,
        STAGE_MOTOR: stats.n_fail_motor,
        STAGE_ELEC: stats.n_fail_elec,
        STAGE_WIRE: stats.n_fail_cable,
    }
    lines = [f"{'Stage':<24}{'Remaining ratio':>16}"]
    for stage, label in _TABLE_ROWS:
        ratio = 1.0 - fails[stage] / stats.n_tot
        lines.append(f"{label:<24}{100.0 * ratio:>15.2f}%")
    lines.append(f"{'Final pass-through':<24}{100.0 * stats.r_pass:>15.2f}%")
    return "\n".join(lines)


def scores_csv(records: list[DesignRecord]) -> str:
    """Per-design CSV: id, stage reached, failure reason, five raw scores,
    five normalized scores, s_mfg."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = (["design_id", "stage_reached", "failure_reason"]
              + [f"{n}_raw" for n in SCORE_NAMES]
              + [f"{n}_norm" for n in SCORE_NAMES] + ["s_mfg"])
    writer.writerow(header)
    for rec in sorted(records, key=lambda r: r.design_id):
        row = [rec.design_id,
               rec.failure_stage if rec.failure_stage else "scoring",
               rec.failure_reason or ""]
        row += [repr(getattr(rec.bundle.raw, n)) for n in SCORE_NAMES]
        row += [repr(getattr(rec.bundle.normalized, n)) for n in SCORE_NAMES]
        row.append(repr(rec.bundle.s_mfg))
        writer.writerow(row)
    return buf.getvalue()


def failure_labels(records: list[DesignRecord]) -> dict[str, str]:
    """design id -> outcome label, for external clustering of failures."""
    return {rec.design_id: rec.label
            for rec in sorted(records, key=lambda r: r.design_id)}
