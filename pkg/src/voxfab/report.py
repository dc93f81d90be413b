"""Report writers: canonical JSON, delimited tables, and figures.

Everything written here must be byte-stable across runs and parallelism
levels, so JSON is dumped with sorted keys, floats keep their full repr,
STL bytes carry a fixed header, and figures are rendered with the Agg
backend with the Date metadata stripped. Wall-clock timings are real but
live in their own file, never inside report.json.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import write_binary_stl
from .pipeline import Blueprint, PipelineResult
from .scoring import (BatchStats, DesignRecord, ScoringParams, batch_stats,
                      failure_labels, render_stage_table, scores_csv,
                      stats_summary)

_FIG_DPI = 150
_PNG_META = {"Date": None}       # drop the creation timestamp


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def dumps_canonical(data) -> str:
    return json.dumps(_jsonify(data), indent=2, sort_keys=True) + "\n"


def _report_dict(design_id: str, reports, record: DesignRecord) -> dict:
    failure = None
    for rep in reports:
        if rep.status == "failure":
            failure = {"stage": rep.stage, "reason": rep.reason,
                       "joint_id": rep.joint_id, "detail": rep.detail}
    return {
        "design_id": design_id,
        "status": "success" if failure is None else "failure",
        "failure": failure,
        "reports": [rep.to_dict() for rep in reports],
        "scores": {
            "raw": asdict(record.bundle.raw),
            "normalized": asdict(record.bundle.normalized),
            "s_mfg": record.bundle.s_mfg,
        },
    }


def design_report(result: PipelineResult) -> dict:
    return _report_dict(result.design_id, result.reports, result.record)


def design_timings(result: PipelineResult) -> dict:
    return {"design_id": result.design_id,
            "stages": [{"stage": rep.stage,
                        "wall_time_s": rep.wall_time_s}
                       for rep in result.reports]}


def scan_curve_csv(curves: np.ndarray) -> str:
    """Motor offset scan as CSV: one row per scanned offset."""
    lines = ["delta_mm,v_holder_mm3,v_connector_mm3,score"]
    for row in np.asarray(curves, dtype=float):
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def save_scan_curve_png(curves: np.ndarray, joint_id: int,
                        path: str | Path,
                        chosen_offset: float | None = None) -> Path:
    curves = np.asarray(curves, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(curves[:, 0], curves[:, 1], label="V_holder", lw=1.2)
    ax.plot(curves[:, 0], curves[:, 2], label="V_connector", lw=1.2)
    ax.plot(curves[:, 0], curves[:, 3], label="S", lw=1.8, color="k")
    if chosen_offset is not None:
        ax.axvline(chosen_offset, color="tab:red", ls="--", lw=1.0,
                   label=f"chosen {chosen_offset:g} mm")
    ax.set_xlabel("offset along joint axis (mm)")
    ax.set_ylabel("grip volume (mm$^3$) / score")
    ax.set_title(f"joint {joint_id} motor offset scan")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_FIG_DPI, metadata=_PNG_META)
    plt.close(fig)
    return path


def histogram_csv(stats: BatchStats) -> str:
    lines = ["bin_lo,bin_hi,count"]
    edges = stats.histogram_edges
    for lo, hi, c in zip(edges[:-1], edges[1:], stats.histogram_counts):
        lines.append(f"{repr(float(lo))},{repr(float(hi))},{int(c)}")
    return "\n".join(lines) + "\n"


def save_histogram_png(stats: BatchStats, path: str | Path) -> Path:
    edges = np.asarray(stats.histogram_edges, dtype=float)
    counts = np.asarray(stats.histogram_counts, dtype=int)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge",
           edgecolor="white", linewidth=0.5)
    ax.set_xlabel("manufacturability score s_mfg")
    ax.set_ylabel("successful designs")
    ax.set_title(f"score histogram over {stats.n_succ} passing designs")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_FIG_DPI, metadata=_PNG_META)
    plt.close(fig)
    return path


def write_design_report(result: PipelineResult,
                        out_dir: str | Path) -> list[Path]:
    """report.json + timings.json + one-row scores.csv for a single run,
    success or failure alike."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    p = out / "report.json"
    p.write_text(dumps_canonical(design_report(result)))
    files.append(p)
    p = out / "timings.json"
    p.write_text(dumps_canonical(design_timings(result)))
    files.append(p)
    p = out / "scores.csv"
    p.write_text(scores_csv([result.record]))
    files.append(p)
    return files


def write_blueprint_files(bp: Blueprint, out_dir: str | Path,
                          design_id: str = "design") -> list[Path]:
    """The full fabrication set: STL per rigid part plus skin, the report
    trio, and a scan-curve CSV + figure per joint."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for sid in sorted(bp.body.rigid_parts):
        p = out / f"part_{sid}.stl"
        write_binary_stl(bp.body.rigid_parts[sid], p)
        files.append(p)
    if bp.body.skin is not None:
        p = out / "skin.stl"
        write_binary_stl(bp.body.skin, p)
        files.append(p)
    record = DesignRecord(design_id, None, None, bp.bundle)
    p = out / "report.json"
    p.write_text(dumps_canonical(_report_dict(design_id, bp.reports,
                                              record)))
    files.append(p)
    p = out / "timings.json"
    p.write_text(dumps_canonical(
        {"design_id": design_id,
         "stages": [{"stage": rep.stage, "wall_time_s": rep.wall_time_s}
                    for rep in bp.reports]}))
    files.append(p)
    p = out / "scores.csv"
    p.write_text(scores_csv([record]))
    files.append(p)
    for pl in bp.motors.placements:
        p = out / f"motor_scan_j{pl.joint_id}.csv"
        p.write_text(scan_curve_csv(pl.curves))
        files.append(p)
        files.append(save_scan_curve_png(
            pl.curves, pl.joint_id, out / f"motor_scan_j{pl.joint_id}.png",
            chosen_offset=pl.offset))
    return files


def write_result_files(result: PipelineResult,
                       out_dir: str | Path) -> list[Path]:
    """Single-run output: blueprint set when the run passed, otherwise the
    report trio documenting where and why it stopped."""
    if result.ok:
        return write_blueprint_files(result.blueprint, out_dir,
                                     result.design_id)
    return write_design_report(result, out_dir)


def write_batch_files(results: list[PipelineResult], out_dir: str | Path,
                      params: ScoringParams | None = None,
                      ) -> tuple[BatchStats, list[Path]]:
    """Batch campaign output: stats summary, stage table, score CSV,
    failure labels, histogram (CSV + figure), and per-design reports."""
    params = params or ScoringParams()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = sorted(results, key=lambda r: r.design_id)
    records = [r.record for r in results]
    stats = batch_stats(records, params)
    files = []
    p = out / "batch_summary.json"
    p.write_text(dumps_canonical(stats_summary(stats)))
    files.append(p)
    p = out / "stage_table.txt"
    p.write_text(render_stage_table(stats) + "\n")
    files.append(p)
    p = out / "scores.csv"
    p.write_text(scores_csv(records))
    files.append(p)
    p = out / "failure_labels.json"
    p.write_text(dumps_canonical(failure_labels(records)))
    files.append(p)
    p = out / "histogram.csv"
    p.write_text(histogram_csv(stats))
    files.append(p)
    files.append(save_histogram_png(stats, out / "histogram.png"))
    rep_dir = out / "reports"
    rep_dir.mkdir(exist_ok=True)
    for res in results:
        p = rep_dir / f"{res.design_id}.json"
        p.write_text(dumps_canonical(design_report(res)))
        files.append(p)
    p = out / "timings.json"
    p.write_text(dumps_canonical(
        {res.design_id: {rep.stage: rep.wall_time_s for rep in res.reports}
         for res in results}))
    files.append(p)
    return stats, files
