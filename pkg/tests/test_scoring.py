"""Score formulas, aggregation, and batch statistics.

All algebra here is closed-form, so tolerances are 1e-12. The stage-table
check uses the published-figures fixture: 10000 designs with 1076 motor,
2215 electronics, and 13 cable failures must render 89.24 / 77.85 / 99.87
percent rows and a 66.96 percent pass-through.
"""

import math

import numpy as np
import pytest

from voxfab.errors import EmptyBatch, InvalidDimension, NoInterior, NoJoints
from voxfab.geometry import VolumeField, signed_distance
from voxfab.geometry.mesh import OrientedBox
from voxfab.scoring import (
    BatchStats,
    DesignRecord,
    FAILURE_LABELS,
    RawScores,
    ScoreBundle,
    ScoringParams,
    aggregate,
    batch_stats,
    failure_labels,
    render_stage_table,
    score_cable,
    score_electronics,
    score_installability,
    score_motor,
    scores_csv,
    stats_summary,
)

PARAMS = ScoringParams()


def zero_bundle():
    return aggregate(RawScores(), PARAMS)


def success_record(design_id, s_mfg_target=None, **raw):
    bundle = aggregate(RawScores(**raw), PARAMS)
    return DesignRecord(design_id, None, None, bundle)


def failure_record(design_id, stage, reason):
    return DesignRecord(design_id, stage, reason, zero_bundle())


def table_one_records():
    records = []
    for i in range(1076):
        records.append(failure_record(f"m{i:05d}", "motor",
                                      "no_feasible_offset"))
    for i in range(2215):
        records.append(failure_record(f"e{i:05d}", "electronics",
                                      "no_segment_hosts_controller"))
    for i in range(13):
        records.append(failure_record(f"w{i:05d}", "wire",
                                      "disconnected_route"))
    for i in range(6696):
        records.append(success_record(f"s{i:05d}", s_motor=2500.0,
                                      s_elec=12.0, s_cable=1.1,
                                      s_elec_inst=0.9, s_body_inst=1.0))
    return records


def test_cable_score_at_origin_is_one_plus_alpha():
    assert score_cable(0.0, 0.0, PARAMS) == 1.0 + PARAMS.cable_alpha


def test_cable_score_formula_spot_values():
    for l_tot, kappa in [(100.0, 0.2), (427.0, 1.5), (3.0, 0.0)]:
        expect = math.exp(-0.01 * l_tot) + 0.5 * math.exp(-10.0 * kappa)
        assert score_cable(l_tot, kappa, PARAMS) \
            == pytest.approx(expect, abs=1e-12)
    with pytest.raises(InvalidDimension):
        score_cable(-1.0, 0.0, PARAMS)


def test_installability_decay():
    assert score_installability(0.0, 1000.0) == 1.0
    assert score_installability(1000.0, 1000.0) \
        == pytest.approx(math.exp(-1.0), abs=1e-12)
    assert score_installability(35280.0, 1000.0) \
        == pytest.approx(math.exp(-35.28), abs=1e-12)
    with pytest.raises(InvalidDimension):
        score_installability(-5.0, 1000.0)
    with pytest.raises(InvalidDimension):
        score_installability(5.0, 0.0)


def test_motor_score_is_mean():
    class P:
        def __init__(self, s):
            self.score = s

    assert score_motor([P(100.0), P(300.0)]) == pytest.approx(200.0)
    with pytest.raises(NoJoints):
        score_motor([])


def _cube_sdf(n=21):
    f = VolumeField(np.zeros(3), 1.0, np.ones((n, n, n), dtype=bool))
    return signed_distance(f)


def test_electronics_score_no_penalty_below_threshold():
    obb = OrientedBox(center=np.zeros(3), axes=np.eye(3),
                      extents=np.array([50.0, 20.0, 10.0]))
    s = score_electronics([_cube_sdf()], obb, PARAMS)
    assert s == pytest.approx(10.5, abs=1e-12)  # 21-cell cube, cell 1 mm


def test_electronics_score_obb_penalty():
    obb = OrientedBox(center=np.zeros(3), axes=np.eye(3),
                      extents=np.array([150.0, 20.0, 10.0]))
    # max extent 300 mm, 100 mm past the threshold
    expect = 10.5 * math.exp(-PARAMS.obb_decay * 100.0)
    s = score_electronics([_cube_sdf()], obb, PARAMS)
    assert s == pytest.approx(expect, abs=1e-12)


def test_electronics_score_takes_deepest_segment():
    obb = OrientedBox(center=np.zeros(3), axes=np.eye(3),
                      extents=np.array([50.0, 20.0, 10.0]))
    s = score_electronics([_cube_sdf(9), _cube_sdf(21)], obb, PARAMS)
    assert s == pytest.approx(10.5, abs=1e-12)
    empty = VolumeField(np.zeros(3), 1.0, np.zeros((4, 4, 4), dtype=bool))
    with pytest.raises(NoInterior):
        score_electronics([signed_distance(empty)], obb, PARAMS)


def test_aggregate_minmax_and_sum():
    raw = RawScores(s_motor=2500.0, s_elec=12.0, s_cable=1.2,
                    s_elec_inst=0.25, s_body_inst=0.75)
    bundle = aggregate(raw, PARAMS)
    assert bundle.normalized.s_motor == pytest.approx(0.25, abs=1e-12)
    assert bundle.normalized.s_elec == pytest.approx(0.4, abs=1e-12)
    assert bundle.normalized.s_cable == pytest.approx(0.8, abs=1e-12)
    assert bundle.normalized.s_elec_inst == 0.25  # passthrough
    assert bundle.normalized.s_body_inst == 0.75
    assert bundle.s_mfg == pytest.approx(0.25 + 0.4 + 0.8 + 0.25 + 0.75,
                                         abs=1e-12)


def test_aggregate_clamps_out_of_bounds():
    high = aggregate(RawScores(s_motor=99999.0, s_elec=99.0, s_cable=9.0,
                               s_elec_inst=1.0, s_body_inst=1.0), PARAMS)
    assert high.normalized.s_motor == 1.0
    assert high.normalized.s_elec == 1.0
    assert high.normalized.s_cable == 1.0
    assert high.s_mfg == pytest.approx(5.0)
    low = aggregate(RawScores(), PARAMS)
    assert low.s_mfg == 0.0


def test_aggregate_monotone_in_each_component(rng):
    names = ("s_motor", "s_elec", "s_cable", "s_elec_inst", "s_body_inst")
    scales = {"s_motor": 10000.0, "s_elec": 30.0, "s_cable": 1.5,
              "s_elec_inst": 1.0, "s_body_inst": 1.0}
    for _ in range(200):
        base = {n: float(rng.uniform(0.0, scales[n])) for n in names}
        s0 = aggregate(RawScores(**base), PARAMS).s_mfg
        for n in names:
            bumped = dict(base)
            bumped[n] = min(scales[n], bumped[n] + 0.07 * scales[n])
            s1 = aggregate(RawScores(**bumped), PARAMS).s_mfg
            assert s1 >= s0 - 1e-12


def test_score_bundle_rejects_inconsistent_sum():
    raw = RawScores(s_motor=100.0)
    norm = RawScores(s_motor=0.01)
    with pytest.raises(InvalidDimension):
        ScoreBundle(raw=raw, normalized=norm, s_mfg=3.0)
    with pytest.raises(InvalidDimension):
        ScoreBundle(raw=raw, normalized=RawScores(s_motor=1.7), s_mfg=1.7)


def test_design_record_labels():
    assert failure_record("a", "tree", "invalid_tree").label == "invalid_tree"
    assert failure_record("b", "motor", "x").label == "motor_fail"
    assert failure_record("c", "electronics", "x").label == "elec_fail"
    assert failure_record("d", "wire", "x").label == "wire_fail"
    assert success_record("e").label == "success"
    with pytest.raises(InvalidDimension):
        DesignRecord("f", "paint", None, zero_bundle())
    assert set(FAILURE_LABELS) == {"tree", "motor", "electronics", "wire",
                                   None}


def test_batch_partition_invariant_with_tree_failures():
    records = (
        [failure_record(f"t{i}", "tree", "invalid_tree") for i in range(3)]
        + [failure_record(f"m{i}", "motor", "no_feasible_offset")
           for i in range(2)]
        + [failure_record("e0", "electronics", "no_segment_hosts_battery")]
        + [failure_record("w0", "wire", "disconnected_route")]
        + [success_record(f"s{i}", s_motor=1000.0) for i in range(5)]
    )
    stats = batch_stats(records)
    assert stats.n_tot == 12
    assert (stats.n_succ + stats.n_fail_tree + stats.n_fail_motor
            + stats.n_fail_elec + stats.n_fail_cable) == stats.n_tot
    assert (stats.n_fail_tree, stats.n_fail_motor, stats.n_fail_elec,
            stats.n_fail_cable) == (3, 2, 1, 1)
    assert stats.r_pass == pytest.approx(5.0 / 12.0)
    assert int(stats.histogram_counts.sum()) == stats.n_succ
    with pytest.raises(InvalidDimension):
        BatchStats(n_tot=5, n_succ=1, n_fail_tree=1, n_fail_motor=1,
                   n_fail_elec=1, n_fail_cable=0, r_pass=0.2)


def test_batch_stats_rejects_empty():
    with pytest.raises(EmptyBatch):
        batch_stats([])


def test_stage_table_renders_published_fixture():
    stats = batch_stats(table_one_records())
    table = render_stage_table(stats)
    lines = table.splitlines()
    assert lines[0].startswith("Stage")
    assert lines[1].startswith("Tree validation")
    assert lines[1].endswith("100.00%")
    assert lines[2].startswith("Motor solver")
    assert lines[2].endswith("89.24%")
    assert lines[3].startswith("Electronics solver")
    assert lines[3].endswith("77.85%")
    assert lines[4].startswith("Cable routing")
    assert lines[4].endswith("99.87%")
    assert lines[5].startswith("Final pass-through")
    assert lines[5].endswith("66.96%")


def test_stats_summary_three_ratio_conventions():
    summary = stats_summary(batch_stats(table_one_records()))
    share = summary["remaining_ratio"]["stage_share"]
    assert share["motor"] == pytest.approx(0.8924)
    assert share["electronics"] == pytest.approx(0.7785)
    assert share["wire"] == pytest.approx(0.9987)
    cumulative = summary["remaining_ratio"]["cumulative"]
    assert cumulative["tree"] == pytest.approx(1.0)
    assert cumulative["motor"] == pytest.approx(0.8924)
    assert cumulative["electronics"] == pytest.approx(0.6709)
    assert cumulative["wire"] == pytest.approx(0.6696)
    conditional = summary["remaining_ratio"]["conditional"]
    assert conditional["motor"] == pytest.approx(0.8924)
    assert conditional["electronics"] == pytest.approx(6709.0 / 8924.0)
    assert conditional["wire"] == pytest.approx(6696.0 / 6709.0)
    assert summary["r_pass"] == pytest.approx(0.6696)
    assert summary["n_fail"] == {"tree": 0, "motor": 1076,
                                 "electronics": 2215, "cable": 13}


def test_scores_csv_layout():
    records = [success_record("b", s_motor=2500.0, s_cable=1.2),
               failure_record("a", "motor", "no_feasible_offset")]
    text = scores_csv(records)
    lines = text.splitlines()
    assert lines[0].split(",")[:3] == ["design_id", "stage_reached",
                                      "failure_reason"]
    assert len(lines[0].split(",")) == 14
    # sorted by id, floats round-trip through repr
    first = lines[1].split(",")
    assert first[0] == "a"
    assert first[1] == "motor"
    assert first[2] == "no_feasible_offset"
    second = lines[2].split(",")
    assert second[0] == "b"
    assert second[1] == "scoring"
    assert float(second[3]) == 2500.0
    assert text == scores_csv(records)  # deterministic


def test_failure_labels_map():
    records = [failure_record("x", "wire", "disconnected_route"),
               success_record("y")]
    assert failure_labels(records) == {"x": "wire_fail", "y": "success"}
