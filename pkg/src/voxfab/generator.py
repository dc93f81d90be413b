"""Seeded procedural morphologies.

A test utility, not a design method: it produces deterministic voxel bodies
for fixtures and batch campaigns. The named builders hit known outcomes
(full pass, invalid tree, stage failures) and random_morphology jitters a
torso-with-legs family so batches exercise every pipeline path.
"""

from __future__ import annotations

import numpy as np

from .morphology import (JointAnnotation, MaterialGrid, MaterialLabel,
                         MorphologySpec)

VOXEL = 4.0  # default edge length in mm


def _spec(labels: np.ndarray, joints: list[JointAnnotation],
          voxel_size: float, name: str) -> MorphologySpec:
    grid = MaterialGrid(dims=labels.shape, voxel_size=voxel_size,
                        labels=labels.astype(np.uint8))
    return MorphologySpec(grid=grid, joints=joints, meta={"name": name})


def tripod(voxel_size: float = VOXEL) -> MorphologySpec:
    """Torso on three legs; sized to pass every stage: the torso hosts the
    stacked electronics above the joint carve zone, legs are slim enough to
    detach cleanly at their joints yet meaty enough to grip connectors. A
    soft cap on the torso top gives the body a skin layer without touching
    any joint clearance zone."""
    labels = np.zeros((24, 16, 32), dtype=np.uint8)
    labels[:, :, 10:29] = int(MaterialLabel.RIGID)          # torso
    labels[:, :, 29:32] = int(MaterialLabel.SOFT)           # cap
    feet = [((2, 5), (2, 5)), ((19, 22), (2, 5)), ((10, 13), (11, 14))]
    for (x0, x1), (y0, y1) in feet:
        labels[x0:x1 + 1, y0:y1 + 1, 0:10] = int(MaterialLabel.RIGID)
    v = voxel_size
    joints = []
    for jid, ((x0, x1), (y0, y1)) in enumerate(feet):
        cx = (x0 + x1 + 1) / 2.0 * v
        cy = (y0 + y1 + 1) / 2.0 * v
        joints.append(JointAnnotation(id=jid, position=(cx, cy, 10 * v),
                                      axis=(0.0, 0.0, 1.0),
                                      motion_range=(-0.8, 0.8)))
    return _spec(labels, joints, voxel_size, "tripod")


def ring(voxel_size: float = VOXEL) -> MorphologySpec:
    """Two blocks joined by two joints: the second edge closes a cycle, so
    tree validation rejects it."""
    labels = np.zeros((22, 8, 8), dtype=np.uint8)
    labels[0:8, :, :] = int(MaterialLabel.RIGID)
    labels[14:22, :, :] = int(MaterialLabel.RIGID)
    v = voxel_size
    mid_x = 11 * v
    joints = [
        JointAnnotation(id=0, position=(mid_x, 2 * v, 4 * v),
                        axis=(1.0, 0.0, 0.0), motion_range=(-0.5, 0.5)),
        JointAnnotation(id=1, position=(mid_x, 6 * v, 4 * v),
                        axis=(1.0, 0.0, 0.0), motion_range=(-0.5, 0.5)),
    ]
    return _spec(labels, joints, voxel_size, "ring")


def thin_limb(voxel_size: float = VOXEL) -> MorphologySpec:
    """Torso big enough for a motor mount but too small for the controller
    box, so the electronics stage fails."""
    labels = np.zeros((11, 11, 14), dtype=np.uint8)
    labels[:, :, 6:14] = int(MaterialLabel.RIGID)           # 44x44x32 torso
    labels[4:7, 4:7, 0:6] = int(MaterialLabel.RIGID)        # one leg
    v = voxel_size
    joints = [JointAnnotation(id=0, position=(5.5 * v, 5.5 * v, 6 * v),
                              axis=(0.0, 0.0, 1.0), motion_range=(-0.6, 0.6))]
    return _spec(labels, joints, voxel_size, "thin-limb")


def separated_pair(voxel_size: float = VOXEL) -> MorphologySpec:
    """Two blocks whose gap exceeds what holder plus connector can span at
    any scanned offset: the motor stage finds no feasible offset. The joint
    clearance cylinder still touches both blocks, so the tree is valid."""
    labels = np.zeros((10, 10, 28), dtype=np.uint8)
    labels[:, :, 0:10] = int(MaterialLabel.RIGID)           # z 0..40
    labels[:, :, 18:28] = int(MaterialLabel.RIGID)          # z 72..112
    v = voxel_size
    joints = [JointAnnotation(id=0, position=(5 * v, 5 * v, 14 * v),
                              axis=(0.0, 0.0, 1.0), motion_range=(-0.5, 0.5))]
    return _spec(labels, joints, voxel_size, "separated-pair")


def hollow_frame(voxel_size: float = VOXEL) -> MorphologySpec:
    """Square frame whose center of mass falls in the hole. Electronics
    anchor at the center of mass, so placement fails even though the walls
    could host the boxes."""
    labels = np.zeros((34, 34, 6), dtype=np.uint8)
    labels[:, :, :] = int(MaterialLabel.RIGID)
    labels[13:21, 13:21, :] = int(MaterialLabel.EMPTY)
    return _spec(labels, [], voxel_size, "hollow-frame")


def random_morphology(seed: int, voxel_size: float = VOXEL,
                      dims: tuple[int, int, int] = (64, 64, 64)
                      ) -> MorphologySpec:
    """One jittered torso-with-legs body inside a fixed-size grid. Sizes
    straddle the solvers' feasibility thresholds so a batch of these spreads
    across pass and failure classes deterministically per seed."""
    rng = np.random.default_rng(seed)
    labels = np.zeros(dims, dtype=np.uint8)
    tx = int(rng.integers(12, 25))
    ty = int(rng.integers(11, 17))
    tz = int(rng.integers(8, 20))
    leg_len = int(rng.integers(5, 11))
    x0, y0 = 2, 2
    z0 = leg_len
    labels[x0:x0 + tx, y0:y0 + ty, z0:z0 + tz] = int(MaterialLabel.RIGID)
    n_legs = int(rng.integers(1, 4))
    joints = []
    band = tx // n_legs           # one x band per leg so legs rarely merge
    for jid in range(n_legs):
        b0 = x0 + jid * band
        lx = int(rng.integers(b0, max(b0 + band - 3, b0 + 1)))
        ly = int(rng.integers(y0, max(y0 + ty - 3, y0 + 1)))
        labels[lx:lx + 3, ly:ly + 3, 0:leg_len] = int(MaterialLabel.RIGID)
        v = voxel_size
        joints.append(JointAnnotation(
            id=jid, position=((lx + 1.5) * v, (ly + 1.5) * v, z0 * v),
            axis=(0.0, 0.0, 1.0), motion_range=(-0.7, 0.7)))
    if rng.random() < 0.25:  # soft cap; 3 voxels thick so opening keeps it
        labels[x0:x0 + tx, y0:y0 + ty, z0 + tz:z0 + tz + 3] = int(
            MaterialLabel.SOFT)
    return _spec(labels, joints, voxel_size, f"random-{seed}")


def generate_batch(n: int, seed: int = 0,
                   voxel_size: float = VOXEL) -> list[MorphologySpec]:
    """Deterministic mixed batch: mostly random bodies with the named
    archetypes salted in so every failure class shows up."""
    out = []
    archetypes = (tripod, ring, thin_limb, separated_pair, hollow_frame)
    for i in range(n):
        if i % 10 < len(archetypes) and i < 10 * len(archetypes):
            spec = archetypes[i % 10](voxel_size)
            spec.meta["design_id"] = f"d{i:04d}-{spec.meta['name']}"
        else:
            spec = random_morphology(seed * 100003 + i, voxel_size)
            spec.meta["design_id"] = f"d{i:04d}-{spec.meta['name']}"
        out.append(spec)
    return out
