"""Wire solver: surface-geodesic routes from every motor to the controller.

Reference points are offset from the motor and controller frames, snapped to
the nearest mesh vertex of their host parts, and joined by shortest paths on
a merged surface graph. Parts meeting at a joint are bridged by proximity
edges so a route can hop across the articulation gap. Routes are smoothed,
measured (length, peak Menger curvature), swept into tunnel fields on the
shared lattice, and subtracted from every part they intersect, skin
included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .body import SemiVirtualBody
from .electronics import ElectronicsPlacement, ElectronicsSpec, _extent_along
from .errors import (REASON_DISCONNECTED_ROUTE, Disconnected, GeometryFailure,
                     NoHostMesh, StageFailure)
from .geometry import (SurfacePath, TriMesh, build_surface_graph,
                       max_path_curvature, shortest_path_nodes, smooth_path,
                       sweep_tube)
from .motor import HOLDER_ON_A, MotorPlacement, MotorSpec

DEFAULT_WIRE_RADIUS = 2.0
DEFAULT_SMOOTH_WINDOW = 5

SKIN_PART = -1  # pseudo id for the soft skin in touched-part listings


@dataclass
class RouteEndpoints:
    """One motor-to-controller request: reference points plus their snapped
    mesh vertices. Vertex ids index the host part's own mesh."""

    joint_id: int
    start_part: int
    end_part: int
    start_ref: np.ndarray
    end_ref: np.ndarray
    start_vertex: int
    end_vertex: int
    start_pos: np.ndarray
    end_pos: np.ndarray


@dataclass
class WireRoute:
    joint_id: int
    endpoints: RouteEndpoints
    path: SurfacePath
    length_mm: float
    max_curvature: float          # 1/mm
    touched_parts: list[int] | None = None


@dataclass
class WireSolution:
    routes: list[WireRoute]
    l_tot_mm: float
    kappa_max: float


def snap_to_vertex(mesh: TriMesh | None, point: np.ndarray,
                   part: int | str = "?") -> tuple[int, np.ndarray]:
    """Nearest mesh vertex by Euclidean distance; the lowest vertex id wins
    ties. Raises NoHostMesh when the part has no usable surface."""
    if mesh is None or len(mesh.vertices) == 0:
        raise NoHostMesh(f"part {part} has no mesh to snap to")
    d = np.linalg.norm(mesh.vertices - np.asarray(point, dtype=float), axis=1)
    vid = int(np.argmin(d))  # argmin returns the first = lowest id on ties
    return vid, mesh.vertices[vid].copy()


def motor_exit_point(placement: MotorPlacement, spec: MotorSpec) -> np.ndarray:
    """Radial exit on the holder rim, in the motor mid-plane."""
    origin = placement.pose[:3, 3]
    radial = placement.pose[:3, 0]
    return origin + radial * spec.holder_outer_radius


def controller_exit_point(placement: ElectronicsPlacement,
                          spec: ElectronicsSpec) -> np.ndarray:
    """Center of the controller's insertion-side face."""
    axis_box = np.asarray(spec.insertion_axis, dtype=float)
    h = _extent_along(spec.controller_box, axis_box)
    return placement.box_center + (placement.rotation @ axis_box) * (h / 2.0)


def routing_endpoints(body: SemiVirtualBody,
                      motor_placements: list[MotorPlacement],
                      controller: ElectronicsPlacement,
                      motor_spec: MotorSpec,
                      elec_spec: ElectronicsSpec) -> list[RouteEndpoints]:
    """Build one start/end request per motor, ascending joint id. The motor
    end snaps to the holder-side part, the controller end to its host
    segment."""
    edge_map = body.edge_map()
    end_ref = controller_exit_point(controller, elec_spec)
    end_vertex, end_pos = snap_to_vertex(
        body.rigid_parts.get(controller.segment), end_ref, controller.segment)
    out = []
    for pl in sorted(motor_placements, key=lambda p: p.joint_id):
        a_id, b_id = edge_map[pl.joint_id]
        host = a_id if pl.configuration == HOLDER_ON_A else b_id
        start_ref = motor_exit_point(pl, motor_spec)
        start_vertex, start_pos = snap_to_vertex(
            body.rigid_parts.get(host), start_ref, host)
        out.append(RouteEndpoints(
            joint_id=pl.joint_id, start_part=host,
            end_part=controller.segment, start_ref=start_ref,
            end_ref=end_ref, start_vertex=start_vertex,
            end_vertex=end_vertex, start_pos=start_pos, end_pos=end_pos))
    return out


def _component_tethers(mesh, offset: int) -> list[tuple[int, int]]:
    """Edges tying minor mesh components of one part to its main shell.

    A carved electronics cavity is a closed interior surface, so the vertex
    nearest a cavity-face reference lies on a component no surface walk can
    leave. A wire physically needs a passage there anyway: the tether edge
    lets the geodesic jump across the wall and the swept tube later carves
    that passage out of the material. Each minor component gets exactly one
    tether, at its closest vertex pair to the largest component (first
    minimum wins, so the choice is deterministic)."""
    n = len(mesh.vertices)
    if n == 0:
        return []
    tri = mesh.triangles
    ii = np.concatenate([tri[:, 0], tri[:, 1], tri[:, 2]])
    jj = np.concatenate([tri[:, 1], tri[:, 2], tri[:, 0]])
    adj = coo_matrix((np.ones(len(ii)), (ii, jj)), shape=(n, n))
    ncomp, label = connected_components(adj, directed=False)
    if ncomp <= 1:
        return []
    main = int(np.bincount(label).argmax())
    main_idx = np.flatnonzero(label == main)
    tree = cKDTree(mesh.vertices[main_idx])
    tethers = []
    for c in range(ncomp):
        if c == main:
            continue
        idx = np.flatnonzero(label == c)
        dist, near = tree.query(mesh.vertices[idx])
        k = int(np.argmin(dist))
        tethers.append((offset + int(idx[k]),
                        offset + int(main_idx[near[k]])))
    return tethers


def _merged_surface(body: SemiVirtualBody):
    """Concatenated part meshes plus joint proximity bridges.

    Returns (graph, vertex offset per part id). Bridge edges connect
    vertices of the two parts at each joint that lie within 2 voxel sizes
    of each other, which is how routes cross articulation gaps. Within a
    part, minor mesh components (interior cavity walls) are tethered to
    the main shell so endpoints on them stay reachable."""
    ids = sorted(body.rigid_parts)
    offsets = {}
    verts, tris = [], []
    base = 0
    for sid in ids:
        mesh = body.rigid_parts[sid]
        offsets[sid] = base
        verts.append(mesh.vertices)
        tris.append(mesh.triangles + base)
        base += len(mesh.vertices)
    bridges = []
    for sid in ids:
        bridges.extend(_component_tethers(body.rigid_parts[sid],
                                          offsets[sid]))
    reach = 2.0 * body.voxel_size
    edge_map = body.edge_map()
    for jid in sorted(edge_map):
        a_id, b_id = edge_map[jid]
        va = body.rigid_parts[a_id].vertices
        vb = body.rigid_parts[b_id].vertices
        if len(va) == 0 or len(vb) == 0:
            continue
        pairs = cKDTree(va).query_ball_tree(cKDTree(vb), reach)
        for ia, nbrs in enumerate(pairs):
            for ib in nbrs:
                bridges.append((offsets[a_id] + ia, offsets[b_id] + ib))
    extra = np.array(sorted(set(bridges)), dtype=np.int64) if bridges else None
    graph = build_surface_graph(np.vstack(verts), np.vstack(tris),
                                extra_edges=extra)
    return graph, offsets


def route_wires(body: SemiVirtualBody, endpoints: list[RouteEndpoints],
                r_wire: float = DEFAULT_WIRE_RADIUS,
                window: int = DEFAULT_SMOOTH_WINDOW) -> WireSolution:
    """Route every request on the shared surface graph, then carve tunnels.

    All geodesics are computed against the pre-tunnel surfaces; tunnel
    subtraction happens afterwards in ascending joint order so the result
    does not depend on routing order. A disconnected start/end pair aborts
    the stage."""
    if r_wire <= 0:
        raise ValueError("r_wire must be positive")
    graph, offsets = _merged_surface(body)
    routes = []
    for ep in sorted(endpoints, key=lambda e: e.joint_id):
        src = offsets[ep.start_part] + ep.start_vertex
        dst = offsets[ep.end_part] + ep.end_vertex
        try:
            nodes = shortest_path_nodes(graph, src, dst)
        except Disconnected as exc:
            raise StageFailure("wire", REASON_DISCONNECTED_ROUTE,
                               joint_id=ep.joint_id, detail=str(exc)) from exc
        if len(nodes) < 2:           # start == end; keep a degenerate stub
            pts = np.vstack([ep.start_pos, ep.start_pos + 1e-6])
            path = SurfacePath(pts)
        else:
            path = smooth_path(SurfacePath(graph.positions[nodes]), window)
        routes.append(WireRoute(
            joint_id=ep.joint_id, endpoints=ep, path=path,
            length_mm=path.length(),
            max_curvature=max_path_curvature(path.waypoints)))
    _carve_tunnels(body, routes, r_wire)
    l_tot = float(sum(r.length_mm for r in routes))
    kappa = max((r.max_curvature for r in routes), default=0.0)
    return WireSolution(routes=routes, l_tot_mm=l_tot, kappa_max=kappa)


def _carve_tunnels(body: SemiVirtualBody, routes: list[WireRoute],
                   r_wire: float) -> None:
    fields = dict(body.rigid_fields)
    if body.skin_field is not None:
        fields[SKIN_PART] = body.skin_field
    lattice = next(iter(fields.values()))
    for route in routes:
        tube = sweep_tube(route.path, r_wire, lattice.cell_size, like=lattice)
        touched = []
        for sid in sorted(fields):
            f = fields[sid]
            hit = tube.values & f.occupancy()
            if not hit.any():
                continue
            f.values &= ~tube.values
            touched.append(sid)
            if sid != SKIN_PART and not f.values.any():
                raise GeometryFailure(
                    route.joint_id,
                    f"part {sid} vanished while carving a wire tunnel",
                    stage="wire")
        route.touched_parts = touched
    for sid in sorted(body.rigid_parts):
        body.refresh_rigid_mesh(sid)
    body.refresh_skin_mesh()
