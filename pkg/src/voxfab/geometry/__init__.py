"""Geometry kernel: meshes, volume fields, isosurfaces, primitives, surface
paths, and STL serialization."""

from .field import (VolumeField, field_boolean, intersection_volume,
                    make_lattice, max_interior_clearance, signed_distance,
                    voxelize)
from .isosurface import marching_cubes
from .mesh import (OrientedBox, TriMesh, is_watertight, merge_meshes,
                   mesh_volume, oriented_bounding_box)
from .paths import (SurfaceGraph, SurfacePath, build_surface_graph,
                    max_path_curvature, path_curvature, path_resample,
                    shortest_path_nodes, smooth_path, surface_geodesic,
                    sweep_tube)
from .primitives import (Box, Cylinder, Sphere, apply_difference, apply_union,
                         count_overlap_cells, make_box, make_cylinder,
                         make_sphere, orthonormal_frame, solid_cell_mask)
from .stl import read_binary_stl, stl_bytes, write_binary_stl

__all__ = [
    "Box", "Cylinder", "OrientedBox", "Sphere", "SurfaceGraph", "SurfacePath",
    "TriMesh", "VolumeField", "apply_difference", "apply_union",
    "build_surface_graph", "count_overlap_cells", "field_boolean",
    "intersection_volume", "is_watertight", "make_box", "make_cylinder",
    "make_lattice", "make_sphere", "marching_cubes", "max_interior_clearance",
    "merge_meshes", "mesh_volume", "oriented_bounding_box",
    "max_path_curvature", "orthonormal_frame", "path_curvature",
    "path_resample", "read_binary_stl",
    "shortest_path_nodes", "signed_distance", "smooth_path", "stl_bytes",
    "surface_geodesic", "sweep_tube", "voxelize", "write_binary_stl",
]
