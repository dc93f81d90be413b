"""Binary STL export (and a reader used by tools and tests).

Layout: 80-byte header, little-endian uint32 triangle count, then per
triangle a unit normal and three vertices as little-endian float32 triplets
followed by a zero uint16 attribute. The header is a fixed constant so
exports are byte-stable.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from ..errors import MalformedFile
from .mesh import TriMesh

_HEADER = b"voxfab binary stl".ljust(80, b"\0")

_TRI_DTYPE = np.dtype([
    ("normal", "<f4", (3,)),
    ("verts", "<f4", (3, 3)),
    ("attr", "<u2"),
])


def stl_bytes(mesh: TriMesh) -> bytes:
    """Serialize a mesh to binary STL bytes."""
    tris = mesh.vertices[mesh.triangles].astype(np.float64)
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    length = np.linalg.norm(n, axis=1, keepdims=True)
    n = np.where(length > 1e-30, n / np.maximum(length, 1e-300), 0.0)
    rec = np.zeros(len(tris), dtype=_TRI_DTYPE)
    rec["normal"] = n.astype("<f4")
    rec["verts"] = tris.astype("<f4")
    buf = io.BytesIO()
    buf.write(_HEADER)
    buf.write(struct.pack("<I", len(tris)))
    buf.write(rec.tobytes())
    return buf.getvalue()


def write_binary_stl(mesh: TriMesh, path: str | Path) -> None:
    Path(path).write_bytes(stl_bytes(mesh))


def read_binary_stl(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Parse binary STL bytes into (triangles (T,3,3), normals (T,3)).
    Vertices come back as an unwelded soup."""
    if len(data) < 84:
        raise MalformedFile("stl: shorter than header + count")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + count * _TRI_DTYPE.itemsize
    if len(data) != expected:
        raise MalformedFile(
            f"stl: {len(data)} bytes, expected {expected} for {count} triangles")
    rec = np.frombuffer(data, dtype=_TRI_DTYPE, count=count, offset=84)
    return rec["verts"].astype(np.float64), rec["normal"].astype(np.float64)
