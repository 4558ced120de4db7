"""
Polytope Wire Format
header <Q 3f f I I> (id, origin, flip radius, vertex count, mesh count),
retired count <I> plus <Q> frontier ids, vertices (3 x f32 + u8 tag), meshes (3 x u32).
"""

import struct

import numpy as np

from apps.core.exceptions import CodecError
from .polytope import StarPolytope

HEADER = struct.Struct('<Q3ffII')
COUNT = struct.Struct('<I')
VERTEX_DTYPE = np.dtype([('xyz', '<f4', (3,)), ('tag', 'u1')])
MESH_DTYPE = np.dtype('<u4')
RETIRED_DTYPE = np.dtype('<u8')


def encoded_size(polytope):
    return (
        HEADER.size + COUNT.size
        + RETIRED_DTYPE.itemsize * len(polytope.retired)
        + VERTEX_DTYPE.itemsize * len(polytope.vertices)
        + MESH_DTYPE.itemsize * 3 * len(polytope.meshes)
    )


def encode_polytope(polytope):
    vertices = np.empty(len(polytope.vertices), dtype=VERTEX_DTYPE)
    vertices['xyz'] = polytope.vertices
    vertices['tag'] = polytope.tags
    parts = [
        HEADER.pack(polytope.id, *np.asarray(polytope.origin, dtype=np.float32), polytope.flip_radius,
                    len(polytope.vertices), len(polytope.meshes)),
        COUNT.pack(len(polytope.retired)),
        np.asarray(polytope.retired, dtype=RETIRED_DTYPE).tobytes(),
        vertices.tobytes(),
        np.asarray(polytope.meshes, dtype=MESH_DTYPE).tobytes(),
    ]
    return b''.join(parts)


def _take(buffer, offset, size):
    if offset + size > len(buffer):
        raise CodecError(f'Truncated polytope stream at byte {offset}.')
    return buffer[offset:offset + size], offset + size


def decode_polytope(buffer, offset=0):
    """Decode one polytope starting at `offset`; returns (polytope, next_offset)."""
    chunk, offset = _take(buffer, offset, HEADER.size)
    polytope_id, ox, oy, oz, radius, n_vertices, n_meshes = HEADER.unpack(chunk)
    chunk, offset = _take(buffer, offset, COUNT.size)
    (n_retired,) = COUNT.unpack(chunk)
    chunk, offset = _take(buffer, offset, RETIRED_DTYPE.itemsize * n_retired)
    retired = np.frombuffer(chunk, dtype=RETIRED_DTYPE)
    chunk, offset = _take(buffer, offset, VERTEX_DTYPE.itemsize * n_vertices)
    vertices = np.frombuffer(chunk, dtype=VERTEX_DTYPE)
    chunk, offset = _take(buffer, offset, MESH_DTYPE.itemsize * 3 * n_meshes)
    meshes = np.frombuffer(chunk, dtype=MESH_DTYPE).reshape(n_meshes, 3)

    polytope = StarPolytope(
        id=polytope_id,
        origin=np.array([ox, oy, oz], dtype=np.float32).astype(np.float64),
        flip_radius=float(radius),
        vertices=vertices['xyz'].astype(np.float64),
        tags=vertices['tag'].copy(),
        meshes=meshes.astype(np.int64),
        retired=tuple(int(r) for r in retired),
    )
    return polytope, offset
