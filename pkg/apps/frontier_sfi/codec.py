"""
SFI Wire Format
header <II> (super viewpoint count, orphan cluster count); per super viewpoint its
position (3 x f32) and cluster count (u32); per cluster C, N, VP (9 x f32), mesh count
(u32) and mesh ids (u64). Orphan clusters carry a NaN viewpoint.
"""

import struct
from dataclasses import dataclass

import numpy as np

from apps.core.exceptions import CodecError

HEADER = struct.Struct('<II')
SVP_HEAD = struct.Struct('<3fI')
FC_HEAD = struct.Struct('<9fI')
ID_DTYPE = np.dtype('<u8')


@dataclass(frozen=True, eq=False)
class ClusterRecord:
    members: tuple
    center: np.ndarray
    normal: np.ndarray
    viewpoint: np.ndarray = None


@dataclass(frozen=True, eq=False)
class SuperViewpointRecord:
    position: np.ndarray
    clusters: tuple


def _encode_cluster(record):
    vp = record.viewpoint if record.viewpoint is not None else np.full(3, np.nan)
    head = FC_HEAD.pack(*np.asarray(record.center, dtype=np.float32),
                        *np.asarray(record.normal, dtype=np.float32),
                        *np.asarray(vp, dtype=np.float32), len(record.members))
    return head + np.asarray(record.members, dtype=ID_DTYPE).tobytes()


def encode_sfi(svp_records, orphan_records):
    parts = [HEADER.pack(len(svp_records), len(orphan_records))]
    for svp in svp_records:
        parts.append(SVP_HEAD.pack(*np.asarray(svp.position, dtype=np.float32), len(svp.clusters)))
        parts.extend(_encode_cluster(record) for record in svp.clusters)
    parts.extend(_encode_cluster(record) for record in orphan_records)
    return b''.join(parts)


def _unpack(fmt, buffer, offset):
    if offset + fmt.size > len(buffer):
        raise CodecError(f'Truncated SFI stream at byte {offset}.')
    return fmt.unpack_from(buffer, offset), offset + fmt.size


def _decode_cluster(buffer, offset):
    values, offset = _unpack(FC_HEAD, buffer, offset)
    n_members = values[9]
    size = ID_DTYPE.itemsize * n_members
    if offset + size > len(buffer):
        raise CodecError(f'Truncated cluster member list at byte {offset}.')
    members = np.frombuffer(buffer[offset:offset + size], dtype=ID_DTYPE)
    vp = np.array(values[6:9], dtype=np.float32).astype(np.float64)
    record = ClusterRecord(
        members=tuple(int(m) for m in members),
        center=np.array(values[0:3], dtype=np.float32).astype(np.float64),
        normal=np.array(values[3:6], dtype=np.float32).astype(np.float64),
        viewpoint=None if np.isnan(vp).any() else vp,
    )
    return record, offset + size


def decode_sfi(buffer, offset=0):
    """Returns (svp_records, orphan_records, next_offset)."""
    (n_svps, n_orphans), offset = _unpack(HEADER, buffer, offset)
    svps = []
    for _ in range(n_svps):
        values, offset = _unpack(SVP_HEAD, buffer, offset)
        clusters = []
        for _ in range(values[3]):
            record, offset = _decode_cluster(buffer, offset)
            clusters.append(record)
        svps.append(SuperViewpointRecord(
            position=np.array(values[:3], dtype=np.float32).astype(np.float64),
            clusters=tuple(clusters),
        ))
    orphans = []
    for _ in range(n_orphans):
        record, offset = _decode_cluster(buffer, offset)
        orphans.append(record)
    return svps, orphans, offset
