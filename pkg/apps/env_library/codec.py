"""
Library Stream Codec
Fixed header <4s B I I B> (magic, format version, owner, polytope count, SFI flag),
then the polytopes, then one SFI block when the flag is set.
"""

import struct
from dataclasses import dataclass, field

from apps.core.exceptions import CodecError
from apps.frontier_sfi.codec import decode_sfi, encode_sfi
from apps.star_convex.codec import decode_polytope, encode_polytope

MAGIC = b'ELIB'
FORMAT_VERSION = 2
HEADER = struct.Struct('<4sBIIB')


@dataclass(frozen=True)
class Checkpoint:
    """
    Sync marker for one peer: the highest polytope sequence seen per observer,
    plus the sender's SFI revision at that sync.
    """

    versions: tuple = ()
    revision: int = -1

    @classmethod
    def from_vector(cls, vector, revision=-1):
        return cls(tuple(sorted(vector.items())), revision)

    def as_dict(self):
        return dict(self.versions)

    def covers(self, polytope):
        return polytope.seq <= self.as_dict().get(polytope.robot_id, -1)


@dataclass
class LibraryDelta:
    owner: int
    polytopes: list = field(default_factory=list)
    svps: list = field(default_factory=list)
    orphans: list = field(default_factory=list)

    @property
    def cluster_records(self):
        records = [record for svp in self.svps for record in svp.clusters]
        return records + list(self.orphans)


def serialize(library, since=None):
    """
    Byte-exact delta of `library` relative to a peer checkpoint.
    No checkpoint means a full snapshot.
    """
    polytopes = library.sorted_polytopes()
    if since is not None:
        polytopes = [p for p in polytopes if not since.covers(p)]
    revision = -1 if since is None else since.revision
    svp_records, orphan_records = library.sfi_records(newer_than=revision)
    has_sfi = bool(svp_records or orphan_records)

    parts = [HEADER.pack(MAGIC, FORMAT_VERSION, library.owner, len(polytopes), int(has_sfi))]
    parts.extend(encode_polytope(p) for p in polytopes)
    if has_sfi:
        parts.append(encode_sfi(svp_records, orphan_records))
    return b''.join(parts)


def deserialize(buffer):
    if len(buffer) < HEADER.size:
        raise CodecError('Stream shorter than its header.')
    magic, version, owner, n_polytopes, has_sfi = HEADER.unpack_from(buffer, 0)
    if magic != MAGIC or version != FORMAT_VERSION:
        raise CodecError(f'Unknown stream magic/version {magic!r}/{version}.')
    offset = HEADER.size
    delta = LibraryDelta(owner=owner)
    for _ in range(n_polytopes):
        polytope, offset = decode_polytope(buffer, offset)
        delta.polytopes.append(polytope)
    if has_sfi:
        delta.svps, delta.orphans, offset = decode_sfi(buffer, offset)
    if offset != len(buffer):
        raise CodecError(f'{len(buffer) - offset} trailing bytes in stream.')
    return delta
