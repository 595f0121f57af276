"""
Transcript - Length-prefixed framing of the two protocol messages.

Frame: [u8 type][u32 payload length][payload], network byte order.

    type 0x01 forward:  u32 n | u16 m | u8 d | Z packed MSB-first |
                        m tags, ceil(d/8) bytes each, big-endian
    type 0x02 ack:      u16 m | σ packed | u32 rows | u16 |E| |
                        |E| × u16 block id | syndromes packed (|E|·rows bits)
"""

import struct
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..domain.entities import AckMessage, ForwardMessage
from ..domain.exceptions import FormatError
from ..domain.repositories import ITranscriptRepository
from ..domain.value_objects import BitBlock, Syndrome, TagVector

FORWARD = 0x01
ACK = 0x02

_FRAME = struct.Struct('!BI')


def _packed_size(bits: int) -> int:
    return (bits + 7) // 8


def frame(kind: int, payload: bytes) -> bytes:
    return _FRAME.pack(kind, len(payload)) + payload


def encode_forward(msg: ForwardMessage) -> bytes:
    n, m, d = len(msg.z), msg.tags.m, msg.tags.width
    tag_bytes = _packed_size(d)
    payload = struct.pack('!IHB', n, m, d) + msg.z.to_bytes()
    payload += b''.join(tag.to_bytes(tag_bytes, 'big') for tag in msg.tags.tags)
    return frame(FORWARD, payload)


def encode_ack(ack: AckMessage) -> bytes:
    m = len(ack.sigma)
    payload = struct.pack('!H', m) + np.packbits(np.array(ack.sigma, dtype=np.uint8)).tobytes()
    if ack.syndromes is None:
        payload += struct.pack('!IH', 0, 0)
    else:
        ids = ack.syndromes.block_ids
        payload += struct.pack('!IH', ack.syndromes.rows, len(ids))
        payload += struct.pack(f'!{len(ids)}H', *ids)
        payload += np.packbits(ack.syndromes.bits.reshape(-1)).tobytes()
    return frame(ACK, payload)


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.offset = 0
        self.what = what

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise FormatError(f"{self.what} truncated at byte {self.offset}")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise FormatError(f"{self.what} has {len(self.data) - self.offset} trailing bytes")


def decode_forward(payload: bytes) -> ForwardMessage:
    reader = _Reader(payload, "forward message")
    n, m, d = reader.unpack('!IHB')
    if n == 0 or m == 0:
        raise FormatError("forward message declares an empty block")
    z = BitBlock.from_bytes(reader.take(_packed_size(n)), n)
    tag_bytes = _packed_size(d)
    tags = [int.from_bytes(reader.take(tag_bytes), 'big') for _ in range(m)]
    reader.finish()
    try:
        return ForwardMessage(z=z, tags=TagVector(tags=tuple(tags), width=d))
    except ValidationError as e:
        raise FormatError(f"inconsistent forward message: {e}") from e


def decode_ack(payload: bytes) -> AckMessage:
    reader = _Reader(payload, "acknowledgment")
    (m,) = reader.unpack('!H')
    sigma_bits = np.unpackbits(np.frombuffer(reader.take(_packed_size(m)), dtype=np.uint8))[:m]
    rows, count = reader.unpack('!IH')
    syndromes = None
    if count:
        ids = reader.unpack(f'!{count}H')
        packed = np.frombuffer(reader.take(_packed_size(count * rows)), dtype=np.uint8)
        bits = np.unpackbits(packed)[:count * rows].reshape(count, rows)
        try:
            syndromes = Syndrome(bits=bits, block_ids=tuple(ids), rows=rows)
        except ValidationError as e:
            raise FormatError(f"inconsistent syndromes: {e}") from e
    reader.finish()
    try:
        return AckMessage(sigma=tuple(int(s) for s in sigma_bits), syndromes=syndromes)
    except ValidationError as e:
        raise FormatError(f"inconsistent acknowledgment: {e}") from e


def split_frames(data: bytes) -> List[Tuple[int, bytes]]:
    frames = []
    offset = 0
    while offset < len(data):
        if offset + _FRAME.size > len(data):
            raise FormatError(f"frame header truncated at byte {offset}")
        kind, length = _FRAME.unpack_from(data, offset)
        offset += _FRAME.size
        if offset + length > len(data):
            raise FormatError(f"frame of type {kind:#04x} truncated at byte {offset}")
        frames.append((kind, data[offset:offset + length]))
        offset += length
    return frames


def encode_transcript(forward: ForwardMessage, ack: AckMessage) -> bytes:
    return encode_forward(forward) + encode_ack(ack)


def decode_transcript(data: bytes) -> Tuple[ForwardMessage, AckMessage]:
    frames = split_frames(data)
    kinds = [kind for kind, _ in frames]
    if kinds != [FORWARD, ACK]:
        raise FormatError(f"expected a forward frame then an ack frame, found types {kinds}")
    return decode_forward(frames[0][1]), decode_ack(frames[1][1])


class FileTranscriptRepository(ITranscriptRepository):
    """Transcript of one session in a binary file"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def dump(self, forward: ForwardMessage, ack: AckMessage) -> str:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_bytes(encode_transcript(forward, ack))
        return str(self.path)

    def load(self) -> Tuple[ForwardMessage, AckMessage]:
        try:
            data = self.path.read_bytes()
        except FileNotFoundError as e:
            raise FormatError(f"transcript not found: {self.path}") from e
        return decode_transcript(data)
