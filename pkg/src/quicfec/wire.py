"""Bit-exact packet and frame encoding for the simplified QUIC-like transport.

Header flags byte: bit 7 = F (packet is an erasure-coded source symbol, a
32-bit source id follows the packet number), bit 6 = connection id present,
bits 5-4 = packet number length code (00:1, 01:2, 10:4, 11:6 bytes).  The
low nibble is reserved and must be zero, which keeps parse(serialize(x))
a bijection.

Frame registry: PADDING 0x00 (no body), FEC 0x20, STREAM_UNRELIABLE 0x21,
ACK 0x22, WINDOW_UPDATE 0x23.  All integers big-endian.  Every FEC frame
carries one scheme byte (the RLC density threshold; zero for the block
schemes) so frames parse without connection context.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

FLAG_FEC = 0x80
FLAG_CID = 0x40
_PN_SHIFT = 4
_PN_CODES = {1: 0b00, 2: 0b01, 4: 0b10, 6: 0b11}
_PN_LENGTHS = {v: k for k, v in _PN_CODES.items()}

FRAME_PADDING = 0x00
FRAME_FEC = 0x20
FRAME_STREAM_UNRELIABLE = 0x21
FRAME_ACK = 0x22
FRAME_WINDOW_UPDATE = 0x23


class ParseError(ValueError):
    """Malformed wire bytes: truncation, unknown type, bad field."""


@dataclass(frozen=True)
class PublicHeader:
    f_flag: bool = False
    connection_id: int | None = None
    pn_length: int = 4
    packet_number: int = 0
    source_fec_id: int | None = None

    def __post_init__(self):
        if self.pn_length not in _PN_CODES:
            raise ValueError(f"packet number length must be 1/2/4/6, got {self.pn_length}")
        if self.packet_number < 0 or self.packet_number >= 1 << (8 * self.pn_length):
            raise ValueError("packet number does not fit the chosen length")
        if self.f_flag != (self.source_fec_id is not None):
            raise ValueError("source_fec_id present iff F flag set")


@dataclass(frozen=True)
class PaddingFrame:
    pass


@dataclass(frozen=True)
class StreamFrame:
    stream_id: int
    offset: int
    data: bytes

    @property
    def end(self) -> int:
        return self.offset + len(self.data)


@dataclass(frozen=True)
class AckFrame:
    largest_acked: int
    ack_delay_us: int = 0
    # (smallest, largest) pairs, descending, first pair holds largest_acked
    ranges: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class FecFrame:
    repair_id: int
    symbol_length: int
    fragment_offset: int
    scheme_byte: int
    data: bytes


@dataclass(frozen=True)
class WindowUpdateFrame:
    byte_offset: int


Frame = PaddingFrame | StreamFrame | AckFrame | FecFrame | WindowUpdateFrame


def serialize_header(h: PublicHeader) -> bytes:
    flags = _PN_CODES[h.pn_length] << _PN_SHIFT
    if h.f_flag:
        flags |= FLAG_FEC
    if h.connection_id is not None:
        flags |= FLAG_CID
    out = bytearray([flags])
    if h.connection_id is not None:
        out += h.connection_id.to_bytes(8, "big")
    out += h.packet_number.to_bytes(h.pn_length, "big")
    if h.f_flag:
        out += h.source_fec_id.to_bytes(4, "big")
    return bytes(out)


def parse_header(buf: bytes) -> tuple[PublicHeader, int]:
    """Returns (header, payload offset)."""
    if len(buf) < 1:
        raise ParseError("empty packet")
    flags = buf[0]
    if flags & 0x0F:
        raise ParseError(f"reserved flag bits set: {flags:#04x}")
    pn_length = _PN_LENGTHS[(flags >> _PN_SHIFT) & 0b11]
    off = 1
    cid = None
    if flags & FLAG_CID:
        if len(buf) < off + 8:
            raise ParseError("truncated connection id")
        cid = int.from_bytes(buf[off : off + 8], "big")
        off += 8
    if len(buf) < off + pn_length:
        raise ParseError("truncated packet number")
    pn = int.from_bytes(buf[off : off + pn_length], "big")
    off += pn_length
    fec_id = None
    if flags & FLAG_FEC:
        if len(buf) < off + 4:
            raise ParseError("truncated source fec id")
        fec_id = int.from_bytes(buf[off : off + 4], "big")
        off += 4
    hdr = PublicHeader(
        f_flag=bool(flags & FLAG_FEC),
        connection_id=cid,
        pn_length=pn_length,
        packet_number=pn,
        source_fec_id=fec_id,
    )
    return hdr, off


def serialize_frame(f: Frame) -> bytes:
    if isinstance(f, PaddingFrame):
        return bytes([FRAME_PADDING])
    if isinstance(f, StreamFrame):
        if len(f.data) > 0xFFFF:
            raise ValueError("stream frame data too long")
        return (
            bytes([FRAME_STREAM_UNRELIABLE])
            + struct.pack(">IQH", f.stream_id, f.offset, len(f.data))
            + f.data
        )
    if isinstance(f, AckFrame):
        if len(f.ranges) > 0xFF:
            raise ValueError("too many ack ranges")
        out = bytearray([FRAME_ACK])
        out += struct.pack(">QIB", f.largest_acked, f.ack_delay_us, len(f.ranges))
        for lo, hi in f.ranges:
            out += struct.pack(">QQ", lo, hi)
        return bytes(out)
    if isinstance(f, FecFrame):
        if len(f.data) > 0xFFFF:
            raise ValueError("fec frame data too long")
        return (
            bytes([FRAME_FEC])
            + struct.pack(
                ">QHHBH",
                f.repair_id,
                f.symbol_length,
                f.fragment_offset,
                f.scheme_byte,
                len(f.data),
            )
            + f.data
        )
    if isinstance(f, WindowUpdateFrame):
        return bytes([FRAME_WINDOW_UPDATE]) + struct.pack(">Q", f.byte_offset)
    raise TypeError(f"not a frame: {f!r}")


def _parse_frame(buf: bytes, off: int) -> tuple[Frame, int]:
    ftype = buf[off]
    off += 1
    if ftype == FRAME_PADDING:
        return PaddingFrame(), off
    if ftype == FRAME_STREAM_UNRELIABLE:
        if len(buf) < off + 14:
            raise ParseError("truncated stream frame")
        stream_id, offset, dlen = struct.unpack_from(">IQH", buf, off)
        off += 14
        if len(buf) < off + dlen:
            raise ParseError("stream frame data overruns packet")
        return StreamFrame(stream_id, offset, bytes(buf[off : off + dlen])), off + dlen
    if ftype == FRAME_ACK:
        if len(buf) < off + 13:
            raise ParseError("truncated ack frame")
        largest, delay, count = struct.unpack_from(">QIB", buf, off)
        off += 13
        ranges = []
        for _ in range(count):
            if len(buf) < off + 16:
                raise ParseError("truncated ack range")
            lo, hi = struct.unpack_from(">QQ", buf, off)
            off += 16
            ranges.append((lo, hi))
        return AckFrame(largest, delay, tuple(ranges)), off
    if ftype == FRAME_FEC:
        if len(buf) < off + 15:
            raise ParseError("truncated fec frame")
        repair_id, sym_len, frag_off, scheme_byte, dlen = struct.unpack_from(">QHHBH", buf, off)
        off += 15
        if len(buf) < off + dlen:
            raise ParseError("fec frame data overruns packet")
        return (
            FecFrame(repair_id, sym_len, frag_off, scheme_byte, bytes(buf[off : off + dlen])),
            off + dlen,
        )
    if ftype == FRAME_WINDOW_UPDATE:
        if len(buf) < off + 8:
            raise ParseError("truncated window update")
        (offset,) = struct.unpack_from(">Q", buf, off)
        return WindowUpdateFrame(offset), off + 8
    raise ParseError(f"unknown frame type {ftype:#04x}")


def serialize_packet(header: PublicHeader, frames: list[Frame]) -> bytes:
    out = bytearray(serialize_header(header))
    for f in frames:
        out += serialize_frame(f)
    return bytes(out)


def parse_packet(buf: bytes) -> tuple[PublicHeader, list[Frame]]:
    header, off = parse_header(buf)
    frames: list[Frame] = []
    while off < len(buf):
        frame, off = _parse_frame(buf, off)
        frames.append(frame)
    return header, frames


def set_fec_fields(packet: bytes, source_fec_id: int) -> bytes:
    """Rewrite a non-FEC packet with the F flag set and the id appended.

    Only the header changes; the payload bytes move verbatim.
    """
    header, off = parse_header(packet)
    if header.f_flag:
        raise ValueError("packet already carries a source fec id")
    new = PublicHeader(
        f_flag=True,
        connection_id=header.connection_id,
        pn_length=header.pn_length,
        packet_number=header.packet_number,
        source_fec_id=source_fec_id,
    )
    return serialize_header(new) + packet[off:]
