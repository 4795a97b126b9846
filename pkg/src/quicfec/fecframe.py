"""The FEC framework: packets in, source symbols and repair frames out.

Sender side turns each protected packet into a source symbol (the packet
image itself, F flag set and 32-bit id appended, zero-padded to the symbol
size) and drives the scheme encoder; repair symbols come back as one or
more FEC frames.  Receiver side reassembles repair symbols from frames,
feeds the scheme decoder and hands back recovered packet images.

The 64-bit repair id packs as group_id(32) | index(8) | k(8) | low16(16).
group_id is the block id for block schemes and the window's first source
sequence number for RLC; low16 carries the RLC coefficient seed or, for
block schemes, the repair count of the block.  The nominal field list
would not fit 64 bits, so the block repair count shares the low half with
the seed; the density threshold byte travels in the frame body instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codec import (
    SCHEME_NAMES,
    RepairDescriptor,
    make_decoder,
    make_encoder,
    pad_payload,
)
from .wire import FecFrame, parse_header, set_fec_fields


def pack_repair_id(desc: RepairDescriptor) -> int:
    if not 0 <= desc.group_id < (1 << 32):
        raise ValueError("group id must fit 32 bits")
    if not 0 <= desc.index < (1 << 8) or not 0 <= desc.k < (1 << 8):
        raise ValueError("index and k must fit 8 bits")
    if not 0 <= desc.low16 < (1 << 16):
        raise ValueError("scheme-specific field must fit 16 bits")
    return (desc.group_id << 32) | (desc.index << 24) | (desc.k << 16) | desc.low16


def unpack_repair_id(raw: int, scheme: int, scheme_byte: int = 0) -> RepairDescriptor:
    return RepairDescriptor(
        scheme=scheme,
        group_id=(raw >> 32) & 0xFFFFFFFF,
        index=(raw >> 24) & 0xFF,
        k=(raw >> 16) & 0xFF,
        low16=raw & 0xFFFF,
        scheme_byte=scheme_byte,
    )


def fragment_repair(
    payload: bytes, repair_id: int, scheme_byte: int, max_frame_payload: int
) -> list[FecFrame]:
    """Split one repair symbol into FEC frames covering it contiguously."""
    if max_frame_payload < 1:
        raise ValueError("max_frame_payload must be >= 1")
    total = len(payload)
    if total == 0:
        raise ValueError("repair symbols are never empty")
    if total > 0xFFFF:
        raise ValueError("repair symbol too large for the 16-bit length field")
    frames = []
    off = 0
    while off < total:
        chunk = payload[off : off + max_frame_payload]
        frames.append(
            FecFrame(
                repair_id=repair_id,
                symbol_length=total,
                fragment_offset=off,
                scheme_byte=scheme_byte,
                data=chunk,
            )
        )
        off += len(chunk)
    return frames


class SenderFecFramework:
    """Per-direction sender state: scheme encoder plus frame packaging."""

    def __init__(
        self,
        scheme: int,
        params,
        symbol_size: int,
        max_frame_payload: int = 1200,
        interleave: int = 1,
        base_seed: int = 1,
    ):
        self.scheme = scheme
        self.symbol_size = symbol_size
        self.max_frame_payload = max_frame_payload
        self.encoder = make_encoder(scheme, params, symbol_size, interleave, base_seed)
        self._pending: list[FecFrame] = []

    def protect_packet(self, packet: bytes) -> tuple[bytes, np.ndarray]:
        """Returns the FEC-flagged wire packet and the source symbol payload.

        Repair frames triggered by this symbol queue up for
        maybe_emit_repairs.  Raises when the packet exceeds the symbol size
        once the id field is in place.
        """
        source_id = self.encoder.begin_source()
        wire_packet = set_fec_fields(packet, source_id)
        symbol = pad_payload(wire_packet, self.symbol_size)  # oversize check inside
        for desc, payload in self.encoder.commit_source(symbol):
            self._pending.extend(
                fragment_repair(
                    payload.tobytes(),
                    pack_repair_id(desc),
                    desc.scheme_byte,
                    self.max_frame_payload,
                )
            )
        return wire_packet, symbol

    def maybe_emit_repairs(self) -> list[FecFrame]:
        """Drain the repair frames ready to go on the wire."""
        out, self._pending = self._pending, []
        return out


@dataclass
class _Reassembly:
    symbol_length: int
    scheme_byte: int
    chunks: dict[int, bytes] = field(default_factory=dict)

    def add(self, frame: FecFrame) -> bool:
        """Merge one fragment; returns False on inconsistency."""
        if frame.symbol_length != self.symbol_length or frame.scheme_byte != self.scheme_byte:
            return False
        new_lo = frame.fragment_offset
        new_hi = new_lo + len(frame.data)
        if new_hi > self.symbol_length:
            return False
        for off, data in self.chunks.items():
            lo = max(new_lo, off)
            hi = min(new_hi, off + len(data))
            if lo < hi and data[lo - off : hi - off] != frame.data[lo - new_lo : hi - new_lo]:
                return False
        self.chunks[new_lo] = frame.data
        return True

    def complete(self) -> bytes | None:
        covered = 0
        for off in sorted(self.chunks):
            if off > covered:
                return None
            covered = max(covered, off + len(self.chunks[off]))
        if covered < self.symbol_length:
            return None
        buf = bytearray(self.symbol_length)
        for off, data in self.chunks.items():
            buf[off : off + len(data)] = data
        return bytes(buf)


class RecoveryBuffer:
    """Per-direction receiver state: reassembly plus the scheme decoder.

    A source symbol id surfaces at most once, whether it arrived or was
    rebuilt; repair payloads never reach the caller, only recovered packet
    images do.
    """

    def __init__(self, scheme: int, params, symbol_size: int):
        self.scheme = scheme
        self.symbol_size = symbol_size
        self.decoder = make_decoder(scheme, params, symbol_size)
        self._seen_sources: set[int] = set()
        self._partial: dict[int, _Reassembly] = {}
        self._done_repairs: set[int] = set()
        self._corrupt: set[int] = set()
        self.recovered_count = 0

    def on_source_symbol(self, wire_packet: bytes) -> list[bytes]:
        """Feed one received FEC-flagged packet; may unlock recoveries."""
        header, _ = parse_header(wire_packet)
        if not header.f_flag:
            raise ValueError("packet has no source fec id")
        sid = header.source_fec_id
        if sid in self._seen_sources:
            return []
        self._seen_sources.add(sid)
        symbol = pad_payload(wire_packet, self.symbol_size)
        return self._collect(self.decoder.on_source(sid, symbol))

    def on_fec_frame(self, frame: FecFrame) -> list[bytes]:
        rid = frame.repair_id
        if rid in self._done_repairs or rid in self._corrupt:
            return []
        reasm = self._partial.get(rid)
        if reasm is None:
            reasm = _Reassembly(frame.symbol_length, frame.scheme_byte)
            self._partial[rid] = reasm
        if not reasm.add(frame):
            # overlapping fragments disagree: drop the whole repair
            self._corrupt.add(rid)
            del self._partial[rid]
            return []
        payload = reasm.complete()
        if payload is None:
            return []
        del self._partial[rid]
        self._done_repairs.add(rid)
        desc = unpack_repair_id(rid, self.scheme, reasm.scheme_byte)
        symbol = np.frombuffer(payload, dtype=np.uint8).copy()
        return self._collect(self.decoder.on_repair(desc, symbol))

    def _collect(self, recovered) -> list[bytes]:
        out = []
        for sid, symbol in recovered:
            if sid in self._seen_sources:
                continue
            self._seen_sources.add(sid)
            self.recovered_count += 1
            out.append(symbol.tobytes())
        return out


def describe_scheme(scheme: int) -> str:
    return SCHEME_NAMES.get(scheme, f"unknown({scheme:#x})")
