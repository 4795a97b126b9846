"""Transport endpoints: a data sender and a data receiver state machine.

Three delivery modes share the wire format:

- reliable: stream frames are retransmitted until acknowledged; the loss
  timer fires 9/8 of the smoothed RTT after a send.
- plain: fire and forget, no acknowledgements at all.
- fec: no retransmissions, but data packets become source symbols and
  repair frames follow; the 9/8 RTT detector still runs so the scheduler's
  window tracker sees losses.

Flow control covers stream bytes only.  The receiver advertises
consumed + window and refreshes the advertisement once half the window has
been consumed since the last one.  Packets that carry only repair or
control frames bypass it.
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .fecframe import RecoveryBuffer, SenderFecFramework
from .sched import PathState
from .wire import (
    AckFrame,
    FecFrame,
    PaddingFrame,
    PublicHeader,
    StreamFrame,
    WindowUpdateFrame,
    parse_packet,
    serialize_packet,
)

MODE_RELIABLE = "reliable"
MODE_PLAIN = "plain"
MODE_FEC = "fec"
MODES = (MODE_RELIABLE, MODE_PLAIN, MODE_FEC)

DEFAULT_STREAM_ID = 1
# sized so the ~2 Mbps workload is never window-starved through owd = 200 ms:
# with updates at 50% consumption the advertisement lags by up to
# R*(2*owd + buffer) - W/2 bytes, which must stay negative; smaller windows
# reproduce the classic sender-blocked-at-start behaviour (see tests)
DEFAULT_WINDOW = 256 * 1024
MIN_TIMER_US = 1_000
INITIAL_SRTT_US = 100_000.0
MAX_ACK_RANGES = 16


class FlowControlError(Exception):
    """Stream data arrived beyond the advertised receive window."""


@dataclass(frozen=True)
class TransportParameters:
    fec_scheme_c2s: int | None
    fec_scheme_s2c: int | None
    initial_receive_window: int = DEFAULT_WINDOW


def negotiate(client_schemes: list[int], server_schemes: list[int]) -> TransportParameters:
    """Pick one scheme per direction during the handshake.

    Each direction honours the receiver's preference order; an empty
    intersection disables coding for that direction.
    """
    c2s = next((s for s in server_schemes if s in client_schemes), None)
    s2c = next((s for s in client_schemes if s in server_schemes), None)
    return TransportParameters(fec_scheme_c2s=c2s, fec_scheme_s2c=s2c)


class IntervalSet:
    """Sorted disjoint [lo, hi) intervals with merge-on-insert."""

    def __init__(self):
        self._starts: list[int] = []
        self._ends: list[int] = []

    def add(self, lo: int, hi: int) -> list[tuple[int, int]]:
        """Insert; returns the sub-ranges that were newly covered."""
        if hi <= lo:
            return []
        starts, ends = self._starts, self._ends
        i = bisect.bisect_left(ends, lo)  # first interval ending at/after lo
        j = bisect.bisect_right(starts, hi)  # first interval starting past hi
        new = []
        cursor = lo
        for t in range(i, j):
            if cursor < starts[t]:
                new.append((cursor, min(starts[t], hi)))
            cursor = max(cursor, ends[t])
        if cursor < hi:
            new.append((cursor, hi))
        if i < j:
            merged_lo = min(lo, starts[i])
            merged_hi = max(hi, ends[j - 1])
        else:
            merged_lo, merged_hi = lo, hi
        starts[i:j] = [merged_lo]
        ends[i:j] = [merged_hi]
        return [(a, b) for a, b in new if a < b]

    def covered(self, lo: int, hi: int) -> int:
        """Total covered bytes within [lo, hi)."""
        total = 0
        i = bisect.bisect_right(self._ends, lo)
        while i < len(self._starts) and self._starts[i] < hi:
            total += min(hi, self._ends[i]) - max(lo, self._starts[i])
            i += 1
        return total

    def contiguous_from(self, offset: int) -> int:
        """Highest frontier reachable from offset without a gap."""
        i = bisect.bisect_right(self._ends, offset)
        if i < len(self._starts) and self._starts[i] <= offset:
            return self._ends[i]
        return offset

    def ranges(self) -> list[tuple[int, int]]:
        return list(zip(self._starts, self._ends))


@dataclass
class _SentPacket:
    pn: int
    send_us: int
    path_id: int
    size: int
    frame: StreamFrame | None  # retransmittable payload, reliable mode only
    expiry_us: int = 0
    retransmission: bool = False


@dataclass(frozen=True)
class DataEvent:
    lo: int
    hi: int


@dataclass(frozen=True)
class GapEvent:
    lo: int
    hi: int


class DataSender:
    """Client side: turns application messages into packets.

    transmit(path_id, raw, pn, data_bearing) puts bytes on a link; schedule
    and now come from the event queue so timers stay deterministic.
    """

    def __init__(
        self,
        mode: str,
        transmit: Callable[[int, bytes, int, bool], None],
        schedule: Callable[[int, Callable[[], None]], None],
        now: Callable[[], int],
        paths: list[PathState],
        scheduler,
        framework: SenderFecFramework | None = None,
        send_window: int | None = DEFAULT_WINDOW,
        stream_id: int = DEFAULT_STREAM_ID,
        handshake_rtt_us: float | None = None,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if mode == MODE_FEC and framework is None:
            raise ValueError("fec mode needs a sender framework")
        self.mode = mode
        self.transmit = transmit
        self.schedule = schedule
        self.now = now
        self.paths = {p.path_id: p for p in paths}
        # the handshake already measured one round trip; starting blind
        # below the true RTT would make every first-flight timer spurious
        if handshake_rtt_us is not None:
            for p in paths:
                if p.srtt_us is None:
                    p.srtt_us = float(handshake_rtt_us)
        self.scheduler = scheduler
        self.framework = framework
        self.stream_id = stream_id
        self.send_limit = None if mode == MODE_PLAIN or send_window is None else send_window
        self.next_pn = 1
        self.next_offset = 0
        self.unacked: dict[int, _SentPacket] = {}
        self.queued: deque[StreamFrame] = deque()
        self.data_packets_sent = 0
        self.stream_frames_built = 0
        self.retransmissions_sent = 0
        self.loss_events = 0
        self._acks_enabled = mode != MODE_PLAIN

    # application side

    def send_app_message(self, payload: bytes, pkt_payload: int) -> None:
        """Split a message into fixed-size stream frames, one per packet."""
        chunks = [payload[i : i + pkt_payload] for i in range(0, len(payload), pkt_payload)] or [b""]
        for chunk in chunks:
            frame = StreamFrame(self.stream_id, self.next_offset, chunk)
            self.next_offset += len(chunk)
            self.stream_frames_built += 1
            self._try_send_stream(frame)

    # packet building

    def _try_send_stream(self, frame: StreamFrame) -> None:
        if self.queued or not self._within_window(frame):
            self.queued.append(frame)
            return
        self._send_stream_packet(frame)

    def _within_window(self, frame: StreamFrame) -> bool:
        return self.send_limit is None or frame.end <= self.send_limit

    def _alloc_pn(self) -> int:
        pn = self.next_pn
        self.next_pn += 1
        return pn

    def _send_stream_packet(self, frame: StreamFrame, retransmission: bool = False) -> None:
        pn = self._alloc_pn()
        header = PublicHeader(pn_length=4, packet_number=pn)
        raw = serialize_packet(header, [frame])
        if self.framework is not None:
            raw, _ = self.framework.protect_packet(raw)
        path_id = self.scheduler.pick(self.now())
        self._record_and_transmit(pn, path_id, raw, frame if self.mode == MODE_RELIABLE else None,
                                  retransmission, data_bearing=True)
        self.data_packets_sent += 1
        if retransmission:
            self.retransmissions_sent += 1
        if self.framework is not None:
            for fec_frame in self.framework.maybe_emit_repairs():
                self._send_repair_packet(fec_frame)

    def _send_repair_packet(self, fec_frame: FecFrame) -> None:
        pn = self._alloc_pn()
        header = PublicHeader(pn_length=4, packet_number=pn)
        raw = serialize_packet(header, [fec_frame])
        path_id = self.scheduler.pick(self.now())
        self._record_and_transmit(pn, path_id, raw, None, False, data_bearing=False)

    def _record_and_transmit(
        self,
        pn: int,
        path_id: int,
        raw: bytes,
        frame: StreamFrame | None,
        retransmission: bool,
        data_bearing: bool,
    ) -> None:
        now = self.now()
        if self._acks_enabled:
            sent = _SentPacket(pn, now, path_id, len(raw), frame, retransmission=retransmission)
            self.unacked[pn] = sent
            self.paths[path_id].on_sent(len(raw))
            self._arm_timer(sent)
        self.transmit(path_id, raw, pn, data_bearing)

    # timers and acknowledgements

    def _timer_delay_us(self, path: PathState) -> int:
        srtt = path.srtt_us if path.srtt_us is not None else INITIAL_SRTT_US
        return max(int(9 * srtt / 8), MIN_TIMER_US)

    def _arm_timer(self, sent: _SentPacket) -> None:
        sent.expiry_us = self.now() + self._timer_delay_us(self.paths[sent.path_id])
        self.schedule(sent.expiry_us, lambda: self._on_timer(sent.pn, sent.expiry_us))

    def _on_timer(self, pn: int, expiry_us: int) -> None:
        sent = self.unacked.get(pn)
        if sent is None or sent.expiry_us != expiry_us:
            return  # acked meanwhile, or the timer was superseded
        del self.unacked[pn]
        path = self.paths[sent.path_id]
        path.on_loss(sent.size, self.now())
        self.loss_events += 1
        if self.mode == MODE_RELIABLE and sent.frame is not None:
            self._send_stream_packet(sent.frame, retransmission=True)

    def on_packet_from_peer(self, raw: bytes) -> None:
        _, frames = parse_packet(raw)
        for frame in frames:
            if isinstance(frame, AckFrame):
                self._on_ack(frame)
            elif isinstance(frame, WindowUpdateFrame):
                if self.send_limit is not None and frame.byte_offset > self.send_limit:
                    self.send_limit = frame.byte_offset
                    self._flush_queue()
            elif isinstance(frame, PaddingFrame):
                continue

    def _on_ack(self, ack: AckFrame) -> None:
        now = self.now()
        asc = ack.ranges[::-1]  # wire order is descending
        los = [r[0] for r in asc]
        newly = []
        for pn, sent in self.unacked.items():
            i = bisect.bisect_right(los, pn) - 1
            if i >= 0 and pn <= asc[i][1]:
                newly.append(sent)
        for sent in newly:
            del self.unacked[sent.pn]
            path = self.paths[sent.path_id]
            path.on_ack(sent.size)
            # Karn's rule: retransmitted packets give ambiguous samples
            if not sent.retransmission:
                path.update_srtt(float(now - sent.send_us - ack.ack_delay_us))

    def _flush_queue(self) -> None:
        while self.queued and self._within_window(self.queued[0]):
            self._send_stream_packet(self.queued.popleft())


class DataReceiver:
    """Server side: stream assembly, recovery, acks and window updates."""

    def __init__(
        self,
        mode: str,
        send_control: Callable[[int, bytes], None],
        framework: RecoveryBuffer | None = None,
        receive_window: int = DEFAULT_WINDOW,
        on_first_data: Callable[[], None] | None = None,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.send_control = send_control
        self.framework = framework
        self.window = receive_window
        self.on_first_data = on_first_data
        self.coverage = IntervalSet()
        self.consumed = 0
        self.advertised_limit = receive_window
        self._last_wu_consumed = 0
        self._acked_pns: list[tuple[int, int]] = []  # merged, ascending
        self._next_pn = 1
        self.events: list[DataEvent | GapEvent] = []
        self.seal_offset = 0
        self.packets_received = 0
        self.recovered_packets = 0
        self._saw_data = False

    # inbound

    def on_packet(self, raw: bytes, path_id: int, recovered: bool = False) -> list[DataEvent | GapEvent]:
        header, frames = parse_packet(raw)
        out: list[DataEvent | GapEvent] = []
        ack_eliciting = False
        for frame in frames:
            if isinstance(frame, StreamFrame):
                ack_eliciting = True
                out.extend(self._on_stream(frame, recovered))
            elif isinstance(frame, FecFrame):
                ack_eliciting = True
                if self.framework is not None:
                    for image in self.framework.on_fec_frame(frame):
                        self.recovered_packets += 1
                        out.extend(self.on_packet(image, path_id, recovered=True))
            elif isinstance(frame, PaddingFrame):
                continue
        if header.f_flag and self.framework is not None and not recovered:
            for image in self.framework.on_source_symbol(raw):
                self.recovered_packets += 1
                out.extend(self.on_packet(image, path_id, recovered=True))
        if not recovered:
            self.packets_received += 1
            if self.mode != MODE_PLAIN and ack_eliciting:
                self._note_pn(header.packet_number)
                self._send_ack(path_id)
        self.events.extend(out)
        return out

    def _on_stream(self, frame: StreamFrame, recovered: bool = False) -> list[DataEvent]:
        if not frame.data:
            return []
        if self.mode != MODE_PLAIN and frame.end > self.advertised_limit:
            raise FlowControlError(
                f"stream data up to {frame.end} exceeds advertised window {self.advertised_limit}"
            )
        # only network arrivals anchor the playback clock; a recovered
        # packet would skew paired runs that share one loss trace
        if not self._saw_data and not recovered:
            self._saw_data = True
            if self.on_first_data is not None:
                self.on_first_data()
        if frame.end <= self.seal_offset:
            return []  # the read cursor already passed this hole
        new = self.coverage.add(frame.offset, frame.end)
        return [DataEvent(lo, hi) for lo, hi in new]

    def _note_pn(self, pn: int) -> None:
        ranges = self._acked_pns
        i = bisect.bisect_left(ranges, (pn, pn))
        if i > 0 and ranges[i - 1][1] >= pn:
            return  # duplicate
        if i < len(ranges) and ranges[i][0] <= pn:
            return  # duplicate
        if i > 0 and ranges[i - 1][1] == pn - 1:
            lo = ranges[i - 1][0]
            if i < len(ranges) and ranges[i][0] == pn + 1:
                ranges[i - 1] = (lo, ranges[i][1])
                del ranges[i]
            else:
                ranges[i - 1] = (lo, pn)
        elif i < len(ranges) and ranges[i][0] == pn + 1:
            ranges[i] = (pn, ranges[i][1])
        else:
            ranges.insert(i, (pn, pn))

    def _send_ack(self, path_id: int) -> None:
        if not self._acked_pns:
            return
        recent = self._acked_pns[-MAX_ACK_RANGES:]
        ack = AckFrame(
            largest_acked=recent[-1][1],
            ack_delay_us=0,
            ranges=tuple(reversed(recent)),
        )
        self._send_control_frames(path_id, [ack])

    def _send_control_frames(self, path_id: int, frames: list) -> None:
        header = PublicHeader(pn_length=4, packet_number=self._next_pn)
        self._next_pn += 1
        self.send_control(path_id, serialize_packet(header, frames))

    # application-side reads

    def read_unreliable(self, lo: int, hi: int, path_hint: int = 0) -> tuple[int, bool]:
        """Read [lo, hi) at its deadline: seal gaps, return (bytes, complete)."""
        got = self.coverage.covered(lo, hi)
        complete = got == hi - lo
        if not complete:
            # the cursor passes the holes; they become gap events
            gaps = self._gaps_in(lo, hi)
            self.events.extend(GapEvent(a, b) for a, b in gaps)
        self.seal_offset = max(self.seal_offset, hi)
        self._advance_consumed(hi, path_hint)
        return got, complete

    def read_reliable_up_to(self, target: int, path_hint: int = 0) -> int:
        """Advance the in-order read cursor toward target; returns new bytes."""
        frontier = self.coverage.contiguous_from(self.consumed)
        new_cursor = min(target, frontier)
        got = max(0, new_cursor - self.consumed)
        if got:
            self._advance_consumed(new_cursor, path_hint)
        return got

    def reliable_frontier(self) -> int:
        return self.coverage.contiguous_from(self.consumed)

    def _gaps_in(self, lo: int, hi: int) -> list[tuple[int, int]]:
        gaps = []
        cursor = lo
        for a, b in self.coverage.ranges():
            if b <= lo or a >= hi:
                continue
            if cursor < a:
                gaps.append((cursor, a))
            cursor = max(cursor, b)
        if cursor < hi:
            gaps.append((cursor, hi))
        return gaps

    def _advance_consumed(self, offset: int, path_hint: int) -> None:
        if offset <= self.consumed:
            return
        self.consumed = offset
        if self.mode == MODE_PLAIN:
            return
        if self.consumed - self._last_wu_consumed >= self.window // 2:
            self.advertised_limit = self.consumed + self.window
            self._last_wu_consumed = self.consumed
            self._send_control_frames(path_hint, [WindowUpdateFrame(self.advertised_limit)])
