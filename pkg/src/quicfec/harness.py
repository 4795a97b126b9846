"""Real-time workload and the two outcome metrics.

The source hands the transport one fixed-size message per tick at a
constant rate.  The sink reads message m exactly at its deadline,

    deadline(m) = first data arrival + playback buffer + m / msg_rate,

charges one message period of rebuffering whenever a message is not fully
readable then, and counts application bytes toward the received fraction.
On an unreliable stream a missed deadline seals the hole for good; on a
reliable stream the bytes still count once the in-order cursor reaches
them, however late.  Anchoring the deadline clock at the receiver keeps a
pure propagation delay from eating the whole buffer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .endpoint import DataReceiver, DataSender

US_PER_S = 1_000_000

STATUS_OK = "ok"
STATUS_CORRUPTED = "corrupted"
STATUS_MISSING = "missing"


@dataclass(frozen=True)
class TrafficProfile:
    msg_rate: int = 30
    pkts_per_msg: int = 8
    pkt_payload: int = 1000
    duration_s: float = 25.0

    @property
    def msg_bytes(self) -> int:
        return self.pkts_per_msg * self.pkt_payload

    @property
    def msgs_total(self) -> int:
        return round(self.msg_rate * self.duration_s)

    @property
    def period_us(self) -> int:
        return US_PER_S // self.msg_rate

    @property
    def offered_bps(self) -> float:
        return self.msg_rate * self.msg_bytes * 8.0

    def send_time_us(self, m: int) -> int:
        return m * US_PER_S // self.msg_rate

    def total_bytes(self) -> int:
        return self.msgs_total * self.msg_bytes


@dataclass(frozen=True)
class RunMetrics:
    fraction_received: float
    rebuffer_ms: float
    messages_ok: int
    messages_corrupted: int
    messages_missing: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "fraction_received": self.fraction_received,
                "rebuffer_ms": self.rebuffer_ms,
                "messages_ok": self.messages_ok,
                "messages_corrupted": self.messages_corrupted,
                "messages_missing": self.messages_missing,
            },
            sort_keys=True,
        )


class MessageSource:
    """Schedules one send_app_message per tick onto the event queue."""

    def __init__(self, profile: TrafficProfile, sender: DataSender, queue):
        self.profile = profile
        self.sender = sender
        self.queue = queue

    def start(self) -> None:
        payload = bytes(self.profile.msg_bytes)
        for m in range(self.profile.msgs_total):
            self.queue.push(
                self.profile.send_time_us(m),
                lambda payload=payload: self.sender.send_app_message(
                    payload, self.profile.pkt_payload
                ),
            )


class PlaybackSink:
    """Deadline-paced reader; accumulates the run metrics."""

    def __init__(
        self,
        profile: TrafficProfile,
        buffer_delay_us: int,
        receiver: DataReceiver,
        queue,
        reliable: bool,
        drain_cap_us: int | None = None,
    ):
        self.profile = profile
        self.buffer_delay_us = buffer_delay_us
        self.receiver = receiver
        self.queue = queue
        self.reliable = reliable
        self.drain_cap_us = drain_cap_us
        self.anchor_us: int | None = None
        self.statuses: list[str | None] = [None] * profile.msgs_total
        self.rebuffer_us = 0
        self.bytes_received = 0

    # wired to the receiver's first (non-recovered) stream data arrival
    def on_first_data(self) -> None:
        if self.anchor_us is not None:
            return
        self.anchor_us = self.queue.now
        for m in range(self.profile.msgs_total):
            self.queue.push(self.deadline_us(m), lambda m=m: self._read(m))

    def deadline_us(self, m: int) -> int:
        assert self.anchor_us is not None
        return self.anchor_us + self.buffer_delay_us + self.profile.send_time_us(m)

    def _read(self, m: int) -> None:
        size = self.profile.msg_bytes
        lo, hi = m * size, (m + 1) * size
        if self.reliable:
            self.bytes_received += self.receiver.read_reliable_up_to(hi)
            have = self.receiver.consumed
            if have >= hi:
                self.statuses[m] = STATUS_OK
                return
            self.statuses[m] = STATUS_CORRUPTED if have > lo else STATUS_MISSING
            self.rebuffer_us += self.profile.period_us
            if m == self.profile.msgs_total - 1:
                self._drain()
        else:
            got, complete = self.receiver.read_unreliable(lo, hi)
            self.bytes_received += got
            if complete:
                self.statuses[m] = STATUS_OK
            else:
                self.statuses[m] = STATUS_CORRUPTED if got else STATUS_MISSING
                self.rebuffer_us += self.profile.period_us

    def _drain(self) -> None:
        """Reliable mode keeps reading past the last deadline until done."""
        total = self.profile.total_bytes()
        self.bytes_received += self.receiver.read_reliable_up_to(total)
        if self.receiver.consumed >= total:
            return
        at = self.queue.now + self.profile.period_us
        if self.drain_cap_us is None or at <= self.drain_cap_us:
            self.queue.push(at, self._drain)

    @property
    def complete(self) -> bool:
        if any(s is None for s in self.statuses):
            return False
        if self.reliable:
            return self.receiver.consumed >= self.profile.total_bytes()
        return True

    def finalize(self) -> RunMetrics:
        statuses = [s if s is not None else STATUS_MISSING for s in self.statuses]
        unread = self.statuses.count(None)
        rebuffer_us = self.rebuffer_us + unread * self.profile.period_us
        frac = self.bytes_received / self.profile.total_bytes()
        return RunMetrics(
            fraction_received=min(1.0, frac),
            rebuffer_ms=rebuffer_us / 1000.0,
            messages_ok=statuses.count(STATUS_OK),
            messages_corrupted=statuses.count(STATUS_CORRUPTED),
            messages_missing=statuses.count(STATUS_MISSING),
        )
