"""Deterministic discrete-event network: virtual clock, lossy FIFO links.

Time is integer microseconds.  Events at equal timestamps pop in insertion
order, so a run is a pure function of (topology, seeds, workload).

Loss processes: a two-state Markov chain (good state delivers with
probability k_good, bad with h_bad, transitions p and r), or i.i.d.
uniform loss.  Sampling uses the current state, then the state moves; the
chain advances once per data-bearing packet.  Packets that carry only
repair or control frames take a delivery draw from the prevailing state
out of a separate stream, so the erasure pattern seen by the data packets
is identical across runs that share a channel seed no matter how much
redundancy is interleaved: exactly what paired comparisons need.
"""

from __future__ import annotations

import heapq
import random
import zlib
from dataclasses import dataclass, field
from typing import Callable

US_PER_S = 1_000_000


@dataclass(frozen=True)
class GEParams:
    p: float  # good -> bad transition probability per packet
    r: float  # bad -> good
    k_good: float = 1.0  # delivery probability in good
    h_bad: float = 0.0  # delivery probability in bad

    def __post_init__(self):
        for name in ("p", "r", "k_good", "h_bad"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    def stationary_loss_rate(self) -> float:
        """Closed form: pi_bad = p / (p + r); loss mixes the two states."""
        if self.p == 0.0 and self.r == 0.0:
            pi_bad = 0.0  # chain never leaves its start state; we start good
        else:
            pi_bad = self.p / (self.p + self.r)
        return (1.0 - pi_bad) * (1.0 - self.k_good) + pi_bad * (1.0 - self.h_bad)

    def mean_bad_sojourn(self) -> float:
        return 1.0 / self.r if self.r > 0 else float("inf")


def ge_step(good: bool, params: GEParams, rng: random.Random) -> tuple[bool, bool]:
    """One chain step: deliver using the current state, then transition.

    Always consumes exactly two draws so interleaved consumers stay aligned.
    Returns (delivered, next_state_is_good).
    """
    delivered = rng.random() < (params.k_good if good else params.h_bad)
    flip = rng.random() < (params.p if good else params.r)
    return delivered, (good != flip)


def uniform_step(rate: float, rng: random.Random) -> bool:
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"loss rate must be in [0, 1], got {rate}")
    return rng.random() >= rate


class GEChannel:
    """Stateful wrapper; starts in the good state."""

    def __init__(self, params: GEParams, rng: random.Random):
        self.params = params
        self.rng = rng
        self.good = True

    def step(self) -> bool:
        delivered, self.good = ge_step(self.good, self.params, self.rng)
        return delivered

    def peek(self, rng: random.Random) -> bool:
        """Delivery draw from the current state without advancing the chain."""
        delivered, _ = ge_step(self.good, self.params, rng)
        return delivered


class UniformChannel:
    def __init__(self, rate: float, rng: random.Random):
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"loss rate must be in [0, 1], got {rate}")
        self.rate = rate
        self.rng = rng

    def step(self) -> bool:
        return uniform_step(self.rate, self.rng)

    def peek(self, rng: random.Random) -> bool:
        return uniform_step(self.rate, rng)


class EventQueue:
    """Heap keyed by (timestamp, insertion sequence)."""

    def __init__(self):
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0
        self.now = 0

    def push(self, at_us: int, fn: Callable[[], None]) -> None:
        if at_us < self.now:
            raise ValueError(f"cannot schedule into the past: {at_us} < {self.now}")
        heapq.heappush(self._heap, (at_us, self._seq, fn))
        self._seq += 1

    def __len__(self) -> int:
        return len(self._heap)

    def run_until(self, t_end_us: int, stop: Callable[[], bool] | None = None) -> None:
        """Process events with timestamp <= t_end_us in order."""
        while self._heap and self._heap[0][0] <= t_end_us:
            at, _, fn = heapq.heappop(self._heap)
            self.now = at
            fn()
            if stop is not None and stop():
                return
        if self.now < t_end_us:
            self.now = t_end_us


@dataclass
class LinkTrace:
    """Optional line-oriented event log plus the data drop decisions."""

    lines: list[str] = field(default_factory=list)
    data_fates: list[bool] = field(default_factory=list)

    def record(self, t_us: int, event: str, path: int, pn: int, dropped: bool) -> None:
        self.lines.append(f"{t_us},{event},{path},{pn},{int(dropped)}")

    def fate_hash(self) -> int:
        return zlib.crc32(bytes(self.data_fates))

    def line_hash(self) -> int:
        return zlib.crc32("\n".join(self.lines).encode())


class Link:
    """One direction of one path: fixed one-way delay plus a loss process."""

    def __init__(
        self,
        queue: EventQueue,
        owd_us: int,
        channel=None,
        aux_rng: random.Random | None = None,
        path_id: int = 0,
        trace: LinkTrace | None = None,
    ):
        self.queue = queue
        self.owd_us = owd_us
        self.channel = channel
        # str seeds hash stably across processes; tuples would not
        self.aux_rng = aux_rng if aux_rng is not None else random.Random("aux")
        self.path_id = path_id
        self.trace = trace

    def send(self, packet: bytes, deliver, pn: int = -1, data_bearing: bool = True) -> bool:
        """Consult the loss process once, then schedule the FIFO arrival.

        Returns whether the packet survived.  deliver is called as
        deliver(packet) at now + owd.
        """
        now = self.queue.now
        if self.channel is None:
            delivered = True
        elif data_bearing:
            delivered = self.channel.step()
        else:
            delivered = self.channel.peek(self.aux_rng)
        if self.trace is not None:
            self.trace.record(now, "send", self.path_id, pn, not delivered)
            if data_bearing:
                self.trace.data_fates.append(delivered)
        if delivered:
            self.queue.push(now + self.owd_us, lambda: deliver(packet))
        return delivered


@dataclass
class Path:
    """Forward and return links of one path through the network."""

    path_id: int
    forward: Link
    backward: Link


def build_paths(
    queue: EventQueue,
    owd_us: int,
    channel_params: list,
    seed: int,
    trace: bool = False,
) -> list[Path]:
    """One Path per channel spec; loss applies to the forward direction.

    channel_params entries are GEParams, a float uniform loss rate, or None
    for a lossless link.  Each link owns independent RNG streams derived
    from the seed, so adding a path never perturbs another path's draws.
    """
    paths = []
    for idx, spec in enumerate(channel_params):
        main = random.Random(f"{seed}:{idx}:main")
        aux = random.Random(f"{seed}:{idx}:aux")
        if spec is None:
            channel = None
        elif isinstance(spec, GEParams):
            channel = GEChannel(spec, main)
        else:
            channel = UniformChannel(float(spec), main)
        tr = LinkTrace() if trace else None
        fwd = Link(queue, owd_us, channel, aux, path_id=idx, trace=tr)
        back = Link(queue, owd_us, None, None, path_id=idx)
        paths.append(Path(idx, fwd, back))
    return paths
