"""Multipath packet schedulers and the per-path window tracker.

The weighted scheduler picks a path at random with probabilities
proportional to the remaining congestion-window bytes, falling back to
uniform when every path is exhausted.  Congestion control never gates
transmission here; the window only serves as the loss-informed signal the
scheduler reads, tracked with plain AIMD per path.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .codec import BlockCodeParams

DEFAULT_MSS = 1250


@dataclass
class PathState:
    path_id: int
    mss: int = DEFAULT_MSS
    cwin: float = float(10 * DEFAULT_MSS)
    bytes_in_flight: int = 0
    srtt_us: float | None = None
    last_cut_us: int = -(10**12)

    def __post_init__(self):
        if self.cwin == float(10 * DEFAULT_MSS) and self.mss != DEFAULT_MSS:
            self.cwin = float(10 * self.mss)

    def on_sent(self, nbytes: int) -> None:
        self.bytes_in_flight += nbytes

    def update_srtt(self, sample_us: float) -> None:
        if self.srtt_us is None:
            self.srtt_us = sample_us
        else:
            self.srtt_us = 0.875 * self.srtt_us + 0.125 * sample_us

    def on_ack(self, nbytes: int) -> None:
        """Additive increase: about one packet per round trip."""
        self.bytes_in_flight = max(0, self.bytes_in_flight - nbytes)
        self.cwin += self.mss * nbytes / self.cwin

    def on_loss(self, nbytes: int, now_us: int) -> None:
        """Halve at most once per round trip, floored at two packets."""
        self.bytes_in_flight = max(0, self.bytes_in_flight - nbytes)
        rtt = self.srtt_us if self.srtt_us is not None else 0.0
        if now_us - self.last_cut_us >= rtt:
            self.cwin = max(self.cwin / 2.0, 2.0 * self.mss)
            self.last_cut_us = now_us


def rb(path: PathState) -> float:
    """Remaining window bytes, clamped at zero (inflight may overshoot)."""
    return max(0.0, path.cwin - path.bytes_in_flight)


def highrb_weights(paths: list[PathState]) -> list[float]:
    values = [rb(p) for p in paths]
    total = sum(values)
    if total != 0.0:
        return [v / total for v in values]
    return [1.0 / len(paths)] * len(paths)


def highrb_pick(paths: list[PathState], rng: random.Random) -> int:
    """One weighted random draw over the remaining-bytes weights."""
    if not paths:
        raise ValueError("need at least one path")
    weights = highrb_weights(paths)
    u = rng.random()
    acc = 0.0
    for path, w in zip(paths, weights):
        acc += w
        if u < acc:
            return path.path_id
    return paths[-1].path_id


class SinglePathScheduler:
    def __init__(self, paths: list[PathState]):
        self.paths = paths

    def pick(self, now_us: int = 0) -> int:
        return self.paths[0].path_id


class RoundRobinScheduler:
    """Strict alternation in path-id order."""

    def __init__(self, paths: list[PathState]):
        self.paths = sorted(paths, key=lambda p: p.path_id)
        self._next = 0

    def pick(self, now_us: int = 0) -> int:
        path = self.paths[self._next]
        self._next = (self._next + 1) % len(self.paths)
        return path.path_id


class HighRbScheduler:
    def __init__(self, paths: list[PathState], rng: random.Random):
        self.paths = sorted(paths, key=lambda p: p.path_id)
        self.rng = rng
        self.pick_counts: dict[int, int] = {p.path_id: 0 for p in self.paths}

    def pick(self, now_us: int = 0) -> int:
        chosen = highrb_pick(self.paths, self.rng)
        self.pick_counts[chosen] += 1
        return chosen


SCHEDULER_KINDS = ("single_path", "round_robin", "high_rb")


def make_scheduler(kind: str, paths: list[PathState], rng: random.Random):
    if kind == "single_path":
        return SinglePathScheduler(paths)
    if kind == "round_robin":
        return RoundRobinScheduler(paths)
    if kind == "high_rb":
        return HighRbScheduler(paths, rng)
    raise ValueError(f"unknown scheduler kind {kind!r}")


@dataclass(frozen=True)
class _Slot:
    block: int  # which block this symbol belongs to
    is_repair: bool


def _schedule_period(params: BlockCodeParams, n_paths: int) -> list[_Slot]:
    """One period of the transmission schedule the burst analysis assumes.

    Two blocks go out per period: their sources first, then their repairs.
    On a single path the blocks interleave symbol by symbol, which is how a
    plain block code spreads bursts; with two paths the round-robin deal
    provides that spreading already, so blocks stay consecutive and whole
    blocks alternate across paths.
    """
    k, reps = params.k, params.repairs
    slots: list[_Slot] = []
    if n_paths == 1:
        for j in range(2 * k):
            slots.append(_Slot(block=j % 2, is_repair=False))
    else:
        for b in range(2):
            for _ in range(k):
                slots.append(_Slot(block=b, is_repair=False))
    for b in range(2):
        for _ in range(reps):
            slots.append(_Slot(block=b, is_repair=True))
    return slots


def burst_recovery_enumeration(
    params: BlockCodeParams, burst_len: int, n_paths: int
) -> Fraction:
    """Fraction of burst start positions a block code rides out.

    Round-robin over n_paths, losses confined to path 0.  Every start
    position of a burst_len-long loss run on path 0 is tried over one
    schedule period; a start counts as recoverable when every block keeps
    at least k of its n symbols.
    """
    if n_paths not in (1, 2):
        raise ValueError("schedule model covers 1 or 2 paths")
    if burst_len == 0:
        return Fraction(1)
    period = _schedule_period(params, n_paths)
    # tile enough periods that a burst starting in the middle one fits
    n_tiles = 3 + (burst_len * n_paths) // len(period)
    tiled: list[tuple[int, _Slot]] = []
    for tile in range(n_tiles):
        for slot in period:
            tiled.append((tile * 2 + slot.block, slot))
    path0 = [i for i in range(len(tiled)) if i % n_paths == 0]
    base_tile = 1  # bursts start inside the second tile: no edge effects
    starts = [
        idx
        for idx, pos in enumerate(path0)
        if (base_tile * len(period)) <= pos < (base_tile + 1) * len(period)
    ]
    ok = 0
    for s in starts:
        lost_positions = path0[s : s + burst_len]
        losses: dict[int, int] = {}
        for pos in lost_positions:
            block = tiled[pos][0]
            losses[block] = losses.get(block, 0) + 1
        if all(count <= params.repairs for count in losses.values()):
            ok += 1
    return Fraction(ok, len(starts))
