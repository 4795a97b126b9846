"""XOR scheme: one parity symbol per block, interleaved across lanes.

A plain XOR block only survives a single erasure, so consecutive source
symbols are dealt to D independent lanes; a burst of up to D packets then
costs each lane at most one symbol.
"""

from __future__ import annotations

import numpy as np

from .base import (
    SCHEME_XOR,
    BlockCodeParams,
    RepairDescriptor,
    block_source_id,
    split_block_source_id,
)


def xor_encode(block: list[np.ndarray]) -> np.ndarray:
    """Byte-wise XOR of all payloads in the block."""
    if not block:
        raise ValueError("cannot encode an empty block")
    acc = block[0].copy()
    for payload in block[1:]:
        if len(payload) != len(acc):
            raise ValueError("payloads must share one length")
        acc ^= payload
    return acc


def xor_recover(
    received: dict[int, np.ndarray], k: int, repair: np.ndarray
) -> tuple[int, np.ndarray] | None:
    """Recover the single missing source of a k-source block.

    received maps in-block offset to payload.  Returns (offset, payload),
    None when nothing is missing, and raises when two or more sources are
    gone (beyond what one parity symbol can repair).
    """
    missing = [off for off in range(k) if off not in received]
    if not missing:
        return None
    if len(missing) > 1:
        raise ValueError(f"unrecoverable: offsets {missing} all missing with one repair")
    acc = repair.copy()
    for payload in received.values():
        acc ^= payload
    return missing[0], acc


def interleave_block_index(symbol_seq: int, depth: int) -> tuple[int, int]:
    """Deal symbol_seq to a lane: returns (lane, index within lane)."""
    if depth < 1:
        raise ValueError("interleave depth must be >= 1")
    return symbol_seq % depth, symbol_seq // depth


class XorEncoder:
    """Sender state: D lanes, each a (k+1, k) parity block."""

    def __init__(self, params: BlockCodeParams, interleave: int, symbol_size: int):
        if not isinstance(params, BlockCodeParams):
            raise TypeError("XOR scheme takes BlockCodeParams")
        if params.repairs != 1:
            raise ValueError("XOR emits exactly one repair per block; need n = k + 1")
        self.params = params
        self.depth = interleave
        self.symbol_size = symbol_size
        self._seq = 0
        self._lanes: dict[int, list[np.ndarray]] = {}

    def _position(self) -> tuple[int, int, int]:
        lane, intra = interleave_block_index(self._seq, self.depth)
        block_id = (intra // self.params.k) * self.depth + lane
        return lane, intra, block_id

    def begin_source(self) -> int:
        """Assign the id of the next source symbol (the id rides inside it)."""
        _, intra, block_id = self._position()
        return block_source_id(block_id, intra % self.params.k)

    def commit_source(self, payload: np.ndarray):
        lane, _, block_id = self._position()
        self._seq += 1
        k = self.params.k
        pending = self._lanes.setdefault(lane, [])
        pending.append(payload)
        repairs = []
        if len(pending) == k:
            repair = xor_encode(pending)
            desc = RepairDescriptor(
                scheme=SCHEME_XOR,
                group_id=block_id,
                index=0,
                k=k,
                low16=self.params.repairs,
            )
            repairs.append((desc, repair))
            self._lanes[lane] = []
        return repairs

    def add_source(self, payload: np.ndarray):
        """Account one source symbol; returns (source_id, repairs)."""
        source_id = self.begin_source()
        return source_id, self.commit_source(payload)


class XorDecoder:
    """Receiver state: per-block source sets plus the parity symbol."""

    def __init__(self, params: BlockCodeParams, symbol_size: int):
        if not isinstance(params, BlockCodeParams):
            raise TypeError("XOR scheme takes BlockCodeParams")
        self.params = params
        self.symbol_size = symbol_size
        self._sources: dict[int, dict[int, np.ndarray]] = {}
        self._repairs: dict[int, np.ndarray] = {}
        self._done: set[int] = set()

    def on_source(self, source_id: int, payload: np.ndarray):
        block_id, offset = split_block_source_id(source_id)
        if block_id in self._done:
            return []
        self._sources.setdefault(block_id, {})[offset] = payload
        return self._try_block(block_id)

    def on_repair(self, desc: RepairDescriptor, payload: np.ndarray):
        block_id = desc.group_id
        if block_id in self._done:
            return []
        self._repairs[block_id] = payload
        return self._try_block(block_id)

    def _try_block(self, block_id: int):
        k = self.params.k
        have = self._sources.get(block_id, {})
        if len(have) < k - 1 or block_id not in self._repairs:
            return []
        missing = [off for off in range(k) if off not in have]
        if not missing:
            self._finish(block_id)
            return []
        if len(missing) > 1:
            return []
        out = xor_recover(have, k, self._repairs[block_id])
        self._finish(block_id)
        if out is None:
            return []
        offset, payload = out
        return [(block_source_id(block_id, offset), payload)]

    def _finish(self, block_id: int) -> None:
        self._done.add(block_id)
        self._sources.pop(block_id, None)
        self._repairs.pop(block_id, None)
