"""Shared types of the coding schemes: parameters, ids, payload helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCHEME_XOR = 0x01
SCHEME_RS = 0x02
SCHEME_RLC = 0x03

SCHEME_NAMES = {SCHEME_XOR: "xor", SCHEME_RS: "rs", SCHEME_RLC: "rlc"}
SCHEME_IDS = {v: k for k, v in SCHEME_NAMES.items()}


@dataclass(frozen=True)
class BlockCodeParams:
    """(n, k) block code: k source symbols per block, n total."""

    n: int
    k: int

    def __post_init__(self):
        if not 0 < self.k < self.n <= 512:
            raise ValueError(f"need 0 < k < n <= 512, got ({self.n}, {self.k})")

    @property
    def repairs(self) -> int:
        return self.n - self.k

    @property
    def code_rate(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class ConvCodeParams:
    """(n, k, L) sliding-window code: window of L shifts by k, emits n-k repairs."""

    n: int
    k: int
    window: int
    density_threshold: float = 1.0

    def __post_init__(self):
        if not 0 < self.k < self.n:
            raise ValueError(f"need 0 < k < n, got ({self.n}, {self.k})")
        if not self.k <= self.window <= 255:
            raise ValueError(f"need k <= L <= 255, got L={self.window}")
        if not 0.0 < self.density_threshold <= 1.0:
            raise ValueError(f"density must be in (0, 1], got {self.density_threshold}")

    @property
    def repairs(self) -> int:
        return self.n - self.k

    @property
    def density_byte(self) -> int:
        return max(0, min(255, round(self.density_threshold * 255)))


@dataclass(frozen=True)
class RepairDescriptor:
    """Semantic content of a 64-bit repair symbol id.

    group_id is the block id for block schemes and the first source sequence
    number of the encoding window for the convolutional scheme.  low16
    carries the coefficient seed for RLC and the repair count for block
    schemes.  scheme_byte travels in the FEC frame body (RLC density
    threshold; zero elsewhere).
    """

    scheme: int
    group_id: int
    index: int
    k: int
    low16: int
    scheme_byte: int = 0


def pad_payload(data: bytes, symbol_size: int) -> np.ndarray:
    """Zero-pad packet bytes up to the connection's symbol size."""
    if len(data) > symbol_size:
        raise ValueError(f"packet of {len(data)} bytes exceeds symbol size {symbol_size}")
    buf = np.zeros(symbol_size, dtype=np.uint8)
    buf[: len(data)] = np.frombuffer(data, dtype=np.uint8)
    return buf


def block_source_id(block_id: int, offset: int) -> int:
    """Pack the block-scheme source id: 24-bit block, 8-bit offset."""
    if not 0 <= block_id < (1 << 24) or not 0 <= offset < (1 << 8):
        raise ValueError(f"source id fields out of range: block={block_id} offset={offset}")
    return (block_id << 8) | offset


def split_block_source_id(raw: int) -> tuple[int, int]:
    return raw >> 8, raw & 0xFF
