"""Systematic Reed-Solomon style block code over GF(2^8).

The generator is a Vandermonde matrix on evaluation points 0..n-1,
row-reduced so the top k rows are the identity.  Row subsets of a
rectangular Vandermonde keep all k columns, hence stay Vandermonde in the
selected points and are invertible; after the basis change every k-row
subset of the generator is too, which is the whole recovery guarantee.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..gf256 import MUL, Matrix, matrix_payload_mul, solve_linear_system, vec_addmul
from .base import (
    SCHEME_RS,
    BlockCodeParams,
    RepairDescriptor,
    block_source_id,
    split_block_source_id,
)


@lru_cache(maxsize=None)
def _generator_cached(n: int, k: int) -> Matrix:
    if k > 256 or n - k > 256:
        raise ValueError(f"capacity exceeded: k={k}, n-k={n - k} (max 256 each)")
    # distinct evaluation points only exist for n <= field size
    if n > 256:
        raise ValueError(f"capacity exceeded: n={n} needs {n} distinct points in GF(2^8)")
    vand = np.zeros((n, k), dtype=np.uint8)
    for i in range(n):
        acc = 1
        for j in range(k):
            vand[i, j] = acc
            acc = int(MUL[acc, i])
    top = Matrix.from_array(vand[:k])
    eye = np.eye(k, dtype=np.uint8)
    res = solve_linear_system(top, [eye[i] for i in range(k)])
    assert res.solution is not None  # Vandermonde top block is invertible
    inv = Matrix.from_array(np.array(res.solution, dtype=np.uint8))
    return Matrix.from_array(vand).mat_mul(inv)


def rs_generator_matrix(params) -> Matrix:
    """n x k systematic generator; top k x k block is the identity."""
    return _generator_cached(params.n, params.k)


def rs_encode(sources: list[np.ndarray], params) -> list[np.ndarray]:
    """Compute the n-k repair payloads for one full block of k sources."""
    if len(sources) != params.k:
        raise ValueError(f"need exactly {params.k} sources, got {len(sources)}")
    size = len(sources[0])
    if any(len(s) != size for s in sources):
        raise ValueError("payloads must share one length")
    gen = rs_generator_matrix(params)
    stacked = np.stack(sources)
    return list(matrix_payload_mul(gen.data[params.k :], stacked))


class UnrecoverableBlock(Exception):
    """Raised when a block holds fewer than k symbols in total."""

    def __init__(self, missing: list[int]):
        super().__init__(f"unrecoverable block, missing source offsets {missing}")
        self.missing = missing


def rs_recover(
    sources: dict[int, np.ndarray], repairs: dict[int, np.ndarray], params
) -> dict[int, np.ndarray]:
    """Rebuild missing sources from any >= k received symbols of the block.

    sources maps in-block offset to payload, repairs maps repair index to
    payload.  Returns only the recovered symbols; raises UnrecoverableBlock
    below rank.
    """
    k = params.k
    missing = [off for off in range(k) if off not in sources]
    if not missing:
        return {}
    if len(sources) + len(repairs) < k:
        raise UnrecoverableBlock(missing)
    gen = rs_generator_matrix(params)
    use = sorted(repairs)[: len(missing)]
    size = len(next(iter(repairs.values())))
    coeffs = np.zeros((len(use), len(missing)), dtype=np.uint8)
    rhs = []
    for row, ridx in enumerate(use):
        grow = gen.data[k + ridx]
        acc = repairs[ridx].copy()
        for off, payload in sources.items():
            vec_addmul(acc, int(grow[off]), payload)
        for col, off in enumerate(missing):
            coeffs[row, col] = grow[off]
        rhs.append(acc)
    res = solve_linear_system(coeffs, rhs)
    if res.solution is None:
        # cannot happen for an MDS generator, but report rather than lie
        raise UnrecoverableBlock([missing[c] for c in res.undetermined])
    assert len(rhs[0]) == size
    return {off: res.solution[col] for col, off in enumerate(missing)}


class RsEncoder:
    """Sender state: accumulate k sources, then emit n-k repairs."""

    def __init__(self, params: BlockCodeParams, symbol_size: int):
        if not isinstance(params, BlockCodeParams):
            raise TypeError("Reed-Solomon scheme takes BlockCodeParams")
        rs_generator_matrix(params)  # validate capacity up front
        self.params = params
        self.symbol_size = symbol_size
        self._seq = 0
        self._pending: list[np.ndarray] = []

    def begin_source(self) -> int:
        block_id, offset = divmod(self._seq, self.params.k)
        return block_source_id(block_id, offset)

    def commit_source(self, payload: np.ndarray):
        k = self.params.k
        block_id, _ = divmod(self._seq, k)
        self._seq += 1
        self._pending.append(payload)
        repairs = []
        if len(self._pending) == k:
            for idx, repair in enumerate(rs_encode(self._pending, self.params)):
                desc = RepairDescriptor(
                    scheme=SCHEME_RS,
                    group_id=block_id,
                    index=idx,
                    k=k,
                    low16=self.params.repairs,
                )
                repairs.append((desc, repair))
            self._pending = []
        return repairs

    def add_source(self, payload: np.ndarray):
        source_id = self.begin_source()
        return source_id, self.commit_source(payload)


class RsDecoder:
    """Receiver state: per-block symbol sets, solved once recoverable."""

    def __init__(self, params: BlockCodeParams, symbol_size: int):
        if not isinstance(params, BlockCodeParams):
            raise TypeError("Reed-Solomon scheme takes BlockCodeParams")
        self.params = params
        self.symbol_size = symbol_size
        self._sources: dict[int, dict[int, np.ndarray]] = {}
        self._repairs: dict[int, dict[int, np.ndarray]] = {}
        self._done: set[int] = set()

    def on_source(self, source_id: int, payload: np.ndarray):
        block_id, offset = split_block_source_id(source_id)
        if block_id in self._done:
            return []
        self._sources.setdefault(block_id, {})[offset] = payload
        return self._try_block(block_id)

    def on_repair(self, desc, payload: np.ndarray):
        block_id = desc.group_id
        if block_id in self._done:
            return []
        self._repairs.setdefault(block_id, {})[desc.index] = payload
        return self._try_block(block_id)

    def _try_block(self, block_id: int):
        k = self.params.k
        src = self._sources.get(block_id, {})
        rep = self._repairs.get(block_id, {})
        if len(src) == k:
            self._finish(block_id)
            return []
        if not rep or len(src) + len(rep) < k:
            return []
        recovered = rs_recover(src, rep, self.params)
        self._finish(block_id)
        return [(block_source_id(block_id, off), payload) for off, payload in sorted(recovered.items())]

    def _finish(self, block_id: int) -> None:
        self._done.add(block_id)
        self._sources.pop(block_id, None)
        self._repairs.pop(block_id, None)
