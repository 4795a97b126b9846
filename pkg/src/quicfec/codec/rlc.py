"""Convolutional random linear code over a sliding window.

Repairs are random linear combinations of the last L source symbols; the
16-bit coefficient seed and the density threshold travel with each repair
so the receiver regenerates the exact equation.  Decoding is plain
Gaussian elimination, but it only fires once some contiguous range of
missing symbols is covered by at least as many equations, which keeps the
cost down on links where losses arrive in bursts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..gf256 import INV, MUL, coeffs_payload_mul, partial_solve, vec_addmul
from ..prng import seed_prng_16, sequence_from
from .base import SCHEME_RLC, ConvCodeParams, RepairDescriptor


@dataclass(frozen=True)
class SchemeSpecificValue:
    """Per-repair encoding context carried next to the repair symbol."""

    seed: int
    density_threshold_byte: int
    window_first_id: int
    window_size: int

    def __post_init__(self):
        if not 0 <= self.seed <= 0xFFFF:
            raise ValueError("seed must fit 16 bits")
        if not 0 <= self.density_threshold_byte <= 0xFF:
            raise ValueError("density threshold must fit 8 bits")
        if not 0 <= self.window_size <= 0xFF:
            raise ValueError("window size must fit 8 bits")


def rlc_coefficients(ssv: SchemeSpecificValue, window_size: int) -> np.ndarray:
    """Regenerate the equation coefficients for one repair.

    Two draws per slot, consumed unconditionally so density and value stay
    independent: the first decides whether the slot is structurally zero
    (draw mod 256 above the density threshold byte), the second picks a
    nonzero value.  A saturated threshold of 255 can never zero a slot.
    """
    draws = sequence_from(seed_prng_16(ssv.seed), 2 * window_size)
    sel = draws[0::2] % np.uint64(256)
    val = draws[1::2] % np.uint64(255)
    coeffs = (1 + val).astype(np.uint8)
    coeffs[sel > ssv.density_threshold_byte] = 0
    return coeffs


def rlc_encode(window: list[np.ndarray], params, ssv: SchemeSpecificValue) -> list[np.ndarray]:
    """Emit the n-k repairs for one window step; repair i uses seed+i."""
    if len(window) > params.window:
        raise ValueError(f"window holds at most {params.window} symbols")
    size = len(window[0])
    out = []
    for i in range(params.repairs):
        step_ssv = SchemeSpecificValue(
            seed=(ssv.seed + i) & 0xFFFF,
            density_threshold_byte=ssv.density_threshold_byte,
            window_first_id=ssv.window_first_id,
            window_size=len(window),
        )
        coeffs = rlc_coefficients(step_ssv, len(window))
        out.append(coeffs_payload_mul(coeffs, np.stack(window)))
    assert all(len(r) == size for r in out)
    return out


class RlcEncoder:
    """Sender state: sliding window of the last L payloads."""

    def __init__(self, params: ConvCodeParams, symbol_size: int, base_seed: int = 1):
        if not isinstance(params, ConvCodeParams):
            raise TypeError("RLC scheme takes ConvCodeParams")
        self.params = params
        self.symbol_size = symbol_size
        self._seq = 0
        self._window: deque[np.ndarray] = deque(maxlen=params.window)
        self._seed_counter = base_seed & 0xFFFF

    def begin_source(self) -> int:
        return self._seq

    def commit_source(self, payload: np.ndarray):
        self._seq += 1
        self._window.append(payload)
        repairs = []
        if self._seq % self.params.k == 0:
            window = list(self._window)
            first = self._seq - len(window)
            base = self._seed_counter
            ssv = SchemeSpecificValue(
                seed=base,
                density_threshold_byte=self.params.density_byte,
                window_first_id=first,
                window_size=len(window),
            )
            payloads = rlc_encode(window, self.params, ssv)
            for i, rp in enumerate(payloads):
                desc = RepairDescriptor(
                    scheme=SCHEME_RLC,
                    group_id=first,
                    index=i,
                    k=len(window),
                    low16=(base + i) & 0xFFFF,
                    scheme_byte=self.params.density_byte,
                )
                repairs.append((desc, rp))
            self._seed_counter = (base + self.params.repairs) & 0xFFFF
        return repairs

    def add_source(self, payload: np.ndarray):
        source_id = self.begin_source()
        return source_id, self.commit_source(payload)


class _Equation:
    __slots__ = ("coeffs", "rhs")

    def __init__(self, coeffs: dict[int, int], rhs: np.ndarray):
        self.coeffs = coeffs
        self.rhs = rhs

    def substitute(self, source_id: int, payload: np.ndarray) -> None:
        c = self.coeffs.pop(source_id, 0)
        if c:
            vec_addmul(self.rhs, c, payload)


class RlcDecoder:
    """Receiver state: known symbols plus pending linear equations.

    Memory is bounded by dropping equations older than four window lengths
    behind the newest symbol seen.
    """

    def __init__(self, params: ConvCodeParams, symbol_size: int):
        if not isinstance(params, ConvCodeParams):
            raise TypeError("RLC scheme takes ConvCodeParams")
        self.params = params
        self.symbol_size = symbol_size
        self._known: dict[int, np.ndarray] = {}
        self._equations: list[_Equation] = []
        self._emitted: set[int] = set()
        self._horizon = 4 * params.window
        self._max_seen = -1

    def on_source(self, source_id: int, payload: np.ndarray):
        if source_id in self._known:
            return []
        self._learn(source_id, payload)
        return self._scan()

    def on_repair(self, desc, payload: np.ndarray):
        first, size = desc.group_id, desc.k
        self._max_seen = max(self._max_seen, first + size - 1)
        if all(first + j in self._known for j in range(size)):
            return []  # nothing to learn from this repair
        ssv = SchemeSpecificValue(
            seed=desc.low16,
            density_threshold_byte=desc.scheme_byte,
            window_first_id=first,
            window_size=size,
        )
        coeffs = rlc_coefficients(ssv, ssv.window_size)
        eq_coeffs: dict[int, int] = {}
        rhs = payload.copy()
        sub_c: list[int] = []
        sub_p: list[np.ndarray] = []
        for j in range(ssv.window_size):
            c = int(coeffs[j])
            if not c:
                continue
            sid = ssv.window_first_id + j
            self._max_seen = max(self._max_seen, sid)
            if sid in self._known:
                sub_c.append(c)
                sub_p.append(self._known[sid])
            else:
                eq_coeffs[sid] = c
        if sub_c:
            rhs ^= coeffs_payload_mul(np.asarray(sub_c, dtype=np.uint8), np.stack(sub_p))
        if eq_coeffs:
            self._equations.append(_Equation(eq_coeffs, rhs))
        self._prune()
        return self._scan()

    def _learn(self, source_id: int, payload: np.ndarray) -> None:
        self._known[source_id] = payload
        self._max_seen = max(self._max_seen, source_id)
        for eq in self._equations:
            eq.substitute(source_id, payload)
        self._equations = [eq for eq in self._equations if eq.coeffs]

    def _prune(self) -> None:
        floor = self._max_seen - self._horizon
        if floor <= 0:
            return
        self._equations = [
            eq for eq in self._equations if min(eq.coeffs) >= floor
        ]
        stale = [sid for sid in self._known if sid < floor]
        for sid in stale:
            del self._known[sid]

    def _scan(self):
        """Recover whatever the stored equations pin down.

        Equations partition into connected components over their shared
        unknowns; reduction runs per component, and any variable whose
        reduced row touches no free column is determined even when the
        component as a whole is under-determined.  This covers the square
        system, every square subsystem (burst or isolated), and mixtures.
        """
        recovered = []
        progress = True
        while progress:
            progress = False
            if not self._equations:
                break
            parent: dict[int, int] = {}

            def find(x: int) -> int:
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for eq in self._equations:
                ids = list(eq.coeffs)
                for sid in ids:
                    parent.setdefault(sid, sid)
                root = find(ids[0])
                for sid in ids[1:]:
                    parent[find(sid)] = root
            groups: dict[int, list[_Equation]] = {}
            for eq in self._equations:
                groups.setdefault(find(next(iter(eq.coeffs))), []).append(eq)
            for eqs in groups.values():
                got = self._reduce_component(eqs)
                if got:
                    recovered.extend(got)
                    progress = True
                    break  # equation set changed: rebuild components
        return recovered

    def _reduce_component(self, eqs: list[_Equation]):
        ids = sorted({sid for eq in eqs for sid in eq.coeffs})
        if len(eqs) == 1 and len(ids) == 1:
            eq = eqs[0]
            sid = ids[0]
            solved = {sid: MUL[int(INV[eq.coeffs[sid]])][eq.rhs]}
        else:
            col = {sid: c for c, sid in enumerate(ids)}
            a = np.zeros((len(eqs), len(ids)), dtype=np.uint8)
            rhs = []
            for r, eq in enumerate(eqs):
                for sid, c in eq.coeffs.items():
                    a[r, col[sid]] = c
                rhs.append(eq.rhs)
            solved = {ids[c]: payload for c, payload in partial_solve(a, rhs).items()}
        out = []
        for sid, payload in sorted(solved.items()):
            # substitution inside _learn consumes the equations it empties
            self._learn(sid, payload)
            if sid not in self._emitted:
                self._emitted.add(sid)
                out.append((sid, payload))
        return out
