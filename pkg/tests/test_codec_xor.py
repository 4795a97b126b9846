import numpy as np
import pytest

from quicfec.codec import (
    BlockCodeParams,
    XorDecoder,
    XorEncoder,
    interleave_block_index,
    pad_payload,
    split_block_source_id,
    xor_encode,
    xor_recover,
)

E = 16


def vec(byte: int) -> np.ndarray:
    return np.full(E, byte, dtype=np.uint8)


def test_encode_examples():
    assert np.array_equal(xor_encode([vec(0x0F), vec(0xF0)]), vec(0xFF))
    v = np.arange(E, dtype=np.uint8)
    assert np.array_equal(xor_encode([v]), v)
    a, b = vec(0x5C), vec(0xA3)
    assert np.array_equal(xor_encode([a, b, a]), b)
    with pytest.raises(ValueError):
        xor_encode([])


def test_recover_examples():
    repair = vec(0xFF)
    missing = xor_recover({1: vec(0xF0)}, 2, repair)
    assert missing is not None
    offset, payload = missing
    assert offset == 0
    assert np.array_equal(payload, vec(0x0F))

    assert xor_recover({0: vec(1), 1: vec(2)}, 2, vec(3)) is None

    with pytest.raises(ValueError):
        xor_recover({0: vec(1)}, 3, vec(0))


def test_interleave_examples():
    assert interleave_block_index(23, 10) == (3, 2)
    assert interleave_block_index(0, 1) == (0, 0)
    lanes = {interleave_block_index(seq, 10)[0] for seq in range(40, 50)}
    assert len(lanes) == 10
    with pytest.raises(ValueError):
        interleave_block_index(0, 0)


def _stream(encoder, symbols):
    """Feed symbols through the encoder; returns [(source_id, payload)], repairs."""
    sources, repairs = [], []
    for payload in symbols:
        sid, reps = encoder.add_source(payload)
        sources.append((sid, payload))
        repairs.extend(reps)
    return sources, repairs


def test_interleaved_burst_recovery_exhaustive():
    # depth 10, (3,2) lanes: any 10-long burst of sources costs each lane one
    # symbol, so everything comes back once the lane repairs arrive
    params = BlockCodeParams(n=3, k=2)
    n_symbols = 40
    symbols = [pad_payload(bytes([i + 1] * 8), E) for i in range(n_symbols)]
    for burst_start in range(0, n_symbols - 10):
        enc = XorEncoder(params, interleave=10, symbol_size=E)
        sources, repairs = _stream(enc, symbols)
        dec = XorDecoder(params, symbol_size=E)
        lost = {}
        for idx, (sid, payload) in enumerate(sources):
            if burst_start <= idx < burst_start + 10:
                lost[sid] = payload
                continue
            dec.on_source(sid, payload)
        recovered = {}
        for desc, payload in repairs:
            for sid, rec in dec.on_repair(desc, payload):
                recovered[sid] = rec
        for sid, payload in lost.items():
            assert sid in recovered, f"burst at {burst_start}: {split_block_source_id(sid)}"
            assert np.array_equal(recovered[sid], payload)


def test_round_trip_randomized():
    rng = np.random.default_rng(3)
    params = BlockCodeParams(n=3, k=2)
    for trial in range(10_000):
        enc = XorEncoder(params, interleave=1, symbol_size=4)
        block = [rng.integers(0, 256, 4, dtype=np.uint8) for _ in range(2)]
        sources, repairs = _stream(enc, block)
        drop = int(rng.integers(0, 2))
        dec = XorDecoder(params, symbol_size=4)
        for idx, (sid, payload) in enumerate(sources):
            if idx != drop:
                dec.on_source(sid, payload)
        out = []
        for desc, payload in repairs:
            out.extend(dec.on_repair(desc, payload))
        assert len(out) == 1
        sid, payload = out[0]
        assert sid == sources[drop][0]
        assert np.array_equal(payload, sources[drop][1])
