import numpy as np
import pytest

from quicfec.gf256 import (
    Matrix,
    gf_add,
    gf_inv,
    gf_mul,
    solve_linear_system,
)


def mul_oracle(a: int, b: int) -> int:
    """Carry-less product reduced by 0x11D, bit by bit."""
    res = 0
    while b:
        if b & 1:
            res ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11D
        b >>= 1
    return res


def test_add_examples():
    assert gf_add(0x00, 0x5A) == 0x5A
    assert gf_add(0x5A, 0x5A) == 0x00
    assert gf_add(0x0F, 0xF0) == 0xFF


def test_mul_examples():
    assert gf_mul(0x00, 0x7B) == 0x00
    assert gf_mul(0x01, 0x7B) == 0x7B
    assert mul_oracle(0x02, 0x80) == 0x1D
    assert gf_mul(0x02, 0x80) == 0x1D


def test_mul_matches_bitwise_oracle_everywhere():
    for a in range(256):
        for b in range(0, 256, 7):
            assert gf_mul(a, b) == mul_oracle(a, b)


def test_inv_examples():
    assert gf_inv(0x01) == 0x01
    brute = next(c for c in range(1, 256) if gf_mul(0x02, c) == 1)
    assert brute == 0x8E
    assert gf_inv(0x02) == 0x8E
    with pytest.raises(ZeroDivisionError):
        gf_inv(0x00)


def test_inv_agrees_with_pow_254():
    for a in range(1, 256):
        acc = 1
        for _ in range(254):
            acc = gf_mul(acc, a)
        assert gf_inv(a) == acc
        assert gf_mul(a, gf_inv(a)) == 1


def test_distributivity_bulk():
    rng = np.random.default_rng(7)
    a = rng.integers(0, 256, 100_000, dtype=np.uint8)
    b = rng.integers(0, 256, 100_000, dtype=np.uint8)
    c = rng.integers(0, 256, 100_000, dtype=np.uint8)
    from quicfec.gf256 import MUL

    lhs = MUL[a, b ^ c]
    rhs = MUL[a, b] ^ MUL[a, c]
    assert np.array_equal(lhs, rhs)


def test_solve_identity():
    v1 = np.frombuffer(b"\x01\x02\x03", dtype=np.uint8)
    v2 = np.frombuffer(b"\x0a\x0b\x0c", dtype=np.uint8)
    res = solve_linear_system(Matrix.identity(2), [v1, v2])
    assert res.ok
    assert np.array_equal(res.solution[0], v1)
    assert np.array_equal(res.solution[1], v2)


def test_solve_forward_multiply_oracle():
    x = [np.array([0x03], dtype=np.uint8), np.array([0x05], dtype=np.uint8)]
    coeffs = Matrix(2, 2, [1, 1, 1, 2])
    rhs = coeffs.mat_vec(x)
    assert rhs[0][0] == 0x03 ^ 0x05
    assert rhs[1][0] == 0x03 ^ gf_mul(2, 0x05)
    res = solve_linear_system(coeffs, rhs)
    assert res.ok
    assert res.solution[0][0] == 0x03
    assert res.solution[1][0] == 0x05


def test_solve_rank_deficient_reports_unknowns():
    coeffs = Matrix(2, 2, [1, 2, 2, 4])  # second row = 2 * first
    rhs = [np.zeros(4, dtype=np.uint8), np.zeros(4, dtype=np.uint8)]
    res = solve_linear_system(coeffs, rhs)
    assert not res.ok
    assert res.undetermined == (0, 1)


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_linear_system(Matrix.identity(2), [np.zeros(3, dtype=np.uint8)])


def test_solve_random_full_rank_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(1, 17))
        while True:
            coeffs = Matrix.from_array(rng.integers(0, 256, (n, n), dtype=np.uint8))
            x = [rng.integers(0, 256, 8, dtype=np.uint8) for _ in range(n)]
            rhs = coeffs.mat_vec(x)
            res = solve_linear_system(coeffs, rhs)
            if res.ok:
                break
        for got, want in zip(res.solution, x):
            assert np.array_equal(got, want)
        # re-verify by forward multiplication
        check = coeffs.mat_vec(res.solution)
        for got, want in zip(check, rhs):
            assert np.array_equal(got, want)
