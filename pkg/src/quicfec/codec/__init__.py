"""FEC schemes: interleaved XOR, Reed-Solomon block, convolutional RLC.

All three sit behind one sender/receiver contract so the framing layer does
not care which code runs.  Payloads are numpy uint8 vectors of one fixed
symbol size per connection; shorter packets are zero-padded before coding.
"""

from .base import (
    SCHEME_IDS,
    SCHEME_NAMES,
    SCHEME_RLC,
    SCHEME_RS,
    SCHEME_XOR,
    BlockCodeParams,
    ConvCodeParams,
    RepairDescriptor,
    block_source_id,
    pad_payload,
    split_block_source_id,
)
from .xor import (
    XorDecoder,
    XorEncoder,
    interleave_block_index,
    xor_encode,
    xor_recover,
)
from .rs import RsDecoder, RsEncoder, rs_encode, rs_generator_matrix, rs_recover
from .rlc import (
    RlcDecoder,
    RlcEncoder,
    SchemeSpecificValue,
    rlc_coefficients,
    rlc_encode,
)

__all__ = [
    "SCHEME_XOR",
    "SCHEME_RS",
    "SCHEME_RLC",
    "SCHEME_NAMES",
    "SCHEME_IDS",
    "BlockCodeParams",
    "ConvCodeParams",
    "RepairDescriptor",
    "SchemeSpecificValue",
    "pad_payload",
    "block_source_id",
    "split_block_source_id",
    "interleave_block_index",
    "xor_encode",
    "xor_recover",
    "XorEncoder",
    "XorDecoder",
    "rs_generator_matrix",
    "rs_encode",
    "rs_recover",
    "RsEncoder",
    "RsDecoder",
    "rlc_coefficients",
    "rlc_encode",
    "RlcEncoder",
    "RlcDecoder",
    "make_encoder",
    "make_decoder",
]


def make_encoder(scheme: int, params, symbol_size: int, interleave: int = 1, base_seed: int = 1):
    if scheme == SCHEME_XOR:
        return XorEncoder(params, interleave, symbol_size)
    if scheme == SCHEME_RS:
        return RsEncoder(params, symbol_size)
    if scheme == SCHEME_RLC:
        return RlcEncoder(params, symbol_size, base_seed)
    raise ValueError(f"unknown scheme id {scheme:#x}")


def make_decoder(scheme: int, params, symbol_size: int):
    if scheme == SCHEME_XOR:
        return XorDecoder(params, symbol_size)
    if scheme == SCHEME_RS:
        return RsDecoder(params, symbol_size)
    if scheme == SCHEME_RLC:
        return RlcDecoder(params, symbol_size)
    raise ValueError(f"unknown scheme id {scheme:#x}")
