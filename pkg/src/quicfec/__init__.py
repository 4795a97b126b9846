"""Packet-level forward erasure correction for an unreliable QUIC-like
transport, with a deterministic network simulator and experiment harness."""

__version__ = "0.1.0"

from .codec import (  # noqa: F401
    SCHEME_RLC,
    SCHEME_RS,
    SCHEME_XOR,
    BlockCodeParams,
    ConvCodeParams,
)
from .harness import RunMetrics, TrafficProfile  # noqa: F401
from .netem import GEParams  # noqa: F401
from .runner import ExperimentConfig, run_experiment  # noqa: F401
