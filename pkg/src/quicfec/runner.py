"""Build and run one complete simulated transfer from a config.

A run wires a client sender and a server receiver over one or two lossy
paths, drives the constant-rate source for the configured duration, reads
at the playback sink's deadlines, and returns the two metrics.  Everything
descends deterministically from the config and its seeds; the cryptographic
handshake is assumed done at t=0 with the scheme negotiation already
applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import (
    SCHEME_IDS,
    SCHEME_NAMES,
    BlockCodeParams,
    ConvCodeParams,
)
from .endpoint import (
    DEFAULT_WINDOW,
    MODE_FEC,
    MODE_PLAIN,
    MODE_RELIABLE,
    MODES,
    DataReceiver,
    DataSender,
    negotiate,
)
from .fecframe import RecoveryBuffer, SenderFecFramework
from .harness import US_PER_S, MessageSource, PlaybackSink, RunMetrics, TrafficProfile
from .netem import EventQueue, GEParams, build_paths
from .sched import PathState, make_scheduler

import random

# flags(1) + pn(4) + source id(4) + stream frame header(15)
DATA_PACKET_OVERHEAD = 24
RELIABLE_DRAIN_US = 120 * US_PER_S


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; replayable by construction."""

    mode: str = MODE_FEC
    scheme: str = "rs"  # xor | rs | rlc (fec mode only)
    code_n: int = 30
    code_k: int = 20
    code_window: int = 20  # rlc
    interleave: int = 1  # xor
    density: float = 1.0  # rlc
    scheduler: str = "single_path"
    channels: tuple = (None,)  # per-path GEParams | uniform rate | None
    owd_ms: float = 10.0
    buffer_ms: float = 100.0
    profile: TrafficProfile = field(default_factory=TrafficProfile)
    channel_seed: int = 0
    contender: str = ""  # scheduler randomness scope; never the channel's
    initial_window: int = DEFAULT_WINDOW
    trace: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == MODE_FEC and self.scheme not in SCHEME_IDS:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheduler == "high_rb" and self.mode == MODE_PLAIN:
            raise ValueError("high_rb needs acknowledgements; plain mode has none")

    @property
    def symbol_size(self) -> int:
        return self.profile.pkt_payload + DATA_PACKET_OVERHEAD

    def code_params(self):
        if self.scheme == "rlc":
            return ConvCodeParams(
                n=self.code_n, k=self.code_k, window=self.code_window,
                density_threshold=self.density,
            )
        return BlockCodeParams(n=self.code_n, k=self.code_k)


@dataclass
class RunResult:
    metrics: RunMetrics
    data_packets_sent: int
    retransmissions: int
    recovered_packets: int
    fate_hashes: tuple[int, ...] = ()
    path_states: list[PathState] = field(default_factory=list)
    scheduler_picks: dict[int, int] = field(default_factory=dict)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    queue = EventQueue()
    owd_us = int(round(cfg.owd_ms * 1000))
    paths = build_paths(queue, owd_us, list(cfg.channels), cfg.channel_seed, trace=cfg.trace)

    mss = cfg.symbol_size
    path_states = [PathState(path_id=p.path_id, mss=mss) for p in paths]
    sched_rng = random.Random(f"{cfg.channel_seed}:{cfg.contender}:sched")
    scheduler = make_scheduler(cfg.scheduler, path_states, sched_rng)

    sender_fw = recovery = None
    if cfg.mode == MODE_FEC:
        scheme_id = SCHEME_IDS[cfg.scheme]
        params = negotiate([scheme_id], list(SCHEME_NAMES))
        assert params.fec_scheme_c2s == scheme_id
        base_seed = ((cfg.channel_seed * 31 + 7) & 0xFFFF) or 1
        sender_fw = SenderFecFramework(
            scheme_id,
            cfg.code_params(),
            symbol_size=cfg.symbol_size,
            max_frame_payload=cfg.symbol_size,
            interleave=cfg.interleave,
            base_seed=base_seed,
        )
        recovery = RecoveryBuffer(scheme_id, cfg.code_params(), symbol_size=cfg.symbol_size)

    sender: DataSender | None = None

    def send_control(path_id: int, raw: bytes) -> None:
        paths[path_id].backward.send(raw, sender.on_packet_from_peer, data_bearing=False)

    receiver = DataReceiver(
        cfg.mode,
        send_control=send_control,
        framework=recovery,
        receive_window=cfg.initial_window,
    )

    def transmit(path_id: int, raw: bytes, pn: int, data_bearing: bool) -> None:
        paths[path_id].forward.send(
            raw,
            lambda p, path_id=path_id: receiver.on_packet(p, path_id),
            pn=pn,
            data_bearing=data_bearing,
        )

    sender = DataSender(
        cfg.mode,
        transmit=transmit,
        schedule=queue.push,
        now=lambda: queue.now,
        paths=path_states,
        scheduler=scheduler,
        framework=sender_fw,
        send_window=cfg.initial_window,
        handshake_rtt_us=2 * owd_us,
    )

    buffer_us = int(round(cfg.buffer_ms * 1000))
    traffic_end = cfg.profile.send_time_us(cfg.profile.msgs_total - 1)
    drain_cap = traffic_end + RELIABLE_DRAIN_US
    sink = PlaybackSink(
        cfg.profile,
        buffer_us,
        receiver,
        queue,
        reliable=(cfg.mode == MODE_RELIABLE),
        drain_cap_us=drain_cap,
    )
    receiver.on_first_data = sink.on_first_data

    MessageSource(cfg.profile, sender, queue).start()

    if cfg.mode == MODE_RELIABLE:
        queue.run_until(drain_cap, stop=lambda: sink.complete)
    else:
        slack = buffer_us + 2 * owd_us + 2 * US_PER_S
        queue.run_until(traffic_end + slack)

    fate_hashes = tuple(
        p.forward.trace.fate_hash() for p in paths if p.forward.trace is not None
    )
    picks = dict(getattr(scheduler, "pick_counts", {}))
    return RunResult(
        metrics=sink.finalize(),
        data_packets_sent=sender.data_packets_sent,
        retransmissions=sender.retransmissions_sent,
        recovered_packets=receiver.recovered_packets,
        fate_hashes=fate_hashes,
        path_states=path_states,
        scheduler_picks=picks,
    )


def simplified_ge(p: float, r: float) -> GEParams:
    """Two-state profile where good always delivers and bad never does."""
    return GEParams(p=p, r=r, k_good=1.0, h_bad=0.0)
