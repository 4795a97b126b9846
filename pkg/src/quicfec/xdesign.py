"""Experimental-design engine: space-filling sampling, campaigns, reports.

A campaign samples channel parameter points once and runs every contender
on the same points with the same channel seeds, so comparisons are paired
by construction.  Results append to CSV incrementally; rerunning an
interrupted campaign skips completed rows.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import yaml
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .harness import TrafficProfile
from .netem import GEParams
from .runner import ExperimentConfig, run_experiment

SCHEMA_VERSION = 1
POOL_SIZE = 2**13

# parameter ranges of the channel model study
GE_RANGES = [("p", 0.0, 0.01), ("r", 0.025, 0.5), ("k_good", 0.97, 1.0), ("h_bad", 0.0, 0.4)]
OWD_RANGE = ("owd_ms", 0.0, 100.0)
UNIFORM_RANGE = ("rate", 0.0, 0.03)

SPACE_KINDS = ("ge", "uniform", "ge-simplified", "ge-simplified-het")


@dataclass(frozen=True)
class ParamSpace:
    kind: str
    dims: tuple[tuple[str, float, float], ...]

    @classmethod
    def make(cls, kind: str, overrides: dict | None = None) -> "ParamSpace":
        if kind == "ge":
            dims = GE_RANGES + [OWD_RANGE]
        elif kind == "uniform":
            dims = [UNIFORM_RANGE, OWD_RANGE]
        elif kind == "ge-simplified":
            dims = [GE_RANGES[0], GE_RANGES[1], OWD_RANGE]
        elif kind == "ge-simplified-het":
            dims = [
                ("p1", 0.0, 0.01),
                ("r1", 0.025, 0.5),
                ("p2", 0.0, 0.01),
                ("r2", 0.025, 0.5),
                OWD_RANGE,
            ]
        else:
            raise ValueError(f"unknown space kind {kind!r}; expected one of {SPACE_KINDS}")
        dims = [tuple(d) for d in dims]
        for name, lo, hi in list(dims):
            if overrides and name in overrides:
                new_lo, new_hi = overrides[name]
                dims[[d[0] for d in dims].index(name)] = (name, float(new_lo), float(new_hi))
        return cls(kind, tuple(dims))

    def scale(self, unit: np.ndarray) -> list[dict[str, float]]:
        points = []
        for row in unit:
            point = {}
            for (name, lo, hi), u in zip(self.dims, row):
                point[name] = lo + (hi - lo) * float(u)
            points.append(point)
        return points


def _eliminate(pool: np.ndarray, tree: cKDTree, d: float, cap: int) -> list[int]:
    """WSP pass: walk candidates in order, keep one, drop its d-ball."""
    alive = np.ones(len(pool), dtype=bool)
    kept: list[int] = []
    for i in range(len(pool)):
        if not alive[i]:
            continue
        kept.append(i)
        if len(kept) >= cap:
            break
        alive[tree.query_ball_point(pool[i], d)] = False
    return kept


def wsp_sample(space: ParamSpace, n_points: int, seed: int) -> list[dict[str, float]]:
    """Space-filling sample: quasi-random pool, then distance elimination.

    The elimination radius is bisected until the pass keeps n_points
    candidates; the survivors inherit a pairwise distance of at least the
    final radius.
    """
    if n_points < 1:
        raise ValueError("need at least one point")
    n_dims = len(space.dims)
    pool = qmc.Sobol(d=n_dims, scramble=True, seed=seed).random(POOL_SIZE)
    if n_points >= POOL_SIZE:
        raise ValueError(f"asking for more points than the {POOL_SIZE}-candidate pool")
    tree = cKDTree(pool)
    lo, hi = 0.0, math.sqrt(n_dims)
    for _ in range(60):
        mid = (lo + hi) / 2
        if len(_eliminate(pool, tree, mid, n_points)) >= n_points:
            lo = mid
        else:
            hi = mid
    kept = _eliminate(pool, tree, lo, n_points)
    assert len(kept) == n_points
    return space.scale(pool[kept])


@dataclass(frozen=True)
class Contender:
    name: str
    mode: str
    scheme: str = "rs"
    n: int = 30
    k: int = 20
    window: int = 20
    interleave: int = 1
    density: float = 1.0
    scheduler: str = "single_path"
    paths: int = 1

    @classmethod
    def from_config(cls, raw: dict) -> "Contender":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(raw) - known
        if extra:
            raise ValueError(f"unknown contender keys: {sorted(extra)}")
        return cls(**raw)


@dataclass(frozen=True)
class CampaignSpec:
    name: str
    seed: int
    n_points: int
    repeats: int
    space: ParamSpace
    contenders: tuple[Contender, ...]
    duration_s: float = 25.0
    buffer_ms: float = 100.0

    @classmethod
    def from_yaml(cls, text: str) -> "CampaignSpec":
        raw = yaml.safe_load(text)
        if not isinstance(raw, dict):
            raise ValueError("campaign file must be a mapping")
        schema = raw.get("schema")
        if schema != SCHEMA_VERSION:
            raise ValueError(f"campaign schema {schema!r} unsupported; expected {SCHEMA_VERSION}")
        space_cfg = dict(raw.get("space") or {})
        kind = space_cfg.pop("kind", "ge")
        space = ParamSpace.make(kind, space_cfg or None)
        contenders = tuple(Contender.from_config(c) for c in raw.get("contenders") or ())
        if not contenders:
            raise ValueError("campaign needs at least one contender")
        names = [c.name for c in contenders]
        if len(set(names)) != len(names):
            raise ValueError("contender names must be unique")
        return cls(
            name=str(raw.get("name", "campaign")),
            seed=int(raw.get("seed", 0)),
            n_points=int(raw.get("n_points", 120)),
            repeats=int(raw.get("repeats", 3)),
            space=space,
            contenders=contenders,
            duration_s=float(raw.get("duration_s", 25.0)),
            buffer_ms=float(raw.get("buffer_ms", 100.0)),
        )

    def csv_columns(self) -> list[str]:
        cols = ["point_id", "contender", "p1", "r1", "k1", "h1", "owd_ms"]
        if self.space.kind == "ge-simplified-het":
            cols += ["p2", "r2", "k2", "h2"]
        cols += ["buffer_ms", "fraction_received", "rebuffer_ms", "status"]
        return cols


def channel_seed(campaign_seed: int, point_idx: int, repeat: int) -> int:
    # contender never participates: paired comparisons share the erasures
    return campaign_seed * 1_000_003 + point_idx * 1_009 + repeat


def point_channels(space_kind: str, point: dict[str, float], paths: int):
    """Per-path loss model specs for the sampled point."""
    if space_kind == "ge":
        spec = GEParams(point["p"], point["r"], point["k_good"], point["h_bad"])
        return tuple([spec] * paths)
    if space_kind == "uniform":
        return tuple([point["rate"]] * paths)
    if space_kind == "ge-simplified":
        spec = GEParams(point["p"], point["r"], k_good=1.0, h_bad=0.0)
        return tuple([spec] * paths)
    if space_kind == "ge-simplified-het":
        one = GEParams(point["p1"], point["r1"], k_good=1.0, h_bad=0.0)
        two = GEParams(point["p2"], point["r2"], k_good=1.0, h_bad=0.0)
        return (one, two)[:paths] if paths == 2 else (one,)
    raise ValueError(f"unknown space kind {space_kind!r}")


def point_columns(space_kind: str, point: dict[str, float]) -> dict[str, float]:
    """CSV channel columns; uniform loss maps to its GE equivalent."""
    if space_kind == "ge":
        return {
            "p1": point["p"], "r1": point["r"],
            "k1": point["k_good"], "h1": point["h_bad"],
            "owd_ms": point["owd_ms"],
        }
    if space_kind == "uniform":
        return {
            "p1": 0.0, "r1": 0.0, "k1": 1.0 - point["rate"], "h1": 0.0,
            "owd_ms": point["owd_ms"],
        }
    if space_kind == "ge-simplified":
        return {
            "p1": point["p"], "r1": point["r"], "k1": 1.0, "h1": 0.0,
            "owd_ms": point["owd_ms"],
        }
    if space_kind == "ge-simplified-het":
        return {
            "p1": point["p1"], "r1": point["r1"], "k1": 1.0, "h1": 0.0,
            "owd_ms": point["owd_ms"],
            "p2": point["p2"], "r2": point["r2"], "k2": 1.0, "h2": 0.0,
        }
    raise ValueError(f"unknown space kind {space_kind!r}")


def build_config(
    spec: CampaignSpec, point_idx: int, point: dict[str, float], contender: Contender, repeat: int
) -> ExperimentConfig:
    return ExperimentConfig(
        mode=contender.mode,
        scheme=contender.scheme,
        code_n=contender.n,
        code_k=contender.k,
        code_window=contender.window,
        interleave=contender.interleave,
        density=contender.density,
        scheduler=contender.scheduler,
        channels=point_channels(spec.space.kind, point, contender.paths),
        owd_ms=point["owd_ms"],
        buffer_ms=spec.buffer_ms,
        profile=TrafficProfile(duration_s=spec.duration_s),
        channel_seed=channel_seed(spec.seed, point_idx, repeat),
        contender=contender.name,
    )


def _run_task(args):
    key, cfg = args
    try:
        result = run_experiment(cfg)
        m = result.metrics
        return key, (m.fraction_received, m.rebuffer_ms), None
    except Exception as exc:  # a failed run must not sink the campaign
        return key, None, f"{type(exc).__name__}: {exc}"


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    return ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0


def _format_row(cols: list[str], values: dict) -> list[str]:
    out = []
    for c in cols:
        v = values[c]
        if isinstance(v, float):
            out.append(f"{v:.6f}")
        else:
            out.append(str(v))
    return out


def run_campaign(spec: CampaignSpec, out_path: str, jobs: int = 1, echo=None) -> None:
    """Run every point x contender x repeat; write per-metric medians.

    Rows land in (point, contender) order.  Existing rows in out_path are
    kept and their runs skipped, so a killed campaign resumes where it
    stopped.
    """
    points = wsp_sample(spec.space, spec.n_points, spec.seed)
    cols = spec.csv_columns()
    done: set[tuple[str, str]] = set()
    write_header = True
    if os.path.exists(out_path) and os.path.getsize(out_path) > 0:
        write_header = False
        with open(out_path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != cols:
                raise ValueError(
                    f"existing results file has columns {reader.fieldnames}, expected {cols}"
                )
            done = {(row["point_id"], row["contender"]) for row in reader}

    fh = open(out_path, "a", newline="")
    writer = csv.writer(fh)
    if write_header:
        writer.writerow(cols)
        fh.flush()

    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for point_idx, point in enumerate(points):
            point_id = f"pt{point_idx:03d}"
            tasks = []
            for contender in spec.contenders:
                if (point_id, contender.name) in done:
                    continue
                for repeat in range(spec.repeats):
                    cfg = build_config(spec, point_idx, point, contender, repeat)
                    tasks.append(((contender.name, repeat), cfg))
            if not tasks:
                continue
            if pool is not None:
                outcomes = list(pool.map(_run_task, tasks))
            else:
                outcomes = [_run_task(t) for t in tasks]
            by_contender: dict[str, list] = {}
            errors: dict[str, list[str]] = {}
            for (name, _), metrics, err in outcomes:
                if err is None:
                    by_contender.setdefault(name, []).append(metrics)
                else:
                    errors.setdefault(name, []).append(err)
            for contender in spec.contenders:
                if (point_id, contender.name) in done:
                    continue
                values = dict(point_columns(spec.space.kind, point))
                values["point_id"] = point_id
                values["contender"] = contender.name
                values["buffer_ms"] = spec.buffer_ms
                runs = by_contender.get(contender.name, [])
                if len(runs) == spec.repeats:
                    values["fraction_received"] = _median([r[0] for r in runs])
                    values["rebuffer_ms"] = _median([r[1] for r in runs])
                    values["status"] = "ok"
                else:
                    values["fraction_received"] = float("nan")
                    values["rebuffer_ms"] = float("nan")
                    values["status"] = "failed:" + (errors.get(contender.name) or ["?"])[0]
                writer.writerow(_format_row(cols, values))
                fh.flush()
            if echo is not None:
                echo(f"{point_id} done ({point_idx + 1}/{len(points)})")
    finally:
        if pool is not None:
            pool.shutdown()
        fh.close()


def read_results(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ecdf(values: list[float]) -> list[tuple[float, float]]:
    """Step function points (value, cumulative fraction), one per unique value."""
    if not values:
        raise ValueError("ecdf of an empty sample")
    ordered = sorted(values)
    n = len(ordered)
    out = []
    for i, v in enumerate(ordered):
        if i + 1 == n or ordered[i + 1] != v:
            out.append((v, (i + 1) / n))
    return out


def ratio_table(
    rows: list[dict], contender_a: str, contender_b: str, metric: str
) -> list[tuple[str, float]]:
    """Per-point a/b ratios; 0/0 maps to 1.0 and x/0 to infinity."""
    a = {r["point_id"]: float(r[metric]) for r in rows if r["contender"] == contender_a}
    b = {r["point_id"]: float(r[metric]) for r in rows if r["contender"] == contender_b}
    if set(a) != set(b):
        raise ValueError(
            f"unpaired points: {sorted(set(a) ^ set(b))[:5]} differ between contenders"
        )
    out = []
    for pid in sorted(a):
        va, vb = a[pid], b[pid]
        if vb == 0.0:
            ratio = 1.0 if va == 0.0 else math.inf
        else:
            ratio = va / vb
        out.append((pid, ratio))
    return out
