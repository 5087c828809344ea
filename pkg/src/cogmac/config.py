"""Experiment configuration: a JSON key-value tree per experiment.

The grammar is plain JSON (UTF-8, object root).  Required keys depend on
the scenario; ``parse_config`` validates everything up front and reports
the offending field.  ``serialize_config`` emits a canonical form (sorted
keys, two-space indent) so a parsed document round-trips to a semantically
identical file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError
from .model import SensingModel, SlottedChannelParams, UnslottedChannelParams

SCENARIOS = ("slotted_full", "slotted_partial", "unslotted_multi",
             "unslotted_single")

_SLOTTED_DEFAULT_POLICIES = {
    "slotted_full": ("full_sensing_informed", "full_sensing_blind"),
    "slotted_partial": ("whittle_informed", "whittle_blind"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description plus the raw document it came from."""

    scenario: str
    seed: int
    runs: int
    out_dir: str
    raw: dict = field(repr=False)

    # slotted scenarios
    slotted_channels: tuple[SlottedChannelParams, ...] | None = None
    policies: tuple[str, ...] | None = None
    L: int | None = None
    horizon_slots: int | None = None
    learning_period: int = 0
    whittle_discount: float = 0.999
    access_gated_counting: bool = False

    # un-slotted scenarios
    unslotted_channels: tuple[UnslottedChannelParams, ...] | None = None
    sensing: SensingModel | None = None
    sensing_time: float = 0.0
    horizon_time: float | None = None
    interference_max: tuple[float, ...] | None = None
    rts_cts_duration: float = 0.0
    overhead_mode: str = "aggregate"
    optimizer_starts: int = 4


def _require(doc: dict, key: str, kind, where: str = "config"):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(
            f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, "
            f"got {type(value).__name__}")
    return value


def _sensing_from(doc: dict) -> SensingModel:
    block = doc.get("sensing", {})
    if not isinstance(block, dict):
        raise ConfigError("sensing: expected an object")
    try:
        if "snr" in block or "snr_db" in block:
            return SensingModel.from_detector(
                p_fa=float(block.get("p_fa", 0.0)),
                p_md=float(block.get("p_md", 0.0)),
                sampling_freq=float(block["sampling_freq"]),
                snr=block.get("snr"), snr_db=block.get("snr_db"))
        return SensingModel(p_fa=float(block.get("p_fa", 0.0)),
                            p_md=float(block.get("p_md", 0.0)),
                            sensing_time=float(block.get("sensing_time", 0.0)))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"sensing: {exc}") from exc


def _slotted_channels_from(doc: dict) -> tuple[SlottedChannelParams, ...]:
    if "channels" in doc:
        out = []
        for k, ch in enumerate(doc["channels"]):
            try:
                out.append(SlottedChannelParams(
                    p01=float(ch["p01"]), p11=float(ch["p11"]),
                    bandwidth=float(ch.get("bandwidth", 1.0))))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"channels[{k}]: {exc}") from exc
        return tuple(out)
    if "random_channels" in doc:
        block = doc["random_channels"]
        try:
            count = int(block["count"])
            low = float(block.get("low", 0.1))
            high = float(block.get("high", 0.9))
            seed = int(block["seed"])
            iid = bool(block.get("iid", False))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"random_channels: {exc}") from exc
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xC4A)))
        draws = rng.uniform(low, high, size=(count, 2))
        if iid:
            return tuple(SlottedChannelParams(p01=float(p), p11=float(p))
                         for p, _ in draws)
        return tuple(SlottedChannelParams(p01=float(a), p11=float(b))
                     for a, b in draws)
    raise ConfigError("need either 'channels' or 'random_channels'")


def _unslotted_channels_from(doc: dict) -> tuple[UnslottedChannelParams, ...]:
    out = []
    for k, ch in enumerate(_require(doc, "channels", list)):
        try:
            out.append(UnslottedChannelParams(
                lambda_free=float(ch["lambda_free"]),
                lambda_busy=float(ch["lambda_busy"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"channels[{k}]: {exc}") from exc
    return tuple(out)


def parse_config(path: str | Path) -> ExperimentConfig:
    """Load, validate and normalize one experiment document."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    scenario = _require(doc, "scenario", str)
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: expected one of {SCENARIOS}, got {scenario!r}")
    seed = int(doc.get("seed", 0))
    runs = int(doc.get("runs", 1))
    if runs < 1:
        raise ConfigError("runs: must be >= 1")
    out_dir = str(doc.get("out_dir", "results"))
    sensing = _sensing_from(doc)

    if scenario in ("slotted_full", "slotted_partial"):
        channels = _slotted_channels_from(doc)
        n = len(channels)
        horizon = _require(doc, "horizon", int, scenario)
        policies = tuple(doc.get("policies", _SLOTTED_DEFAULT_POLICIES[scenario]))
        from .slotted.sim import POLICIES as KNOWN
        for p in policies:
            if p not in KNOWN:
                raise ConfigError(f"policies: unknown policy {p!r}")
        if scenario == "slotted_full":
            L = int(doc.get("L", n))
            if L != n:
                raise ConfigError("slotted_full: L must equal the channel count")
        else:
            L = int(doc.get("L", 1))
            if not 1 <= L <= n:
                raise ConfigError(f"L: need 1 <= L <= {n}")
        return ExperimentConfig(
            scenario=scenario, seed=seed, runs=runs, out_dir=out_dir, raw=doc,
            slotted_channels=channels, policies=policies, L=L,
            horizon_slots=horizon,
            learning_period=int(doc.get("learning_period", 0)),
            whittle_discount=float(doc.get("whittle_discount", 0.999)),
            access_gated_counting=bool(doc.get("access_gated_counting", False)),
            sensing=sensing)

    channels = _unslotted_channels_from(doc)
    n = len(channels)
    horizon = float(_require(doc, "horizon", (int, float), scenario))
    if "interference_max" in doc:
        imax = tuple(float(x) for x in doc["interference_max"])
        if len(imax) != n:
            raise ConfigError("interference_max: one entry per channel required")
    elif "interference_max_fraction" in doc:
        frac = float(doc["interference_max_fraction"])
        imax = tuple(frac * c.u for c in channels)
    else:
        raise ConfigError(
            "need 'interference_max' or 'interference_max_fraction'")
    sensing_time = float(doc.get("sensing_time", sensing.sensing_time))
    return ExperimentConfig(
        scenario=scenario, seed=seed, runs=runs, out_dir=out_dir, raw=doc,
        unslotted_channels=channels, sensing=sensing,
        sensing_time=sensing_time, horizon_time=horizon,
        interference_max=imax,
        rts_cts_duration=float(doc.get("rts_cts_duration", 0.0)),
        overhead_mode=str(doc.get("overhead_mode", "aggregate")),
        optimizer_starts=int(doc.get("optimizer_starts", 4)))


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical form of the config's source document."""
    return json.dumps(config.raw, indent=2, sort_keys=True) + "\n"
