"""Scenario bundle and JSON loading with validation and documented defaults."""
from __future__ import annotations

import copy
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import jsonschema

from .channel import ChannelParams
from .sensing import SensingParams
from .world import KinematicsParams, TaskSpec, WorldConfig, random_layout

log = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """Invalid scenario file or parameter set."""


# JSON key -> dataclass field, per section
WORLD_KEYS = {"horizon_slots": "horizon_T", "slot_duration_s": "slot_duration",
              "bs_height_m": "bs_height", "num_tasks": "num_tasks_N", "rng_seed": "rng_seed",
              "layout_radius_m": "layout_radius"}
KIN_KEYS = {"v_max_mps": "v_max", "h_min_m": "h_min", "h_max_m": "h_max", "v_bar_mps": "v_bar"}
CHANNEL_KEYS = {"carrier_freq_hz": "carrier_freq", "light_speed_mps": "light_speed",
                "eta_los_db": "eta_los", "eta_nlos_db": "eta_nlos", "alpha": "alpha", "beta": "beta",
                "tx_power_w": "tx_power", "noise_power_w": "noise_power", "bandwidth_hz": "bandwidth",
                "snr_threshold": "snr_threshold", "min_bs_distance_m": "min_bs_distance",
                "fd_step_m": "fd_step"}
SENSING_KEYS = {"xi": "xi", "t0_slots": "t0", "data_per_attempt_bits": "data_per_attempt", "p_th": "p_th"}


@dataclass(frozen=True)
class Scenario:
    world: WorldConfig = field(default_factory=WorldConfig)
    kinematics: KinematicsParams = field(default_factory=KinematicsParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    sensing: SensingParams = field(default_factory=SensingParams)
    tasks: tuple = ()
    experiment: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.world.horizon_T

    @property
    def v_step(self) -> float:
        return self.kinematics.v_max * self.world.slot_duration

    @property
    def v_model(self) -> float:
        return self.kinematics.average_speed * self.world.slot_duration

    def task(self, task_id: int) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(f"no task with id {task_id}")

    def with_horizon(self, T: int) -> "Scenario":
        return self.replace(world=_replace(self.world, horizon_T=T))

    def replace(self, **changes) -> "Scenario":
        return _replace(self, **changes)

    def digest(self) -> str:
        blob = json.dumps(to_json(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _replace(obj, **changes):
    import dataclasses
    return dataclasses.replace(obj, **changes)


def make_scenario(world: WorldConfig | None = None, kinematics: KinematicsParams | None = None,
                  channel: ChannelParams | None = None, sensing: SensingParams | None = None,
                  tasks=None, experiment: dict | None = None, layout_seed: int | None = None) -> Scenario:
    """Assemble a scenario; tasks default to a seeded random layout."""
    world = world or WorldConfig()
    kinematics = kinematics or KinematicsParams()
    channel = channel or ChannelParams(bs_height=world.bs_height)
    if channel.bs_height != world.bs_height:
        channel = _replace(channel, bs_height=world.bs_height)
    if tasks is None:
        import numpy as np
        seed = world.rng_seed if layout_seed is None else layout_seed
        tasks = random_layout(world, np.random.default_rng(seed))
    tasks = tuple(tasks)
    if world.num_tasks_N != len(tasks):
        world = _replace(world, num_tasks_N=len(tasks))
    ids = [t.id for t in tasks]
    if sorted(ids) != list(range(1, len(ids) + 1)):
        raise ScenarioError("task ids must be 1..N")
    return Scenario(world, kinematics, channel, sensing or SensingParams(), tasks,
                    dict(experiment or {}))


def schema() -> dict:
    text = resources.files("uavaoi").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def _section(raw: dict, key: str, mapping: dict, cls):
    given = raw.get(key, {})
    kwargs = {}
    defaults = {f.name: f.default for f in fields(cls)}
    for jkey, attr in mapping.items():
        if jkey in given:
            kwargs[attr] = given[jkey]
        else:
            log.info("default %s.%s = %r", key, jkey, defaults[attr])
    return kwargs


def from_json(raw: dict) -> Scenario:
    try:
        jsonschema.validate(raw, schema())
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {exc.message}") from None
    try:
        world = WorldConfig(**_section(raw, "world", WORLD_KEYS, WorldConfig))
        kin = KinematicsParams(**_section(raw, "kinematics", KIN_KEYS, KinematicsParams))
        ch_kwargs = _section(raw, "channel", CHANNEL_KEYS, ChannelParams)
        ch = ChannelParams(bs_height=world.bs_height, **ch_kwargs)
        sp = SensingParams(**_section(raw, "sensing", SENSING_KEYS, SensingParams))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    tasks = None
    if "tasks" in raw:
        tasks = [TaskSpec(int(t["id"]), float(t["x"]), float(t["y"])) for t in raw["tasks"]]
    else:
        log.info("tasks absent: %d targets drawn in a %.0f m disc (seed %d)",
                 world.num_tasks_N, world.layout_radius, world.rng_seed)
    return make_scenario(world, kin, ch, sp, tasks, raw.get("experiment", {}))


def load_scenario(path) -> Scenario:
    path = Path(path)
    text = path.read_text()
    if not text.strip():
        raise ScenarioError(f"{path}: empty scenario file")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: parse error: {exc}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return from_json(raw)


def to_json(sc: Scenario) -> dict:
    def dump(obj, mapping):
        return {j: getattr(obj, a) for j, a in mapping.items() if getattr(obj, a) is not None}
    return {
        "world": dump(sc.world, WORLD_KEYS),
        "kinematics": dump(sc.kinematics, KIN_KEYS),
        "channel": dump(sc.channel, CHANNEL_KEYS),
        "sensing": dump(sc.sensing, SENSING_KEYS),
        "tasks": [{"id": t.id, "x": t.x, "y": t.y} for t in sc.tasks],
        "experiment": copy.deepcopy(sc.experiment),
    }
