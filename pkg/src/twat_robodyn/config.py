"""Scenario documents: strict YAML schema to chain, bodies, scenario and grids.

The document shape is checked against the bundled ``scenario.schema.json``;
what the schema cannot express (vector lengths against the chain, finite
numbers, table row counts) is checked while building the model objects.
Every violation raises :class:`~twat_robodyn.errors.ConfigError` carrying a
``/``-separated pointer to the offending node. Key names carry their units
(``mass_kg``, ``dt_s``, ``gravity_m_s2``); joint coordinates and generalized
forces mix radians and metres, so ``q0``, ``qd0`` and torque ``values`` carry
none. Documents shipped with the package are addressed as ``bundled:<name>``.
"""
# this_file: src/twat_robodyn/config.py

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cache
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from jsonschema import Draft202012Validator, ValidationError
from jsonschema.exceptions import best_match
from numpy.typing import NDArray
from twat_robodyn.dynamics import ModelVariant
from twat_robodyn.errors import ConfigError, InvalidInputError
from twat_robodyn.inertial import PARAMS_PER_BODY, InertialParams
from twat_robodyn.kinematics import Chain, Joint, JointKind, random_grid, uniform_grid
from twat_robodyn.particles import (
    BodyModel,
    ConstantProfile,
    ConstantVelocity,
    ExponentialProfile,
    Motion,
    Oscillation,
    Particle,
    ParticleCloud,
    Profile,
    ProfiledBody,
    RampProfile,
    RigidBody,
    SineProfile,
    Stationary,
    TabulatedBody,
    sphere_cloud,
)
from twat_robodyn.simulator import (
    ConstantTorque,
    GravityCompensation,
    PDTorque,
    Scenario,
    TableTorque,
    TorqueSource,
    ZeroTorque,
)

logger = logging.getLogger(__name__)

BUNDLED_PREFIX = "bundled:"
DEFAULT_OUTPUT = "out"
DEFAULT_GRID_POINTS = 7
DEFAULT_RESTARTS = 10
DEFAULT_SAMPLE_COUNT = 21
DEFAULT_TRIALS = 50
PRISMATIC_RANGE_M = 1.0
SCHEMA_RESOURCE = "scenario.schema.json"


@dataclass(frozen=True, eq=False)
class GridSettings:
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    points: int
    random: int
    restarts: int

    def build(self, rng: np.random.Generator) -> NDArray[np.float64]:
        """Uniform grid followed by ``random`` uniformly drawn points."""
        grid = uniform_grid(self.lower, self.upper, self.points)
        if self.random:
            grid = np.vstack([grid, random_grid(self.lower, self.upper, self.random, rng)])
        return grid


@dataclass(frozen=True, eq=False)
class VerifySettings:
    trials: int
    oracle_times: NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class Config:
    """A validated scenario document."""

    name: str
    seed: int
    chain: Chain
    bodies: tuple[BodyModel, ...]
    scenario: Scenario | None
    grid: GridSettings
    sample_times: NDArray[np.float64]
    verify: VerifySettings
    output_directory: Path


# --- schema ----------------------------------------------------------------------


@cache
def _validator() -> Draft202012Validator:
    text = resources.files("twat_robodyn").joinpath(SCHEMA_RESOURCE).read_text(encoding="utf-8")
    return Draft202012Validator(json.loads(text))


def _schema_error(error: ValidationError) -> ConfigError:
    """Translate a schema violation into a pointer at the offending key or value."""
    pointer = "".join(f"/{part}" for part in error.absolute_path)
    if error.validator == "additionalProperties":
        known = set(error.schema.get("properties", {})) if isinstance(error.schema, Mapping) else set()
        extra = sorted(str(key) for key in error.instance if key not in known)
        return ConfigError(f"{pointer}/{extra[0]}", "unknown key")
    if "propertyNames" in error.schema_path:
        return ConfigError(f"{pointer}/{error.instance}", "unknown key")
    if error.validator == "required":
        missing = sorted(set(error.validator_value) - set(error.instance))
        return ConfigError(f"{pointer}/{missing[0]}", "required key is missing")
    return ConfigError(pointer, error.message)


def _validate(data: Any) -> None:
    error = best_match(_validator().iter_errors(data))
    if error is not None:
        raise _schema_error(error)


# --- node access ---------------------------------------------------------------


class _Node:
    """A schema-checked value in the document together with its pointer."""

    def __init__(self, value: Any, pointer: str) -> None:
        self.value = value
        self.pointer = pointer

    def fail(self, message: str) -> ConfigError:
        return ConfigError(self.pointer, message)

    def child(self, key: str | int) -> _Node:
        return _Node(self.value[key], f"{self.pointer}/{key}")

    def get(self, key: str) -> _Node | None:
        return self.child(key) if isinstance(self.value, Mapping) and key in self.value else None

    def items(self) -> list[_Node]:
        return [self.child(i) for i in range(len(self.value))]

    def number(self) -> float:
        value = float(self.value)
        if not math.isfinite(value):
            raise self.fail("must be finite")
        return value

    def vector(self, size: int | None = None) -> NDArray[np.float64]:
        nodes = self.items()
        if size is not None and len(nodes) != size:
            raise self.fail(f"expected {size} numbers, got {len(nodes)}")
        return np.array([node.number() for node in nodes], dtype=float)

    def matrix(self, columns: int | None = None) -> NDArray[np.float64]:
        return np.array([row.vector(columns) for row in self.items()])


def _number(node: _Node, key: str, default: float) -> float:
    child = node.get(key)
    return default if child is None else child.number()


def _vector(node: _Node, key: str, size: int, default: NDArray[np.float64]) -> NDArray[np.float64]:
    child = node.get(key)
    return default if child is None else child.vector(size)


def _integer(node: _Node, key: str, default: int) -> int:
    child = node.get(key)
    return default if child is None else int(child.value)


# --- chain -----------------------------------------------------------------------


def _joint(node: _Node) -> Joint:
    axis = _vector(node, "axis", 3, np.array([0.0, 0.0, 1.0]))
    norm = float(np.linalg.norm(axis))
    if norm == 0.0:
        raise ConfigError(f"{node.pointer}/axis", "must not be the zero vector")
    return Joint(
        JointKind(node.value["kind"]),
        axis / norm,
        _vector(node, "offset_m", 3, np.zeros(3)),
        _vector(node, "offset_angles_rad", 3, np.zeros(3)),
    )


def _chain(node: _Node) -> Chain:
    joints = tuple(_joint(item) for item in node.child("joints").items())
    gravity = _vector(node, "gravity_m_s2", 3, np.zeros(3))
    try:
        return Chain(joints, gravity)
    except InvalidInputError as exc:
        raise ConfigError(f"{node.pointer}/joints", str(exc)) from exc


# --- bodies ----------------------------------------------------------------------


def _profile(node: _Node) -> Profile:
    if not isinstance(node.value, Mapping):
        return ConstantProfile(node.number())
    match node.value["kind"]:
        case "constant":
            return ConstantProfile(node.child("value").number())
        case "ramp":
            return RampProfile(node.child("initial").number(), node.child("slope_per_s").number())
        case "sine":
            return SineProfile(
                node.child("mean").number(),
                node.child("amplitude").number(),
                _number(node, "angular_frequency_rad_s", 1.0),
                _number(node, "phase_rad", 0.0),
            )
        case _:
            return ExponentialProfile(node.child("initial").number(), node.child("rate_per_s").number())


def _motion(node: _Node | None) -> Motion:
    if node is None:
        return Stationary()
    match node.value["kind"]:
        case "stationary":
            return Stationary()
        case "constant_velocity":
            return ConstantVelocity(node.child("velocity_m_s").vector(3))
        case _:
            return Oscillation(
                node.child("amplitude_m").vector(3),
                _number(node, "angular_frequency_rad_s", 1.0),
                _number(node, "phase_rad", 0.0),
            )


def _inertia(node: _Node | None) -> NDArray[np.float64]:
    if node is None:
        return np.zeros((3, 3))
    if isinstance(node.value[0], list):
        return node.matrix(3)
    i11, i22, i33, i12, i23, i13 = node.vector(6)
    return np.array([[i11, i12, i13], [i12, i22, i23], [i13, i23, i33]])


def _rigid(node: _Node) -> BodyModel:
    try:
        params = InertialParams(
            node.child("mass_kg").number(),
            _vector(node, "first_moment_kg_m", 3, np.zeros(3)),
            _inertia(node.get("inertia_kg_m2")),
        )
    except InvalidInputError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise node.fail(str(exc)) from exc
    return RigidBody(params)


def _sphere(node: _Node) -> BodyModel:
    radius = node.child("radius_m").number()
    return ProfiledBody(InertialParams.solid_sphere(1.0, radius), _profile(node.child("mass_kg")))


def _particle(node: _Node) -> Particle:
    return Particle(
        node.child("position_m").vector(3),
        _profile(node.child("weight_kg")),
        _number(node, "mobility", 0.0),
        _motion(node.get("motion")),
    )


def _cloud(node: _Node, rng: np.random.Generator) -> BodyModel:
    explicit = node.get("particles")
    if explicit is not None:
        return ParticleCloud(tuple(_particle(item) for item in explicit.items()))
    random_node = node.child("random")
    return sphere_cloud(
        random_node.child("radius_m").number(),
        int(random_node.value["count"]),
        _profile(random_node.child("mass_kg")),
        rng,
        mobility=_number(random_node, "mobility", 0.0),
        motion=_motion(random_node.get("motion")),
    )


def _table(node: _Node) -> BodyModel:
    times = node.child("times_s").vector()
    rows = node.child("params").matrix(PARAMS_PER_BODY)
    if rows.shape[0] != times.size:
        raise node.child("params").fail(f"expected {times.size} rows, got {rows.shape[0]}")
    try:
        return TabulatedBody(times, tuple(InertialParams.from_vector(row) for row in rows))
    except InvalidInputError as exc:
        raise node.fail(str(exc)) from exc


def _body(node: _Node, rng: np.random.Generator) -> BodyModel:
    kind = str(next(iter(node.value)))
    child = node.child(kind)
    match kind:
        case "rigid":
            return _rigid(child)
        case "sphere":
            return _sphere(child)
        case "cloud":
            return _cloud(child, rng)
        case _:
            return _table(child)


# --- scenario --------------------------------------------------------------------


def _source(node: _Node | None, n_dof: int) -> TorqueSource:
    if node is None:
        return ZeroTorque()
    match node.value["kind"]:
        case "zero":
            return ZeroTorque()
        case "constant":
            return ConstantTorque(node.child("values").vector(n_dof))
        case "table":
            try:
                return TableTorque(node.child("times_s").vector(), node.child("values").matrix(n_dof))
            except InvalidInputError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise node.fail(str(exc)) from exc
        case "pd":
            return PDTorque(
                node.child("setpoint").vector(n_dof),
                node.child("kp").number(),
                node.child("kd").number(),
                bool(node.value.get("compensate_gravity", False)),
            )
        case _:
            return GravityCompensation()


def _scenario(node: _Node, chain: Chain, bodies: tuple[BodyModel, ...], name: str) -> Scenario:
    n = chain.n_dof
    try:
        return Scenario(
            chain=chain,
            bodies=bodies,
            q0=_vector(node, "q0", n, np.zeros(n)),
            qd0=_vector(node, "qd0", n, np.zeros(n)),
            t0=_number(node, "t0_s", 0.0),
            t_end=node.child("t_end_s").number(),
            dt=node.child("dt_s").number(),
            output_every=_integer(node, "output_every", 1),
            variant=ModelVariant(node.value.get("variant", ModelVariant.GENERALIZED.value)),
            torque=_source(node.get("torque"), n),
            disturbance=_source(node.get("disturbance"), n),
            name=name,
        )
    except InvalidInputError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise node.fail(str(exc)) from exc


def _default_range(chain: Chain) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    lower, upper = [], []
    for joint in chain.joints:
        if joint.kind is JointKind.REVOLUTE:
            lower.append(-math.pi)
            upper.append(math.pi)
        elif joint.kind is JointKind.PRISMATIC:
            lower.append(-PRISMATIC_RANGE_M)
            upper.append(PRISMATIC_RANGE_M)
    return np.array(lower), np.array(upper)


def _grid(node: _Node | None, chain: Chain) -> GridSettings:
    lower, upper = _default_range(chain)
    if node is None:
        return GridSettings(lower, upper, DEFAULT_GRID_POINTS, 0, DEFAULT_RESTARTS)
    lower = _vector(node, "lower", chain.n_dof, lower)
    upper = _vector(node, "upper", chain.n_dof, upper)
    if np.any(upper < lower):
        raise ConfigError(f"{node.pointer}/upper", "must not be below lower")
    return GridSettings(
        lower,
        upper,
        _integer(node, "points", DEFAULT_GRID_POINTS),
        _integer(node, "random", 0),
        _integer(node, "restarts", DEFAULT_RESTARTS),
    )


def _samples(node: _Node | None, scenario: Scenario | None) -> NDArray[np.float64]:
    start = scenario.t0 if scenario else 0.0
    end = scenario.t_end if scenario else 1.0
    count = DEFAULT_SAMPLE_COUNT
    if node is not None:
        explicit = node.get("times_s")
        if explicit is not None:
            times = explicit.vector()
            if np.any(np.diff(times) <= 0.0):
                raise explicit.fail("must be strictly increasing")
            return times
        start = _number(node, "t_start_s", start)
        end = _number(node, "t_end_s", end)
        count = _integer(node, "count", count)
        if end < start:
            raise ConfigError(f"{node.pointer}/t_end_s", "must not be before t_start_s")
    return np.linspace(start, end, count) if count > 1 else np.array([start])


def _verify(node: _Node | None, samples: NDArray[np.float64]) -> VerifySettings:
    # interior sample times keep the oracle clear of table ends
    interior = samples[1:-1] if samples.size > 2 else samples
    trials, times = DEFAULT_TRIALS, interior[:: max(1, interior.size // 3)][:3]
    if node is not None:
        trials = _integer(node, "trials", trials)
        explicit = node.get("oracle_times_s")
        times = explicit.vector() if explicit else times
    return VerifySettings(trials, times)


# --- entry points ------------------------------------------------------------------


def bundled_names() -> list[str]:
    """Names of the scenario documents shipped with the package."""
    folder = resources.files("twat_robodyn").joinpath("scenarios")
    return sorted(p.name.removesuffix(".yaml") for p in folder.iterdir() if p.name.endswith(".yaml"))


def read_document(source: str | Path) -> tuple[str, Any]:
    """Read YAML from a path or ``bundled:<name>``; returns (name, data)."""
    text_source = str(source)
    try:
        if text_source.startswith(BUNDLED_PREFIX):
            name = text_source.removeprefix(BUNDLED_PREFIX)
            resource = resources.files("twat_robodyn").joinpath("scenarios", f"{name}.yaml")
            if not resource.is_file():
                known = ", ".join(bundled_names())
                msg = f"no bundled scenario {name!r}; known: {known}"
                raise ConfigError("/", msg)
            text = resource.read_text(encoding="utf-8")
        else:
            path = Path(text_source)
            name = path.stem
            text = path.read_text(encoding="utf-8")
        return name, yaml.safe_load(text)
    except OSError as exc:
        msg = f"cannot read {text_source}: {exc.strerror or exc}"
        raise ConfigError("/", msg) from exc
    except yaml.YAMLError as exc:
        msg = f"invalid YAML in {text_source}: {exc}"
        raise ConfigError("/", msg) from exc


def parse_config(data: Any, *, name: str = "config", seed: int | None = None) -> Config:
    """Validate a loaded document and build the model objects it describes."""
    _validate(data)
    root = _Node(data, "")
    base_seed = _integer(root, "seed", 0)
    seed_value = base_seed if seed is None else int(seed)
    rng = np.random.default_rng(seed_value)
    chain = _chain(root.child("chain"))
    body_nodes = root.child("bodies").items()
    if len(body_nodes) != chain.n_bodies:
        raise root.child("bodies").fail(f"chain has {chain.n_bodies} joints, got {len(body_nodes)} bodies")
    bodies = tuple(_body(node, rng) for node in body_nodes)
    scenario_node = root.get("scenario")
    scenario = _scenario(scenario_node, chain, bodies, name) if scenario_node is not None else None
    samples = _samples(root.get("samples"), scenario)
    output = root.get("output")
    directory = DEFAULT_OUTPUT if output is None else str(output.value.get("directory", DEFAULT_OUTPUT))
    config = Config(
        name=name,
        seed=seed_value,
        chain=chain,
        bodies=bodies,
        scenario=scenario,
        grid=_grid(root.get("grid"), chain),
        sample_times=samples,
        verify=_verify(root.get("verify"), samples),
        output_directory=Path(directory),
    )
    logger.info("loaded config %s: %d bodies, %d coordinates, seed %d", name, chain.n_bodies, chain.n_dof, seed_value)
    return config


def load_config(source: str | Path, *, seed: int | None = None) -> Config:
    """Read and validate a scenario document."""
    name, data = read_document(source)
    return parse_config(data, name=name, seed=seed)


__all__ = [
    "BUNDLED_PREFIX",
    "Config",
    "GridSettings",
    "VerifySettings",
    "bundled_names",
    "load_config",
    "parse_config",
    "read_document",
]
