"""Mission scenario: parameter sets, landmark schedules, file round-trip.

A scenario file is TOML with sections [power], [sar], [bs], [mission] and
[landmarks].  All keys carry their unit in the name.  The landmark section
either lists points inline or names a generator pattern; either way the
loaded Scenario holds one landmark per time slot.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

DEFAULT_SENSING_RADIUS_M = 200.0
LANDMARK_PATTERNS = ("turn", "staircase", "square", "random")


class ScenarioError(ValueError):
    """Raised for malformed or inconsistent scenario files."""


@dataclass(frozen=True)
class PowerParams:
    blade_profile_power_w: float = 3.4
    induced_power_w: float = 118.0
    tip_speed_mps: float = 60.0
    rotor_induced_velocity_mps: float = 5.4
    fuselage_drag_ratio: float = 0.3
    air_density_kg_per_m3: float = 1.225
    rotor_solidity: float = 0.02
    rotor_disc_area_m2: float = 0.5
    max_speed_mps: float = 50.0
    mass_kg: float = 2.0  # informational only, not used by the model


@dataclass(frozen=True)
class SarParams:
    bandwidth_hz: float = 1.5e8
    wavelength_m: float = 0.1
    integration_time_s: float = 1.0
    observation_angle_rad: float = math.pi / 4
    altitude_m: float = 1000.0
    min_object_distance_m: float = 20.0
    sensing_radius_m: float = DEFAULT_SENSING_RADIUS_M
    antenna_length_m: float | None = None
    antenna_height_m: float | None = None

    @property
    def effective_sensing_radius_m(self) -> float:
        """Sensing-disk radius; an azimuth antenna length overrides the default."""
        if self.antenna_length_m is not None:
            return self.wavelength_m / (2.0 * self.antenna_length_m)
        return self.sensing_radius_m


@dataclass(frozen=True)
class BsParams:
    x_m: float = 1000.0
    y_m: float = -1000.0
    height_m: float = 50.0


@dataclass(frozen=True)
class Scenario:
    power: PowerParams
    sar: SarParams
    bs: BsParams
    start_x_m: float
    start_y_m: float
    slot_duration_s: float
    slot_count: int
    landmarks: tuple  # ((x, y), ...) one per slot, length == slot_count
    landmark_spec: tuple  # frozen key/value pairs of the raw [landmarks] section

    @property
    def q0(self) -> np.ndarray:
        return np.array([self.start_x_m, self.start_y_m])

    @property
    def center_offset_m(self) -> float:
        """Distance from the platform to its sensing center: H tan(eta)."""
        return self.sar.altitude_m * math.tan(self.sar.observation_angle_rad)

    @property
    def sensing_radius_m(self) -> float:
        return self.sar.effective_sensing_radius_m

    @property
    def min_speed_mps(self) -> float:
        """Smallest speed meeting the azimuth-resolution requirement."""
        s = self.sar
        return s.wavelength_m * s.altitude_m / (
            s.integration_time_s * s.min_object_distance_m
            * math.cos(s.observation_angle_rad))

    def landmark_array(self) -> np.ndarray:
        return np.asarray(self.landmarks, dtype=float)


def generate_points(pattern, spacing_m, count, seed=0):
    """Distinct landmark positions for a named pattern, starting at (0, 0).

    turn: first ceil(count/2) points march +y, the rest continue +x.
    staircase: four alternating +y/+x legs of near-equal length.
    square: closed loop, count/4 points per side.
    random: turn-shaped walk with per-step spacing uniform in [0, spacing_m].
    """
    if pattern not in LANDMARK_PATTERNS:
        raise ScenarioError(f"unknown landmark pattern {pattern!r}")
    if count < 1:
        raise ScenarioError("landmark count must be >= 1")
    if pattern == "random":
        rng = np.random.default_rng(seed)
        steps = rng.uniform(0.0, spacing_m, size=count - 1)
    else:
        steps = np.full(count - 1, float(spacing_m))

    if pattern == "square":
        side = max(1, count // 4)
        dirs = []
        for d in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            dirs.extend([d] * side)
        dirs = dirs[: count - 1]
        while len(dirs) < count - 1:
            dirs.append((-1, 0))
    elif pattern == "staircase":
        leg = max(1, math.ceil(count / 4))
        dirs = []
        for i in range(count - 1):
            dirs.append((0, 1) if (i // leg) % 2 == 0 else (1, 0))
    else:  # turn and random share the turn shape
        n_y = math.ceil(count / 2) - 1  # steps within the +y leg
        dirs = [(0, 1)] * n_y + [(1, 0)] * (count - 1 - n_y)

    pts = np.zeros((count, 2))
    for i, ((dx, dy), h) in enumerate(zip(dirs, steps)):
        pts[i + 1] = pts[i] + np.array([dx, dy]) * h
    return pts


def expand_schedule(points, hold_slots, slot_count):
    """Per-slot landmark sequence: each point held `hold_slots` slots.

    With an explicit hold the product must fill the mission exactly.  When
    the hold is derived (slot_count // count) any remainder extends the
    final landmark.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if hold_slots is None:
        hold_slots = slot_count // n
        if hold_slots < 1:
            raise ScenarioError(
                f"{n} landmarks cannot fit in {slot_count} slots")
    elif n * hold_slots != slot_count:
        raise ScenarioError(
            f"{n} landmarks x {hold_slots} hold slots != {slot_count} mission slots")
    sched = np.repeat(points, hold_slots, axis=0)
    if len(sched) < slot_count:
        pad = np.repeat(points[-1:], slot_count - len(sched), axis=0)
        sched = np.vstack([sched, pad])
    return sched[:slot_count]


def default_landmark_schedule(spacing_m=30.0, count=30, hold_slots=20):
    """Turn-pattern schedule: the shape used by the default missions."""
    pts = generate_points("turn", spacing_m, count)
    return expand_schedule(pts, hold_slots, count * hold_slots)


def _require(cond, field, msg):
    if not cond:
        raise ScenarioError(f"{field}: {msg}")


def _landmarks_from_section(sec, slot_count):
    hold = sec.get("hold_slots")
    if hold is not None:
        hold = int(hold)
        _require(hold >= 1, "landmarks.hold_slots", "must be >= 1")
    if "points" in sec:
        pts = np.asarray(sec["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ScenarioError("landmarks.points: expected a list of [x, y] pairs")
    elif "pattern" in sec:
        pts = generate_points(
            str(sec["pattern"]),
            float(sec.get("spacing_m", 30.0)),
            int(sec.get("count", 30)),
            int(sec.get("seed", 0)),
        )
    else:
        raise ScenarioError("landmarks: need either 'points' or 'pattern'")
    return expand_schedule(pts, hold, slot_count)


def _build(power_sec, sar_sec, bs_sec, mission_sec, lm_sec):
    def pick(cls, sec, name):
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kw = {}
        for key, val in sec.items():
            if key not in fields:
                raise ScenarioError(f"[{name}] unknown key {key!r}")
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ScenarioError(f"[{name}] {key}: expected a number")
            kw[key] = float(val)
        return cls(**kw)

    power = pick(PowerParams, power_sec, "power")
    sar = pick(SarParams, sar_sec, "sar")
    bs = pick(BsParams, bs_sec, "bs")

    mission_keys = ("start_x_m", "start_y_m", "slot_duration_s", "slot_count")
    for key in mission_keys:
        if key not in mission_sec:
            raise ScenarioError(f"[mission] missing key {key!r}")
        if not isinstance(mission_sec[key], (int, float)) or isinstance(mission_sec[key], bool):
            raise ScenarioError(f"[mission] {key}: expected a number")
    for key in mission_sec:
        if key not in mission_keys:
            raise ScenarioError(f"[mission] unknown key {key!r}")
    delta = float(mission_sec["slot_duration_s"])
    slot_count = int(mission_sec["slot_count"])

    _require(power.blade_profile_power_w > 0, "power.blade_profile_power_w", "must be > 0")
    _require(power.induced_power_w > 0, "power.induced_power_w", "must be > 0")
    _require(power.tip_speed_mps > 0, "power.tip_speed_mps", "must be > 0")
    _require(power.rotor_induced_velocity_mps > 0, "power.rotor_induced_velocity_mps", "must be > 0")
    _require(power.fuselage_drag_ratio > 0, "power.fuselage_drag_ratio", "must be > 0")
    _require(power.air_density_kg_per_m3 > 0, "power.air_density_kg_per_m3", "must be > 0")
    _require(0 < power.rotor_solidity < 1, "power.rotor_solidity", "must be in (0, 1)")
    _require(power.rotor_disc_area_m2 > 0, "power.rotor_disc_area_m2", "must be > 0")
    _require(power.max_speed_mps > 0, "power.max_speed_mps", "must be > 0")
    _require(sar.bandwidth_hz > 0, "sar.bandwidth_hz", "must be > 0")
    _require(sar.wavelength_m > 0, "sar.wavelength_m", "must be > 0")
    _require(sar.integration_time_s > 0, "sar.integration_time_s", "must be > 0")
    _require(0 < sar.observation_angle_rad < math.pi / 2,
             "sar.observation_angle_rad", "must be in (0, pi/2)")
    _require(sar.altitude_m > 0, "sar.altitude_m", "must be > 0")
    _require(sar.min_object_distance_m > 0, "sar.min_object_distance_m", "must be > 0")
    _require(sar.effective_sensing_radius_m > 0, "sar.sensing_radius_m", "must be > 0")
    _require(bs.height_m >= 0, "bs.height_m", "must be >= 0")
    _require(delta > 0, "mission.slot_duration_s", "must be > 0")
    _require(slot_count >= 1, "mission.slot_count", "must be >= 1")

    landmarks = _landmarks_from_section(lm_sec, slot_count)

    sc = Scenario(
        power=power, sar=sar, bs=bs,
        start_x_m=float(mission_sec["start_x_m"]),
        start_y_m=float(mission_sec["start_y_m"]),
        slot_duration_s=delta,
        slot_count=slot_count,
        landmarks=tuple(map(tuple, landmarks.tolist())),
        landmark_spec=tuple(sorted(lm_sec.items(), key=lambda kv: kv[0])),
    )

    _require(sc.min_speed_mps <= power.max_speed_mps,
             "power.max_speed_mps",
             f"min feasible speed {sc.min_speed_mps:.4f} m/s exceeds the speed limit")

    reach = delta * power.max_speed_mps + 2.0 * sc.sensing_radius_m
    lm = sc.landmark_array()
    gaps = np.linalg.norm(np.diff(lm, axis=0), axis=1)
    bad = np.nonzero(gaps > reach)[0]
    if bad.size:
        t = int(bad[0]) + 2  # slots are 1-based; gap i is between slots i+1, i+2
        raise ScenarioError(
            f"landmark at slot {t} is unreachable: consecutive displacement "
            f"{gaps[bad[0]]:.1f} m exceeds {reach:.1f} m")
    return sc


def loads(text):
    """Parse a scenario from TOML text."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError(f"bad scenario file: {e}") from e
    for name in ("power", "sar", "bs", "mission", "landmarks"):
        if name not in doc:
            raise ScenarioError(f"missing section [{name}]")
    return _build(doc["power"], doc["sar"], doc["bs"], doc["mission"], doc["landmarks"])


def load_scenario(path):
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return loads(text)


def _toml_value(v):
    if isinstance(v, bool):
        raise ScenarioError("booleans have no place in a scenario file")
    if isinstance(v, str):
        return '"' + v.replace('"', '\\"') + '"'
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ScenarioError(f"cannot serialize {type(v).__name__}")


def dumps(sc: Scenario) -> str:
    """Serialize a Scenario to TOML text; load(dumps(sc)) == sc."""
    lines = []

    def section(name, pairs):
        lines.append(f"[{name}]")
        for k, v in pairs:
            lines.append(f"{k} = {_toml_value(v)}")
        lines.append("")

    def from_dc(obj):
        out = []
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            if v is not None:
                out.append((f.name, v))
        return out

    section("power", from_dc(sc.power))
    section("sar", from_dc(sc.sar))
    section("bs", from_dc(sc.bs))
    section("mission", [
        ("start_x_m", sc.start_x_m),
        ("start_y_m", sc.start_y_m),
        ("slot_duration_s", sc.slot_duration_s),
        ("slot_count", sc.slot_count),
    ])
    spec = []
    for k, v in sc.landmark_spec:
        if isinstance(v, (list, tuple)) and k == "points":
            spec.append((k, [list(p) for p in v]))
        else:
            spec.append((k, v))
    section("landmarks", spec)
    return "\n".join(lines)


def save_scenario(sc: Scenario, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(sc))
