"""Motion-primitive library: constant forward speed with sinusoidal yaw rate.

Each primitive follows Dubins-car kinematics with speed V and yaw rate
psi_dot(t) = A*sin(pi*t/T), so yaw rate is zero at both endpoints and
primitives chain with continuous yaw rate. The closed-form heading is
psi(t) = (A*T/pi)*(1 - cos(pi*t/T)); positions are integrated with
fixed-step RK4. Waypoints are planar in the body frame (z = 0).
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .geometry import Pose


@dataclasses.dataclass(frozen=True)
class PrimitiveSpec:
    speed: float
    yaw_amplitude: float
    horizon: float
    n_waypoints: int

    def __post_init__(self):
        if self.speed <= 0 or self.horizon <= 0 or self.n_waypoints < 2:
            raise ValueError("invalid primitive spec")

    @property
    def dt(self) -> float:
        return self.horizon / (self.n_waypoints - 1)


@dataclasses.dataclass(frozen=True)
class Primitive:
    spec: PrimitiveSpec
    waypoints: np.ndarray  # (n, 3), body frame, z = 0
    setpoints: np.ndarray  # (n, 2): forward speed, yaw rate

    def heading_at(self, t: float) -> float:
        """Closed-form heading change accumulated by time t."""
        A, T = self.spec.yaw_amplitude, self.spec.horizon
        return (A * T / np.pi) * (1.0 - np.cos(np.pi * t / T))


@dataclasses.dataclass(frozen=True)
class PrimitiveLibrary:
    primitives: tuple
    speed: float
    max_yaw_rate: float
    horizon: float
    n_waypoints: int

    def __len__(self):
        return len(self.primitives)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.spec.yaw_amplitude for p in self.primitives])


def net_heading_change(A: float, T: float) -> float:
    return 2.0 * A * T / np.pi


def generate_primitive(spec: PrimitiveSpec, substeps: int = 8) -> Primitive:
    """Integrate one primitive with fixed-step RK4 at dt/substeps."""
    V, A, T, n = spec.speed, spec.yaw_amplitude, spec.horizon, spec.n_waypoints
    h = spec.dt / substeps

    def deriv(t, state):
        psi = state[2]
        return np.array([V * np.cos(psi), V * np.sin(psi), A * np.sin(np.pi * t / T)])

    waypoints = np.zeros((n, 3))
    state = np.zeros(3)
    t = 0.0
    for i in range(1, n):
        for _ in range(substeps):
            k1 = deriv(t, state)
            k2 = deriv(t + h / 2, state + h / 2 * k1)
            k3 = deriv(t + h / 2, state + h / 2 * k2)
            k4 = deriv(t + h, state + h * k3)
            state = state + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        waypoints[i, 0] = state[0]
        waypoints[i, 1] = state[1]
    times = np.arange(n) * spec.dt
    setpoints = np.stack([np.full(n, V), A * np.sin(np.pi * times / T)], axis=-1)
    # endpoints of the sinusoid are exactly zero
    setpoints[0, 1] = 0.0
    setpoints[-1, 1] = 0.0
    return Primitive(spec, waypoints, setpoints)


def generate_library(
    speed: float = 0.5,
    max_yaw_rate: float = 0.7,
    count: int = 7,
    horizon: float = 1.0,
    n_waypoints: int = 21,
) -> PrimitiveLibrary:
    """Amplitudes evenly spaced over [-max_yaw_rate, max_yaw_rate], ascending."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if max_yaw_rate < 0:
        raise ValueError("max_yaw_rate must be >= 0")
    if count == 1:
        amps = np.array([0.0])
    else:
        amps = np.linspace(-max_yaw_rate, max_yaw_rate, count)
    prims = tuple(
        generate_primitive(PrimitiveSpec(speed, float(a), horizon, n_waypoints))
        for a in amps
    )
    return PrimitiveLibrary(prims, speed, max_yaw_rate, horizon, n_waypoints)


def to_world(p: Primitive, pose: Pose, flight_height: float | None = None) -> np.ndarray:
    """Body-frame waypoints rotated by current yaw, translated, z = flight height."""
    c, s = np.cos(pose.yaw), np.sin(pose.yaw)
    wp = p.waypoints
    out = np.empty_like(wp)
    out[:, 0] = c * wp[:, 0] - s * wp[:, 1] + pose.translation[0]
    out[:, 1] = s * wp[:, 0] + c * wp[:, 1] + pose.translation[1]
    out[:, 2] = pose.translation[2] if flight_height is None else flight_height
    return out


def mirror_symmetry_check(lib: PrimitiveLibrary, tol: float = 1e-9) -> bool:
    """Primitive with amplitude -A must be the y-mirror of amplitude +A.

    Amplitudes are sorted ascending, so primitive i pairs with primitive
    n-1-i (amplitudes match by sign within tol rather than bit-exactly,
    since the evenly spaced grid is not exactly symmetric in floats).
    """
    n = len(lib.primitives)
    for i, p in enumerate(lib.primitives):
        q = lib.primitives[n - 1 - i]
        if abs(p.spec.yaw_amplitude + q.spec.yaw_amplitude) > tol:
            return False
        mirrored = p.waypoints * np.array([1.0, -1.0, 1.0])
        if np.max(np.abs(mirrored - q.waypoints)) > tol:
            return False
    return True


def save_library(lib: PrimitiveLibrary, path) -> None:
    doc = {
        "speed": lib.speed,
        "max_yaw_rate": lib.max_yaw_rate,
        "horizon": lib.horizon,
        "n_waypoints": lib.n_waypoints,
        "primitives": [
            {
                "yaw_amplitude": p.spec.yaw_amplitude,
                "waypoints": p.waypoints.tolist(),
                "setpoints": p.setpoints.tolist(),
            }
            for p in lib.primitives
        ],
    }
    with open(path, "w", newline="\n") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def load_library(path) -> PrimitiveLibrary:
    with open(path) as f:
        doc = json.load(f)
    prims = tuple(
        Primitive(
            PrimitiveSpec(doc["speed"], d["yaw_amplitude"], doc["horizon"], doc["n_waypoints"]),
            np.array(d["waypoints"]),
            np.array(d["setpoints"]),
        )
        for d in doc["primitives"]
    )
    return PrimitiveLibrary(
        prims, doc["speed"], doc["max_yaw_rate"], doc["horizon"], doc["n_waypoints"]
    )
