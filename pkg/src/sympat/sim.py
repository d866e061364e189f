"""Fixed-step simulation of patterned and auxiliary networks.

Network states are flat vectors of length ``nN`` laid out node-major:
``X = [x_1, ..., x_N]``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .dynamics import NodeDynamics, lti
from .graph import Topology
from .protocol import CouplingProtocol, identity_protocol

DIVERGENCE_LIMIT = 1e12


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class InitialConditions:
    """Seeded random initial states.

    ``distribution`` is ``"uniform"`` (on ``[lo, hi]`` per component),
    ``"standard-normal"`` or ``"unit-circle"`` (planar states with a uniform
    angle, so it needs ``n == 2``).
    """

    distribution: str = "standard-normal"
    seed: int = 0
    lo: float = -1.0
    hi: float = 1.0

    def sample(self, node_count: int, state_dim: int) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        if self.distribution == "standard-normal":
            x = rng.standard_normal((node_count, state_dim))
        elif self.distribution == "uniform":
            x = rng.uniform(self.lo, self.hi, size=(node_count, state_dim))
        elif self.distribution == "unit-circle":
            if state_dim != 2:
                raise SimulationError("unit-circle initial conditions need a 2-dimensional node state")
            theta = rng.uniform(0.0, 2 * np.pi, size=node_count)
            x = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        else:
            raise SimulationError(f"unknown initial-condition distribution {self.distribution!r}")
        return x.reshape(-1)


@dataclass(frozen=True)
class SimConfig:
    k: float = 1.0
    t_end: float = 10.0
    h: float = 1e-3
    record_every: int = 10
    initial_conditions: InitialConditions | tuple[float, ...] = field(default_factory=InitialConditions)

    def __post_init__(self):
        if not self.h > 0:
            raise SimulationError(f"step h must be positive, got {self.h}")
        if not self.t_end >= self.h:
            raise SimulationError(f"t_end ({self.t_end}) must be at least one step h ({self.h})")
        if self.k < 0:
            raise SimulationError(f"coupling gain k must be non-negative, got {self.k}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise SimulationError(f"record_every must be a positive integer, got {self.record_every}")

    def initial_state(self, node_count: int, state_dim: int) -> np.ndarray:
        ic = self.initial_conditions
        if isinstance(ic, InitialConditions):
            return ic.sample(node_count, state_dim)
        x0 = np.array(ic, dtype=float).reshape(-1)
        if x0.size != node_count * state_dim:
            raise SimulationError(f"initial state has {x0.size} entries, expected {node_count * state_dim}")
        return x0

    def settings(self) -> dict:
        return {"k": self.k, "t_end": self.t_end, "h": self.h, "record_every": self.record_every}


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (samples, nN)
    node_count: int
    state_dim: int
    scenario_digest: str = ""
    settings: dict = field(default_factory=dict)

    def node(self, i: int) -> np.ndarray:
        n = self.state_dim
        return self.states[:, i * n:(i + 1) * n]

    def nodes(self) -> np.ndarray:
        """States reshaped to ``(samples, N, n)``."""
        return self.states.reshape(len(self.times), self.node_count, self.state_dim)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["t"] + [f"n{i + 1}_s{c + 1}" for i in range(self.node_count) for c in range(self.state_dim)]
        writer.writerow(header)
        for t, row in zip(self.times, self.states):
            writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "scenario_digest": self.scenario_digest,
            "settings": self.settings,
            "node_count": self.node_count,
            "state_dim": self.state_dim,
            "times": self.times.tolist(),
            "states": self.states.tolist(),
        }

    def json_text(self) -> str:
        return json.dumps(self.to_json())


class NetworkField:
    """Right-hand side ``F(t, X) + k (I_N kron G) M X`` of a coupled network.

    ``M`` is the protocol's coupling matrix and ``G`` the node coupling gain
    (identity, or ``B K`` for LTI agents).
    """

    def __init__(self, dynamics: NodeDynamics, protocol: CouplingProtocol, k: float):
        if protocol.state_dim != dynamics.state_dim:
            raise SimulationError(
                f"protocol acts on R^{protocol.state_dim} but {dynamics.name} has dimension {dynamics.state_dim}"
            )
        self.dynamics = dynamics
        self.N = protocol.node_count
        self.n = dynamics.state_dim
        self.k = float(k)
        self.coupling = protocol.coupling_matrix()
        gain = dynamics.coupling_gain
        self._gain = None if np.array_equal(gain, np.eye(self.n)) else gain

    def coupling_term(self, X: np.ndarray) -> np.ndarray:
        c = self.coupling @ X
        if self._gain is not None:
            c = (c.reshape(self.N, self.n) @ self._gain.T).reshape(-1)
        return self.k * c

    def __call__(self, t: float, X: np.ndarray) -> np.ndarray:
        F = self.dynamics.vector_field(t, X.reshape(self.N, self.n)).reshape(-1)
        return F + self.coupling_term(X)


class DiscreteNetworkMap(NetworkField):
    """Next-state map ``X + F(t, X) + k (I_N kron G) M X``."""

    def __call__(self, t: float, X: np.ndarray) -> np.ndarray:
        return X + super().__call__(t, X)


def _check_state(X: np.ndarray, length: int):
    if X.shape != (length,):
        raise SimulationError(f"network state has shape {X.shape}, expected ({length},)")


def rhs_pattern(t: float, X, dynamics: NodeDynamics, topology: Topology,
                protocol: CouplingProtocol, k: float) -> np.ndarray:
    """Per node: ``f(t, x_i) + k sum_j a_ij (T_ij x_j - x_i)``."""
    X = np.asarray(X, dtype=float)
    _check_state(X, topology.node_count * dynamics.state_dim)
    return NetworkField(dynamics, protocol, k)(t, X)


def rhs_lti(t: float, X, A, B, K, topology: Topology, protocol: CouplingProtocol, k: float = 1.0) -> np.ndarray:
    """Per node: ``A x_i + B K sum_j a_ij (T_ij x_j - x_i)`` (scaled by ``k``)."""
    return rhs_pattern(t, X, lti(A, B, K), topology, protocol, k)


def _diagnose(X: np.ndarray, t: float, node_count: int, what: str) -> SimulationError:
    n = X.size // node_count
    bad = np.flatnonzero(~np.isfinite(X))
    idx = int(bad[0]) if bad.size else int(np.argmax(np.abs(X)))
    return SimulationError(
        f"{what} at t={t:.6g}: node {idx // n + 1}, component {idx % n + 1} (value {X[idx]!r})"
    )


def integrate(rhs: Callable, config: SimConfig, x0, node_count: int | None = None,
              digest: str = "", jit: bool = True) -> Trajectory:
    """Classical fixed-step RK4 from ``t = 0`` to ``config.t_end``.

    Samples are kept every ``record_every`` steps plus at ``t = 0`` and at
    ``t_end``. When ``t_end`` is not a multiple of ``h`` the last step is
    shortened to land on it exactly. Built-in network fields run through a
    compiled copy of the same loop unless ``jit=False``.
    """
    X = np.array(x0, dtype=float).reshape(-1)
    N = node_count or getattr(rhs, "N", 1)
    n = X.size // N
    h = config.h
    n_full = int(math.floor(config.t_end / h + 1e-9))
    last = config.t_end - n_full * h
    if last <= 1e-9 * h:
        last = 0.0
    settings = {**config.settings(), "method": "rk4"}
    packed = _kernels.kernel_args(rhs) if jit and type(rhs) is NetworkField else None
    if packed is not None:
        times, states, status, t_fail, idx = _kernels.rk4_loop(
            *packed, X, h, n_full, last, int(config.record_every), float(config.t_end), DIVERGENCE_LIMIT)
        if status:
            what = "non-finite state" if status == 1 else "divergence (|X| > 1e12)"
            raise SimulationError(f"{what} at t={t_fail:.6g}: node {idx // n + 1}, component {idx % n + 1}")
        return Trajectory(times, states, N, n, digest, settings)
    steps = [h] * n_full + ([last] if last > 0 else [])
    times = [0.0]
    states = [X.copy()]
    t = 0.0
    for s, hs in enumerate(steps, start=1):
        half = 0.5 * hs
        k1 = rhs(t, X)
        k2 = rhs(t + half, X + half * k1)
        k3 = rhs(t + half, X + half * k2)
        k4 = rhs(t + hs, X + hs * k3)
        X = X + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = s * h if s <= n_full else config.t_end
        if not np.isfinite(X).all():
            raise _diagnose(X, t, N, "non-finite state")
        if s % config.record_every == 0 or s == len(steps):
            if np.max(np.abs(X)) > DIVERGENCE_LIMIT:
                raise _diagnose(X, t, N, "divergence (|X| > 1e12)")
            times.append(t)
            states.append(X.copy())
    return Trajectory(np.array(times), np.array(states), N, n, digest, settings)


def step_discrete(map_rhs: Callable, config: SimConfig, x0, node_count: int | None = None,
                  digest: str = "") -> Trajectory:
    """Iterate ``X(t+1) = map_rhs(t, X(t))`` for ``t_end`` steps (rounded)."""
    X = np.array(x0, dtype=float).reshape(-1)
    N = node_count or getattr(map_rhs, "N", 1)
    n = X.size // N
    steps = int(round(config.t_end))
    times = [0]
    states = [X.copy()]
    for s in range(1, steps + 1):
        X = map_rhs(s - 1, X)
        if not np.isfinite(X).all() or np.max(np.abs(X)) > DIVERGENCE_LIMIT:
            raise _diagnose(X, s, N, "divergence (|X| > 1e12)")
        if s % config.record_every == 0 or s == steps:
            times.append(s)
            states.append(X.copy())
    return Trajectory(np.array(times, dtype=float), np.array(states), N, n, digest,
                      {**config.settings(), "method": "discrete"})


def _run(dynamics: NodeDynamics, protocol: CouplingProtocol, config: SimConfig, x0, digest: str) -> Trajectory:
    if x0 is None:
        x0 = config.initial_state(protocol.node_count, dynamics.state_dim)
    if dynamics.kind == "discrete":
        return step_discrete(DiscreteNetworkMap(dynamics, protocol, config.k), config, x0,
                             protocol.node_count, digest)
    return integrate(NetworkField(dynamics, protocol, config.k), config, x0, protocol.node_count, digest)


def simulate_pattern(dynamics: NodeDynamics, topology: Topology, protocol: CouplingProtocol,
                     config: SimConfig, x0=None, digest: str = "") -> Trajectory:
    """Simulate the network coupled through ``protocol``."""
    return _run(dynamics, protocol, config, x0, digest)


def simulate_auxiliary(dynamics: NodeDynamics, topology: Topology, config: SimConfig,
                       x0=None, digest: str = "") -> Trajectory:
    """Simulate the plain diffusive network ``F(t, X) - k (L kron I_n) X``."""
    return _run(dynamics, identity_protocol(topology, dynamics.state_dim), config, x0, digest)
