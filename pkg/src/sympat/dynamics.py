"""Built-in node vector fields, discrete maps and local controllers.

Every field is evaluated on arrays whose last axis is the node state, so the
same code serves a single node ``x`` of shape ``(n,)`` and a whole network
``X`` of shape ``(N, n)``.

For ``kind="discrete"`` the registry field is read as an increment: the node
map is ``x -> x + field(t, x)``. A zero field therefore gives the identity
map, which is what a discrete-time simple integrator needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Mapping

import numpy as np


class DynamicsError(ValueError):
    pass


@dataclass(frozen=True)
class ControlLaw:
    """Local state feedback ``v(x)`` added to the intrinsic field."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return _CONTROLLERS[self.name](self.params, x)


def _pitchfork_law(p, x):
    return p["alpha"] * x - p["beta"] * x * x * x


_CONTROLLERS: dict[str, Callable] = {"pitchfork": _pitchfork_law}
_CONTROLLER_DEFAULTS: dict[str, dict[str, float]] = {"pitchfork": {"alpha": 5.0, "beta": 1.0}}


def pitchfork(alpha: float = 5.0, beta: float = 1.0) -> ControlLaw:
    """Componentwise cubic law ``alpha*x - beta*x**3``."""
    return ControlLaw("pitchfork", {"alpha": float(alpha), "beta": float(beta)})


def make_controller(name: str, params: Mapping[str, float] | None = None) -> ControlLaw:
    if name not in _CONTROLLERS:
        raise DynamicsError(f"unknown controller {name!r}; known: {sorted(_CONTROLLERS)}")
    merged = dict(_CONTROLLER_DEFAULTS[name])
    for key, value in (params or {}).items():
        if key not in merged:
            raise DynamicsError(f"controller {name!r} has no parameter {key!r}")
        merged[key] = float(value)
    return ControlLaw(name, merged)


@dataclass(frozen=True)
class NodeDynamics:
    """Intrinsic node dynamics ``f(t, x)`` plus an optional local controller.

    ``params`` holds floats, or nested tuples for the matrices of the linear
    entries (``A``, ``B``, ``K``).
    """

    name: str
    state_dim: int
    params: Mapping[str, Any] = field(default_factory=dict)
    kind: str = "continuous"
    controller: ControlLaw | None = None

    def __post_init__(self):
        if self.name not in _FIELDS:
            raise DynamicsError(f"unknown dynamics {self.name!r}; known: {sorted(_FIELDS)}")
        if self.kind not in ("continuous", "discrete"):
            raise DynamicsError(f"kind must be 'continuous' or 'discrete', got {self.kind!r}")

    @cached_property
    def _arrays(self) -> dict[str, Any]:
        return {k: (np.asarray(v, dtype=float) if isinstance(v, (tuple, list)) else v)
                for k, v in self.params.items()}

    def vector_field(self, t: float, x: np.ndarray) -> np.ndarray:
        """Closed-loop field on the last axis of ``x`` (no shape checks)."""
        out = _FIELDS[self.name](self._arrays, t, x)
        if self.controller is not None:
            out = out + self.controller(x)
        return out

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return evaluate(self, t, x)

    def system_matrix(self) -> np.ndarray | None:
        """State matrix ``A`` when the open-loop field is ``A x``, else None."""
        if self.name in ("lti", "integrator_chain"):
            return self._arrays["A"]
        if self.name == "harmonic":
            w = self._arrays["omega"]
            return np.array([[0.0, -w], [w, 0.0]])
        if self.name in ("zero", "simple_integrator"):
            return np.zeros((self.state_dim, self.state_dim))
        return None

    @cached_property
    def coupling_gain(self) -> np.ndarray:
        """Matrix applied to the neighbour sum: ``B K`` for LTI agents, else I."""
        if self.name in ("lti", "integrator_chain"):
            return self._arrays["B"] @ self._arrays["K"]
        return np.eye(self.state_dim)

    def with_params(self, **updates) -> "NodeDynamics":
        merged = dict(self.params)
        merged.update(updates)
        return NodeDynamics(self.name, self.state_dim, merged, self.kind, self.controller)


def evaluate(d: NodeDynamics, t: float, x) -> np.ndarray:
    """Evaluate ``f(t, x) + v(x)`` for a single node state."""
    x = np.asarray(x, dtype=float)
    if x.shape != (d.state_dim,):
        raise DynamicsError(f"{d.name} expects a state of length {d.state_dim}, got shape {x.shape}")
    return d.vector_field(t, x)


def _fn_field(p, t, x):
    v = x[..., 0]
    w = x[..., 1]
    c = p["c"]
    dv = c * (v + w - v * v * v / 3.0 + p["I"])
    dw = -(v - p["a"] + p["b"] * w) / c
    return np.stack([dv, dw], axis=-1)


def _linear_field(p, t, x):
    return x @ p["A"].T


def _harmonic_field(p, t, x):
    w = p["omega"]
    return np.stack([-w * x[..., 1], w * x[..., 0]], axis=-1)


def _zero_field(p, t, x):
    return np.zeros_like(x)


_FIELDS: dict[str, Callable] = {
    "fitzhugh_nagumo": _fn_field,
    "lti": _linear_field,
    "integrator_chain": _linear_field,
    "harmonic": _harmonic_field,
    "zero": _zero_field,
    "simple_integrator": _zero_field,
}


def _matrix(m) -> tuple[tuple[float, ...], ...]:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return tuple(tuple(float(v) for v in row) for row in m)


def fitzhugh_nagumo(a: float = 0.0, b: float = 0.8, c: float = 3.0, I_const: float = 0.0,
                    controller: ControlLaw | None = None) -> NodeDynamics:
    """FitzHugh-Nagumo oscillator with state ``(v, w)`` and constant stimulus."""
    params = {"a": float(a), "b": float(b), "c": float(c), "I": float(I_const)}
    return NodeDynamics("fitzhugh_nagumo", 2, params, controller=controller)


def integrator_chain_matrices(n: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.diag(np.ones(n - 1), k=1)
    b = np.zeros((n, 1))
    b[-1, 0] = 1.0
    return a, b


def integrator_chain(n: int, K=None) -> NodeDynamics:
    """n-th order integrator ``A`` (superdiagonal ones), ``B = e_n``.

    ``K`` defaults to a row of ones.
    """
    if n < 1:
        raise DynamicsError("integrator chain order must be >= 1")
    a, b = integrator_chain_matrices(n)
    k = np.ones((1, n)) if K is None else np.atleast_2d(np.asarray(K, dtype=float))
    if k.shape != (1, n):
        raise DynamicsError(f"K must be 1x{n}, got {k.shape}")
    return NodeDynamics("integrator_chain", n, {"A": _matrix(a), "B": _matrix(b), "K": _matrix(k)})


def lti(A, B, K) -> NodeDynamics:
    """Linear agent ``A x + B u`` driven through gain ``K``."""
    a = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(B, dtype=float).reshape(a.shape[0], -1)
    k = np.atleast_2d(np.asarray(K, dtype=float))
    n = a.shape[0]
    if a.shape != (n, n):
        raise DynamicsError(f"A must be square, got {a.shape}")
    if k.shape != (b.shape[1], n):
        raise DynamicsError(f"K must be {b.shape[1]}x{n}, got {k.shape}")
    return NodeDynamics("lti", n, {"A": _matrix(a), "B": _matrix(b), "K": _matrix(k)})


def simple_integrator(kind: str = "continuous") -> NodeDynamics:
    return NodeDynamics("simple_integrator", 1, {}, kind=kind)


def harmonic(omega: float = 1.0) -> NodeDynamics:
    return NodeDynamics("harmonic", 2, {"omega": float(omega)})


def zero(n: int = 1, controller: ControlLaw | None = None, kind: str = "continuous") -> NodeDynamics:
    return NodeDynamics("zero", int(n), {}, kind=kind, controller=controller)


_DEFAULTS: dict[str, dict[str, Any]] = {
    "fitzhugh_nagumo": {"a": 0.0, "b": 0.8, "c": 3.0, "I": 0.0},
    "harmonic": {"omega": 1.0},
    "zero": {"n": 1},
    "simple_integrator": {},
    "integrator_chain": {"n": 2, "K": None},
    "lti": {"A": None, "B": None, "K": None},
}


def make_dynamics(name: str, params: Mapping[str, Any] | None = None,
                  controller: ControlLaw | None = None, kind: str = "continuous") -> NodeDynamics:
    """Build a registry entry by name, filling unspecified parameters with defaults."""
    if name not in _DEFAULTS:
        raise DynamicsError(f"unknown dynamics {name!r}; known: {sorted(_DEFAULTS)}")
    p = dict(_DEFAULTS[name])
    for key, value in (params or {}).items():
        if key == "I_const":
            key = "I"
        if key not in p:
            raise DynamicsError(f"dynamics {name!r} has no parameter {key!r}")
        p[key] = value
    if name == "fitzhugh_nagumo":
        d = fitzhugh_nagumo(p["a"], p["b"], p["c"], p["I"])
    elif name == "harmonic":
        d = harmonic(p["omega"])
    elif name == "zero":
        d = zero(int(p["n"]))
    elif name == "simple_integrator":
        d = simple_integrator()
    elif name == "integrator_chain":
        d = integrator_chain(int(p["n"]), p["K"])
    else:
        if any(p[k] is None for k in ("A", "B", "K")):
            raise DynamicsError("lti dynamics needs A, B and K")
        d = lti(p["A"], p["B"], p["K"])
    return NodeDynamics(d.name, d.state_dim, d.params, kind, controller)


def registry_names() -> list[str]:
    return sorted(_DEFAULTS)
