"""Orthogonal symmetry elements and numerical symmetry certificates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import NodeDynamics

TOL_ORTHO = 1e-10
TOL_EQUIV = 1e-9
TOL_RANK_REL = 1e-10


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymmetryElement:
    """An element of O(n) stored as a read-only matrix."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SymmetryError(f"symmetry {self.label!r} must be a square matrix, got shape {m.shape}")
        if not check_orthogonal(m, TOL_ORTHO):
            dev = np.max(np.abs(m.T @ m - np.eye(m.shape[0])))
            raise SymmetryError(f"symmetry {self.label!r} is not orthogonal (max |M^T M - I| = {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def T(self) -> "SymmetryElement":
        return SymmetryElement(self.matrix.T, f"{self.label}^T" if self.label else "")

    def __matmul__(self, other):
        if isinstance(other, SymmetryElement):
            return SymmetryElement(self.matrix @ other.matrix)
        return self.matrix @ other

    def __eq__(self, other):
        return isinstance(other, SymmetryElement) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        return f"SymmetryElement({self.label or self.matrix.tolist()!r})"


def identity(n: int) -> SymmetryElement:
    return SymmetryElement(np.eye(n), "I")


def negation(n: int) -> SymmetryElement:
    return SymmetryElement(-np.eye(n), "-I")


def make_rotation_2d(angle: float) -> SymmetryElement:
    """Counter-clockwise planar rotation by ``angle`` radians."""
    c, s = np.cos(angle), np.sin(angle)
    return SymmetryElement(np.array([[c, -s], [s, c]]), f"rot({np.degrees(angle):g}deg)")


def check_orthogonal(m, tol: float = TOL_ORTHO) -> bool:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SymmetryError(f"orthogonality needs a square matrix, got shape {m.shape}")
    return bool(np.max(np.abs(m.T @ m - np.eye(m.shape[0])), initial=0.0) <= tol)


@dataclass(frozen=True)
class EquivarianceReport:
    passed: bool
    max_residual: float
    samples_tested: int
    worst_point: tuple[float, tuple[float, ...]]
    symmetry_label: str = ""

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_residual": self.max_residual,
            "samples_tested": self.samples_tested,
            "worst_point": {"t": self.worst_point[0], "x": list(self.worst_point[1])},
            "symmetry": self.symmetry_label,
        }


def equivariance_residual(f: NodeDynamics, gamma: SymmetryElement, t: float, x) -> float:
    """Max-norm of ``f(t, gamma x) - gamma f(t, x)``."""
    g = gamma.matrix
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(f.vector_field(t, g @ x) - g @ f.vector_field(t, x))))


def check_equivariance(f: NodeDynamics, gamma: SymmetryElement, sample_count: int = 200,
                       domain_radius: float = 5.0, seed: int = 42,
                       tol: float = TOL_EQUIV) -> EquivarianceReport:
    """Certify ``f(t, gamma x) = gamma f(t, x)`` on random samples.

    Times are drawn from [0, 10] and states uniformly from the cube of
    half-width ``domain_radius`` centred at the origin.
    """
    if gamma.dim != f.state_dim:
        raise SymmetryError(
            f"symmetry {gamma.label!r} acts on R^{gamma.dim} but {f.name} has state dimension {f.state_dim}"
        )
    rng = np.random.default_rng(seed)
    ts = rng.uniform(0.0, 10.0, size=sample_count)
    xs = rng.uniform(-domain_radius, domain_radius, size=(sample_count, f.state_dim))
    worst, worst_i = 0.0, 0
    for i in range(sample_count):
        r = equivariance_residual(f, gamma, ts[i], xs[i])
        if not r <= worst:  # also catches nan
            worst, worst_i = r, i
    point = (float(ts[worst_i]), tuple(float(v) for v in xs[worst_i])) if sample_count else (0.0, ())
    return EquivarianceReport(bool(worst <= tol), worst, sample_count, point, gamma.label)


def check_commuting(A, gamma: SymmetryElement | np.ndarray, tol: float = TOL_EQUIV) -> bool:
    a = np.asarray(A, dtype=float)
    g = gamma.matrix if isinstance(gamma, SymmetryElement) else np.asarray(gamma, dtype=float)
    if a.shape != g.shape or a.ndim != 2:
        raise SymmetryError(f"cannot compare A {a.shape} with symmetry {g.shape}")
    return bool(np.max(np.abs(a @ g - g @ a)) <= tol)


def commutator_operator(A) -> np.ndarray:
    """Matrix of ``X -> A X - X A`` acting on row-major ``vec(X)``."""
    a = np.asarray(A, dtype=float)
    n = a.shape[0]
    eye = np.eye(n)
    return np.kron(a, eye) - np.kron(eye, a.T)


def commutant_basis(A) -> list[np.ndarray]:
    """Orthonormal basis (Frobenius inner product) of matrices commuting with ``A``."""
    a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SymmetryError(f"commutant needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    _, s, vt = np.linalg.svd(commutator_operator(a))
    cutoff = TOL_RANK_REL * s[0] if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > cutoff)) if s[0] > 0 else 0
    return [vt[k].reshape(n, n) for k in range(rank, n * n)]


def orthogonal_commutant_members(A, candidates: Iterable[SymmetryElement],
                                 tol: float = TOL_EQUIV) -> list[SymmetryElement]:
    a = np.asarray(A, dtype=float)
    return [g for g in candidates
            if g.dim == a.shape[0] and check_orthogonal(g.matrix, TOL_ORTHO) and check_commuting(a, g, tol)]


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of O(n) via QR with sign correction."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def parse_symmetry(spec, n: int | None = None, label: str = "") -> SymmetryElement:
    """Build a symmetry from a scenario entry.

    Accepted forms: ``{"rotation2d": degrees}``, ``{"matrix": rows}``,
    ``"identity"``/``"negation"`` (need ``n``), or a bare list of rows.
    """
    if isinstance(spec, str):
        if n is None:
            raise SymmetryError(f"symmetry {spec!r} needs the state dimension")
        if spec == "identity":
            return SymmetryElement(np.eye(n), label or "I")
        if spec == "negation":
            return SymmetryElement(-np.eye(n), label or "-I")
        raise SymmetryError(f"unknown symmetry shorthand {spec!r}")
    if isinstance(spec, dict):
        if "rotation2d" in spec:
            g = make_rotation_2d(np.radians(float(spec["rotation2d"])))
            return SymmetryElement(g.matrix, spec.get("label", label or f"rot{spec['rotation2d']:g}"))
        if "matrix" in spec:
            return SymmetryElement(np.array(spec["matrix"], dtype=float), spec.get("label", label))
        raise SymmetryError(f"symmetry entry needs 'rotation2d' or 'matrix', got keys {sorted(spec)}")
    if isinstance(spec, (list, tuple)) or np.isscalar(spec):
        return SymmetryElement(np.array(spec, dtype=float), label)
    raise SymmetryError(f"cannot interpret symmetry {spec!r}")


def symmetry_to_spec(g: SymmetryElement) -> dict:
    return {"label": g.label, "matrix": g.matrix.tolist()}


def stack_symmetries(gs: Sequence[SymmetryElement]) -> np.ndarray:
    return np.stack([g.matrix for g in gs])
