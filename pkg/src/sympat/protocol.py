"""Node partitions, coupling protocols and the block-diagonal change of variables.

A partition assigns every node to a group ``h`` bound to an orthogonal
symmetry ``gamma_h``. The coupling transform applied by node ``i`` (group h)
to the state of neighbour ``j`` (group k) is ``gamma_h^T gamma_k``, and
``D = diag(sigma_1, ..., sigma_N)`` with ``sigma_i = gamma_{group(i)}`` maps
the patterned network onto the plain diffusive one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Topology
from .symmetry import SymmetryElement, identity


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Assignment of nodes (0-based) to groups, each bound to a symmetry."""

    assignment: tuple[int, ...]
    group_symmetries: tuple[SymmetryElement, ...]

    def __post_init__(self):
        r = len(self.group_symmetries)
        if r < 1:
            raise PartitionError("a partition needs at least one group")
        used = set(self.assignment)
        if used != set(range(r)):
            empty = sorted(set(range(r)) - used)
            raise PartitionError(f"groups {[e + 1 for e in empty]} are empty" if empty
                                 else "assignment refers to a group without a symmetry")
        dims = {g.dim for g in self.group_symmetries}
        if len(dims) != 1:
            raise PartitionError(f"group symmetries act on different dimensions {sorted(dims)}")

    @property
    def node_count(self) -> int:
        return len(self.assignment)

    @property
    def group_count(self) -> int:
        return len(self.group_symmetries)

    @property
    def state_dim(self) -> int:
        return self.group_symmetries[0].dim

    def groups(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.group_count)]
        for node, h in enumerate(self.assignment):
            out[h].append(node)
        return out

    def sigma(self, i: int) -> SymmetryElement:
        return self.group_symmetries[self.assignment[i]]

    def with_symmetries(self, symmetries: Sequence[SymmetryElement]) -> "Partition":
        return Partition(self.assignment, tuple(symmetries))


def _check_nodes(N: int, nodes: Iterable[int], one_based: bool) -> list[int]:
    offset = 1 if one_based else 0
    out = []
    for v in nodes:
        i = int(v) - offset
        if not 0 <= i < N:
            raise PartitionError(f"node {v} outside 1..{N}" if one_based else f"node {v} outside 0..{N - 1}")
        out.append(i)
    return out


def build_bipartite_partition(N: int, group_star: Iterable[int], gamma: SymmetryElement,
                              one_based: bool = True) -> Partition:
    """Two groups: the complement of ``group_star`` (bound to I) and ``group_star`` (bound to gamma)."""
    star = set(_check_nodes(N, group_star, one_based))
    if not star:
        raise PartitionError("the second group is empty; the pattern is degenerate")
    if len(star) == N:
        raise PartitionError("the first group is empty; the pattern is degenerate")
    assignment = tuple(1 if i in star else 0 for i in range(N))
    return Partition(assignment, (identity(gamma.dim), gamma))


def build_multipartite_partition(N: int, groups: Sequence[Iterable[int]],
                                 symmetries: Sequence[SymmetryElement],
                                 one_based: bool = True) -> Partition:
    """Groups in the given order, group ``h`` bound to ``symmetries[h]``."""
    if len(groups) != len(symmetries):
        raise PartitionError(f"{len(groups)} groups but {len(symmetries)} symmetries")
    assignment = [-1] * N
    for h, nodes in enumerate(groups):
        members = _check_nodes(N, nodes, one_based)
        if not members:
            raise PartitionError(f"group {h + 1} is empty")
        for i in members:
            if assignment[i] != -1:
                label = i + 1 if one_based else i
                raise PartitionError(f"node {label} appears in groups {assignment[i] + 1} and {h + 1}")
            assignment[i] = h
    missing = [i + (1 if one_based else 0) for i, h in enumerate(assignment) if h == -1]
    if missing:
        raise PartitionError(f"nodes {missing} are not assigned to any group")
    return Partition(tuple(assignment), tuple(symmetries))


@dataclass(frozen=True)
class CouplingProtocol:
    """Per directed edge ``(i, j)``: the transform node i applies to ``x_j``."""

    transforms: dict[tuple[int, int], np.ndarray]
    state_dim: int
    node_count: int

    def __getitem__(self, edge: tuple[int, int]) -> np.ndarray:
        return self.transforms[edge]

    def coupling_matrix(self) -> np.ndarray:
        """The ``nN x nN`` matrix ``M`` with ``(M X)_i = sum_j (T_ij x_j - x_i)``.

        Equal to ``-D^T (L kron I_n) D`` for a protocol synthesised from a partition.
        """
        n, N = self.state_dim, self.node_count
        m = np.zeros((n * N, n * N))
        eye = np.eye(n)
        for (i, j), t in self.transforms.items():
            m[i * n:(i + 1) * n, j * n:(j + 1) * n] += t
            m[i * n:(i + 1) * n, i * n:(i + 1) * n] -= eye
        return m

    def to_json(self, one_based: bool = True) -> dict:
        off = 1 if one_based else 0
        edges = [
            {"from": j + off, "to": i + off, "matrix": t.tolist()}
            for (i, j), t in sorted(self.transforms.items())
        ]
        return {"state_dim": self.state_dim, "node_count": self.node_count,
                "convention": "node 'to' applies 'matrix' to the state of node 'from'",
                "edges": edges}


def group_pair_transforms(p: Partition) -> dict[tuple[int, int], np.ndarray]:
    """``gamma_h^T gamma_k`` for every ordered group pair."""
    gs = p.group_symmetries
    table = {}
    for h in range(p.group_count):
        for k in range(p.group_count):
            if h == k:
                table[h, k] = np.eye(p.state_dim)
            elif (k, h) in table:
                table[h, k] = table[k, h].T.copy()
            else:
                table[h, k] = gs[h].matrix.T @ gs[k].matrix
    for t in table.values():
        t.setflags(write=False)
    return table


def synthesize_protocol(p: Partition, t: Topology) -> CouplingProtocol:
    """Coupling transforms on every edge, both directions."""
    if p.node_count != t.node_count:
        raise PartitionError(f"partition covers {p.node_count} nodes but topology has {t.node_count}")
    table = group_pair_transforms(p)
    transforms = {}
    for i, j in t.edges:
        h, k = p.assignment[i], p.assignment[j]
        transforms[i, j] = table[h, k]
        transforms[j, i] = table[k, h]
    return CouplingProtocol(transforms, p.state_dim, p.node_count)


def identity_protocol(t: Topology, n: int) -> CouplingProtocol:
    eye = np.eye(n)
    eye.setflags(write=False)
    transforms = {}
    for i, j in t.edges:
        transforms[i, j] = eye
        transforms[j, i] = eye
    return CouplingProtocol(transforms, n, t.node_count)


@dataclass(frozen=True)
class BlockDiagonalTransform:
    blocks: np.ndarray  # shape (N, n, n)

    @property
    def node_count(self) -> int:
        return self.blocks.shape[0]

    @property
    def state_dim(self) -> int:
        return self.blocks.shape[1]

    def dense(self) -> np.ndarray:
        N, n = self.node_count, self.state_dim
        d = np.zeros((N * n, N * n))
        for i in range(N):
            d[i * n:(i + 1) * n, i * n:(i + 1) * n] = self.blocks[i]
        return d


def build_D(p: Partition) -> BlockDiagonalTransform:
    blocks = np.stack([p.sigma(i).matrix for i in range(p.node_count)])
    blocks.setflags(write=False)
    return BlockDiagonalTransform(blocks)


def apply_D(D: BlockDiagonalTransform, X, transpose: bool = False) -> np.ndarray:
    """Blockwise ``sigma_i x_i`` (or ``sigma_i^T x_i``) on stacked states.

    ``X`` may be one network state of length ``nN`` or a batch ``(samples, nN)``.
    """
    X = np.asarray(X, dtype=float)
    N, n = D.node_count, D.state_dim
    if X.shape[-1] != N * n:
        raise PartitionError(f"state has length {X.shape[-1]}, D expects {N * n}")
    xs = X.reshape(X.shape[:-1] + (N, n))
    spec = "...ji,...j->...i" if transpose else "...ij,...j->...i"
    return np.einsum(spec, D.blocks, xs).reshape(X.shape)


def block_equivariance_residual(dynamics, D: BlockDiagonalTransform, sample_count: int = 100,
                                domain_radius: float = 5.0, seed: int = 0) -> float:
    """Max over random ``(t, X)`` of ``|D F(t, X) - F(t, D X)|_max``.

    ``F`` stacks the node field over all nodes; the residual vanishes when
    every block of ``D`` is a symmetry of the node field.
    """
    rng = np.random.default_rng(seed)
    N, n = D.node_count, D.state_dim
    worst = 0.0
    for _ in range(sample_count):
        t = rng.uniform(0.0, 10.0)
        X = rng.uniform(-domain_radius, domain_radius, size=N * n)
        lhs = apply_D(D, dynamics.vector_field(t, X.reshape(N, n)).reshape(-1))
        rhs = dynamics.vector_field(t, apply_D(D, X).reshape(N, n)).reshape(-1)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
