"""Pattern metrics, hypothesis audits and the end-to-end design pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dynamics import ControlLaw, NodeDynamics
from .graph import Topology
from .protocol import (CouplingProtocol, Partition, build_bipartite_partition,
                       build_multipartite_partition, group_pair_transforms, synthesize_protocol)
from .sim import SimConfig, Trajectory, simulate_auxiliary, simulate_pattern
from .symmetry import (EquivarianceReport, SymmetryElement, check_commuting, check_equivariance,
                       identity)

PATTERN_TOL = 1e-3
WINDOW_FRACTION = 0.2


class HypothesisError(RuntimeError):
    """The node dynamics lack a symmetry the requested pattern relies on."""


def _window(traj: Trajectory, window_fraction: float) -> np.ndarray:
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError(f"window_fraction must lie in (0, 1], got {window_fraction}")
    t0, t1 = traj.times[0], traj.times[-1]
    mask = traj.times >= t1 - window_fraction * (t1 - t0) - 1e-12 * max(1.0, abs(t1))
    if not mask.any():
        raise ValueError("evaluation window contains no samples")
    return traj.nodes()[mask]


def within_group_error(traj: Trajectory, p: Partition, window_fraction: float = WINDOW_FRACTION) -> float:
    """Largest distance between two same-group nodes over the trailing window."""
    X = _window(traj, window_fraction)
    worst = 0.0
    for members in p.groups():
        if len(members) < 2:
            continue
        G = X[:, members, :]
        d = np.linalg.norm(G[:, :, None, :] - G[:, None, :, :], axis=-1)
        worst = max(worst, float(d.max()))
    return worst


def _representatives(p: Partition) -> list[int]:
    return [members[0] for members in p.groups()]


def cross_group_error(traj: Trajectory, p: Partition, window_fraction: float = WINDOW_FRACTION) -> float:
    """Largest ``|gamma_h x_i - gamma_k x_j|`` between group representatives.

    Each group is represented by its lowest-numbered node; a converged
    pattern maps every group onto the same trajectory under its symmetry.
    """
    X = _window(traj, window_fraction)
    reps = _representatives(p)
    mapped = [X[:, i, :] @ g.matrix.T for i, g in zip(reps, p.group_symmetries)]
    worst = 0.0
    for h in range(len(mapped)):
        for k in range(h + 1, len(mapped)):
            worst = max(worst, float(np.linalg.norm(mapped[h] - mapped[k], axis=-1).max()))
    return worst


def zero_upcrossings(times: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Times where ``y`` crosses zero upwards, by linear interpolation."""
    idx = np.flatnonzero((y[:-1] < 0.0) & (y[1:] >= 0.0))
    frac = -y[idx] / (y[idx + 1] - y[idx])
    return times[idx] + frac * (times[idx + 1] - times[idx])


def zero_crossing_count(y: np.ndarray) -> int:
    s = np.sign(y)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def phase_lags(traj: Trajectory, p: Partition, window_fraction: float = WINDOW_FRACTION,
               component: int = 0) -> list[float | None]:
    """Phase lag in degrees of each group behind group 1.

    Uses zero upcrossings of one state component of each group's
    representative node; the period is twice the mean spacing of group 1's
    zero crossings in either direction. Entries are None when there are too
    few crossings in the window.
    """
    t0, t1 = traj.times[0], traj.times[-1]
    mask = traj.times >= t1 - window_fraction * (t1 - t0)
    times = traj.times[mask]
    X = traj.nodes()[mask]
    reps = _representatives(p)
    y = X[:, reps[0], component]
    ref = zero_upcrossings(times, y)
    both = np.sort(np.concatenate([ref, zero_upcrossings(times, -y)]))
    if ref.size < 1 or both.size < 2:
        return [None] * len(reps)
    period = 2.0 * float(np.mean(np.diff(both)))
    lags: list[float | None] = []
    for i in reps:
        up = zero_upcrossings(times, X[:, i, component])
        if up.size < 1:
            lags.append(None)
            continue
        offsets = [(up[up >= r][0] - r) % period for r in ref if np.any(up >= r)]
        if not offsets:
            lags.append(None)
            continue
        # circular mean, so lags near 0/360 do not average to 180
        phases = 2.0 * np.pi * np.array(offsets) / period
        lag = np.degrees(np.arctan2(np.sin(phases).mean(), np.cos(phases).mean()))
        lags.append(float(lag % 360.0))
    return lags


@dataclass(frozen=True)
class PatternReport:
    within_group_error: float
    cross_group_error: float
    window: tuple[float, float]
    tolerance: float
    achieved: bool
    per_group_detail: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "achieved": self.achieved,
            "within_group_error": self.within_group_error,
            "cross_group_error": self.cross_group_error,
            "window": list(self.window),
            "tolerance": self.tolerance,
            "groups": self.per_group_detail,
        }

    def text(self) -> str:
        lines = [
            f"pattern {'ACHIEVED' if self.achieved else 'NOT achieved'} "
            f"(tol {self.tolerance:g}, window t in [{self.window[0]:g}, {self.window[1]:g}])",
            f"  within-group error: {self.within_group_error:.3e}",
            f"  cross-group error:  {self.cross_group_error:.3e}",
        ]
        for g in self.per_group_detail:
            lag = g.get("phase_lag_deg")
            extra = f", phase lag {lag:.2f} deg" if lag is not None else ""
            lines.append(f"  group {g['group']}: nodes {g['nodes']}, spread {g['spread']:.3e}{extra}")
        return "\n".join(lines)


def pattern_report(traj: Trajectory, p: Partition, tol: float = PATTERN_TOL,
                   window_fraction: float = WINDOW_FRACTION) -> PatternReport:
    within = within_group_error(traj, p, window_fraction)
    cross = cross_group_error(traj, p, window_fraction)
    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    window = (t1 - window_fraction * (t1 - t0), t1)
    lags = phase_lags(traj, p, window_fraction) if p.state_dim == 2 and p.group_count > 1 else None
    detail = []
    for h, members in enumerate(p.groups()):
        single = Partition(tuple(0 for _ in members), (identity(p.state_dim),))
        sub = Trajectory(traj.times, traj.nodes()[:, members, :].reshape(len(traj.times), -1),
                         len(members), traj.state_dim)
        entry = {"group": h + 1, "nodes": [m + 1 for m in members],
                 "symmetry": p.group_symmetries[h].label,
                 "spread": within_group_error(sub, single, window_fraction)}
        if lags is not None:
            entry["phase_lag_deg"] = lags[h]
        detail.append(entry)
    achieved = bool(within <= tol and cross <= tol)
    return PatternReport(within, cross, window, tol, achieved, detail)


@dataclass(frozen=True)
class HypothesisAudit:
    h1: list[EquivarianceReport]
    h1_commuting: list[bool] | None
    h2: bool
    h3: bool
    h3_error: float
    notes: list[str] = field(default_factory=list)

    @property
    def h1_passed(self) -> bool:
        ok = all(r.passed for r in self.h1)
        if self.h1_commuting is not None:
            ok = ok and all(self.h1_commuting)
        return ok

    @property
    def overall(self) -> bool:
        return self.h1_passed and self.h2 and self.h3

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "h1": {"passed": self.h1_passed, "equivariance": [r.to_dict() for r in self.h1],
                   "commuting": self.h1_commuting},
            "h2": {"passed": self.h2},
            "h3": {"passed": self.h3, "auxiliary_sync_error": self.h3_error},
            "notes": self.notes,
        }

    def text(self) -> str:
        lines = [f"hypothesis audit: {'PASS' if self.overall else 'FAIL'}"]
        lines.append(f"  H1 symmetry of node dynamics: {'pass' if self.h1_passed else 'FAIL'}")
        for r in self.h1:
            lines.append(f"    {r.symmetry_label or '?'}: max residual {r.max_residual:.3e} "
                         f"over {r.samples_tested} samples ({'ok' if r.passed else 'fails'})")
            if not r.passed:
                t, x = r.worst_point
                lines.append(f"      worst at t={t:.4g}, x={[round(v, 6) for v in x]}")
        if self.h1_commuting is not None:
            lines.append(f"    linear part commutes with each symmetry: {self.h1_commuting}")
        lines.append(f"  H2 protocol consistency: {'pass' if self.h2 else 'FAIL'}")
        lines.append(f"  H3 auxiliary network synchronizes: {'pass' if self.h3 else 'FAIL'} "
                     f"(max node distance {self.h3_error:.3e})")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def check_protocol_consistency(p: Partition, protocol: CouplingProtocol) -> bool:
    """Reciprocity ``T_ji = T_ij^T`` and agreement with the group-pair table, exactly."""
    table = group_pair_transforms(p)
    for (i, j), t in protocol.transforms.items():
        if not np.array_equal(t, table[p.assignment[i], p.assignment[j]]):
            return False
        if not np.array_equal(protocol.transforms[j, i], t.T):
            return False
        if p.assignment[i] == p.assignment[j] and not np.array_equal(t, np.eye(p.state_dim)):
            return False
    return True


def audit(dynamics: NodeDynamics, topology: Topology, partition: Partition, config: SimConfig,
          pattern_tol: float = PATTERN_TOL, window_fraction: float = WINDOW_FRACTION,
          equivariance_samples: int = 200, equivariance_radius: float = 5.0,
          equivariance_seed: int = 42, x0=None) -> HypothesisAudit:
    """Check H1 (symmetry), H2 (protocol) and H3 (auxiliary sync, by simulation)."""
    notes = []
    h1 = [check_equivariance(dynamics, g, equivariance_samples, equivariance_radius, equivariance_seed)
          for g in partition.group_symmetries]
    a = dynamics.system_matrix()
    commuting = None
    if a is not None and dynamics.controller is None:
        gain = dynamics.coupling_gain
        commuting = []
        for g in partition.group_symmetries:
            with_gain = check_commuting(gain, g)
            if not with_gain:
                notes.append(f"symmetry {g.label or '?'} does not commute with the coupling gain B K")
            commuting.append(check_commuting(a, g) and with_gain)
    protocol = synthesize_protocol(partition, topology)
    h2 = check_protocol_consistency(partition, protocol)
    aux = simulate_auxiliary(dynamics, topology, config, x0=x0)
    everyone = Partition(tuple(0 for _ in range(topology.node_count)), (identity(dynamics.state_dim),))
    h3_error = within_group_error(aux, everyone, window_fraction)
    h3 = bool(h3_error <= pattern_tol)
    if not h3:
        notes.append(f"auxiliary network not synchronized at k={config.k:g} within t_end={config.t_end:g}")
    return HypothesisAudit(h1, commuting, h2, h3, h3_error, notes)


def audit_hypotheses(scenario) -> HypothesisAudit:
    """Audit a parsed scenario (see :mod:`sympat.scenario`)."""
    v = scenario.verify
    return audit(scenario.dynamics, scenario.topology, scenario.partition, scenario.config,
                 v.pattern_tol, v.window_fraction, v.equivariance_samples,
                 v.equivariance_radius, v.equivariance_seed)


@dataclass(frozen=True)
class DesignResult:
    dynamics: NodeDynamics
    partition: Partition
    protocol: CouplingProtocol
    trajectory: Trajectory
    report: PatternReport
    audit: HypothesisAudit


def design_pipeline(dynamics: NodeDynamics, controller: ControlLaw | None,
                    symmetries: SymmetryElement | Sequence[SymmetryElement],
                    groups, topology: Topology, config: SimConfig,
                    pattern_tol: float = PATTERN_TOL, window_fraction: float = WINDOW_FRACTION,
                    force: bool = False, x0=None, digest: str = "") -> DesignResult:
    """Close the loop, certify symmetry, partition, synthesise, simulate and report.

    ``symmetries`` is either one element (``groups`` is then the set of nodes
    bound to it, everyone else bound to the identity) or one element per
    group in ``groups``. Node labels are 1-based. Raises
    :class:`HypothesisError` when the closed-loop field is not equivariant,
    unless ``force`` is set.
    """
    if controller is not None:
        dynamics = replace(dynamics, controller=controller)
    if isinstance(symmetries, SymmetryElement):
        partition = build_bipartite_partition(topology.node_count, groups, symmetries)
    else:
        partition = build_multipartite_partition(topology.node_count, groups, symmetries)
    reports = [check_equivariance(dynamics, g) for g in partition.group_symmetries]
    failed = [r for r in reports if not r.passed]
    if failed and not force:
        msg = "; ".join(f"{r.symmetry_label or 'symmetry'}: residual {r.max_residual:.3e} at t={r.worst_point[0]:.4g}, "
                        f"x={[round(v, 6) for v in r.worst_point[1]]}" for r in failed)
        raise HypothesisError(f"closed-loop node dynamics are not equivariant ({msg})")
    protocol = synthesize_protocol(partition, topology)
    traj = simulate_pattern(dynamics, topology, protocol, config, x0=x0, digest=digest)
    report = pattern_report(traj, partition, pattern_tol, window_fraction)
    audit_result = audit(dynamics, topology, partition, config, pattern_tol, window_fraction, x0=x0)
    return DesignResult(dynamics, partition, protocol, traj, report, audit_result)
