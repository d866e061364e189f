from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sympat.dynamics import fitzhugh_nagumo, pitchfork, zero
from sympat.graph import build_topology
from sympat.protocol import (CouplingProtocol, apply_D, build_bipartite_partition, build_D,
                             build_multipartite_partition, synthesize_protocol)
from sympat.sim import InitialConditions, SimConfig, Trajectory
from sympat.symmetry import SymmetryElement, identity, make_rotation_2d, negation, random_orthogonal
from sympat.verify import (HypothesisError, audit, audit_hypotheses, check_protocol_consistency,
                           cross_group_error, design_pipeline, pattern_report, phase_lags, within_group_error,
                           zero_crossing_count, zero_upcrossings)

FIVE = build_topology(5, [(1, 2), (1, 3), (3, 4), (3, 5)])
SQRT5 = max(np.roots([-1.0, 0.0, 5.0, 0.0]).real)


def traj_from(nodes, times=None):
    """Trajectory from an array shaped (samples, N, n)."""
    nodes = np.asarray(nodes, dtype=float)
    S, N, n = nodes.shape
    times = np.arange(S, dtype=float) if times is None else times
    return Trajectory(times, nodes.reshape(S, N * n), N, n)


def fn_partition(n=2):
    return build_bipartite_partition(5, {2, 4, 5}, negation(n))


def test_on_manifold_errors_vanish():
    s = np.random.default_rng(0).standard_normal((20, 1, 2))
    nodes = np.concatenate([s, -s, s, -s, -s], axis=1)
    traj = traj_from(nodes)
    assert within_group_error(traj, fn_partition(), 0.5) == 0.0
    assert cross_group_error(traj, fn_partition(), 0.5) == 0.0


def test_constant_offset_within_error():
    nodes = np.zeros((5, 5, 2))
    nodes[:, 0] = [1.0, 0.0]
    nodes[:, 2] = [1.0, 1.0]
    nodes[:, [1, 3, 4]] = [-1.0, 0.0]
    assert within_group_error(traj_from(nodes), fn_partition()) == pytest.approx(1.0)


def test_scalar_antisync_cross_error():
    # gamma = -1: reduces to |x_i + x_j| for representatives i in G, j in G*
    nodes = np.zeros((10, 5, 1))
    nodes[:, 0, 0] = 2.0
    nodes[:, 1, 0] = -1.5
    assert cross_group_error(traj_from(nodes), fn_partition(1), 1.0) == pytest.approx(0.5)


def test_single_group_cross_error_is_zero():
    p = build_multipartite_partition(5, [[1, 2, 3, 4, 5]], [identity(2)])
    traj = traj_from(np.random.default_rng(1).standard_normal((8, 5, 2)))
    assert cross_group_error(traj, p) == 0.0


def test_window_selects_trailing_fraction():
    nodes = np.zeros((11, 2, 1))
    nodes[:8, 1, 0] = 5.0  # disagreement only before t = 8
    p = build_multipartite_partition(2, [[1, 2]], [identity(1)])
    traj = traj_from(nodes)
    assert within_group_error(traj, p, 0.2) == 0.0
    assert within_group_error(traj, p, 0.3) == 5.0
    with pytest.raises(ValueError, match="window_fraction"):
        within_group_error(traj, p, 0.0)
    with pytest.raises(ValueError, match="window_fraction"):
        within_group_error(traj, p, 1.5)


@st.composite
def random_pattern_case(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, 3))
    rng = np.random.default_rng(seed)
    N = 6
    assignment = (0, 1, 2, 0, 1, 2)
    syms = [SymmetryElement(random_orthogonal(n, rng)) for _ in range(3)]
    groups = [[i + 1 for i in range(N) if assignment[i] == h] for h in range(3)]
    p = build_multipartite_partition(N, groups, syms)
    traj = traj_from(rng.standard_normal((12, N, n)))
    Q = random_orthogonal(n, rng)
    return p, traj, Q


@given(random_pattern_case())
def test_cross_error_invariant_under_left_rotation(case):
    p, traj, Q = case
    moved = p.with_symmetries([SymmetryElement(Q @ g.matrix) for g in p.group_symmetries])
    assert abs(cross_group_error(traj, p) - cross_group_error(traj, moved)) <= 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_metrics_agree_with_transformed_single_symmetry(seed, n):
    rng = np.random.default_rng(seed)
    p = fn_partition(n)
    traj = traj_from(rng.standard_normal((15, 5, n)))
    z = apply_D(build_D(p), traj.states)
    ztraj = Trajectory(traj.times, z, 5, n)
    plain = p.with_symmetries([identity(n), identity(n)])
    assert abs(within_group_error(traj, p) - within_group_error(ztraj, plain)) <= 1e-12
    assert abs(cross_group_error(traj, p) - cross_group_error(ztraj, plain)) <= 1e-12


def test_zero_crossings():
    t = np.linspace(0, 4 * np.pi, 4001)
    up = zero_upcrossings(t, np.sin(t - 0.3))
    np.testing.assert_allclose(up, [2 * np.pi + 0.3 - 2 * np.pi, 2 * np.pi + 0.3], atol=1e-6)
    assert zero_crossing_count(np.sin(t - 0.3)) == 4
    assert zero_crossing_count(np.array([1.0, 0.0, 0.0, 2.0])) == 0


def test_phase_lags_on_rotating_groups():
    t = np.linspace(0.0, 60.0, 60001)
    angles = [0.0, 120.0, 240.0]
    nodes = np.stack([np.stack([np.cos(t - np.radians(a)), np.sin(t - np.radians(a))], axis=1) for a in angles],
                     axis=1)
    p = build_multipartite_partition(3, [[1], [2], [3]], [make_rotation_2d(np.radians(a)) for a in angles])
    lags = phase_lags(traj_from(nodes, t), p, 0.5)
    np.testing.assert_allclose(lags, angles, atol=0.01)


def test_phase_lags_need_crossings():
    nodes = np.ones((50, 2, 2))
    p = build_multipartite_partition(2, [[1], [2]], [identity(2), negation(2)])
    assert phase_lags(traj_from(nodes), p) == [None, None]


@given(st.floats(1e-6, 1.0), st.integers(0, 1000))
def test_report_achieved_iff_both_below_tol(tol, seed):
    nodes = 0.3 * np.random.default_rng(seed).standard_normal((10, 5, 2))
    traj = traj_from(nodes)
    rep = pattern_report(traj, fn_partition(), tol, 0.5)
    assert rep.achieved == (rep.within_group_error <= tol and rep.cross_group_error <= tol)
    assert [g["nodes"] for g in rep.per_group_detail] == [[1, 3], [2, 4, 5]]
    assert set(rep.to_dict()) >= {"achieved", "within_group_error", "cross_group_error", "window"}


def test_protocol_consistency_detects_tampering():
    p = fn_partition()
    proto = synthesize_protocol(p, FIVE)
    assert check_protocol_consistency(p, proto)
    bad = dict(proto.transforms)
    bad[0, 1] = np.eye(2)
    assert not check_protocol_consistency(p, CouplingProtocol(bad, 2, 5))
    skew = dict(proto.transforms)
    skew[1, 0] = make_rotation_2d(0.1).matrix
    assert not check_protocol_consistency(p, CouplingProtocol(skew, 2, 5))


def test_audit_fn_shipped_passes(fn_scenario):
    res = audit_hypotheses(fn_scenario)
    assert res.h1_passed and res.h2 and res.h3 and res.overall
    assert res.h1_commuting is None
    assert "PASS" in res.text()


def test_audit_fn_asymmetric_fails_h1(fn_scenario):
    res = audit(fitzhugh_nagumo(a=0.7), fn_scenario.topology, fn_scenario.partition,
                replace(fn_scenario.config, t_end=10.0))
    assert not res.h1_passed and not res.overall
    assert max(r.max_residual for r in res.h1) >= 1e-2
    assert "worst at" in res.text()


def test_audit_zero_gain_fails_h3(fn_scenario):
    res = audit_hypotheses(replace(fn_scenario, config=replace(fn_scenario.config, k=0.0)))
    assert res.h1_passed and res.h2 and not res.h3 and not res.overall
    assert res.overall == (res.h1_passed and res.h2 and res.h3)


def test_audit_linear_commuting_check():
    from sympat.dynamics import integrator_chain
    topo = build_topology(2, [(1, 2)])
    cfg = SimConfig(k=1.0, t_end=20.0)
    ok = audit(integrator_chain(2), topo, build_bipartite_partition(2, {2}, negation(2)), cfg)
    assert ok.h1_commuting == [True, True] and ok.h1_passed
    bad = audit(integrator_chain(2), topo, build_bipartite_partition(2, {2}, make_rotation_2d(np.pi / 2)), cfg)
    assert bad.h1_commuting == [True, False] and not bad.h1_passed


def pitchfork_run(gamma, seed=0):
    cfg = SimConfig(k=10.0, t_end=10.0, initial_conditions=InitialConditions("uniform", seed))
    return design_pipeline(zero(1), pitchfork(), gamma, [2, 4, 5], FIVE, cfg)


def test_design_pitchfork_bipartite():
    res = pitchfork_run(negation(1))
    assert res.report.achieved and res.audit.overall
    final = res.trajectory.final
    np.testing.assert_allclose(final[[0, 2]], SQRT5, atol=1e-6)
    np.testing.assert_allclose(final[[1, 3, 4]], -SQRT5, atol=1e-6)


def test_design_identity_symmetry_gives_consensus():
    res = pitchfork_run(identity(1))
    final = res.trajectory.final
    assert res.report.achieved
    np.testing.assert_allclose(np.abs(final), SQRT5, atol=1e-6)
    assert np.ptp(final) <= 1e-6


def test_design_refuses_asymmetric_dynamics():
    cfg = SimConfig(k=1.0, t_end=5.0)
    with pytest.raises(HypothesisError, match="residual 4.667e-01"):
        design_pipeline(fitzhugh_nagumo(a=0.7), None, negation(2), [2, 4, 5], FIVE, cfg)
    forced = design_pipeline(fitzhugh_nagumo(a=0.7), None, negation(2), [2, 4, 5], FIVE, cfg, force=True)
    assert not forced.audit.h1_passed


@pytest.mark.parametrize("name", ["fn_scenario", "pitchfork_scenario", "harmonic_scenario"])
def test_audit_pass_implies_pattern(name, request):
    sc = request.getfixturevalue(name)
    res = design_pipeline(sc.dynamics, None, list(sc.partition.group_symmetries), sc.group_labels,
                          sc.topology, sc.config, 1e-3, 0.2)
    if res.audit.overall:
        assert res.report.achieved
    assert res.audit.overall
