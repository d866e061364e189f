"""Coupling protocols that turn node symmetries into network synchronization patterns."""

from .dynamics import ControlLaw, NodeDynamics, evaluate, make_controller, make_dynamics
from .graph import Topology, build_topology, is_connected, laplacian
from .protocol import (BlockDiagonalTransform, CouplingProtocol, Partition, apply_D, build_bipartite_partition,
                       build_D, build_multipartite_partition, synthesize_protocol)
from .sim import InitialConditions, SimConfig, Trajectory, integrate, simulate_auxiliary, simulate_pattern, step_discrete
from .symmetry import (EquivarianceReport, SymmetryElement, check_commuting, check_equivariance, check_orthogonal,
                       commutant_basis, make_rotation_2d, orthogonal_commutant_members)
from .verify import (HypothesisAudit, PatternReport, audit_hypotheses, cross_group_error, design_pipeline,
                     within_group_error)

__version__ = "0.1.0"
