"""Multi-commodity flow feasibility by Frank-Wolfe on an overflow penalty."""
from .analysis import (CertificateNotFound, CutCertificate, EquilibriumReport, build_certificate, classify,
                       verify_certificate, verify_equilibrium)
from .core import (Instance, InstanceError, aggregate, check_conservation, decompose_paths, make_instance,
                   validate_instance)
from .estimator import MultiCommodityFlowSolver, check_instance
from .oracle import gen_instance, oracle_feasible
from .penalty import PenaltyModel, arc_integral, objective, penalty_value
from .solver import SolverParams, SolveResult, Verdict, fw_solve, initialize, line_search, lower_bound
from .sssp import all_or_nothing, extract_path, shortest_paths

__version__ = "0.1.0"
