"""Synthesis of restricted Boltzmann machines from hierarchical-model energies."""
from .errors import (
    DomainError, Hm2RbmError, InputError, PlanError, PrecisionError, RangeError,
    RegionError, ResourceError)
from .subsetpoly import (
    FunctionTable, MultilinearPoly, SimplicialComplex, downward_closure, full_complex,
    k_interaction_complex, mobius_transform, varset, zeta_transform)
from .softplus import (
    SoftplusUnit, edge_pair_feasible, root_polynomial, solve_w_m, softplus,
    unit_coefficients)
from .constructions import (
    EdgePairSpec, StarTupleSpec, synthesize_edge_pair, synthesize_leading,
    synthesize_star_tuple)
from .covering import (
    CoverPlan, EdgePair, StarTuple, covering_number_bound, emit_tables,
    exact_covering_number, greedy_layer_cover, make_cover_plan, param_lower_bound,
    u_bound)
from .models import (
    HierarchicalModelSpec, ProbTable, RBMParams, hierarchical_distribution,
    kl_divergence, rbm_free_energy, rbm_marginal, total_variation)
from .synth import SynthesisReport, auto_omega, required_hidden_units, synthesize_rbm

__version__ = "0.1.0"
