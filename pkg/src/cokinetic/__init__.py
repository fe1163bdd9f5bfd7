"""Numerical co-Hamiltonian geometry on flat cosymplectic models.

The package works on M = T^{2n} x S^1 (or x R) with the flat cosymplectic
pair (eta, omega): generator-driven isotopies with exact Fourier derivatives,
group-algebra and conformal-factor verification, Hofer-type lengths and
distances, symplectization lifts, reparameterization lemmas, fixed-point
search, and a scenario-driven CLI.
"""

__version__ = "0.1.0"

from .errors import CokineticError
from .manifold import (
    FourierScalar,
    ModelSpec,
    OneFormField,
    OscEnclosure,
    Point,
    exterior_derivative,
    hodge_split,
    osc,
)
from .linalg import (
    CosymplecticCouple,
    canonical_couple,
    is_cosymplectic,
    pullback_couple,
    reeb_vector,
)
from .isotopy import (
    CoIsotopy,
    Generator,
    ReebComponent,
    Translation,
    check_cosymplectic,
    compose_isotopies,
    conjugate_isotopy,
    identity_isotopy,
    inverse_isotopy,
    verify_generator_identity,
    winding,
)
from .lift import LiftedIsotopy, LiftedPoint, lift_isotopy
from .norms import (
    aco_norm,
    almost_length,
    c0_distance,
    cauchy_report,
    distance_AH,
    distance_CH,
    energy_upper_bound,
    length_L1inf,
    length_Linf,
    path_distance,
)
from .reparam import (
    ReparamCurve,
    boundary_flatten,
    flatten_curve,
    ham_norm,
    lipschitz_constants,
    normalized_flatten,
    reparametrize,
    verify_rl2,
    verify_rl3,
)
from .fixpoints import (
    FixedPointSet,
    GammaBound,
    check_fix_lower_bound,
    find_fixed_points,
    gamma_lower_bound,
    mean_winding_integral,
)
from .scenario import Scenario, load_scenario
from .reports import LengthReport, RunReport, SequenceDiagnostics, VerificationReport
