"""Contact forms, cone structures of bivectors and Farkas separation on flat tori."""

from .band_forms import (
    BandForm,
    ConstantOneForm,
    circle_average,
    exterior_d,
    integrate_top,
    lichnerowicz_d,
    pair_dirac,
    pullback_affine,
    wedge,
)
from .cone_structures import (
    SampledConeStructure,
    check_equivariance,
    cone_from_acs,
    dirac_generators,
    positivity_margin,
)
from .contact import (
    ContactCandidate,
    MetricField,
    compatible_acs_polar,
    compatible_acs_reeb,
    extract_contact,
    reeb_at,
    skew_acs_check,
    twisted_symplectization,
    verify_contact,
)
from .duality import (
    ExactCurrent,
    NotSalient,
    PositiveForm,
    SeparationProblem,
    closed_subspace_basis,
    separate,
    verify_certificate,
)
from .kernels import BACKEND
from .lp import IterationLimitError, lp_feasibility
from .multilinear import Bivector, pfaffian, schubert_intersects, wedge_vectors
from .torus import TorusAction, TorusModel

__version__ = "0.1.0"
