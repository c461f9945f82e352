"""Finite-dimensional Euclidean Jordan algebras, Hilbert's projective metric,
the variation seminorm, the dual unit ball and their isometries."""

from .algebra import (AlgebraDescriptor, Diagonal, DirectSum, Element, Projection, Spin, SymMatrix,
                      descriptor_from_json, element, jordan_product, parse_algebra, quadratic_rep,
                      trace, trace_inner_product, triple_product, unit)
from .cone import (Ray, exp_class, hilbert_distance, in_cone_interior, inversion,
                   inversion_is_linear_up_to_scale, log_ray, ray_equal, ray_of, upper_gauge)
from .dual import (FaceDescriptor, Functional, StateDescriptor, dual_norm, extreme_point_check,
                   face_diameter_le_2, functional, functionals_orthogonal, maximal_face,
                   norming_class_of_face, orthogonal_by_norm, orthogonal_decomposition,
                   support_projection)
from .errors import (AlgebraMismatch, BoundaryError, DomainError, EvaluationBudgetExceeded,
                     FactorizationFailed, InvalidDescriptor, InvalidElement, InvalidFace,
                     JordanConeError, NonPositive, NotAnIsometry, NotInHyperplane, NotPositive,
                     UnknownSuite, VerificationError)
from .isometry import (PROJECTIVITIES_ONLY, SEMIDIRECT_WITH_C2, AffineVariationIsometry,
                       BlackBoxLinearMap, BlackBoxRayMap, HilbertIsometry, JordanIsomorphism,
                       VariationIsometry, apply_hilbert_isometry, apply_jordan_iso,
                       classify_isometry_group, conjugated_projectivity, factor_hilbert_isometry,
                       factor_variation_isometry, hamhalter_decompose,
                       has_atom_with_atomic_complement, variation_isometry_from_hilbert,
                       verify_jordan_iso)
from .kernels import BACKEND
from .sampling import derive_seed, make_rng, sample_interior, sample_jordan_iso, sample_projection
from .spectral import (SpectralDecomposition, eigenvalues, exp_el, functional_calculus, inverse,
                       log_el, order_unit_norm, power, quotient_norm, spectral_decomposition,
                       spectrum, variation_seminorm)
from .suite import SuiteReport, run_suite

__version__ = "0.1.0"
