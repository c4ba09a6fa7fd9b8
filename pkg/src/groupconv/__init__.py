"""Convolution of compactly supported functions and measures on concrete
Lie groups and discrete groups, with a verification suite for the
identities, bounds and scaling laws of the underlying calculus."""

from .config import DEFAULT_CONFIG, NumericsConfig
from .convolution import (BilinearMap, ConvolutionResult, conv_derivative,
                          convolve, convolve_alt, matrix2x2_multiplication,
                          scalar_multiplication, seminorm_bound_report,
                          verify_identity)
from .discrete import (DirectSumSeminorm, FinSuppSeq, conv_discrete,
                       continuity_bound_discrete, product_estimate_witness,
                       verify_product_estimate)
from .errors import (CapabilityError, DomainError, GroupConvError, UsageError,
                     WordCapError)
from .experiments import (ExperimentConfig, run_blowup, run_identity_suite,
                          run_limit_constant, run_unbounded_family)
from .functions import (DiscreteFunction, TestFunction, VectorFieldSpec, bump,
                        invariant_derivative, iterated_derivative, star,
                        translate)
from .groups import get_group
from .measures import (FiniteMeasure, conv_measures, embed_density,
                       fuvsm_check, total_variation)
from .quadrature import (haar_volume, integrate,
                         inversion_pushforward_residual, make_rule)
from .reporting import emit
from .seminorms import SeminormSpec, parse_seminorm_spec, seminorm

__version__ = "0.1.0"
