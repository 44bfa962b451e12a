"""Partial Bergman kernels and constant scalar curvature on the punctured ball.

Numerical and exact tools for radial Kähler potentials: curvature, monomial
section norms, graded and full kernel series with certified tails, product
models, and a verification suite with JSON/CSV reports.
"""
__version__ = "0.1.0"

from .bergman_kernel import (
    FULL,
    GRADED,
    ConstancyReport,
    KernelEvaluation,
    constancy_report,
    disk_constant,
    full_kernel,
    generating_check,
    graded_kernel,
    product_kernel,
)
from .config import RunConfig, parse_config, parse_config_text
from .errors import *  # noqa: F401,F403
from .model_catalog import (
    Factor,
    ProductModel,
    expected_constant,
    make_family,
    make_product,
    make_standard,
    model_from_dict,
    model_from_json,
    product_kernel_at,
    theorem_instance,
)
from .radial_geometry import (
    CurvatureReport,
    RadialPotential,
    curvature_invariants,
    custom_profile,
    family_potential,
    flat,
    fubini_study,
    is_positive_metric,
    metric_determinant,
    punctured_disk,
    radial_completeness,
    scalar_curvature,
)
from .report import VerificationReport, export_report, load_report, run_verification_suite
from .section_norms import (
    GradedIndex,
    NormValue,
    angular_factor,
    norm,
    norm_closed,
    norm_exact_graded,
    norm_quadrature,
)
from .special import log_beta, log_gamma
