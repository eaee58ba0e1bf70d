"""Robust hybrid analog-digital precoding for mmWave MIMO under beam misalignment."""

from .array_channel import (
    ArrayGeometry,
    ChannelRealization,
    MisalignmentModel,
    PathSet,
    array_response,
    build_channel,
    draw_paths,
    sample_misalignment,
)
from .cmls_gp import CmlsProblem, GpConfig, GpTrace, KronCmlsProblem, gp_solve, kron_lift, residual
from .hybrid_factorization import FactorizeConfig, HybridFactor, digital_ls_update, factorize
from .joint_design import (
    DesignConfig,
    DesignInputs,
    HybridCombiner,
    HybridPrecoder,
    design_fully_digital,
    design_nonrobust,
    design_robust,
    effective_channel,
    expected_channel,
    finalize_precoder,
    second_stage,
)
from .robust_steering import (
    BasisMatrix,
    ExpectedResponse,
    build_expected_response_matrix,
    dominant_basis,
    expected_array_response,
)

__version__ = "0.1.0"
