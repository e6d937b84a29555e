"""Darboux-Moutard transforms for the conductivity equation, certified by finite differences."""
from .conductivity import Conductivity
from .conductivity2d import (
    ConductivitySolution,
    Moutard2D,
    TransformPlan2D,
    current,
    example2_solution,
    example3_solution,
    psi_to_u,
    seed_to_f,
    special_fplus,
    stream_from_current,
    stream_function,
    theorem1_recover,
    theorem1_transform,
    theorem2_MI,
    theorem2_MR,
    u_to_psi,
)
from .conductivity_nd import (
    NdTransform,
    SchrodingerData,
    check_Q_invariance,
    compose,
    generalized_transform,
    q_defect,
    schrodinger_Q,
    theorem3_identity_defect,
    theorem3_transform,
)
from .errors import (
    CompatibilityError,
    DimensionError,
    GridMismatch,
    MoutardError,
    NotConductivityType,
    PositivityError,
    PreconditionError,
    SignatureError,
    SingularOmega,
    ZeroDivisor,
)
from .field import (
    Field,
    Grid,
    divergence,
    gradient,
    laplacian,
    partial,
    path_integrate,
    read_field,
    wirtinger_dz,
    wirtinger_dzbar,
    write_field,
)
from .gaf import (
    GafCoefficient,
    OmegaPotential,
    check_gaf,
    check_gaf_conjugate,
    dirac_join,
    dirac_split,
    moutard_psi,
    moutard_psi_plus,
    moutard_q,
    omega,
    q_to_sigma,
    sigma_to_q,
)
from .examples import list_examples, make_example
from .expr import Expression, ExpressionError, evaluate
from .pipeline import ConfigError, PipelineConfig, RunResult, check_outputs, load_config, run_pipeline
from .verify import ConvergenceReport, ResidualReport, convergence_study, residual

__version__ = "0.1.0"
