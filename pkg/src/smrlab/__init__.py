"""Pseudo-spectral laboratory for stochastic parabolic systems on the torus.

Fourier-side fields and fractional norms, dyadic paraproducts and
multiplication probes, coercive coefficient machinery, a semi-implicit
noise-path solver, and Monte Carlo regularity-ratio experiments.
"""

from ._rng import combine, derive_key, normals, uniforms
from .coefficients import (
    CoefficientSet,
    ParabolicityReport,
    TimeProfile,
    coefficients_to_recipe,
    colored_coeffs,
    evaluate_form,
    freeze_coefficients,
    generate_holder_field,
    parabolicity_margin,
    psi_matrix,
    recipe_to_coefficients,
    unit_directions,
)
from .errors import BlowUpError, LatticeMismatchError, ParameterError
from .harness import (
    GaussianDataSampler,
    NormSpec,
    PathRow,
    RatioReport,
    data_functional,
    perturbation_budget,
    smr_experiment,
    trace_sup_norm,
    weighted_time_norm,
)
from .paraproduct import (
    BonyTriple,
    CommutatorResult,
    Cover,
    PartitionOfUnity,
    ProbeResult,
    bony_decompose,
    build_cover,
    commutator_probe,
    extension_operator,
    partition_of_unity,
    probe_multiplication,
)
from .report import (
    CSV_COLUMNS,
    SCHEMA_VERSION,
    report_summary,
    write_json,
    write_report_csv,
    write_svg_chart,
)
from .solver import (
    OperatorForm,
    SamplePath,
    TimeGrid,
    apply_A,
    apply_B,
    brownian_increments,
    dump_trajectory,
    exact_mode_oracle,
    graded_exponent,
    load_trajectory,
    solve_path,
    stabilization_nu,
)
from .spectral import (
    Lattice,
    LPDecomposition,
    LPPartition,
    SpectralField,
    bessel_norm,
    bessel_potential,
    besov_norm,
    constant_field,
    derivative,
    dft,
    eval_at,
    hermitian_defect,
    holder_norm,
    idft,
    lp_blocks,
    lq_norm,
    multiply,
    partition_for,
    radial_cutoff,
    smoothstep5,
)

__version__ = "0.1.0"

__all__ = [
    "combine",
    "derive_key",
    "normals",
    "uniforms",
    "CoefficientSet",
    "ParabolicityReport",
    "TimeProfile",
    "coefficients_to_recipe",
    "colored_coeffs",
    "evaluate_form",
    "freeze_coefficients",
    "generate_holder_field",
    "parabolicity_margin",
    "psi_matrix",
    "recipe_to_coefficients",
    "unit_directions",
    "BlowUpError",
    "LatticeMismatchError",
    "ParameterError",
    "GaussianDataSampler",
    "NormSpec",
    "PathRow",
    "RatioReport",
    "data_functional",
    "perturbation_budget",
    "smr_experiment",
    "trace_sup_norm",
    "weighted_time_norm",
    "BonyTriple",
    "CommutatorResult",
    "Cover",
    "PartitionOfUnity",
    "ProbeResult",
    "bony_decompose",
    "build_cover",
    "commutator_probe",
    "extension_operator",
    "partition_of_unity",
    "probe_multiplication",
    "CSV_COLUMNS",
    "SCHEMA_VERSION",
    "report_summary",
    "write_json",
    "write_report_csv",
    "write_svg_chart",
    "OperatorForm",
    "SamplePath",
    "TimeGrid",
    "apply_A",
    "apply_B",
    "brownian_increments",
    "dump_trajectory",
    "exact_mode_oracle",
    "graded_exponent",
    "load_trajectory",
    "solve_path",
    "stabilization_nu",
    "Lattice",
    "LPDecomposition",
    "LPPartition",
    "SpectralField",
    "bessel_norm",
    "bessel_potential",
    "besov_norm",
    "constant_field",
    "derivative",
    "dft",
    "eval_at",
    "hermitian_defect",
    "holder_norm",
    "idft",
    "lp_blocks",
    "lq_norm",
    "multiply",
    "partition_for",
    "radial_cutoff",
    "smoothstep5",
    "__version__",
]
