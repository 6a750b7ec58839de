"""Sparse deconvolution of pulse streams by l1-constrained convex optimization,
with dual-certificate verification, theoretical error bounds, greedy/subspace
baselines, and a randomized experiment harness."""

from .baselines import MusicConfig, OmpConfig, music_deconvolution, omp_deconvolution
from .certificate import (
    CertificateConstructionError,
    CertificateReport,
    DualCertificate,
    build_certificate,
    empirical_min_separation,
    eval_certificate,
    verify_certificate,
)
from .harness import (
    ExperimentConfig,
    TrialRecord,
    aggregate,
    emit_outputs,
    run_experiment,
)
from .kernels import (
    AdmissibilityReport,
    Kernel,
    SampledKernel,
    cauchy_kernel,
    custom_kernel,
    eval_kernel,
    gaussian_kernel,
    kernel_by_name,
    sample_kernel,
    verify_admissibility,
)
from .metrics import (
    BoundSet,
    Partition,
    check_lemma21,
    compute_bounds,
    far_false_amplitude,
    localization_error,
    partition_near_far,
)
from .recovery import (
    RecoveryError,
    RecoveryProblem,
    RecoverySolution,
    convolution_matrix,
    extract_support,
    solve_l1_deconvolution,
)
from .signals import (
    FilterSpec,
    GaussianSNR,
    L1Budget,
    Measurements,
    SpikeTrain,
    check_separation,
    demodulate,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport", "BoundSet", "CertificateConstructionError",
    "CertificateReport", "DualCertificate", "ExperimentConfig", "FilterSpec",
    "GaussianSNR", "Kernel", "L1Budget", "Measurements", "MusicConfig",
    "OmpConfig", "Partition", "RecoveryError", "RecoveryProblem",
    "RecoverySolution", "SampledKernel", "SpikeTrain", "TrialRecord",
    "aggregate", "build_certificate", "cauchy_kernel", "check_lemma21",
    "check_separation", "compute_bounds", "convolution_matrix",
    "custom_kernel", "demodulate", "emit_outputs", "empirical_min_separation",
    "eval_certificate", "eval_kernel", "extract_support",
    "far_false_amplitude", "gaussian_kernel", "kernel_by_name",
    "localization_error", "music_deconvolution", "omp_deconvolution",
    "partition_near_far", "run_experiment", "sample_kernel",
    "solve_l1_deconvolution", "synthesize", "verify_admissibility",
    "verify_certificate",
]
