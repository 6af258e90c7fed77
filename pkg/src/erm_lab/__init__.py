"""Certified reduction laboratory.

Compiles orthogonal-vectors and bichromatic-Hamming-close-pair instances into
kernel-SVM, kernel ridge regression, kernel PCA, one-hidden-layer ERM, and
gradient-computation problems, solves them with interval arithmetic at
escalating precision, and checks every verdict against brute-force oracles.
"""

from .instances import (BitVector, InstanceKind, ValidationError,
                        VectorPairInstance, default_dimension,
                        default_threshold, generate, instance_from_dict,
                        instance_to_dict, normalize)
from .oracles import OracleVerdict, solve, solve_bhcp, solve_ovp
from .precision import Interval, PrecisionError
from .verdict import Answer, ReductionVerdict
from .kernels import KernelParams
from .svm_reduction import (soft_margin_distinguisher, svm_bias_distinguisher,
                            svm_distinguisher)
from .kpca_reduction import kpca_distinguisher
from .krr_reduction import krr_distinguisher
from .nn_reduction import gradient_distinguisher, nn_distinguisher
from .harness import (ExperimentConfig, REDUCTIONS, RunReport, TrialRecord,
                      bench_scaling, emit_report, run_suite, run_trial)

__version__ = "0.1.0"

__all__ = [
    "Answer", "BitVector", "ExperimentConfig", "InstanceKind", "Interval",
    "KernelParams", "OracleVerdict", "PrecisionError", "REDUCTIONS",
    "ReductionVerdict", "RunReport", "TrialRecord", "ValidationError",
    "VectorPairInstance", "bench_scaling", "default_dimension",
    "default_threshold", "emit_report", "generate", "gradient_distinguisher",
    "instance_from_dict", "instance_to_dict", "kpca_distinguisher",
    "krr_distinguisher", "nn_distinguisher", "normalize", "run_suite",
    "run_trial", "soft_margin_distinguisher", "solve", "solve_bhcp",
    "solve_ovp", "svm_bias_distinguisher", "svm_distinguisher", "__version__",
]
