"""Services package for the generalized Hermite subdivision toolkit."""

from .core import HermiteType, Mask, VectorData, load_mask_file, parse_mask, serialize_mask
from .analysis import classify, sum_rule_order, lpm_order, interpolatory_check
from .polysub import refine, basis_samples
from .smoothness import SmoothnessEstimator, convergence_verdict, get_estimator
from .construct import existence_pipeline, symmetry_complete, vectorize_mask
from .registry import ExampleRecord, get_example, get_all_example_names, verify_example
from .acceptance import ACCEPTANCE_CHECKS, run_acceptance

__all__ = [
    "HermiteType",
    "Mask",
    "VectorData",
    "load_mask_file",
    "parse_mask",
    "serialize_mask",
    "classify",
    "sum_rule_order",
    "lpm_order",
    "interpolatory_check",
    "refine",
    "basis_samples",
    "SmoothnessEstimator",
    "convergence_verdict",
    "get_estimator",
    "existence_pipeline",
    "symmetry_complete",
    "vectorize_mask",
    "ExampleRecord",
    "get_example",
    "get_all_example_names",
    "verify_example",
    "ACCEPTANCE_CHECKS",
    "run_acceptance",
]
