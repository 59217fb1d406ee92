"""Consistent-histories frameworks and pivot-based counterfactual reasoning."""

from .counterfactual import (
    Antecedent,
    CounterfactualAnswer,
    CounterfactualQuery,
    build_query,
    counterfactual,
    evaluate,
    supports_inference,
    validate_query,
)
from .errors import ChqError
from .framework import (
    EventNode,
    Framework,
    FrameworkSpec,
    additivity_defect,
    build_framework,
    check_consistency,
    coarse_grain,
    common_refinement,
    compatible,
    compile_tree,
    decoherence,
    decoherence_matrix,
)
from .hilbert import Projector, ProjectiveDecomposition, make_projector, tensor, validate_decomposition
from .search import CatalogSpec, InferenceSpec, InferenceStep, generate_catalog, verify_no_single_framework
from .tree import NodeRef, TreeNode, WeightedHistoryTree, from_conditionals

__all__ = [
    "Antecedent",
    "CatalogSpec",
    "ChqError",
    "CounterfactualAnswer",
    "CounterfactualQuery",
    "EventNode",
    "Framework",
    "FrameworkSpec",
    "InferenceSpec",
    "InferenceStep",
    "NodeRef",
    "Projector",
    "ProjectiveDecomposition",
    "TreeNode",
    "WeightedHistoryTree",
    "additivity_defect",
    "build_framework",
    "build_query",
    "check_consistency",
    "coarse_grain",
    "common_refinement",
    "compatible",
    "compile_tree",
    "counterfactual",
    "decoherence",
    "decoherence_matrix",
    "evaluate",
    "from_conditionals",
    "generate_catalog",
    "make_projector",
    "supports_inference",
    "tensor",
    "validate_decomposition",
    "validate_query",
    "verify_no_single_framework",
]
