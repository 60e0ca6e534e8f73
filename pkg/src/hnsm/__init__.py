"""Community detection and rating prediction for partially observed
dense weighted bipartite networks."""

__version__ = "0.1.0"

from .data import (
    CommunityAssignment,
    DataFormatError,
    RatingsMatrix,
    SplitResult,
    SplitSpec,
    Transformation,
    apply_transformation,
    duplicate_nodes,
    load_csv,
    load_labels_csv,
    mcar_mask,
    relabel_contiguous,
    split,
    write_csv,
    write_labels_csv,
)
from .detection import DetectionConfig, assign_heldout, detect
from .estimation import (
    BlockFit,
    EmpiricalCDF,
    ModelFit,
    UnfittableBlockError,
    fit_block,
    fit_empirical_G,
    fit_model,
    predict_edge,
)
from .evaluation import (
    EvaluationReport,
    PipelineOptions,
    cross_validate_transformations,
    evaluate_pipeline,
    mse,
    nmae,
    nmi,
    rmse,
)
from .generator import BlockSpec, GeneratorConfig, canonical_config, sample_network
from .hfunctions import HFunctionSpec, catalog, catalog_by_id, eval_h
from .measure import MeasureBreakdown, measure_L, measure_value

__all__ = [
    "BlockFit",
    "BlockSpec",
    "CommunityAssignment",
    "DataFormatError",
    "DetectionConfig",
    "EmpiricalCDF",
    "EvaluationReport",
    "GeneratorConfig",
    "HFunctionSpec",
    "MeasureBreakdown",
    "ModelFit",
    "PipelineOptions",
    "RatingsMatrix",
    "SplitResult",
    "SplitSpec",
    "Transformation",
    "UnfittableBlockError",
    "apply_transformation",
    "assign_heldout",
    "canonical_config",
    "catalog",
    "catalog_by_id",
    "cross_validate_transformations",
    "detect",
    "duplicate_nodes",
    "eval_h",
    "evaluate_pipeline",
    "fit_block",
    "fit_empirical_G",
    "fit_model",
    "load_csv",
    "load_labels_csv",
    "mcar_mask",
    "measure_L",
    "measure_value",
    "mse",
    "nmae",
    "nmi",
    "predict_edge",
    "relabel_contiguous",
    "rmse",
    "sample_network",
    "split",
    "write_csv",
    "write_labels_csv",
]
