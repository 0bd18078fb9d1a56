from .iforest import IsolationForest, isolation_forest_fit, path_normalizer
from .knn import knn_classify
from .lof import LofModel, lof_fit, lof_score
from .regressor import (
    RegressorParams,
    fit_regressor,
    predict_sys,
    regressor_from_named,
    regressor_loss,
    res_thresh_score,
    residuals,
)

__all__ = [
    "IsolationForest",
    "LofModel",
    "RegressorParams",
    "fit_regressor",
    "isolation_forest_fit",
    "knn_classify",
    "lof_fit",
    "lof_score",
    "path_normalizer",
    "predict_sys",
    "regressor_from_named",
    "regressor_loss",
    "res_thresh_score",
    "residuals",
]
