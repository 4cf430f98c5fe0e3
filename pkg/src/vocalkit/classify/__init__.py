from .models import (
    DEFAULT_HYPER,
    FAMILIES,
    ClassifyError,
    TrainedModel,
    lr_loss_grad,
    predict,
    predict_proba,
    softmax_cross_entropy,
    train,
)
from .cv import (
    CVReport,
    accuracy_grid,
    cross_validate,
    load_model,
    make_folds,
    save_model,
    write_grid_csv,
)
from .trees import Tree, grow_gini_tree, grow_newton_tree

__all__ = [
    "DEFAULT_HYPER",
    "FAMILIES",
    "ClassifyError",
    "TrainedModel",
    "lr_loss_grad",
    "predict",
    "predict_proba",
    "softmax_cross_entropy",
    "train",
    "CVReport",
    "accuracy_grid",
    "cross_validate",
    "load_model",
    "make_folds",
    "save_model",
    "write_grid_csv",
    "Tree",
    "grow_gini_tree",
    "grow_newton_tree",
]
