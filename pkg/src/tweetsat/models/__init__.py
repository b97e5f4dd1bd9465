"""From-scratch classifiers: one-vs-one SVM, ReLU MLPs and a text CNN."""
from .cnn import CnnConfig, CnnModel, cnn_predict, cnn_train
from .common import Adam, DivergedTraining, ModelFormatError, gradient_check, softmax, softmax_xent
from .mlp import ANN_CONFIGS, MlpConfig, MlpModel, mlp_predict, mlp_train
from .svm import SvmConfig, SvmModel, smo_binary, svm_predict, svm_train

__all__ = [
    "ANN_CONFIGS",
    "Adam",
    "CnnConfig",
    "CnnModel",
    "DivergedTraining",
    "MlpConfig",
    "MlpModel",
    "ModelFormatError",
    "SvmConfig",
    "SvmModel",
    "cnn_predict",
    "cnn_train",
    "gradient_check",
    "mlp_predict",
    "mlp_train",
    "smo_binary",
    "softmax",
    "softmax_xent",
    "svm_predict",
    "svm_train",
]
