"""Random-feature linearizations of nonlinear kernels on nonnegative data."""
from kernlin._backend import core as _core
from kernlin.data import Dataset, NormMode, SparseVector, SvmlightFormatError, parse_svmlight, write_svmlight
from kernlin.estimate import convergence_study, estimate_pair
from kernlin.kernels import KernelKind, KernelSpec, evaluate, kernel_matrix
from kernlin.sketch import EncodedDataset, EncodedVector, Method, SketchPlan, encode, featurize_dataset
from kernlin.trainer import SvmModel, TrainConfig, accuracy, c_sweep, predict, train_multiclass

__version__ = "0.1.0"
backend = _core.NAME

__all__ = [
    "Dataset", "NormMode", "SparseVector", "SvmlightFormatError", "parse_svmlight", "write_svmlight",
    "KernelKind", "KernelSpec", "evaluate", "kernel_matrix",
    "EncodedDataset", "EncodedVector", "Method", "SketchPlan", "encode", "featurize_dataset",
    "convergence_study", "estimate_pair",
    "SvmModel", "TrainConfig", "accuracy", "c_sweep", "predict", "train_multiclass",
    "backend", "__version__",
]
