"""Sparse PCA via l1-proximal gradient and Runge-Kutta iterations."""
from .classify import (KnnConfig, KrrConfig, KrrModel, accuracy, knn_predict, krr_fit,
                       krr_predict, rbf_kernel)
from .dataset import (CenteringInfo, LabeledDataset, apply_centering, center, flatten_image,
                      load_csv, synth_faces, write_csv)
from .errors import CsvParseError, InvalidInputError, NumericalError, OverShrinkageError
from .pipeline import (BenchReport, BenchRow, Classifier, ExperimentSpec, SweepError, emit_table,
                       emit_timing_table, run_experiment, run_sweep)
from .spca import (ComponentBasis, LoadingVector, Method, SolverConfig, SolveTrace, deflate,
                   fit_pca, fit_sparse_pca, grad_g, ista_step, project, rk4_step, rk_coarse_step,
                   soft_threshold, solve_component, sparse_rk_update)

__version__ = "0.1.0"
