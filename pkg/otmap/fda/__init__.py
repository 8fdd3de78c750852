"""
FDA — 函数型数据的余弦系数前端、传输与 Avg-DTW 评估。

Quick Start::

    from otmap.fda import read_functions, calibrate, transport_functions, avg_dtw

    src = read_functions("source.csv")
    cfg = calibrate([src], n_coeffs=16)
    moved = transport_functions(src, estimate, cfg)
    print(avg_dtw(moved, read_functions("target.csv")))
"""

from otmap.fda.coeffs import (
    calibrate,
    coeff_count,
    cosine_basis,
    from_coeffs,
    gram_matrix,
    raw_coefficients,
    to_coeffs,
    trapezoid_weights,
)
from otmap.fda.dtw import avg_dtw, dtw, dtw_matrix
from otmap.fda.pipeline import FdaResult, coefficient_smoothness, fit_function_map, transport_functions
from otmap.fda.sample import FunctionSample, cell_centres, read_functions, write_functions

__all__ = [
    # sample
    "FunctionSample",
    "cell_centres",
    "read_functions",
    "write_functions",
    # coefficients
    "calibrate",
    "coeff_count",
    "cosine_basis",
    "from_coeffs",
    "gram_matrix",
    "raw_coefficients",
    "to_coeffs",
    "trapezoid_weights",
    # metric
    "avg_dtw",
    "dtw",
    "dtw_matrix",
    # pipeline
    "FdaResult",
    "coefficient_smoothness",
    "fit_function_map",
    "transport_functions",
]
