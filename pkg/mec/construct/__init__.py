"""Code builders: Kronecker, LP and partitioned (uniform / optimal) constructions."""

from .kronecker import KroneckerResult, SizePrediction, build_kronecker, kronecker_field_size, kronecker_to_code, predict_kronecker_size
from .lp import OverheadBounds, build_lp_code, overhead_bounds
from .partitioned import FaResult, build_partitioned_code, fa_optimal, uniform_assignment
from .report import METHODS, build_code, format_fraction, parameters_report

__all__ = [
    'KroneckerResult', 'SizePrediction', 'build_kronecker', 'kronecker_field_size',
    'kronecker_to_code', 'predict_kronecker_size',
    'OverheadBounds', 'build_lp_code', 'overhead_bounds',
    'FaResult', 'build_partitioned_code', 'fa_optimal', 'uniform_assignment',
    'METHODS', 'build_code', 'format_fraction', 'parameters_report',
]
