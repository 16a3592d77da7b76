"""
The :mod:`qsuff.utils` module includes tolerances, errors, linear algebra, superoperators, solvers and file conversions.
"""


from .conversion_utils import ConvertData, Report
from ._other_utils import (
    Tolerances,
    DEFAULT_TOLERANCES,
    QsuffError,
    InputError,
    NumericalValidationError,
    NotMinimalForm,
)
from .superoperator_utils import Superoperator



__all__ = [
    'ConvertData',
    'Report',
    'Tolerances',
    'DEFAULT_TOLERANCES',
    'QsuffError',
    'InputError',
    'NumericalValidationError',
    'NotMinimalForm',
    'Superoperator',
]
