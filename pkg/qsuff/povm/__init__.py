"""
The :mod:`qsuff.povm` module includes discrete POVMs, their postprocessing order and minimal sufficient forms.
"""

from .discrete_povm import (
    DiscretePOVM,
    StochasticKernel,
    qc_channel,
    povm_from_qc_channel,
    fully_quantum_dilation,
    dilation_residuals,
    povm_as_experiment,
)
from .postprocessing import (
    postprocessing_leq,
    povm_postproc_equiv,
    relabeling_minimal_form,
    relabeling_kernels,
    kernel_minimal_check,
)


__all__ = [
    'DiscretePOVM',
    'StochasticKernel',
    'qc_channel',
    'povm_from_qc_channel',
    'fully_quantum_dilation',
    'dilation_residuals',
    'povm_as_experiment',
    'postprocessing_leq',
    'povm_postproc_equiv',
    'relabeling_minimal_form',
    'relabeling_kernels',
    'kernel_minimal_check',
]
