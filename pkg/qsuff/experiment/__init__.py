"""
The :mod:`qsuff.experiment` module includes statistical experiments, their Koashi-Imoto decomposition and minimal sufficient forms.
"""

from .statistical_experiment import (
    StatisticalExperiment,
    restrict_to_support,
    embed_with_ancilla,
    embed_direct_sum,
    channel_as_experiment,
    likelihood_ratio_partition,
)
from .koashi_imoto import (
    KIDecomposition,
    cocycle_generators,
    minimal_sufficient_subalgebra,
    ki_decompose,
    minimal_form,
    conditional_expectation_for,
)
from .coarse_graining import (
    IsomorphismWitness,
    find_fixing_channel,
    check_coarse_graining,
    check_channel_concatenation,
    experiments_isomorphic,
)


__all__ = [
    'StatisticalExperiment',
    'restrict_to_support',
    'embed_with_ancilla',
    'embed_direct_sum',
    'channel_as_experiment',
    'likelihood_ratio_partition',
    'KIDecomposition',
    'cocycle_generators',
    'minimal_sufficient_subalgebra',
    'ki_decompose',
    'minimal_form',
    'conditional_expectation_for',
    'IsomorphismWitness',
    'find_fixing_channel',
    'check_coarse_graining',
    'check_channel_concatenation',
    'experiments_isomorphic',
]
