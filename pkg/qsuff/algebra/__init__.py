"""
The :mod:`qsuff.algebra` module includes finite-dimensional *-algebras, their Wedderburn blocks and conditional expectations.
"""

from .star_algebra import StarAlgebra, generate_star_algebra, commutant, center, intersection, subspace_equal
from .wedderburn import WedderburnBlock, wedderburn_decompose, conditional_expectation, block_algebra, block_summary


__all__ = [
    'StarAlgebra',
    'generate_star_algebra',
    'commutant',
    'center',
    'intersection',
    'subspace_equal',
    'WedderburnBlock',
    'wedderburn_decompose',
    'conditional_expectation',
    'block_algebra',
    'block_summary',
]
