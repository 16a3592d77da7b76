"""
The :mod:`qsuff` module includes minimal sufficient forms of quantum statistical experiments and discrete POVMs.
"""

PACKAGE_NAME = 'qsuff'

def package_info():
    return f"This is the {PACKAGE_NAME} package."


__all__ = [
    'algebra',
    'experiment',
    'povm',
    'utils',
]
