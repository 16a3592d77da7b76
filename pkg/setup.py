
from setuptools import setup, find_packages

def parse_requirements(filename):
    with open(filename, 'r') as file:
        return [line.strip() for line in file if line.strip() and not line.startswith("#")]

PROJNAME = "quantum_sufficiency"
DESCRIPTION = "Minimal sufficient forms of quantum statistical experiments, conditional expectations and POVM postprocessing."
with open("README.md") as f:
    LONG_DESCRIPTION = f.read()
LONG_DESCRIPTION_CONTENT_TYPE = "text/markdown"
VERSION = "0.0.1"
LICENSE = "MIT"
PYTHON_REQUIRES = ">=3.9"


def setup_package():
    metadata = dict(
        name=PROJNAME,
        version=VERSION,
        description=DESCRIPTION,
        long_description=LONG_DESCRIPTION,
        long_description_content_type=LONG_DESCRIPTION_CONTENT_TYPE,
        license=LICENSE,
        python_requires=PYTHON_REQUIRES,
        packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
        install_requires=parse_requirements('requirements.txt'),
        extras_require={
            'tests': ['pytest>=7'],
        },
        entry_points={
            'console_scripts': ['qsuff=qsuff.cli:main'],
        },
        classifiers=[
            "Development Status :: 3 - Alpha",
            "Intended Audience :: Science/Research",
            "License :: OSI Approved :: MIT License",
            "Natural Language :: English",
            "Operating System :: OS Independent",
            "Programming Language :: Python :: 3",
            "Topic :: Scientific/Engineering :: Physics",
            "Topic :: Scientific/Engineering :: Mathematics",
        ],
        keywords=[
            "Quantum Information",
            "Statistical Experiment",
            "Sufficiency",
            "Koashi-Imoto Decomposition",
            "Conditional Expectation",
            "POVM",
            "Semidefinite Feasibility",
        ],
    )

    setup(**metadata)

if __name__ == "__main__":
    setup_package()
    print("Setup Complete.")
