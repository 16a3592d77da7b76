"""
Created on Tue Oct 13 10:05 2026

This script contains the conversions between in-memory objects and the JSON
files and reports the command line reads and writes. Matrices are stored
row-major as nested arrays of [re, im] pairs.
"""

import json
import logging
import numpy as np
import pandas as pd
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
from ._other_utils import FileFormatError, Tolerances

logger = logging.getLogger(__name__)


class ConvertData:

    """
    Static conversions between matrices, experiments, POVMs and their JSON form.
    """

    @staticmethod
    def matrix_to_pairs(matrix: np.ndarray) -> List[List[List[float]]]:
        """
        Converts a complex matrix to nested [re, im] pairs.

        Parameters:
        ===========
            * matrix (np.ndarray): A 2-D array.

        Returns:
        ========
            * list: Rows of [re, im] pairs; floats keep their shortest round-trip repr.
        """
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]

    @staticmethod
    def pairs_to_matrix(value: Any, path: str, square: bool = True) -> np.ndarray:
        """
        Parses nested [re, im] pairs (plain numbers are read as real).

        Parameters:
        ===========
            * value (Any): The decoded JSON value.
            * path (str): Field path used in error messages, e.g. 'states[1].matrix'.
            * square (bool): Require a square matrix.

        Returns:
        ========
            * np.ndarray: The complex matrix.

        Raises:
        =======
            * FileFormatError: If the value is not a rectangular array of numbers or pairs.
        """
        if not isinstance(value, list) or len(value) == 0:
            raise FileFormatError(path, "expected a non-empty list of rows")
        rows = []
        for i, row in enumerate(value):
            if not isinstance(row, list):
                raise FileFormatError(f"{path}[{i}]", "expected a list of entries")
            entries = []
            for j, entry in enumerate(row):
                entries.append(ConvertData._parse_entry(entry, f"{path}[{i}][{j}]"))
            rows.append(entries)
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise FileFormatError(f"{path}[{i}]", f"row has {len(row)} entries, expected {width}")
        if square and width != len(rows):
            raise FileFormatError(path, f"matrix is {len(rows)}x{width}, expected a square matrix")
        return np.array(rows, dtype=complex)

    @staticmethod
    def _parse_entry(entry: Any, path: str) -> complex:
        if isinstance(entry, bool):
            raise FileFormatError(path, "expected a number or an [re, im] pair")
        if isinstance(entry, (int, float)):
            return complex(entry)
        if isinstance(entry, list) and len(entry) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry
        ):
            return complex(entry[0], entry[1])
        raise FileFormatError(path, "expected a number or an [re, im] pair")

    @staticmethod
    def read_json(path: str) -> dict:
        """Reads a UTF-8 JSON object; decoding failures become FileFormatError at '$'."""
        with open(path, encoding='utf-8') as handle:
            try:
                document = json.load(handle)
            except json.JSONDecodeError as error:
                raise FileFormatError('$', f"{path} is not valid JSON (line {error.lineno}, column {error.colno})") from error
        if not isinstance(document, dict):
            raise FileFormatError('$', "expected a JSON object")
        return document

    @staticmethod
    def _labeled_matrices(document: dict, key: str) -> tuple:
        if 'dim' not in document:
            raise FileFormatError('dim', "missing field")
        dim = document['dim']
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise FileFormatError('dim', "expected a positive integer")
        items = document.get(key)
        if not isinstance(items, list) or len(items) == 0:
            raise FileFormatError(key, "expected a non-empty list")
        labels, matrices = [], []
        for k, item in enumerate(items):
            if not isinstance(item, dict):
                raise FileFormatError(f"{key}[{k}]", "expected an object with label and matrix")
            if 'matrix' not in item:
                raise FileFormatError(f"{key}[{k}].matrix", "missing field")
            label = item.get('label', str(k))
            if not isinstance(label, (str, int)) or isinstance(label, bool):
                raise FileFormatError(f"{key}[{k}].label", "expected a string")
            matrix = ConvertData.pairs_to_matrix(item['matrix'], f"{key}[{k}].matrix")
            if matrix.shape != (dim, dim):
                raise FileFormatError(f"{key}[{k}].matrix", f"matrix is {matrix.shape[0]}x{matrix.shape[1]}, expected {dim}x{dim}")
            labels.append(str(label))
            matrices.append(matrix)
        return dim, labels, matrices

    @staticmethod
    def load_experiment(path: str, tolerances: Optional[Tolerances] = None):
        """
        Loads an experiment file {dim, block_dims?, states: [{label, matrix}]}.

        Raises:
        =======
            * FileFormatError: With the offending field path.
            * InputError: If the parsed states do not form a valid experiment.
        """
        from ..experiment.statistical_experiment import StatisticalExperiment

        document = ConvertData.read_json(path)
        _, labels, states = ConvertData._labeled_matrices(document, 'states')
        block_dims = document.get('block_dims')
        if block_dims is not None:
            if not isinstance(block_dims, list) or not all(isinstance(b, int) and not isinstance(b, bool) for b in block_dims):
                raise FileFormatError('block_dims', "expected a list of integers")
        logger.debug("Loaded %d states from %s.", len(states), path)
        return StatisticalExperiment(states, labels, block_dims, tolerances)

    @staticmethod
    def load_povm(path: str, tolerances: Optional[Tolerances] = None):
        """Loads a POVM file {dim, effects: [{label, matrix}]}."""
        from ..povm.discrete_povm import DiscretePOVM

        document = ConvertData.read_json(path)
        _, labels, effects = ConvertData._labeled_matrices(document, 'effects')
        logger.debug("Loaded %d effects from %s.", len(effects), path)
        return DiscretePOVM(effects, labels, tolerances)

    @staticmethod
    def experiment_to_json(E) -> dict:
        document = {
            'dim': E.dim,
            'states': [{'label': label, 'matrix': ConvertData.matrix_to_pairs(rho)} for label, rho in zip(E.labels, E.states)],
        }
        if E.block_dims is not None:
            document['block_dims'] = list(E.block_dims)
        return document

    @staticmethod
    def povm_to_json(M) -> dict:
        return {
            'dim': M.dim,
            'effects': [{'label': label, 'matrix': ConvertData.matrix_to_pairs(E)} for label, E in zip(M.labels, M.effects)],
        }

    @staticmethod
    def kernel_to_json(kappa) -> dict:
        """A stochastic kernel, columns indexed by the input outcomes."""
        return {
            'rows': list(kappa.row_labels),
            'columns': list(kappa.col_labels),
            'matrix': [[float(x) for x in row] for row in kappa.matrix],
        }


@dataclass
class Report:
    """
    The outcome of one command: what was run, with which tolerances, the
    verdict, the payload (matrices as [re, im] pairs), residuals and, on
    request, the elapsed time.
    """

    command: List[str]
    tolerances: Dict[str, float]
    verdict: str
    payload: Dict[str, Any] = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    timing: Optional[float] = None

    def as_dict(self) -> dict:
        document = {
            'command': list(self.command),
            'tolerances': dict(self.tolerances),
            'verdict': self.verdict,
            'payload': self.payload,
            'residuals': {k: float(v) for k, v in self.residuals.items()},
        }
        if self.timing is not None:
            document['timing'] = {'seconds': float(self.timing)}
        return document

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        """Human-readable report; matrices are only in the JSON form."""
        lines = [
            f"command: {' '.join(self.command)}",
            f"verdict: {self.verdict}",
            "tolerances: " + ", ".join(f"{k}={v!r}" for k, v in sorted(self.tolerances.items())),
        ]
        for name, value in sorted(self.payload.items()):
            if isinstance(value, (str, int, float, bool)):
                lines.append(f"{name}: {value}")
        for name, frame in self.tables.items():
            lines.append("")
            lines.append(f"{name}:")
            lines.append(frame.to_string(float_format=lambda x: f"{x:.17g}"))
        if self.residuals:
            lines.append("")
            lines.append("residuals:")
            lines.append(pd.Series(self.residuals, dtype=float).sort_index().to_string(float_format=lambda x: f"{x:.3e}"))
        if self.timing is not None:
            lines.append(f"\nelapsed: {self.timing:.3f} s")
        return "\n".join(lines) + "\n"
