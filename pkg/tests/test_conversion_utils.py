import json
import numpy as np
import pandas as pd
import pytest
from qsuff.utils import ConvertData, Report
from qsuff.utils._other_utils import FileFormatError, InvalidPovm, InvalidState


def write(tmp_path, document, name='input.json'):
    path = tmp_path / name
    path.write_text(json.dumps(document) if not isinstance(document, str) else document)
    return str(path)


def test_pairs_and_plain_numbers():
    matrix = ConvertData.pairs_to_matrix([[1, [0.0, 0.5]], [[0.0, -0.5], 2.0]], 'm')
    assert np.array_equal(matrix, np.array([[1, 0.5j], [-0.5j, 2]]))
    assert ConvertData.matrix_to_pairs(np.array([[1 + 2j]])) == [[[1.0, 2.0]]]


@pytest.mark.parametrize(
    "value, path",
    [
        ([], 'm'),
        ([[1, 2], [3]], 'm[1]'),
        ([[1, 2]], 'm'),
        ([[1, "x"], [0, 1]], 'm[0][1]'),
        ([[1, [1, 2, 3]], [0, 1]], 'm[0][1]'),
        ([[True, 0], [0, 1]], 'm[0][0]'),
        ([1, 2], 'm[0]'),
    ],
)
def test_pairs_to_matrix_reports_field_path(value, path):
    with pytest.raises(FileFormatError) as error:
        ConvertData.pairs_to_matrix(value, 'm')
    assert error.value.path == path
    assert str(error.value).startswith(path + ':')


def test_load_experiment(tmp_path):
    path = write(tmp_path, {
        'dim': 2,
        'block_dims': [1, 1],
        'states': [
            {'label': 'p', 'matrix': [[0.5, 0], [0, 0.5]]},
            {'label': 'q', 'matrix': [[0.2, 0], [0, 0.8]]},
        ],
    })
    E = ConvertData.load_experiment(path)
    assert E.labels == ('p', 'q')
    assert E.block_dims == (1, 1)
    document = ConvertData.experiment_to_json(E)
    assert document['block_dims'] == [1, 1]
    assert document['states'][1]['matrix'][1][1] == [0.8, 0.0]


@pytest.mark.parametrize(
    "document, path",
    [
        ({'states': []}, 'dim'),
        ({'dim': 0, 'states': []}, 'dim'),
        ({'dim': 2, 'states': []}, 'states'),
        ({'dim': 2, 'states': [{'label': 'a'}]}, 'states[0].matrix'),
        ({'dim': 2, 'states': [{'matrix': [[1]]}]}, 'states[0].matrix'),
        ({'dim': 2, 'states': [{'matrix': [[1, 0], [0, 0]]}, {'matrix': [[1, 0, 0], [0, 0, 0]]}]}, 'states[1].matrix'),
        ({'dim': 1, 'block_dims': 'x', 'states': [{'matrix': [[1]]}]}, 'block_dims'),
        ([1, 2], '$'),
    ],
)
def test_load_experiment_format_errors(tmp_path, document, path):
    with pytest.raises(FileFormatError) as error:
        ConvertData.load_experiment(write(tmp_path, document))
    assert error.value.path == path


def test_invalid_json_and_invalid_state(tmp_path):
    with pytest.raises(FileFormatError) as error:
        ConvertData.load_experiment(write(tmp_path, '{"dim": 2,'))
    assert error.value.path == '$'
    with pytest.raises(InvalidState):
        ConvertData.load_experiment(write(tmp_path, {'dim': 1, 'states': [{'matrix': [[2]]}]}))
    with pytest.raises(OSError):
        ConvertData.load_experiment(str(tmp_path / 'missing.json'))


def test_load_povm(tmp_path):
    path = write(tmp_path, {'dim': 2, 'effects': [{'label': 'z0', 'matrix': [[1, 0], [0, 0]]}, {'label': 'z1', 'matrix': [[0, 0], [0, 1]]}]})
    M = ConvertData.load_povm(path)
    assert M.labels == ('z0', 'z1')
    assert ConvertData.povm_to_json(M)['effects'][0]['matrix'][0][0] == [1.0, 0.0]
    with pytest.raises(InvalidPovm):
        ConvertData.load_povm(write(tmp_path, {'dim': 2, 'effects': [{'matrix': [[1, 0], [0, 0]]}]}))


def test_report_json_omits_timing_by_default():
    report = Report(['minimize', 'in.json'], {'eq_tol': 1e-9}, 'minimized', {'block_dims': [1]}, {'reconstruction': 1e-16})
    document = json.loads(report.to_json())
    assert 'timing' not in document
    assert document['verdict'] == 'minimized'
    assert document['residuals'] == {'reconstruction': 1e-16}
    report.timing = 0.25
    assert json.loads(report.to_json())['timing'] == {'seconds': 0.25}


def test_report_text():
    frame = pd.DataFrame({'d': [1], 'm': [2]})
    report = Report(['minimize'], {'eq_tol': 1e-9}, 'minimized', {'blocks': 1, 'matrix': [[0]]}, {'unit': 0.0}, {'blocks': frame})
    text = report.to_text()
    assert 'verdict: minimized' in text
    assert 'blocks: 1' in text
    assert 'matrix' not in text
    assert 'residuals:' in text
    assert 'elapsed' not in text
