import json
import logging
import numpy as np
import pytest
from qsuff import cli
from qsuff.experiment import minimal_form
from qsuff.utils import ConvertData
from qsuff.utils._other_utils import OmegaInconsistent
from qsuff.utils.superoperator_utils import Superoperator

QUICK = ['--starts', '2', '--max-iter', '500']


def write(tmp_path, name, document):
    path = tmp_path / name
    path.write_text(json.dumps(document) if not isinstance(document, str) else document)
    return str(path)


def diagonal_experiment(distributions):
    return {
        'dim': len(distributions[0]),
        'block_dims': [1] * len(distributions[0]),
        'states': [{'label': f"theta{k}", 'matrix': np.diag(p).tolist()} for k, p in enumerate(distributions)],
    }


@pytest.fixture
def three_point_file(tmp_path):
    return write(tmp_path, 'three_point.json', diagonal_experiment([[0.5, 0.25, 0.25], [0.2, 0.4, 0.4]]))


@pytest.fixture
def duplicated_file(tmp_path):
    effects = [np.diag([1.0, 0.0]), np.diag([0.0, 0.5]), np.diag([0.0, 0.5])]
    return write(tmp_path, 'duplicated.json', {'dim': 2, 'effects': [{'label': l, 'matrix': E.tolist()} for l, E in zip('abc', effects)]})


@pytest.fixture
def pvm_file(tmp_path):
    return write(tmp_path, 'pvm.json', {'dim': 2, 'effects': [{'label': 'z0', 'matrix': [[1, 0], [0, 0]]}, {'label': 'z1', 'matrix': [[0, 0], [0, 1]]}]})


@pytest.fixture
def trine_file(tmp_path, trine):
    return write(tmp_path, 'trine.json', ConvertData.povm_to_json(trine))


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 and '--text' not in argv else out)


def test_minimize_single_state(tmp_path, capsys):
    path = write(tmp_path, 'single.json', {'dim': 2, 'states': [{'label': 'rho', 'matrix': [[0.7, [0.1, 0.1]], [[0.1, -0.1], 0.3]]}]})
    code, report = run(capsys, 'minimize', path)
    assert code == 0
    assert report['verdict'] == 'minimized'
    assert report['payload']['block_dims'] == [1]
    assert report['payload']['multiplicities'] == [2]
    assert report['command'] == ['minimize', path]
    assert report['residuals']['reconstruction'] <= 1e-8


def test_minimize_three_point_experiment(three_point_file, capsys):
    code, report = run(capsys, 'minimize', three_point_file, '--t-grid', '3')
    assert code == 0
    payload = report['payload']
    assert payload['block_points'] == [[0], [1, 2]]
    assert payload['blocks'][1]['q'] == {'theta0': pytest.approx(0.5), 'theta1': pytest.approx(0.8)}
    assert len(payload['t_grid']) == 3
    assert 'timing' not in report


def test_minimal_form_matrices_parse_back(three_point_file, capsys):
    _, report = run(capsys, 'minimize', three_point_file)
    expected, _ = minimal_form(ConvertData.load_experiment(three_point_file))
    for state, rho in zip(report['payload']['minimal_form']['states'], expected.states):
        assert np.abs(ConvertData.pairs_to_matrix(state['matrix'], 'matrix') - rho).max() <= 1e-15


def test_reports_are_deterministic(three_point_file, capsys):
    first = run(capsys, 'minimize', three_point_file)
    second = run(capsys, 'minimize', three_point_file)
    assert first == second


def test_minimize_with_validation(three_point_file, capsys):
    code, report = run(capsys, 'minimize', three_point_file, '--validate', *QUICK)
    assert code == 0
    assert report['payload']['validated'] is True
    _, report = run(capsys, 'minimize', three_point_file)
    assert report['payload']['validated'] is False


def test_failed_validation_exits_with_two(monkeypatch, three_point_file, caplog):
    import qsuff.experiment.coarse_graining as coarse_graining
    monkeypatch.setattr(coarse_graining, 'find_fixing_channel', lambda E, **kwargs: Superoperator.identity(E.dim))
    with caplog.at_level(logging.ERROR):
        assert cli.main(['minimize', three_point_file, '--validate', *QUICK]) == 2
    assert 'NotMinimalForm' in caplog.text


def test_text_report_and_timing(three_point_file, capsys):
    code, text = run(capsys, 'minimize', three_point_file, '--text', '--timing')
    assert code == 0
    assert 'verdict: minimized' in text
    assert 'elapsed' in text


def test_input_errors_exit_with_one(tmp_path, capsys, caplog):
    bad = write(tmp_path, 'bad.json', {'dim': 2, 'states': [{'matrix': [[1, 0, 0], [0, 0, 0]]}]})
    with caplog.at_level(logging.ERROR):
        assert cli.main(['minimize', bad]) == 1
    assert 'states[0].matrix' in caplog.text
    assert cli.main(['minimize', str(tmp_path / 'missing.json')]) == 1
    assert cli.main(['minimize', write(tmp_path, 'broken.json', '{"dim": ')]) == 1
    assert capsys.readouterr().out == ''


def test_numerical_failures_exit_with_two(monkeypatch, three_point_file, caplog):
    def fail(*args, **kwargs):
        raise OmegaInconsistent("weights disagree across times", {'t=1': 1e-3})
    monkeypatch.setattr(cli, 'minimal_form', fail)
    with caplog.at_level(logging.ERROR):
        assert cli.main(['minimize', three_point_file]) == 2
    assert 'OmegaInconsistent' in caplog.text
    assert 'spread' in caplog.text


def test_equiv_of_a_file_with_itself(three_point_file, capsys):
    code, report = run(capsys, 'equiv', three_point_file, three_point_file, *QUICK)
    assert code == 0
    assert report['verdict'] == 'isomorphic'
    assert report['payload']['pairing'] == [0, 1]
    assert report['residuals']['conjugation'] <= 1e-7


def test_equiv_of_different_experiments(tmp_path, capsys):
    first = write(tmp_path, 'first.json', diagonal_experiment([[0.5, 0.5], [0.2, 0.8]]))
    second = write(tmp_path, 'second.json', diagonal_experiment([[0.5, 0.5], [0.3, 0.7]]))
    code, report = run(capsys, 'equiv', first, second, *QUICK)
    assert code == 0
    assert report['verdict'] == 'not-isomorphic'


def test_povm_order(trine_file, pvm_file, capsys):
    code, report = run(capsys, 'povm-order', trine_file, pvm_file)
    assert code == 0
    assert report['verdict'] == 'incomparable'
    assert report['payload'] == {'first<=second': 'infeasible', 'second<=first': 'infeasible'}
    code, report = run(capsys, 'povm-order', pvm_file, pvm_file)
    assert report['verdict'] == 'equivalent'
    assert report['payload']['first<=second_kernel']['rows'] == ['z0', 'z1']


def test_povm_kernel_check(pvm_file, duplicated_file, capsys):
    code, report = run(capsys, 'povm-kernel-check', pvm_file)
    assert code == 0
    assert report['verdict'] == 'minimal'
    assert report['payload']['lp_value'] <= 1e-9
    _, report = run(capsys, 'povm-kernel-check', duplicated_file)
    assert report['verdict'] == 'not-minimal'
    assert report['payload']['lp_value'] >= 0.5


def test_povm_minimize_with_dilation(duplicated_file, capsys):
    code, report = run(capsys, 'povm-minimize', duplicated_file, '--dilate')
    assert code == 0
    assert report['verdict'] == 'merged'
    assert report['payload']['merge_map'] == [0, 1, 1]
    assert [e['label'] for e in report['payload']['minimal_povm']['effects']] == ['a', 'b+c']
    assert report['payload']['dilation']['recovered_povm_equivalent'] is True
    assert max(report['residuals'].values()) <= 1e-9


def test_dilate(trine_file, capsys):
    code, report = run(capsys, 'dilate', trine_file)
    assert code == 0
    assert report['verdict'] == 'dilated'
    assert report['payload']['gamma']['in_dim'] == 3
    assert report['residuals']['dilation_factorization'] <= 1e-12


def test_coarse_graining_onto_merged_points(tmp_path, three_point_file, capsys):
    merged = write(tmp_path, 'merged.json', diagonal_experiment([[0.5, 0.5], [0.2, 0.8]]))
    code, report = run(capsys, 'coarse', merged, three_point_file, *QUICK)
    assert code == 0
    assert report['verdict'] == 'coarse-graining'
    assert report['payload']['channel']['in_dim'] == 2
    assert report['residuals']['state'] <= 1e-6
