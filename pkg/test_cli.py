"""
Tests for the transversal command line
"""

import json

import pytest

from modules.config import Settings
from transversal import main


@pytest.fixture(autouse=True)
def default_settings(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    defaults = Settings.as_dict()
    yield
    Settings.apply(defaults)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_analyze_chebyshev(capsys):
    code, report = run(capsys, 'analyze', 'chebyshev2')
    assert code == 0
    assert report['schema'] == 'transversal-report/1'
    results = report['results']
    assert results['degree'] == 2
    assert results['nu'] == 2
    assert results['nu_finite'] == 1
    assert results['orbits'][0][:4] == [[0.0, 0.0], [-2.0, 0.0], [2.0, 0.0], [2.0, 0.0]]
    assert results['critical'][1]['location'] == 'inf'
    assert 'wall_time' not in report


def test_timing_is_opt_in(capsys):
    _, report = run(capsys, 'analyze', 'chebyshev2', '--timing')
    assert report['wall_time'] >= 0


def test_malformed_json_is_an_input_error(capsys):
    code, report = run(capsys, 'analyze', '{"numerator": [1, 0,')
    assert code == 2
    assert report is None


def test_unknown_fixture_is_an_input_error(capsys):
    code, _ = run(capsys, 'analyze', 'no-such-map')
    assert code == 2


def test_error_goes_to_stderr_and_stdout_stays_clean(capsys):
    assert main(['analyze', 'no-such-map']) == 2
    captured = capsys.readouterr()
    assert captured.out == ''
    assert 'Error' in captured.err


def test_non_numeric_coefficient_is_an_input_error(capsys):
    code, report = run(capsys, 'analyze', '{"numerator": [["x", 0], 0, 1]}')
    assert code == 2
    assert report is None


def test_malformed_symbolic_model_is_an_input_error(capsys):
    code, report = run(capsys, 'relations', '{"nu": "x", "generators": []}')
    assert code == 2
    assert report is None


def test_inline_json_map(capsys):
    code, report = run(capsys, 'analyze', '{"numerator": [[1, 0], 0, 1], "denominator": [0, 1]}')
    assert code == 0
    assert report['results']['degree'] == 2
    assert report['results']['nu'] == 2


def test_fig1_relations(capsys):
    code, report = run(capsys, 'relations', 'fig1')
    assert code == 0
    collection = report['results']['collection']
    assert len(collection['relations']) == 6
    assert collection['zeta'] == 3
    assert collection['proper'] == 'true'


def test_certify_chebyshev(capsys):
    code, report = run(capsys, 'certify', 'chebyshev2')
    assert code == 0
    certificate = report['results']['certificate']
    assert certificate['certified'] is True
    assert certificate['jacobian']['chart'] == 'poly'
    assert certificate['jacobian']['rank'] == 1


def test_certify_with_explicit_relation_and_sigma(capsys):
    code, report = run(capsys, 'certify', 'chebyshev2', '--chart', 'rat',
                       '--relation', '1,1,3,2', '--relation', '2,2,1,0', '--sigma', '1,1,1,3')
    assert code == 0
    assert report['results']['sigma_rank'] == 2
    assert report['results']['sigma_independent'] is True


def test_certify_lattes_reports_rank_drop(capsys):
    code, report = run(capsys, 'certify', 'lattes:a=2')
    assert code == 1
    certificate = report['results']['certificate']
    assert certificate['certified'] is False
    assert certificate['jacobian']['rank'] == 5
    assert certificate['kernel_vector'] is not None


def test_certify_needs_a_map(capsys):
    code, _ = run(capsys, 'certify', 'fig1')
    assert code == 2


def test_certify_unrealized_relation_is_an_input_error(capsys):
    code, report = run(capsys, 'certify', 'chebyshev2', '--relation', '1,1,2,1')
    assert code == 2
    assert report is None


def test_output_file(capsys, tmp_path):
    target = tmp_path / 'report.json'
    code, report = run(capsys, 'certify', 'misiurewicz_i', '--output', str(target))
    assert code == 0
    assert report is None
    saved = json.loads(target.read_text(encoding='utf-8'))
    assert saved['command'] == 'certify'
    assert saved['tolerances']['kernel_tol'] == Settings.KERNEL_TOL
    assert set(saved['tolerances']) == set(Settings.as_dict())


def test_pushforward_of_relation(capsys):
    code, report = run(capsys, 'pushforward', 'chebyshev2', '--relation', '1,1,3,2')
    assert code == 0
    (entry,) = report['results']['differentials']
    assert entry['zero'] is False
    assert entry['invariance_residual'] >= 0.1


def test_pushforward_of_trivial_relation_is_zero(capsys):
    code, report = run(capsys, 'pushforward', 'chebyshev2', '--relation', '1,1,1,1')
    assert code == 0
    (entry,) = report['results']['differentials']
    assert entry['zero'] is True


def test_lattes_demo_accepts_bare_parameter(capsys):
    code, report = run(capsys, 'lattes-demo', '2+0.5i', '--seed', '0')
    assert code == 0
    assert report['results']['lattes']['passed'] is True


def test_deficit_check(capsys):
    code, report = run(capsys, 'deficit-check', 'chebyshev2', '--seed', '0')
    assert code == 0
    assert all(item['mismatch'] <= 1e-5 for item in report['results']['checks'])


def test_no_command_prints_help(capsys):
    assert main([]) == 0
