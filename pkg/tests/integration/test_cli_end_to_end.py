import json

import pytest

from cli.app import main, run
from shared.config import GammaConfig


@pytest.fixture
def gamma_path(write_json):
    return write_json('gamma.json', GammaConfig.integers().to_document())


@pytest.fixture
def wittkit(gamma_path, config):
    """Run one command against Γ = ℤ and return its report"""

    def invoke(*argv):
        report, _ = run(['--gamma', gamma_path, *argv], config=config)
        return report

    return invoke


def without_timing(report):
    return {key: value for key, value in report.items() if key != 'timing'}


class TestExitCodes:

    def test_ok(self, gamma_path, config, capsys):
        assert main(['--gamma', gamma_path, 'eval', '[L(1,2), L(3,1)]']) == 0
        report = json.loads(capsys.readouterr().out)
        assert report['status'] == 'ok'
        assert report['result']['element']['text'] == '2*L(4,3) - L(4,4)'
        assert report['gamma'] == GammaConfig.integers().fingerprint

    def test_syntax_error(self, gamma_path, config, capsys):
        assert main(['--gamma', gamma_path, 'eval', 'garbage(']) == 2
        result = json.loads(capsys.readouterr().out)['result']
        assert result['error'] == 'ExpressionSyntaxError'
        assert (result['line'], result['column']) == (1, 1)

    def test_missing_gamma(self, config, capsys):
        assert main(['eval', 'L(1,0)']) == 2
        report = json.loads(capsys.readouterr().out)
        assert report['status'] == 'input_error'
        assert 'WITTKIT_GAMMA' in report['result']['message']

    def test_gamma_from_environment(self, gamma_path, config, monkeypatch, capsys):
        monkeypatch.setenv('WITTKIT_GAMMA', gamma_path)
        assert main(['eval', 'L(1,0)']) == 0

    def test_verification_failure(self, gamma_path, write_json, config, capsys):
        path = write_json('phi0.json', {'kind': 'canonical'})
        assert main(['--gamma', gamma_path, 'cocycle', 'fit', '--input', path, '--expect', 'feasible']) == 1
        assert json.loads(capsys.readouterr().out)['status'] == 'verification_failed'

    def test_usage_error(self, gamma_path, config, capsys):
        assert main(['--gamma', gamma_path, 'jacobi', '--window', 'x', '2']) == 2
        assert main(['--gamma', gamma_path, 'frobnicate']) == 2

    def test_report_file(self, gamma_path, tmp_path, config, capsys):
        output = tmp_path / 'out' / 'report.json'
        assert main(['--gamma', gamma_path, '--output', str(output), 'eval', 'L(0,0)']) == 0
        assert capsys.readouterr().out == ''
        assert json.loads(output.read_text(encoding='utf-8'))['result']['element']['text'] == 'L(0,0)'


class TestCommands:

    def test_eval_with_central_extension(self, wittkit):
        report = wittkit('eval', '[L(2,0), L(-2,0)]', '--rule', 'wgammahat')
        assert report['result']['element']['text'] == '-4*L(0,0) + 1/2*C'
        assert report['result']['rule'] == 'wgammahat'

    def test_jacobi(self, wittkit):
        report = wittkit('jacobi', '--window', '2', '2')
        assert report['status'] == 'ok'
        assert report['result']['residual']['zero']
        assert report['result']['residual']['checked'] == 455

    def test_ideal(self, wittkit):
        report = wittkit('ideal', '--gen', 'L(-1,2) + 3*L(2,2) - L(2,4)')
        assert report['status'] == 'ok'
        assert report['result']['classified_as'] == 'W^2'
        assert report['result']['certified']

    def test_adprobe(self, wittkit):
        report = wittkit('adprobe', '--x', 'L(1,0)', '--y', 'L(0,1)', '--steps', '5')
        assert report['status'] == 'ok'
        assert report['result']['dimensions'] == [1, 2, 3, 4, 5, 6]
        assert report['result']['strictly_increasing']

    def test_derive_decompose(self, wittkit, write_json):
        path = write_json('derivation.json', {'kind': 'symbolic', 'y': 'L(1,0) - 2*L(0,3)', 'phi': {'g1': '1/2'}})
        report = wittkit('derive', 'decompose', '--input', path, '--window', '2', '3')
        assert report['status'] == 'ok'
        assert report['result']['y_text'] == '-2*L(0,3) + L(1,0)'
        assert report['result']['phi'] == {'g1': '1/2'}

    def test_derive_check(self, wittkit, write_json):
        path = write_json('derivation.json', {'kind': 'table', 'images': [
            {'alpha': [0], 'i': 0, 'image': 'L(0,0)'},
        ]})
        report = wittkit('derive', 'check', '--input', path, '--window', '1', '1')
        assert report['status'] == 'input_error'
        assert report['result']['error'] == 'MissingImage'

    def test_aut_apply(self, wittkit, write_json):
        path = write_json('aut.json', {
            'aut': {'tau': {'g1': 3}, 'c': {'value': -1, 'matrix': [[-1]]}},
            'x': 'L(1,2)',
        })
        report = wittkit('aut', 'apply', '--input', path)
        assert report['result']['image']['text'] == '-3*L(-1,2)'

    def test_aut_invert_and_verify(self, wittkit, write_json):
        path = write_json('aut.json', {'tau': {'g1': '2/5'}, 'c': {'value': -1, 'matrix': [[-1]]}})
        inverted = wittkit('aut', 'invert', '--input', path)
        assert inverted['status'] == 'ok'
        assert inverted['result']['inverse'] == {'tau': {'g1': '2/5'}, 'c': {'value': '-1', 'matrix': [[-1]]}}
        verified = wittkit('aut', 'verify', '--input', path, '--window', '2', '2')
        assert verified['status'] == 'ok'

    def test_cocycle_fit_certificate(self, wittkit, write_json):
        path = write_json('phi0.json', {'kind': 'canonical'})
        report = wittkit('cocycle', 'fit', '--input', path, '--window', '3', '2', '--expect', 'infeasible')
        assert report['status'] == 'ok'
        result = report['result']
        assert result['feasible'] is False
        assert [row['text'] for row in result['certificate']] == ['-2*f(L(0,0)) = 0', '-4*f(L(0,0)) = 1/2']

    def test_cocycle_normalize(self, wittkit, write_json):
        path = write_json('psi.json', {'kind': 'combo', 'terms': [
            ['5', {'kind': 'canonical'}],
            ['1', {'kind': 'coboundary', 'f': [{'alpha': [2], 'i': 1, 'value': '-3'}]}],
        ]})
        report = wittkit('cocycle', 'normalize', '--input', path, '--window', '2', '1')
        assert report['status'] == 'ok'
        assert report['result']['c'] == '5'
        assert report['result']['f'] == [{'alpha': [2], 'i': 1, 'value': '-3'}]

    def test_cocycle_check_on_a_perturbed_table(self, wittkit, write_json):
        path = write_json('table.json', {'kind': 'table', 'window': {'A': 2, 'I': 3}, 'entries': [
            {'a': {'degree': [0], 'level': 0}, 'b': {'degree': [0], 'level': 1}, 'value': 1},
        ]})
        report = wittkit('cocycle', 'check', '--input', path, '--window', '1', '1')
        assert report['status'] == 'verification_failed'
        assert report['result']['residual']['nonzero'] > 0

    def test_span(self, wittkit):
        report = wittkit('span', '--n', '2', '--m', '1')
        assert report['result']['holds']

    def test_theta(self, wittkit):
        report = wittkit('theta', '--beta', '2', '--gamma', '1', '--x', 'L(0,0)')
        assert report['result']['image']['text'] == '-4*L(2,0)'
        assert report['result']['beta'] == [2]

    def test_subquotient(self, wittkit):
        report = wittkit('subquotient', '--m', '0', '--n', '0', '--window', '3', '0')
        assert report['status'] == 'ok'
        assert report['result']['virasoro']['checked'] == 21

    def test_determinism(self, wittkit):
        first = wittkit('cocycle', 'fit', '--input', 'missing.json')
        assert first['status'] == 'input_error'
        reports = [wittkit('ideal', '--gen', 'L(1,1) + L(2,2)', '--window', '2', '2') for _ in range(2)]
        assert without_timing(reports[0]) == without_timing(reports[1])


class TestRankTwo:

    def test_specialized_coefficients(self, write_json, gamma_spec2, config):
        gamma = write_json('gamma2.json', gamma_spec2.to_document())
        report, _ = run(['--gamma', gamma, 'eval', '[L(g1,0), L(g2,1)]'], config=config)
        assert report['status'] == 'ok'
        assert report['result']['element']['text'] == '-16/17*L(g1+g2,1) + L(g1+g2,2)'


class TestMalformedInput:

    def test_table_value_is_never_executed(self, gamma_path, write_json, tmp_path, config, capsys):
        marker = tmp_path / 'marker'
        path = write_json('table.json', {'kind': 'table', 'entries': [{
            'a': {'degree': [0], 'level': 0}, 'b': {'degree': [0], 'level': 1},
            'value': f"__import__('os').system('touch {marker}') or 1",
        }]})
        assert main(['--gamma', gamma_path, 'cocycle', 'check', '--input', path, '--window', '1', '1']) == 2
        assert json.loads(capsys.readouterr().out)['status'] == 'input_error'
        assert not marker.exists()

    @pytest.mark.parametrize('argv, document', [
        (['cocycle', 'check', '--window', '1', '1'],
         {'kind': 'table', 'entries': [{'a': {'degree': [0], 'level': 0}, 'value': 1}]}),
        (['cocycle', 'normalize', '--window', '2', '1'],
         {'kind': 'coboundary', 'f': [{'alpha': [1], 'value': 1}]}),
        (['derive', 'check', '--window', '1', '1'],
         {'kind': 'table', 'images': [{'i': 0, 'image': 'L(0,0)'}]}),
        (['derive', 'decompose', '--window', '1', '1'],
         {'kind': 'table', 'images': [{'alpha': [0], 'i': 0}]}),
        (['aut', 'verify', '--window', '1', '1'], {'tau': {'g1': 1}, 'c': 'minus'}),
        (['aut', 'invert'], {'tau': 'g1'}),
        (['aut', 'apply'], {'aut': {'tau': {'g1': 1}}, 'x': {'terms': [5]}}),
    ])
    def test_malformed_document(self, gamma_path, write_json, config, capsys, argv, document):
        path = write_json('input.json', document)
        assert main(['--gamma', gamma_path, *argv, '--input', path]) == 2
        report = json.loads(capsys.readouterr().out)
        assert report['status'] == 'input_error'
        assert 'Traceback' not in report['result']['message']

    def test_vanishing_c_check_multiple(self, gamma_path, config, monkeypatch, capsys):
        monkeypatch.setenv('WITTKIT_C_CHECKS', '1')
        assert main(['--gamma', gamma_path, 'eval', 'L(1,0)']) == 2
        report = json.loads(capsys.readouterr().out)
        assert report['status'] == 'input_error'
        assert 'WITTKIT_C_CHECKS' in report['result']['message']
