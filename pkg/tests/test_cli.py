import csv
import json
import os

import pytest

from main import build_parser, main


def write_config(tmp_path, payload, name='run.json'):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding='utf-8')
    return str(path)


def run(tmp_path, *argv, operator_hook=None):
    out = tmp_path / 'out'
    return main(['--output-dir', str(out), *argv], operator_hook=operator_hook), out


def test_parser_takes_global_flags_before_command():
    args = build_parser().parse_args(['-v', '--no-cache', 'solve', 'run.json'])
    assert args.command == 'solve' and args.config == 'run.json'
    assert args.verbose and args.no_cache and args.output_dir is None


def test_solve_zero_data(tmp_path):
    config = write_config(tmp_path, {'n_cells': 16, 'ic_u': 'zero', 'ic_v': 'zero',
                                     'dt': 0.01, 't_end': 0.05})
    code, out = run(tmp_path, 'solve', config)
    assert code == 0
    summary = json.loads((out / 'summary.json').read_text(encoding='utf-8'))
    assert summary['verdict'] == 'completed'
    assert summary['t_max_estimate'] is None
    assert summary['steps_taken'] == 5
    with open(out / 'trajectory.csv', newline='', encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 6 * 17
    assert all(float(row['u']) == 0.0 and float(row['w']) == 0.0 for row in rows)


def test_solve_blowup_exit_code(tmp_path):
    config = write_config(tmp_path, {
        'n_cells': 16, 'a_disabled': True, 'nonlinearity': 'square_test',
        'ic_u': {'preset': 'constant', 'value': 10.0}, 'ic_v': 'zero',
        'scheme': 'exp_euler', 'dt': 1e-4, 't_end': 0.2, 'output_every': 100,
    })
    code, out = run(tmp_path, 'solve', config)
    assert code == 3
    summary = json.loads((out / 'summary.json').read_text(encoding='utf-8'))
    assert summary['verdict'] == 'blowup_detected'
    assert summary['t_max_estimate'] == pytest.approx(0.1, rel=0.1)


def test_config_errors_exit_one_without_output(tmp_path):
    code, out = run(tmp_path, 'solve', write_config(tmp_path, {'n_cell': 16}))
    assert code == 1
    assert not os.path.exists(out / 'trajectory.csv')
    code, _ = run(tmp_path, 'verify', str(tmp_path / 'missing.json'))
    assert code == 1
    assert main([]) == 1
    assert main(['solve']) == 1


def test_help_exits_zero(capsys):
    assert main(['--help']) == 0
    assert 'converge' in capsys.readouterr().out


@pytest.mark.parametrize('n_cells', [8, 64])
def test_verify_passes(tmp_path, n_cells):
    code, out = run(tmp_path, '--no-cache', 'verify', write_config(tmp_path, {'n_cells': n_cells}))
    results = json.loads((out / 'verify.json').read_text(encoding='utf-8'))
    failed = [r['name'] for r in results if not r['passed']]
    assert failed == []
    assert code == 0
    assert all(r['statement'] for r in results)
    names = {r['name'] for r in results}
    assert {'dissipativity', 'coercivity', 'weak_form_residual', 'lipschitz_composite[C=10]'} <= names


def test_verify_catches_broken_generator(tmp_path):
    def flip_diagonal(ops):
        return ops.replace(A=ops.A.with_diagonal(0, -ops.A.diagonal(0)))

    code, out = run(tmp_path, 'verify', write_config(tmp_path, {'n_cells': 16}),
                    operator_hook=flip_diagonal)
    assert code == 2
    results = {r['name']: r for r in json.loads((out / 'verify.json').read_text(encoding='utf-8'))}
    assert results['dissipativity']['passed'] is False
    assert 'dissipative' in results['dissipativity']['statement']


def test_converge_defaults(tmp_path):
    code, out = run(tmp_path, 'converge', write_config(tmp_path, {}))
    assert code == 0
    with open(out / 'converge.csv', newline='', encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    assert {row['study'] for row in rows} == {'spatial', 'exp_euler', 'etd2'}
    assert len(rows) == 9
    finest = {row['study']: float(row['observed_order']) for row in rows if row['level'] in ('128', '2')}
    assert 1.7 <= finest['spatial'] <= 2.3
    assert 0.8 <= finest['exp_euler'] <= 1.2
    assert 1.7 <= finest['etd2'] <= 2.3


def test_debug_logs_resolved_configuration(tmp_path, caplog):
    config = write_config(tmp_path, {'n_cells': 16, 'ic_u': 'zero', 'ic_v': 'zero',
                                     'dt': 0.01, 't_end': 0.02})
    code, _ = run(tmp_path, '--debug', 'solve', config)
    assert code == 0
    assert 'n_cells = 16' in caplog.text
    assert "scheme = 'etd2'" in caplog.text
