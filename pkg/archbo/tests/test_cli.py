"""Testes da interface de linha de comando."""

import json

import pytest
from click.testing import CliRunner

from app import EXIT_CONFIG, EXIT_IO, EXIT_RUNTIME, cli, comparison_rows, exit_code_for
from utils.errors import DoEStarvationError, UnknownProblemError

FAST = {
    'gp': {'n_restarts': 2, 'max_evals_per_start': 60},
    'acquisition': {'criterion': 'EI', 'inner_budget': {'population': 16, 'generations': 6, 'polish_evals': 40}},
    'evo': {'population': 10},
    'bench': {'enable_hidden_constraint': False},
}


@pytest.fixture
def runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:  # click >= 8.2 removed mix_stderr; stderr is always separate
        return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'fast.json'
    path.write_text(json.dumps(FAST), encoding='utf-8')
    return str(path)


def run_cli(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


def test_enumerate(runner):
    result = run_cli(runner, 'enumerate', '--problem', 'simple-turbofan')
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {'cartesian': 216, 'valid': 70, 'architectures': 15, 'relaxed_dim': 18}


def test_unknown_problem(runner):
    result = run_cli(runner, 'enumerate', '--problem', 'rosenbrock')
    assert result.exit_code == EXIT_CONFIG
    assert 'rosenbrock' in result.stderr


def test_oracle_effort_too_small(runner, tmp_path):
    result = run_cli(runner, 'oracle', '--effort', 0, '--out', tmp_path)
    assert result.exit_code == EXIT_CONFIG


def test_compare_requires_two_runs(runner, tmp_path):
    assert run_cli(runner, 'compare', '--out', tmp_path).exit_code == EXIT_CONFIG
    result = run_cli(runner, 'compare', tmp_path / 'a', tmp_path / 'b', '--out', tmp_path)
    assert result.exit_code == EXIT_CONFIG
    assert 'summary.json' in result.stderr


def test_run_rejects_budget_not_above_doe(runner, tmp_path):
    result = run_cli(runner, 'run', '--budget', 5, '--doe-size', 5, '--out', tmp_path)
    assert result.exit_code == EXIT_CONFIG


def test_bo_run_writes_artifacts(runner, tmp_path, config_file):
    out = tmp_path / 'bo'
    result = run_cli(runner, 'run', '--config', config_file, '--budget', 8, '--doe-size', 4,
                     '--seed', 1, '--out', out)
    assert result.exit_code == 0, result.stderr
    assert result.stdout.startswith('algo=bo N_fe=8 best=')
    for name in ('history.json', 'convergence.csv', 'summary.json', 'timings.csv', 'config.json'):
        assert (out / name).is_file()
    summary = json.loads((out / 'summary.json').read_text(encoding='utf-8'))
    assert summary['n_fe'] == 8 and summary['n_failed'] == 0
    lines = (out / 'convergence.csv').read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'eval_index,status,objective,feasible,best_so_far'
    assert len(lines) == 9


def test_history_is_reproducible(runner, tmp_path, config_file):
    for name in ('a', 'b'):
        result = run_cli(runner, 'run', '--config', config_file, '--budget', 6, '--doe-size', 4,
                         '--seed', 7, '--out', tmp_path / name)
        assert result.exit_code == 0, result.stderr
    first = (tmp_path / 'a' / 'history.json').read_bytes()
    assert first == (tmp_path / 'b' / 'history.json').read_bytes()


def test_nsga2_run_and_compare(runner, tmp_path, config_file):
    for algo, seed in (('nsga2', 1), ('nsga2', 2), ('bo', 1)):
        result = run_cli(runner, 'run', '--config', config_file, '--algo', algo, '--budget', 20,
                         '--doe-size', 6, '--seed', seed, '--out', tmp_path / f'{algo}{seed}')
        assert result.exit_code == 0, result.stderr

    chart = tmp_path / 'cmp' / 'convergence.svg'
    result = run_cli(runner, 'compare', tmp_path / 'nsga21', tmp_path / 'nsga22', tmp_path / 'bo1',
                     '--out', tmp_path / 'cmp', '--chart', chart)
    assert result.exit_code == 0, result.stderr
    rows = (tmp_path / 'cmp' / 'comparison.csv').read_text(encoding='utf-8').splitlines()
    assert rows[0] == 'algorithm,budget,n_fe,runs,feasible_runs,median_best,min_best'
    assert rows[1].startswith('bo,20,20,1,')
    assert rows[2].startswith('nsga2,20,20,2,')
    assert '<svg' in chart.read_text(encoding='utf-8')


def test_comparison_rows():
    summaries = [
        {'algorithm': 'bo', 'budget': 10, 'n_fe': 10, 'best_objective': 7.0},
        {'algorithm': 'bo', 'budget': 10, 'n_fe': 10, 'best_objective': 9.0},
        {'algorithm': 'bo', 'budget': 10, 'n_fe': 10, 'best_objective': None},
    ]
    (row,) = comparison_rows(summaries)
    assert row['runs'] == 3 and row['feasible_runs'] == 2
    assert row['median_best'] == 8.0 and row['min_best'] == 7.0


def test_exit_codes():
    assert exit_code_for(UnknownProblemError('x')) == EXIT_CONFIG
    assert exit_code_for(DoEStarvationError('x')) == EXIT_RUNTIME
    assert exit_code_for(PermissionError('x')) == EXIT_IO
    assert exit_code_for(ValueError('x')) is None
