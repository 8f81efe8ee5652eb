"""
ArchBO - Otimização Bayesiana de Arquiteturas
Interface de Linha de Comando

Comandos:
    run        executa BO ou NSGA-II e grava os artefatos
    enumerate  conta combinações, atribuições válidas e arquiteturas
    oracle     ótimo de referência por força bruta
    compare    tabela e gráfico comparando execuções
    analyze    melhor TSFC por arquitetura

Códigos de saída: 0 sucesso, 1 falha de execução, 2 uso/configuração, 3 E/S.
"""

import json
import logging
import statistics
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import click

from config.settings import get_config
from services.charts import ConvergenceChart
from services.design_space import count_architectures, enumerate_discrete, point_to_named
from services.experiment import (
    RunConfig,
    execute_run,
    load_run_config,
    save_run,
    summary_line,
)
from services.problems import get_problem
from services.turbofan_bench import (
    PROBLEM_NAME,
    BenchConfig,
    architecture_optima,
    brute_force_optimum,
)
from utils.errors import (
    ArchBOError,
    BudgetError,
    ConfigurationError,
    SchemaMismatchError,
    UnknownProblemError,
)
from utils.logger import setup_logger
from utils.results_store import ResultsStore, dumps, load_best_so_far, load_summary
from utils.rng import substream

logger = logging.getLogger('app')

EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_IO = 3

_CONFIG_ERRORS = (
    click.UsageError, ConfigurationError, UnknownProblemError, BudgetError, SchemaMismatchError,
)


def exit_code_for(error: Exception) -> Optional[int]:
    """Código de saída para uma exceção tratada (None: não tratada)."""
    if isinstance(error, _CONFIG_ERRORS):
        return EXIT_CONFIG
    if isinstance(error, OSError):
        return EXIT_IO
    if isinstance(error, ArchBOError):
        return EXIT_RUNTIME
    return None


def _configure_logging(level: Optional[str]) -> None:
    for name in ('app', 'services', 'utils'):
        setup_logger(name, level)


def _abort(error: Exception, code: int) -> None:
    logger.error(f"{type(error).__name__}: {error}", exc_info=code == EXIT_RUNTIME)
    click.echo(f"erro: {error}", err=True)
    sys.exit(code)


def _guard(func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except Exception as e:
        code = exit_code_for(e)
        if code is None:
            raise
        _abort(e, code)


def _bench_from_flags(hidden: Optional[bool], tau: Optional[float] = None) -> BenchConfig:
    data = BenchConfig().to_dict()
    if hidden is not None:
        data['enable_hidden_constraint'] = hidden
    if tau is not None:
        data['tau'] = tau
    return BenchConfig.from_dict(data)


@click.group()
@click.option('--log-level', default=None, help='Nível de log (DEBUG, INFO, WARNING...)')
def cli(log_level):
    """ArchBO: otimização bayesiana de arquiteturas mistas e hierárquicas."""
    _configure_logging(log_level)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

@cli.command()
@click.option('--config', 'config_path', type=click.Path(), default=None, help='RunConfig em JSON')
@click.option('--problem', default=None)
@click.option('--algo', 'algorithm', default=None, help='bo ou nsga2')
@click.option('--budget', type=int, default=None)
@click.option('--doe-size', type=int, default=None)
@click.option('--seed', type=int, default=None)
@click.option('--out', 'out_dir', type=click.Path(), default=None)
@click.option('--hidden/--no-hidden', default=None, help='Liga/desliga a restrição oculta')
@click.option('--criterion', default=None, help='EI, WB2 ou WB2S')
@click.option('--restarts', type=int, default=None, help='Partidas do ajuste dos GPs')
def run(config_path, problem, algorithm, budget, doe_size, seed, out_dir, hidden, criterion, restarts):
    """Executa um algoritmo e grava history.json, convergence.csv e summary.json."""
    def _run():
        data: Dict[str, Any] = load_run_config(config_path) if config_path else {}
        overrides = {'problem': problem, 'algorithm': algorithm, 'budget': budget,
                     'doe_size': doe_size, 'seed': seed, 'out_dir': out_dir}
        data.update({k: v for k, v in overrides.items() if v is not None})
        if hidden is not None:
            data['bench'] = {**data.get('bench', {}), 'enable_hidden_constraint': hidden}
        if criterion is not None:
            data['acquisition'] = {**data.get('acquisition', {}), 'criterion': criterion}
        if restarts is not None:
            data['gp'] = {**data.get('gp', {}), 'n_restarts': restarts}

        run_config = RunConfig.from_dict(data)
        result = execute_run(run_config)
        summary = save_run(run_config, result)
        click.echo(summary_line(summary))

    _guard(_run)


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------

@cli.command(name='enumerate')
@click.option('--problem', default=PROBLEM_NAME, show_default=True)
def enumerate_cmd(problem):
    """Imprime {cartesian, valid, architectures, relaxed_dim} em JSON."""
    def _enumerate():
        space = get_problem(problem).space
        enumeration = enumerate_discrete(space)
        report = {
            'cartesian': enumeration.cartesian_size,
            'valid': enumeration.valid_count,
            'architectures': count_architectures(space) if space.signature_vars else None,
            'relaxed_dim': space.relaxed_dim,
        }
        click.echo(json.dumps(report))

    _guard(_enumerate)


# ---------------------------------------------------------------------------
# oracle / analyze
# ---------------------------------------------------------------------------

def _require_turbofan(problem: str) -> None:
    get_problem(problem)
    if problem != PROBLEM_NAME:
        raise click.UsageError(f"oráculo disponível apenas para {PROBLEM_NAME}")


@cli.command()
@click.option('--problem', default=PROBLEM_NAME, show_default=True)
@click.option('--effort', type=int, default=100_000, show_default=True, help='Amostras por atribuição')
@click.option('--seed', type=int, default=1, show_default=True)
@click.option('--hidden/--no-hidden', default=None)
@click.option('--tau', type=float, default=None)
@click.option('--out', 'out_dir', type=click.Path(), default=None)
def oracle(problem, effort, seed, hidden, tau, out_dir):
    """Ótimo de referência por força bruta; grava oracle.json."""
    def _oracle():
        _require_turbofan(problem)
        bench = _bench_from_flags(hidden, tau)
        space = get_problem(problem, bench).space
        point, objective = brute_force_optimum(bench, substream(seed, 'bench'), effort)
        report = {
            'problem': problem,
            'effort': effort,
            'seed': seed,
            'bench': bench.to_dict(),
            'objective': objective,
            'point': None if point is None else point_to_named(space, point),
        }
        ResultsStore(out_dir or get_config().OUT_DIR).save_oracle(report)
        click.echo(dumps(report), nl=False)

    _guard(_oracle)


@cli.command()
@click.option('--problem', default=PROBLEM_NAME, show_default=True)
@click.option('--effort', type=int, default=10_000, show_default=True)
@click.option('--seed', type=int, default=1, show_default=True)
@click.option('--hidden/--no-hidden', default=None)
@click.option('--out', 'out_dir', type=click.Path(), default=None)
def analyze(problem, effort, seed, hidden, out_dir):
    """Melhor TSFC viável por arquitetura (architectures.csv)."""
    def _analyze():
        _require_turbofan(problem)
        bench = _bench_from_flags(hidden)
        rows = architecture_optima(bench, substream(seed, 'bench'), effort)
        fields = ['IncludeFan', 'n_shafts', 'IncludeGearbox', 'MixedNozzle', 'objective']
        table = [{k: ('' if row[k] is None else row[k]) for k in fields} for row in rows]
        ResultsStore(out_dir or get_config().OUT_DIR).write_csv('architectures.csv', table, fields)
        click.echo(_aligned(table, fields))

    _guard(_analyze)


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def _aligned(rows: List[Dict[str, Any]], fields: List[str]) -> str:
    cells = [[str(f) for f in fields]] + [[_fmt(row[f]) for f in fields] for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(fields))]
    return '\n'.join('  '.join(c.rjust(w) for c, w in zip(line, widths)) for line in cells)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def comparison_rows(summaries: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Agrupa execuções por (algoritmo, budget): mediana e mínimo do melhor objetivo."""
    groups: Dict[tuple, List[Dict[str, Any]]] = {}
    for summary in summaries:
        groups.setdefault((summary['algorithm'], summary['budget']), []).append(summary)

    rows = []
    for (algorithm, budget), members in sorted(groups.items()):
        bests = [m['best_objective'] for m in members if m['best_objective'] is not None]
        rows.append({
            'algorithm': algorithm,
            'budget': budget,
            'n_fe': statistics.median_low(m['n_fe'] for m in members),
            'runs': len(members),
            'feasible_runs': len(bests),
            'median_best': statistics.median(bests) if bests else '',
            'min_best': min(bests) if bests else '',
        })
    return rows


@cli.command()
@click.argument('run_dirs', nargs=-1, type=click.Path())
@click.option('--out', 'out_dir', type=click.Path(), required=True)
@click.option('--chart', 'chart_path', type=click.Path(), default=None, help='Arquivo SVG de convergência')
def compare(run_dirs, out_dir, chart_path):
    """Compara execuções (comparison.csv, comparison.txt e gráfico opcional)."""
    def _compare():
        if len(run_dirs) < 2:
            raise click.UsageError('compare requer ao menos 2 diretórios de execução')
        summaries = {d: load_summary(d) for d in run_dirs}
        missing = [d for d, s in summaries.items() if s is None]
        if missing:
            raise click.UsageError(f"summary.json ausente em: {', '.join(missing)}")

        rows = comparison_rows(list(summaries.values()))
        fields = ['algorithm', 'budget', 'n_fe', 'runs', 'feasible_runs', 'median_best', 'min_best']
        store = ResultsStore(out_dir)
        store.write_csv('comparison.csv', rows, fields)
        text = _aligned(rows, fields)
        store.write_text('comparison.txt', text + '\n')
        click.echo(text)

        if chart_path:
            series = {
                f"{Path(d).name}:{s['algorithm']}:{s['seed']}": load_best_so_far(d)
                for d, s in summaries.items()
            }
            chart = Path(chart_path)
            ResultsStore(chart.parent).write_text(chart.name, ConvergenceChart().render(series))
            logger.info(f"Gráfico gravado: {chart}")

    _guard(_compare)


def main():
    cli()


if __name__ == '__main__':
    main()
