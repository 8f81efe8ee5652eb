"""
Execução de Experimentos

RunConfig (JSON único com seções acquisition/gp/evo/bench), execução
do algoritmo escolhido, resumo e gravação dos artefatos.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from config.settings import get_config
from services.acquisition import AcquisitionSpec
from services.bo_loop import (
    Problem,
    RunHistory,
    convergence_rows,
    default_doe_size,
    history_to_dict,
    incumbent,
    run_bo,
    timing_rows,
)
from services.design_space import point_to_named
from services.evo_baseline import EvoConfig, run_nsga2
from services.problems import get_problem, known_problems
from services.surrogate import GpConfig
from services.turbofan_bench import PROBLEM_NAME, BenchConfig
from utils.errors import ConfigurationError
from utils.results_store import ResultsStore
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)

_SECTIONS = {
    'acquisition': AcquisitionSpec,
    'gp': GpConfig,
    'evo': EvoConfig,
    'bench': BenchConfig,
}


@dataclass(frozen=True)
class RunConfig:
    """Configuração completa de uma execução."""
    problem: str = PROBLEM_NAME
    algorithm: str = 'bo'
    budget: int = 60
    doe_size: Optional[int] = None
    seed: int = 1
    acquisition: AcquisitionSpec = field(default_factory=AcquisitionSpec)
    gp: GpConfig = field(default_factory=GpConfig)
    evo: EvoConfig = field(default_factory=EvoConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    out_dir: Optional[str] = None

    def __post_init__(self):
        ConfigValidator.raise_if_invalid(
            ConfigValidator.validate_run_config(self.scalars(), known_problems()))

    def scalars(self) -> Dict[str, Any]:
        return {
            'problem': self.problem,
            'algorithm': self.algorithm,
            'budget': self.budget,
            'doe_size': self.doe_size,
            'seed': self.seed,
        }

    @property
    def effective_doe_size(self) -> int:
        return default_doe_size(self.budget) if self.doe_size is None else self.doe_size

    @property
    def effective_out_dir(self) -> Path:
        return Path(self.out_dir) if self.out_dir else get_config().OUT_DIR

    def to_dict(self, include_out_dir: bool = True) -> Dict[str, Any]:
        data = self.scalars()
        for name in _SECTIONS:
            data[name] = getattr(self, name).to_dict()
        if include_out_dir:
            data['out_dir'] = self.out_dir
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        """
        Constrói o RunConfig a partir do JSON.

        Raises:
            ConfigurationError: chave desconhecida ou valor inválido
        """
        ConfigValidator.raise_if_invalid(ConfigValidator.check_keys('run', data, cls.__dataclass_fields__))
        kwargs = dict(data)
        for name, section in _SECTIONS.items():
            if name in kwargs:
                kwargs[name] = section.from_dict(kwargs[name])
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigurationError(f"RunConfig inválido: {e}") from e


def load_run_config(path) -> Dict[str, Any]:
    """Lê o JSON de configuração (sem validar)."""
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"JSON inválido em {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: esperado objeto JSON")
    return data


def execute_run(run_config: RunConfig) -> Dict[str, Any]:
    """
    Executa o algoritmo configurado.

    Args:
        run_config: RunConfig validado

    Returns:
        Dicionário com 'problem', 'history' e 'wall_time'
    """
    problem = get_problem(run_config.problem, run_config.bench)
    snapshot = run_config.to_dict(include_out_dir=False)
    logger.info(f"Execução: algoritmo={run_config.algorithm} problema={problem.name} "
                f"budget={run_config.budget} seed={run_config.seed}")

    start = time.perf_counter()
    if run_config.algorithm == 'bo':
        history = run_bo(problem, run_config.effective_doe_size, run_config.budget,
                         run_config.acquisition, run_config.gp, run_config.seed,
                         config_snapshot=snapshot)
    else:
        history = run_nsga2(problem, run_config.budget, run_config.evo, run_config.seed,
                            config_snapshot=snapshot)
    return {'problem': problem, 'history': history, 'wall_time': time.perf_counter() - start}


def build_summary(problem: Problem, history: RunHistory, wall_time: float) -> Dict[str, Any]:
    best = incumbent(history)
    return {
        'algorithm': history.algorithm,
        'problem': history.problem,
        'seed': history.seed,
        'budget': history.config.get('budget', history.n_evaluations),
        'n_fe': history.n_evaluations,
        'n_failed': history.n_failed,
        'feasible': best is not None,
        'best_objective': None if best is None else best[1],
        'best_point': None if best is None else point_to_named(problem.space, best[0]),
        'wall_time': round(wall_time, 3),
    }


def save_run(run_config: RunConfig, result: Dict[str, Any], out_dir=None) -> Dict[str, Any]:
    """Grava os artefatos da execução e devolve o resumo."""
    problem, history = result['problem'], result['history']
    summary = build_summary(problem, history, result['wall_time'])
    store = ResultsStore(out_dir or run_config.effective_out_dir)
    store.save_run(
        history=history_to_dict(history, problem.space),
        convergence=convergence_rows(history),
        timings=timing_rows(history),
        summary=summary,
        config=run_config.to_dict(include_out_dir=False),
    )
    return summary


def summary_line(summary: Dict[str, Any]) -> str:
    best = summary['best_objective']
    best_text = 'none' if best is None else f"{best:.6f}"
    return f"algo={summary['algorithm']} N_fe={summary['n_fe']} best={best_text}"
