"""
Laço de Otimização Bayesiana

DoE por hipercubo latino -> ajuste dos substitutos -> preenchimento
com restrições -> avaliação -> atualização, com registro das
avaliações que falham (restrição oculta) e do melhor ponto viável.
Os tipos de histórico são compartilhados com o baseline evolutivo.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import get_config
from services.acquisition import AcquisitionSpec, Surrogates, solve_infill
from services.design_space import (
    DesignPoint,
    DesignSpace,
    encode_batch,
    point_from_named,
    point_to_named,
    relaxed_groups,
    sample_doe,
    to_numeric,
)
from services.surrogate import PER_VARIABLE, GpConfig, fit_feasibility, fit_gp
from utils.errors import BudgetError, ConfigurationError, DoEStarvationError
from utils.rng import substream

logger = logging.getLogger(__name__)

OK = 'ok'
FAILED = 'failed'
FEASIBILITY_TOL = 1e-6


@dataclass(frozen=True)
class Evaluation:
    """Resultado de uma avaliação da caixa-preta (restrições na convenção c <= 0)."""
    status: str
    objective: Optional[float] = None
    constraints: Tuple[float, ...] = ()
    wall_time: float = 0.0

    def __post_init__(self):
        if self.status not in (OK, FAILED):
            raise ConfigurationError(f"status de avaliação inválido: {self.status!r}")
        if self.status == FAILED:
            object.__setattr__(self, 'objective', None)
            object.__setattr__(self, 'constraints', ())
        else:
            object.__setattr__(self, 'objective', float(self.objective))
            object.__setattr__(self, 'constraints', tuple(float(c) for c in self.constraints))

    @classmethod
    def ok(cls, objective: float, constraints: Sequence[float] = (), wall_time: float = 0.0) -> 'Evaluation':
        return cls(OK, objective, tuple(constraints), wall_time)

    @classmethod
    def failed(cls, wall_time: float = 0.0) -> 'Evaluation':
        return cls(FAILED, wall_time=wall_time)

    @property
    def is_ok(self) -> bool:
        return self.status == OK

    @property
    def total_violation(self) -> float:
        return float(sum(max(0.0, c) for c in self.constraints))

    def is_feasible(self, tol: float = FEASIBILITY_TOL) -> bool:
        return self.is_ok and all(c <= tol for c in self.constraints)


@dataclass(frozen=True, eq=False)
class Problem:
    """Problema de otimização (caixa-preta custosa)."""
    name: str
    space: DesignSpace
    evaluate: Callable[[DesignPoint], Evaluation]
    n_constraints: int = 0
    reentrant: bool = False


@dataclass(frozen=True)
class EvalRecord:
    """Uma avaliação no histórico, com o melhor viável até ela."""
    iteration: int
    point: DesignPoint
    evaluation: Evaluation
    best_so_far: Optional[float]
    fit_time: float = 0.0
    infill_time: float = 0.0


@dataclass
class RunHistory:
    """Histórico completo de uma execução (N_fe = len(records))."""
    algorithm: str
    problem: str
    seed: int
    config: Dict[str, Any] = field(default_factory=dict)
    records: List[EvalRecord] = field(default_factory=list)

    @property
    def n_evaluations(self) -> int:
        return len(self.records)

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.records if not r.evaluation.is_ok)

    @property
    def final_best(self) -> Optional[Tuple[DesignPoint, float]]:
        return incumbent(self)

    def append(self, iteration: int, point: DesignPoint, evaluation: Evaluation,
               fit_time: float = 0.0, infill_time: float = 0.0) -> EvalRecord:
        best = self.records[-1].best_so_far if self.records else None
        if evaluation.is_feasible() and (best is None or evaluation.objective < best):
            best = evaluation.objective
        record = EvalRecord(iteration, point, evaluation, best, fit_time, infill_time)
        self.records.append(record)
        return record


def incumbent(history: RunHistory) -> Optional[Tuple[DesignPoint, float]]:
    """
    Melhor registro viável (todas as restrições <= 1e-6).

    Args:
        history: Histórico da execução

    Returns:
        (ponto, objetivo) ou None se não houver registro viável
    """
    best = None
    for record in history.records:
        ev = record.evaluation
        if ev.is_feasible() and (best is None or ev.objective < best[1]):
            best = (record.point, ev.objective)
    return best


def evaluate_points(problem: Problem, points: Sequence[DesignPoint],
                    workers: int = 1) -> List[Evaluation]:
    """Avalia pontos mantendo a ordem de entrada (concorrente se o problema é reentrante)."""
    def timed(point):
        start = time.perf_counter()
        evaluation = problem.evaluate(point)
        return replace(evaluation, wall_time=time.perf_counter() - start)

    if problem.reentrant and workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(timed, points))
    return [timed(p) for p in points]


def default_doe_size(budget: int) -> int:
    return max(3, min(20, budget // 3))


# ---------------------------------------------------------------------------
# Laço principal
# ---------------------------------------------------------------------------

class _ModelCache:
    """Hiperparâmetros do ajuste anterior, usados como partida extra."""

    def __init__(self):
        self.theta: Dict[str, np.ndarray] = {}

    def fit(self, key, X, y, config, rng, groups):
        model = fit_gp(X, y, config, rng, groups, self.theta.get(key))
        self.theta[key] = model.theta
        return model

    def fit_feasibility(self, X, labels, config, rng, groups):
        model = fit_feasibility(X, labels, config, rng, groups, self.theta.get('feasibility'))
        if model.inner is not None:
            self.theta['feasibility'] = model.inner.theta
        return model


def _fit_surrogates(space: DesignSpace, history: RunHistory, gp_config: GpConfig,
                    cache: _ModelCache, rng: np.random.Generator,
                    groups: Optional[np.ndarray]) -> Tuple[Surrogates, np.ndarray]:
    points = [r.point for r in history.records]
    X_all = encode_batch(space, np.array([to_numeric(space, p) for p in points]))
    ok = np.array([r.evaluation.is_ok for r in history.records])
    ok_records = [r for r in history.records if r.evaluation.is_ok]

    X_ok = X_all[ok]
    y = np.array([r.evaluation.objective for r in ok_records])
    objective = cache.fit('objective', X_ok, y, gp_config, rng, groups)

    n_constraints = len(ok_records[0].evaluation.constraints)
    constraints = []
    for j in range(n_constraints):
        c = np.array([r.evaluation.constraints[j] for r in ok_records])
        constraints.append(cache.fit(f'c{j}', X_ok, c, gp_config, rng, groups))

    feasibility = cache.fit_feasibility(X_all, ok.astype(int), gp_config, rng, groups)
    return Surrogates(objective, tuple(constraints), feasibility), X_all


def run_bo(problem: Problem, doe_size: Optional[int], budget: int,
           acq_spec: Optional[AcquisitionSpec] = None, gp_config: Optional[GpConfig] = None,
           seed: int = 0, warm_restarts: int = 2, workers: Optional[int] = None,
           config_snapshot: Optional[Dict[str, Any]] = None) -> RunHistory:
    """
    Executa a otimização bayesiana com restrições.

    Args:
        problem: Problema a otimizar
        doe_size: Tamanho da DoE inicial (None: min(20, budget // 3), mínimo 3)
        budget: Número total de avaliações (as que falham contam)
        acq_spec: AcquisitionSpec
        gp_config: GpConfig do primeiro ajuste
        seed: Semente mestre (sub-fluxos doe, fit, infill)
        warm_restarts: Partidas LHS dos ajustes seguintes, além do theta anterior
        workers: Threads para a DoE (padrão Config.N_WORKERS)
        config_snapshot: Configuração registrada no histórico

    Returns:
        RunHistory com exatamente `budget` registros

    Raises:
        BudgetError: budget <= doe_size
        DoEStarvationError: menos de 2 avaliações válidas após uma nova DoE
    """
    acq_spec = acq_spec or AcquisitionSpec()
    gp_config = gp_config or GpConfig()
    doe_size = default_doe_size(budget) if doe_size is None else doe_size
    workers = get_config().N_WORKERS if workers is None else workers
    if doe_size < 1:
        raise ConfigurationError(f"doe_size deve ser >= 1 (recebido {doe_size})")
    if budget <= doe_size:
        raise BudgetError(f"budget ({budget}) deve ser maior que doe_size ({doe_size})")

    space = problem.space
    rng_doe, rng_fit, rng_infill = (substream(seed, name) for name in ('doe', 'fit', 'infill'))
    groups = relaxed_groups(space) if gp_config.anisotropy == PER_VARIABLE else None
    history = RunHistory('bo', problem.name, seed, dict(config_snapshot or {}))

    logger.info(f"BO inicializado: problema={problem.name} budget={budget} doe={doe_size} seed={seed}")

    points = sample_doe(space, doe_size, rng_doe)
    for point, evaluation in zip(points, evaluate_points(problem, points, workers)):
        history.append(0, point, evaluation)

    if budget - history.n_evaluations > 0 and _n_ok(history) < 2:
        n_retry = min(doe_size, budget - history.n_evaluations)
        logger.warning(f"DoE com {_n_ok(history)} avaliação(ões) válida(s); nova DoE de {n_retry} pontos")
        points = sample_doe(space, n_retry, rng_doe)
        for point, evaluation in zip(points, evaluate_points(problem, points, workers)):
            history.append(0, point, evaluation)
    if _n_ok(history) < 2:
        raise DoEStarvationError(
            f"DoE starvation: {_n_ok(history)} avaliação(ões) válida(s) em {history.n_evaluations}"
        )

    cache = _ModelCache()
    fit_config = gp_config
    iteration = 1
    while history.n_evaluations < budget:
        start = time.perf_counter()
        models, X_all = _fit_surrogates(space, history, fit_config, cache, rng_fit, groups)
        fit_time = time.perf_counter() - start
        fit_config = replace(gp_config, n_restarts=max(1, min(warm_restarts, gp_config.n_restarts)))

        best = incumbent(history)
        f_min = None if best is None else best[1]

        start = time.perf_counter()
        result = solve_infill(space, models, f_min, acq_spec, rng_infill, X_evaluated=X_all)
        infill_time = time.perf_counter() - start

        evaluation = evaluate_points(problem, [result.point])[0]
        record = history.append(iteration, result.point, evaluation, fit_time, infill_time)
        logger.info(
            f"Iteração {iteration}: status={evaluation.status} "
            f"objetivo={evaluation.objective} melhor={record.best_so_far}"
        )
        iteration += 1

    logger.info(f"BO concluído: N_fe={history.n_evaluations} falhas={history.n_failed}")
    return history


def _n_ok(history: RunHistory) -> int:
    return sum(1 for r in history.records if r.evaluation.is_ok)


# ---------------------------------------------------------------------------
# Serialização
# ---------------------------------------------------------------------------

def history_to_dict(history: RunHistory, space: DesignSpace) -> Dict[str, Any]:
    """Forma JSON do histórico (sem tempos de relógio, para ser reprodutível byte a byte)."""
    best = incumbent(history)
    return {
        'algorithm': history.algorithm,
        'problem': history.problem,
        'seed': history.seed,
        'config': history.config,
        'n_evaluations': history.n_evaluations,
        'n_failed': history.n_failed,
        'records': [
            {
                'iteration': r.iteration,
                'point': point_to_named(space, r.point),
                'active': list(r.point.active),
                'status': r.evaluation.status,
                'objective': r.evaluation.objective,
                'constraints': list(r.evaluation.constraints),
                'best_so_far': r.best_so_far,
            }
            for r in history.records
        ],
        'final_best': None if best is None else {
            'point': point_to_named(space, best[0]),
            'objective': best[1],
        },
    }


def history_from_dict(data: Dict[str, Any], space: DesignSpace) -> RunHistory:
    history = RunHistory(data['algorithm'], data['problem'], data['seed'], data.get('config', {}))
    for item in data['records']:
        point = point_from_named(space, item['point'])
        if item['status'] == OK:
            evaluation = Evaluation.ok(item['objective'], item['constraints'])
        else:
            evaluation = Evaluation.failed()
        history.append(item['iteration'], point, evaluation)
    return history


def convergence_rows(history: RunHistory) -> List[Dict[str, Any]]:
    """Linhas do convergence.csv: eval_index, status, objective, feasible, best_so_far."""
    return [
        {
            'eval_index': i,
            'status': r.evaluation.status,
            'objective': '' if r.evaluation.objective is None else repr(r.evaluation.objective),
            'feasible': int(r.evaluation.is_feasible()),
            'best_so_far': '' if r.best_so_far is None else repr(r.best_so_far),
        }
        for i, r in enumerate(history.records, start=1)
    ]


def timing_rows(history: RunHistory) -> List[Dict[str, Any]]:
    return [
        {
            'eval_index': i,
            'iteration': r.iteration,
            'eval_time': f"{r.evaluation.wall_time:.6f}",
            'fit_time': f"{r.fit_time:.6f}",
            'infill_time': f"{r.infill_time:.6f}",
        }
        for i, r in enumerate(history.records, start=1)
    ]
