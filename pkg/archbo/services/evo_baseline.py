"""
Baseline Evolutivo (NSGA-II)

Algoritmo genético com dominância por restrições (Deb), seleção por
torneio binário, variação mista (SBX + mutação polinomial nos genes
contínuos, cruzamento uniforme + reinicialização nos discretos) e
sobrevivência elitista (mu + lambda) com distância de aglomeração
como desempate. Emite o mesmo RunHistory do laço bayesiano.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from config.settings import get_config
from services.bo_loop import FEASIBILITY_TOL, Evaluation, Problem, RunHistory, evaluate_points
from services.design_space import (
    correct_batch,
    encode_batch,
    points_from_batch,
    sample_doe,
    to_numeric,
)
from services.variation import MixedVariation
from utils.errors import BudgetError
from utils.rng import substream
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvoConfig:
    """Parâmetros do NSGA-II."""
    population: int = 50
    crossover_prob: float = 0.9
    sbx_eta: float = 15.0
    mutation_eta: float = 20.0
    mutation_prob: Optional[float] = None
    discrete_crossover: str = 'uniform'
    discrete_mutation: str = 'random-reset'
    failed_violation: float = 1e6

    def __post_init__(self):
        ConfigValidator.raise_if_invalid(ConfigValidator.validate_evo_config(asdict(self)))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EvoConfig':
        ConfigValidator.raise_if_invalid(ConfigValidator.check_keys('evo', data, cls.__dataclass_fields__))
        return cls(**data)


def violation_of(evaluation: Evaluation, failed_violation: float = 1e6) -> float:
    """Violação total; avaliações que falham recebem `failed_violation`."""
    if not evaluation.is_ok:
        return failed_violation
    return float(sum(c for c in evaluation.constraints if c > FEASIBILITY_TOL))


def constrained_dominates(a: Evaluation, b: Evaluation, failed_violation: float = 1e6) -> bool:
    """
    Dominância por restrições com um único objetivo.

    Args:
        a: Avaliação candidata
        b: Avaliação comparada
        failed_violation: Violação atribuída às avaliações que falham

    Returns:
        True se `a` domina `b`
    """
    va, vb = violation_of(a, failed_violation), violation_of(b, failed_violation)
    if va == 0.0 and vb == 0.0:
        return a.objective < b.objective
    if va == 0.0:
        return True
    if vb == 0.0:
        return False
    return va < vb


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """Distância de aglomeração de cada linha de F (colunas = coordenadas)."""
    n, m = F.shape
    distance = np.zeros(n)
    if n <= 2:
        distance[:] = np.inf
        return distance
    for k in range(m):
        order = np.argsort(F[:, k], kind='stable')
        span = F[order[-1], k] - F[order[0], k]
        distance[order[0]] = distance[order[-1]] = np.inf
        if span <= 0:
            continue
        distance[order[1:-1]] += (F[order[2:], k] - F[order[:-2], k]) / span
    return distance


class _Population:
    """Indivíduos avaliados na forma numérica e codificada."""

    def __init__(self, rows, encoded, violation, objective):
        self.rows = rows
        self.encoded = encoded
        self.violation = violation
        self.objective = objective
        self.crowding = np.zeros(len(violation))

    @property
    def size(self) -> int:
        return len(self.violation)

    def merge(self, other: '_Population') -> '_Population':
        return _Population(np.vstack([self.rows, other.rows]),
                           np.vstack([self.encoded, other.encoded]),
                           np.concatenate([self.violation, other.violation]),
                           np.concatenate([self.objective, other.objective]))

    def take(self, index) -> '_Population':
        taken = _Population(self.rows[index], self.encoded[index],
                            self.violation[index], self.objective[index])
        taken.crowding = self.crowding[index]
        return taken

    def dominates(self, i: int, j: int) -> bool:
        vi, vj = self.violation[i], self.violation[j]
        if vi == 0.0 and vj == 0.0:
            return self.objective[i] < self.objective[j]
        if vi == 0.0:
            return True
        if vj == 0.0:
            return False
        return vi < vj

    def survival_order(self) -> np.ndarray:
        """Ordem de sobrevivência: duplicatas por último, depois chave de dominância e aglomeração."""
        n = self.size
        index = np.arange(n)
        key = np.where(self.violation > 0, 0.0, self.objective)
        preliminary = np.lexsort((index, key, self.violation))

        duplicate = np.zeros(n, dtype=bool)
        seen = set()
        for i in preliminary:
            signature = self.encoded[i].tobytes()
            if signature in seen:
                duplicate[i] = True
            seen.add(signature)

        crowding = np.zeros(n)
        fronts: Dict[tuple, List[int]] = {}
        for i in index[~duplicate]:
            fronts.setdefault((self.violation[i], key[i]), []).append(i)
        for members in fronts.values():
            crowding[members] = crowding_distance(self.encoded[members])
        self.crowding = crowding
        return np.lexsort((index, -crowding, key, self.violation, duplicate))

    def tournament(self, rng: np.random.Generator) -> int:
        i, j = (int(k) for k in rng.integers(0, self.size, size=2))
        if self.dominates(i, j):
            return i
        if self.dominates(j, i):
            return j
        if self.crowding[i] != self.crowding[j]:
            return i if self.crowding[i] > self.crowding[j] else j
        return min(i, j)


def run_nsga2(problem: Problem, budget: int, config: Optional[EvoConfig] = None,
              seed: int = 0, workers: Optional[int] = None,
              config_snapshot: Optional[Dict[str, Any]] = None) -> RunHistory:
    """
    Executa o NSGA-II até esgotar o orçamento de avaliações.

    Args:
        problem: Problema a otimizar
        budget: Número total de avaliações (a última geração é truncada)
        config: EvoConfig
        seed: Semente mestre (sub-fluxo 'evo')
        workers: Threads para avaliar a prole (padrão Config.N_WORKERS)
        config_snapshot: Configuração registrada no histórico

    Returns:
        RunHistory com exatamente `budget` registros

    Raises:
        BudgetError: budget < population
    """
    config = config or EvoConfig()
    workers = get_config().N_WORKERS if workers is None else workers
    if budget < config.population:
        raise BudgetError(f"budget ({budget}) menor que a população ({config.population})")

    space = problem.space
    rng = substream(seed, 'evo')
    variation = MixedVariation(space, config.crossover_prob, config.sbx_eta,
                               config.mutation_eta, config.mutation_prob)
    history = RunHistory('nsga2', problem.name, seed, dict(config_snapshot or {}))
    logger.info(f"NSGA-II inicializado: problema={problem.name} budget={budget} "
                f"população={config.population} seed={seed}")

    def evaluate(points, generation) -> _Population:
        evaluations = evaluate_points(problem, points, workers)
        for point, evaluation in zip(points, evaluations):
            history.append(generation, point, evaluation)
        rows = np.array([to_numeric(space, p) for p in points])
        return _Population(
            rows, encode_batch(space, rows),
            np.array([violation_of(e, config.failed_violation) for e in evaluations]),
            np.array([e.objective if e.is_ok else np.nan for e in evaluations], dtype=float),
        )

    population = evaluate(sample_doe(space, config.population, rng), 0)
    population = population.take(population.survival_order())

    generation = 1
    while history.n_evaluations < budget:
        n_children = min(config.population, budget - history.n_evaluations)
        children = []
        while len(children) < n_children:
            a, b = population.tournament(rng), population.tournament(rng)
            children.extend(variation.mate(population.rows[a], population.rows[b], rng))
        rows, active = correct_batch(space, np.array(children[:n_children]))
        offspring = evaluate(points_from_batch(space, rows, active), generation)

        merged = population.merge(offspring)
        order = merged.survival_order()
        population = merged.take(order[:config.population])

        record = history.records[-1]
        logger.debug(f"Geração {generation}: avaliações={history.n_evaluations} melhor={record.best_so_far}")
        generation += 1

    logger.info(f"NSGA-II concluído: N_fe={history.n_evaluations} falhas={history.n_failed}")
    return history
