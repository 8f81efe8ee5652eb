"""
Benchmark Analítico de Arquitetura de Turbofan

Substituto de mesa para o problema de arquitetura de motor: espaço
hierárquico com 15 variáveis (18 relaxadas, 216 combinações discretas,
70 atribuições válidas, 15 arquiteturas), TSFC sintético, cinco
restrições e uma região de falha determinística (restrição oculta)
que cobre cerca de metade de uma DoE aleatória.
"""

import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from services.bo_loop import Evaluation, Problem
from services.design_space import (
    CONTINUOUS,
    ActivationRule,
    DesignPoint,
    DesignSpace,
    ValueRule,
    VariableSpec,
    architecture_signature,
    enumerate_discrete,
    from_numeric,
    is_corrected,
    sample_uniform_batch,
    to_numeric,
)
from utils.errors import ConfigurationError, UncorrectedPointError
from utils.logger import log_performance
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)

PROBLEM_NAME = 'simple-turbofan'
N_CONSTRAINTS = 5
MIN_SAMPLES = 10_000
HIDDEN_AMPLITUDE = 1.15

# Ótimo de referência (oráculo, tau padrão): o ótimo analítico fica fora da
# região de falha (margem oculta ~ -0.42), então coincide com o caso sem falhas
REFERENCE_OPTIMUM = 6.600

# Índices das variáveis
FAN, GEARBOX, NOZZLE, N_SHAFTS, POWER_OFFTAKE, BLEED_OFFTAKE, BPR, FPR, OPR = range(9)
PR_FACTORS = (9, 10, 11)
RPMS = (12, 13, 14)

_LOG_OPR_SPAN = math.log(60.0 / 1.1)
_PENALTY_WEIGHT = 1e3
_FAILED_PENALTY = 1e6


@dataclass(frozen=True)
class BenchConfig:
    """Parâmetros do benchmark."""
    tsfc_base: float = 22.0
    tau: float = 0.0
    enable_hidden_constraint: bool = True

    def __post_init__(self):
        ConfigValidator.raise_if_invalid(ConfigValidator.validate_bench_config(asdict(self)))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BenchConfig':
        ConfigValidator.raise_if_invalid(ConfigValidator.check_keys('bench', data, cls.__dataclass_fields__))
        return cls(**data)


@dataclass(frozen=True, eq=False)
class BatchEvaluation:
    """Resultado vetorizado: falha, objetivo e restrições (NaN nas linhas que falham)."""
    failed: np.ndarray
    objective: np.ndarray
    constraints: np.ndarray

    @property
    def violation(self) -> np.ndarray:
        return np.sum(np.maximum(self.constraints, 0.0), axis=1)

    def penalized(self) -> np.ndarray:
        value = self.objective + _PENALTY_WEIGHT * self.violation
        return np.where(self.failed, _FAILED_PENALTY, value)


@lru_cache(maxsize=1)
def simple_turbofan_space() -> DesignSpace:
    """
    Espaço de projeto do turbofan simples.

    Returns:
        DesignSpace com regras de ativação (fan e número de eixos),
        regras de valor das tomadas de potência/sangria e assinatura
        {IncludeFan, n_shafts, IncludeGearbox, MixedNozzle}
    """
    variables = (
        VariableSpec.categorical('IncludeFan', (False, True)),
        VariableSpec.categorical('IncludeGearbox', (False, True)),
        VariableSpec.categorical('MixedNozzle', (False, True)),
        VariableSpec.integer('n_shafts', 1, 3),
        VariableSpec.integer('PowerOfftake', 1, 3),
        VariableSpec.integer('BleedOfftake', 1, 3),
        VariableSpec.continuous('BPR', 2.0, 12.5),
        VariableSpec.continuous('FPR', 1.1, 1.8),
        VariableSpec.continuous('OPR', 1.1, 60.0),
        VariableSpec.continuous('PR_factor_1', 0.1, 0.9),
        VariableSpec.continuous('PR_factor_2', 0.1, 0.9),
        VariableSpec.continuous('PR_factor_3', 0.1, 0.9),
        VariableSpec.continuous('RPM_1', 1000.0, 20000.0),
        VariableSpec.continuous('RPM_2', 1000.0, 20000.0),
        VariableSpec.continuous('RPM_3', 1000.0, 20000.0),
    )
    activation = [ActivationRule(child, FAN, (True,)) for child in (GEARBOX, NOZZLE, BPR, FPR)]
    activation += [
        ActivationRule(PR_FACTORS[1], N_SHAFTS, (2, 3)),
        ActivationRule(RPMS[1], N_SHAFTS, (2, 3)),
        ActivationRule(PR_FACTORS[2], N_SHAFTS, (3,)),
        ActivationRule(RPMS[2], N_SHAFTS, (3,)),
    ]
    offtakes = {1: (1,), 2: (1, 2), 3: (1, 2, 3)}
    value_rules = [ValueRule(POWER_OFFTAKE, N_SHAFTS, offtakes), ValueRule(BLEED_OFFTAKE, N_SHAFTS, offtakes)]
    return DesignSpace(variables, tuple(activation), tuple(value_rules),
                       (FAN, N_SHAFTS, GEARBOX, NOZZLE))


def _normalized(matrix: np.ndarray) -> Dict[str, np.ndarray]:
    fan = matrix[:, FAN]
    n = matrix[:, N_SHAFTS]
    shaft_mask = np.arange(1, 4)[None, :] <= n[:, None]
    return {
        'fan': fan,
        'gb': fan * matrix[:, GEARBOX],
        'mx': fan * matrix[:, NOZZLE],
        'n': n,
        'po': matrix[:, POWER_OFFTAKE],
        'bo': matrix[:, BLEED_OFFTAKE],
        'b': (matrix[:, BPR] - 2.0) / 10.5,
        'p': (matrix[:, FPR] - 1.1) / 0.7,
        'q': np.log(matrix[:, OPR] / 1.1) / _LOG_OPR_SPAN,
        'opr': matrix[:, OPR],
        'r': matrix[:, list(PR_FACTORS)],
        'u': (matrix[:, list(RPMS)] - 1000.0) / 19000.0,
        'mask': shaft_mask,
    }


def hidden_margin_batch(matrix: np.ndarray) -> np.ndarray:
    """Função da região de falha; a avaliação falha onde ela excede tau."""
    v = _normalized(np.atleast_2d(matrix))
    z1 = v['q'] + np.sum(v['u'] * v['mask'], axis=1) / v['n']
    z2 = v['fan'] * v['b'] + np.sum(v['r'] * v['mask'], axis=1) / v['n']
    return np.sin(13.0 * z1) * np.cos(9.0 * z2) + 0.15 * np.sin(29.0 * z1 * z2)


def evaluate_batch(matrix: np.ndarray, config: Optional[BenchConfig] = None) -> BatchEvaluation:
    """
    Avalia um lote de pontos corrigidos (forma numérica).

    Args:
        matrix: Matriz (m, 15) já corrigida
        config: BenchConfig

    Returns:
        BatchEvaluation
    """
    config = config or BenchConfig()
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    v = _normalized(matrix)
    fan, gb, mx, n, mask = v['fan'], v['gb'], v['mx'], v['n'], v['mask']
    b, p, q, r, u = v['b'], v['p'], v['q'], v['r'], v['u']

    eta = (0.18 * q + fan * 0.42 * b ** 0.7 * (1.0 - 0.45 * p) + 0.02 * (n - 1.0)
           + fan * gb * 0.05 * b + fan * mx * 0.01
           - 0.004 * (v['po'] - 1.0) - 0.004 * (v['bo'] - 1.0))

    first_shaft = np.array([1.0, 0.0, 0.0])[None, :]
    u_target = (0.3 + 0.625 * (r - 0.1)) * (1.0 - 0.4 * (fan * gb)[:, None] * first_shaft)
    rpm_penalty = 2.0 * np.sum(mask * (u - u_target) ** 2, axis=1)
    objective = config.tsfc_base * (1.0 - eta) + rpm_penalty

    m_jet = (0.8 + 0.4 * q - 0.05 * (n - 1.0)
             + fan * (-0.4 * b + 0.1 * p - 0.05 * mx) + (1.0 - fan) * 0.1)
    r_sum = np.sum(r * mask, axis=1)
    shaft_pr = v['opr'][:, None] ** (r / r_sum[:, None]) - 15.0
    constraints = np.column_stack([
        m_jet - 1.0,
        r_sum - 0.9,
        np.where(mask, shaft_pr, -1.0),
    ])

    if config.enable_hidden_constraint:
        failed = hidden_margin_batch(matrix) > config.tau
    else:
        failed = np.zeros(matrix.shape[0], dtype=bool)

    objective = np.where(failed, np.nan, objective)
    constraints = np.where(failed[:, None], np.nan, constraints)
    return BatchEvaluation(failed, objective, constraints)


def evaluate(point: DesignPoint, config: Optional[BenchConfig] = None) -> Evaluation:
    """
    Avalia um ponto corrigido.

    Args:
        point: Ponto corrigido do espaço do turbofan
        config: BenchConfig

    Returns:
        Evaluation (Failed dentro da região de falha)

    Raises:
        UncorrectedPointError: ponto fora da forma corrigida
    """
    space = simple_turbofan_space()
    if not is_corrected(space, point):
        raise UncorrectedPointError("ponto não corrigido para o espaço simple-turbofan")
    result = evaluate_batch(to_numeric(space, point)[None, :], config)
    if result.failed[0]:
        return Evaluation.failed()
    return Evaluation.ok(float(result.objective[0]), result.constraints[0].tolist())


def make_problem(config: Optional[BenchConfig] = None) -> Problem:
    """Problema registrado como `simple-turbofan`."""
    config = config or BenchConfig()
    return Problem(
        name=PROBLEM_NAME,
        space=simple_turbofan_space(),
        evaluate=lambda point: evaluate(point, config),
        n_constraints=N_CONSTRAINTS,
        reentrant=True,
    )


# ---------------------------------------------------------------------------
# Taxa de falha
# ---------------------------------------------------------------------------

def failure_rate(config: BenchConfig, n_samples: int, rng: np.random.Generator) -> float:
    """
    Fração de avaliações que falham em pontos aleatórios uniformes corrigidos.

    Raises:
        ConfigurationError: n_samples < 10^4
    """
    if n_samples < MIN_SAMPLES:
        raise ConfigurationError(f"n_samples deve ser >= {MIN_SAMPLES} (recebido {n_samples})")
    if not config.enable_hidden_constraint:
        return 0.0
    matrix, _ = sample_uniform_batch(simple_turbofan_space(), n_samples, rng)
    return float(np.mean(evaluate_batch(matrix, config).failed))


def calibrate_tau(target: float = 0.5, n_samples: int = 100_000,
                  rng: Optional[np.random.Generator] = None, tol: float = 1e-3,
                  max_iter: int = 60) -> float:
    """
    Bisseção do limiar tau para atingir a taxa de falha desejada.

    Args:
        target: Taxa de falha alvo em (0, 1)
        n_samples: Amostras uniformes usadas na estimativa
        rng: Gerador numpy
        tol: Tolerância na taxa

    Returns:
        tau calibrado
    """
    if not 0.0 < target < 1.0:
        raise ConfigurationError(f"target deve estar em (0, 1) (recebido {target})")
    rng = rng if rng is not None else np.random.default_rng(0)
    matrix, _ = sample_uniform_batch(simple_turbofan_space(), n_samples, rng)
    margin = hidden_margin_batch(matrix)

    lo, hi = -HIDDEN_AMPLITUDE, HIDDEN_AMPLITUDE
    tau = 0.5 * (lo + hi)
    for _ in range(max_iter):
        tau = 0.5 * (lo + hi)
        rate = float(np.mean(margin > tau))
        if abs(rate - target) <= tol:
            break
        if rate > target:
            lo = tau
        else:
            hi = tau
    logger.info(f"tau calibrado: {tau:.5f} (taxa alvo {target})")
    return tau


# ---------------------------------------------------------------------------
# Oráculo por força bruta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssignmentOptimum:
    """Melhor ponto encontrado para uma atribuição discreta."""
    assignment: DesignPoint
    point: DesignPoint
    objective: Optional[float]
    penalty: float


def _polish(row: np.ndarray, columns: np.ndarray, lower: np.ndarray, upper: np.ndarray,
            config: BenchConfig, max_evals: int) -> Tuple[np.ndarray, float]:
    span = upper - lower

    def build(z):
        candidate = row.copy()
        candidate[columns] = lower + np.clip(z, 0.0, 1.0) * span
        return candidate

    def objective(z):
        return float(evaluate_batch(build(z)[None, :], config).penalized()[0])

    z0 = (row[columns] - lower) / span
    result = minimize(objective, z0, method='Powell', bounds=[(0.0, 1.0)] * columns.size,
                      options={'maxfev': max_evals, 'xtol': 1e-9, 'ftol': 1e-13})
    candidate = build(result.x)
    return candidate, objective(result.x)


def _assignment_optima(config: BenchConfig, rng: np.random.Generator, effort: int,
                       polish_top: int, polish_evals: int) -> List[AssignmentOptimum]:
    if effort < MIN_SAMPLES:
        raise ConfigurationError(f"effort deve ser >= {MIN_SAMPLES} (recebido {effort})")
    space = simple_turbofan_space()
    compiled = space._compiled
    enumeration = enumerate_discrete(space)
    logger.info(f"Oráculo inicializado: {enumeration.valid_count} atribuições, effort={effort}")

    optima = []
    for assignment in enumeration.points:
        base = to_numeric(space, assignment)
        active = np.array(assignment.active)
        columns = np.array([j for j, kind in enumerate(compiled.kinds)
                            if kind == CONTINUOUS and active[j]], dtype=int)
        lower, upper = compiled.lower[columns], compiled.upper[columns]

        samples = np.tile(base, (effort, 1))
        samples[:, columns] = rng.uniform(lower, upper, size=(effort, columns.size))
        penalty = evaluate_batch(samples, config).penalized()

        best_row, best_penalty = samples[int(np.argmin(penalty))], float(np.min(penalty))
        for index in np.argsort(penalty, kind='stable')[:polish_top]:
            row, value = _polish(samples[index], columns, lower, upper, config, polish_evals)
            if value < best_penalty:
                best_row, best_penalty = row, value

        result = evaluate_batch(best_row[None, :], config)
        feasible = (not result.failed[0]) and bool(np.all(result.constraints[0] <= 1e-6))
        point = from_numeric(space, best_row, active)
        optima.append(AssignmentOptimum(
            assignment, point, float(result.objective[0]) if feasible else None, best_penalty))
    return optima


@log_performance
def brute_force_optimum(config: Optional[BenchConfig] = None, rng: Optional[np.random.Generator] = None,
                        effort: int = 100_000, polish_top: int = 5,
                        polish_evals: int = 1000) -> Tuple[Optional[DesignPoint], Optional[float]]:
    """
    Ótimo global por busca aleatória em cada atribuição discreta válida.

    Cada uma das 70 atribuições recebe `effort` amostras contínuas;
    as `polish_top` melhores passam por uma busca local de Powell em
    coordenadas normalizadas. O melhor ponto global é polido de novo
    com orçamento maior.

    Args:
        config: BenchConfig
        rng: Gerador numpy
        effort: Amostras por atribuição (>= 10^4)

    Returns:
        (ponto, objetivo), ou (None, None) se nenhum ponto viável foi encontrado
    """
    config = config or BenchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    optima = _assignment_optima(config, rng, effort, polish_top, polish_evals)
    feasible = [o for o in optima if o.objective is not None]
    if not feasible:
        logger.warning("Oráculo não encontrou ponto viável")
        return None, None

    best = min(feasible, key=lambda o: o.objective)
    space = simple_turbofan_space()
    row = to_numeric(space, best.point)
    active = np.array(best.point.active)
    compiled = space._compiled
    columns = np.array([j for j, kind in enumerate(compiled.kinds)
                        if kind == CONTINUOUS and active[j]], dtype=int)
    row, _ = _polish(row, columns, compiled.lower[columns], compiled.upper[columns],
                     config, 10 * polish_evals)
    result = evaluate_batch(row[None, :], config)
    if not result.failed[0] and np.all(result.constraints[0] <= 1e-6) \
            and result.objective[0] < best.objective:
        best = AssignmentOptimum(best.assignment, from_numeric(space, row, active),
                                 float(result.objective[0]), float(result.penalized()[0]))

    logger.info(f"Ótimo do oráculo: {best.objective:.6f}")
    return best.point, best.objective


@log_performance
def architecture_optima(config: Optional[BenchConfig] = None, rng: Optional[np.random.Generator] = None,
                        effort: int = 10_000, polish_top: int = 2,
                        polish_evals: int = 1000) -> List[Dict[str, Any]]:
    """
    Melhor TSFC viável por arquitetura (assinatura), uma linha por arquitetura.

    Returns:
        Lista de dicionários com IncludeFan, n_shafts, IncludeGearbox,
        MixedNozzle, objective (None se sem ponto viável) e point
    """
    config = config or BenchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    space = simple_turbofan_space()
    optima = _assignment_optima(config, rng, effort, polish_top, polish_evals)

    best: Dict[Tuple[Any, ...], AssignmentOptimum] = {}
    for optimum in optima:
        key = architecture_signature(space, optimum.assignment)
        current = best.get(key)
        if current is None or _better(optimum, current):
            best[key] = optimum

    rows = []
    for key in sorted(best, key=lambda k: tuple(int(v) for v in k)):
        optimum = best[key]
        row = {space.variables[j].name: value for j, value in zip(space.signature_vars, key)}
        row['objective'] = optimum.objective
        row['point'] = optimum.point
        rows.append(row)
    return rows


def _better(a: AssignmentOptimum, b: AssignmentOptimum) -> bool:
    if a.objective is None:
        return False
    return b.objective is None or a.objective < b.objective
