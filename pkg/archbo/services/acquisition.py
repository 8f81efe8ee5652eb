"""
Critérios de Preenchimento (Infill)

Melhoria esperada (EI), WB2 e WB2S, ponderação pela probabilidade de
viabilidade (WB2S_FE) e o subproblema de preenchimento com limites de
confiança otimistas nas restrições, resolvido por busca evolutiva
mista seguida de polimento local das coordenadas contínuas ativas.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from services.design_space import (
    CONTINUOUS,
    DesignPoint,
    DesignSpace,
    correct_batch,
    decode_to_numeric,
    encode_batch,
    from_numeric,
    lhs_unit,
)
from services.surrogate import (
    FeasibilityModel,
    GpModel,
    predict,
    predict_batch,
    predict_feasible_prob_batch,
)
from services.variation import MixedVariation
from utils.errors import ConfigurationError
from utils.logger import log_performance
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)

EI = 'EI'
WB2 = 'WB2'
WB2S = 'WB2S'

DUPLICATE_TOL = 1e-9
EI_FLOOR = 1e-12
_PENALTY = 1e6


@dataclass(frozen=True)
class InnerBudget:
    """Orçamento do otimizador interno (avaliações do substituto)."""
    population: int = 50
    generations: int = 50
    polish_evals: int = 200


@dataclass(frozen=True)
class AcquisitionSpec:
    """Escolha do critério e parâmetros do subproblema de preenchimento."""
    criterion: str = WB2S
    beta: float = 100.0
    feasibility_weighting: bool = True
    kappa: float = 2.0
    inner_budget: InnerBudget = field(default_factory=InnerBudget)

    def __post_init__(self):
        if isinstance(self.inner_budget, dict):
            object.__setattr__(self, 'inner_budget', InnerBudget(**self.inner_budget))
        flat = {k: v for k, v in asdict(self).items() if k != 'inner_budget'}
        flat.update(asdict(self.inner_budget))
        ConfigValidator.raise_if_invalid(ConfigValidator.validate_acquisition_spec(flat))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AcquisitionSpec':
        ConfigValidator.raise_if_invalid(
            ConfigValidator.check_keys('acquisition', data, cls.__dataclass_fields__))
        data = dict(data)
        if 'inner_budget' in data:
            ConfigValidator.raise_if_invalid(ConfigValidator.check_keys(
                'acquisition.inner_budget', data['inner_budget'], InnerBudget.__dataclass_fields__))
            data['inner_budget'] = InnerBudget(**data['inner_budget'])
        return cls(**data)


@dataclass(frozen=True, eq=False)
class Surrogates:
    """Modelos usados no preenchimento."""
    objective: GpModel
    constraints: Tuple[GpModel, ...] = ()
    feasibility: Optional[FeasibilityModel] = None


@dataclass(frozen=True, eq=False)
class InfillResult:
    """Ponto escolhido pelo subproblema de preenchimento."""
    point: DesignPoint
    encoded: np.ndarray
    value: float
    violation: float
    bounds_satisfied: bool
    scale: float = 1.0


# ---------------------------------------------------------------------------
# Critérios
# ---------------------------------------------------------------------------

def expected_improvement(mean, std, f_min):
    """
    Melhoria esperada em forma fechada (minimização).

    Args:
        mean: Média posterior (escalar ou array)
        std: Desvio padrão posterior (>= 0)
        f_min: Melhor valor viável observado

    Returns:
        EI >= 0 (mesmo formato da entrada)
    """
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    improvement = f_min - mean
    positive = std > 0
    safe_std = np.where(positive, std, 1.0)
    z = improvement / safe_std
    ei = np.where(positive,
                  improvement * norm.cdf(z) + safe_std * norm.pdf(z),
                  np.maximum(improvement, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def wb2s_scale_from(mean: float, ei: float, beta: float) -> float:
    """Fator de escala do WB2S: beta·|média|/EI, com piso 1 e fallback 1 para EI ~ 0."""
    if ei <= EI_FLOOR:
        return 1.0
    return max(1.0, beta * abs(mean) / ei)


def wb2s_scale(ei_argmax_point, obj_model: GpModel, f_min: float, beta: float) -> float:
    """Escala do WB2S avaliada no melhor ponto de EI do otimizador interno."""
    mean, std = predict(obj_model, ei_argmax_point)
    return wb2s_scale_from(mean, expected_improvement(mean, std, f_min), beta)


def trust_violation_batch(X: np.ndarray, models: Surrogates, kappa: float) -> np.ndarray:
    """Soma das violações dos limites otimistas média − κ·desvio ≤ 0."""
    X = np.atleast_2d(X)
    total = np.zeros(X.shape[0])
    for model in models.constraints:
        mean, std = predict_batch(model, X)
        total += np.maximum(mean - kappa * std, 0.0)
    return total


def feasibility_fallback_batch(X: np.ndarray, models: Surrogates) -> np.ndarray:
    """Π_j Φ(−média_j/desvio_j) · p_viável, usado quando não há incumbente viável."""
    X = np.atleast_2d(X)
    value = np.ones(X.shape[0])
    for model in models.constraints:
        mean, std = predict_batch(model, X)
        positive = std > 0
        prob = np.where(positive, norm.cdf(-mean / np.where(positive, std, 1.0)),
                        (mean <= 0).astype(float))
        value *= prob
    if models.feasibility is not None:
        value *= predict_feasible_prob_batch(models.feasibility, X)
    return value


def acquisition_value_batch(X: np.ndarray, models: Surrogates, f_min: Optional[float],
                            spec: AcquisitionSpec, scale: float = 1.0) -> np.ndarray:
    """Valor do critério (maior é melhor) para um lote de pontos codificados."""
    X = np.atleast_2d(X)
    if f_min is None:
        return feasibility_fallback_batch(X, models)

    mean, std = predict_batch(models.objective, X)
    ei = expected_improvement(mean, std, f_min)
    if spec.criterion == WB2:
        value = ei - mean
    elif spec.criterion == WB2S:
        value = scale * ei - mean
    else:
        value = ei

    if spec.feasibility_weighting:
        if models.feasibility is None:
            raise ConfigurationError("feasibility_weighting ativo sem modelo de viabilidade")
        value = value * predict_feasible_prob_batch(models.feasibility, X)
    return value


def acquisition_value(x_encoded, models: Surrogates, f_min: Optional[float],
                      spec: AcquisitionSpec, scale: float = 1.0) -> float:
    """
    Valor do critério em um ponto codificado.

    Args:
        x_encoded: Ponto corrigido, codificado
        models: Substitutos (objetivo, restrições, viabilidade)
        f_min: Melhor objetivo viável (None aciona o critério de viabilidade)
        spec: AcquisitionSpec
        scale: Escala do WB2S (fixada por resolução de infill)

    Returns:
        Valor (maior é melhor)
    """
    x = np.asarray(x_encoded, dtype=float)
    return float(acquisition_value_batch(x[None, :], models, f_min, spec, scale)[0])


# ---------------------------------------------------------------------------
# Otimizador interno
# ---------------------------------------------------------------------------

def rank_candidates(violation: np.ndarray, value: np.ndarray) -> np.ndarray:
    """Ordem: violação crescente, valor decrescente, índice crescente."""
    index = np.arange(len(value))
    return np.lexsort((index, -np.asarray(value), np.asarray(violation)))


class _Archive:
    """Todos os candidatos avaliados pelo otimizador interno."""

    def __init__(self):
        self.rows: List[np.ndarray] = []
        self.encoded: List[np.ndarray] = []
        self.violation: List[np.ndarray] = []
        self.value: List[np.ndarray] = []

    def add(self, rows, encoded, violation, value):
        self.rows.append(rows)
        self.encoded.append(encoded)
        self.violation.append(violation)
        self.value.append(value)

    def stacked(self):
        return (np.vstack(self.rows), np.vstack(self.encoded),
                np.concatenate(self.violation), np.concatenate(self.value))


def _evolve(space: DesignSpace, score: Callable, budget: InnerBudget,
            rng: np.random.Generator, archive: _Archive) -> None:
    variation = MixedVariation(space)
    n = budget.population

    rows, _ = correct_batch(space, decode_to_numeric(space, lhs_unit(n, space.relaxed_dim, rng)))
    encoded, violation, value = score(rows)
    archive.add(rows, encoded, violation, value)

    for _ in range(budget.generations):
        order = rank_candidates(violation, value)
        rank = np.empty(n, dtype=int)
        rank[order] = np.arange(n)

        children = []
        while len(children) < n:
            picks = rng.integers(0, n, size=4)
            a = picks[0] if rank[picks[0]] <= rank[picks[1]] else picks[1]
            b = picks[2] if rank[picks[2]] <= rank[picks[3]] else picks[3]
            children.extend(variation.mate(rows[a], rows[b], rng))
        child_rows, _ = correct_batch(space, np.array(children[:n]))
        child_enc, child_viol, child_val = score(child_rows)
        archive.add(child_rows, child_enc, child_viol, child_val)

        merged_rows = np.vstack([rows, child_rows])
        merged_enc = np.vstack([encoded, child_enc])
        merged_viol = np.concatenate([violation, child_viol])
        merged_val = np.concatenate([value, child_val])
        keep = rank_candidates(merged_viol, merged_val)[:n]
        rows, encoded = merged_rows[keep], merged_enc[keep]
        violation, value = merged_viol[keep], merged_val[keep]


def _polish(space: DesignSpace, row: np.ndarray, score: Callable,
            max_evals: int) -> Tuple[np.ndarray, np.ndarray, float, float]:
    """Busca local de Powell nas coordenadas contínuas ativas do melhor candidato."""
    compiled = space._compiled
    _, active = correct_batch(space, row[None, :])
    idx = np.array([j for j, kind in enumerate(compiled.kinds)
                    if kind == CONTINUOUS and active[0, j]], dtype=int)

    encoded, violation, value = score(row[None, :])
    if idx.size == 0:
        return row, encoded[0], float(violation[0]), float(value[0])

    lo, span = compiled.lower[idx], compiled.upper[idx] - compiled.lower[idx]

    def build(u):
        candidate = row.copy()
        candidate[idx] = lo + np.clip(u, 0.0, 1.0) * span
        return candidate

    def objective(u):
        _, viol, val = score(build(u)[None, :])
        if viol[0] > 0:
            return _PENALTY + float(viol[0])
        return -float(val[0])

    u0 = (row[idx] - lo) / span
    result = minimize(objective, u0, method='Powell', bounds=[(0.0, 1.0)] * idx.size,
                      options={'maxfev': max_evals, 'xtol': 1e-6, 'ftol': 1e-10})
    polished = build(result.x)
    enc, viol, val = score(polished[None, :])
    if (viol[0], -val[0]) < (violation[0], -value[0]):
        return polished, enc[0], float(viol[0]), float(val[0])
    return row, encoded[0], float(violation[0]), float(value[0])


def _is_duplicate(x: np.ndarray, X_seen: Optional[np.ndarray]) -> bool:
    if X_seen is None or len(X_seen) == 0:
        return False
    return bool(np.min(np.sum((X_seen - x) ** 2, axis=1)) < DUPLICATE_TOL ** 2)


@log_performance
def solve_infill(space: DesignSpace, models: Surrogates, f_min: Optional[float],
                 spec: AcquisitionSpec, rng: np.random.Generator,
                 X_evaluated: Optional[np.ndarray] = None) -> InfillResult:
    """
    Resolve o subproblema de preenchimento.

    Maximiza o critério sujeito a média_j − κ·desvio_j ≤ 0 para cada
    restrição; a violação total é a chave primária e o critério a
    secundária. Candidatos a menos de 1e-9 (codificado) de um ponto já
    avaliado são descartados.

    Args:
        space: Espaço de projeto
        models: Substitutos treinados
        f_min: Melhor objetivo viável (None: maximiza a probabilidade de viabilidade)
        spec: AcquisitionSpec
        rng: Gerador numpy
        X_evaluated: Pontos já avaliados, codificados (padrão: treino do objetivo)

    Returns:
        InfillResult (bounds_satisfied=False sinaliza o ponto de mínima violação)
    """
    if spec.feasibility_weighting and models.feasibility is None and f_min is not None:
        raise ConfigurationError("feasibility_weighting ativo sem modelo de viabilidade")
    X_seen = models.objective.X if X_evaluated is None else np.atleast_2d(X_evaluated)
    budget = spec.inner_budget

    def make_score(value_fn):
        def score(rows):
            encoded = encode_batch(space, rows)
            return encoded, trust_violation_batch(encoded, models, spec.kappa), value_fn(encoded)
        return score

    scale = 1.0
    if spec.criterion == WB2S and f_min is not None:
        ei_archive = _Archive()
        _evolve(space, make_score(
            lambda enc: expected_improvement(*predict_batch(models.objective, enc), f_min)
        ), budget, rng, ei_archive)
        _, enc, viol, val = ei_archive.stacked()
        x_star = enc[rank_candidates(viol, val)[0]]
        scale = wb2s_scale(x_star, models.objective, f_min, spec.beta)
        logger.debug(f"Escala WB2S: {scale:.4g}")

    score = make_score(lambda enc: acquisition_value_batch(enc, models, f_min, spec, scale))
    archive = _Archive()
    _evolve(space, score, budget, rng, archive)
    rows, encoded, violation, value = archive.stacked()
    order = rank_candidates(violation, value)

    candidates = []
    best_index = next((i for i in order if not _is_duplicate(encoded[i], X_seen)), order[0])
    polished = _polish(space, rows[best_index], score, budget.polish_evals)
    candidates.append(polished)
    candidates.extend((rows[i], encoded[i], float(violation[i]), float(value[i])) for i in order)

    chosen = next((c for c in candidates if not _is_duplicate(c[1], X_seen)), None)
    if chosen is None:
        logger.warning("Todos os candidatos coincidem com pontos avaliados; devolvendo o melhor")
        chosen = candidates[0]

    row, enc, viol, val = chosen
    corrected, active = correct_batch(space, row[None, :])
    point = from_numeric(space, corrected[0], active[0])
    satisfied = viol <= 0.0
    if not satisfied:
        logger.info(f"Nenhum candidato satisfaz os limites de confiança (violação {viol:.4g})")
    return InfillResult(point, enc, val, viol, satisfied, scale)
