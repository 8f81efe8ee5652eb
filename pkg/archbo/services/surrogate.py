"""
Modelos Substitutos por Processo Gaussiano

Regressão por GP (krigagem ordinária) sobre a codificação relaxada
dos pontos de projeto, com tendência constante e variância do
processo perfiladas analiticamente. Um modelo é ajustado para o
objetivo e um para cada restrição; um modelo de viabilidade (GP
sobre rótulos 0/1) trata as restrições ocultas.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from services.design_space import lhs_unit
from utils.errors import (
    IllConditionedError,
    InsufficientDataError,
    LengthMismatchError,
    SchemaMismatchError,
)
from utils.logger import log_performance
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)

SQUARED_EXPONENTIAL = 'squared_exponential'
MATERN52 = 'matern52'
PER_DIMENSION = 'per_dimension'
PER_VARIABLE = 'per_variable'

NUGGET_LADDER = (1e-8, 1e-7, 1e-6)
SIGMA2_FLOOR = 1e-16
COINCIDENT_TOL = 1e-9
_FAILED_FIT = 1e10


@dataclass(frozen=True)
class GpConfig:
    """Hiperparâmetros do ajuste de GP."""
    kernel: str = SQUARED_EXPONENTIAL
    anisotropy: str = PER_DIMENSION
    nugget: float = 1e-8
    n_restarts: int = 10
    lengthscale_log10_bounds: Tuple[float, float] = (-3.0, 2.0)
    max_evals_per_start: int = 150
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'lengthscale_log10_bounds',
                           tuple(float(b) for b in self.lengthscale_log10_bounds))
        ConfigValidator.raise_if_invalid(ConfigValidator.validate_gp_config(self.to_dict()))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['lengthscale_log10_bounds'] = list(self.lengthscale_log10_bounds)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GpConfig':
        ConfigValidator.raise_if_invalid(ConfigValidator.check_keys('gp', data, cls.__dataclass_fields__))
        return cls(**data)


@dataclass(frozen=True, eq=False)
class GpModel:
    """
    GP treinado (imutável).

    Attributes:
        X: Entradas distintas de treino (codificadas)
        y: Observações (médias nas entradas fundidas)
        theta: log10 dos comprimentos de correlação
        sigma2: Variância do processo perfilada
        mu0: Tendência constante (GLS)
        chol: Fator de Cholesky inferior de R + nugget*I, com R a matriz de
            correlação sem escala (sigma2 não entra no fator)
        alpha: (R + nugget*I)^-1 (y - mu0)
        nugget: Nugget efetivamente usado (pode ter subido na escada)
    """
    X: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    sigma2: float
    mu0: float
    chol: np.ndarray
    alpha: np.ndarray
    nugget: float
    kernel: str = SQUARED_EXPONENTIAL
    groups: Optional[np.ndarray] = None
    log_likelihood: float = float('nan')


@dataclass(frozen=True, eq=False)
class FeasibilityModel:
    """Modelo de viabilidade: GP sobre rótulos {0, 1} ou constante (classe única)."""
    inner: Optional[GpModel] = None
    constant: Optional[float] = None


# ---------------------------------------------------------------------------
# Núcleo
# ---------------------------------------------------------------------------

def _lengthscales(theta: np.ndarray, groups: Optional[np.ndarray]) -> np.ndarray:
    ls = np.power(10.0, np.asarray(theta, dtype=float))
    if groups is not None:
        ls = ls[groups]
    return ls


def _corr_from_d2(d2: np.ndarray, kernel: str) -> np.ndarray:
    if kernel == MATERN52:
        r = np.sqrt(d2)
        return (1.0 + math.sqrt(5.0) * r + (5.0 / 3.0) * d2) * np.exp(-math.sqrt(5.0) * r)
    return np.exp(-0.5 * d2)


def _squared_diffs(X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
    return (X1[:, None, :] - X2[None, :, :]) ** 2


def correlation(X1: np.ndarray, X2: np.ndarray, theta: np.ndarray,
                kernel: str = SQUARED_EXPONENTIAL, groups: Optional[np.ndarray] = None) -> np.ndarray:
    """Matriz de correlação anisotrópica entre dois conjuntos de pontos codificados."""
    ls = _lengthscales(theta, groups)
    d2 = _squared_diffs(np.atleast_2d(X1), np.atleast_2d(X2)) @ (1.0 / ls ** 2)
    return _corr_from_d2(d2, kernel)


def _nugget_ladder(nugget: float):
    return [nugget] + [v for v in NUGGET_LADDER if v > nugget]


def _profile(D: np.ndarray, y: np.ndarray, theta: np.ndarray, config: GpConfig,
             groups: Optional[np.ndarray]) -> Dict[str, Any]:
    """Verossimilhança concentrada e quantidades do modelo para um theta."""
    n = y.shape[0]
    ls = _lengthscales(theta, groups)
    R = _corr_from_d2(D @ (1.0 / ls ** 2), config.kernel)

    for nugget in _nugget_ladder(config.nugget):
        try:
            L = cholesky(R + nugget * np.eye(n), lower=True, check_finite=False)
            break
        except LinAlgError:
            continue
    else:
        raise IllConditionedError(f"ill-conditioned: Cholesky falhou até nugget {NUGGET_LADDER[-1]}")

    ones = np.ones(n)
    if np.ptp(y) == 0.0:
        mu0 = float(y[0])
        alpha = np.zeros(n)
        sigma2 = SIGMA2_FLOOR
    else:
        ri_ones = cho_solve((L, True), ones, check_finite=False)
        ri_y = cho_solve((L, True), y, check_finite=False)
        mu0 = float(ones @ ri_y / (ones @ ri_ones))
        alpha = cho_solve((L, True), y - mu0, check_finite=False)
        sigma2 = max(float((y - mu0) @ alpha) / n, SIGMA2_FLOOR)

    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    lml = -0.5 * (n * math.log(sigma2) + logdet + n * (1.0 + math.log(2.0 * math.pi)))
    return {'lml': lml, 'chol': L, 'alpha': alpha, 'mu0': mu0, 'sigma2': sigma2, 'nugget': nugget}


def _n_params(dim: int, config: GpConfig, groups: Optional[np.ndarray]) -> Tuple[int, Optional[np.ndarray]]:
    if config.anisotropy == PER_VARIABLE:
        if groups is None:
            groups = np.arange(dim)
        groups = np.asarray(groups, dtype=int)
        return int(groups.max()) + 1, groups
    return dim, None


def merge_duplicates(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Funde entradas codificadas idênticas (média de y); linhas em ordem canônica."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise LengthMismatchError(f"X tem {X.shape[0]} linhas e y tem {y.shape[0]} valores")
    unique, inverse = np.unique(X, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    counts = np.bincount(inverse)
    return unique, np.bincount(inverse, weights=y) / counts


def log_marginal_likelihood(X: np.ndarray, y: np.ndarray, theta: Sequence[float],
                            config: Optional[GpConfig] = None,
                            groups: Optional[np.ndarray] = None) -> float:
    """
    Log-verossimilhança marginal concentrada (tendência e variância perfiladas).

    Args:
        X: Pontos codificados distintos (n, d)
        y: Observações (n,)
        theta: log10 dos comprimentos de correlação
        config: GpConfig
        groups: Variável de cada coordenada (anisotropia por variável)

    Returns:
        Valor da log-verossimilhança

    Raises:
        IllConditionedError: fatoração falhou mesmo com nugget 1e-6
    """
    config = config or GpConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    _, groups = _n_params(X.shape[1], config, groups)
    return _profile(_squared_diffs(X, X), y, np.asarray(theta, dtype=float), config, groups)['lml']


@log_performance
def fit_gp(X: np.ndarray, y: np.ndarray, config: Optional[GpConfig] = None,
           rng: Optional[np.random.Generator] = None, groups: Optional[np.ndarray] = None,
           initial_theta: Optional[np.ndarray] = None) -> GpModel:
    """
    Ajusta um GP maximizando a verossimilhança com multistart.

    Os pontos iniciais vêm de um hipercubo latino na caixa de log10 dos
    comprimentos; cada partida roda uma busca local de Powell sem derivadas.

    Args:
        X: Pontos codificados (n, d)
        y: Observações (n,)
        config: GpConfig
        rng: Gerador numpy (determinismo)
        groups: Variável de cada coordenada, para anisotropia por variável
        initial_theta: Partida extra (reaproveitamento entre iterações)

    Returns:
        GpModel treinado

    Raises:
        InsufficientDataError: menos de 2 pontos distintos
        IllConditionedError: todas as fatorações falharam
    """
    config = config or GpConfig()
    rng = rng if rng is not None else np.random.default_rng(0)

    X, y = merge_duplicates(X, y)
    if X.shape[0] < 2:
        raise InsufficientDataError(f"insufficient data: {X.shape[0]} ponto(s) distinto(s), mínimo 2")

    n_params, groups = _n_params(X.shape[1], config, groups)
    lo, hi = config.lengthscale_log10_bounds
    starts = lo + (hi - lo) * lhs_unit(config.n_restarts, n_params, rng)
    if initial_theta is not None and len(initial_theta) == n_params:
        starts = np.vstack([starts, np.clip(initial_theta, lo, hi)])

    D = _squared_diffs(X, X)
    bounds = [(lo, hi)] * n_params

    def objective(theta):
        try:
            return -_profile(D, y, theta, config, groups)['lml']
        except IllConditionedError:
            return _FAILED_FIT

    def run_start(k):
        x0 = starts[k]
        f0 = objective(x0)
        result = minimize(objective, x0, method='Powell', bounds=bounds,
                          options={'maxfev': config.max_evals_per_start, 'xtol': 1e-3, 'ftol': 1e-8})
        x1 = np.clip(result.x, lo, hi)
        f1 = objective(x1)
        if np.isfinite(f1) and f1 <= f0:
            return f1, k, x1
        return f0, k, x0

    indices = range(starts.shape[0])
    if config.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
            results = list(pool.map(run_start, indices))
    else:
        results = [run_start(k) for k in indices]

    best_f, best_k, best_theta = min(results, key=lambda item: (item[0], item[1]))
    if best_f >= _FAILED_FIT:
        raise IllConditionedError("ill-conditioned: nenhuma partida produziu fatoração válida")

    profile = _profile(D, y, best_theta, config, groups)
    logger.debug(f"GP ajustado: n={X.shape[0]} partida={best_k} lml={profile['lml']:.4f}")

    return GpModel(
        X=X, y=y, theta=np.asarray(best_theta, dtype=float), sigma2=profile['sigma2'],
        mu0=profile['mu0'], chol=profile['chol'], alpha=profile['alpha'],
        nugget=profile['nugget'], kernel=config.kernel, groups=groups,
        log_likelihood=profile['lml'],
    )


def predict_batch(model: GpModel, Xq: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Média e desvio padrão posteriores para um lote de pontos codificados."""
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    if Xq.shape[1] != model.X.shape[1]:
        raise LengthMismatchError(
            f"ponto com {Xq.shape[1]} coordenadas, modelo treinado com {model.X.shape[1]}"
        )
    diffs = _squared_diffs(Xq, model.X)
    ls = _lengthscales(model.theta, model.groups)
    r = _corr_from_d2(diffs @ (1.0 / ls ** 2), model.kernel)

    # Entrada coincidente com um ponto de treino recebe o nugget
    coincident = diffs.sum(axis=2) < COINCIDENT_TOL ** 2
    r = r + model.nugget * coincident

    mean = model.mu0 + r @ model.alpha
    v = solve_triangular(model.chol, r.T, lower=True, check_finite=False)
    prior = 1.0 + model.nugget * coincident.any(axis=1)
    var = model.sigma2 * np.maximum(prior - np.sum(v ** 2, axis=0), 0.0)
    return mean, np.sqrt(var)


def predict(model: GpModel, x_encoded: Sequence[float]) -> Tuple[float, float]:
    """
    Predição posterior em um ponto.

    Returns:
        (média, desvio padrão >= 0)

    Raises:
        LengthMismatchError: comprimento diferente da codificação de treino
    """
    x = np.asarray(x_encoded, dtype=float)
    if x.ndim != 1:
        raise LengthMismatchError("predict espera um vetor 1-D")
    mean, std = predict_batch(model, x[None, :])
    return float(mean[0]), float(std[0])


# ---------------------------------------------------------------------------
# Viabilidade (restrição oculta)
# ---------------------------------------------------------------------------

def fit_feasibility(X_all: np.ndarray, labels: Sequence[int], config: Optional[GpConfig] = None,
                    rng: Optional[np.random.Generator] = None,
                    groups: Optional[np.ndarray] = None,
                    initial_theta: Optional[np.ndarray] = None) -> FeasibilityModel:
    """
    Ajusta o modelo de viabilidade (1 = avaliação bem-sucedida).

    Com uma única classe presente, devolve um modelo constante.
    """
    labels = np.asarray(labels, dtype=float).ravel()
    if labels.size == 0:
        raise InsufficientDataError("insufficient data: nenhum rótulo de viabilidade")
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise SchemaMismatchError("schema mismatch: rótulos de viabilidade devem ser 0 ou 1")

    if np.all(labels == labels[0]):
        logger.debug(f"Viabilidade constante: {labels[0]:.0f}")
        return FeasibilityModel(constant=float(labels[0]))

    return FeasibilityModel(inner=fit_gp(X_all, labels, config, rng, groups, initial_theta))


def predict_feasible_prob_batch(model: FeasibilityModel, Xq: np.ndarray) -> np.ndarray:
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    if model.inner is None:
        return np.full(Xq.shape[0], model.constant, dtype=float)
    mean, _ = predict_batch(model.inner, Xq)
    return np.clip(mean, 0.0, 1.0)


def predict_feasible_prob(model: FeasibilityModel, x_encoded: Sequence[float]) -> float:
    """Probabilidade de a avaliação não falhar: média posterior limitada a [0, 1]."""
    x = np.asarray(x_encoded, dtype=float)
    if x.ndim != 1:
        raise LengthMismatchError("predict_feasible_prob espera um vetor 1-D")
    return float(predict_feasible_prob_batch(model, x[None, :])[0])


# ---------------------------------------------------------------------------
# Serialização
# ---------------------------------------------------------------------------

def model_to_dict(model: GpModel) -> Dict[str, Any]:
    return {
        'theta': model.theta.tolist(),
        'sigma2': model.sigma2,
        'mu0': model.mu0,
        'nugget': model.nugget,
        'kernel': model.kernel,
        'groups': None if model.groups is None else model.groups.tolist(),
        'X': model.X.tolist(),
        'y': model.y.tolist(),
    }


def model_from_dict(data: Dict[str, Any]) -> GpModel:
    """Reconstrói o modelo (fator de Cholesky e pesos) a partir do JSON."""
    X = np.asarray(data['X'], dtype=float)
    y = np.asarray(data['y'], dtype=float)
    groups = None if data.get('groups') is None else np.asarray(data['groups'], dtype=int)
    config = GpConfig(kernel=data['kernel'], nugget=data['nugget'],
                      anisotropy=PER_DIMENSION if groups is None else PER_VARIABLE)
    theta = np.asarray(data['theta'], dtype=float)
    profile = _profile(_squared_diffs(X, X), y, theta, config, groups)
    return GpModel(X=X, y=y, theta=theta, sigma2=profile['sigma2'], mu0=profile['mu0'],
                   chol=profile['chol'], alpha=profile['alpha'], nugget=profile['nugget'],
                   kernel=config.kernel, groups=groups, log_likelihood=profile['lml'])

