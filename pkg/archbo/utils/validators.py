"""
Validadores de Configuração

Este módulo contém as validações das configurações de execução
(GP, aquisição, algoritmo evolutivo, benchmark e RunConfig).
Cada validador devolve um dicionário {'valid': bool, 'errors': [...]}.
"""

import logging
import math
from typing import Any, Dict, Iterable, List

from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

KERNELS = ('squared_exponential', 'matern52')
ANISOTROPIES = ('per_dimension', 'per_variable')
CRITERIA = ('EI', 'WB2', 'WB2S')
ALGORITHMS = ('bo', 'nsga2')


def _result(errors: List[str]) -> Dict[str, Any]:
    return {'valid': not errors, 'errors': errors}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ConfigValidator:
    """Validação das configurações de execução."""

    @staticmethod
    def check_keys(section: str, data: Dict[str, Any], allowed: Iterable[str]) -> Dict[str, Any]:
        """Rejeita chaves desconhecidas em uma seção do JSON."""
        if not isinstance(data, dict):
            return _result([f'{section}: esperado objeto JSON'])
        unknown = sorted(set(data) - set(allowed))
        if unknown:
            return _result([f'{section}: chaves desconhecidas {unknown}'])
        return _result([])

    @staticmethod
    def validate_gp_config(data: Dict[str, Any]) -> Dict[str, Any]:
        errors = []
        if data.get('kernel') not in KERNELS:
            errors.append(f"gp.kernel deve ser um de {KERNELS}")
        if data.get('anisotropy') not in ANISOTROPIES:
            errors.append(f"gp.anisotropy deve ser um de {ANISOTROPIES}")
        nugget = data.get('nugget')
        if not _is_number(nugget) or nugget <= 0:
            errors.append('gp.nugget deve ser > 0')
        if not _is_int(data.get('n_restarts')) or data['n_restarts'] < 1:
            errors.append('gp.n_restarts deve ser inteiro >= 1')
        if not _is_int(data.get('max_evals_per_start')) or data['max_evals_per_start'] < 1:
            errors.append('gp.max_evals_per_start deve ser inteiro >= 1')
        if not _is_int(data.get('n_jobs')) or data['n_jobs'] < 1:
            errors.append('gp.n_jobs deve ser inteiro >= 1')
        bounds = data.get('lengthscale_log10_bounds')
        if (not isinstance(bounds, (list, tuple)) or len(bounds) != 2
                or not all(_is_number(b) for b in bounds) or not bounds[0] < bounds[1]):
            errors.append('gp.lengthscale_log10_bounds deve ser um par ordenado')
        return _result(errors)

    @staticmethod
    def validate_acquisition_spec(data: Dict[str, Any]) -> Dict[str, Any]:
        errors = []
        if data.get('criterion') not in CRITERIA:
            errors.append(f"acquisition.criterion deve ser um de {CRITERIA}")
        if not _is_number(data.get('beta')) or data['beta'] <= 0:
            errors.append('acquisition.beta deve ser > 0')
        if not _is_number(data.get('kappa')) or data['kappa'] < 0:
            errors.append('acquisition.kappa deve ser >= 0')
        if not isinstance(data.get('feasibility_weighting'), bool):
            errors.append('acquisition.feasibility_weighting deve ser booleano')
        for key in ('population', 'generations', 'polish_evals'):
            value = data.get(key)
            if not _is_int(value) or value < 1:
                errors.append(f'acquisition.{key} deve ser inteiro >= 1')
        return _result(errors)

    @staticmethod
    def validate_evo_config(data: Dict[str, Any]) -> Dict[str, Any]:
        errors = []
        population = data.get('population')
        if not _is_int(population) or population < 4 or population % 2:
            errors.append('evo.population deve ser par e >= 4')
        for key in ('crossover_prob', 'mutation_prob'):
            value = data.get(key)
            if value is None and key == 'mutation_prob':
                continue
            if not _is_number(value) or not 0.0 <= value <= 1.0:
                errors.append(f'evo.{key} deve estar em [0, 1]')
        for key in ('sbx_eta', 'mutation_eta'):
            if not _is_number(data.get(key)) or data[key] < 0:
                errors.append(f'evo.{key} deve ser >= 0')
        if not _is_number(data.get('failed_violation')) or data['failed_violation'] <= 0:
            errors.append('evo.failed_violation deve ser > 0')
        if data.get('discrete_crossover', 'uniform') != 'uniform':
            errors.append("evo.discrete_crossover suporta apenas 'uniform'")
        if data.get('discrete_mutation', 'random-reset') != 'random-reset':
            errors.append("evo.discrete_mutation suporta apenas 'random-reset'")
        return _result(errors)

    @staticmethod
    def validate_bench_config(data: Dict[str, Any]) -> Dict[str, Any]:
        errors = []
        if not _is_number(data.get('tsfc_base')) or data['tsfc_base'] <= 0:
            errors.append('bench.tsfc_base deve ser > 0')
        if not _is_number(data.get('tau')):
            errors.append('bench.tau deve ser um número')
        if not isinstance(data.get('enable_hidden_constraint'), bool):
            errors.append('bench.enable_hidden_constraint deve ser booleano')
        return _result(errors)

    @staticmethod
    def validate_run_config(data: Dict[str, Any], known_problems: Iterable[str]) -> Dict[str, Any]:
        """Valida os campos de topo do RunConfig."""
        errors = []
        if data.get('problem') not in set(known_problems):
            errors.append(f"problema desconhecido: {data.get('problem')!r}")
        if data.get('algorithm') not in ALGORITHMS:
            errors.append(f"algoritmo desconhecido: {data.get('algorithm')!r}")
        budget = data.get('budget')
        if not _is_int(budget) or budget <= 0:
            errors.append('budget deve ser inteiro > 0')
        doe_size = data.get('doe_size')
        if doe_size is not None and (not _is_int(doe_size) or doe_size < 1):
            errors.append('doe_size deve ser inteiro >= 1')
        if not _is_int(data.get('seed')):
            errors.append('seed deve ser inteiro')
        if data.get('algorithm') == 'bo' and _is_int(budget) and _is_int(doe_size) and budget <= doe_size:
            errors.append('budget deve ser maior que doe_size para bo')
        return _result(errors)

    @staticmethod
    def raise_if_invalid(result: Dict[str, Any]) -> None:
        """Converte um resultado inválido em ConfigurationError."""
        if not result['valid']:
            message = '; '.join(result['errors'])
            logger.warning(f"Configuração inválida: {message}")
            raise ConfigurationError(message)
