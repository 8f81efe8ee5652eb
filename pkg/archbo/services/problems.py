"""
Registro de problemas disponíveis na CLI.
"""

import logging
from typing import Callable, Dict, List, Optional

from services.bo_loop import Problem
from services.turbofan_bench import PROBLEM_NAME, BenchConfig, make_problem
from utils.errors import UnknownProblemError

logger = logging.getLogger(__name__)

_REGISTRY: Dict[str, Callable[[BenchConfig], Problem]] = {
    PROBLEM_NAME: make_problem,
}


def known_problems() -> List[str]:
    return sorted(_REGISTRY)


def register_problem(name: str, factory: Callable[[BenchConfig], Problem]) -> None:
    """Registra uma fábrica de problema (substitui registros anteriores com o mesmo nome)."""
    _REGISTRY[name] = factory
    logger.debug(f"Problema registrado: {name}")


def get_problem(name: str, bench: Optional[BenchConfig] = None) -> Problem:
    """
    Instancia um problema registrado.

    Raises:
        UnknownProblemError: nome não registrado
    """
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownProblemError(
            f"problema desconhecido: {name!r} (disponíveis: {', '.join(known_problems())})"
        ) from None
    return factory(bench or BenchConfig())
