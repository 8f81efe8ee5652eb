"""
Exceções do ArchBO

Hierarquia de erros tipados levantados pelos serviços. A CLI traduz
essas exceções em códigos de saída estáveis (2 = uso/configuração).
"""


class ArchBOError(Exception):
    """Erro base da ferramenta."""


class SchemaMismatchError(ArchBOError):
    """Valor com tipo incompatível com a variável do espaço de projeto."""


class LengthMismatchError(ArchBOError):
    """Vetor com comprimento diferente do esperado."""


class InvalidDesignSpaceError(ArchBOError):
    """Espaço de projeto que não passa na validação."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        messages = '; '.join(f"{d.code}: {d.message}" for d in self.diagnostics)
        super().__init__(f"Espaço de projeto inválido ({messages})")


class DesignSpaceTooLargeError(ArchBOError):
    """Produto cartesiano discreto acima do limite configurado."""


class IllConditionedError(ArchBOError):
    """Fatoração de Cholesky falhou mesmo após escalar o nugget."""


class InsufficientDataError(ArchBOError):
    """Pontos de treinamento insuficientes para ajustar um modelo."""


class ConfigurationError(ArchBOError):
    """Configuração inválida ou incompleta."""


class DoEStarvationError(ArchBOError):
    """DoE sem pontos válidos suficientes mesmo após nova tentativa."""


class UncorrectedPointError(ArchBOError):
    """Ponto que não está na forma corrigida (hierarquia/regras)."""


class BudgetError(ArchBOError):
    """Orçamento de avaliações incompatível com o algoritmo."""


class UnknownProblemError(ArchBOError):
    """Problema não registrado."""
