"""
Espaço de Projeto Hierárquico Misto

Este módulo define, valida, corrige, amostra, codifica e enumera
espaços de projeto com variáveis contínuas, inteiras e categóricas,
incluindo regras de ativação (hierarquia) e regras de valor.

Representação numérica interna (matriz "numérica"): uma coluna por
variável; contínua = valor, inteira = valor, categórica = índice do
nível. Todas as operações em lote trabalham sobre essa matriz e as
operações escalares delegam para elas.
"""

import itertools
import json
import logging
import math
import numbers
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from config.settings import get_config
from utils.errors import (
    ConfigurationError,
    DesignSpaceTooLargeError,
    InvalidDesignSpaceError,
    LengthMismatchError,
    SchemaMismatchError,
)

logger = logging.getLogger(__name__)

CONTINUOUS = 'continuous'
INTEGER = 'integer'
CATEGORICAL = 'categorical'
KINDS = (CONTINUOUS, INTEGER, CATEGORICAL)


def round_half_away(x):
    """Arredonda para o inteiro mais próximo, empates para longe do zero."""
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def _plain(value):
    """Converte escalares numpy para tipos Python."""
    if isinstance(value, np.generic):
        return value.item()
    return value


def _same_value(a, b) -> bool:
    # True == 1 em Python; bool só casa com bool
    a, b = _plain(a), _plain(b)
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


@dataclass(frozen=True)
class VariableSpec:
    """Variável do espaço de projeto."""
    name: str
    kind: str
    lower: Optional[float] = None
    upper: Optional[float] = None
    levels: Tuple[Any, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'levels', tuple(_plain(v) for v in self.levels))

    @classmethod
    def continuous(cls, name: str, lower: float, upper: float) -> 'VariableSpec':
        return cls(name, CONTINUOUS, float(lower), float(upper))

    @classmethod
    def integer(cls, name: str, lower: int, upper: int) -> 'VariableSpec':
        return cls(name, INTEGER, int(lower), int(upper))

    @classmethod
    def categorical(cls, name: str, levels: Sequence[Any]) -> 'VariableSpec':
        return cls(name, CATEGORICAL, levels=tuple(levels))

    @property
    def is_discrete(self) -> bool:
        return self.kind != CONTINUOUS

    @property
    def n_dims(self) -> int:
        """Número de coordenadas na codificação relaxada."""
        return len(self.levels) if self.kind == CATEGORICAL else 1

    @property
    def imputation(self) -> float:
        """Valor canônico (numérico) de uma variável inativa."""
        if self.kind == CONTINUOUS:
            return 0.5 * (self.lower + self.upper)
        if self.kind == INTEGER:
            return float(self.lower)
        return 0.0

    def numeric_domain(self) -> np.ndarray:
        """Domínio numérico de uma variável discreta."""
        if self.kind == INTEGER:
            return np.arange(self.lower, self.upper + 1, dtype=float)
        if self.kind == CATEGORICAL:
            return np.arange(len(self.levels), dtype=float)
        raise ConfigurationError(f"Variável contínua sem domínio discreto: {self.name}")

    def level_index(self, value) -> Optional[int]:
        for i, level in enumerate(self.levels):
            if _same_value(level, value):
                return i
        return None

    def to_numeric(self, value) -> float:
        """Valor tipado -> valor numérico (sem correção)."""
        value = _plain(value)
        if self.kind == CATEGORICAL:
            index = self.level_index(value)
            if index is None:
                raise SchemaMismatchError(
                    f"schema mismatch: {value!r} não é nível de {self.name} {list(self.levels)}"
                )
            return float(index)

        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise SchemaMismatchError(f"schema mismatch: {self.name} espera número, recebeu {value!r}")
        if not math.isfinite(value):
            raise SchemaMismatchError(f"schema mismatch: {self.name} recebeu valor não finito")
        return float(value)

    def from_numeric(self, value: float):
        """Valor numérico (já corrigido) -> valor tipado."""
        if self.kind == CONTINUOUS:
            return float(value)
        if self.kind == INTEGER:
            return int(value)
        return self.levels[int(value)]


@dataclass(frozen=True)
class ActivationRule:
    """A variável `child` só é ativa se `parent` for ativa e tiver um dos valores ativadores."""
    child: int
    parent: int
    activating_values: Tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, 'activating_values', tuple(_plain(v) for v in self.activating_values))


@dataclass(frozen=True)
class ValueRule:
    """
    Valores permitidos de `target` em função do valor de `controller`.

    `allowed` é uma tabela (valor do controlador, valores permitidos).
    Valor do controlador ausente na tabela significa "sem restrição".
    """
    target: int
    controller: int
    allowed: Tuple[Tuple[Any, Tuple[Any, ...]], ...]

    def __post_init__(self):
        items = self.allowed.items() if isinstance(self.allowed, dict) else self.allowed
        table = tuple((_plain(k), tuple(_plain(v) for v in vals)) for k, vals in items)
        object.__setattr__(self, 'allowed', table)


@dataclass(frozen=True)
class Diagnostic:
    """Resultado de validação de um espaço de projeto."""
    code: str
    message: str
    variable: Optional[int] = None


@dataclass(frozen=True)
class DesignPoint:
    """Ponto corrigido: valores tipados e máscara de atividade."""
    values: Tuple[Any, ...]
    active: Tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(_plain(v) for v in self.values))
        object.__setattr__(self, 'active', tuple(bool(a) for a in self.active))


@dataclass(frozen=True)
class DiscreteEnumeration:
    """Atribuições discretas válidas e tamanho do produto cartesiano bruto."""
    points: Tuple[DesignPoint, ...]
    cartesian_size: int

    @property
    def valid_count(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class DesignSpace:
    """Definição completa do espaço de projeto."""
    variables: Tuple[VariableSpec, ...]
    activation_rules: Tuple[ActivationRule, ...] = ()
    value_rules: Tuple[ValueRule, ...] = ()
    signature_vars: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'variables', tuple(self.variables))
        object.__setattr__(self, 'activation_rules', tuple(self.activation_rules))
        object.__setattr__(self, 'value_rules', tuple(self.value_rules))
        object.__setattr__(self, 'signature_vars', tuple(int(i) for i in self.signature_vars))

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    def index_of(self, name: str) -> int:
        for i, var in enumerate(self.variables):
            if var.name == name:
                return i
        raise KeyError(name)

    @cached_property
    def relaxed_dim(self) -> int:
        return sum(v.n_dims for v in self.variables)

    @cached_property
    def imputation_row(self) -> np.ndarray:
        return np.array([v.imputation for v in self.variables], dtype=float)

    @cached_property
    def _compiled(self) -> '_CompiledSpace':
        diagnostics = validate(self)
        if diagnostics:
            raise InvalidDesignSpaceError(diagnostics)
        return _CompiledSpace.build(self)


@dataclass
class _CompiledSpace:
    """Regras convertidas para a representação numérica."""
    order: List[int]
    activation: Dict[int, Tuple[int, np.ndarray]]
    values: List[Tuple[int, int, List[Tuple[float, np.ndarray]]]]
    lower: np.ndarray
    upper: np.ndarray
    kinds: List[str]
    offsets: List[int] = field(default_factory=list)

    @classmethod
    def build(cls, space: DesignSpace) -> '_CompiledSpace':
        variables = space.variables
        activation = {}
        for rule in space.activation_rules:
            parent = variables[rule.parent]
            numeric = [parent.to_numeric(v) for v in rule.activating_values]
            activation[rule.child] = (rule.parent, np.array(numeric, dtype=float))

        value_rules = []
        for rule in space.value_rules:
            controller = variables[rule.controller]
            target = variables[rule.target]
            domain = set(target.numeric_domain().tolist())
            table = []
            for key, allowed in rule.allowed:
                numeric_allowed = sorted({target.to_numeric(v) for v in allowed} & domain)
                table.append((controller.to_numeric(key), np.array(numeric_allowed, dtype=float)))
            value_rules.append((rule.target, rule.controller, table))

        # Ordem topológica: pais antes dos filhos
        order, seen = [], set()

        def visit(j):
            if j in seen:
                return
            if j in activation:
                visit(activation[j][0])
            seen.add(j)
            order.append(j)

        for j in range(space.n_variables):
            visit(j)

        lower = np.array([
            v.lower if v.kind != CATEGORICAL else 0.0 for v in variables
        ], dtype=float)
        upper = np.array([
            v.upper if v.kind != CATEGORICAL else len(v.levels) - 1.0 for v in variables
        ], dtype=float)

        offsets, pos = [], 0
        for v in variables:
            offsets.append(pos)
            pos += v.n_dims

        return cls(order, activation, value_rules, lower, upper,
                   [v.kind for v in variables], offsets)


# ---------------------------------------------------------------------------
# Validação
# ---------------------------------------------------------------------------

def validate(space: DesignSpace) -> List[Diagnostic]:
    """
    Valida um espaço de projeto.

    Args:
        space: Espaço de projeto

    Returns:
        Lista de diagnósticos (vazia se o espaço é válido)
    """
    diagnostics: List[Diagnostic] = []
    n = space.n_variables

    names = set()
    for i, var in enumerate(space.variables):
        if var.name in names:
            diagnostics.append(Diagnostic('duplicate name', f"nome repetido: {var.name}", i))
        names.add(var.name)

        if var.kind not in KINDS:
            diagnostics.append(Diagnostic('unknown kind', f"{var.name}: tipo desconhecido {var.kind!r}", i))
        elif var.kind == CATEGORICAL:
            if len(var.levels) < 2:
                diagnostics.append(Diagnostic('too few levels', f"{var.name}: menos de 2 níveis", i))
            elif len({repr(level) for level in var.levels}) != len(var.levels):
                diagnostics.append(Diagnostic('duplicate levels', f"{var.name}: níveis repetidos", i))
        else:
            ok = (var.lower is not None and var.upper is not None
                  and math.isfinite(var.lower) and math.isfinite(var.upper))
            if not ok or not var.lower < var.upper:
                diagnostics.append(Diagnostic(
                    'degenerate bounds', f"{var.name}: limites [{var.lower}, {var.upper}] inválidos", i
                ))

    def in_range(j) -> bool:
        return isinstance(j, numbers.Integral) and 0 <= j < n

    parents: Dict[int, List[int]] = {}
    for rule in space.activation_rules:
        if not (in_range(rule.child) and in_range(rule.parent)):
            diagnostics.append(Diagnostic(
                'index out of range', f"regra de ativação {rule.child}<-{rule.parent} fora do intervalo"
            ))
            continue
        parents.setdefault(rule.child, []).append(rule.parent)
        parent = space.variables[rule.parent]
        if parent.kind == CONTINUOUS:
            diagnostics.append(Diagnostic(
                'bad activating value', f"{parent.name}: pai contínuo não pode ativar variáveis", rule.child
            ))
        else:
            for value in rule.activating_values:
                if not _in_domain(parent, value):
                    diagnostics.append(Diagnostic(
                        'bad activating value', f"{parent.name}: valor ativador {value!r} fora do domínio",
                        rule.child
                    ))

    for child, plist in parents.items():
        if len(plist) > 1:
            diagnostics.append(Diagnostic(
                'multiple activation rules', f"{space.variables[child].name}: mais de uma regra de ativação", child
            ))

    diagnostics.extend(_find_cycles(space, parents))

    for rule in space.value_rules:
        if not (in_range(rule.target) and in_range(rule.controller)):
            diagnostics.append(Diagnostic(
                'index out of range', f"regra de valor {rule.target}<-{rule.controller} fora do intervalo"
            ))
            continue
        controller = space.variables[rule.controller]
        target = space.variables[rule.target]
        if controller.kind == CONTINUOUS:
            diagnostics.append(Diagnostic(
                'continuous controller', f"{controller.name}: controlador contínuo", rule.target
            ))
            continue
        if target.kind == CONTINUOUS:
            diagnostics.append(Diagnostic(
                'continuous controller', f"{target.name}: alvo contínuo não suportado", rule.target
            ))
            continue
        for key, allowed in rule.allowed:
            if not _in_domain(controller, key):
                continue
            if not any(_in_domain(target, v) for v in allowed):
                diagnostics.append(Diagnostic(
                    'empty allowed set',
                    f"{target.name}: conjunto permitido vazio para {controller.name}={key!r}", rule.target
                ))

    for j in space.signature_vars:
        if not in_range(j):
            diagnostics.append(Diagnostic('index out of range', f"variável de assinatura {j} fora do intervalo"))

    return diagnostics


def _in_domain(var: VariableSpec, value) -> bool:
    try:
        numeric = var.to_numeric(value)
    except SchemaMismatchError:
        return False
    if var.kind == INTEGER:
        return numeric == int(numeric) and var.lower <= numeric <= var.upper
    return True


def _find_cycles(space: DesignSpace, parents: Dict[int, List[int]]) -> List[Diagnostic]:
    """Um diagnóstico por ciclo no grafo pai -> filho."""
    cycles = []
    seen_cycles = set()
    color = {}

    def dfs(node, stack):
        color[node] = 'gray'
        stack.append(node)
        for parent in parents.get(node, []):
            if color.get(parent) == 'gray':
                cycle = frozenset(stack[stack.index(parent):])
                if cycle not in seen_cycles:
                    seen_cycles.add(cycle)
                    names = ', '.join(space.variables[j].name for j in sorted(cycle))
                    cycles.append(Diagnostic('cycle', f"ciclo de ativação: {names}", min(cycle)))
            elif parent not in color:
                dfs(parent, stack)
        stack.pop()
        color[node] = 'black'

    for node in sorted(parents):
        if node not in color:
            dfs(node, [])
    return cycles


def ensure_valid(space: DesignSpace) -> None:
    """Levanta InvalidDesignSpaceError se o espaço tem diagnósticos."""
    space._compiled  # noqa: B018


# ---------------------------------------------------------------------------
# Atividade e correção
# ---------------------------------------------------------------------------

def activity_batch(space: DesignSpace, matrix: np.ndarray) -> np.ndarray:
    """Máscara de atividade para cada linha da matriz numérica."""
    compiled = space._compiled
    matrix = np.atleast_2d(matrix)
    active = np.ones(matrix.shape, dtype=bool)
    for j in compiled.order:
        if j in compiled.activation:
            parent, values = compiled.activation[j]
            active[:, j] = active[:, parent] & np.isin(matrix[:, parent], values)
    return active


def _clip_round(space: DesignSpace, matrix: np.ndarray) -> np.ndarray:
    compiled = space._compiled
    out = np.array(matrix, dtype=float, copy=True)
    for j, kind in enumerate(compiled.kinds):
        if kind != CONTINUOUS:
            out[:, j] = round_half_away(out[:, j])
        out[:, j] = np.clip(out[:, j], compiled.lower[j], compiled.upper[j])
    return out


def correct_batch(space: DesignSpace, matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Corrige um lote de pontos na representação numérica.

    Passos: recorte aos limites e arredondamento dos discretos; depois,
    até o ponto fixo, atividade -> imputação -> regras de valor.

    Args:
        space: Espaço de projeto
        matrix: Matriz (m, n_variáveis)

    Returns:
        (matriz corrigida, máscara de atividade)
    """
    compiled = space._compiled
    out = _clip_round(space, np.atleast_2d(matrix))
    imputation = space.imputation_row

    for _ in range(space.n_variables + 1):
        before = out.copy()
        active = activity_batch(space, out)
        out = np.where(active, out, imputation[None, :])

        for target, controller, table in compiled.values:
            kind = compiled.kinds[target]
            for key, allowed in table:
                rows = active[:, target] & (out[:, controller] == key)
                if not rows.any():
                    continue
                bad = rows & ~np.isin(out[:, target], allowed)
                if not bad.any():
                    continue
                if kind == INTEGER:
                    diffs = np.abs(out[bad, target][:, None] - allowed[None, :])
                    out[bad, target] = allowed[np.argmin(diffs, axis=1)]
                else:
                    out[bad, target] = allowed[0]

        if np.array_equal(before, out):
            break

    return out, activity_batch(space, out)


def raw_to_numeric(space: DesignSpace, raw_values: Sequence[Any]) -> np.ndarray:
    """Converte valores tipados em uma linha numérica, validando o esquema."""
    if len(raw_values) != space.n_variables:
        raise SchemaMismatchError(
            f"schema mismatch: esperados {space.n_variables} valores, recebidos {len(raw_values)}"
        )
    return np.array([var.to_numeric(v) for var, v in zip(space.variables, raw_values)], dtype=float)


def to_numeric(space: DesignSpace, point: DesignPoint) -> np.ndarray:
    return raw_to_numeric(space, point.values)


def from_numeric(space: DesignSpace, row: np.ndarray, active: np.ndarray) -> DesignPoint:
    values = tuple(var.from_numeric(x) for var, x in zip(space.variables, row))
    return DesignPoint(values, tuple(bool(a) for a in active))


def points_from_batch(space: DesignSpace, matrix: np.ndarray, active: np.ndarray) -> List[DesignPoint]:
    return [from_numeric(space, row, act) for row, act in zip(matrix, active)]


def compute_activity(space: DesignSpace, raw_values: Sequence[Any]) -> List[bool]:
    """
    Máscara de atividade (ponto fixo das regras de ativação).

    Args:
        space: Espaço de projeto
        raw_values: Valores tipados, um por variável

    Returns:
        Lista de booleanos
    """
    row = raw_to_numeric(space, raw_values)
    return [bool(a) for a in activity_batch(space, row[None, :])[0]]


def correct(space: DesignSpace, raw_values: Sequence[Any]) -> DesignPoint:
    """
    Corrige valores brutos para um DesignPoint válido.

    Args:
        space: Espaço de projeto
        raw_values: Valores tipados, um por variável

    Returns:
        Ponto corrigido (idempotente)

    Raises:
        SchemaMismatchError: tipo ou quantidade de valores incompatível
    """
    row = raw_to_numeric(space, raw_values)
    matrix, active = correct_batch(space, row[None, :])
    return from_numeric(space, matrix[0], active[0])


def is_corrected(space: DesignSpace, point: DesignPoint) -> bool:
    try:
        return correct(space, point.values) == point
    except SchemaMismatchError:
        return False


# ---------------------------------------------------------------------------
# Codificação relaxada
# ---------------------------------------------------------------------------

def relaxed_groups(space: DesignSpace) -> np.ndarray:
    """Índice da variável de cada coordenada codificada."""
    return np.concatenate([
        np.full(var.n_dims, j, dtype=int) for j, var in enumerate(space.variables)
    ])


def encode_batch(space: DesignSpace, matrix: np.ndarray) -> np.ndarray:
    """Matriz numérica -> matriz relaxada em [0, 1]."""
    compiled = space._compiled
    matrix = np.atleast_2d(matrix)
    out = np.zeros((matrix.shape[0], space.relaxed_dim), dtype=float)
    for j, var in enumerate(space.variables):
        col = compiled.offsets[j]
        if var.kind == CATEGORICAL:
            idx = matrix[:, j].astype(int)
            out[np.arange(matrix.shape[0]), col + idx] = 1.0
        else:
            out[:, col] = (matrix[:, j] - var.lower) / (var.upper - var.lower)
    return out


def encode(space: DesignSpace, point: DesignPoint) -> np.ndarray:
    """
    Codifica um ponto corrigido (min-max para contínuas/inteiras, one-hot para categóricas).

    Args:
        space: Espaço de projeto
        point: Ponto corrigido

    Returns:
        Vetor de comprimento relaxed_dim
    """
    return encode_batch(space, to_numeric(space, point)[None, :])[0]


def decode_to_numeric(space: DesignSpace, relaxed: np.ndarray) -> np.ndarray:
    """Inverso por bloco da codificação, sem correção."""
    compiled = space._compiled
    relaxed = np.atleast_2d(np.asarray(relaxed, dtype=float))
    if relaxed.shape[1] != space.relaxed_dim:
        raise LengthMismatchError(
            f"vetor relaxado com {relaxed.shape[1]} coordenadas, esperado {space.relaxed_dim}"
        )
    out = np.zeros((relaxed.shape[0], space.n_variables), dtype=float)
    for j, var in enumerate(space.variables):
        col = compiled.offsets[j]
        if var.kind == CATEGORICAL:
            out[:, j] = np.argmax(relaxed[:, col:col + var.n_dims], axis=1)
        else:
            z = np.clip(relaxed[:, col], 0.0, 1.0)
            span = var.upper - var.lower
            if var.kind == INTEGER:
                out[:, j] = var.lower + round_half_away(z * span)
            else:
                out[:, j] = var.lower + z * span
    return out


def decode_batch(space: DesignSpace, relaxed: np.ndarray) -> List[DesignPoint]:
    matrix, active = correct_batch(space, decode_to_numeric(space, relaxed))
    return points_from_batch(space, matrix, active)


def decode(space: DesignSpace, vector: Sequence[float]) -> DesignPoint:
    """
    Decodifica um vetor relaxado e corrige o resultado.

    Raises:
        LengthMismatchError: comprimento diferente de relaxed_dim
    """
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1:
        raise LengthMismatchError("decode espera um vetor 1-D")
    return decode_batch(space, vector[None, :])[0]


# ---------------------------------------------------------------------------
# Amostragem
# ---------------------------------------------------------------------------

def lhs_unit(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hipercubo latino de n linhas em [0, 1]^dim (um estrato por linha e dimensão)."""
    if n < 1:
        raise ConfigurationError(f"n deve ser >= 1 (recebido {n})")
    return qmc.LatinHypercube(d=dim, seed=rng).random(n)


def sample_doe(space: DesignSpace, n: int, rng: np.random.Generator) -> List[DesignPoint]:
    """
    Plano de experimentos por hipercubo latino no espaço relaxado.

    Args:
        space: Espaço de projeto
        n: Número de pontos
        rng: Gerador numpy

    Returns:
        Lista de pontos corrigidos
    """
    return decode_batch(space, lhs_unit(n, space.relaxed_dim, rng))


def sample_uniform_batch(space: DesignSpace, n: int,
                         rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Amostragem uniforme de cada domínio bruto, seguida de correção (forma numérica)."""
    compiled = space._compiled
    matrix = np.empty((n, space.n_variables), dtype=float)
    for j, kind in enumerate(compiled.kinds):
        if kind == CONTINUOUS:
            matrix[:, j] = rng.uniform(compiled.lower[j], compiled.upper[j], size=n)
        else:
            matrix[:, j] = rng.integers(int(compiled.lower[j]), int(compiled.upper[j]) + 1, size=n)
    return correct_batch(space, matrix)


def sample_uniform(space: DesignSpace, n: int, rng: np.random.Generator) -> List[DesignPoint]:
    matrix, active = sample_uniform_batch(space, n, rng)
    return points_from_batch(space, matrix, active)


# ---------------------------------------------------------------------------
# Enumeração
# ---------------------------------------------------------------------------

def enumerate_discrete(space: DesignSpace, cap: Optional[int] = None) -> DiscreteEnumeration:
    """
    Enumera todas as atribuições discretas válidas (contínuas imputadas).

    Args:
        space: Espaço de projeto
        cap: Limite do produto cartesiano (padrão Config.ENUMERATION_CAP)

    Returns:
        DiscreteEnumeration com pontos deduplicados e tamanho cartesiano

    Raises:
        DesignSpaceTooLargeError: produto cartesiano acima do limite
    """
    ensure_valid(space)
    cap = get_config().ENUMERATION_CAP if cap is None else cap

    discrete = [j for j, var in enumerate(space.variables) if var.is_discrete]
    if not discrete:
        raise ConfigurationError("enumerate_discrete requer ao menos uma variável discreta")

    domains = [space.variables[j].numeric_domain() for j in discrete]
    cartesian = math.prod(len(d) for d in domains)
    if cartesian > cap:
        raise DesignSpaceTooLargeError(
            f"too large: produto cartesiano {cartesian} excede o limite {cap}"
        )

    logger.info(f"Enumerando {cartesian} combinações discretas")

    unique: Dict[Tuple[float, ...], Tuple[np.ndarray, np.ndarray]] = {}
    combos = itertools.product(*domains)
    chunk_size = 100_000
    while True:
        chunk = list(itertools.islice(combos, chunk_size))
        if not chunk:
            break
        matrix = np.tile(space.imputation_row, (len(chunk), 1))
        matrix[:, discrete] = np.array(chunk, dtype=float)
        corrected, active = correct_batch(space, matrix)
        for row, act in zip(corrected, active):
            key = tuple(row.tolist())
            if key not in unique:
                unique[key] = (row, act)

    points = tuple(from_numeric(space, row, act) for row, act in unique.values())
    logger.info(f"Enumeração concluída: {len(points)} atribuições válidas")
    return DiscreteEnumeration(points, cartesian)


def count_architectures(space: DesignSpace, cap: Optional[int] = None) -> int:
    """Número de projeções distintas das atribuições válidas sobre signature_vars."""
    if not space.signature_vars:
        raise ConfigurationError("signature_vars vazio")
    enumeration = enumerate_discrete(space, cap)
    signatures = {tuple(p.values[j] for j in space.signature_vars) for p in enumeration.points}
    return len(signatures)


def architecture_signature(space: DesignSpace, point: DesignPoint) -> Tuple[Any, ...]:
    return tuple(point.values[j] for j in space.signature_vars)


# ---------------------------------------------------------------------------
# Forma nomeada e JSON
# ---------------------------------------------------------------------------

def point_to_named(space: DesignSpace, point: DesignPoint) -> Dict[str, Any]:
    return {var.name: value for var, value in zip(space.variables, point.values)}


def point_from_named(space: DesignSpace, mapping: Dict[str, Any]) -> DesignPoint:
    missing = [name for name in space.names if name not in mapping]
    if missing:
        raise SchemaMismatchError(f"schema mismatch: variáveis ausentes {missing}")
    return correct(space, [mapping[name] for name in space.names])


def space_to_dict(space: DesignSpace) -> Dict[str, Any]:
    variables = []
    for var in space.variables:
        item = {'name': var.name, 'kind': var.kind}
        if var.kind == CATEGORICAL:
            item['levels'] = list(var.levels)
        else:
            item['lower'] = var.lower
            item['upper'] = var.upper
        variables.append(item)
    return {
        'variables': variables,
        'activation_rules': [
            {'child': r.child, 'parent': r.parent, 'activating_values': list(r.activating_values)}
            for r in space.activation_rules
        ],
        'value_rules': [
            {'target': r.target, 'controller': r.controller,
             'allowed': [[key, list(values)] for key, values in r.allowed]}
            for r in space.value_rules
        ],
        'signature_vars': list(space.signature_vars),
    }


def space_from_dict(data: Dict[str, Any]) -> DesignSpace:
    try:
        variables = []
        for item in data['variables']:
            kind = item['kind']
            if kind == CATEGORICAL:
                variables.append(VariableSpec(item['name'], kind, levels=tuple(item['levels'])))
            elif kind == INTEGER:
                variables.append(VariableSpec(item['name'], kind, int(item['lower']), int(item['upper'])))
            else:
                variables.append(VariableSpec(item['name'], kind, float(item['lower']), float(item['upper'])))
        activation = [
            ActivationRule(r['child'], r['parent'], tuple(r['activating_values']))
            for r in data.get('activation_rules', [])
        ]
        values = [
            ValueRule(r['target'], r['controller'], tuple((k, tuple(v)) for k, v in r['allowed']))
            for r in data.get('value_rules', [])
        ]
        return DesignSpace(tuple(variables), tuple(activation), tuple(values),
                           tuple(data.get('signature_vars', [])))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaMismatchError(f"schema mismatch: documento de espaço inválido ({e})") from e


def space_to_json(space: DesignSpace) -> str:
    return json.dumps(space_to_dict(space), indent=2)


def space_from_json(text: str) -> DesignSpace:
    return space_from_dict(json.loads(text))
