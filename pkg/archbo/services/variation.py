"""
Operadores de variação para espaços mistos.

Genes contínuos: SBX limitado + mutação polinomial.
Genes discretos (inteiros e categóricos): cruzamento uniforme +
mutação por reinicialização aleatória. Os filhos saem na forma
numérica sem correção; quem chama aplica design_space.correct_batch.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from services.design_space import CONTINUOUS, DesignSpace

logger = logging.getLogger(__name__)


class MixedVariation:
    """Cruzamento e mutação sobre linhas numéricas de um espaço misto."""

    def __init__(self, space: DesignSpace, crossover_prob: float = 0.9, sbx_eta: float = 15.0,
                 mutation_eta: float = 20.0, mutation_prob: Optional[float] = None):
        compiled = space._compiled
        self.space = space
        self.crossover_prob = crossover_prob
        self.sbx_eta = sbx_eta
        self.mutation_eta = mutation_eta
        self.mutation_prob = 1.0 / space.n_variables if mutation_prob is None else mutation_prob

        self.continuous = np.array([j for j, k in enumerate(compiled.kinds) if k == CONTINUOUS], dtype=int)
        self.discrete = np.array([j for j, k in enumerate(compiled.kinds) if k != CONTINUOUS], dtype=int)
        self.lower = compiled.lower
        self.upper = compiled.upper

    def mate(self, a: np.ndarray, b: np.ndarray,
             rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Dois filhos a partir de dois pais (cruzamento e mutação)."""
        c1, c2 = np.array(a, dtype=float), np.array(b, dtype=float)
        if rng.random() < self.crossover_prob:
            c1, c2 = self._sbx(c1, c2, rng)
            c1, c2 = self._uniform(c1, c2, rng)
        return self.mutate(c1, rng), self.mutate(c2, rng)

    def mutate(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        x = np.array(x, dtype=float)
        x = self._polynomial(x, rng)
        return self._random_reset(x, rng)

    def _sbx(self, c1, c2, rng):
        eta = self.sbx_eta
        for j in self.continuous:
            if rng.random() > 0.5:
                continue
            x1, x2 = c1[j], c2[j]
            if abs(x1 - x2) < 1e-14:
                continue
            lo, hi = self.lower[j], self.upper[j]
            y1, y2 = min(x1, x2), max(x1, x2)
            u = rng.random()

            beta = 1.0 + 2.0 * (y1 - lo) / (y2 - y1)
            child1 = 0.5 * ((y1 + y2) - _betaq(beta, eta, u) * (y2 - y1))
            beta = 1.0 + 2.0 * (hi - y2) / (y2 - y1)
            child2 = 0.5 * ((y1 + y2) + _betaq(beta, eta, u) * (y2 - y1))

            child1, child2 = np.clip(child1, lo, hi), np.clip(child2, lo, hi)
            if rng.random() < 0.5:
                child1, child2 = child2, child1
            c1[j], c2[j] = child1, child2
        return c1, c2

    def _uniform(self, c1, c2, rng):
        if self.discrete.size == 0:
            return c1, c2
        swap = self.discrete[rng.random(self.discrete.size) < 0.5]
        c1[swap], c2[swap] = c2[swap].copy(), c1[swap].copy()
        return c1, c2

    def _polynomial(self, x, rng):
        eta = self.mutation_eta
        for j in self.continuous:
            if rng.random() >= self.mutation_prob:
                continue
            lo, hi = self.lower[j], self.upper[j]
            span = hi - lo
            delta1, delta2 = (x[j] - lo) / span, (hi - x[j]) / span
            u = rng.random()
            power = 1.0 / (eta + 1.0)
            if u < 0.5:
                val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1) ** (eta + 1.0)
                deltaq = val ** power - 1.0
            else:
                val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2) ** (eta + 1.0)
                deltaq = 1.0 - val ** power
            x[j] = np.clip(x[j] + deltaq * span, lo, hi)
        return x

    def _random_reset(self, x, rng):
        for j in self.discrete:
            if rng.random() < self.mutation_prob:
                x[j] = float(rng.integers(int(self.lower[j]), int(self.upper[j]) + 1))
        return x


def _betaq(beta: float, eta: float, u: float) -> float:
    alpha = 2.0 - beta ** -(eta + 1.0)
    if u <= 1.0 / alpha:
        return (u * alpha) ** (1.0 / (eta + 1.0))
    return (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
