"""
Sub-fluxos de números aleatórios nomeados.

Cada etapa (doe, fit, infill, evo, bench) recebe um gerador derivado
do hash do nome com a semente mestre, de modo que a ordem de chamada
entre módulos não altera os resultados.
"""

import hashlib

import numpy as np


def substream_seed(seed: int, name: str) -> int:
    """Semente inteira derivada de (semente mestre, nome)."""
    digest = hashlib.sha256(f"{int(seed)}:{name}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little')


def substream(seed: int, name: str) -> np.random.Generator:
    """
    Gerador independente para o sub-fluxo nomeado.

    Args:
        seed: Semente mestre da execução
        name: Nome do sub-fluxo

    Returns:
        numpy Generator determinístico
    """
    return np.random.default_rng(np.random.SeedSequence(substream_seed(seed, name)))
