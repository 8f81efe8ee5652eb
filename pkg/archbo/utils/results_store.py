"""
Armazenamento de Resultados

Este módulo grava e lê os artefatos de uma execução (history.json,
convergence.csv, summary.json, timings.csv, config.json, oracle.json)
em um diretório de saída. Toda escrita é atômica: arquivo temporário
no mesmo diretório seguido de os.replace.
"""

import csv
import io
import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)

HISTORY_FILE = 'history.json'
CONVERGENCE_FILE = 'convergence.csv'
SUMMARY_FILE = 'summary.json'
TIMINGS_FILE = 'timings.csv'
CONFIG_FILE = 'config.json'
ORACLE_FILE = 'oracle.json'

CONVERGENCE_FIELDS = ('eval_index', 'status', 'objective', 'feasible', 'best_so_far')
TIMING_FIELDS = ('eval_index', 'iteration', 'eval_time', 'fit_time', 'infill_time')


def dumps(data: Any) -> str:
    """Serialização JSON canônica usada em todos os artefatos."""
    return json.dumps(data, indent=2, ensure_ascii=False, allow_nan=False) + '\n'


class ResultsStore:
    """Diretório de saída de uma execução."""

    def __init__(self, out_dir):
        """
        Inicializa o armazenamento.

        Args:
            out_dir: Diretório de saída (criado se não existir)
        """
        self.out_dir = Path(out_dir)
        self._lock = threading.Lock()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        logger.debug(f"ResultsStore inicializado em {self.out_dir}")

    def write_text(self, name: str, text: str) -> Path:
        target = self.out_dir / name
        with self._lock:
            fd, tmp_path = tempfile.mkstemp(prefix=f'.{name}.', dir=self.out_dir)
            try:
                with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
                    handle.write(text)
                os.replace(tmp_path, target)
            except OSError as e:
                logger.error(f"Erro ao gravar {target}: {str(e)}", exc_info=True)
                if os.path.exists(tmp_path):
                    os.unlink(tmp_path)
                raise
        logger.debug(f"Arquivo gravado: {target}")
        return target

    def write_json(self, name: str, data: Any) -> Path:
        return self.write_text(name, dumps(data))

    def write_csv(self, name: str, rows: Sequence[Dict[str, Any]], fieldnames: Sequence[str]) -> Path:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)
        return self.write_text(name, buffer.getvalue())

    def read_json(self, name: str) -> Any:
        path = self.out_dir / name
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)

    def save_run(self, history: Dict[str, Any], convergence: List[Dict[str, Any]],
                 timings: List[Dict[str, Any]], summary: Dict[str, Any],
                 config: Dict[str, Any]) -> None:
        """
        Grava todos os artefatos de uma execução.

        Args:
            history: Histórico serializado
            convergence: Linhas do convergence.csv
            timings: Linhas do timings.csv
            summary: Resumo da execução
            config: RunConfig efetivo
        """
        self.write_json(CONFIG_FILE, config)
        self.write_json(HISTORY_FILE, history)
        self.write_csv(CONVERGENCE_FILE, convergence, CONVERGENCE_FIELDS)
        self.write_csv(TIMINGS_FILE, timings, TIMING_FIELDS)
        self.write_json(SUMMARY_FILE, summary)
        logger.info(f"Resultados gravados em {self.out_dir}")

    def save_oracle(self, data: Dict[str, Any]) -> Path:
        return self.write_json(ORACLE_FILE, data)


def load_summary(run_dir) -> Optional[Dict[str, Any]]:
    """Lê o summary.json de uma execução (None se ausente ou ilegível)."""
    path = Path(run_dir) / SUMMARY_FILE
    if not path.is_file():
        return None
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"summary.json ilegível em {run_dir}: {str(e)}")
        return None


def load_best_so_far(run_dir) -> List[Optional[float]]:
    """Coluna best_so_far do convergence.csv (None antes do primeiro ponto viável)."""
    path = Path(run_dir) / CONVERGENCE_FILE
    with open(path, 'r', encoding='utf-8', newline='') as handle:
        return [float(row['best_so_far']) if row['best_so_far'] else None
                for row in csv.DictReader(handle)]
