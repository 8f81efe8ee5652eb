"""
Configurações do ArchBO

Este módulo contém as configurações de ambiente da ferramenta
(diretórios de saída, logging, paralelismo e limites de enumeração).
As configurações de cada execução ficam no RunConfig em JSON.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()


class Config:
    """Configurações base da aplicação."""

    DEBUG = os.getenv('DEBUG', 'False').lower() in ['true', '1', 'yes']
    TESTING = False

    # Diretórios
    BASE_DIR = Path(__file__).parent.parent
    OUT_DIR = Path(os.getenv('ARCHBO_OUT', 'runs'))

    # Paralelismo (avaliações da DoE e multistarts dos GPs)
    N_WORKERS = int(os.getenv('ARCHBO_WORKERS', 1))

    # Limite do produto cartesiano na enumeração discreta
    ENUMERATION_CAP = int(os.getenv('ENUMERATION_CAP', 10 ** 7))

    # Semente padrão
    DEFAULT_SEED = int(os.getenv('ARCHBO_SEED', 1))

    # Configurações de log
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_TO_FILE = os.getenv('LOG_TO_FILE', 'False').lower() in ['true', '1', 'yes']
    LOG_FILE = BASE_DIR / 'logs' / 'archbo.log'
    LOG_MAX_BYTES = int(os.getenv('LOG_MAX_BYTES', 10 * 1024 * 1024))  # 10MB
    LOG_BACKUP_COUNT = int(os.getenv('LOG_BACKUP_COUNT', 5))


class DevelopmentConfig(Config):
    """Configurações para ambiente de desenvolvimento."""
    DEBUG = True
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')


class ProductionConfig(Config):
    """Configurações para execuções longas (campanhas de comparação)."""
    DEBUG = False
    LOG_LEVEL = 'WARNING'
    LOG_TO_FILE = True


class TestingConfig(Config):
    """Configurações para ambiente de testes."""
    TESTING = True
    DEBUG = True
    LOG_LEVEL = 'WARNING'
    LOG_TO_FILE = False
    N_WORKERS = 1


# Mapeamento de ambientes
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config():
    """Retorna a configuração baseada na variável de ambiente."""
    env = os.getenv('ARCHBO_ENV', 'development')
    return config.get(env, config['default'])
