# Configurações do ArchBO
__version__ = "1.0.0"
