# Serviços de otimização
__version__ = "1.0.0"
