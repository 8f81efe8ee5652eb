"""Fixtures compartilhadas dos testes."""

import logging
import os

os.environ.setdefault('ARCHBO_ENV', 'testing')

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from services.design_space import DesignSpace, VariableSpec  # noqa: E402
from services.turbofan_bench import simple_turbofan_space  # noqa: E402


@pytest.fixture(autouse=True)
def reset_loggers():
    """Remove os handlers criados pela CLI (presos ao stderr de cada invocação)."""
    yield
    for name in ('app', 'services', 'utils'):
        logger = logging.getLogger(name)
        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()


@pytest.fixture
def turbofan_space():
    return simple_turbofan_space()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_space():
    """Uma variável contínua em [0, 1]."""
    return DesignSpace((VariableSpec.continuous('x', 0.0, 1.0),))


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / 'out'
    path.mkdir()
    return path
