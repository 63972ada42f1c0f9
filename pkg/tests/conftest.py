"""
Shared fixtures
"""
import logging
from fractions import Fraction

import numpy as np
import pytest

from config import settings
from src.model import ModelParams


@pytest.fixture
def two_message_params():
    """l = 2, c = 2, kappa = 1/2 with messages (0, 0) and (1, 1)"""
    return ModelParams(l=2, c=2, M=2, kappa=Fraction(1, 2))


@pytest.fixture
def two_messages():
    return np.array([[0, 0], [1, 1]])


@pytest.fixture
def cycle_instance():
    """Messages (0, 0) and (0, 1): under T, unit (0, 0) alone oscillates with {(1, 0), (1, 1)}"""
    params = ModelParams(l=2, c=2, M=2, kappa=Fraction(1, 2))
    return params, np.array([[0, 0], [0, 1]])


@pytest.fixture(scope='session', autouse=True)
def isolated_logging(tmp_path_factory):
    """Keep log files out of the repository and drop handlers afterwards"""
    logs = tmp_path_factory.mktemp('logs')
    with pytest.MonkeyPatch.context() as patch:
        patch.setattr(settings, 'LOG_DIR', logs)
        patch.setattr(settings, 'LOG_FILE', logs / 'test.log')
        yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        # pytest owns its capture handlers
        if type(handler).__module__ == 'logging':
            root.removeHandler(handler)
            handler.close()
