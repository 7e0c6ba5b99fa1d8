import logging

import numpy as np
import pytest

from analytics.pear_constants import build_constants


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def constants_p01():
    """Likelihood constants at p = 0.1, V_P = 1."""
    return build_constants(0.1, 1.0)


@pytest.fixture
def restore_root_logging():
    """setup_logging replaces the root handlers; put them back afterwards."""
    root = logging.getLogger()
    handlers = root.handlers[:]
    level = root.level
    yield
    for handler in root.handlers[:]:
        root.removeHandler(handler)
        if handler not in handlers:
            handler.close()
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)
