"""Shared fixtures.

Tuning runs a root solve with nested quadrature, so the tuned systems are
built once per session.  Everything here is deterministic.
"""

import pytest

from slowdiv.canard import generate_orbit, make_canard_setup, setup_from_model
from slowdiv.models import (
    canonical_model,
    load_model,
    tune_double_zero,
    tune_simple_zero,
)
from slowdiv.regularizers import make_arctan_regularizer, make_tanh_regularizer


@pytest.fixture(scope="session")
def tanh_reg():
    return make_tanh_regularizer()


@pytest.fixture(scope="session")
def arctan_reg():
    return make_arctan_regularizer()


@pytest.fixture(scope="session")
def canonical():
    return canonical_model()


@pytest.fixture(scope="session")
def canonical_setup(canonical, tanh_reg):
    return make_canard_setup(canonical, tanh_reg)


@pytest.fixture(scope="session")
def tuned_simple():
    return tune_simple_zero()


@pytest.fixture(scope="session")
def tuned_double():
    return tune_double_zero()


@pytest.fixture(scope="session")
def tuned_setup(tanh_reg):
    return setup_from_model(load_model("builtin:tuned-simple"), tanh_reg)


@pytest.fixture(scope="session")
def tuned_double_setup(tanh_reg):
    return setup_from_model(load_model("builtin:tuned-double"), tanh_reg)


@pytest.fixture(scope="session")
def tuned_orbit(tuned_setup):
    # ~1400 slow-relation iterates down to the floor; takes about a second
    return generate_orbit(tuned_setup, 0.02)
