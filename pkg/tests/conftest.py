import warnings

import numpy as np
import pytest

from mobius_mono.errors import TolNotMetWarning
from mobius_mono.scenarios import catenoid_scenario, flat_disk_scenario


@pytest.fixture(autouse=True)
def _quiet_tol_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TolNotMetWarning)
        yield


@pytest.fixture(scope="session")
def disk_scn():
    return flat_disk_scenario()


@pytest.fixture(scope="session")
def cat_scn():
    return catenoid_scenario()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260823)
