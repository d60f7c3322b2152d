"""Shared Monte Carlo fixtures.

Each preset experiment costs seconds to minutes, so the reports are computed
once per session and shared between the module tests and the acceptance
gate.  Everything is seeded through the config defaults, so the fixture
values are bit-identical across runs.
"""

import pytest

from eigenrows import default_config, run_experiment


@pytest.fixture(scope="session")
def twoblock_report():
    return run_experiment(default_config("twoBlockSbm"))


@pytest.fixture(scope="session")
def snmc_report():
    return run_experiment(default_config("snmc"))


@pytest.fixture(scope="session")
def rank1_report():
    return run_experiment(default_config("rank1Sbm"))


@pytest.fixture(scope="session")
def mmsbm_report():
    return run_experiment(default_config("mmsbmPure"))


@pytest.fixture(scope="session")
def lptest_report():
    return run_experiment(default_config("lpTestPower"))
