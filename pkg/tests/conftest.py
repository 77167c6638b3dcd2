import numpy as np
import pytest

from ifdiv.channel import GEParams
from ifdiv.config import ExperimentConfig
from ifdiv.mdp import CostModel, build_fpomdp, build_full_mdp, build_hmdp
from ifdiv.sim import EnvConfig
from ifdiv.solver import value_iteration

#: Default evaluation parameters used across the suite.
LTE = GEParams(p=0.0178, r=0.2577)
WIFI = GEParams(p=0.0515, r=0.9468)
E_LTE = 200.0
E_WIFI = 15.85
N_MAX = 4
GAMMA = 0.99999

#: Reference values for the default parameter set.
REF_LIFETIME_BOTH_ON = 5.0738e6
REF_LIFETIME_WIFI_ONLY = 1.3633e5
REF_OCCUPANCY_BOTH_ON = (0.9967, 0.0032, 1.27e-4, 4.9971e-6)
REF_OCCUPANCY_WIFI_ONLY = (0.9484, 0.0489, 0.0026, 1.38e-4)

#: Harsh, fast-absorbing setup for simulation-heavy unit tests.
HARSH1 = GEParams(p=0.45, r=0.3)
HARSH2 = GEParams(p=0.5, r=0.4)


def cost_model(eta: float) -> CostModel:
    return CostModel(eta=eta, e1=E_LTE, e2=E_WIFI)


@pytest.fixture(scope="session")
def config():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def full_eta0():
    return build_full_mdp(LTE, WIFI, cost_model(0.0), N_MAX, GAMMA)


@pytest.fixture(scope="session")
def solved_eta0(full_eta0):
    return value_iteration(full_eta0)


@pytest.fixture(scope="session")
def full_eta007():
    return build_full_mdp(LTE, WIFI, cost_model(0.07), N_MAX, GAMMA)


@pytest.fixture(scope="session")
def solved_eta007(full_eta007):
    return value_iteration(full_eta007)


@pytest.fixture(scope="session")
def full_eta10():
    return build_full_mdp(LTE, WIFI, cost_model(10.0), N_MAX, GAMMA)


@pytest.fixture(scope="session")
def solved_eta10(full_eta10):
    return value_iteration(full_eta10)


@pytest.fixture(scope="session")
def env_eta0():
    return EnvConfig(LTE, WIFI, N_MAX, cost_model(0.0))


@pytest.fixture(scope="session")
def env_eta007():
    return EnvConfig(LTE, WIFI, N_MAX, cost_model(0.07))


@pytest.fixture(scope="session")
def harsh_env():
    return EnvConfig(HARSH1, HARSH2, 3, CostModel(eta=0.3, e1=150.0, e2=40.0))


@pytest.fixture(scope="session")
def harsh_solved(harsh_env):
    process = build_full_mdp(HARSH1, HARSH2, harsh_env.cost, 3, 0.95)
    return value_iteration(process, epsilon=1e-9, k_max=5000)


@pytest.fixture(scope="session")
def harsh_solved_hmdp(harsh_env):
    process = build_hmdp(HARSH1, HARSH2, harsh_env.cost, 3, 0.95)
    return value_iteration(process, epsilon=1e-9, k_max=5000)


@pytest.fixture(scope="session")
def harsh_solved_fpomdp(harsh_env):
    process = build_fpomdp(HARSH1, HARSH2, harsh_env.cost, 3, 0.95)
    return value_iteration(process, epsilon=1e-9, k_max=5000)


def reachable_mask(process) -> np.ndarray:
    """Non-absorbing states reachable from the initial support under any
    action sequence."""
    from ifdiv.chain import initial_state_vector

    init = initial_state_vector(process) > 0
    reach = init.copy()
    frontier = list(np.flatnonzero(init))
    any_action = process.T.sum(axis=1)
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(any_action[i] > 0):
            if not reach[j]:
                reach[j] = True
                frontier.append(j)
    return reach & ~process.absorbing
