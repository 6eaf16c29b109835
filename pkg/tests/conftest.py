import numpy as np
import pytest

import sftnorm as S

SEED = 7

MULT3_DICT = {
    "name": "mult3",
    "states": ["q0", "q1", "q2"],
    "input_alphabet": ["0", "1"],
    "output_alphabet": ["0", "1"],
    "initial": ["q0"],
    "final": ["q0", "q1", "q2"],
    "transitions": [
        {"from": "q0", "in": "0", "out": "0", "to": "q0"},
        {"from": "q0", "in": "0", "out": "1", "to": "q1"},
        {"from": "q1", "in": "1", "out": "1", "to": "q0"},
        {"from": "q1", "in": "0", "out": "0", "to": "q2"},
        {"from": "q2", "in": "1", "out": "1", "to": "q2"},
        {"from": "q2", "in": "1", "out": "0", "to": "q1"},
    ],
}


@pytest.fixture(scope="session")
def golden():
    return S.golden_mean_spec()


@pytest.fixture(scope="session")
def full2():
    return S.full_shift("01")


@pytest.fixture(scope="session")
def gm_parry(golden):
    return S.parry(golden)


@pytest.fixture(scope="session")
def parry_sample_1m(golden):
    return S.sample_parry(golden, 10**6, seed=SEED)


@pytest.fixture(scope="session")
def periodic_1m():
    return "01" * 500_000


@pytest.fixture(scope="session")
def skewed_sample_1m(golden):
    q = np.array([[0.95, 0.05], [1.0, 0.0]])
    return S.sample_skewed(golden, q, 10**6, seed=SEED + 1)


@pytest.fixture(scope="session")
def mult3():
    return S.parse_transducer(MULT3_DICT)


@pytest.fixture(scope="session")
def identity2():
    return S.identity_transducer("01")
