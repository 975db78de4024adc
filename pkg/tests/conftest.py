import numpy as np
import pytest

from spinqudit import SpinQuantum


@pytest.fixture(scope="session")
def q7() -> SpinQuantum:
    return SpinQuantum(7)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240814)


def random_density_matrix(rng: np.random.Generator, d: int = 8) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure(rng: np.random.Generator, d: int = 8) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


# the SI amplitude vectors, read directly into the descending-m basis;
# exact values (sqrt(C(7,k))/sqrt(128) patterns) plus the printed roundings
SI_SCS_MINUS_X = np.array(
    [-0.08838834764831845, 0.2338535866733712, -0.40504629365049172, 0.52291251658379723,
     -0.52291251658379723, 0.40504629365049172, -0.2338535866733712, 0.08838834764831845]
)

SI_XCAT = SI_SCS_MINUS_X * np.exp(
    -1j * np.pi * np.array([3, 1, 3, 1, 3, 1, 3, 1]) / 4.0
)

SI_SCS_MINUS_X_PRINTED = np.array([-0.088, 0.234, -0.405, 0.523, -0.523, 0.405, -0.234, 0.088])

SI_XCAT_PRINTED = SI_SCS_MINUS_X_PRINTED * np.exp(
    -1j * np.pi * np.array([3, 1, 3, 1, 3, 1, 3, 1]) / 4.0
)
