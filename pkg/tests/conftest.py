from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from mmqssa.model import SET_A, Parameters


def construct(alpha, eps_ss, beta, k1=1.0, e_T=10.0, omega=1.0) -> Parameters:
    """Parameters with prescribed qualifiers; K_M follows from e_T and eps_ss."""
    K_M = e_T / eps_ss
    k2 = k1 * K_M * beta / (1 + beta)
    k_m1 = k1 * K_M / (1 + beta)
    return Parameters(k0=alpha * k2 * e_T, e_T=e_T, k1=k1, k2=k2, k_m1=k_m1, omega=omega)


def random_parameter_sets(n: int, seed: int = 12345) -> list[Parameters]:
    """alpha in (0.05, 0.95), eps_ss in (1e-3, 0.3); k1, e_T, beta, omega log-uniform."""
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(0.05, 0.95, n)
    eps_ss = np.exp(rng.uniform(np.log(1e-3), np.log(0.3), n))
    beta = 10 ** rng.uniform(-3, 3, n)
    k1 = 10 ** rng.uniform(-2, 2, n)
    e_T = 10 ** rng.uniform(-1, 2, n)
    omega = 10 ** rng.uniform(0, 3, n)
    return [construct(*row) for row in zip(alpha, eps_ss, beta, k1, e_T, omega)]


def exact_variance_gap(p: Parameters) -> Fraction:
    """|full(eps=0) - reduced| / full(eps=0), evaluated in exact rational arithmetic."""
    k0, e_T, k1, k2, k_m1, om = (Fraction(x) for x in (p.k0, p.e_T, p.k1, p.k2, p.k_m1, p.omega))
    K_M, K_S = (k_m1 + k2) / k1, k_m1 / k1
    alpha = k0 / (k2 * e_T)
    gamma = alpha * K_M / (1 - alpha)
    full0 = om * gamma * (1 + (gamma / K_M) * (K_S + gamma) / (K_M + gamma))
    red = om * gamma * (1 + gamma / K_M)
    return abs(full0 - red) / full0


@st.composite
def parameters(draw, alpha=(0.01, 0.99)):
    a = draw(st.floats(*alpha))
    eps_ss = 10 ** draw(st.floats(-3, 0))
    beta = 10 ** draw(st.floats(-3, 3))
    k1 = 10 ** draw(st.floats(-2, 2))
    e_T = 10 ** draw(st.floats(-1, 2))
    omega = 10 ** draw(st.floats(0, 3))
    return construct(a, eps_ss, beta, k1, e_T, omega)


@pytest.fixture
def set_a() -> Parameters:
    return SET_A


@pytest.fixture(scope="session")
def random_sets() -> list[Parameters]:
    return random_parameter_sets(1000)


SWEEP_SEED = 2021
SWEEP_BUDGET = 10**7


@pytest.fixture(scope="session")
def beta_sweep():
    from mmqssa.sweep import DEFAULT_BETAS, sweep_beta

    return sweep_beta(DEFAULT_BETAS, budget=SWEEP_BUDGET, seed=SWEEP_SEED)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
