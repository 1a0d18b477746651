import numpy as np
import pytest

import bsfopt as b

BENCHMARK_TARGET_MG = 447.6
BENCHMARK_DAYS = 14
BENCHMARK_T = 25.0
BENCHMARK_TAU = 16.0


@pytest.fixture(scope="session")
def benchmark_schedule():
    return b.ControlSchedule.constant(BENCHMARK_DAYS, BENCHMARK_T, BENCHMARK_TAU)


@pytest.fixture(scope="session")
def calibrated_params(benchmark_schedule):
    """Default model with initial counts sized to hit the benchmark egg mass."""
    params = b.ModelParams.defaults()
    n0 = b.calibrate_scale(BENCHMARK_TARGET_MG, benchmark_schedule, params)
    return params.replace(N_f0=n0, N_m0=n0)


@pytest.fixture(scope="session")
def benchmark_trajectory(calibrated_params, benchmark_schedule):
    return b.integrate(calibrated_params.initial_state(), benchmark_schedule,
                       calibrated_params)


def random_schedule(rng: np.random.Generator, days: int = BENCHMARK_DAYS):
    """Uniform in-box schedule."""
    return b.ControlSchedule(rng.uniform(15.0, 40.0, days),
                             rng.uniform(2.0, 24.0, days))
