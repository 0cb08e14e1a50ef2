import sys

import numpy as np
import pytest

from ofdmtr import ReservationPlan, WaveformParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_plan(rng, params, min_reserved=1):
    """Random split of the code slots with both sets nonempty."""
    n = params.n_codes
    k = int(rng.integers(1, n - min_reserved + 1)) if n > 1 else 0
    info = rng.choice(n, k, replace=False)
    return ReservationPlan(params, info)


def random_instance(rng, n_range=(4, 10), m_range=(1, 10), oversampling=4):
    params = WaveformParams(
        int(rng.integers(n_range[0], n_range[1] + 1)),
        int(rng.integers(m_range[0], m_range[1] + 1)),
        oversampling,
    )
    plan = random_plan(rng, params)
    a = rng.standard_normal(plan.n_informative) + 1j * rng.standard_normal(plan.n_informative)
    return plan, a


def design_instance():
    """N=6, M=1, O_s=10, carriers 2 and 3 informative with unit symbols."""
    params = WaveformParams(6, 1, 10)
    return ReservationPlan.from_carriers(params, [2, 3]), np.array([1.0 + 0j, 1.0 + 0j])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
