import pytest

from rovtune import PIGains, SimConfig, default_yaw_plant, simulate_pi_loop, simulate_step


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # trigger numba JIT on both kernel arities so timed tests measure compute only
    cfg = SimConfig(dt=1e-3, t_final=0.02)
    simulate_step(default_yaw_plant(), cfg)
    simulate_pi_loop(default_yaw_plant(), PIGains(1.0, 1.0), cfg)


@pytest.fixture()
def plant():
    return default_yaw_plant()
