"""
测试公共夹具
血流动力学参数与随机参数生成
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

# 添加项目路径
sys.path.insert(0, str(Path(__file__).parent))

from src.config.settings import RunConfig
from src.model.core import PhysicalParams
from src.model.spectral import build_spectrum


@pytest.fixture(autouse=True)
def reset_logging():
    """命令行测试会把 loguru 输出挂到被捕获的 stderr 上，每个测试结束后移除"""
    yield
    logger.remove()


@pytest.fixture
def fixture_config() -> RunConfig:
    """ρ_f=1, ρ_s=1.1, H_s=0.1, β=ψ=4e4, R=0.5, L=5, Δt=5e-4, 50 个模态, α=1e3"""
    return RunConfig()


@pytest.fixture
def fixture_params(fixture_config) -> PhysicalParams:
    return fixture_config.physical()


@pytest.fixture
def fixture_spectrum(fixture_params):
    return build_spectrum(fixture_params, 50)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


def _log_uniform(rng: np.random.Generator, center: float, decades: float) -> float:
    return float(center * 10.0 ** rng.uniform(-decades / 2.0, decades / 2.0))


@pytest.fixture
def random_params(rng):
    """以血流动力学参数为中心、每个量跨 4 个数量级的随机物理参数"""

    def make() -> PhysicalParams:
        return PhysicalParams(
            rho_f=_log_uniform(rng, 1.0, 4.0),
            rho_s=_log_uniform(rng, 1.1, 4.0),
            h_s=_log_uniform(rng, 0.1, 4.0),
            beta=_log_uniform(rng, 4e4, 4.0),
            psi=_log_uniform(rng, 4e4, 4.0),
            radius=float(rng.uniform(0.1, 1.0)),
            length=float(rng.uniform(1.0, 10.0)),
        )

    return make
