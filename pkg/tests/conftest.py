"""Shared fixtures: the Γ configurations the suites run on and the wired services"""
import json

import pytest

from cli.app import Services, build_services
from shared.config import Config, GammaConfig
from shared.utils import Logger

GAMMA_SYMBOLIC_2 = {'rank': 2, 'generators': ['g1', 'g2']}

GAMMA_SPECIALIZED_2 = {
    'rank': 2,
    'generators': ['g1', 'g2'],
    'specialization': {'g1': '1', 'g2': '1/17'},
    'unit': [1, 0],
    'check_window': 8,
}


@pytest.fixture(autouse=True)
def _bind_log_stream():
    # structlog's PrintLoggerFactory captures sys.stderr when configured; rebind it to
    # the current test's capture stream so an earlier test's closed stream is never used
    Logger.configure()
    yield


@pytest.fixture
def config(monkeypatch) -> Config:
    for key in ('WITTKIT_GAMMA', 'WITTKIT_ORDER_PADDING', 'WITTKIT_LEVEL_SLACK', 'WITTKIT_C_CHECKS'):
        monkeypatch.delenv(key, raising=False)
    return Config()


@pytest.fixture
def gamma_z() -> GammaConfig:
    return GammaConfig.integers()


@pytest.fixture
def gamma_sym2() -> GammaConfig:
    return GammaConfig.from_document(GAMMA_SYMBOLIC_2)


@pytest.fixture
def gamma_spec2() -> GammaConfig:
    return GammaConfig.from_document(GAMMA_SPECIALIZED_2)


@pytest.fixture
def z(gamma_z, config) -> Services:
    return build_services(gamma_z, config)


@pytest.fixture
def sym2(gamma_sym2, config) -> Services:
    return build_services(gamma_sym2, config)


@pytest.fixture
def spec2(gamma_spec2, config) -> Services:
    return build_services(gamma_spec2, config)


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document under tmp_path and return its path"""

    def write(name: str, document) -> str:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding='utf-8')
        return str(path)

    return write
