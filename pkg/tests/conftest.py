import tempfile
import warnings
from pathlib import Path

import pytest

warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")

from proofbench.mockprover.server import MockProverServer
from proofbench.platform import Platform, PlatformSettings


@pytest.fixture
def mock_server():
    server = MockProverServer(password="secret").start()
    yield server
    server.stop()


@pytest.fixture
def tmp_platform(tmp_path: Path):
    platform = Platform.create(
        PlatformSettings(
            data_dir=tmp_path / "data",
            config_dir=tmp_path / "activities",
            prover="mock",
            seed_instructor=("teacher", "teachpw"),
        )
    )
    yield platform
    platform.close()


@pytest.fixture
def api(tmp_platform):
    from fastapi.testclient import TestClient

    from proofbench.web.app import create_app

    app = create_app(tmp_platform)
    with TestClient(app) as client:
        client.platform = tmp_platform
        yield client
