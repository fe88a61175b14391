import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fakefinder.config import AppConfig
from fakefinder.gateway import Services, build_services

from stubs import StubAdapterServer

TEST_HASH_ITERATIONS = 1000  # fast hashes for tests; production default is 600k


def make_config(tmp_path: Path, **overrides) -> AppConfig:
    base = dict(
        store_url=f"sqlite:///{tmp_path}/store.db",
        blob_root=str(tmp_path / "blobs"),
        token_key="unit-test-signing-key",
        admin_email="admin@example.org",
        password_hash_iterations=TEST_HASH_ITERATIONS,
        adapter_timeout_s=2.0,
    )
    base.update(overrides)
    return AppConfig(**base)


@pytest.fixture
def config(tmp_path) -> AppConfig:
    return make_config(tmp_path)


@pytest.fixture
def services(config) -> Services:
    svc = build_services(config)
    yield svc
    svc.db.close()


@pytest.fixture
def stub() -> StubAdapterServer:
    server = StubAdapterServer()
    yield server
    server.close()


def register_user(svc: Services, email="user@example.org", region="US", name="Test User"):
    return svc.accounts.register(
        name=name,
        email=email,
        position="researcher",
        region=region,
        password="hunter2abc1",
        password_confirm="hunter2abc1",
    )


@pytest.fixture
def user(services):
    return register_user(services)
