import pytest

from model_export.export import serialize_trunk
from model_export.reference import build_reference


@pytest.fixture(scope="session")
def trunk():
    return build_reference("random", seed=0)


@pytest.fixture(scope="session")
def model_bytes(trunk):
    return serialize_trunk(trunk)
