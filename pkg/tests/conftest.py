import numpy as np
import pytest

from sparsespan.subspaces import TestVectorSpec

# Keep pytest from collecting the TestVectorSpec dataclass as a test class.
TestVectorSpec.__test__ = False


@pytest.fixture
def rng():
    """Test-local numpy generator with a fixed seed."""
    return np.random.default_rng(20240611)
