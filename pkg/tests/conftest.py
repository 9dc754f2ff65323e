import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the numba kernels once so timed tests never measure JIT."""
    from groundcite.window import warmup

    warmup()
