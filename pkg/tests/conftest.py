import sys
from pathlib import Path

import gmpy2
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cvxremez.precision import set_precision


@pytest.fixture(autouse=True)
def working_precision_256():
    old = gmpy2.get_context().precision
    set_precision(256)
    yield
    gmpy2.get_context().precision = old
