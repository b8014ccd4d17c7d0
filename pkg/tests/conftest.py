import sys

import pytest


@pytest.fixture
def contended():
    """Tighten the interpreter switch interval so threads interleave at
    bytecode granularity, producing real exchange failures and races."""
    prev = sys.getswitchinterval()
    sys.setswitchinterval(1e-5)
    try:
        yield
    finally:
        sys.setswitchinterval(prev)
