import random
from pathlib import Path

import pytest

from authenc.primitives import BlockCipher

DATA = Path(__file__).parent / "data"

# criterion lines collected by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


class IdentityCipher(BlockCipher):
    """Test fixture: every block maps to itself."""

    name = "identity"

    def __init__(self, block_bits=128):
        self.block_bits = block_bits

    def encrypt_block(self, x):
        return x

    def decrypt_block(self, x):
        return x


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def vector_file():
    return DATA / "sp800_38c_examples.txt"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
