import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
DATA_DIR = TESTS_DIR / "data"

# Make sibling test helpers (util, genmod, corpus) importable regardless of cwd.
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from cppl.ir import parse_design  # noqa: E402


@pytest.fixture(scope="session")
def alu_text() -> str:
    return (DATA_DIR / "alu.json").read_text()


@pytest.fixture(scope="session")
def alu_design(alu_text):
    return parse_design(alu_text)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR
