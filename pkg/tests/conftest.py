from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
FIXTURE_CSV = DATA_DIR / "fixture_cytology.csv"
EXAMPLE_SAMPLE_CSV = DATA_DIR / "example_sample.csv"
WBCD_CSV = DATA_DIR / "wbcd.csv"


@pytest.fixture(scope="session")
def fixture_csv() -> Path:
    return FIXTURE_CSV


@pytest.fixture(scope="session")
def example_sample_csv() -> Path:
    return EXAMPLE_SAMPLE_CSV


def wbcd_available() -> bool:
    return WBCD_CSV.exists()
