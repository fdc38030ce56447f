from __future__ import annotations

import os
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

import pytest

from fdpq_lab.config import get_settings

LAB_ENV_VARS = (
    "LAB_OUTPUT_DIR",
    "LAB_TB_SIZE",
    "LAB_QP_LIST",
    "LAB_QUANTISERS",
    "LAB_DEADZONE",
    "LAB_WORKERS",
    "LAB_LOG_LEVEL",
)


def full_acceptance() -> bool:
    return os.getenv("LAB_ACCEPTANCE_SCALE", "").lower() == "full"


@pytest.fixture
def trials():
    """Trial count: the reduced value by default, the full count with LAB_ACCEPTANCE_SCALE=full."""

    def _pick(reduced: int, full: int) -> int:
        return full if full_acceptance() else reduced

    return _pick


@pytest.fixture(autouse=True)
def clean_lab_environment(monkeypatch):
    for variable in LAB_ENV_VARS:
        monkeypatch.delenv(variable, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
