"""Shared fixtures: the bundled Zeek log and its fitted schema."""

from pathlib import Path

import pytest

from src.features.schema import FeatureConfig, fit_schema
from src.flows.zeek import parse_zeek_file
from tests.helpers import ZEEK_FIXTURE


@pytest.fixture
def zeek_path() -> Path:
    return ZEEK_FIXTURE


@pytest.fixture
def fixture_records():
    return parse_zeek_file(ZEEK_FIXTURE).records


@pytest.fixture
def fixture_schema(fixture_records):
    return fit_schema(fixture_records, FeatureConfig(window=4, stride=1))
