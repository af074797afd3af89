# src/galgeo/testfile/conftest.py
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pytest

from src.galgeo.cli.loader import load_corpus
from src.galgeo.geometry.connection import GalileanConnection, build_connection
from src.galgeo.schema import SystemFile
from src.galgeo.symbolic.expr import ChartPoint
from src.galgeo.utils.sampling import sample_points

ROOT = Path(__file__).resolve().parents[3]
SYSTEMS_DIR = ROOT / "data" / "systems"


@pytest.fixture(scope="session")
def corpus() -> List[Tuple[str, SystemFile]]:
    return [(path.stem, document) for path, document in load_corpus(SYSTEMS_DIR)]


@pytest.fixture(scope="session")
def corpus_by_name(corpus):
    return dict(corpus)


@pytest.fixture(scope="session")
def normalized_corpus(corpus) -> List[Tuple[str, SystemFile]]:
    return [(name, doc) for name, doc in corpus if not doc.normalization.is_zero]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


def connection_for(document: SystemFile) -> GalileanConnection:
    return build_connection(document.system, document.normalization)


def points_for(conn: GalileanConnection, count: int, seed: int = 0) -> List[ChartPoint]:
    return sample_points(conn.coefficient_expressions(), conn.n, count, seed)


def system_path(name: str) -> str:
    return str(SYSTEMS_DIR / f"{name}.json")
