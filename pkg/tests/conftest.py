import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gml.pairs import PartialPair


@pytest.fixture
def p1():
    """One atom, the single coded triple ({0},0) -> 0."""
    return PartialPair({0}, {(frozenset({0}), 0): 0})


@pytest.fixture
def free1():
    """One atom, empty coding."""
    return PartialPair({0})


@pytest.fixture
def free2():
    return PartialPair({0, 1})


@pytest.fixture
def pair_file(tmp_path):
    def write(pair: PartialPair, name: str = "pair.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(pair.to_json()))
        return str(path)

    return write
