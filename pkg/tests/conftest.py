import json
from pathlib import Path

import pytest

from instructpipe.gateway import Cassette, Gateway

FIXTURES = Path(__file__).parent / "fixtures"
REPO = Path(__file__).resolve().parents[1]


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def repo_root() -> Path:
    return REPO


def make_gateway(responder, tmp_path=None, cassette_name="cassette.jsonl"):
    """Gateway backed by a callable transport; optional cassette in tmp_path."""
    cassette = Cassette(tmp_path / cassette_name) if tmp_path is not None else None
    return Gateway(cassette=cassette, transport=responder, sleep=lambda _: None)


def load_fixture(relpath: str) -> str:
    return (FIXTURES / relpath).read_text(encoding="utf-8")


def load_json_fixture(relpath: str):
    return json.loads(load_fixture(relpath))
