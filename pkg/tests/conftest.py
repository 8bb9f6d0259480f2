"""Shared fixtures: project root on sys.path, bundled models, a scratch database."""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config  # noqa: E402
from fixtures import fixture_path, load_fixture  # noqa: E402
from net import Place, PlaceClass, make_net  # noqa: E402


@pytest.fixture(scope="session")
def e1_doc():
    return load_fixture("e1")


@pytest.fixture(scope="session")
def e2_doc():
    return load_fixture("e2")


@pytest.fixture(scope="session")
def e1_mcn(e1_doc):
    return e1_doc.to_mcn()


@pytest.fixture(scope="session")
def e2_mcn(e2_doc):
    return e2_doc.to_mcn()


@pytest.fixture
def model_path():
    return lambda name: str(fixture_path(name))


@pytest.fixture
def tmp_db(tmp_path, monkeypatch):
    path = tmp_path / "runs.db"
    monkeypatch.setattr(config, "DATABASE_PATH", str(path))
    return path


@pytest.fixture
def send_receive_net():
    """
    A sender that reads its target from Go and writes through virtual
    place S: Go<S> --send--> S<m>, then a receiver on the fixed place Box.
    """
    return make_net(
        places=[
            Place("Go", 1, PlaceClass.INITIAL_FINAL),
            Place("Box", 1, PlaceClass.INTERFACE),
            Place("Done", 1, PlaceClass.INITIAL_FINAL),
        ],
        transitions=["send", "recv"],
        arcs=[
            ("Go", "send", [("S",)]),
            ("send", "S", [("m",)]),
            ("Box", "recv", [("m",)]),
            ("recv", "Done", [("eps",)]),
        ],
        variables=["S"],
        constants=["Box", "m"],
        m0={"Go": [("Box",)]},
    )
