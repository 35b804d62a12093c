import os
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"
CORPUS = DATA / "corpus"


@pytest.fixture(scope="session", autouse=True)
def _profile_cache(tmp_path_factory):
    # keep Monte Carlo profiles out of the user's cache; shared by the whole session
    old = os.environ.get("CURVELET_CACHE_DIR")
    os.environ["CURVELET_CACHE_DIR"] = str(tmp_path_factory.mktemp("profiles"))
    yield
    if old is None:
        os.environ.pop("CURVELET_CACHE_DIR", None)
    else:
        os.environ["CURVELET_CACHE_DIR"] = old


@pytest.fixture(scope="session")
def lena():
    from ppcdenoise.image import load_image

    return load_image(DATA / "lena.png")


@pytest.fixture(scope="session")
def corpus():
    from ppcdenoise.experiments import load_corpus

    return load_corpus(CORPUS)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
