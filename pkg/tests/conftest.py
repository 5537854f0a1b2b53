from collections import Counter

import pytest

from assocmdl import HeadKey, HeadSlice, parse_taxonomy
from assocmdl.tcm import find_mdl

ANIMALS = "(ANIMAL (BIRD swallow crow robin) (INSECT bee bug))"
BIRDS = "(BIRD swallow crow robin)"

MARGINAL = {"swallow": 42, "crow": 66, "robin": 9}
FLY = {"swallow": 4, "crow": 7, "robin": 1}


@pytest.fixture
def animals():
    return parse_taxonomy(ANIMALS)


@pytest.fixture
def birds():
    return parse_taxonomy(BIRDS)


@pytest.fixture
def bird_marginal(birds):
    return find_mdl(birds, Counter(MARGINAL))


@pytest.fixture
def fly_slice():
    return HeadSlice(HeadKey("fly", "subj"), Counter(FLY))


def node(t, label):
    return t.labels.index(label)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
