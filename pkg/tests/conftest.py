# SPDX-FileCopyrightText: 2024-present lachiewalker <lachiewalker1@hotmail.com>
#
# SPDX-License-Identifier: MIT
import numpy as np
import pytest

from quakebend.covering import reference_structure
from quakebend.surface_group import parse_word
from quakebend.verify import bent_fixture


def word(text: str):
    return parse_word(text, 2)


@pytest.fixture(scope="session")
def ref():
    return reference_structure(2)


@pytest.fixture(scope="session")
def fuchsian(ref):
    return ref.fuchsian


@pytest.fixture(scope="session")
def bent3(ref):
    return bent_fixture(3, 0.2, seed=7, ref=ref)


@pytest.fixture(scope="session")
def bent4(ref):
    return bent_fixture(4, 0.2, seed=11, ref=ref)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
