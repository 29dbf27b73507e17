import random

import pytest

from heckelab.localfield import FieldModel


@pytest.fixture
def rng():
    return random.Random(20260810)


def all_models():
    return [
        FieldModel.mixed(2, 1),
        FieldModel.mixed(2, 2),
        FieldModel.mixed(3, 2),
        FieldModel.mixed(2, 5),
        FieldModel.equal(2),
        FieldModel.equal(3),
        FieldModel.equal(2, 2),
    ]
