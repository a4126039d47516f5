import pytest

from ssekit.games import Game


@pytest.fixture
def g1():
    """Two-by-two fixture used throughout: matching-pennies follower."""
    return Game([[4, 1], [2, 3]], [[0, 1], [1, 0]])
