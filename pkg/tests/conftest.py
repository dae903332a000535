import functools
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cfrpsro.games import new_game  # noqa: E402


@functools.lru_cache(maxsize=None)
def cached_game(family, players=2, cards=4, dice_sides=5):
  return new_game(family=family, num_players=players, num_cards=cards,
                  dice_sides=dice_sides)


@pytest.fixture(scope="session")
def kuhn2():
  return cached_game("kuhn")


@pytest.fixture(scope="session")
def kuhn3():
  return cached_game("kuhn", 3)


@pytest.fixture(scope="session")
def leduc2():
  return cached_game("leduc")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
  if ACCEPTANCE_LINES:
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
      terminalreporter.write_line(line[1])
