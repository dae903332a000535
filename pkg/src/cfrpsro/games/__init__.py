"""The four parameterized game families and the flattened game tree."""

from cfrpsro.games.base import (CHANCE, TERMINAL, Family, Game, GameError,
                                GameSpec, GameState, IllegalActionError,
                                InvalidSpecError, NotTerminalError, new_game)
from cfrpsro.games.tree import GameTree, build_tree
from cfrpsro.games.returns import expected_returns

__all__ = [
    "CHANCE", "TERMINAL", "Family", "Game", "GameError", "GameSpec",
    "GameState", "GameTree", "IllegalActionError", "InvalidSpecError",
    "NotTerminalError", "build_tree", "expected_returns", "new_game",
]
