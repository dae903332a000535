"""Extensive-form game contract shared by every game family."""

from __future__ import annotations

import dataclasses
import enum
import functools
from typing import Sequence

CHANCE = -1
TERMINAL = -2


class GameError(ValueError):
  """Base class for game-definition and game-play errors."""


class InvalidSpecError(GameError):
  pass


class IllegalActionError(GameError):
  pass


class NotTerminalError(GameError):
  pass


class Family(str, enum.Enum):
  KUHN = "kuhn"
  LEDUC = "leduc"
  GOOFSPIEL = "goofspiel"
  LIARS_DICE = "liars_dice"


@dataclasses.dataclass(frozen=True)
class GameSpec:
  """Parameterization of one of the four supported game families.

  `num_cards` only applies to goofspiel and `dice_sides` only to liar's dice;
  the other families ignore them.
  """
  family: Family
  num_players: int = 2
  num_cards: int = 4
  dice_sides: int = 5

  def __post_init__(self):
    try:
      object.__setattr__(self, "family", Family(self.family))
    except ValueError:
      raise InvalidSpecError(f"unknown game family {self.family!r}") from None

  def validate(self):
    fam = self.family
    if fam in (Family.KUHN, Family.LEDUC):
      if self.num_players < 2:
        raise InvalidSpecError(
            f"{fam.value} needs at least 2 players, got {self.num_players}")
    elif self.num_players != 2:
      raise InvalidSpecError(
          f"{fam.value} is a 2-player game, got {self.num_players} players")
    if fam is Family.GOOFSPIEL and self.num_cards < 3:
      raise InvalidSpecError(f"goofspiel needs >= 3 cards, got {self.num_cards}")
    if fam is Family.LIARS_DICE and self.dice_sides < 2:
      raise InvalidSpecError(
          f"liar's dice needs >= 2 sides, got {self.dice_sides}")

  @property
  def name(self) -> str:
    fam = self.family
    if fam is Family.GOOFSPIEL:
      return f"goofspiel({self.num_cards})"
    if fam is Family.LIARS_DICE:
      return f"liars_dice({self.dice_sides})"
    return f"{fam.value}({self.num_players})"


class GameState:
  """A history node. Subclasses are frozen dataclasses; `child` never mutates.

  Subclasses implement `current_player`, `legal_actions`, `chance_outcomes`,
  `_apply`, `_returns` and `information_state_key`.
  """

  game: "Game"

  def current_player(self) -> int:
    raise NotImplementedError

  def is_terminal(self) -> bool:
    return self.current_player() == TERMINAL

  def is_chance_node(self) -> bool:
    return self.current_player() == CHANCE

  def legal_actions(self) -> tuple[int, ...]:
    raise NotImplementedError

  def chance_outcomes(self) -> list[tuple[int, float]]:
    raise NotImplementedError

  def child(self, action: int) -> "GameState":
    if self.is_terminal():
      raise IllegalActionError("no actions are legal at a terminal state")
    if action not in self.legal_actions():
      raise IllegalActionError(
          f"action {action} not in legal actions {self.legal_actions()}")
    return self._apply(action)

  def returns(self) -> tuple[float, ...]:
    if not self.is_terminal():
      raise NotTerminalError("returns are only defined at terminal states")
    return self._returns()

  def information_state_key(self, player: int | None = None) -> str:
    raise NotImplementedError

  def _apply(self, action: int) -> "GameState":
    raise NotImplementedError

  def _returns(self) -> tuple[float, ...]:
    raise NotImplementedError


class Game:
  """Immutable game definition. The flattened tree is built lazily and cached."""

  spec: GameSpec

  @property
  def num_players(self) -> int:
    return self.spec.num_players

  @property
  def family(self) -> Family:
    return self.spec.family

  @property
  def name(self) -> str:
    return self.spec.name

  def new_initial_state(self) -> GameState:
    raise NotImplementedError

  def action_to_string(self, action: int) -> str:
    return str(action)

  @functools.cached_property
  def tree(self):
    from cfrpsro.games.tree import build_tree
    return build_tree(self)

  def __repr__(self):
    return f"{type(self).__name__}({self.name})"


def info_key(family: Family, player: int, private: str,
             public: Sequence[str]) -> str:
  return f"{family.value}|p{player}|{private}|{'/'.join(public)}"


def new_game(spec: GameSpec | None = None, **kwargs) -> Game:
  """Builds a game from a `GameSpec` or from `GameSpec` keyword fields."""
  from cfrpsro.games import goofspiel, kuhn, leduc, liars_dice
  if spec is None:
    spec = GameSpec(**kwargs)
  elif kwargs:
    spec = dataclasses.replace(spec, **kwargs)
  spec.validate()
  factory = {
      Family.KUHN: kuhn.KuhnGame,
      Family.LEDUC: leduc.LeducGame,
      Family.GOOFSPIEL: goofspiel.GoofspielGame,
      Family.LIARS_DICE: liars_dice.LiarsDiceGame,
  }[spec.family]
  return factory(spec)
