"""Two-player Liar's Dice with one d-sided die each.

Bids (quantity, face) with quantity in {1, 2} are ordered by quantity then
face and encoded as id (quantity - 1) * d + (face - 1); the "Liar" call is
id 2d. The highest face is wild and counts toward any face.
"""

from __future__ import annotations

import dataclasses

from cfrpsro.games.base import (CHANCE, TERMINAL, Family, Game, GameSpec,
                                GameState, info_key)

NUM_DICE = 2


class LiarsDiceGame(Game):

  def __init__(self, spec: GameSpec):
    self.spec = spec
    self.sides = spec.dice_sides
    self.num_bids = NUM_DICE * self.sides
    self.liar = self.num_bids

  def new_initial_state(self):
    return LiarsDiceState(self)

  def decode_bid(self, action: int) -> tuple[int, int]:
    return action // self.sides + 1, action % self.sides + 1

  def action_to_string(self, action):
    if action == self.liar:
      return "liar"
    q, f = self.decode_bid(action)
    return f"{q}-{f}"


@dataclasses.dataclass(frozen=True)
class LiarsDiceState(GameState):
  game: LiarsDiceGame
  dice: tuple[int, ...] = ()
  actions: tuple[int, ...] = ()

  def current_player(self):
    if len(self.dice) < NUM_DICE:
      return CHANCE
    if self.actions and self.actions[-1] == self.game.liar:
      return TERMINAL
    return len(self.actions) % 2

  def legal_actions(self):
    player = self.current_player()
    if player == TERMINAL:
      return ()
    if player == CHANCE:
      return tuple(range(1, self.game.sides + 1))
    start = self.actions[-1] + 1 if self.actions else 0
    bids = tuple(range(start, self.game.num_bids))
    return bids + (self.game.liar,) if self.actions else bids

  def chance_outcomes(self):
    return [(f, 1.0 / self.game.sides) for f in range(1, self.game.sides + 1)]

  def _apply(self, action):
    if self.is_chance_node():
      return dataclasses.replace(self, dice=self.dice + (action,))
    return dataclasses.replace(self, actions=self.actions + (action,))

  def _returns(self):
    game = self.game
    last_bid = self.actions[-2]
    bidder = (len(self.actions) - 2) % 2
    quantity, face = game.decode_bid(last_bid)
    count = sum(d == face or d == game.sides for d in self.dice)
    bidder_wins = count >= quantity
    out = [0.0, 0.0]
    out[bidder] = 1.0 if bidder_wins else -1.0
    out[1 - bidder] = -out[bidder]
    return tuple(out)

  def information_state_key(self, player=None):
    if player is None:
      player = self.current_player()
    return info_key(Family.LIARS_DICE, player, str(self.dice[player]),
                    [self.game.action_to_string(a) for a in self.actions])
