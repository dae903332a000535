"""Two-player Goofspiel with K cards.

Prizes are revealed in fixed descending order K..1, so there are no chance
nodes. Each round both players bid an unused card; the higher bid takes the
prize and tied bids discard it. The simultaneous bids are serialized as
player 0 then player 1, and player 1 does not observe the pending bid.
Utility is the sign of the point differential.

Action id k means "bid card k + 1".
"""

from __future__ import annotations

import dataclasses

from cfrpsro.games.base import TERMINAL, Family, Game, GameSpec, GameState, info_key


class GoofspielGame(Game):

  def __init__(self, spec: GameSpec):
    self.spec = spec
    self.num_cards = spec.num_cards

  def new_initial_state(self):
    return GoofspielState(self)

  def prize(self, round_index: int) -> int:
    return self.num_cards - round_index

  def action_to_string(self, action):
    return str(action + 1)


def _outcome(b0, b1):
  return "0" if b0 > b1 else "1" if b1 > b0 else "="


@dataclasses.dataclass(frozen=True)
class GoofspielState(GameState):
  game: GoofspielGame
  bids: tuple[tuple[int, ...], tuple[int, ...]] = ((), ())
  pending: int | None = None

  def current_player(self):
    if self.pending is not None:
      return 1
    if len(self.bids[0]) == self.game.num_cards:
      return TERMINAL
    return 0

  def legal_actions(self):
    player = self.current_player()
    if player == TERMINAL:
      return ()
    used = set(self.bids[player])
    return tuple(a for a in range(self.game.num_cards) if a not in used)

  def chance_outcomes(self):
    return []

  def _apply(self, action):
    if self.pending is None:
      return dataclasses.replace(self, pending=action)
    return dataclasses.replace(
        self, pending=None,
        bids=(self.bids[0] + (self.pending,), self.bids[1] + (action,)))

  def points(self):
    totals = [0, 0]
    for r, (b0, b1) in enumerate(zip(*self.bids)):
      if b0 != b1:
        totals[0 if b0 > b1 else 1] += self.game.prize(r)
    return tuple(totals)

  def _returns(self):
    p0, p1 = self.points()
    sign = (p0 > p1) - (p0 < p1)
    return (float(sign), float(-sign))

  def information_state_key(self, player=None):
    if player is None:
      player = self.current_player()
    own = ",".join(str(b + 1) for b in self.bids[player])
    outcomes = [_outcome(b0, b1) for b0, b1 in zip(*self.bids)]
    return info_key(Family.GOOFSPIEL, player, own, outcomes)
