"""N-player Kuhn poker.

Deck of N+1 ranked cards, ante 1, one private card each, one betting round
with bet size 1. Action 0 is pass (check or fold), action 1 is bet (bet or
call).
"""

from __future__ import annotations

import dataclasses

from cfrpsro.games.base import (CHANCE, TERMINAL, Family, Game, GameSpec,
                                GameState, info_key)

PASS, BET = 0, 1
_TOKENS = ("p", "b")


class KuhnGame(Game):

  def __init__(self, spec: GameSpec):
    self.spec = spec
    self.deck_size = spec.num_players + 1

  def new_initial_state(self):
    return KuhnState(self)

  def action_to_string(self, action):
    return _TOKENS[action]


@dataclasses.dataclass(frozen=True)
class KuhnState(GameState):
  game: KuhnGame
  cards: tuple[int, ...] = ()
  bets: tuple[int, ...] = ()

  def _first_bet(self):
    try:
      return self.bets.index(BET)
    except ValueError:
      return None

  def current_player(self):
    n = self.game.num_players
    if len(self.cards) < n:
      return CHANCE
    first = self._first_bet()
    done = len(self.bets) == n if first is None else len(self.bets) == first + n
    if done:
      return TERMINAL
    return len(self.bets) % n

  def legal_actions(self):
    player = self.current_player()
    if player == TERMINAL:
      return ()
    if player == CHANCE:
      return tuple(c for c in range(self.game.deck_size) if c not in self.cards)
    return (PASS, BET)

  def chance_outcomes(self):
    remaining = self.legal_actions()
    return [(c, 1.0 / len(remaining)) for c in remaining]

  def _apply(self, action):
    if self.is_chance_node():
      return dataclasses.replace(self, cards=self.cards + (action,))
    return dataclasses.replace(self, bets=self.bets + (action,))

  def _returns(self):
    n = self.game.num_players
    first = self._first_bet()
    if first is None:
      contenders = list(range(n))
    else:
      contenders = [first] + [
          i % n for i in range(first + 1, first + n) if self.bets[i] == BET]
    paid = [1 + (p in contenders and first is not None) for p in range(n)]
    winner = max(contenders, key=lambda p: self.cards[p])
    pot = sum(paid)
    return tuple(
        float(pot - paid[p]) if p == winner else float(-paid[p])
        for p in range(n))

  def information_state_key(self, player=None):
    if player is None:
      player = self.current_player()
    return info_key(Family.KUHN, player, str(self.cards[player]),
                    [_TOKENS[b] for b in self.bets])
