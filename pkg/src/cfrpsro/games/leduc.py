"""N-player Leduc poker.

Deck of 2 suits x (N+1) ranks, card id c has rank c // 2. Ante 1, two
betting rounds (raise size 2 then 4, at most 2 raises per round) separated
by one public card. Pairing the public card beats any non-pair, otherwise
high rank wins; exact ties split the pot.
"""

from __future__ import annotations

import dataclasses

from cfrpsro.games.base import (CHANCE, TERMINAL, Family, Game, GameSpec,
                                GameState, info_key)

FOLD, CALL, RAISE = 0, 1, 2
_TOKENS = ("f", "c", "r")
MAX_RAISES = 2
RAISE_SIZES = (2, 4)
NUM_SUITS = 2


class LeducGame(Game):

  def __init__(self, spec: GameSpec):
    self.spec = spec
    self.deck_size = NUM_SUITS * (spec.num_players + 1)

  def new_initial_state(self):
    n = self.num_players
    return LeducState(self, folded=(False,) * n, paid=(1,) * n, to_act=n)

  def action_to_string(self, action):
    return _TOKENS[action]


@dataclasses.dataclass(frozen=True)
class LeducState(GameState):
  game: LeducGame
  folded: tuple[bool, ...]
  paid: tuple[int, ...]
  to_act: int
  cards: tuple[int, ...] = ()
  public_card: int | None = None
  round: int = 0
  stake: int = 1
  raises: int = 0
  player: int = 0
  # Public history tokens: betting actions and the public card reveal.
  public: tuple[str, ...] = ()
  finished: bool = False

  def current_player(self):
    if self.finished:
      return TERMINAL
    if len(self.cards) < self.game.num_players:
      return CHANCE
    if self.round == 1 and self.public_card is None:
      return CHANCE
    return self.player

  def legal_actions(self):
    player = self.current_player()
    if player == TERMINAL:
      return ()
    if player == CHANCE:
      used = set(self.cards)
      return tuple(c for c in range(self.game.deck_size) if c not in used)
    actions = []
    if self.paid[player] < self.stake:
      actions.append(FOLD)
    actions.append(CALL)
    if self.raises < MAX_RAISES:
      actions.append(RAISE)
    return tuple(actions)

  def chance_outcomes(self):
    outcomes = self.legal_actions()
    return [(c, 1.0 / len(outcomes)) for c in outcomes]

  def _next_seat(self, seat, folded):
    n = self.game.num_players
    for k in range(1, n + 1):
      s = (seat + k) % n
      if not folded[s]:
        return s
    raise AssertionError("no active seat")

  def _apply(self, action):
    if self.is_chance_node():
      if len(self.cards) < self.game.num_players:
        return dataclasses.replace(self, cards=self.cards + (action,))
      first = self._next_seat(self.game.num_players - 1, self.folded)
      return dataclasses.replace(
          self, public_card=action, player=first,
          public=self.public + (f"d{action}",))

    p = self.player
    folded, paid = list(self.folded), list(self.paid)
    stake, raises, to_act = self.stake, self.raises, self.to_act
    if action == FOLD:
      folded[p] = True
      to_act -= 1
    elif action == CALL:
      paid[p] = stake
      to_act -= 1
    else:
      stake += RAISE_SIZES[self.round]
      paid[p] = stake
      raises += 1
      to_act = sum(not f for f in folded) - 1
    public = self.public + (_TOKENS[action],)
    folded, paid = tuple(folded), tuple(paid)
    common = dict(folded=folded, paid=paid, stake=stake, public=public)
    if sum(not f for f in folded) == 1:
      return dataclasses.replace(self, finished=True, to_act=0, raises=raises,
                                 **common)
    if to_act > 0:
      return dataclasses.replace(self, to_act=to_act, raises=raises,
                                 player=self._next_seat(p, folded), **common)
    if self.round == 1:
      return dataclasses.replace(self, finished=True, to_act=0, raises=raises,
                                 **common)
    return dataclasses.replace(
        self, round=1, raises=0, to_act=sum(not f for f in folded), **common)

  def _hand_strength(self, player):
    rank = self.cards[player] // NUM_SUITS
    paired = rank == self.public_card // NUM_SUITS
    return (paired, rank)

  def _returns(self):
    n = self.game.num_players
    active = [p for p in range(n) if not self.folded[p]]
    if len(active) == 1:
      winners = active
    else:
      best = max(self._hand_strength(p) for p in active)
      winners = [p for p in active if self._hand_strength(p) == best]
    share = sum(self.paid) / len(winners)
    return tuple(
        (share if p in winners else 0.0) - self.paid[p] for p in range(n))

  def information_state_key(self, player=None):
    if player is None:
      player = self.current_player()
    return info_key(Family.LEDUC, player, str(self.cards[player]), self.public)
