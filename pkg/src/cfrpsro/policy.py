"""Tabular policies over a game's information sets."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from cfrpsro.games.base import Game, GameError


class MissingInfosetError(GameError, KeyError):
  """A policy lacks a distribution at a required information set."""

  def __str__(self):
    return ValueError.__str__(self)


class TabularPolicy:
  """Map from information-state key to an action distribution.

  Probabilities live in one flat array indexed by the game tree's slots, so a
  policy can be handed to the traversal kernels without conversion.
  """

  def __init__(self, game: Game, probs: np.ndarray | None = None):
    self.game = game
    tree = game.tree
    if probs is None:
      counts = np.diff(tree.infoset_slot_start)
      probs = 1.0 / counts[tree.slot_infoset]
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (tree.num_slots,):
      raise ValueError(
          f"expected {tree.num_slots} slot probabilities, got {probs.shape}")
    self.probs = probs

  @classmethod
  def uniform(cls, game: Game) -> "TabularPolicy":
    return cls(game)

  @classmethod
  def from_dict(cls, game: Game, mapping: Mapping[str, Mapping[int, float]],
                players: Sequence[int] | None = None) -> "TabularPolicy":
    """Builds a policy from {info key: {action: prob}}.

    Information sets of players outside `players` (default: all players) are
    filled uniformly; missing keys for covered players raise
    `MissingInfosetError`. Actions absent from an inner mapping get 0.
    """
    policy = cls(game)
    tree = game.tree
    covered = range(game.num_players) if players is None else players
    for idx, key in enumerate(tree.infoset_keys):
      if tree.infoset_player[idx] not in covered:
        continue
      if key not in mapping:
        raise MissingInfosetError(f"policy has no entry for {key!r}")
      dist = mapping[key]
      policy.probs[tree.slots_of(idx)] = [
          dist.get(a, 0.0) for a in tree.legal_actions[idx]]
    return policy

  @classmethod
  def combine(cls, game: Game,
              per_player: Sequence["TabularPolicy"]) -> "TabularPolicy":
    """Joint policy taking player p's entries from `per_player[p]`."""
    if len(per_player) != game.num_players:
      raise ValueError(
          f"need one policy per player ({game.num_players}), "
          f"got {len(per_player)}")
    tree = game.tree
    owner = tree.infoset_player[tree.slot_infoset]
    stacked = np.stack([p.probs for p in per_player])
    return cls(game, stacked[owner, np.arange(tree.num_slots)])

  def copy(self) -> "TabularPolicy":
    return TabularPolicy(self.game, self.probs.copy())

  def action_probabilities(self, key: str) -> dict[int, float]:
    tree = self.game.tree
    try:
      idx = tree.key_to_index[key]
    except KeyError:
      raise MissingInfosetError(f"unknown information state {key!r}") from None
    return dict(zip(tree.legal_actions[idx],
                    self.probs[tree.slots_of(idx)].tolist()))

  __getitem__ = action_probabilities

  def to_dict(self, player: int | None = None) -> dict[str, dict[int, float]]:
    tree = self.game.tree
    return {
        key: self.action_probabilities(key)
        for idx, key in enumerate(tree.infoset_keys)
        if player is None or tree.infoset_player[idx] == player
    }

  def __eq__(self, other):
    if not isinstance(other, TabularPolicy):
      return NotImplemented
    return self.game is other.game and np.array_equal(self.probs, other.probs)

  def __repr__(self):
    return f"TabularPolicy({self.game.name}, {self.game.tree.num_infosets} infosets)"


def as_joint_policy(game: Game, profile) -> TabularPolicy:
  """Coerces a profile to one joint `TabularPolicy`.

  Accepts a `TabularPolicy`, a sequence with one policy per player, or a
  {key: {action: prob}} mapping covering every information set.
  """
  if isinstance(profile, TabularPolicy):
    return profile
  if isinstance(profile, Mapping):
    return TabularPolicy.from_dict(game, profile)
  parts = [p if isinstance(p, TabularPolicy) else
           TabularPolicy.from_dict(game, p, players=[i])
           for i, p in enumerate(profile)]
  return TabularPolicy.combine(game, parts)
