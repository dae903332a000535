"""Exact best responses and exploitability over full game trees."""

from __future__ import annotations

import dataclasses

import numpy as np

from cfrpsro import kernels
from cfrpsro.games import Game, expected_returns
from cfrpsro.policy import TabularPolicy, as_joint_policy


@dataclasses.dataclass(frozen=True)
class BestResponseResult:
  """Best response of `player` against the rest of a profile.

  `policy` holds the best response at `player`'s information sets and the
  responded-to profile everywhere else. At every information set it is
  uniform over the actions whose value is within the tie tolerance of the
  maximum.
  """
  player: int
  value: float
  policy: TabularPolicy


def best_response(game: Game, profile, player: int) -> BestResponseResult:
  if not 0 <= player < game.num_players:
    raise ValueError(f"player {player} out of range for {game.name}")
  joint = as_joint_policy(game, profile)
  value, probs = kernels.best_response(game.tree, joint.probs, player)
  return BestResponseResult(player, value, TabularPolicy(game, probs))


def player_incentives(game: Game, profile) -> np.ndarray:
  """Per-player gain from deviating to a best response."""
  joint = as_joint_policy(game, profile)
  on_policy = expected_returns(game, joint)
  return np.array([
      best_response(game, joint, p).value - on_policy[p]
      for p in range(game.num_players)
  ])


def exploitability(game: Game, profile) -> float:
  """Average best-response gain over players; 0 exactly at a Nash equilibrium.

  Round-off can push the raw average a hair below zero, so it is reported
  clamped at 0.
  """
  return max(0.0, float(np.mean(player_incentives(game, profile))))
