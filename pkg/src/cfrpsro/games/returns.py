"""Exact expected returns of a joint policy by full-tree recursion."""

from __future__ import annotations

import numpy as np

from cfrpsro import kernels
from cfrpsro.games.base import Game


def expected_returns(game: Game, joint_policy) -> np.ndarray:
  """Expected utility per player, weighting chance and policy probabilities.

  Args:
    game: the game.
    joint_policy: a joint `TabularPolicy`, one policy per player, or a
      {info key: {action: prob}} mapping. Missing information sets raise
      `MissingInfosetError`.
  """
  from cfrpsro.policy import as_joint_policy
  policy = as_joint_policy(game, joint_policy)
  return kernels.node_values(game.tree, policy.probs)[0].copy()
