"""Independent reference computations used by the tests.

Everything here walks `GameState` objects recursively and works on plain
{info key: {action: prob}} dictionaries; none of it touches the flattened
tree or the traversal kernels.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import optimize


def terminal_paths(game):
  """Lists (chance prob, decisions, returns) for every terminal history.

  `decisions` is a tuple of (player, info key, action) in play order.
  """
  out = []

  def walk(state, chance, decisions):
    if state.is_terminal():
      out.append((chance, decisions, np.array(state.returns())))
      return
    if state.is_chance_node():
      for action, prob in state.chance_outcomes():
        walk(state.child(action), chance * prob, decisions)
      return
    player = state.current_player()
    key = state.information_state_key(player)
    for action in state.legal_actions():
      walk(state.child(action), chance, decisions + ((player, key, action),))

  walk(game.new_initial_state(), 1.0, ())
  return out


def infoset_actions(game):
  """{key: (player, legal actions)} by recursive traversal."""
  found = {}

  def walk(state):
    if state.is_terminal():
      return
    if not state.is_chance_node():
      p = state.current_player()
      found[state.information_state_key(p)] = (p, tuple(state.legal_actions()))
    for action in state.legal_actions():
      walk(state.child(action))

  walk(game.new_initial_state())
  return found


def expected_returns(game, profile):
  """Sum over terminal paths of chance x policy probabilities x returns."""
  total = np.zeros(game.num_players)
  for chance, decisions, returns in terminal_paths(game):
    prob = chance
    for _, key, action in decisions:
      prob *= profile[key][action]
    total += prob * returns
  return total


def random_profile(game, rng):
  return {key: dict(zip(actions, rng.dirichlet(np.ones(len(actions)))))
          for key, (_, actions) in infoset_actions(game).items()}


class PureStrategyOracle:
  """Values of every pure strategy of one player against fixed opponents.

  The responder's pure strategies are enumerated explicitly; a terminal
  history counts toward a strategy iff the strategy picks every responder
  action on the path.
  """

  def __init__(self, game, player):
    self.game = game
    self.player = player
    sets = infoset_actions(game)
    self.keys = sorted(k for k, (p, _) in sets.items() if p == player)
    column = {k: i for i, k in enumerate(self.keys)}
    self.strategies = np.array(
        list(itertools.product(*(sets[k][1] for k in self.keys))), dtype=np.int8)
    self.paths = terminal_paths(game)
    consistent = np.ones((len(self.paths), len(self.strategies)), dtype=bool)
    for z, (_, decisions, _) in enumerate(self.paths):
      for p, key, action in decisions:
        if p == player:
          consistent[z] &= self.strategies[:, column[key]] == action
    self.consistent = consistent.astype(np.float64)

  def values(self, profile):
    weights = np.empty(len(self.paths))
    for z, (chance, decisions, returns) in enumerate(self.paths):
      prob = chance
      for p, key, action in decisions:
        if p != self.player:
          prob *= profile[key][action]
      weights[z] = prob * returns[self.player]
    return weights @ self.consistent

  def best_value(self, profile):
    return float(self.values(profile).max())

  def as_policy(self, index):
    return {k: {a: float(a == self.strategies[index, i])
                for a in infoset_actions(self.game)[k][1]}
            for i, k in enumerate(self.keys)}


def counterfactual_values(game, profile, target_key):
  """v(I, a) summed over the histories of information set `target_key`."""
  values = {}

  def value(state):
    if state.is_terminal():
      return np.array(state.returns())
    if state.is_chance_node():
      return sum(p * value(state.child(a)) for a, p in state.chance_outcomes())
    key = state.information_state_key()
    return sum(profile[key][a] * value(state.child(a))
               for a in state.legal_actions())

  def walk(state, others):
    if state.is_terminal():
      return
    if state.is_chance_node():
      for a, p in state.chance_outcomes():
        walk(state.child(a), others * p)
      return
    player = state.current_player()
    key = state.information_state_key(player)
    if key == target_key:
      for a in state.legal_actions():
        values[a] = values.get(a, 0.0) + others * value(state.child(a))[player]
    for a in state.legal_actions():
      scale = 1.0 if player == _owner(target_key) else profile[key][a]
      walk(state.child(a), others * scale)

  walk(game.new_initial_state(), 1.0)
  return values


def _owner(key):
  return int(key.split("|")[1][1:])


def zero_sum_matrix_value(matrix):
  """Row player's max-min value of a payoff matrix, by linear programming."""
  n, m = matrix.shape
  c = np.r_[np.zeros(n), -1.0]
  res = optimize.linprog(
      c, A_ub=np.hstack([-matrix.T, np.ones((m, 1))]), b_ub=np.zeros(m),
      A_eq=np.r_[np.ones(n), 0.0][None], b_eq=[1.0],
      bounds=[(0, None)] * n + [(None, None)], method="highs")
  assert res.success
  return -res.fun


def regret_matching_average(row, col, iterations):
  """Plain-list simultaneous regret matching on a bimatrix game."""
  n, m = len(row), len(row[0])

  def match(regrets):
    pos = [max(r, 0.0) for r in regrets]
    s = sum(pos)
    return [p / s for p in pos] if s > 1e-12 else [1.0 / len(pos)] * len(pos)

  rx, ry = [0.0] * n, [0.0] * m
  tx, ty = [0.0] * n, [0.0] * m
  x, y = [1.0 / n] * n, [1.0 / m] * m
  for _ in range(iterations):
    ux = [sum(row[i][j] * y[j] for j in range(m)) for i in range(n)]
    uy = [sum(col[i][j] * x[i] for i in range(n)) for j in range(m)]
    vx = sum(a * b for a, b in zip(x, ux))
    vy = sum(a * b for a, b in zip(y, uy))
    rx = [r + u - vx for r, u in zip(rx, ux)]
    ry = [r + u - vy for r, u in zip(ry, uy)]
    tx = [t + p for t, p in zip(tx, x)]
    ty = [t + p for t, p in zip(ty, y)]
    x, y = match(rx), match(ry)
  return [t / sum(tx) for t in tx], [t / sum(ty) for t in ty]
