"""Pure-numpy tree kernels, used when the compiled extension is unavailable.

Every pass works one depth level at a time over the flattened tree, so the
Python-level loop runs once per level rather than once per history.
Accumulations (`np.bincount`, `np.add.reduceat`) consume edges in pre-order,
the same order the compiled kernels use.
"""

from __future__ import annotations

import numpy as np

from cfrpsro.games.tree import KIND_CHANCE, KIND_DECISION, GameTree

TIE_TOLERANCE = 1e-9


def _edge_weights(tree: GameTree, probs: np.ndarray) -> np.ndarray:
  decision = tree.edge_slot >= 0
  w = tree.edge_prob.copy()
  w[decision] = probs[tree.edge_slot[decision]]
  return w


def _acting_column(tree: GameTree) -> np.ndarray:
  return np.where(tree.node_kind == KIND_CHANCE, tree.num_players,
                  tree.node_player)


def reach_probabilities(tree: GameTree, probs: np.ndarray) -> np.ndarray:
  """Per-node reach split into per-player contributions plus chance (last)."""
  reach = np.ones((tree.num_nodes, tree.num_players + 1))
  w = _edge_weights(tree, probs)
  col = _acting_column(tree)
  for edges in tree.edge_levels:
    if not len(edges):
      continue
    parent = tree.edge_parent[edges]
    r = reach[parent]
    r[np.arange(len(edges)), col[parent]] *= w[edges]
    reach[tree.edge_child[edges]] = r
  return reach


def _segments(tree, edges):
  parent = tree.edge_parent[edges]
  starts = np.flatnonzero(np.r_[True, parent[1:] != parent[:-1]])
  return parent[starts], starts


def node_values(tree: GameTree, probs: np.ndarray) -> np.ndarray:
  """Expected utility of every node for every player under `probs`."""
  values = tree.utilities.copy()
  w = _edge_weights(tree, probs)
  for edges in reversed(tree.edge_levels):
    if not len(edges):
      continue
    nodes, starts = _segments(tree, edges)
    contrib = w[edges, None] * values[tree.edge_child[edges]]
    values[nodes] = np.add.reduceat(contrib, starts, axis=0)
  return values


def _counterfactual_reach(reach: np.ndarray, player: np.ndarray) -> np.ndarray:
  """Product of all reach columns except each row's `player` column."""
  masked = reach.copy()
  rows = np.flatnonzero(player >= 0)
  masked[rows, player[rows]] = 1.0
  return masked.prod(axis=1)


def cfr_regrets(tree: GameTree, probs: np.ndarray, update: np.ndarray):
  """Instantaneous counterfactual regrets for the players flagged in `update`.

  Returns:
    (regrets per slot, summed counterfactual reach per information set, the
    acting player's own reach per information set). Entries for players not
    being updated are zero.
  """
  reach = reach_probabilities(tree, probs)
  values = node_values(tree, probs)
  update = np.asarray(update, dtype=bool)
  is_dec = tree.node_kind == KIND_DECISION
  nodes = np.flatnonzero(is_dec & update[np.where(is_dec, tree.node_player, 0)])
  player = tree.node_player[nodes]
  cf = _counterfactual_reach(reach[nodes], player)

  selected = np.zeros(tree.num_nodes, dtype=bool)
  selected[nodes] = True
  edges = np.flatnonzero(selected[tree.edge_parent])
  parent = tree.edge_parent[edges]
  edge_player = tree.node_player[parent]
  delta = (values[tree.edge_child[edges], edge_player]
           - values[parent, edge_player])
  cf_node = np.zeros(tree.num_nodes)
  cf_node[nodes] = cf
  regrets = np.bincount(tree.edge_slot[edges], weights=cf_node[parent] * delta,
                        minlength=tree.num_slots)
  infosets = tree.node_infoset[nodes]
  cf_reach = np.bincount(infosets, weights=cf, minlength=tree.num_infosets)
  own_reach = np.zeros(tree.num_infosets)
  own_reach[infosets] = reach[nodes, player]
  return regrets, cf_reach, own_reach


def best_response(tree: GameTree, probs: np.ndarray, player: int):
  """Exact best response of `player` to the other entries of `probs`.

  Information sets are resolved one depth level at a time, deepest first;
  every action whose counterfactual value is within `TIE_TOLERANCE` of the
  best gets an equal share.

  Returns:
    (best-response value at the root, slot probabilities with `player`'s
    entries replaced by the best response).
  """
  reach = reach_probabilities(tree, probs)
  cols = np.ones(tree.num_players + 1, dtype=bool)
  cols[player] = False
  cf = reach[:, cols].prod(axis=1)
  br = probs.copy()
  q = np.zeros(tree.num_slots)
  v = tree.utilities[:, player].copy()
  w = _edge_weights(tree, probs)
  mine = tree.infoset_player[tree.slot_infoset] == player
  levels = tree.edge_levels
  max_depth = len(levels) - 1
  for depth in range(max_depth, -1, -1):
    edges = levels[depth]
    if not len(edges):
      continue
    slot = tree.edge_slot[edges]
    own = slot >= 0
    own[own] = mine[slot[own]]
    child_v = v[tree.edge_child[edges]]
    np.add.at(q, slot[own], cf[tree.edge_parent[edges[own]]] * child_v[own])

    lvl = tree.num_levels - 1 - depth
    infosets = tree.level_infosets[
        tree.level_infoset_start[lvl]:tree.level_infoset_start[lvl + 1]]
    infosets = np.sort(infosets[tree.infoset_player[infosets] == player])
    if len(infosets):
      counts = np.diff(tree.infoset_slot_start)[infosets]
      idx = np.flatnonzero(np.isin(tree.slot_infoset, infosets))
      seg = np.r_[0, np.cumsum(counts)[:-1]]
      best = np.maximum.reduceat(q[idx], seg)
      tied = (q[idx] >= np.repeat(best, counts) - TIE_TOLERANCE).astype(float)
      br[idx] = tied / np.repeat(np.add.reduceat(tied, seg), counts)

    weight = w[edges].copy()
    weight[own] = br[slot[own]]
    nodes, starts = _segments(tree, edges)
    v[nodes] = np.add.reduceat(weight * child_v, starts)
  return float(v[0]), br


def own_infoset_reach(tree: GameTree, probs: np.ndarray, player: int) -> np.ndarray:
  """Own-contribution reach of `player`'s information sets.

  `probs` may be one slot vector or a (K, num_slots) stack; the result has
  the matching leading shape and one column per information set.
  """
  probs = np.atleast_2d(probs)
  out = np.zeros((probs.shape[0], tree.num_infosets))
  for idx in tree.infosets_of(player):
    parent = tree.infoset_parent_slot[idx]
    if parent < 0:
      out[:, idx] = 1.0
    else:
      out[:, idx] = out[:, tree.slot_infoset[parent]] * probs[:, parent]
  return out


def hybrid_orm_2p(m0, m1, iterations, blend, temperature, momentum,
                  gain_normalization, diversity, return_average):
  from cfrpsro.meta_solvers import hybrid_orm_solver_numpy
  return hybrid_orm_solver_numpy(
      [m0, m1], iterations, blend, temperature, momentum, gain_normalization,
      diversity, return_average)


__all__ = [
    "best_response", "cfr_regrets", "hybrid_orm_2p",
    "node_values", "own_infoset_reach", "reach_probabilities",
]
