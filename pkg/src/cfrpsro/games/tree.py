"""Flattened game tree.

The tree is enumerated once, depth-first in pre-order with actions in
ascending order, and stored as flat numpy arrays so that the traversal
kernels never touch Python state objects. Decision edges point to a *slot*:
a (information set, action) pair in a flat array shared by every tabular
policy over the game.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np

from cfrpsro.games.base import Game, GameError

KIND_TERMINAL, KIND_CHANCE, KIND_DECISION = 0, 1, 2


@dataclasses.dataclass(eq=False)
class GameTree:
  num_players: int
  # Per node, indexed in pre-order (node 0 is the root).
  node_kind: np.ndarray
  node_player: np.ndarray
  node_infoset: np.ndarray
  node_depth: np.ndarray
  edge_start: np.ndarray
  utilities: np.ndarray
  # Per edge.
  edge_child: np.ndarray
  edge_prob: np.ndarray
  edge_slot: np.ndarray
  # Per information set, indexed by first appearance in pre-order.
  infoset_keys: list[str]
  infoset_player: np.ndarray
  infoset_depth: np.ndarray
  infoset_slot_start: np.ndarray
  infoset_parent_slot: np.ndarray
  legal_actions: list[tuple[int, ...]]
  # Per slot.
  slot_action: np.ndarray
  slot_infoset: np.ndarray
  # Nodes and information sets grouped by depth, deepest level first.
  level_nodes: np.ndarray
  level_node_start: np.ndarray
  level_infosets: np.ndarray
  level_infoset_start: np.ndarray
  key_to_index: dict[str, int] = dataclasses.field(repr=False)

  @property
  def num_nodes(self) -> int:
    return len(self.node_kind)

  @property
  def num_infosets(self) -> int:
    return len(self.infoset_keys)

  @property
  def num_slots(self) -> int:
    return len(self.slot_action)

  @property
  def num_levels(self) -> int:
    return len(self.level_node_start) - 1

  def infosets_of(self, player: int) -> np.ndarray:
    return np.flatnonzero(self.infoset_player == player)

  def slots_of(self, infoset: int) -> slice:
    return slice(self.infoset_slot_start[infoset],
                 self.infoset_slot_start[infoset + 1])

  def player_slot_mask(self, player: int) -> np.ndarray:
    return self.infoset_player[self.slot_infoset] == player

  @functools.cached_property
  def edge_parent(self) -> np.ndarray:
    return np.repeat(np.arange(self.num_nodes, dtype=np.int32),
                     np.diff(self.edge_start))

  @functools.cached_property
  def edge_levels(self) -> list[np.ndarray]:
    """Edge ids grouped by the depth of their parent, shallowest first.

    Within a group edges keep their global order, so each parent's edges stay
    contiguous.
    """
    depth = self.node_depth[self.edge_parent]
    order = np.argsort(depth, kind="stable")
    bounds = np.searchsorted(depth[order], np.arange(depth.max() + 2))
    return [order[bounds[d]:bounds[d + 1]] for d in range(len(bounds) - 1)]


def build_tree(game: Game) -> GameTree:
  """Enumerates every history of `game` into a `GameTree`.

  Raises:
    GameError: if two histories sharing an information-state key disagree on
      legal actions, depth, or the player's own previous action (the kernels
      rely on all three).
  """
  n = game.num_players
  kinds, players, infosets, depths, utils = [], [], [], [], []
  children: list[list[tuple[int, float, int]]] = []
  keys: list[str] = []
  key_to_index: dict[str, int] = {}
  is_player, is_depth, is_start, is_parent, legal = [], [], [], [], []
  num_slots = 0

  def visit(state, depth, own_last):
    nonlocal num_slots
    node = len(kinds)
    kinds.append(0)
    players.append(state.current_player())
    infosets.append(-1)
    depths.append(depth)
    utils.append(None)
    children.append([])
    if state.is_terminal():
      utils[node] = state.returns()
      return node
    if state.is_chance_node():
      kinds[node] = KIND_CHANCE
      for action, prob in state.chance_outcomes():
        child = visit(state.child(action), depth + 1, own_last)
        children[node].append((child, prob, -1))
      return node

    kinds[node] = KIND_DECISION
    player = state.current_player()
    key = state.information_state_key(player)
    actions = tuple(state.legal_actions())
    idx = key_to_index.get(key)
    if idx is None:
      idx = len(keys)
      key_to_index[key] = idx
      keys.append(key)
      is_player.append(player)
      is_depth.append(depth)
      is_start.append(num_slots)
      is_parent.append(own_last[player])
      legal.append(actions)
      num_slots += len(actions)
    elif (legal[idx] != actions or is_depth[idx] != depth
          or is_parent[idx] != own_last[player]):
      raise GameError(f"inconsistent histories in information set {key!r}")
    infosets[node] = idx
    for k, action in enumerate(actions):
      slot = is_start[idx] + k
      last = own_last[:player] + (slot,) + own_last[player + 1:]
      child = visit(state.child(action), depth + 1, last)
      children[node].append((child, 0.0, slot))
    return node

  visit(game.new_initial_state(), 0, (-1,) * n)

  num_nodes = len(kinds)
  edge_start = np.zeros(num_nodes + 1, dtype=np.int64)
  edge_start[1:] = np.cumsum([len(c) for c in children])
  flat = [e for c in children for e in c]
  utilities = np.zeros((num_nodes, n))
  for i, u in enumerate(utils):
    if u is not None:
      utilities[i] = u
  slot_action = np.array([a for acts in legal for a in acts], dtype=np.int32)
  slot_infoset = np.repeat(np.arange(len(keys), dtype=np.int32),
                           [len(a) for a in legal])
  node_depth = np.array(depths, dtype=np.int32)
  infoset_depth = np.array(is_depth, dtype=np.int32)
  level_nodes, level_node_start = _group_by_depth(
      node_depth, int(node_depth.max()))
  level_infosets, level_infoset_start = _group_by_depth(
      infoset_depth, int(node_depth.max()))

  return GameTree(
      num_players=n,
      node_kind=np.array(kinds, dtype=np.int8),
      node_player=np.array(players, dtype=np.int32),
      node_infoset=np.array(infosets, dtype=np.int32),
      node_depth=node_depth,
      edge_start=edge_start,
      utilities=utilities,
      edge_child=np.array([e[0] for e in flat], dtype=np.int32),
      edge_prob=np.array([e[1] for e in flat], dtype=np.float64),
      edge_slot=np.array([e[2] for e in flat], dtype=np.int32),
      infoset_keys=keys,
      infoset_player=np.array(is_player, dtype=np.int32),
      infoset_depth=infoset_depth,
      infoset_slot_start=np.array(is_start + [num_slots], dtype=np.int64),
      infoset_parent_slot=np.array(is_parent, dtype=np.int32),
      legal_actions=legal,
      slot_action=slot_action,
      slot_infoset=slot_infoset,
      level_nodes=level_nodes,
      level_node_start=level_node_start,
      level_infosets=level_infosets,
      level_infoset_start=level_infoset_start,
      key_to_index=key_to_index,
  )


def _group_by_depth(depth, max_depth):
  """Returns (items ordered by decreasing depth, CSR level boundaries)."""
  order = np.argsort(-depth, kind="stable").astype(np.int32)
  counts = np.bincount(max_depth - depth, minlength=max_depth + 1)
  start = np.zeros(len(counts) + 1, dtype=np.int64)
  start[1:] = np.cumsum(counts)
  return order, start

