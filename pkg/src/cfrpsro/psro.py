"""Policy-space response oracles with exact best responses.

Meta-game payoffs are exact. A terminal history z is reached with
probability chance(z) * prod_p reach_p(z), where reach_p depends only on
player p's policy, so each entry is a multilinear contraction of cached
per-policy terminal-reach vectors against chance(z) * u_i(z).
"""

from __future__ import annotations

import dataclasses
import string
import time
from typing import Callable, Sequence

import numpy as np

from cfrpsro import kernels
from cfrpsro.exploitability import best_response, exploitability
from cfrpsro.games import Game
from cfrpsro.games.tree import KIND_TERMINAL
from cfrpsro.meta_solvers import MetaStrategySolver, normalize
from cfrpsro.policy import TabularPolicy


class MetaGame:
  """Per-player payoff tensors over the joint population, grown in place."""

  def __init__(self, game: Game):
    self.game = game
    tree = game.tree
    n = game.num_players
    self._terminals = np.flatnonzero(tree.node_kind == KIND_TERMINAL)
    chance = kernels.reach_probabilities(
        tree, TabularPolicy.uniform(game).probs)[self._terminals, n]
    self._weights = chance[:, None] * tree.utilities[self._terminals]
    self._reach: list[np.ndarray] = [
        np.zeros((0, len(self._terminals))) for _ in range(n)]
    self.populations: list[list[TabularPolicy]] = [[] for _ in range(n)]
    self.tensors: list[np.ndarray] = [np.zeros((0,) * n) for _ in range(n)]

  @property
  def shape(self) -> tuple[int, ...]:
    return tuple(len(p) for p in self.populations)

  def _terminal_reach(self, player, policy):
    reach = kernels.reach_probabilities(self.game.tree, policy.probs)
    return reach[self._terminals, player]

  def _block(self, reaches):
    letters = string.ascii_lowercase[:len(reaches)]
    spec = ",".join(f"{c}z" for c in letters) + ",zk->k" + letters
    out = np.einsum(spec, *reaches, self._weights, optimize=True)
    return list(out)

  def extend(self, new_policies: Sequence[Sequence[TabularPolicy]]):
    """Appends policies per player, computing only entries that involve them."""
    n = self.game.num_players
    if len(new_policies) != n:
      raise ValueError(f"need one list of new policies per player ({n})")
    old = self.shape
    for p, pols in enumerate(new_policies):
      if pols:
        rows = np.stack([self._terminal_reach(p, pol) for pol in pols])
        self._reach[p] = np.vstack([self._reach[p], rows])
      self.populations[p].extend(pols)
    new = self.shape
    tensors = [np.zeros(new) for _ in range(n)]
    block = tuple(slice(0, s) for s in old)
    for i in range(n):
      tensors[i][block] = self.tensors[i]
    # Disjoint cover of the new entries: index p is new, earlier ones old.
    for p in range(n):
      if new[p] == old[p]:
        continue
      region = tuple(slice(0, old[q]) if q < p else
                     slice(old[p], new[p]) if q == p else slice(0, new[q])
                     for q in range(n))
      reaches = [self._reach[q][region[q]] for q in range(n)]
      if any(len(r) == 0 for r in reaches):
        continue
      for i, values in enumerate(self._block(reaches)):
        tensors[i][region] = values
    self.tensors = tensors
    return self


def fill_meta_game(game: Game,
                   population: Sequence[Sequence[TabularPolicy]]) -> MetaGame:
  return MetaGame(game).extend(population)


def aggregate_policy(game: Game, player: int, policy_set: Sequence[TabularPolicy],
                     weights) -> TabularPolicy:
  """Behavioral policy equivalent to a mixture of `player`'s policies.

  At each of the player's information sets the mixture's action
  probabilities are the component policies weighted by w_k times their own
  reach to that set. Sets no component reaches are uniform. Other players'
  entries are uniform.
  """
  if len(weights) != len(policy_set):
    raise ValueError(
        f"{len(weights)} weights for {len(policy_set)} policies")
  w = normalize(weights)
  tree = game.tree
  stack = np.stack([pol.probs for pol in policy_set])
  reach = kernels.own_infoset_reach(tree, stack, player)
  mass = w @ reach
  mine = tree.player_slot_mask(player)
  slot_is = tree.slot_infoset[mine]
  denom = mass[slot_is]
  reached = denom > 0
  # Normalizing the coefficients first keeps one-hot mixtures exact.
  coef = w[:, None] * reach[:, slot_is][:, reached] / denom[reached]
  out = TabularPolicy.uniform(game)
  idx = np.flatnonzero(mine)
  out.probs[idx[reached]] = (coef * stack[:, mine][:, reached]).sum(axis=0)
  return out


def aggregate_profile(game: Game, populations, meta_strategies) -> TabularPolicy:
  return TabularPolicy.combine(game, [
      aggregate_policy(game, p, populations[p], meta_strategies[p])
      for p in range(game.num_players)])


def exact_br_oracle(game: Game, player: int,
                    opponents_aggregated: TabularPolicy) -> TabularPolicy:
  """Best response that splits evenly over tied actions."""
  return best_response(game, opponents_aggregated, player).policy


@dataclasses.dataclass
class PsroEpoch:
  epoch: int
  population_sizes: tuple[int, ...]
  train_strategies: list[np.ndarray]
  eval_strategies: list[np.ndarray]
  exploitability: float
  elapsed_ms: float


@dataclasses.dataclass
class PsroTrace:
  epochs: list[PsroEpoch] = dataclasses.field(default_factory=list)
  meta_game: MetaGame | None = None

  @property
  def exploitabilities(self) -> list[float]:
    return [e.exploitability for e in self.epochs]


def run_psro(game: Game, train_solver: MetaStrategySolver,
             eval_solver: MetaStrategySolver, epochs: int,
             on_epoch: Callable[[PsroEpoch, MetaGame], None] | None = None
             ) -> PsroTrace:
  """Runs PSRO from one uniform policy per player.

  Each epoch solves the meta-game for training mixtures, adds one exact best
  response per player against the others' aggregated mixtures, then scores
  the expanded population by the exploitability of the evaluation mixture.
  The train solver is called exactly once per epoch.
  """
  if epochs < 1:
    raise ValueError(f"epochs must be >= 1, got {epochs}")
  n = game.num_players
  meta = MetaGame(game).extend([[TabularPolicy.uniform(game)] for _ in range(n)])
  trace = PsroTrace(meta_game=meta)
  start = time.perf_counter()
  for epoch in range(1, epochs + 1):
    train = [normalize(s) for s in train_solver.get_meta_strategy(
        game, meta.populations, meta.tensors)]
    target = aggregate_profile(game, meta.populations, train)
    responses = [exact_br_oracle(game, p, target) for p in range(n)]
    meta.extend([[r] for r in responses])
    evals = [normalize(s) for s in eval_solver.get_meta_strategy(
        game, meta.populations, meta.tensors)]
    profile = aggregate_profile(game, meta.populations, evals)
    row = PsroEpoch(epoch, meta.shape, train, evals,
                    exploitability(game, profile),
                    (time.perf_counter() - start) * 1e3)
    trace.epochs.append(row)
    if on_epoch is not None:
      on_epoch(row, meta)
  return trace
