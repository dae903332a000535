"""Tabular CFR with pluggable regret, policy and averaging components.

A solver iteration traverses the flattened game tree once per updating group
(all players together in simultaneous mode, one player at a time in
alternating mode) to get instantaneous counterfactual regrets, then visits
the group's information sets in tree pre-order and, for each one:

1. replaces `cumulative_regret` via the `RegretAccumulator` (the regrets of
   this iteration have not been added yet),
2. replaces `cumulative_policy` via the `PolicyAccumulator`, feeding it the
   policy played this iteration,
3. replaces `current_policy` via the `PolicyFromRegretAccumulator` (the
   node's cumulative regret already reflects this iteration).

Components may keep state across calls, so a set of components belongs to
exactly one solver run.
"""

from __future__ import annotations

import dataclasses
import enum
from typing import Mapping

import numpy as np

from cfrpsro import kernels
from cfrpsro.games import Game
from cfrpsro.policy import TabularPolicy

RM_TOLERANCE = 1e-12


class UnknownVariantError(ValueError):
  pass


class UpdateMode(str, enum.Enum):
  SIMULTANEOUS = "simultaneous"
  ALTERNATING = "alternating"


@dataclasses.dataclass
class InfoStateNode:
  """Values associated with one information set."""
  key: str
  player: int
  legal_actions: tuple[int, ...]
  index_in_tabular_policy: int
  cumulative_regret: dict[int, float]
  cumulative_policy: dict[int, float]
  current_policy: dict[int, float]

  @classmethod
  def fresh(cls, key, player, legal_actions, index):
    uniform = 1.0 / len(legal_actions)
    return cls(key, player, tuple(legal_actions), index,
               cumulative_regret={a: 0.0 for a in legal_actions},
               cumulative_policy={a: 0.0 for a in legal_actions},
               current_policy={a: uniform for a in legal_actions})


class RegretAccumulator:
  """Updates cumulative regret at an information set."""

  def update_accumulate_regret(self, info_state_node, iteration_number,
                               cfr_regrets):
    raise NotImplementedError


class PolicyFromRegretAccumulator:
  """Derives the current policy from regret."""

  def get_updated_current_policy(self, info_state_node, iteration_number,
                                 cfr_regrets, previous_policy):
    raise NotImplementedError


class PolicyAccumulator:
  """Updates the average-policy numerator."""

  def update_accumulate_policy(self, info_state_node, iteration_number,
                               info_state_policy, cfr_regrets, reach_prob,
                               counterfactual_reach_prob):
    raise NotImplementedError


@dataclasses.dataclass
class CfrComponents:
  regret_accumulator: RegretAccumulator
  policy_from_regret: PolicyFromRegretAccumulator
  policy_accumulator: PolicyAccumulator
  update_mode: UpdateMode = UpdateMode.ALTERNATING

  def __post_init__(self):
    self.update_mode = UpdateMode(self.update_mode)


def instantaneous_regrets(values: Mapping[int, float],
                          policy: Mapping[int, float]) -> dict[int, float]:
  """r(a) = v(a) - sum_a' policy(a') v(a')."""
  if set(values) != set(policy):
    raise ValueError(
        f"action sets differ: values {sorted(values)} vs policy {sorted(policy)}")
  expected = sum(policy[a] * values[a] for a in values)
  return {a: v - expected for a, v in values.items()}


def regret_matching(cumulative_regret: Mapping[int, float]) -> dict[int, float]:
  """Policy proportional to positive regret; uniform when none is positive."""
  positive = {a: max(r, 0.0) for a, r in cumulative_regret.items()}
  total = sum(positive.values())
  if total < RM_TOLERANCE:
    return {a: 1.0 / len(positive) for a in positive}
  return {a: r / total for a, r in positive.items()}


def _t(iteration_number):
  return float(iteration_number) + 1.0


# Baseline components.


class SummedRegret(RegretAccumulator):

  def update_accumulate_regret(self, info_state_node, iteration_number,
                               cfr_regrets):
    old = info_state_node.cumulative_regret
    return {a: old[a] + r for a, r in cfr_regrets.items()}


class FlooredRegret(RegretAccumulator):
  """Regret-matching+ accumulation: max(R + r, 0)."""

  def update_accumulate_regret(self, info_state_node, iteration_number,
                               cfr_regrets):
    old = info_state_node.cumulative_regret
    return {a: max(old[a] + r, 0.0) for a, r in cfr_regrets.items()}


class LinearDiscountRegret(RegretAccumulator):
  """R <- R * t / (t + 1) + r for both signs of R."""

  def update_accumulate_regret(self, info_state_node, iteration_number,
                               cfr_regrets):
    t = _t(iteration_number)
    discount = t / (t + 1.0)
    old = info_state_node.cumulative_regret
    return {a: old[a] * discount + r for a, r in cfr_regrets.items()}


class DiscountedRegret(RegretAccumulator):
  """DCFR: positive regrets scaled by t^a/(t^a+1), others by t^b/(t^b+1)."""

  def __init__(self, alpha=1.5, beta=0.0):
    self.alpha = alpha
    self.beta = beta

  def update_accumulate_regret(self, info_state_node, iteration_number,
                               cfr_regrets):
    t = _t(iteration_number)
    pa, pb = t**self.alpha, t**self.beta
    pos, neg = pa / (pa + 1.0), pb / (pb + 1.0)
    old = info_state_node.cumulative_regret
    return {a: old[a] * (pos if old[a] > 0 else neg) + r
            for a, r in cfr_regrets.items()}


class RegretMatching(PolicyFromRegretAccumulator):

  def get_updated_current_policy(self, info_state_node, iteration_number,
                                 cfr_regrets, previous_policy):
    return regret_matching(info_state_node.cumulative_regret)


class PredictiveRegretMatching(PolicyFromRegretAccumulator):
  """Regret matching on max(R + r, 0), predicting next regret by the last one."""

  def get_updated_current_policy(self, info_state_node, iteration_number,
                                 cfr_regrets, previous_policy):
    cum = info_state_node.cumulative_regret
    return regret_matching(
        {a: cum[a] + cfr_regrets.get(a, 0.0) for a in info_state_node.legal_actions})


class PolynomialPolicyAccumulator(PolicyAccumulator):
  """S <- S + t^power * reach * policy; power 0 is plain (unit) averaging."""

  def __init__(self, power=0):
    self.power = power

  def update_accumulate_policy(self, info_state_node, iteration_number,
                               info_state_policy, cfr_regrets, reach_prob,
                               counterfactual_reach_prob):
    weight = _t(iteration_number)**self.power * reach_prob
    old = info_state_node.cumulative_policy
    return {a: old[a] + weight * p for a, p in info_state_policy.items()}


class LinearDiscountPolicy(PolicyAccumulator):
  """S <- S * t / (t + 1) + reach * policy (linear weights in discount form)."""

  def update_accumulate_policy(self, info_state_node, iteration_number,
                               info_state_policy, cfr_regrets, reach_prob,
                               counterfactual_reach_prob):
    t = _t(iteration_number)
    discount = t / (t + 1.0)
    old = info_state_node.cumulative_policy
    return {a: old[a] * discount + reach_prob * p
            for a, p in info_state_policy.items()}


class DiscountedPolicy(PolicyAccumulator):
  """S <- S * (t / (t + 1))^gamma + reach * policy."""

  def __init__(self, gamma=2.0):
    self.gamma = gamma

  def update_accumulate_policy(self, info_state_node, iteration_number,
                               info_state_policy, cfr_regrets, reach_prob,
                               counterfactual_reach_prob):
    t = _t(iteration_number)
    discount = (t / (t + 1.0))**self.gamma
    old = info_state_node.cumulative_policy
    return {a: old[a] * discount + reach_prob * p
            for a, p in info_state_policy.items()}


PRESETS = ("cfr", "cfr_plus", "lcfr", "dcfr", "pcfr_plus")
EVOLVED = ("vad_cfr", "aod_cfr")
VARIANTS = PRESETS + EVOLVED


def preset(name: str, *, alpha=1.5, beta=0.0, gamma=2.0) -> CfrComponents:
  """Component triple of a baseline CFR variant.

  `alpha`, `beta` and `gamma` only apply to "dcfr".
  """
  S, A = UpdateMode.SIMULTANEOUS, UpdateMode.ALTERNATING
  if name == "cfr":
    return CfrComponents(SummedRegret(), RegretMatching(),
                         PolynomialPolicyAccumulator(0), S)
  if name == "cfr_plus":
    return CfrComponents(FlooredRegret(), RegretMatching(),
                         PolynomialPolicyAccumulator(1), A)
  if name == "lcfr":
    return CfrComponents(LinearDiscountRegret(), RegretMatching(),
                         LinearDiscountPolicy(), A)
  if name == "dcfr":
    return CfrComponents(DiscountedRegret(alpha, beta), RegretMatching(),
                         DiscountedPolicy(gamma), A)
  if name == "pcfr_plus":
    return CfrComponents(FlooredRegret(), PredictiveRegretMatching(),
                         PolynomialPolicyAccumulator(2), A)
  raise UnknownVariantError(
      f"unknown CFR variant {name!r}; choose from {', '.join(VARIANTS)}")


def make_components(name: str, params: Mapping[str, float] | None = None,
                    update_mode: str | None = None) -> CfrComponents:
  """Components for any baseline or evolved variant.

  Args:
    name: one of `VARIANTS`.
    params: overrides for the variant's parameters (DCFR's alpha/beta/gamma
      or the fields of `VadParams` / `AodParams`).
    update_mode: overrides the variant's default update mode.
  """
  params = dict(params or {})
  if name == "vad_cfr":
    from cfrpsro.evolved import VadParams, vad_components
    components = vad_components(VadParams(**params))
  elif name == "aod_cfr":
    from cfrpsro.evolved import AodParams, aod_components
    components = aod_components(AodParams(**params))
  else:
    if params and name != "dcfr":
      raise ValueError(f"variant {name!r} takes no parameters")
    components = preset(name, **params)
  if update_mode is not None:
    components.update_mode = UpdateMode(update_mode)
  return components


class CfrSolver:
  """Runs CFR iterations on a game with a given set of components."""

  def __init__(self, game: Game, components: CfrComponents | str):
    if isinstance(components, str):
      components = make_components(components)
    self.game = game
    self.components = components
    self.iteration = 0
    tree = game.tree
    self._tree = tree
    self.nodes: dict[str, InfoStateNode] = {}
    self._node_list: list[InfoStateNode] = []
    for idx, key in enumerate(tree.infoset_keys):
      node = InfoStateNode.fresh(key, int(tree.infoset_player[idx]),
                                 tree.legal_actions[idx], idx)
      self.nodes[key] = node
      self._node_list.append(node)
    self._current = TabularPolicy.uniform(game).probs
    n = game.num_players
    if components.update_mode is UpdateMode.SIMULTANEOUS:
      groups = [np.ones(n, dtype=bool)]
    else:
      groups = [np.arange(n) == p for p in range(n)]
    self._groups = [(mask, np.flatnonzero(mask[tree.infoset_player]))
                    for mask in groups]

  def run_iteration(self):
    comps = self.components
    ra = comps.regret_accumulator
    pa = comps.policy_accumulator
    pfr = comps.policy_from_regret
    t = self.iteration
    starts = self._tree.infoset_slot_start
    for mask, infosets in self._groups:
      regrets, cf_reach, own_reach = kernels.cfr_regrets(
          self._tree, self._current, mask)
      regrets = regrets.tolist()
      for idx in infosets.tolist():
        node = self._node_list[idx]
        lo = starts[idx]
        r = dict(zip(node.legal_actions, regrets[lo:lo + len(node.legal_actions)]))
        node.cumulative_regret = ra.update_accumulate_regret(node, t, r)
        node.cumulative_policy = pa.update_accumulate_policy(
            node, t, node.current_policy, r, own_reach[idx], cf_reach[idx])
        policy = pfr.get_updated_current_policy(node, t, r, node.current_policy)
        node.current_policy = policy
        self._current[lo:lo + len(node.legal_actions)] = [
            policy.get(a, 0.0) for a in node.legal_actions]
    self.iteration += 1

  def run(self, iterations: int):
    for _ in range(iterations):
      self.run_iteration()
    return self

  def current_policy(self) -> TabularPolicy:
    return TabularPolicy(self.game, self._current.copy())

  def average_policy(self) -> TabularPolicy:
    return average_policy(self)


def average_policy(solver: CfrSolver) -> TabularPolicy:
  """Normalized cumulative policy; uniform where nothing was accumulated."""
  probs = np.empty(solver._tree.num_slots)
  starts = solver._tree.infoset_slot_start
  for node in solver._node_list:
    acts = node.legal_actions
    weights = [node.cumulative_policy.get(a, 0.0) for a in acts]
    total = sum(weights)
    lo = starts[node.index_in_tabular_policy]
    if total > 0:
      probs[lo:lo + len(acts)] = [w / total for w in weights]
    else:
      probs[lo:lo + len(acts)] = 1.0 / len(acts)
  return TabularPolicy(solver.game, probs)
