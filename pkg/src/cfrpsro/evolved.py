"""VAD-CFR and AOD-CFR as component triples for `cfrpsro.cfr.CfrSolver`.

VAD-CFR (volatility-adaptive discounting) tracks an exponentially weighted
moving average of the largest instantaneous regret magnitude and uses it to
shrink the discount exponents when play is volatile. Its policy step projects
regrets one step ahead with a decaying optimism weight, and policy averaging
only begins after a hard warm-start window.

AOD-CFR (asymmetric optimistic discounting) follows linear schedules for its
discount exponents, scales instantaneous regret by the sign pattern of
(cumulative, instantaneous), adds a trend term against an EMA of cumulative
regret before squared regret matching, and averages with t^gamma weights.

Both accumulators use mutable state that depends on traversal order, so a
triple must not be shared between solvers.
"""

from __future__ import annotations

import collections
import dataclasses
import math
from typing import NamedTuple

from cfrpsro import cfr


@dataclasses.dataclass(frozen=True)
class VadParams:
  base_alpha: float = 1.5
  base_beta: float = -0.1
  volatility_sensitivity: float = 0.5
  max_expected_instantaneous_regret: float = 2.0
  boost: float = 1.1
  ewma_decay: float = 0.1
  negative_cap: float = -20.0
  initial_optimism: float = 1.0
  optimism_decay: float = 100.0
  policy_exponent: float = 1.5
  base_gamma: float = 2.0
  gamma_max: float = 4.0
  gamma_vol_sensitivity: float = 1.5
  warmup_iterations: int = 500
  stability_exponent: float = 1.5
  magnitude_exponent: float = 0.5

  def __post_init__(self):
    if not self.negative_cap < 0:
      raise ValueError(f"negative_cap must be < 0, got {self.negative_cap}")
    if self.warmup_iterations < 0:
      raise ValueError("warmup_iterations must be >= 0")
    if not 0 < self.ewma_decay <= 1:
      raise ValueError(f"ewma_decay must lie in (0, 1], got {self.ewma_decay}")


class VadAdaptive(NamedTuple):
  ewma: float
  volatility: float
  disc_pos: float
  disc_neg: float


def _max_abs(regrets):
  return max((abs(r) for r in regrets.values()), default=0.0)


def vad_effective_exponents(volatility: float,
                            params: VadParams) -> tuple[float, float]:
  """(alpha_eff, beta_eff) for a normalized volatility in [0, 1]."""
  shift = params.volatility_sensitivity * volatility
  alpha = max(0.1, params.base_alpha - shift)
  beta = min(alpha, params.base_beta - shift)
  return alpha, beta


def vad_adaptive_params(iteration: int, regrets, prev_ewma: float,
                        params: VadParams = VadParams()) -> VadAdaptive:
  """Advances the volatility EWMA and derives both discount factors."""
  t1 = float(iteration + 1)
  inst = _max_abs(regrets)
  if iteration == 0:
    ewma = inst
  else:
    ewma = params.ewma_decay * inst + (1.0 - params.ewma_decay) * prev_ewma
  cap = params.max_expected_instantaneous_regret
  volatility = min(1.0, ewma / cap) if cap > 0 else 0.0
  alpha, beta = vad_effective_exponents(volatility, params)
  pa, pb = t1**alpha, t1**beta
  return VadAdaptive(ewma, volatility, pa / (pa + 1.0), pb / (pb + 1.0))


class VadRegretAccumulator(cfr.RegretAccumulator):
  """Signed, asymmetrically discounted regrets with a boost and a floor cap."""

  def __init__(self, params: VadParams = VadParams()):
    self.params = params
    self.ewma = 0.0

  def update_accumulate_regret(self, info_state_node, iteration_number,
                               cfr_regrets):
    p = self.params
    self.ewma, _, disc_pos, disc_neg = vad_adaptive_params(
        iteration_number, cfr_regrets, self.ewma, p)
    out = {}
    for action, r in cfr_regrets.items():
      old = info_state_node.cumulative_regret[action]
      if r > 0:
        r *= p.boost
      old *= disc_pos if old >= 0 else disc_neg
      out[action] = max(p.negative_cap, old + r)
    return out


class VadPolicyFromRegret(cfr.PolicyFromRegretAccumulator):
  """Regret matching on an optimistic one-step projection, raised to a power.

  Keeps its own EWMA, independent of the accumulator's.
  """

  def __init__(self, params: VadParams = VadParams()):
    self.params = params
    self.ewma = 0.0

  def get_updated_current_policy(self, info_state_node, iteration_number,
                                 cfr_regrets, previous_policy):
    p = self.params
    self.ewma, volatility, disc_pos, disc_neg = vad_adaptive_params(
        iteration_number, cfr_regrets, self.ewma, p)
    optimism = p.initial_optimism / (1.0 + iteration_number / p.optimism_decay)
    optimism *= max(0.0, 1.0 - p.volatility_sensitivity * volatility)

    weights = {}
    for action in info_state_node.legal_actions:
      old = info_state_node.cumulative_regret.get(action, 0.0)
      r = cfr_regrets.get(action, 0.0)
      if r > 0:
        r *= p.boost
      old *= disc_pos if old >= 0 else disc_neg
      weights[action] = max(0.0, old + optimism * r)**p.policy_exponent
    total = sum(weights.values())
    if total > 0:
      return {a: w / total for a, w in weights.items()}
    n = len(info_state_node.legal_actions)
    return {a: 1.0 / n for a in info_state_node.legal_actions}


class VadPolicyAccumulator(cfr.PolicyAccumulator):
  """Warm-started averaging weighted by time, stability and regret magnitude."""

  def __init__(self, params: VadParams = VadParams()):
    self.params = params

  def weight(self, iteration_number, cfr_regrets) -> float:
    p = self.params
    inst = _max_abs(cfr_regrets)
    cap = p.max_expected_instantaneous_regret
    volatility = min(1.0, inst / cap) if cap > 0 else 0.0
    gamma = min(p.gamma_max, p.base_gamma + p.gamma_vol_sensitivity * volatility)
    w_time = (iteration_number + 1.0)**gamma
    w_stable = 1.0 / (1.0 + inst**p.stability_exponent)
    w_mag = max(0.1, (1.0 + inst / cap)**p.magnitude_exponent)
    return w_time * w_stable * w_mag

  def update_accumulate_policy(self, info_state_node, iteration_number,
                               info_state_policy, cfr_regrets, reach_prob,
                               counterfactual_reach_prob):
    if iteration_number < self.params.warmup_iterations:
      return info_state_node.cumulative_policy
    w = self.weight(iteration_number, cfr_regrets) * reach_prob
    old = info_state_node.cumulative_policy
    return {a: old[a] + w * pr for a, pr in info_state_policy.items()}


def vad_components(params: VadParams = VadParams()) -> cfr.CfrComponents:
  return cfr.CfrComponents(VadRegretAccumulator(params),
                           VadPolicyFromRegret(params),
                           VadPolicyAccumulator(params),
                           cfr.UpdateMode.ALTERNATING)


@dataclasses.dataclass(frozen=True)
class AodParams:
  alpha_start: float = 1.0
  alpha_max: float = 2.5
  schedule_T_alpha: float = 500.0
  beta_start: float = 0.5
  beta_max: float = 0.0
  schedule_T_beta: float = 500.0
  scale_pp: float = 1.1
  scale_pn: float = 0.9
  scale_np: float = 0.7
  scale_nn: float = 1.2
  sign_epsilon: float = 1e-9
  ema_alpha: float = 0.1
  optimism_trend_scale: float = 0.5
  use_squared_weights: bool = True
  gamma_start: float = 1.0
  gamma_max: float = 5.0
  gamma_schedule_T: float = 500.0

  def __post_init__(self):
    if min(self.alpha_start, self.alpha_max, self.schedule_T_alpha) < 0:
      raise ValueError("alpha parameters and schedule must be non-negative")
    if min(self.beta_start, self.beta_max, self.schedule_T_beta) < 0:
      raise ValueError("beta parameters and schedule must be non-negative")
    if min(self.scale_pp, self.scale_pn, self.scale_np, self.scale_nn) < 0:
      raise ValueError("instantaneous regret scales must be non-negative")
    if not 0 < self.ema_alpha <= 1:
      raise ValueError(f"ema_alpha must lie in (0, 1], got {self.ema_alpha}")
    if self.optimism_trend_scale < 0:
      raise ValueError("optimism_trend_scale must be non-negative")
    if min(self.gamma_start, self.gamma_max, self.gamma_schedule_T) < 0:
      raise ValueError("gamma parameters must be non-negative")


def _schedule(start, end, horizon, iteration):
  return start + (end - start) * min(1.0, iteration / max(1.0, horizon))


def _power_discount(t, exponent):
  """t^e / (t^e + 1), tending to 1 once the power overflows."""
  try:
    p = math.pow(t, exponent)
  except OverflowError:
    return 1.0
  return 1.0 if math.isinf(p) else p / (p + 1.0)


class AodRegretAccumulator(cfr.RegretAccumulator):

  def __init__(self, params: AodParams = AodParams()):
    self.params = params

  def scale(self, prev, r) -> float:
    p, eps = self.params, self.params.sign_epsilon
    if prev > eps:
      if r > eps:
        return p.scale_pp
      if r < -eps:
        return p.scale_pn
    elif prev < -eps:
      if r > eps:
        return p.scale_np
      if r < -eps:
        return p.scale_nn
    return 1.0

  def update_accumulate_regret(self, info_state_node, iteration_number,
                               cfr_regrets):
    p = self.params
    t = iteration_number + 1.0
    alpha = _schedule(p.alpha_start, p.alpha_max, p.schedule_T_alpha,
                      iteration_number)
    beta = _schedule(p.beta_start, p.beta_max, p.schedule_T_beta,
                     iteration_number)
    out = {}
    for action in info_state_node.legal_actions:
      prev = info_state_node.cumulative_regret.get(action, 0.0)
      r = cfr_regrets.get(action, 0.0)
      discount = _power_discount(t, alpha if prev > 0 else beta)
      out[action] = prev * discount + r * self.scale(prev, r)
    return out


class AodEmaStore:
  """EMA of cumulative regret per information set, keyed by policy index."""

  def __init__(self):
    self._data = collections.defaultdict(dict)

  def get(self, infoset_index: int) -> dict[int, float]:
    return self._data[infoset_index]

  def __contains__(self, infoset_index):
    return infoset_index in self._data


class AodPolicyFromRegret(cfr.PolicyFromRegretAccumulator):
  """Squared regret matching on R + scale * (R - EMA(R))."""

  def __init__(self, params: AodParams = AodParams()):
    self.params = params
    self.store = AodEmaStore()

  def get_updated_current_policy(self, info_state_node, iteration_number,
                                 cfr_regrets, previous_policy):
    p = self.params
    actions = info_state_node.legal_actions
    if not actions:
      return {}
    ema = self.store.get(info_state_node.index_in_tabular_policy)
    weights, new_ema = {}, {}
    for action in actions:
      cum = info_state_node.cumulative_regret.get(action, 0.0)
      prev = ema.get(action, 0.0)
      value = max(0.0, cum + p.optimism_trend_scale * (cum - prev))
      weights[action] = value**2 if p.use_squared_weights else value
      new_ema[action] = p.ema_alpha * cum + (1.0 - p.ema_alpha) * prev
    # Written only after every action has read the previous snapshot.
    ema.update(new_ema)
    total = sum(weights.values())
    if total > 1e-12:
      return {a: w / total for a, w in weights.items()}
    return {a: 1.0 / len(actions) for a in actions}


class AodPolicyAccumulator(cfr.PolicyAccumulator):

  def __init__(self, params: AodParams = AodParams()):
    self.params = params

  def update_accumulate_policy(self, info_state_node, iteration_number,
                               info_state_policy, cfr_regrets, reach_prob,
                               counterfactual_reach_prob):
    p = self.params
    gamma = _schedule(p.gamma_start, p.gamma_max, p.gamma_schedule_T,
                      iteration_number)
    try:
      power = math.pow(iteration_number + 1.0, gamma)
    except OverflowError:
      power = math.inf
    discount = 1.0 if math.isinf(power) else power / (power + 1.0)
    weight = power * reach_prob
    old = info_state_node.cumulative_policy
    actions = list(info_state_node.legal_actions)
    actions += [a for a in old if a not in info_state_node.legal_actions]
    return {a: old.get(a, 0.0) * discount + weight * info_state_policy.get(a, 0.0)
            for a in actions}


def aod_components(params: AodParams = AodParams()) -> cfr.CfrComponents:
  return cfr.CfrComponents(AodRegretAccumulator(params),
                           AodPolicyFromRegret(params),
                           AodPolicyAccumulator(params),
                           cfr.UpdateMode.ALTERNATING)
