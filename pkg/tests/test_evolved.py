import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfrpsro import evolved
from cfrpsro.cfr import CfrSolver, InfoStateNode
from cfrpsro.evolved import (AodParams, AodPolicyAccumulator,
                             AodPolicyFromRegret, AodRegretAccumulator,
                             VadParams, VadPolicyAccumulator,
                             VadPolicyFromRegret, VadRegretAccumulator,
                             vad_adaptive_params)
from cfrpsro.exploitability import exploitability


def node(regret=None, policy=None, actions=(0, 1), index=0):
  n = InfoStateNode.fresh("k", 0, actions, index)
  if regret is not None:
    n.cumulative_regret = dict(regret)
  if policy is not None:
    n.cumulative_policy = dict(policy)
  return n


def disc(t, e):
  return t**e / (t**e + 1)


# VAD adaptive parameters.


def test_vad_params_first_iteration():
  assert tuple(vad_adaptive_params(0, {0: 4.0}, 0.0)) == (4.0, 1.0, 0.5, 0.5)


def test_vad_params_calm_iteration():
  out = vad_adaptive_params(9, {}, 0.0)
  assert out.volatility == 0.0
  assert out.disc_pos == pytest.approx(0.96934, abs=1e-5)
  assert out.disc_neg == pytest.approx(0.44269, abs=1e-5)


def test_vad_ewma_blends_after_first_iteration():
  out = vad_adaptive_params(3, {0: -1.0, 1: 0.5}, 2.0)
  assert out.ewma == pytest.approx(0.1 * 1.0 + 0.9 * 2.0)
  assert out.volatility == pytest.approx(0.95)


@given(st.floats(0, 1))
def test_vad_effective_exponents_bounds(volatility):
  alpha, beta = evolved.vad_effective_exponents(volatility, VadParams())
  assert 1.0 <= alpha <= 1.5
  assert beta <= alpha


def test_vad_params_validation():
  with pytest.raises(ValueError):
    VadParams(negative_cap=0.0)
  with pytest.raises(ValueError):
    VadParams(ewma_decay=0.0)
  with pytest.raises(ValueError):
    VadParams(warmup_iterations=-1)


# VAD regret accumulation.


def test_vad_regret_first_iteration_boost():
  got = VadRegretAccumulator().update_accumulate_regret(
      node({0: 2.0, 1: 0.0}), 0, {0: 1.0, 1: 0.0})
  assert got[0] == pytest.approx(2.1)
  assert got[1] == 0.0


def test_vad_regret_negative_discount_and_cap():
  # Seed the EWMA so that volatility saturates at 1: beta_eff = -0.6.
  d = disc(10.0, -0.6)
  assert d == pytest.approx(0.20076, abs=1e-5)
  for r, expected in [(-15.0, -20 * d - 15), (-17.0, -20.0)]:
    acc = VadRegretAccumulator()
    acc.ewma = 20.0
    got = acc.update_accumulate_regret(node({0: -20.0, 1: 0.0}), 9,
                                       {0: r, 1: 0.0})
    assert got[0] == pytest.approx(expected)
  assert -20 * d - 15 == pytest.approx(-19.0152, abs=1e-4)


def test_vad_regret_from_cold_ewma_at_iteration_nine():
  # From an EWMA of 0, one visit with |r| = 15 yields volatility 0.75.
  acc = VadRegretAccumulator()
  got = acc.update_accumulate_regret(node({0: -20.0, 1: 0.0}), 9,
                                     {0: -15.0, 1: 0.0})
  assert acc.ewma == pytest.approx(1.5)
  assert -20 * disc(10.0, -0.475) - 15 < -20
  assert got[0] == -20.0


def test_vad_boost_is_asymmetric():
  got = VadRegretAccumulator().update_accumulate_regret(
      node({0: 0.0, 1: 0.0}), 0, {0: 0.8, 1: -0.8})
  assert got[0] == pytest.approx(-1.1 * got[1])


def test_vad_regret_zero_stays_zero():
  assert VadRegretAccumulator().update_accumulate_regret(
      node({0: 0.0, 1: 0.0}), 4, {0: 0.0, 1: 0.0}) == {0: 0.0, 1: 0.0}


# VAD current policy.


def test_vad_policy_first_iteration():
  pol = VadPolicyFromRegret()
  got = pol.get_updated_current_policy(node({0: 0.0, 1: 0.0}), 0,
                                       {0: 1.0, 1: -1.0}, None)
  assert got == {0: 1.0, 1: 0.0}
  assert pol.ewma == 1.0


def test_vad_policy_power():
  got = VadPolicyFromRegret().get_updated_current_policy(
      node({0: 8.0, 1: 2.0}), 0, {0: 0.0, 1: 0.0}, None)
  assert got == pytest.approx({0: 8 / 9, 1: 1 / 9})


def test_vad_policy_uniform_fallback():
  got = VadPolicyFromRegret().get_updated_current_policy(
      node({0: -3.0, 1: -1.0}), 2, {0: -0.5, 1: 0.0}, None)
  assert got == {0: 0.5, 1: 0.5}


def test_vad_policy_keeps_its_own_ewma():
  acc, pol = VadRegretAccumulator(), VadPolicyFromRegret()
  n = node({0: 0.0, 1: 0.0})
  acc.update_accumulate_regret(n, 0, {0: 4.0, 1: 0.0})
  pol.get_updated_current_policy(n, 0, {0: 1.0, 1: 0.0}, None)
  assert (acc.ewma, pol.ewma) == (4.0, 1.0)


# VAD policy accumulation.


def test_vad_warm_start_returns_node_state():
  n = node(policy={0: 0.0, 1: 0.0})
  out = VadPolicyAccumulator().update_accumulate_policy(
      n, 499, {0: 1.0, 1: 0.0}, {0: 5.0, 1: -1.0}, 1.0, 1.0)
  assert out == n.cumulative_policy


def test_vad_first_accumulated_iteration():
  out = VadPolicyAccumulator().update_accumulate_policy(
      node(policy={0: 2.0, 1: 0.0}), 500, {0: 1.0, 1: 0.0},
      {0: 0.0, 1: 0.0}, 1.0, 1.0)
  assert out == {0: 2.0 + 251001.0, 1: 0.0}


def test_vad_weight_components_at_saturated_volatility():
  w = VadPolicyAccumulator().weight(600, {0: 2.0, 1: -1.0})
  w_stable = 1 / (1 + 2**1.5)
  assert w_stable == pytest.approx(0.26120, abs=1e-5)
  assert math.sqrt(2) == pytest.approx(1.41421, abs=1e-5)
  assert w == pytest.approx(601**3.5 * w_stable * math.sqrt(2))


def test_vad_invariants_over_a_run(kuhn2, monkeypatch):
  seen = []
  original = evolved.vad_effective_exponents

  def spy(volatility, params):
    out = original(volatility, params)
    seen.append(out)
    return out

  monkeypatch.setattr(evolved, "vad_effective_exponents", spy)
  solver = CfrSolver(kuhn2, "vad_cfr")
  for it in range(520):
    solver.run_iteration()
    nodes = solver.nodes.values()
    assert min(min(n.cumulative_regret.values()) for n in nodes) >= -20.0
    if it < 499:
      assert all(v == 0.0 for n in nodes for v in n.cumulative_policy.values())
  assert all(beta <= alpha for alpha, beta in seen)
  assert len(seen) == 2 * 520 * len(solver.nodes)


def test_vad_average_is_uniform_during_warm_start(kuhn2):
  avg = CfrSolver(kuhn2, "vad_cfr").run(100).average_policy()
  assert all(p == 0.5 for p in avg.probs)


# AOD.


def test_aod_schedules():
  acc = AodRegretAccumulator()
  got = acc.update_accumulate_regret(node({0: 1.0, 1: -1.0}), 250,
                                     {0: 0.0, 1: 0.0})
  assert got[0] == pytest.approx(disc(251.0, 1.75))
  assert got[1] == pytest.approx(-disc(251.0, 0.25))


def test_aod_first_iteration():
  acc = AodRegretAccumulator()
  got = acc.update_accumulate_regret(node({0: 1.0, 1: -2.0}), 0,
                                     {0: 1.0, 1: 0.0})
  assert got == pytest.approx({0: 1.6, 1: -1.0})


@pytest.mark.parametrize("prev, r, scale", [
    (1.0, 1.0, 1.1), (1.0, -1.0, 0.9), (-1.0, 1.0, 0.7), (-1.0, -1.0, 1.2),
    (0.0, 1.0, 1.0), (1.0, 1e-10, 1.0), (1e-10, -1.0, 1.0),
])
def test_aod_sign_scales(prev, r, scale):
  assert AodRegretAccumulator().scale(prev, r) == scale


def test_aod_policy_first_visit_and_ema():
  pol = AodPolicyFromRegret()
  got = pol.get_updated_current_policy(node({0: 2.0, 1: 1.0}), 0, {}, None)
  assert got == pytest.approx({0: 0.8, 1: 0.2})
  assert pol.store.get(0) == pytest.approx({0: 0.2, 1: 0.1})


def test_aod_policy_reads_snapshot_before_writing():
  pol = AodPolicyFromRegret()
  pol.get_updated_current_policy(node({0: 2.0, 1: 1.0}), 0, {}, None)
  got = pol.get_updated_current_policy(node({0: 1.0, 1: 3.0}), 1, {}, None)
  a = (1.0 + 0.5 * (1.0 - 0.2))**2
  b = (3.0 + 0.5 * (3.0 - 0.1))**2
  assert got == pytest.approx({0: a / (a + b), 1: b / (a + b)})
  assert pol.store.get(0) == pytest.approx({0: 0.1 + 0.18, 1: 0.3 + 0.09})


def test_aod_store_is_per_infoset():
  pol = AodPolicyFromRegret()
  pol.get_updated_current_policy(node({0: 2.0, 1: 1.0}, index=3), 0, {}, None)
  assert 3 in pol.store and 0 not in pol.store


def test_aod_policy_fallback():
  got = AodPolicyFromRegret().get_updated_current_policy(
      node({0: -1.0, 1: 0.0}), 0, {}, None)
  assert got == {0: 0.5, 1: 0.5}


def test_aod_linear_weights_option():
  pol = AodPolicyFromRegret(AodParams(use_squared_weights=False))
  got = pol.get_updated_current_policy(node({0: 2.0, 1: 1.0}), 0, {}, None)
  assert got == pytest.approx({0: 2 / 3, 1: 1 / 3})


def test_aod_accumulator():
  acc = AodPolicyAccumulator()
  out = acc.update_accumulate_policy(node(policy={0: 10.0, 1: 0.0}), 0,
                                     {0: 1.0, 1: 0.0}, {}, 1.0, 1.0)
  assert out == {0: 6.0, 1: 0.0}
  out = acc.update_accumulate_policy(node(policy={0: 0.0, 1: 0.0}), 500,
                                     {0: 1.0, 1: 0.0}, {}, 1.0, 1.0)
  assert out[0] == 501.0**5


def test_aod_accumulator_keeps_stored_actions():
  n = node(policy={0: 1.0, 1: 0.0, 7: 4.0})
  out = AodPolicyAccumulator().update_accumulate_policy(
      n, 0, {0: 1.0}, {}, 1.0, 1.0)
  assert out == {0: 1.5, 1: 0.0, 7: 2.0}


def test_aod_overflow_guard():
  assert evolved._power_discount(1e300, 5.0) == 1.0
  assert evolved._power_discount(1.0, 5.0) == 0.5


def test_aod_params_validation():
  with pytest.raises(ValueError):
    AodParams(ema_alpha=0.0)
  with pytest.raises(ValueError):
    AodParams(scale_nn=-1.0)


@pytest.mark.parametrize("variant", ["vad_cfr", "aod_cfr"])
def test_evolved_beat_vanilla_on_kuhn(kuhn2, variant):
  vanilla = exploitability(kuhn2, CfrSolver(kuhn2, "cfr").run(1000)
                           .average_policy())
  ours = exploitability(kuhn2, CfrSolver(kuhn2, variant).run(1000)
                        .average_policy())
  assert ours <= vanilla
