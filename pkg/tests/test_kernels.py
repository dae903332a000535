import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import cached_game
from cfrpsro import _pykernels, kernels

ckernels = pytest.importorskip("cfrpsro._ckernels")

GAMES = [("kuhn", 2), ("kuhn", 3), ("leduc", 2)]


def _random_probs(tree, rng, sparsity=0.0):
  raw = rng.random(tree.num_slots)
  raw[rng.random(tree.num_slots) < sparsity] = 0.0
  raw[tree.infoset_slot_start[:-1]] += 1e-3
  sums = np.add.reduceat(raw, tree.infoset_slot_start[:-1])
  return raw / sums[tree.slot_infoset]


@pytest.fixture(params=GAMES + [("goofspiel", 2)], ids=lambda g: f"{g[0]}{g[1]}")
def tree(request):
  family, players = request.param
  return cached_game(family, players).tree


@pytest.mark.parametrize("sparsity", [0.0, 0.5])
def test_backends_agree(tree, sparsity):
  rng = np.random.default_rng(11)
  for _ in range(3):
    probs = _random_probs(tree, rng, sparsity)
    np.testing.assert_allclose(ckernels.reach_probabilities(tree, probs),
                               _pykernels.reach_probabilities(tree, probs),
                               atol=1e-13)
    np.testing.assert_allclose(ckernels.node_values(tree, probs),
                               _pykernels.node_values(tree, probs), atol=1e-12)
    for update in ([True] * tree.num_players,
                   [p == 0 for p in range(tree.num_players)]):
      got = ckernels.cfr_regrets(tree, probs, np.array(update))
      ref = _pykernels.cfr_regrets(tree, probs, np.array(update))
      for a, b in zip(got, ref):
        np.testing.assert_allclose(a, b, atol=1e-12)
    for player in range(tree.num_players):
      v1, br1 = ckernels.best_response(tree, probs, player)
      v2, br2 = _pykernels.best_response(tree, probs, player)
      assert v1 == pytest.approx(v2, abs=1e-12)
      np.testing.assert_allclose(br1, br2, atol=1e-12)


def test_best_response_splits_exact_ties(kuhn2):
  tree = kuhn2.tree
  # Against a uniform opponent every information set of player 0 is scored;
  # with all utilities zeroed out every action ties.
  flat = dict(vars(tree))
  flat["utilities"] = np.zeros_like(tree.utilities)
  flat.pop("edge_parent", None)
  flat.pop("edge_levels", None)
  flat.pop("_ckernel_view", None)
  zero = type(tree)(**flat)
  probs = np.full(tree.num_slots, 0.5)
  for impl in (ckernels, _pykernels):
    _, br = impl.best_response(zero, probs, 0)
    assert np.all(br == 0.5)


def test_hybrid_orm_backends_agree():
  rng = np.random.default_rng(5)
  for shape in [(1, 1), (3, 3), (4, 7)]:
    m0 = rng.normal(size=shape)
    m1 = rng.normal(size=shape)
    for avg in (True, False):
      args = (300, 0.2, 0.05, 0.5, True, 0.01, avg)
      a = ckernels.hybrid_orm_2p(m0, m1, *args)
      b = _pykernels.hybrid_orm_2p(m0, m1, *args)
      for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, atol=1e-12)


def test_own_infoset_reach_matches_reach_kernel(kuhn3):
  tree = kuhn3.tree
  probs = _random_probs(tree, np.random.default_rng(2))
  reach = kernels.reach_probabilities(tree, probs)
  for player in range(3):
    own = kernels.own_infoset_reach(tree, probs, player)[0]
    decision = np.flatnonzero(tree.node_infoset >= 0)
    mine = decision[tree.infoset_player[tree.node_infoset[decision]] == player]
    np.testing.assert_allclose(own[tree.node_infoset[mine]],
                               reach[mine, player], atol=1e-15)


def test_pure_python_switch_selects_fallback():
  env = dict(os.environ, CFRPSRO_PURE_PYTHON="1")
  code = ("from cfrpsro import kernels, CfrSolver, exploitability, new_game;"
          "g = new_game(family='kuhn');"
          "s = CfrSolver(g, 'cfr_plus').run(50);"
          "print(kernels.BACKEND, repr(exploitability(g, s.average_policy())))")
  out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                       capture_output=True, text=True).stdout.split()
  assert out[0] == "python"
  from cfrpsro import CfrSolver, exploitability
  game = cached_game("kuhn")
  native = exploitability(game, CfrSolver(game, "cfr_plus").run(50)
                          .average_policy())
  assert float(out[1]) == pytest.approx(native, abs=1e-12)


def test_default_backend_is_compiled():
  assert kernels.BACKEND == "cython"
