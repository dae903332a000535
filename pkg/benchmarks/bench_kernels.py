"""Times the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--games kuhn:3 leduc:2 ...] [--repeat N]

Prints one row per (game, kernel) with the best-of-N time per call for each
backend and the speedup, after checking that both backends agree.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from cfrpsro import _pykernels
from cfrpsro.games import GameSpec, new_game

try:
  from cfrpsro import _ckernels
except ImportError:
  _ckernels = None


def _spec(text):
  family, _, arg = text.partition(":")
  arg = int(arg) if arg else None
  if family == "goofspiel":
    return GameSpec(family, num_cards=arg or 4)
  if family == "liars_dice":
    return GameSpec(family, dice_sides=arg or 5)
  return GameSpec(family, arg or 2)


def random_profile(tree, rng):
  raw = rng.random(tree.num_slots)
  sums = np.add.reduceat(raw, tree.infoset_slot_start[:-1])
  return raw / sums[tree.slot_infoset]


def _best(fn, repeat):
  number = 1
  while timeit.timeit(fn, number=number) < 0.05 and number < 10_000:
    number *= 4
  return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _cases(tree, probs, rng):
  update = np.ones(tree.num_players, dtype=bool)
  m = rng.normal(size=(30, 30))
  return {
      "reach": lambda k: k.reach_probabilities(tree, probs),
      "values": lambda k: k.node_values(tree, probs),
      "cfr_regrets": lambda k: k.cfr_regrets(tree, probs, update),
      "best_response": lambda k: k.best_response(tree, probs, 0),
      "orm_30x30_1k": lambda k: k.hybrid_orm_2p(m, -m, 1000, 0.1, 0.1, 0.5,
                                                True, 0.01, True),
  }


def _parts(result):
  return result if isinstance(result, (tuple, list)) else [result]


def main(argv=None):
  parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  parser.add_argument("--games", nargs="+",
                      default=["kuhn:3", "leduc:2", "goofspiel:4",
                               "liars_dice:5"])
  parser.add_argument("--repeat", type=int, default=5)
  args = parser.parse_args(argv)
  if _ckernels is None:
    raise SystemExit("compiled extension not built; run "
                     "`pip install -e . --no-build-isolation` first")
  rng = np.random.default_rng(0)
  print(f"{'game':<16}{'kernel':<16}{'cython':>12}{'numpy':>12}{'speedup':>9}")
  for text in args.games:
    game = new_game(_spec(text))
    tree = game.tree
    probs = random_profile(tree, rng)
    for name, call in _cases(tree, probs, rng).items():
      if name.startswith("orm") and text != args.games[0]:
        continue
      a, b = call(_ckernels), call(_pykernels)
      flat_a = np.concatenate([np.ravel(x) for x in _parts(a)])
      flat_b = np.concatenate([np.ravel(x) for x in _parts(b)])
      if not np.allclose(flat_a, flat_b, atol=1e-10):
        raise SystemExit(f"backends disagree on {name} for {game.name}")
      tc = _best(lambda: call(_ckernels), args.repeat)
      tp = _best(lambda: call(_pykernels), args.repeat)
      print(f"{game.name:<16}{name:<16}{tc * 1e3:>10.3f}ms{tp * 1e3:>10.3f}ms"
            f"{tp / tc:>8.1f}x")


if __name__ == "__main__":
  main()
