"""Meta-strategy solvers for PSRO.

Every solver maps a meta-game (one payoff tensor per player, indexed by the
joint population indices) to one mixed strategy per player. The classes
follow the train/eval solver contract

    solver.get_meta_strategy(game, policy_sets, meta_games) -> list of lists

and the functional forms take just `meta_games`.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np
from scipy import optimize

from cfrpsro import kernels


class MetaSolverError(ValueError):
  pass


class NotTwoPlayerError(MetaSolverError):
  pass


class NotZeroSumError(MetaSolverError):
  pass


class UnknownSolverError(MetaSolverError):
  pass


ZERO_SUM_TOLERANCE = 1e-9


def _as_arrays(meta_games) -> list[np.ndarray]:
  games = [np.asarray(m, dtype=np.float64) for m in meta_games]
  if len(games) != games[0].ndim:
    raise MetaSolverError(
        f"{len(games)} payoff tensors for a {games[0].ndim}-player meta-game")
  return games


def _sizes(games):
  return games[0].shape


def payoff_vector(meta_game: np.ndarray, strategies, player: int) -> np.ndarray:
  """Player's payoff per pure strategy against the others' mixtures."""
  vec = meta_game
  for other in reversed(range(meta_game.ndim)):
    if other != player:
      vec = np.tensordot(vec, strategies[other], axes=([other], [0]))
  return vec


def uniform_mss(meta_games) -> list[np.ndarray]:
  return [np.full(n, 1.0 / n) for n in _sizes(_as_arrays(meta_games))]


def _maxmin(a: np.ndarray) -> np.ndarray:
  """Row mixture maximizing the worst-case payoff of matrix `a`."""
  n, m = a.shape
  c = np.zeros(n + 1)
  c[-1] = -1.0
  a_ub = np.hstack([-a.T, np.ones((m, 1))])
  a_eq = np.ones((1, n + 1))
  a_eq[0, -1] = 0.0
  res = optimize.linprog(c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq,
                         b_eq=[1.0], bounds=[(0, None)] * n + [(None, None)],
                         method="highs")
  if not res.success:
    raise MetaSolverError(f"linear program failed: {res.message}")
  x = np.clip(res.x[:n], 0.0, None)
  return x / x.sum()


def nash_lp_mss(meta_games) -> list[np.ndarray]:
  """Exact Nash equilibrium of a two-player zero-sum meta-game."""
  games = _as_arrays(meta_games)
  if len(games) != 2:
    raise NotTwoPlayerError(
        f"nash_lp needs a two-player meta-game, got {len(games)} players")
  m0, m1 = games
  gap = float(np.max(np.abs(m0 + m1))) if m0.size else 0.0
  if gap > ZERO_SUM_TOLERANCE:
    raise NotZeroSumError(
        f"nash_lp needs a zero-sum meta-game (max |M0 + M1| = {gap:.3g})")
  return [_maxmin(m0), _maxmin(m1.T)]


def regret_matching_mss(meta_games, iterations: int = 10000) -> list[np.ndarray]:
  """Time-averaged simultaneous regret matching on the meta-game."""
  games = _as_arrays(meta_games)
  sizes = _sizes(games)
  strategies = [np.full(n, 1.0 / n) for n in sizes]
  regrets = [np.zeros(n) for n in sizes]
  totals = [np.zeros(n) for n in sizes]
  for _ in range(iterations):
    payoffs = [payoff_vector(m, strategies, p) for p, m in enumerate(games)]
    for p, u in enumerate(payoffs):
      regrets[p] += u - strategies[p] @ u
      totals[p] += strategies[p]
    for p, n in enumerate(sizes):
      pos = np.maximum(regrets[p], 0.0)
      s = pos.sum()
      strategies[p] = pos / s if s > 1e-12 else np.full(n, 1.0 / n)
  return [t / t.sum() for t in totals]


def project_floored_simplex(x: np.ndarray, floor: float) -> np.ndarray:
  """Euclidean projection onto {y : y >= floor, sum y = 1}."""
  n = len(x)
  mass = 1.0 - n * floor
  if mass < 0:
    raise ValueError(f"floor {floor} too large for {n} strategies")
  if mass <= 1e-15:
    return np.full(n, 1.0 / n)
  v = x - floor
  u = np.sort(v)[::-1]
  css = np.cumsum(u) - mass
  k = np.flatnonzero(u - css / np.arange(1, n + 1) > 0)[-1]
  tau = css[k] / (k + 1)
  return np.maximum(v - tau, 0.0) + floor


def prd_mss(meta_games, iterations: int = 50000, step: float = 1e-3,
            floor: float = 1e-10) -> list[np.ndarray]:
  """Time-averaged projected replicator dynamics."""
  games = _as_arrays(meta_games)
  sizes = _sizes(games)
  strategies = [np.full(n, 1.0 / n) for n in sizes]
  totals = [np.zeros(n) for n in sizes]
  for _ in range(iterations):
    payoffs = [payoff_vector(m, strategies, p) for p, m in enumerate(games)]
    for p, u in enumerate(payoffs):
      x = strategies[p]
      strategies[p] = project_floored_simplex(x + step * x * (u - x @ u), floor)
      totals[p] += strategies[p]
  return [t / t.sum() for t in totals]


def smoothed_best_pure(payoff_vec, temperature: float) -> np.ndarray:
  """Softmax of payoffs at a temperature, shifted by the max for stability."""
  payoff_vec = np.asarray(payoff_vec, dtype=np.float64)
  weights = np.exp((payoff_vec - np.max(payoff_vec)) / temperature)
  total = weights.sum()
  if total > 1e-12:
    return weights / total
  return np.full(len(payoff_vec), 1.0 / len(payoff_vec))


def hybrid_orm_solver_numpy(meta_games, iterations, blend=0.0, temperature=0.1,
                            momentum=0.0, gain_normalization=True,
                            diversity=0.0, return_average=True):
  """Reference implementation of `hybrid_orm_solver` for any player count."""
  games = _as_arrays(meta_games)
  n_players = len(games)
  sizes = _sizes(games)
  if any(n == 0 for n in sizes):
    return [np.array([]) for _ in range(n_players)]
  strategies = [np.full(n, 1.0 / n) for n in sizes]
  cum = [np.zeros(n) for n in sizes]
  avg = [np.zeros(n) for n in sizes]
  prev = [np.zeros(n) for n in sizes]
  for _ in range(iterations):
    for p in range(n_players):
      # Players later in the loop see strategies already updated this round.
      u = payoff_vector(games[p], strategies, p)
      centered = u - np.mean(u)
      gains = (1 + momentum) * centered - momentum * prev[p]
      gains = gains + diversity * (1.0 - strategies[p])
      if gain_normalization:
        top = np.max(np.abs(gains))
        if top > 1e-8:
          gains = gains / top
      cum[p] = np.maximum(0.0, cum[p] + gains)
      total = cum[p].sum()
      orm = cum[p] / total if total > 1e-12 else np.full(sizes[p], 1.0 / sizes[p])
      strategies[p] = ((1 - blend) * orm
                       + blend * smoothed_best_pure(u, temperature))
      prev[p] = centered
      if return_average:
        avg[p] += strategies[p]
  if not return_average:
    return strategies
  return [a / a.sum() if a.sum() > 0 else np.full(n, 1.0 / n)
          for a, n in zip(avg, sizes)]


def hybrid_orm_solver(meta_games, iterations, blend=0.0, temperature=0.1,
                      momentum=0.0, gain_normalization=True, diversity=0.0,
                      return_average=True) -> list[np.ndarray]:
  """Optimistic RM+ blended with a softmax toward the best pure strategy.

  Each internal iteration, per player in order: centered gains against the
  others' current mixtures get an optimistic momentum correction and a
  diversity bonus, are optionally scaled to unit max-norm, and feed floored
  cumulative regrets. The regret-matching mixture is then blended with
  `smoothed_best_pure(payoffs, temperature)` at weight `blend`.

  Returns:
    Time-averaged strategies, or last iterates if `return_average` is false.
  """
  games = _as_arrays(meta_games)
  iterations = int(iterations)
  if len(games) == 2:
    return kernels.hybrid_orm_2p(games[0], games[1], iterations, float(blend),
                                 float(temperature), float(momentum),
                                 bool(gain_normalization), float(diversity),
                                 bool(return_average))
  return hybrid_orm_solver_numpy(games, iterations, blend, temperature,
                                 momentum, gain_normalization, diversity,
                                 return_average)


def _solver_iterations(pop, base, per_policy, cap):
  return int(np.clip(int(base + per_policy * (pop - 1)), base, cap))


@dataclasses.dataclass(frozen=True)
class ShorTrainParams:
  base_iters: int = 1000
  iters_per_policy: int = 20
  max_iters: int = 5000
  initial_blend: float = 0.30
  final_blend: float = 0.05
  initial_temperature: float = 0.50
  final_temperature: float = 0.01
  initial_diversity: float = 0.05
  final_diversity: float = 0.001
  momentum: float = 0.5
  gain_normalization: bool = True
  anneal_horizon: int = 75


@dataclasses.dataclass(frozen=True)
class ShorEvalParams:
  base_iters: int = 8000
  iters_per_policy: int = 50
  max_iters: int = 15000
  blend: float = 0.01
  temperature: float = 0.001
  momentum: float = 0.2
  diversity: float = 0.0
  gain_normalization: bool = True
  last_iterate: bool = True


@dataclasses.dataclass(frozen=True)
class ShorSchedule:
  iterations: int
  blend: float
  temperature: float
  diversity: float


class MetaStrategySolver:
  """Base class; subclasses implement `solve(meta_games)`."""
  name = "base"

  def get_meta_strategy(self, game, policy_sets, meta_games):
    del game, policy_sets
    return [np.asarray(s).tolist() for s in self.solve(meta_games)]

  def solve(self, meta_games) -> list[np.ndarray]:
    raise NotImplementedError


class UniformSolver(MetaStrategySolver):
  name = "uniform"

  def solve(self, meta_games):
    return uniform_mss(meta_games)


class NashLPSolver(MetaStrategySolver):
  name = "nash_lp"

  def solve(self, meta_games):
    return nash_lp_mss(meta_games)


class RegretMatchingSolver(MetaStrategySolver):
  name = "rm"

  def __init__(self, iterations: int = 10000):
    self.iterations = iterations

  def solve(self, meta_games):
    return regret_matching_mss(meta_games, self.iterations)


class PRDSolver(MetaStrategySolver):
  name = "prd"

  def __init__(self, iterations: int = 50000, step: float = 1e-3,
               floor: float = 1e-10):
    self.iterations = iterations
    self.step = step
    self.floor = floor

  def solve(self, meta_games):
    return prd_mss(meta_games, self.iterations, self.step, self.floor)


class ShorTrainSolver(MetaStrategySolver):
  """Hybrid ORM+ training solver with annealed blend, temperature and bonus.

  Its counter advances on every call, so it must be called exactly once per
  PSRO epoch.
  """
  name = "shor"

  def __init__(self, params: ShorTrainParams = ShorTrainParams()):
    self.params = params
    self.epoch_counter = 0

  def schedule(self, counter: int, population: int) -> ShorSchedule:
    p = self.params
    progress = min(1.0, counter / p.anneal_horizon)

    def anneal(start, end):
      value = start * (1.0 - progress) + end * progress
      return float(np.clip(value, end, start))

    return ShorSchedule(
        _solver_iterations(population, p.base_iters, p.iters_per_policy,
                           p.max_iters),
        anneal(p.initial_blend, p.final_blend),
        anneal(p.initial_temperature, p.final_temperature),
        anneal(p.initial_diversity, p.final_diversity))

  def solve(self, meta_games):
    games = _as_arrays(meta_games)
    self.epoch_counter += 1
    s = self.schedule(self.epoch_counter, games[0].shape[0])
    return hybrid_orm_solver(games, s.iterations, s.blend, s.temperature,
                             self.params.momentum,
                             self.params.gain_normalization, s.diversity,
                             return_average=True)


class ShorEvalSolver(MetaStrategySolver):
  """Stateless last-iterate hybrid ORM+ solver for evaluation."""
  name = "shor_eval"

  def __init__(self, params: ShorEvalParams = ShorEvalParams()):
    self.params = params

  def iterations(self, population: int) -> int:
    p = self.params
    return _solver_iterations(population, p.base_iters, p.iters_per_policy,
                              p.max_iters)

  def solve(self, meta_games):
    games = _as_arrays(meta_games)
    p = self.params
    return hybrid_orm_solver(games, self.iterations(games[0].shape[0]),
                             p.blend, p.temperature, p.momentum,
                             p.gain_normalization, p.diversity,
                             return_average=not p.last_iterate)


TRAIN_SOLVERS = ("uniform", "nash_lp", "rm", "prd", "shor")
EVAL_SOLVERS = ("uniform", "nash_lp", "rm", "prd", "shor_eval")
_UNSUPPORTED = {
    "alpharank": "AlphaRank is not implemented in this package; "
                 "use one of the listed solvers",
}


def make_solver(name: str, params: dict | None = None,
                *, role: str = "train") -> MetaStrategySolver:
  """Builds a meta-solver by CLI name.

  Args:
    name: solver name; see `TRAIN_SOLVERS` and `EVAL_SOLVERS`.
    params: keyword overrides for the solver's parameters.
    role: "train" or "eval", selecting which names are accepted.
  """
  allowed = TRAIN_SOLVERS if role == "train" else EVAL_SOLVERS
  if name in _UNSUPPORTED:
    raise UnknownSolverError(f"{role} solver {name!r}: {_UNSUPPORTED[name]} "
                             f"({', '.join(allowed)})")
  if name not in allowed:
    raise UnknownSolverError(
        f"unknown {role} solver {name!r}; choose from {', '.join(allowed)}")
  params = dict(params or {})
  if name == "shor":
    return ShorTrainSolver(ShorTrainParams(**params))
  if name == "shor_eval":
    return ShorEvalSolver(ShorEvalParams(**params))
  cls = {"uniform": UniformSolver, "nash_lp": NashLPSolver,
         "rm": RegretMatchingSolver, "prd": PRDSolver}[name]
  return cls(**params)


def normalize(weights: Sequence[float]) -> np.ndarray:
  w = np.asarray(weights, dtype=np.float64)
  if np.any(w < 0):
    raise MetaSolverError("meta-strategy weights must be non-negative")
  total = w.sum()
  if not total > 0:
    raise MetaSolverError("meta-strategy weights sum to zero")
  return w / total
