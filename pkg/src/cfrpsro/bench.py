"""Experiment runners producing CSV convergence traces."""

from __future__ import annotations

import dataclasses
import io
import time
from typing import Iterable, Mapping, Sequence, TextIO

from cfrpsro import meta_solvers, psro
from cfrpsro.cfr import CfrSolver, make_components
from cfrpsro.exploitability import exploitability
from cfrpsro.games import Game, GameSpec, new_game

SUITES: dict[str, tuple[GameSpec, ...]] = {
    "train": (GameSpec("kuhn", 3), GameSpec("leduc", 2),
              GameSpec("goofspiel", num_cards=4),
              GameSpec("liars_dice", dice_sides=5)),
    "test": (GameSpec("kuhn", 4), GameSpec("leduc", 3),
             GameSpec("goofspiel", num_cards=5),
             GameSpec("liars_dice", dice_sides=6)),
}

CFR_COLUMNS = ("iteration", "exploitability", "elapsed_ms")
PSRO_COLUMNS = ("epoch", "population_size", "eval_exploitability", "elapsed_ms")


def cfr_trace(game: Game, variant: str, iterations: int = 1000,
              eval_every: int = 1, *, update_mode: str | None = None,
              params: Mapping[str, float] | None = None) -> list[tuple]:
  """Runs a CFR variant, scoring the average policy every `eval_every` steps.

  A final row is added when `iterations` is not a multiple of `eval_every`.
  `elapsed_ms` counts solver time only, not exploitability evaluation.
  """
  if eval_every < 1:
    raise ValueError(f"eval_every must be >= 1, got {eval_every}")
  if iterations < 1:
    raise ValueError(f"iterations must be >= 1, got {iterations}")
  solver = CfrSolver(game, make_components(variant, params, update_mode))
  rows, spent = [], 0.0
  while solver.iteration < iterations:
    steps = min(eval_every - solver.iteration % eval_every,
                iterations - solver.iteration)
    start = time.perf_counter()
    solver.run(steps)
    spent += time.perf_counter() - start
    rows.append((solver.iteration,
                 exploitability(game, solver.average_policy()), spent * 1e3))
  return rows


def psro_trace(game: Game, train: str, eval_: str, epochs: int = 100,
               eval_every: int = 1, *,
               train_params: Mapping | None = None,
               eval_params: Mapping | None = None,
               on_epoch=None) -> list[tuple]:
  """PSRO trace rows; `on_epoch(row, meta_game)` sees every epoch."""
  if eval_every < 1:
    raise ValueError(f"eval_every must be >= 1, got {eval_every}")
  train_solver = meta_solvers.make_solver(train, train_params, role="train")
  eval_solver = meta_solvers.make_solver(eval_, eval_params, role="eval")
  if game.num_players != 2 and "nash_lp" in (train, eval_):
    raise meta_solvers.NotTwoPlayerError(
        f"nash_lp needs a two-player game; {game.name} has "
        f"{game.num_players} players")
  trace = psro.run_psro(game, train_solver, eval_solver, epochs, on_epoch)
  return [(e.epoch, e.population_sizes[0], e.exploitability, e.elapsed_ms)
          for e in trace.epochs
          if e.epoch % eval_every == 0 or e.epoch == epochs]


@dataclasses.dataclass
class FitnessResult:
  fitness: float
  components: dict[str, float]


def fitness(specs: Iterable[GameSpec], variant: str, iterations: int = 1000,
            *, update_mode: str | None = None,
            params: Mapping[str, float] | None = None,
            log: TextIO | None = None) -> FitnessResult:
  """Negative mean final exploitability of `variant` over a set of games."""
  components = {}
  for spec in specs:
    game = new_game(spec)
    rows = cfr_trace(game, variant, iterations, iterations,
                     update_mode=update_mode, params=params)
    components[spec.name] = rows[-1][1]
    if log is not None:
      print(f"{spec.name}\t{rows[-1][1]:.12g}", file=log, flush=True)
  if not components:
    raise ValueError("fitness needs at least one game")
  return FitnessResult(-sum(components.values()) / len(components), components)


def format_value(v) -> str:
  if isinstance(v, int):
    return str(v)
  return format(float(v), ".12g")


def write_csv(out: TextIO, columns: Sequence[str], rows: Iterable[Sequence],
              metadata: Mapping[str, object] | None = None):
  """Writes an optional '#' metadata line, a header and 12-digit values."""
  if metadata:
    out.write("# " + " ".join(f"{k}={v}" for k, v in metadata.items()) + "\n")
  out.write(",".join(columns) + "\n")
  for row in rows:
    out.write(",".join(format_value(v) for v in row) + "\n")


def csv_text(columns, rows, metadata=None) -> str:
  buf = io.StringIO()
  write_csv(buf, columns, rows, metadata)
  return buf.getvalue()
